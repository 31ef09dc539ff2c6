//! Assigns the scenarios recorded on a real-world drive to the logical
//! scenarios of a catalog.

use scenario_testbench::concretize::assign_drive;
use scenario_testbench::speedcontrol;

fn main() {
    let drive = speedcontrol::real_world_drive();
    let catalog = [speedcontrol::logical_scenario()];
    println!("{} ({}, {})", drive.id, drive.metadata.route, drive.metadata.date);
    for (scenario, matches) in assign_drive(&drive, &catalog) {
        if matches.is_empty() {
            println!("  {scenario}: no catalog entry");
        } else {
            println!("  {scenario}: {}", matches.join(", "));
        }
    }
}
