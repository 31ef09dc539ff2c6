//! Derives concrete scenarios from the logical SpeedControl scenario with
//! each sampling strategy and prints the chosen parameter values.

use scenario_testbench::concretize::{concretize, ConcretizationConfig, Strategy};
use scenario_testbench::scenario::is_member;
use scenario_testbench::speedcontrol;

fn main() {
    let logical = speedcontrol::logical_scenario();
    let strategies = [
        ("grid", Strategy::Grid { points_per_parameter: 2 }),
        ("boundary", Strategy::Boundary { include_center: true }),
        ("random", Strategy::UniformRandom { count: 4, seed: 42 }),
    ];
    for (name, strategy) in strategies {
        let cfg = ConcretizationConfig {
            strategy,
            id_prefix: format!("SC-{name}"),
        };
        let scenarios = concretize(&logical, &cfg).expect("valid logical scenario");
        println!("{name}: {} scenarios", scenarios.len());
        for c in scenarios.iter().take(4) {
            let values: Vec<String> = c.parameter_values.iter().map(|(k, q)| format!("{k}={q}")).collect();
            assert_eq!(is_member(c, &logical), Ok(true));
            println!("  {} {}", c.id, values.join(" "));
        }
    }
}
