//! Runs the model validators on the SpeedControl fixtures and on a few
//! broken variants.

use scenario_testbench::product::{validate_decomposition, DecompositionNode, NodeKind};
use scenario_testbench::scenario::{validate_concrete, validate_logical, ObjectKind};
use scenario_testbench::spec::validate_specification;
use scenario_testbench::speedcontrol;
use scenario_testbench::ValidationReport;

fn show(what: &str, r: &ValidationReport) {
    if r.is_empty() {
        println!("{what}: ok");
    } else {
        println!("{what}:\n{r}");
    }
}

fn main() {
    show("logical scenario", &validate_logical(&speedcontrol::logical_scenario()));
    show("concrete scenario", &validate_concrete(&speedcontrol::concrete_scenario()));
    show("specification", &validate_specification(&speedcontrol::specification()));
    show("ACC decomposition", &validate_decomposition(&speedcontrol::acc_system_decomposition()));

    let mut no_ego = speedcontrol::concrete_scenario();
    no_ego.objects[0].kind = ObjectKind::OtherVehicle;
    show("scenario without ego", &validate_concrete(&no_ego));

    let mut inverted = speedcontrol::logical_scenario();
    let p = &mut inverted.parameters[0];
    std::mem::swap(&mut p.min, &mut p.max);
    show("inverted parameter range", &validate_logical(&inverted));

    // one hardware part and one software unit make a valid component
    use NodeKind::*;
    let mixed = DecompositionNode::new(
        "sys",
        System,
        vec![DecompositionNode::new(
            "ecu",
            Component,
            vec![DecompositionNode::leaf("mcu", HardwarePart), DecompositionNode::leaf("fw", SoftwareUnit)],
        )],
    );
    show("component with one HW part and one SW unit", &validate_decomposition(&mixed));
    let empty = DecompositionNode::new("sys", System, vec![DecompositionNode::new("hw", HardwareComponent, vec![])]);
    show("hardware component without parts", &validate_decomposition(&empty));
}
