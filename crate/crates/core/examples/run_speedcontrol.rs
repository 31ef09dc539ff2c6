//! Executes the SpeedControl test case on the HIL configuration with the
//! built-in ACC and prints the evaluation.

use std::collections::BTreeMap;

use scenario_testbench::engine::{run_test_case, AccController, AccParams};
use scenario_testbench::eval::{evaluate_case, evaluate_procedure, render_text};
use scenario_testbench::speedcontrol;

fn main() {
    let a_min: f64 = std::env::args().nth(1).map_or(-3.0, |s| s.parse().expect("deceleration limit"));
    let spec = speedcontrol::specification();
    let tc = &spec.cases[0];
    let mut acc = AccController::new(AccParams { a_min, ..AccParams::default() });
    let trace = run_test_case(&speedcontrol::hil_configuration(), tc, &mut acc).expect("run");
    let v = trace.data.column("v_ego").unwrap();
    println!(
        "{} samples, v_ego {:.2} -> {:.2} km/h",
        trace.data.len(),
        v[0].unwrap() * 3.6,
        v.last().unwrap().unwrap() * 3.6
    );
    let evaluation = evaluate_case(tc, &spec.metrics, &trace.data).expect("evaluate");
    let traces = BTreeMap::from([(tc.id.clone(), trace.data)]);
    let report = evaluate_procedure(&spec.procedures[0], &spec.metrics, &[evaluation], &traces).expect("report");
    print!("{}", render_text(&report));
}
