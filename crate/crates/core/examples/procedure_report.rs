//! A procedure over several initial speeds with a cross-case criterion,
//! evaluated into a report and printed in both output formats.

use std::collections::BTreeMap;

use scenario_testbench::concretize::instantiate;
use scenario_testbench::engine::{run_test_case, AccController, AccParams};
use scenario_testbench::eval::{evaluate_case, evaluate_procedure, render_text};
use scenario_testbench::spec::{build_test_case, builtin_metric_catalog, CriterionScope};
use scenario_testbench::speedcontrol;

fn main() {
    let logical = speedcontrol::logical_scenario();
    // instantiate takes values in each range's unit
    let base: BTreeMap<String, f64> = speedcontrol::concrete_scenario()
        .parameter_values
        .iter()
        .map(|(k, q)| (k.clone(), logical.parameter(k).unwrap().unit.from_si(q.si_value())))
        .collect();
    let metrics = builtin_metric_catalog();
    let cfg = speedcontrol::hil_configuration();

    let mut cases = Vec::new();
    let mut evaluations = Vec::new();
    let mut traces = BTreeMap::new();
    for speed in [130.0, 150.0, 160.0] {
        let mut values = base.clone();
        values.insert("initial_speed".into(), speed);
        let scenario = instantiate(&logical, &format!("SpeedControl-{speed}"), &values);
        let tc = build_test_case(&scenario, speedcontrol::criteria()).unwrap();
        let trace = run_test_case(&cfg, &tc, &mut AccController::new(AccParams::default())).unwrap();
        evaluations.push(evaluate_case(&tc, &metrics, &trace.data).unwrap());
        traces.insert(tc.id.clone(), trace.data);
        cases.push(tc.id);
    }

    let mut procedure = speedcontrol::procedure(&cases[0]);
    procedure.cases = cases;
    let mut across = speedcontrol::deceleration_criterion();
    across.id = "EC-all".into();
    across.scope = CriterionScope::Procedure;
    procedure.cross_case_criteria.push(across);

    let report = evaluate_procedure(&procedure, &metrics, &evaluations, &traces).unwrap();
    print!("{}", render_text(&report));
    let json = report.to_json();
    println!("machine-readable report: {} bytes, schema {}", json.len(), report.schema_version);
}
