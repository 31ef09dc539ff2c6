//! Evaluates a recorded trace CSV against the SpeedControl test case.
//! Without an argument a trace is produced first.
//!
//! `cargo run --example evaluate_trace -- out/trace-<case>.csv`

use std::path::PathBuf;

use scenario_testbench::engine::{run_test_case, AccController, AccParams};
use scenario_testbench::eval::evaluate_case;
use scenario_testbench::format::{read_trace_csv, write_trace_csv};
use scenario_testbench::speedcontrol;

fn main() {
    let spec = speedcontrol::specification();
    let tc = &spec.cases[0];
    let path = match std::env::args().nth(1) {
        Some(p) => PathBuf::from(p),
        None => {
            let trace = run_test_case(&speedcontrol::hil_configuration(), tc, &mut AccController::new(AccParams::default()))
                .expect("run");
            let path = std::env::temp_dir().join(format!("trace-{}.csv", tc.id));
            write_trace_csv(&trace.data, std::fs::File::create(&path).unwrap()).unwrap();
            path
        }
    };
    let data = read_trace_csv(&path).unwrap_or_else(|e| panic!("{e}"));
    let e = evaluate_case(tc, &spec.metrics, &data).unwrap_or_else(|e| panic!("{e}"));
    println!("{}: {}", path.display(), e.verdict.as_str());
    for c in &e.criteria {
        let worst = c.results.iter().map(|r| r.fulfillment).fold(f64::INFINITY, f64::min);
        println!(
            "  {} {}: {} results in {} interval(s), lowest fulfillment {worst} %",
            c.criterion,
            c.metric,
            c.results.len(),
            c.active_intervals.len()
        );
    }
}
