//! Plugs a user-defined controller into the engine: a bang-bang speed
//! controller, evaluated with the SpeedControl criteria.

use scenario_testbench::engine::{builtin_acc_port, run_test_case, Signals, TestObject, TestObjectPort};
use scenario_testbench::eval::evaluate_case;
use scenario_testbench::speedcontrol;

struct BangBang {
    decel: f64,
}

impl TestObject for BangBang {
    fn port(&self) -> TestObjectPort {
        builtin_acc_port()
    }

    fn step(&mut self, _time: f64, inputs: &Signals) -> Signals {
        let on = inputs["acc_command"] != 0.0;
        let a = if on && inputs["v_ego"] > inputs["v_set"] { self.decel } else { 0.0 };
        Signals::from([
            ("a_target".to_owned(), a),
            ("acc_active".to_owned(), if on { 1.0 } else { 0.0 }),
        ])
    }
}

fn main() {
    let spec = speedcontrol::specification();
    let tc = &spec.cases[0];
    for decel in [-2.0, -5.0] {
        let trace = run_test_case(&speedcontrol::hil_configuration(), tc, &mut BangBang { decel }).expect("run");
        let e = evaluate_case(tc, &spec.metrics, &trace.data).expect("evaluate");
        let summary: Vec<String> = e
            .criteria
            .iter()
            .map(|c| format!("{} {}", c.criterion, if c.fulfilled { "fulfilled" } else { "not fulfilled" }))
            .collect();
        println!("decel {decel} m/s²: {} ({})", e.verdict.as_str(), summary.join(", "));
    }
}
