//! Parses application-period conditions, prints their normal form and
//! evaluates them over a small table.

use scenario_testbench::engine::EvaluationData;
use scenario_testbench::eval::{activate, evaluate_condition};
use scenario_testbench::spec::{parse_condition, ApplicationPeriod, PeriodEnd};

fn main() {
    let v = [36.0, 35.0, 34.0, 33.3, 33.0, 33.2, 33.4, 33.1];
    let on = [0.0, 1.0, 1.0, 1.0, 1.0, 1.0, 0.0, 1.0];
    let data = EvaluationData::from_columns(
        0.5,
        vec![
            ("v_ego".into(), v.iter().map(|&x| Some(x)).collect()),
            ("v_set".into(), vec![Some(33.3); v.len()]),
            ("acc_active".into(), on.iter().map(|&x| Some(x)).collect()),
        ],
    );
    for text in [
        "flag(acc_active)",
        "flag(acc_active) && once(v_ego == v_set ~ 0)",
        "v_ego<=33.2||(v_ego >= 35)",
        "once(flag(acc_active) && v_ego < 34",
    ] {
        match parse_condition(text) {
            Ok(expr) => {
                let truth: String = evaluate_condition(&expr, &data)
                    .unwrap()
                    .iter()
                    .map(|&b| if b { '#' } else { '.' })
                    .collect();
                println!("{text:48} => {expr}\n{:48}    {truth}", "");
            }
            Err(e) => println!("{text:48} => error: {e}"),
        }
    }
    let start = parse_condition("flag(acc_active)").unwrap();
    let period = ApplicationPeriod { start, end: PeriodEnd::Elapsed { duration: 1.0 } };
    let spans: Vec<_> = activate(&period, &data).unwrap().intervals.iter().map(|i| (i.t_start, i.t_end)).collect();
    println!("flag(acc_active) for 1 s: {spans:?}");
}
