mod support;

use proptest::prelude::*;

use scenario_testbench::engine::{
    builtin_acc_port, run_test_case, run_test_case_observed, AccController, AccParams, EngineError, LoopMode,
    PortSignal, Signals, TestObject, TestObjectPort,
};
use scenario_testbench::eval::{evaluate_case, IncrementalEvaluator};
use scenario_testbench::speedcontrol;
use scenario_testbench::units::{kmh, Unit};

/// Commands `accel` from step `from` on; records what it was shown.
struct Step {
    from: usize,
    accel: f64,
    calls: usize,
    seen_v: Vec<f64>,
}

impl Step {
    fn new(from: usize, accel: f64) -> Self {
        Step { from, accel, calls: 0, seen_v: Vec::new() }
    }
}

impl TestObject for Step {
    fn port(&self) -> TestObjectPort {
        builtin_acc_port()
    }

    fn step(&mut self, _time: f64, inputs: &Signals) -> Signals {
        self.seen_v.push(inputs["v_ego"]);
        let a = if self.calls >= self.from { self.accel } else { 0.0 };
        self.calls += 1;
        Signals::from([("a_target".to_owned(), a), ("acc_active".to_owned(), 0.0)])
    }
}

#[test]
fn trace_layout() {
    let tc = speedcontrol::test_case();
    let trace = run_test_case(&speedcontrol::hil_configuration(), &tc, &mut AccController::new(AccParams::default()))
        .unwrap();
    let d = &trace.data;
    assert_eq!(d.len(), 3001);
    assert_eq!(trace.samples.len(), 3001);
    assert_eq!(d.header.case_id, tc.id);
    assert!(d.header.valid);
    for (i, t) in d.times().iter().enumerate() {
        assert_eq!(*t, i as f64 * 0.01);
    }
    let names: Vec<&str> = d.columns.iter().map(|c| c.name.as_str()).collect();
    assert_eq!(
        names,
        ["time", "v_ego", "a_ego", "acc_active", "v_set", "a_target", "gap", "v_lead", "event.acc_activation"]
    );
    // no lead vehicle: lead columns stay absent
    assert!(d.column("gap").unwrap().iter().all(Option::is_none));

    // the activation event is a single pulse at 2 s, the ACC answers one step later
    let event = d.column("event.acc_activation").unwrap();
    let pulses: Vec<usize> = (0..d.len()).filter(|&i| event[i] == Some(1.0)).collect();
    assert_eq!(pulses, [200]);
    let active = d.column("acc_active").unwrap();
    assert!(active[..201].iter().all(|a| *a == Some(0.0)));
    assert!(active[201..].iter().all(|a| *a == Some(1.0)));
    assert_eq!(d.column("v_set").unwrap()[200], Some(kmh(120.0)));
    assert_eq!(d.column("v_ego").unwrap()[0], Some(kmh(150.0)));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn closed_loop_feedback_is_delayed_by_one_step(from in 1usize..2900, accel in -2.9f64..-0.1) {
        let tc = speedcontrol::test_case();
        let mut object = Step::new(from, accel);
        let trace = run_test_case(&speedcontrol::hil_configuration(), &tc, &mut object).unwrap();
        let a = trace.data.column("a_ego").unwrap();
        let commanded = trace.data.column("a_target").unwrap();
        prop_assert!(a[..=from].iter().all(|x| *x == Some(0.0)));
        prop_assert_eq!(a[from + 1], Some(-accel));
        prop_assert_eq!(commanded[from], Some(0.0));
        prop_assert_eq!(commanded[from + 1], Some(accel));
        // the object sees its own command two steps later, through the speed
        let v = &object.seen_v;
        prop_assert_eq!(v[from + 1], v[from]);
        prop_assert_eq!(v[from + 2], v[from + 1] + accel * 0.01);
    }

    #[test]
    fn open_loop_ignores_the_object(from in 0usize..3000, accel in -3.0f64..2.0) {
        let tc = speedcontrol::test_case();
        let mut cfg = speedcontrol::hil_configuration();
        cfg.loop_mode = LoopMode::Open;
        let mut object = Step::new(from, accel);
        let trace = run_test_case(&cfg, &tc, &mut object).unwrap();
        let v = trace.data.column("v_ego").unwrap();
        prop_assert!(v.iter().all(|x| *x == Some(kmh(150.0))));
        prop_assert!(trace.data.column("a_ego").unwrap().iter().all(|x| *x == Some(0.0)));
    }
}

#[test]
fn commands_are_clamped_to_the_vehicle_limits() {
    let tc = speedcontrol::test_case();
    let trace = run_test_case(&speedcontrol::hil_configuration(), &tc, &mut Step::new(0, -100.0)).unwrap();
    let a = trace.data.column("a_ego").unwrap();
    assert_eq!(a[1], Some(8.0));
    // and the ego never rolls backwards
    assert!(trace.data.column("v_ego").unwrap().iter().all(|v| v.unwrap() >= 0.0));
    assert_eq!(trace.data.column("v_ego").unwrap().last().copied(), Some(Some(0.0)));
}

struct Renamed;

impl TestObject for Renamed {
    fn port(&self) -> TestObjectPort {
        let mut p = builtin_acc_port();
        p.outputs[0] = PortSignal::new("torque", Unit::MeterPerSecondSquared);
        p
    }

    fn step(&mut self, _time: f64, _inputs: &Signals) -> Signals {
        Signals::new()
    }
}

struct Silent;

impl TestObject for Silent {
    fn port(&self) -> TestObjectPort {
        builtin_acc_port()
    }

    fn step(&mut self, _time: f64, _inputs: &Signals) -> Signals {
        Signals::from([("a_target".to_owned(), 0.0)])
    }
}

#[test]
fn port_contract_violations() {
    let tc = speedcontrol::test_case();
    let cfg = speedcontrol::hil_configuration();
    assert!(matches!(run_test_case(&cfg, &tc, &mut Renamed), Err(EngineError::PortMismatch { .. })));
    match run_test_case(&cfg, &tc, &mut Silent) {
        Err(EngineError::MissingOutput(s)) => assert_eq!(s, "acc_active"),
        other => panic!("{other:?}"),
    }
    let mut broken = cfg.clone();
    broken.elements.clear();
    assert!(matches!(
        run_test_case(&broken, &tc, &mut Silent),
        Err(EngineError::InvalidConfiguration(_))
    ));
}

#[test]
fn incremental_evaluation_during_the_run_equals_batch() {
    let spec = speedcontrol::specification();
    let tc = &spec.cases[0];
    for params in [AccParams::default(), AccParams { a_min: -4.5, ..AccParams::default() }] {
        let mut live = IncrementalEvaluator::new(tc, &spec.metrics).unwrap();
        let trace = run_test_case_observed(
            &speedcontrol::hil_configuration(),
            tc,
            &mut AccController::new(params),
            &mut |data, i| live.observe(data, i),
        )
        .unwrap();
        let batch = evaluate_case(tc, &spec.metrics, &trace.data).unwrap();
        assert_eq!(live.finish(&trace.data).unwrap(), batch);
    }
}

#[test]
fn runs_are_repeatable() {
    let tc = speedcontrol::test_case();
    let cfg = speedcontrol::hil_configuration();
    let mut object = AccController::new(AccParams::default());
    let a = run_test_case(&cfg, &tc, &mut object).unwrap();
    // the same object instance is reset between runs
    let b = run_test_case(&cfg, &tc, &mut object).unwrap();
    assert_eq!(a.data, b.data);
}
