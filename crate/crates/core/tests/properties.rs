mod support;

use proptest::prelude::*;

use scenario_testbench::concretize::{concretize, ConcretizationConfig, Strategy as Sampling};
use scenario_testbench::eval::{activate, evaluate_case, evaluate_condition, fulfillment, metric_avg_decel, IncrementalEvaluator};
use scenario_testbench::scenario::{is_member, validate_concrete_with_parent};
use scenario_testbench::spec::{
    build_test_case, builtin_metric_catalog, parse_condition, ApplicationPeriod, ConditionExpr, EvaluationScale,
    Judgement, MetricName, PeriodEnd, ScalePoint, ThresholdDirection,
};
use scenario_testbench::speedcontrol;
use scenario_testbench::units::{Quantity, Unit};

use support::{brute_force_window_means, close, flag_runs, synthetic};

fn flags(len: std::ops::Range<usize>) -> impl Strategy<Value = Vec<bool>> {
    prop::collection::vec(any::<bool>(), len)
}

fn col(b: &[bool]) -> Vec<Option<f64>> {
    b.iter().map(|&x| Some(if x { 1.0 } else { 0.0 })).collect()
}

fn sample_set(period: &ApplicationPeriod, data: &scenario_testbench::engine::EvaluationData) -> Vec<usize> {
    activate(period, data)
        .unwrap()
        .intervals
        .iter()
        .flat_map(|iv| iv.start..iv.end)
        .collect()
}

proptest! {
    #[test]
    fn once_never_deactivates(a in flags(1..300)) {
        let data = synthetic(0.1, vec![("a", col(&a))]);
        let once = evaluate_condition(&parse_condition("once(flag(a))").unwrap(), &data).unwrap();
        let first = a.iter().position(|&x| x);
        for (i, v) in once.iter().enumerate() {
            prop_assert_eq!(*v, first.is_some_and(|f| i >= f));
        }
    }

    #[test]
    fn intervals_are_sorted_disjoint_and_non_empty(a in flags(1..300), k in 1usize..20, end in 0usize..3) {
        let ev: Vec<bool> = a.iter().enumerate().map(|(i, _)| i % 17 == 5).collect();
        let data = synthetic(0.1, vec![("a", col(&a)), ("event.e", col(&ev))]);
        let end = match end {
            0 => PeriodEnd::ConditionNoLongerFulfilled,
            1 => PeriodEnd::Elapsed { duration: k as f64 * 0.1 },
            _ => PeriodEnd::Event { event: "e".into() },
        };
        let ivs = activate(&ApplicationPeriod { start: ConditionExpr::flag("a"), end }, &data).unwrap().intervals;
        for iv in &ivs {
            prop_assert!(iv.start < iv.end && iv.end <= data.len());
            prop_assert!(iv.t_start < iv.t_end);
        }
        for w in ivs.windows(2) {
            prop_assert!(w[0].end <= w[1].start);
        }
    }

    #[test]
    fn and_shrinks_or_grows_the_active_set(a in flags(50..51), b in flags(50..51)) {
        let data = synthetic(0.1, vec![("a", col(&a)), ("b", col(&b))]);
        let base = sample_set(&ApplicationPeriod::while_holds(ConditionExpr::flag("a")), &data);
        let and = sample_set(&ApplicationPeriod::while_holds(ConditionExpr::flag("a").and(ConditionExpr::flag("b"))), &data);
        let or = sample_set(&ApplicationPeriod::while_holds(ConditionExpr::flag("a").or(ConditionExpr::flag("b"))), &data);
        prop_assert!(and.iter().all(|i| base.contains(i)));
        prop_assert!(base.iter().all(|i| or.contains(i)));
    }

    #[test]
    fn elapsed_periods_never_outlast_their_duration(a in flags(1..200), k in 1usize..30) {
        let data = synthetic(0.05, vec![("a", col(&a))]);
        let period = ApplicationPeriod { start: ConditionExpr::flag("a"), end: PeriodEnd::Elapsed { duration: k as f64 * 0.05 } };
        for iv in activate(&period, &data).unwrap().intervals {
            prop_assert!(iv.len() <= k);
            prop_assert!(iv.len() == k || iv.end == data.len());
            prop_assert!(a[iv.start] && (iv.start == 0 || !a[iv.start - 1]));
        }
    }

    #[test]
    fn increasing_scales_are_monotone_and_bounded(
        mut xs in prop::collection::vec(-50.0f64..50.0, 2..6),
        v1 in -60.0f64..60.0,
        v2 in -60.0f64..60.0,
    ) {
        xs.sort_by(f64::total_cmp);
        xs.dedup();
        prop_assume!(xs.len() >= 2);
        let n = xs.len() - 1;
        let scale = EvaluationScale {
            breakpoints: xs.iter().enumerate().map(|(i, &x)| ScalePoint {
                value: Quantity::new(x, Unit::MeterPerSecond),
                fulfillment: 100.0 * i as f64 / n as f64,
            }).collect(),
            out_of_domain: 0.0,
        };
        let (lo, hi) = (v1.min(v2), v1.max(v2));
        let (f_lo, f_hi) = (scale.fulfillment(lo), scale.fulfillment(hi));
        prop_assert!((0.0..=100.0).contains(&f_lo) && (0.0..=100.0).contains(&f_hi));
        let domain = xs[0]..=xs[n];
        if domain.contains(&lo) && domain.contains(&hi) {
            prop_assert!(f_lo <= f_hi + 1e-9);
        } else {
            prop_assert!(domain.contains(&lo) || f_lo == 0.0);
        }
        for (i, &x) in xs.iter().enumerate() {
            prop_assert!(close(scale.fulfillment(x), 100.0 * i as f64 / n as f64, 1e-12));
        }
    }

    #[test]
    fn thresholds_are_all_or_nothing(limit in -10.0f64..10.0, v in -20.0f64..20.0, not_below in any::<bool>()) {
        let direction = if not_below { ThresholdDirection::MustNotFallBelow } else { ThresholdDirection::MustNotExceed };
        let j = Judgement::Threshold { value: Quantity::new(limit, Unit::MeterPerSecondSquared), direction };
        let f = fulfillment(&j, v);
        let ok = if not_below { v >= limit } else { v <= limit };
        prop_assert_eq!(f, if ok { 100.0 } else { 0.0 });
    }

    #[test]
    fn window_means_match_the_oracle(
        active in flags(10..300),
        a in prop::collection::vec(0.0f64..5.0, 300),
        k in 1usize..25,
        dt_index in 0usize..4,
    ) {
        let dt = [0.01, 0.05, 0.1, 0.2][dt_index];
        let window = k as f64 * dt;
        let a: Vec<Option<f64>> = a[..active.len()].iter().map(|&x| Some(x)).collect();
        let data = synthetic(dt, vec![("acc_active", col(&active)), ("a_ego", a.clone())]);
        let ivs = activate(&ApplicationPeriod::while_holds(ConditionExpr::flag("acc_active")), &data).unwrap();
        let got = metric_avg_decel(&data, &ivs, window, &MetricName::new("m")).unwrap();
        let want = brute_force_window_means(&data.times(), &a, &flag_runs(&col(&active)), window, dt);
        prop_assert_eq!(got.len(), want.len());
        for (g, (t, m)) in got.iter().zip(&want) {
            prop_assert!(close(g.time, *t, 1e-12) && close(g.value, *m, 1e-12));
        }
    }

    #[test]
    fn incremental_equals_batch(
        active in flags(20..200),
        v in prop::collection::vec(30.0f64..35.0, 200),
        a in prop::collection::vec(0.0f64..4.0, 200),
        pulse in 0usize..200,
    ) {
        let n = active.len();
        let pulse: Vec<bool> = (0..n).map(|i| i == pulse % n).collect();
        let mut data = synthetic(
            0.01,
            vec![
                ("v_ego", v[..n].iter().map(|&x| Some(x)).collect()),
                ("a_ego", a[..n].iter().map(|&x| Some(x)).collect()),
                ("acc_active", col(&active)),
                ("v_set", vec![Some(33.0); n]),
                ("a_target", vec![Some(0.0); n]),
                ("event.acc_activation", col(&pulse)),
                ("gap", vec![None; n]),
                ("v_lead", vec![None; n]),
            ],
        );
        let mut criteria = speedcontrol::criteria();
        criteria[1].application_period.end = PeriodEnd::Elapsed { duration: 0.3 };
        let mut third = speedcontrol::deceleration_criterion();
        third.id = "EC3".into();
        third.application_period.end = PeriodEnd::Event { event: "acc_activation".into() };
        criteria.push(third);
        let tc = build_test_case(&speedcontrol::concrete_scenario(), criteria).unwrap();
        data.header.scenario_id = tc.scenario.id.clone();
        let metrics = builtin_metric_catalog();
        let mut live = IncrementalEvaluator::new(&tc, &metrics).unwrap();
        for i in 0..n {
            live.observe(&data, i);
        }
        prop_assert_eq!(live.finish(&data).unwrap(), evaluate_case(&tc, &metrics, &data).unwrap());
    }

    #[test]
    fn random_concretization_stays_inside_the_logical_scenario(seed in any::<u64>(), count in 1usize..8) {
        let logical = speedcontrol::logical_scenario();
        let cfg = ConcretizationConfig { strategy: Sampling::UniformRandom { count, seed }, id_prefix: "R".into() };
        let scenarios = concretize(&logical, &cfg).unwrap();
        prop_assert_eq!(scenarios.len(), count);
        for c in &scenarios {
            prop_assert_eq!(is_member(c, &logical), Ok(true));
            let report = validate_concrete_with_parent(c, Some(&logical));
            prop_assert!(report.is_empty(), "{}", report);
        }
        prop_assert_eq!(&concretize(&logical, &cfg).unwrap(), &scenarios);
    }
}

#[test]
fn grid_and_boundary_concretizations_are_members() {
    let logical = speedcontrol::logical_scenario();
    for strategy in [
        Sampling::Grid { points_per_parameter: 2 },
        Sampling::Boundary { include_center: true },
    ] {
        let cfg = ConcretizationConfig { strategy, id_prefix: "G".into() };
        let all = concretize(&logical, &cfg).unwrap();
        assert!(!all.is_empty());
        for c in &all {
            assert_eq!(is_member(c, &logical), Ok(true), "{}", c.id);
        }
    }
}
