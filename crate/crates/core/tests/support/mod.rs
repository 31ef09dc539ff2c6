//! Shared fixtures and independent oracles for the integration tests.
#![allow(dead_code)]

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use scenario_testbench::engine::EvaluationData;
use scenario_testbench::product::{
    validate_decomposition, validate_product, DecompositionNode, NodeKind, NodeRecord, tree_from_records,
};
use scenario_testbench::scenario::{
    validate_concrete, validate_drive, validate_functional, validate_logical, Behavior, ObjectKind, ObjectRole,
    SelfRepresentation,
};
use scenario_testbench::spec::{
    build_test_case, validate_plan, validate_specification, CompareOp, ConditionExpr, MetricName, Operand,
};
use scenario_testbench::engine::{validate_bench, validate_configuration, Element, ElementRole};
use scenario_testbench::speedcontrol;
use scenario_testbench::ValidationReport;

pub fn bundle() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/speedcontrol")
}

/// Runs the command line in-process; returns the exit code and stdout.
pub fn cli(args: &[&str]) -> (i32, String) {
    let mut out = Vec::new();
    let mut full = vec!["scenario-testbench"];
    full.extend_from_slice(args);
    let code = scenario_testbench::cli::run_with(full, &mut out);
    (code, String::from_utf8(out).unwrap())
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn close(a: f64, b: f64, rel: f64) -> bool {
    a == b || (a - b).abs() <= rel * a.abs().max(b.abs())
}

/// Maximal runs where the flag column is non-zero, as index spans.
pub fn flag_runs(values: &[Option<f64>]) -> Vec<(usize, usize)> {
    let mut runs = Vec::new();
    let mut start = None;
    for (i, v) in values.iter().enumerate() {
        let on = v.is_some_and(|v| v != 0.0);
        match (on, start) {
            (true, None) => start = Some(i),
            (false, Some(s)) => {
                runs.push((s, i));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        runs.push((s, values.len()));
    }
    runs
}

/// Window means by explicit enumeration: for every sample `s` of a span,
/// collect the samples whose time lies in `[t_s - window, t_s]`, and keep
/// the mean only if every grid point of that window is a sample of the
/// same span.
pub fn brute_force_window_means(
    times: &[f64],
    a: &[Option<f64>],
    spans: &[(usize, usize)],
    window: f64,
    dt: f64,
) -> Vec<(f64, f64)> {
    let eps = dt * 1e-6;
    let mut out = Vec::new();
    for &(lo, hi) in spans {
        for s in lo..hi {
            let t_s = times[s];
            // times are sorted; start at the first one inside the window
            let first = times.partition_point(|&t| t < t_s - window - eps);
            let members: Vec<usize> = (first..times.len())
                .take_while(|&j| times[j] <= t_s + eps)
                .collect();
            if members.iter().any(|&j| j < lo || j >= hi) {
                continue;
            }
            // near the start of the trace the window may reach back to grid
            // points that were never sampled
            let before_first = times[members[0]] - dt;
            if before_first >= t_s - window - eps {
                continue;
            }
            let mut sum = 0.0;
            let mut ok = true;
            for &j in &members {
                match a[j] {
                    Some(v) => sum += v,
                    None => ok = false,
                }
            }
            if ok {
                out.push((t_s, sum / members.len() as f64));
            }
        }
    }
    out
}

pub fn synthetic(dt: f64, columns: Vec<(&str, Vec<Option<f64>>)>) -> EvaluationData {
    EvaluationData::from_columns(dt, columns.into_iter().map(|(n, v)| (n.to_owned(), v)).collect())
}

/// Random 0/1 flags with runs of random length.
pub fn random_flags(rng: &mut impl Rng, len: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(len);
    let mut on = rng.random_bool(0.5);
    while out.len() < len {
        let run = rng.random_range(1..=len.max(2) / 2);
        for _ in 0..run.min(len - out.len()) {
            out.push(if on { 1.0 } else { 0.0 });
        }
        on = !on;
    }
    out
}

// ---- condition ASTs -------------------------------------------------------

pub fn random_ident(rng: &mut impl Rng) -> String {
    const FIRST: &[u8] = b"abcdefghijklmnopqrstuvwxyz_";
    const REST: &[u8] = b"abcdefghijklmnopqrstuvwxyz0123456789_";
    let mut s = String::new();
    s.push(FIRST[rng.random_range(0..FIRST.len())] as char);
    for _ in 0..rng.random_range(0..8) {
        s.push(REST[rng.random_range(0..REST.len())] as char);
    }
    s
}

fn random_number(rng: &mut impl Rng) -> f64 {
    match rng.random_range(0..4) {
        0 => rng.random_range(-1000..1000) as f64 / 8.0,
        1 => rng.random_range(-1e6..1e6),
        2 => f64::from_bits(rng.random::<u64>()).clamp(-1e300, 1e300),
        _ => rng.random_range(0..100) as f64,
    }
}

pub fn random_ast(rng: &mut impl Rng, depth: usize) -> ConditionExpr {
    if depth == 0 || rng.random_bool(0.3) {
        if rng.random_bool(0.3) {
            return ConditionExpr::Flag(random_ident(rng));
        }
        let op = [
            CompareOp::Less,
            CompareOp::LessEqual,
            CompareOp::Equal,
            CompareOp::GreaterEqual,
            CompareOp::Greater,
        ][rng.random_range(0..5)];
        let number = random_number(rng);
        let rhs = if rng.random_bool(0.5) {
            Operand::Number(if number.is_nan() { 0.0 } else { number })
        } else {
            Operand::Signal(random_ident(rng))
        };
        let tolerance = (op == CompareOp::Equal && rng.random_bool(0.6)).then(|| rng.random_range(0.0..5.0));
        return ConditionExpr::Compare {
            signal: random_ident(rng),
            op,
            rhs,
            tolerance,
        };
    }
    match rng.random_range(0..3) {
        0 => random_ast(rng, depth - 1).and(random_ast(rng, depth - 1)),
        1 => random_ast(rng, depth - 1).or(random_ast(rng, depth - 1)),
        _ => random_ast(rng, depth - 1).once(),
    }
}

/// Fuzz input number `i`: raw bytes, token soup, mutated valid text or
/// very deep nesting; at most 64 KiB.
pub fn fuzz_input(rng: &mut impl Rng, i: usize) -> String {
    const TOKENS: &[&str] = &[
        "(", ")", "&&", "||", "flag", "once", "v_ego", "==", "<=", ">=", "<", ">", "~", "1.5", "-", " ", "e", ".",
        "≤", "≥", "\u{0}", "\n", "0x", "NaN", "inf",
    ];
    let limit = 64 * 1024;
    if i % 1000 == 999 {
        // maximal size
        let mut s = String::new();
        while s.len() < limit {
            s.push_str(TOKENS[rng.random_range(0..TOKENS.len())]);
        }
        while s.len() > limit {
            s.pop();
        }
        return s;
    }
    let s = match i % 4 {
        0 => {
            let n = rng.random_range(0..2048);
            let bytes: Vec<u8> = (0..n).map(|_| rng.random()).collect();
            String::from_utf8_lossy(&bytes).into_owned()
        }
        1 => (0..rng.random_range(0..400))
            .map(|_| TOKENS[rng.random_range(0..TOKENS.len())])
            .collect(),
        2 => {
            let mut s: Vec<char> = random_ast(rng, 5).to_string().chars().collect();
            for _ in 0..rng.random_range(1..6) {
                if s.is_empty() {
                    break;
                }
                let at = rng.random_range(0..s.len());
                match rng.random_range(0..3) {
                    0 => {
                        s.remove(at);
                    }
                    1 => s.insert(at, TOKENS[rng.random_range(0..TOKENS.len())].chars().next().unwrap_or('(')),
                    _ => {
                        let other = rng.random_range(0..s.len());
                        s.swap(at, other)
                    }
                }
            }
            s.into_iter().collect()
        }
        _ => {
            let depth = rng.random_range(100..20_000);
            "(".repeat(depth) + "flag(a)" + &")".repeat(rng.random_range(0..=depth))
        }
    };
    let mut s = s;
    while s.len() > limit {
        s.pop();
    }
    s
}

// ---- multiplicity fixtures ------------------------------------------------

/// One model violating a single multiplicity or structural rule, or (with
/// `expect: None`) a model that must be accepted.
pub struct Fixture {
    pub name: &'static str,
    pub report: ValidationReport,
    pub expect: Option<&'static str>,
}

fn fx(name: &'static str, report: ValidationReport, expect: &'static str) -> Fixture {
    Fixture {
        name,
        report,
        expect: Some(expect),
    }
}

fn tree_report(root: &str, records: &[NodeRecord]) -> ValidationReport {
    tree_from_records(root, records).err().unwrap_or_default()
}

fn rec(id: &str, kind: NodeKind, children: &[&str]) -> NodeRecord {
    NodeRecord {
        id: id.into(),
        kind,
        name: String::new(),
        children: children.iter().map(|c| c.to_string()).collect(),
    }
}

pub fn multiplicity_fixtures() -> Vec<Fixture> {
    use NodeKind::*;
    let mut out = Vec::new();

    // scenario model
    let mut f = speedcontrol::functional_scenario();
    f.narrative.clear();
    out.push(fx("functional scenario without narrative", validate_functional(&f), "narrative"));

    let mut l = speedcontrol::logical_scenario();
    l.objects[0].kind = ObjectKind::OtherVehicle;
    l.objects[0].behavior = Behavior::ConstantSpeed;
    out.push(fx("logical scenario without ego", validate_logical(&l), "exactly one ego vehicle"));

    let mut l = speedcontrol::logical_scenario();
    let mut twin = l.objects[0].clone();
    twin.id = "ego2".into();
    l.objects.push(twin);
    out.push(fx("logical scenario with two egos", validate_logical(&l), "exactly one ego vehicle"));

    let mut l = speedcontrol::logical_scenario();
    l.objects[0].roles = BTreeSet::new();
    out.push(fx("object with neither role", validate_logical(&l), "an actor, an observer, or both"));

    let mut l = speedcontrol::logical_scenario();
    let p = &mut l.parameters[0];
    std::mem::swap(&mut p.min, &mut p.max);
    out.push(fx("parameter range min > max", validate_logical(&l), "min <= max"));

    let mut l = speedcontrol::logical_scenario();
    let dup = l.parameters[0].clone();
    l.parameters.push(dup);
    out.push(fx("parameter declared twice", validate_logical(&l), "declared 2 times"));

    let mut l = speedcontrol::logical_scenario();
    l.scenery.lane_count = 0;
    out.push(fx("scenery without lanes", validate_logical(&l), "lane_count >= 1"));

    let mut l = speedcontrol::logical_scenario();
    l.parameters.retain(|p| p.name != "lane_width");
    out.push(fx("range field without parameter", validate_logical(&l), "unbacked range field"));

    let mut c = speedcontrol::concrete_scenario();
    c.initial_scene.object_states.clear();
    out.push(fx("object without initial state", validate_concrete(&c), "no initial state"));

    let mut c = speedcontrol::concrete_scenario();
    c.objects[0].behavior = Behavior::ConstantSpeed;
    out.push(fx("ego not driven by the test object", validate_concrete(&c), "driven by the test object"));

    let mut c = speedcontrol::concrete_scenario();
    let dup = c.events[0].clone();
    c.events.push(dup);
    out.push(fx("duplicate event id", validate_concrete(&c), "duplicate id"));

    let mut c = speedcontrol::concrete_scenario();
    c.initial_scene.self_representations.push(SelfRepresentation {
        owner: "ghost".into(),
        skills: Default::default(),
        states: Default::default(),
    });
    out.push(fx("self-representation of an unknown object", validate_concrete(&c), "not an object"));

    let mut c = speedcontrol::concrete_scenario();
    c.objects[0].roles = BTreeSet::from([ObjectRole::Observer]);
    c.objects[0].kind = ObjectKind::Other;
    out.push(fx("concrete scenario without ego", validate_concrete(&c), "exactly one ego vehicle"));

    let mut d = speedcontrol::real_world_drive();
    d.recorded_scenarios[0].initial_scene.object_states.clear();
    out.push(fx("drive with an invalid recorded scenario", validate_drive(&d), "no initial state"));

    // product model
    let empty_system = DecompositionNode::new("s", System, vec![]);
    out.push(fx("system without components", validate_decomposition(&empty_system), "one or more components"));

    let hw = DecompositionNode::new(
        "s",
        System,
        vec![DecompositionNode::new(
            "c",
            Component,
            vec![DecompositionNode::new("hw", HardwareComponent, vec![])],
        )],
    );
    out.push(fx("hardware component without parts", validate_decomposition(&hw), "hardware parts"));

    let sw = DecompositionNode::new(
        "s",
        System,
        vec![DecompositionNode::new(
            "c",
            Component,
            vec![DecompositionNode::new("sw", SoftwareComponent, vec![])],
        )],
    );
    out.push(fx("software component without units", validate_decomposition(&sw), "software units"));

    let bad_child = DecompositionNode::new("s", System, vec![DecompositionNode::leaf("u", SoftwareUnit)]);
    out.push(fx("system containing a software unit", validate_decomposition(&bad_child), "cannot contain"));

    let shared = [
        rec("s", System, &["a", "b"]),
        rec("a", Component, &["p"]),
        rec("b", Component, &["p"]),
        rec("p", HardwarePart, &[]),
    ];
    out.push(fx("node with two parents", tree_report("s", &shared), "tree structure violated"));

    let cycle = [rec("s", System, &["a"]), rec("a", Component, &["b"]), rec("b", Component, &["a"])];
    out.push(fx("decomposition cycle", tree_report("s", &cycle), "tree structure violated"));

    let mut m = speedcontrol::product_model();
    m.items[0].systems.clear();
    out.push(fx("item without systems", validate_product(&m, None), "one or more systems"));

    let mut m = speedcontrol::product_model();
    m.functions[0].implemented_by = vec!["nowhere".into()];
    out.push(fx("function implemented by an unknown item", validate_product(&m, None), "unknown item"));

    out.push(Fixture {
        name: "component with exactly one hardware part and one software unit",
        report: validate_decomposition(&DecompositionNode::new(
            "s",
            System,
            vec![DecompositionNode::new(
                "c",
                Component,
                vec![DecompositionNode::leaf("p", HardwarePart), DecompositionNode::leaf("u", SoftwareUnit)],
            )],
        )),
        expect: None,
    });
    out.push(Fixture {
        name: "SpeedControl product model",
        report: validate_product(&speedcontrol::product_model(), None),
        expect: None,
    });

    // test specification
    let empty_case = match build_test_case(&speedcontrol::concrete_scenario(), vec![]) {
        Ok(_) => ValidationReport::new(),
        Err(e) => {
            let mut r = ValidationReport::new();
            r.push("criteria", e.to_string());
            r
        }
    };
    out.push(fx("test case without criteria", empty_case, "one or more evaluation criteria"));

    let mut s = speedcontrol::specification();
    s.cases[0].criteria.clear();
    out.push(fx("loaded test case without criteria", validate_specification(&s), "one or more evaluation criteria"));

    let mut s = speedcontrol::specification();
    s.procedures[0].cases.clear();
    out.push(fx("procedure without cases", validate_specification(&s), "one or more test cases"));

    let mut s = speedcontrol::specification();
    s.procedures[0].cases.push("nope".into());
    out.push(fx("procedure with an unknown case", validate_specification(&s), "unknown test case"));

    let mut s = speedcontrol::specification();
    s.cases[0].criteria[0].metric = MetricName::new("PET");
    out.push(fx("criterion with an unknown metric", validate_specification(&s), "unknown metric"));

    let mut s = speedcontrol::specification();
    s.design.case_format = None;
    out.push(fx("undeclared case format", validate_specification(&s), "case format"));

    let mut plan = speedcontrol::component_test_plan();
    plan.objectives.clear();
    out.push(fx("test plan without objectives", validate_plan(&plan), "one or more objectives"));

    let mut b = speedcontrol::hil_bench();
    b.capabilities.clear();
    out.push(fx("bench without capabilities", validate_bench(&b), "one or more capabilities"));

    let mut cfg = speedcontrol::hil_configuration();
    cfg.elements.clear();
    out.push(fx("configuration without elements", validate_configuration(&cfg), "one or more elements"));

    let mut cfg = speedcontrol::hil_configuration();
    cfg.elements.push(Element::new("second-adapter", ElementRole::TestObjectAdapter));
    out.push(fx("configuration with two adapters", validate_configuration(&cfg), "exactly one test object adapter"));

    out.push(Fixture {
        name: "SpeedControl specification",
        report: validate_specification(&speedcontrol::specification()),
        expect: None,
    });
    out
}
