mod support;

use std::path::{Path, PathBuf};

use scenario_testbench::engine::{run_test_case, EngineError, Signals, TestObject, TestObjectPort, builtin_acc_port};
use scenario_testbench::eval::{evaluate_case, Verdict};
use scenario_testbench::cli::verdict_exit_code;
use scenario_testbench::format::{read_trace_csv, write_trace_csv};
use scenario_testbench::speedcontrol;

use support::cli;

/// A private copy of the bundle, safe to edit.
fn bundle_copy() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    copy_dir(&support::bundle(), dir.path());
    dir
}

fn copy_dir(from: &Path, to: &Path) {
    std::fs::create_dir_all(to).unwrap();
    for e in std::fs::read_dir(from).unwrap() {
        let p = e.unwrap().path();
        let target = to.join(p.file_name().unwrap());
        if p.is_dir() {
            copy_dir(&p, &target);
        } else {
            std::fs::copy(&p, &target).unwrap();
        }
    }
}

fn edit(path: &Path, from: &str, to: &str) {
    let text = std::fs::read_to_string(path).unwrap();
    assert!(text.contains(from), "{} lacks `{from}`", path.display());
    std::fs::write(path, text.replacen(from, to, 1)).unwrap();
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn files(dir: &Path) -> Vec<PathBuf> {
    let mut v: Vec<_> = std::fs::read_dir(dir).unwrap().map(|e| e.unwrap().path()).collect();
    v.sort();
    v
}

#[test]
fn validate_accepts_the_bundle() {
    let b = support::bundle();
    let paths: Vec<PathBuf> = [
        "scenarios/functional.toml",
        "scenarios/logical.toml",
        "scenarios/concrete.toml",
        "scenarios/drive.toml",
        "spec.toml",
        "benches.toml",
        "product.toml",
        "campaign.toml",
        "campaign-harsh-braking.toml",
    ]
    .iter()
    .map(|f| b.join(f))
    .collect();
    let mut args = vec!["validate"];
    args.extend(paths.iter().map(|p| s(p)));
    let (code, out) = cli(&args);
    assert_eq!(code, 0, "{out}");
}

#[test]
fn validate_reports_violations_and_missing_files() {
    let dir = bundle_copy();
    let logical = dir.path().join("scenarios/logical.toml");
    edit(&logical, "min = 2.5", "min = 9.5");
    let (code, out) = cli(&["validate", s(&logical)]);
    assert_eq!(code, 1);
    assert!(out.contains("min <= max violated"), "{out}");

    let (code, _) = cli(&["validate", "--format", "machine", s(&logical)]);
    assert_eq!(code, 1);

    let (code, _) = cli(&["validate", s(&dir.path().join("nope.toml"))]);
    assert_eq!(code, 2);
}

#[test]
fn concretize_boundary_writes_every_corner() {
    let out = tempfile::tempdir().unwrap();
    let logical = support::bundle().join("scenarios/logical.toml");
    let (code, stdout) = cli(&["concretize", s(&logical), "--strategy", "boundary", "--out", s(out.path())]);
    assert_eq!(code, 0, "{stdout}");
    let written = files(out.path());
    assert_eq!(written.len(), 64);
    for f in &written {
        let (code, report) = cli(&["validate", s(f)]);
        assert_eq!(code, 0, "{}: {report}", f.display());
    }
}

#[test]
fn concretize_random_depends_only_on_the_seed() {
    let logical = support::bundle().join("scenarios/logical.toml");
    let run = |seed: &str| {
        let out = tempfile::tempdir().unwrap();
        let args = ["concretize", s(&logical), "--strategy", "random", "--count", "5", "--seed", seed, "--out", s(out.path())];
        assert_eq!(cli(&args).0, 0);
        files(out.path()).iter().map(|f| std::fs::read(f).unwrap()).collect::<Vec<_>>()
    };
    assert_eq!(run("1"), run("1"));
    assert_ne!(run("1"), run("2"));
}

#[test]
fn concretize_rejects_bad_input() {
    let dir = bundle_copy();
    let logical = dir.path().join("scenarios/logical.toml");
    let out = dir.path().join("out");
    let (code, _) = cli(&["concretize", s(&logical), "--strategy", "grid", "--points", "0", "--out", s(&out)]);
    assert_eq!(code, 2);
    edit(&logical, "min = 2.5", "min = 9.5");
    let (code, _) = cli(&["concretize", s(&logical), "--strategy", "grid", "--out", s(&out)]);
    assert_eq!(code, 1);
}

#[test]
fn run_passes_and_harsh_braking_fails() {
    let dir = bundle_copy();
    let out = dir.path().join("out");
    let (code, stdout) = cli(&["run", s(&dir.path().join("campaign.toml")), "--out", s(&out)]);
    assert_eq!(code, 0, "{stdout}");
    assert!(stdout.contains("Overall verdict: passed"), "{stdout}");
    let names: Vec<String> = files(&out)
        .iter()
        .map(|p| p.file_name().unwrap().to_string_lossy().into_owned())
        .collect();
    assert!(names.iter().any(|n| n.starts_with("trace-")), "{names:?}");
    assert!(names.iter().any(|n| n.starts_with("metrics-")), "{names:?}");
    assert!(names.contains(&"report-TP-SpeedControl.json".to_owned()), "{names:?}");

    let (code, stdout) = cli(&["run", s(&dir.path().join("campaign-harsh-braking.toml")), "--format", "machine"]);
    assert_eq!(code, 1);
    assert!(stdout.contains("\"overall_verdict\": \"failed\""), "{stdout}");
    assert!(dir.path().join("out-harsh-braking").is_dir());
}

#[test]
fn run_overrides() {
    let dir = bundle_copy();
    let campaign = dir.path().join("campaign.toml");
    let out = dir.path().join("coarse");
    let (code, stdout) = cli(&["run", s(&campaign), "--dt", "0.02", "--parallelism", "2", "--out", s(&out)]);
    assert_eq!(code, 0, "{stdout}");
    let trace = files(&out).into_iter().find(|p| s(p).contains("trace-")).unwrap();
    assert_eq!(read_trace_csv(&trace).unwrap().header.time_step, 0.02);

    assert_eq!(cli(&["run", s(&campaign), "--dt", "0", "--out", s(&out)]).0, 2);
    assert_eq!(cli(&["run", s(&campaign), "--parallelism", "0", "--out", s(&out)]).0, 2);
    assert_eq!(cli(&["run", s(&campaign), "--procedure", "nope", "--out", s(&out)]).0, 2);
}

#[test]
fn run_refuses_a_bench_without_the_needed_capability() {
    let dir = bundle_copy();
    edit(&dir.path().join("benches.toml"), "bench = \"HIL-1\"", "bench = \"SIL-1\"");
    let mut err = Vec::new();
    let code = scenario_testbench::cli::run_campaign(&dir.path().join("campaign.toml"), &Default::default())
        .map(|_| 0)
        .unwrap_or_else(|(code, msg)| {
            err.push(msg);
            code
        });
    assert_eq!(code, 2);
    assert!(err[0].contains("connects_ecu"), "{err:?}");
    assert!(!dir.path().join("out").exists(), "nothing may run before the bench check");
}

fn run_into(dir: &Path) -> (PathBuf, PathBuf) {
    let out = dir.join("out");
    assert_eq!(cli(&["run", s(&dir.join("campaign.toml")), "--out", s(&out)]).0, 0);
    let trace = files(&out).into_iter().find(|p| s(p).contains("trace-")).unwrap();
    (trace, out.join("report-TP-SpeedControl.json"))
}

#[test]
fn evaluate_reproduces_the_run_report() {
    let dir = bundle_copy();
    let (trace, report) = run_into(dir.path());
    let again = dir.path().join("again");
    let spec = dir.path().join("spec.toml");
    let (code, _) = cli(&["evaluate", "--spec", s(&spec), "--out", s(&again), s(&trace)]);
    assert_eq!(code, 0);
    assert_eq!(
        std::fs::read(again.join("report-TP-SpeedControl.json")).unwrap(),
        std::fs::read(&report).unwrap()
    );
    let (code, text) = cli(&["report", s(&report)]);
    assert_eq!(code, 0);
    assert!(text.contains("Overall verdict: passed"), "{text}");
}

#[test]
fn evaluate_detects_a_tampered_trace() {
    let dir = bundle_copy();
    let (trace, _) = run_into(dir.path());
    let mut data = read_trace_csv(&trace).unwrap();
    let v = data.columns.iter_mut().find(|c| c.name == "v_ego").unwrap();
    let n = v.values.len();
    for x in &mut v.values[n - 100..] {
        *x = x.map(|x| x * 0.9);
    }
    let mut bytes = Vec::new();
    write_trace_csv(&data, &mut bytes).unwrap();
    std::fs::write(&trace, bytes).unwrap();
    let spec = dir.path().join("spec.toml");
    let (code, text) = cli(&["evaluate", "--spec", s(&spec), "--out", s(&dir.path().join("e")), s(&trace)]);
    assert_eq!(code, 1);
    assert!(text.contains("EC1") && text.contains("NOT FULFILLED"), "{text}");
    assert!(!text.contains("EC2 [Average_ego_deceleration] NOT FULFILLED"), "{text}");
}

#[test]
fn evaluate_rejects_unusable_traces() {
    let dir = bundle_copy();
    let (trace, _) = run_into(dir.path());
    let spec = dir.path().join("spec.toml");
    let text = std::fs::read_to_string(&trace).unwrap();

    let no_accel = dir.path().join("no-accel.csv");
    let (meta, body) = text.split_at(text.find("time,").unwrap());
    let stripped: String = body
        .lines()
        .map(|l| {
            let cells: Vec<&str> = l.split(',').collect();
            let mut kept = cells.clone();
            kept.remove(2);
            kept.join(",") + "\n"
        })
        .collect();
    assert!(body.starts_with("time,v_ego,a_ego,"));
    std::fs::write(&no_accel, format!("{meta}{stripped}")).unwrap();
    let (code, _) = cli(&["evaluate", "--spec", s(&spec), "--out", s(dir.path()), s(&no_accel)]);
    assert_eq!(code, 2);

    let wrong = dir.path().join("wrong-scenario.csv");
    std::fs::write(&wrong, text.replacen("# scenario_id: SpeedControl", "# scenario_id: Other", 1)).unwrap();
    let (code, _) = cli(&["evaluate", "--spec", s(&spec), "--out", s(dir.path()), s(&wrong)]);
    assert_eq!(code, 2);

    let unknown = dir.path().join("unknown-case.csv");
    std::fs::write(&unknown, text.replacen("# case_id: SpeedControl-", "# case_id: x-", 1)).unwrap();
    let (code, _) = cli(&["evaluate", "--spec", s(&spec), "--out", s(dir.path()), s(&unknown)]);
    assert_eq!(code, 2);
}

#[test]
fn report_of_a_missing_file_is_a_config_error() {
    assert_eq!(cli(&["report", "/nonexistent/report.json"]).0, 2);
}

/// Emits a NaN command at step 10.
struct Diverging(usize);

impl TestObject for Diverging {
    fn port(&self) -> TestObjectPort {
        builtin_acc_port()
    }

    fn step(&mut self, _time: f64, _inputs: &Signals) -> Signals {
        self.0 += 1;
        let a = if self.0 > 10 { f64::NAN } else { 0.0 };
        Signals::from([("a_target".to_owned(), a), ("acc_active".to_owned(), 0.0)])
    }
}

#[test]
fn a_numerical_fault_yields_an_invalid_trace() {
    let tc = speedcontrol::test_case();
    let spec = speedcontrol::specification();
    let err = run_test_case(&speedcontrol::hil_configuration(), &tc, &mut Diverging(0)).unwrap_err();
    let EngineError::NumericalFault { step, trace, .. } = err else {
        panic!("{err:?}");
    };
    assert_eq!(step, 10);
    assert!(!trace.data.header.valid);
    assert_eq!(trace.data.len(), 10);
    let e = evaluate_case(&tc, &spec.metrics, &trace.data).unwrap();
    assert_eq!(e.verdict, Verdict::InvalidTrace);
    assert!(e.criteria.is_empty());
    assert_eq!(verdict_exit_code(e.verdict), 3);
}

#[test]
fn one_sample_above_the_band_fails_the_set_speed_criterion() {
    let dir = bundle_copy();
    let (trace, _) = run_into(dir.path());
    let mut data = read_trace_csv(&trace).unwrap();
    let v = data.columns.iter_mut().find(|c| c.name == "v_ego").unwrap();
    v.values[2500] = Some(scenario_testbench::units::kmh(121.0));
    let mut bytes = Vec::new();
    write_trace_csv(&data, &mut bytes).unwrap();
    std::fs::write(&trace, bytes).unwrap();
    let report = dir.path().join("e");
    let spec = dir.path().join("spec.toml");
    let (code, _) = cli(&["evaluate", "--spec", s(&spec), "--out", s(&report), s(&trace)]);
    assert_eq!(code, 1);
    let r = scenario_testbench::eval::TestReport::from_json(
        &std::fs::read_to_string(report.join("report-TP-SpeedControl.json")).unwrap(),
    )
    .unwrap();
    let ec1 = r.cases[0].criteria.iter().find(|c| c.criterion == "EC1").unwrap();
    let zeros: Vec<f64> = ec1.results.iter().filter(|x| x.fulfillment == 0.0).map(|x| x.result.time).collect();
    assert_eq!(zeros, [25.0]);
}
