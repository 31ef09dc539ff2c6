//! The `scenario-testbench` command line.
//!
//! Exit codes: 0 passed / valid, 1 evaluation failure or violations,
//! 2 configuration or input error, 3 runtime fault (invalid trace).

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use clap::{Parser, Subcommand, ValueEnum};
use log::{info, warn};

use crate::concretize::{concretize, ConcretizationConfig, ConcretizeError, Strategy};
use crate::engine::{
    match_bench, missing_capabilities, run_test_case_observed, validate_bench, validate_configuration, EngineError,
    EvaluationData, TestBenchConfiguration,
};
use crate::eval::{
    evaluate_case, evaluate_procedure, render_text, CaseEvaluation, IncrementalEvaluator, TestReport, Verdict,
};
use crate::format::{
    self, document_kind, load_campaign, load_product, load_specification, parse_document, read_document,
    read_trace_csv, write_metric_results_csv, write_trace_csv, DocumentKind, FormatError, LoadedCampaign,
};
use crate::product::validate_product;
use crate::scenario::{
    validate_concrete, validate_drive, validate_functional, validate_logical, ConcreteScenario, FunctionalScenario,
    LogicalScenario, RealWorldTestDrive,
};
use crate::spec::{validate_specification, TestSpecification};
use crate::validation::ValidationReport;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_FAULT: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "scenario-testbench", version, about = "Scenario-based testing of automated driving functions")]
pub struct Cli {
    /// More log output on standard error (repeatable).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Default)]
pub enum OutputFormat {
    /// JSON on standard output.
    Machine,
    #[default]
    Text,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StrategyArg {
    Grid,
    Boundary,
    Random,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse and validate model files.
    Validate {
        #[arg(required = true)]
        paths: Vec<PathBuf>,
        #[arg(long, value_enum, default_value_t)]
        format: OutputFormat,
    },
    /// Derive concrete scenario files from a logical scenario.
    Concretize {
        logical: PathBuf,
        #[arg(long, value_enum)]
        strategy: StrategyArg,
        /// Grid points per parameter.
        #[arg(long, default_value_t = 3)]
        points: usize,
        /// Number of random samples.
        #[arg(long, default_value_t = 10)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Add the center point to the boundary set.
        #[arg(long)]
        include_center: bool,
        /// Id prefix; defaults to the logical scenario's id.
        #[arg(long)]
        prefix: Option<String>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t)]
        format: OutputFormat,
    },
    /// Execute test procedures of a campaign and evaluate them.
    Run {
        campaign: PathBuf,
        /// Only this procedure; default all.
        #[arg(long)]
        procedure: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Time step override in seconds.
        #[arg(long)]
        dt: Option<f64>,
        #[arg(long)]
        parallelism: Option<usize>,
        #[arg(long, value_enum, default_value_t)]
        format: OutputFormat,
    },
    /// Evaluate recorded traces against a specification.
    Evaluate {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        procedure: Option<String>,
        #[arg(long, default_value = ".")]
        out: PathBuf,
        #[arg(required = true)]
        traces: Vec<PathBuf>,
        #[arg(long, value_enum, default_value_t)]
        format: OutputFormat,
    },
    /// Render a machine-readable report.
    Report {
        report: PathBuf,
        #[arg(long, value_enum, default_value_t)]
        format: OutputFormat,
    },
}

/// An error ending a command with the given exit code.
#[derive(Debug)]
struct Exit {
    code: i32,
    message: String,
}

impl Exit {
    fn config(message: impl ToString) -> Self {
        Exit {
            code: EXIT_CONFIG,
            message: message.to_string(),
        }
    }
}

impl From<FormatError> for Exit {
    fn from(e: FormatError) -> Self {
        Exit::config(e)
    }
}

fn io_error(path: &Path, e: std::io::Error) -> Exit {
    Exit::config(format!("{}: {e}", path.display()))
}

/// Parses `args` (program name first), runs the command and returns the
/// exit code. Machine output goes to `out`, diagnostics to the log.
pub fn run_with<I, T>(args: I, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    init_logging(cli.verbose);
    execute(cli, out)
}

pub fn init_logging(verbose: u8) {
    let level = match verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .target(env_logger::Target::Stderr)
        .try_init();
}

pub fn execute(cli: Cli, out: &mut dyn Write) -> i32 {
    let result = match cli.command {
        Command::Validate { paths, format } => cmd_validate(&paths, format, out),
        Command::Concretize {
            logical,
            strategy,
            points,
            count,
            seed,
            include_center,
            prefix,
            out: dir,
            format,
        } => {
            let strategy = match strategy {
                StrategyArg::Grid => Strategy::Grid {
                    points_per_parameter: points,
                },
                StrategyArg::Boundary => Strategy::Boundary { include_center },
                StrategyArg::Random => Strategy::UniformRandom { count, seed },
            };
            cmd_concretize(&logical, strategy, prefix, &dir, format, out)
        }
        Command::Run {
            campaign,
            procedure,
            out: dir,
            dt,
            parallelism,
            format,
        } => cmd_run(
            &campaign,
            &RunOptions {
                procedure,
                out: dir,
                dt,
                parallelism,
            },
            format,
            out,
        ),
        Command::Evaluate {
            spec,
            procedure,
            out: dir,
            traces,
            format,
        } => cmd_evaluate(&spec, procedure.as_deref(), &dir, &traces, format, out),
        Command::Report { report, format } => cmd_report(&report, format, out),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {}", e.message.trim_end());
            e.code
        }
    }
}

fn emit(out: &mut dyn Write, text: &str) {
    let _ = out.write_all(text.as_bytes());
}

// ---- validate -------------------------------------------------------------

#[derive(serde::Serialize)]
struct FileViolations<'a> {
    file: &'a str,
    violations: Vec<crate::Violation>,
}

/// Every structural check that applies to the file, by its declared kind.
pub fn validate_file(path: &Path) -> Result<ValidationReport, FormatError> {
    let text = format::read_text(path)?;
    let kind = document_kind(&text, path)?;
    Ok(match kind {
        DocumentKind::FunctionalScenario => {
            validate_functional(&parse_document::<FunctionalScenario>(&text, kind, path)?)
        }
        DocumentKind::LogicalScenario => validate_logical(&parse_document::<LogicalScenario>(&text, kind, path)?),
        DocumentKind::ConcreteScenario => validate_concrete(&parse_document::<ConcreteScenario>(&text, kind, path)?),
        DocumentKind::RealWorldTestDrive => validate_drive(&parse_document::<RealWorldTestDrive>(&text, kind, path)?),
        DocumentKind::TestSpecification => validate_specification(&load_specification(path)?),
        DocumentKind::TestBenches => validate_benches(&format::load_benches(path)?),
        DocumentKind::ProductModel => validate_product(&load_product(path)?, None),
        DocumentKind::Campaign => validate_campaign(&load_campaign(path)?),
    })
}

fn validate_benches(file: &format::BenchesFile) -> ValidationReport {
    let mut r = ValidationReport::new();
    for b in &file.benches {
        r.extend_prefixed(&format!("benches[{}]", b.id), validate_bench(b));
    }
    for c in &file.configurations {
        let at = format!("configurations[{}]", c.id);
        r.extend_prefixed(&at, validate_configuration(c));
        r.check(
            file.benches.iter().any(|b| b.id == c.bench),
            format!("{at}.bench"),
            format!("unknown test bench `{}`", c.bench),
        );
    }
    r
}

fn criterion_ids(spec: &TestSpecification) -> std::collections::BTreeSet<String> {
    spec.cases
        .iter()
        .flat_map(|c| &c.criteria)
        .chain(spec.procedures.iter().flat_map(|p| &p.cross_case_criteria))
        .map(|c| c.id.clone())
        .collect()
}

/// Specification, benches, product and their cross-references.
pub fn validate_campaign(c: &LoadedCampaign) -> ValidationReport {
    let mut r = ValidationReport::new();
    r.extend_prefixed("spec", validate_specification(&c.spec));
    r.extend_prefixed("benches", validate_benches(&c.benches));
    if let Some(p) = &c.product {
        r.extend_prefixed("product", validate_product(p, Some(&criterion_ids(&c.spec))));
    }
    for p in &c.spec.procedures {
        for id in &p.bench_configs {
            r.check(
                c.benches.configurations.iter().any(|cfg| &cfg.id == id),
                format!("spec.procedures[{}].bench_configs", p.id),
                format!("unknown bench configuration `{id}`"),
            );
        }
    }
    r
}

fn cmd_validate(paths: &[PathBuf], format: OutputFormat, out: &mut dyn Write) -> Result<i32, Exit> {
    let mut code = EXIT_OK;
    let mut all = Vec::new();
    for path in paths {
        let file = path.display().to_string();
        let violations = match validate_file(path) {
            Ok(r) => r.violations,
            Err(FormatError::Io { source, .. }) => {
                eprintln!("error: {file}: {source}");
                code = EXIT_CONFIG;
                continue;
            }
            Err(FormatError::Invalid { report, .. }) => report.violations,
            Err(e) => vec![crate::Violation {
                path: String::new(),
                message: e.to_string().trim_start_matches(&format!("{file}: ")).to_owned(),
            }],
        };
        if !violations.is_empty() && code == EXIT_OK {
            code = EXIT_FAILED;
        }
        if format == OutputFormat::Text {
            for v in &violations {
                emit(out, &format!("{file}:{}: {}\n", v.path, v.message));
            }
        }
        all.push((file, violations));
    }
    if format == OutputFormat::Machine {
        let docs: Vec<FileViolations> = all
            .iter()
            .map(|(f, v)| FileViolations {
                file: f,
                violations: v.clone(),
            })
            .collect();
        emit(out, &format!("{}\n", serde_json::to_string_pretty(&docs).expect("serializes")));
    }
    Ok(code)
}

// ---- concretize -----------------------------------------------------------

fn cmd_concretize(
    logical: &Path,
    strategy: Strategy,
    prefix: Option<String>,
    dir: &Path,
    format: OutputFormat,
    out: &mut dyn Write,
) -> Result<i32, Exit> {
    let l: LogicalScenario = match read_document(logical, DocumentKind::LogicalScenario) {
        Ok(l) => l,
        Err(e @ FormatError::Io { .. }) => return Err(Exit::config(e)),
        Err(e) => {
            return Err(Exit {
                code: EXIT_FAILED,
                message: e.to_string(),
            })
        }
    };
    let cfg = ConcretizationConfig {
        strategy,
        id_prefix: prefix.unwrap_or_else(|| l.id.clone()),
    };
    let scenarios = match concretize(&l, &cfg) {
        Ok(s) => s,
        Err(e @ ConcretizeError::InvalidLogical(_)) => {
            return Err(Exit {
                code: EXIT_FAILED,
                message: format!("{}: {e}", logical.display()),
            })
        }
        Err(e) => return Err(Exit::config(e)),
    };
    std::fs::create_dir_all(dir).map_err(|e| io_error(dir, e))?;
    let mut written = Vec::new();
    for s in &scenarios {
        let path = dir.join(format!("{}.toml", s.id));
        format::write_document(&path, DocumentKind::ConcreteScenario, s)?;
        written.push(path.display().to_string());
    }
    info!("wrote {} scenario files to {}", written.len(), dir.display());
    match format {
        OutputFormat::Text => {
            for w in &written {
                emit(out, &format!("{w}\n"));
            }
        }
        OutputFormat::Machine => emit(out, &format!("{}\n", serde_json::to_string_pretty(&written).expect("serializes"))),
    }
    Ok(EXIT_OK)
}

// ---- run ------------------------------------------------------------------

/// Overrides for a campaign run.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub procedure: Option<String>,
    pub out: Option<PathBuf>,
    pub dt: Option<f64>,
    pub parallelism: Option<usize>,
}

/// What one executed case left behind.
#[derive(Debug, Clone)]
pub struct CaseOutcome {
    pub data: EvaluationData,
    pub evaluation: CaseEvaluation,
}

/// The reports of a campaign run, by procedure, in specification order.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub output_dir: PathBuf,
    pub reports: Vec<TestReport>,
    pub cases: BTreeMap<String, CaseOutcome>,
}

impl RunOutcome {
    pub fn exit_code(&self) -> i32 {
        self.reports
            .iter()
            .map(|r| verdict_exit_code(r.overall_verdict))
            .max()
            .unwrap_or(EXIT_OK)
    }
}

pub fn verdict_exit_code(v: Verdict) -> i32 {
    match v {
        Verdict::Passed => EXIT_OK,
        Verdict::Failed | Verdict::Skipped => EXIT_FAILED,
        Verdict::InvalidTrace => EXIT_FAULT,
    }
}

fn procedure_config<'a>(
    c: &'a LoadedCampaign,
    proc_id: &str,
    configs: &[String],
) -> Result<&'a TestBenchConfiguration, Exit> {
    let cfg = match configs.first() {
        Some(id) => c
            .benches
            .configurations
            .iter()
            .find(|cfg| &cfg.id == id)
            .ok_or_else(|| Exit::config(format!("procedure `{proc_id}`: unknown bench configuration `{id}`")))?,
        None => c
            .benches
            .configurations
            .first()
            .ok_or_else(|| Exit::config(format!("procedure `{proc_id}`: no bench configuration available")))?,
    };
    if configs.len() > 1 {
        warn!("procedure `{proc_id}` lists {} configurations; running on `{}`", configs.len(), cfg.id);
    }
    Ok(cfg)
}

fn run_case(
    c: &LoadedCampaign,
    cfg: &TestBenchConfiguration,
    case_id: &str,
) -> Result<CaseOutcome, Exit> {
    let tc = c
        .spec
        .case(case_id)
        .ok_or_else(|| Exit::config(format!("unknown test case `{case_id}`")))?;
    let mut object = c.campaign.test_object.instantiate();
    let mut ev = IncrementalEvaluator::new(tc, &c.spec.metrics).map_err(Exit::config)?;
    let result = run_test_case_observed(cfg, tc, object.as_mut(), &mut |data, i| ev.observe(data, i));
    let data = match result {
        Ok(trace) => trace.data,
        Err(EngineError::NumericalFault { trace, step, signal }) => {
            warn!("case `{case_id}`: non-finite `{signal}` at step {step}; trace is invalid");
            trace.data
        }
        Err(e) => return Err(Exit::config(format!("case `{case_id}`: {e}"))),
    };
    let evaluation = ev.finish(&data).map_err(|e| Exit::config(format!("case `{case_id}`: {e}")))?;
    Ok(CaseOutcome { data, evaluation })
}

/// Runs cases on up to `parallelism` threads; results keep input order.
fn run_cases(
    c: &LoadedCampaign,
    cfg: &TestBenchConfiguration,
    cases: &[String],
    parallelism: usize,
) -> Vec<Result<CaseOutcome, Exit>> {
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<Result<CaseOutcome, Exit>>>> = Mutex::new((0..cases.len()).map(|_| None).collect());
    std::thread::scope(|s| {
        for _ in 0..parallelism.min(cases.len()).max(1) {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= cases.len() {
                    break;
                }
                let r = run_case(c, cfg, &cases[i]);
                slots.lock().expect("no panics while holding the lock")[i] = Some(r);
            });
        }
    });
    slots
        .into_inner()
        .expect("threads joined")
        .into_iter()
        .map(|r| r.expect("every case ran"))
        .collect()
}

fn write_file(path: &Path, f: impl FnOnce(&mut Vec<u8>) -> std::io::Result<()>) -> Result<(), Exit> {
    let mut bytes = Vec::new();
    f(&mut bytes).map_err(|e| io_error(path, e))?;
    std::fs::write(path, bytes).map_err(|e| io_error(path, e))
}

fn write_case_files(dir: &Path, case_id: &str, outcome: &CaseOutcome) -> Result<(), Exit> {
    write_file(&dir.join(format!("trace-{case_id}.csv")), |b| write_trace_csv(&outcome.data, b))?;
    write_file(&dir.join(format!("metrics-{case_id}.csv")), |b| {
        write_metric_results_csv(&outcome.evaluation.criteria, b)
    })
}

fn write_report(dir: &Path, report: &TestReport) -> Result<PathBuf, Exit> {
    let path = dir.join(format!("report-{}.json", report.procedure));
    std::fs::write(&path, report.to_json()).map_err(|e| io_error(&path, e))?;
    Ok(path)
}

/// Loads, validates, executes and evaluates a campaign, writing traces,
/// metric results and reports under the output directory.
pub fn run_campaign(path: &Path, opts: &RunOptions) -> Result<RunOutcome, (i32, String)> {
    run_campaign_inner(path, opts).map_err(|e| (e.code, e.message))
}

fn run_campaign_inner(path: &Path, opts: &RunOptions) -> Result<RunOutcome, Exit> {
    let mut c = load_campaign(path)?;
    if let Some(dt) = opts.dt {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Exit::config("--dt must be > 0"));
        }
        c.campaign.time_step = Some(dt);
    }
    if let Some(dt) = c.campaign.time_step {
        for cfg in &mut c.benches.configurations {
            cfg.time_step = dt;
        }
    }
    let parallelism = opts.parallelism.unwrap_or(c.campaign.parallelism);
    if parallelism == 0 {
        return Err(Exit::config("--parallelism must be >= 1"));
    }
    let report = validate_campaign(&c);
    if !report.is_empty() {
        return Err(Exit::config(format!("{}: invalid campaign\n{report}", path.display())));
    }
    let procedures: Vec<_> = match &opts.procedure {
        Some(id) => vec![c
            .spec
            .procedure(id)
            .ok_or_else(|| Exit::config(format!("unknown test procedure `{id}`")))?
            .clone()],
        None => c.spec.procedures.clone(),
    };
    if procedures.is_empty() {
        return Err(Exit::config("the specification has no test procedure"));
    }
    let dir = opts.out.clone().unwrap_or_else(|| c.campaign.output_dir.clone());

    // check every bench before running anything
    let mut plan = Vec::new();
    for p in &procedures {
        let cfg = procedure_config(&c, &p.id, &p.bench_configs)?;
        let bench = c
            .benches
            .benches
            .iter()
            .find(|b| b.id == cfg.bench)
            .ok_or_else(|| Exit::config(format!("unknown test bench `{}`", cfg.bench)))?;
        if !match_bench(cfg, bench) {
            let missing: Vec<_> = missing_capabilities(cfg, bench).into_iter().map(|m| m.tag()).collect();
            return Err(Exit::config(format!(
                "bench `{}` cannot host configuration `{}`: missing capabilities {}",
                bench.id,
                cfg.id,
                missing.join(", ")
            )));
        }
        plan.push((p, cfg.clone()));
    }

    std::fs::create_dir_all(&dir).map_err(|e| io_error(&dir, e))?;
    let mut cases: BTreeMap<String, CaseOutcome> = BTreeMap::new();
    let mut reports = Vec::new();
    for (p, cfg) in plan {
        info!("procedure `{}`: {} case(s) on `{}`", p.id, p.cases.len(), cfg.id);
        let todo: Vec<String> = p.cases.iter().filter(|id| !cases.contains_key(*id)).cloned().collect();
        for (id, r) in todo.iter().zip(run_cases(&c, &cfg, &todo, parallelism)) {
            let outcome = r?;
            write_case_files(&dir, id, &outcome)?;
            cases.insert(id.clone(), outcome);
        }
        let evaluations: Vec<CaseEvaluation> = p.cases.iter().map(|id| cases[id].evaluation.clone()).collect();
        let traces: BTreeMap<String, EvaluationData> =
            p.cases.iter().map(|id| (id.clone(), cases[id].data.clone())).collect();
        let report = evaluate_procedure(p, &c.spec.metrics, &evaluations, &traces).map_err(Exit::config)?;
        let written = write_report(&dir, &report)?;
        info!("wrote {}", written.display());
        reports.push(report);
    }
    Ok(RunOutcome {
        output_dir: dir,
        reports,
        cases,
    })
}

fn emit_reports(reports: &[TestReport], format: OutputFormat, out: &mut dyn Write) {
    for r in reports {
        match format {
            OutputFormat::Machine => emit(out, &r.to_json()),
            OutputFormat::Text => emit(out, &render_text(r)),
        }
    }
}

fn cmd_run(campaign: &Path, opts: &RunOptions, format: OutputFormat, out: &mut dyn Write) -> Result<i32, Exit> {
    let outcome = run_campaign_inner(campaign, opts)?;
    emit_reports(&outcome.reports, format, out);
    Ok(outcome.exit_code())
}

// ---- evaluate -------------------------------------------------------------

/// Re-evaluates recorded traces. Traces are matched to cases by the case
/// id in their metadata.
pub fn evaluate_traces(
    spec_path: &Path,
    procedure: Option<&str>,
    traces: &[PathBuf],
) -> Result<Vec<TestReport>, (i32, String)> {
    evaluate_traces_inner(spec_path, procedure, traces).map_err(|e| (e.code, e.message))
}

fn evaluate_traces_inner(spec_path: &Path, procedure: Option<&str>, traces: &[PathBuf]) -> Result<Vec<TestReport>, Exit> {
    let spec = load_specification(spec_path)?;
    let report = validate_specification(&spec);
    if !report.is_empty() {
        return Err(Exit::config(format!("{}: invalid specification\n{report}", spec_path.display())));
    }
    let mut data: BTreeMap<String, EvaluationData> = BTreeMap::new();
    let mut evaluations = Vec::new();
    for path in traces {
        let d = read_trace_csv(path)?;
        let tc = spec.case(&d.header.case_id).ok_or_else(|| {
            Exit::config(format!("{}: trace of unknown test case `{}`", path.display(), d.header.case_id))
        })?;
        let e = evaluate_case(tc, &spec.metrics, &d).map_err(|e| Exit::config(format!("{}: {e}", path.display())))?;
        evaluations.push(e);
        data.insert(tc.id.clone(), d);
    }
    let procedures: Vec<_> = match procedure {
        Some(id) => vec![spec
            .procedure(id)
            .ok_or_else(|| Exit::config(format!("unknown test procedure `{id}`")))?],
        None => spec
            .procedures
            .iter()
            .filter(|p| p.cases.iter().all(|c| data.contains_key(c)))
            .collect(),
    };
    if procedures.is_empty() {
        return Err(Exit::config("no test procedure is covered by the given traces"));
    }
    procedures
        .into_iter()
        .map(|p| evaluate_procedure(p, &spec.metrics, &evaluations, &data).map_err(Exit::config))
        .collect()
}

fn cmd_evaluate(
    spec: &Path,
    procedure: Option<&str>,
    dir: &Path,
    traces: &[PathBuf],
    format: OutputFormat,
    out: &mut dyn Write,
) -> Result<i32, Exit> {
    let reports = evaluate_traces_inner(spec, procedure, traces)?;
    std::fs::create_dir_all(dir).map_err(|e| io_error(dir, e))?;
    for r in &reports {
        write_report(dir, r)?;
    }
    emit_reports(&reports, format, out);
    Ok(reports
        .iter()
        .map(|r| verdict_exit_code(r.overall_verdict))
        .max()
        .unwrap_or(EXIT_OK))
}

// ---- report ---------------------------------------------------------------

fn cmd_report(path: &Path, format: OutputFormat, out: &mut dyn Write) -> Result<i32, Exit> {
    let text = std::fs::read_to_string(path).map_err(|e| io_error(path, e))?;
    let report = TestReport::from_json(&text).map_err(|e| Exit::config(format!("{}: {e}", path.display())))?;
    emit_reports(std::slice::from_ref(&report), format, out);
    Ok(EXIT_OK)
}
