use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::activation::activate;
use super::judge::{case_verdict, judge, lookup, CaseEvaluation, CriterionEvaluation, Verdict};
use super::metrics::compute_metric;
use super::EvalError;
use crate::engine::EvaluationData;
use crate::spec::{EvaluationMetric, MetricName, TestProcedure};

pub const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceDigest {
    pub case_id: String,
    /// SHA-256 of the trace's CSV export.
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub tool: String,
    pub tool_version: String,
    pub traces: Vec<TraceDigest>,
    pub config_ids: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestReport {
    pub schema_version: u32,
    pub procedure: String,
    pub cases: Vec<CaseEvaluation>,
    pub cross_case: Vec<CriterionEvaluation>,
    pub overall_verdict: Verdict,
    pub provenance: Provenance,
}

impl TestReport {
    /// Pretty JSON with a trailing newline; stable for identical reports.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

pub fn trace_digest(data: &EvaluationData) -> String {
    let mut bytes = Vec::new();
    crate::format::write_trace_csv(data, &mut bytes).expect("in-memory write");
    hex::encode(Sha256::digest(&bytes))
}

/// Passed only if every case passed and every cross-case criterion is
/// fulfilled; otherwise the worst of all verdicts.
pub fn overall_verdict(cases: &[CaseEvaluation], cross_case: &[CriterionEvaluation]) -> Verdict {
    cases
        .iter()
        .map(|c| c.verdict)
        .chain(std::iter::once(case_verdict(true, cross_case)))
        .max()
        .unwrap_or(Verdict::Passed)
}

/// Assembles the report of `procedure` from one evaluation (and one trace)
/// per listed case. Cross-case criteria are judged over the concatenated
/// results of all cases with a valid trace, in procedure order.
pub fn evaluate_procedure(
    procedure: &TestProcedure,
    metrics: &[EvaluationMetric],
    evaluations: &[CaseEvaluation],
    traces: &BTreeMap<String, EvaluationData>,
) -> Result<TestReport, EvalError> {
    let mut cases = Vec::new();
    let mut data = Vec::new();
    for id in &procedure.cases {
        let eval = evaluations
            .iter()
            .find(|e| &e.case_id == id)
            .ok_or_else(|| EvalError::IncompleteInput(format!("no evaluation for case `{id}`")))?;
        let trace = traces
            .get(id)
            .ok_or_else(|| EvalError::IncompleteInput(format!("no trace for case `{id}`")))?;
        cases.push(eval.clone());
        data.push((id.clone(), trace));
    }

    let catalog: BTreeMap<&MetricName, &EvaluationMetric> = metrics.iter().map(|m| (&m.name, m)).collect();
    let mut cross_case = Vec::new();
    for c in &procedure.cross_case_criteria {
        let metric = lookup(&catalog, &c.metric)?;
        let (mut intervals, mut results) = (Vec::new(), Vec::new());
        for (_, d) in data.iter().filter(|(_, d)| d.header.valid) {
            let iv = activate(&c.application_period, d)?;
            results.extend(compute_metric(metric, d, &iv)?);
            intervals.extend(iv.intervals);
        }
        cross_case.push(judge(c, intervals, results));
    }

    let mut config_ids: Vec<String> = data.iter().map(|(_, d)| d.header.config_id.clone()).collect();
    config_ids.sort();
    config_ids.dedup();
    Ok(TestReport {
        schema_version: REPORT_SCHEMA_VERSION,
        procedure: procedure.id.clone(),
        overall_verdict: overall_verdict(&cases, &cross_case),
        cases,
        cross_case,
        provenance: Provenance {
            tool: env!("CARGO_PKG_NAME").to_owned(),
            tool_version: crate::TOOL_VERSION.to_owned(),
            traces: data
                .iter()
                .map(|(id, d)| TraceDigest {
                    case_id: id.clone(),
                    sha256: trace_digest(d),
                })
                .collect(),
            config_ids,
        },
    })
}

fn criterion_line(out: &mut String, c: &CriterionEvaluation) {
    let status = if c.skipped {
        "SKIPPED"
    } else if c.fulfilled {
        "FULFILLED"
    } else {
        "NOT FULFILLED"
    };
    let _ = write!(out, "    {} [{}] {}: {} results", c.criterion, c.metric, status, c.results.len());
    if let Some(a) = c.aggregate_fulfillment {
        let _ = write!(out, ", min fulfillment {a}%");
    }
    let failing: Vec<_> = c.results.iter().filter(|r| r.fulfillment <= 0.0).collect();
    if let Some(first) = failing.first() {
        let _ = write!(
            out,
            ", {} at 0% (first at t = {} s, value {} {})",
            failing.len(),
            first.result.time,
            first.result.value,
            first.result.unit
        );
    }
    if let Some(r) = &c.skip_reason {
        let _ = write!(out, " ({r})");
    }
    out.push('\n');
}

pub fn render_text(report: &TestReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "Test report for procedure {}", report.procedure);
    let _ = writeln!(out, "Overall verdict: {}", report.overall_verdict.as_str());
    for case in &report.cases {
        let _ = writeln!(
            out,
            "  case {} (scenario {}, config {}): {}",
            case.case_id,
            case.scenario_id,
            case.config_id,
            case.verdict.as_str()
        );
        for c in &case.criteria {
            criterion_line(&mut out, c);
        }
    }
    if !report.cross_case.is_empty() {
        let _ = writeln!(out, "  cross-case criteria:");
        for c in &report.cross_case {
            criterion_line(&mut out, c);
        }
    }
    let _ = writeln!(
        out,
        "Produced by {} {}",
        report.provenance.tool, report.provenance.tool_version
    );
    for t in &report.provenance.traces {
        let _ = writeln!(out, "  trace {}: sha256 {}", t.case_id, t.sha256);
    }
    out
}
