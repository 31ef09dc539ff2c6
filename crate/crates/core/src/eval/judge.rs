use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::activation::{activate, Interval};
use super::metrics::{compute_metric, MetricResult};
use super::EvalError;
use crate::engine::EvaluationData;
use crate::spec::{EvaluationCriterion, EvaluationMetric, Judgement, MetricName, TestCase, ThresholdDirection};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JudgedResult {
    #[serde(flatten)]
    pub result: MetricResult,
    /// Percent.
    pub fulfillment: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionEvaluation {
    pub criterion: String,
    pub metric: MetricName,
    pub active_intervals: Vec<Interval>,
    pub results: Vec<JudgedResult>,
    /// Minimum fulfillment over the results; absent without results.
    pub aggregate_fulfillment: Option<f64>,
    pub fulfilled: bool,
    pub skipped: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub skip_reason: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Passed,
    Skipped,
    Failed,
    InvalidTrace,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Passed => "passed",
            Verdict::Skipped => "skipped",
            Verdict::Failed => "failed",
            Verdict::InvalidTrace => "invalid_trace",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseEvaluation {
    pub case_id: String,
    pub scenario_id: String,
    pub config_id: String,
    pub criteria: Vec<CriterionEvaluation>,
    pub verdict: Verdict,
}

/// Fulfillment of one SI value, in percent. Thresholds are all or nothing.
pub fn fulfillment(judgement: &Judgement, value: f64) -> f64 {
    match judgement {
        Judgement::Threshold { value: limit, direction } => {
            let ok = match direction {
                ThresholdDirection::MustNotExceed => value <= limit.si_value(),
                ThresholdDirection::MustNotFallBelow => value >= limit.si_value(),
            };
            if ok {
                100.0
            } else {
                0.0
            }
        }
        Judgement::Scale(scale) => scale.fulfillment(value),
    }
}

/// Judges results that were computed inside `intervals`.
pub fn judge(criterion: &EvaluationCriterion, intervals: Vec<Interval>, results: Vec<MetricResult>) -> CriterionEvaluation {
    let results: Vec<JudgedResult> = results
        .into_iter()
        .map(|r| JudgedResult {
            fulfillment: fulfillment(&criterion.judgement, r.value),
            result: r,
        })
        .collect();
    let aggregate = results.iter().map(|r| r.fulfillment).reduce(f64::min);
    let skip_reason = if !results.is_empty() {
        None
    } else if intervals.is_empty() {
        Some("application period never active".to_owned())
    } else {
        Some("no metric results inside the application period".to_owned())
    };
    CriterionEvaluation {
        criterion: criterion.id.clone(),
        metric: criterion.metric.clone(),
        active_intervals: intervals,
        fulfilled: !results.is_empty() && results.iter().all(|r| r.fulfillment > 0.0),
        skipped: skip_reason.is_some(),
        skip_reason,
        aggregate_fulfillment: aggregate,
        results,
    }
}

pub(crate) fn lookup<'a>(
    metrics: &BTreeMap<&MetricName, &'a EvaluationMetric>,
    name: &MetricName,
) -> Result<&'a EvaluationMetric, EvalError> {
    metrics
        .get(name)
        .copied()
        .ok_or_else(|| EvalError::UnknownMetric(name.to_string()))
}

pub fn evaluate_criterion(
    criterion: &EvaluationCriterion,
    metric: &EvaluationMetric,
    data: &EvaluationData,
) -> Result<CriterionEvaluation, EvalError> {
    let intervals = activate(&criterion.application_period, data)?;
    let results = compute_metric(metric, data, &intervals)?;
    Ok(judge(criterion, intervals.intervals, results))
}

/// Invalid trace beats failure beats skip beats pass.
pub fn case_verdict(valid: bool, criteria: &[CriterionEvaluation]) -> Verdict {
    if !valid {
        Verdict::InvalidTrace
    } else if criteria.iter().any(|c| !c.skipped && !c.fulfilled) {
        Verdict::Failed
    } else if criteria.iter().any(|c| c.skipped) {
        Verdict::Skipped
    } else {
        Verdict::Passed
    }
}

/// Evaluates every criterion of `tc` on recorded data. An invalid trace is
/// not evaluated.
pub fn evaluate_case(
    tc: &TestCase,
    metrics: &[EvaluationMetric],
    data: &EvaluationData,
) -> Result<CaseEvaluation, EvalError> {
    if data.header.scenario_id != tc.scenario.id {
        return Err(EvalError::TraceMismatch {
            expected: tc.scenario.id.clone(),
            found: data.header.scenario_id.clone(),
        });
    }
    let catalog: BTreeMap<&MetricName, &EvaluationMetric> = metrics.iter().map(|m| (&m.name, m)).collect();
    let mut criteria = Vec::new();
    if data.header.valid {
        for c in &tc.criteria {
            criteria.push(evaluate_criterion(c, lookup(&catalog, &c.metric)?, data)?);
        }
    }
    Ok(CaseEvaluation {
        case_id: tc.id.clone(),
        scenario_id: tc.scenario.id.clone(),
        config_id: data.header.config_id.clone(),
        verdict: case_verdict(data.header.valid, &criteria),
        criteria,
    })
}
