//! Test evaluation: application periods, metric results, judgement against
//! thresholds and scales, case verdicts and procedure reports. Works on
//! recorded data ([`evaluate_case`]) or sample by sample during a run
//! ([`IncrementalEvaluator`]); both give identical evaluations.

mod activation;
mod incremental;
mod judge;
mod metrics;
mod report;

use thiserror::Error;

pub use activation::{activate, elapsed_samples, evaluate_condition, ActiveIntervals, Interval};
pub use incremental::IncrementalEvaluator;
pub use judge::{
    case_verdict, evaluate_case, evaluate_criterion, fulfillment, judge, CaseEvaluation, CriterionEvaluation,
    JudgedResult, Verdict,
};
pub use metrics::{compute_metric, metric_avg_decel, metric_ego_speed, metric_ttc, window_samples, MetricResult};
pub use report::{
    evaluate_procedure, overall_verdict, render_text, trace_digest, Provenance, TestReport, TraceDigest,
    REPORT_SCHEMA_VERSION,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("unknown signal `{0}`")]
    UnknownSignal(String),
    #[error("metric `{metric}` needs signal `{signal}`, which the trace does not provide")]
    MissingSignal { metric: String, signal: String },
    #[error("unknown metric `{0}`")]
    UnknownMetric(String),
    #[error("trace belongs to scenario `{found}`, expected `{expected}`")]
    TraceMismatch { expected: String, found: String },
    #[error("incomplete input: {0}")]
    IncompleteInput(String),
}

#[cfg(test)]
pub(crate) mod testing {
    use crate::engine::EvaluationData;

    /// Synthetic evaluation data with every value present.
    pub fn table(dt: f64, columns: &[(&str, &[f64])]) -> EvaluationData {
        EvaluationData::from_columns(
            dt,
            columns
                .iter()
                .map(|(n, v)| (n.to_string(), v.iter().copied().map(Some).collect()))
                .collect(),
        )
    }
}
