use serde::{Deserialize, Serialize};

use super::activation::{column, ActiveIntervals};
use super::EvalError;
use crate::engine::EvaluationData;
use crate::spec::{EvaluationMetric, MetricFormula, MetricName};
use crate::units::Unit;

/// A metric value at one sample, in the SI unit of the metric's dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricResult {
    pub time: f64,
    pub value: f64,
    pub unit: Unit,
    pub metric: MetricName,
}

/// Samples in a closed window of `window` seconds: `floor(window/dt) + 1`.
pub fn window_samples(window: f64, dt: f64) -> usize {
    (window / dt + 1e-9).floor() as usize + 1
}

fn result(data: &EvaluationData, i: usize, value: f64, unit: Unit, metric: &MetricName) -> MetricResult {
    MetricResult {
        time: data.time(i),
        value,
        unit,
        metric: metric.clone(),
    }
}

/// `v_ego` at every active sample.
pub fn metric_ego_speed(
    data: &EvaluationData,
    intervals: &ActiveIntervals,
    name: &MetricName,
) -> Result<Vec<MetricResult>, EvalError> {
    let v = column(data, "v_ego")?;
    let mut out = Vec::new();
    for iv in &intervals.intervals {
        for i in iv.start..iv.end {
            if let Some(x) = v[i] {
                out.push(result(data, i, x, Unit::MeterPerSecond, name));
            }
        }
    }
    Ok(out)
}

/// Mean of `a_ego` (deceleration positive) over the closed window
/// `[t_s - window, t_s]`, at every active sample whose window lies inside
/// the same active interval.
pub fn metric_avg_decel(
    data: &EvaluationData,
    intervals: &ActiveIntervals,
    window: f64,
    name: &MetricName,
) -> Result<Vec<MetricResult>, EvalError> {
    let a = column(data, "a_ego")?;
    let n = window_samples(window, data.header.time_step);
    let mut out = Vec::new();
    for iv in &intervals.intervals {
        for i in (iv.start + n - 1)..iv.end {
            let w = &a[i + 1 - n..=i];
            if w.iter().all(Option::is_some) {
                let sum: f64 = w.iter().map(|x| x.unwrap()).sum();
                out.push(result(data, i, sum / n as f64, Unit::MeterPerSecondSquared, name));
            }
        }
    }
    Ok(out)
}

pub(crate) fn lead_data_present(data: &EvaluationData) -> Result<(), EvalError> {
    let missing = |signal: &str| EvalError::MissingSignal {
        metric: "TTC".into(),
        signal: signal.into(),
    };
    let gap = data.column("gap").ok_or_else(|| missing("gap"))?;
    let lead = data.column("v_lead").ok_or_else(|| missing("v_lead"))?;
    if !gap.iter().zip(lead).any(|(g, l)| g.is_some() && l.is_some()) {
        return Err(missing("gap"));
    }
    Ok(())
}

pub(crate) fn ttc_at(gap: Option<f64>, v_ego: Option<f64>, v_lead: Option<f64>) -> Option<f64> {
    let (g, e, l) = (gap?, v_ego?, v_lead?);
    let closing = e - l;
    (closing > 0.0).then(|| g / closing)
}

/// `gap / (v_ego - v_lead)` at active samples where the gap is closing.
pub fn metric_ttc(
    data: &EvaluationData,
    intervals: &ActiveIntervals,
    name: &MetricName,
) -> Result<Vec<MetricResult>, EvalError> {
    lead_data_present(data)?;
    let (gap, ego, lead) = (column(data, "gap")?, column(data, "v_ego")?, column(data, "v_lead")?);
    let mut out = Vec::new();
    for iv in &intervals.intervals {
        for i in iv.start..iv.end {
            if let Some(t) = ttc_at(gap[i], ego[i], lead[i]) {
                out.push(result(data, i, t, Unit::Second, name));
            }
        }
    }
    Ok(out)
}

pub fn compute_metric(
    metric: &EvaluationMetric,
    data: &EvaluationData,
    intervals: &ActiveIntervals,
) -> Result<Vec<MetricResult>, EvalError> {
    match metric.formula {
        MetricFormula::EgoSpeed => metric_ego_speed(data, intervals, &metric.name),
        MetricFormula::AverageEgoDeceleration { window } => metric_avg_decel(data, intervals, window, &metric.name),
        MetricFormula::TimeToCollision => metric_ttc(data, intervals, &metric.name),
    }
}
