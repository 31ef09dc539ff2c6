//! Application periods over recorded evaluation data.

use serde::{Deserialize, Serialize};

use super::EvalError;
use crate::engine::trace::EVENT_COLUMN_PREFIX;
use crate::engine::EvaluationData;
use crate::spec::{ApplicationPeriod, CompareOp, ConditionExpr, Operand, PeriodEnd};

/// Half-open `[t_start, t_end)`, with the sample indices it covers
/// (`start..end`). An interval running to the end of the trace ends one
/// step after the last sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub start: usize,
    pub end: usize,
    pub t_start: f64,
    pub t_end: f64,
}

impl Interval {
    pub fn contains_index(&self, i: usize) -> bool {
        self.start <= i && i < self.end
    }

    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end == self.start
    }
}

/// Sorted, disjoint, non-empty intervals.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ActiveIntervals {
    pub intervals: Vec<Interval>,
}

impl ActiveIntervals {
    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn contains_index(&self, i: usize) -> bool {
        self.intervals.iter().any(|iv| iv.contains_index(i))
    }

    pub fn sample_count(&self) -> usize {
        self.intervals.iter().map(Interval::len).sum()
    }
}

pub(crate) fn interval(data: &EvaluationData, start: usize, end: usize) -> Interval {
    let t_end = if end < data.len() { data.time(end) } else { data.end_time() };
    Interval {
        start,
        end,
        t_start: data.time(start),
        t_end,
    }
}

/// Truth of a comparison at one sample, given the signed difference
/// `lhs - rhs` here and at the previous sample. `==` also holds where the
/// difference changes sign strictly between the two samples.
pub(crate) fn compare_holds(op: CompareOp, tolerance: Option<f64>, d: Option<f64>, d_prev: Option<f64>) -> bool {
    let Some(d) = d else { return false };
    match op {
        CompareOp::Less => d < 0.0,
        CompareOp::LessEqual => d <= 0.0,
        CompareOp::Greater => d > 0.0,
        CompareOp::GreaterEqual => d >= 0.0,
        CompareOp::Equal => {
            let crossed = d_prev.is_some_and(|p| (p < 0.0 && d > 0.0) || (p > 0.0 && d < 0.0));
            d == 0.0 || d.abs() <= tolerance.unwrap_or(0.0) || crossed
        }
    }
}

pub(crate) fn column<'a>(data: &'a EvaluationData, name: &str) -> Result<&'a [Option<f64>], EvalError> {
    data.column(name)
        .ok_or_else(|| EvalError::UnknownSignal(name.to_owned()))
}

/// Signed difference `lhs - rhs` for every sample.
fn differences(data: &EvaluationData, signal: &str, rhs: &Operand) -> Result<Vec<Option<f64>>, EvalError> {
    let lhs = column(data, signal)?;
    Ok(match rhs {
        Operand::Number(v) => lhs.iter().map(|x| x.map(|x| x - v)).collect(),
        Operand::Signal(s) => {
            let r = column(data, s)?;
            lhs.iter()
                .zip(r)
                .map(|(a, b)| match (a, b) {
                    (Some(a), Some(b)) => Some(a - b),
                    _ => None,
                })
                .collect()
        }
    })
}

/// The condition evaluated at every sample.
pub fn evaluate_condition(expr: &ConditionExpr, data: &EvaluationData) -> Result<Vec<bool>, EvalError> {
    Ok(match expr {
        ConditionExpr::Flag(name) => column(data, name)?
            .iter()
            .map(|v| v.is_some_and(|v| v != 0.0))
            .collect(),
        ConditionExpr::Compare {
            signal,
            op,
            rhs,
            tolerance,
        } => {
            let d = differences(data, signal, rhs)?;
            (0..d.len())
                .map(|i| {
                    let prev = if i == 0 { None } else { d[i - 1] };
                    compare_holds(*op, *tolerance, d[i], prev)
                })
                .collect()
        }
        ConditionExpr::And(a, b) => {
            let (a, b) = (evaluate_condition(a, data)?, evaluate_condition(b, data)?);
            a.iter().zip(&b).map(|(x, y)| *x && *y).collect()
        }
        ConditionExpr::Or(a, b) => {
            let (a, b) = (evaluate_condition(a, data)?, evaluate_condition(b, data)?);
            a.iter().zip(&b).map(|(x, y)| *x || *y).collect()
        }
        ConditionExpr::Once(c) => {
            let mut latched = false;
            evaluate_condition(c, data)?
                .into_iter()
                .map(|v| {
                    latched |= v;
                    latched
                })
                .collect()
        }
    })
}

/// Samples an elapsed-time period lasts: the smallest `n` with
/// `n·dt >= duration`.
pub fn elapsed_samples(duration: f64, dt: f64) -> usize {
    ((duration / dt - 1e-9).ceil() as usize).max(1)
}

/// Intervals of `period` over `data`.
///
/// `condition_no_longer_fulfilled` gives the maximal runs where the start
/// condition holds. With `elapsed` or `event` ends a period starts on a
/// rising edge of the condition (or at the first sample if it holds there)
/// and lasts until its end rule fires, regardless of the condition; a new
/// period needs a new rising edge.
pub fn activate(period: &ApplicationPeriod, data: &EvaluationData) -> Result<ActiveIntervals, EvalError> {
    let cond = evaluate_condition(&period.start, data)?;
    let n = cond.len();
    let mut spans = Vec::new();
    match &period.end {
        PeriodEnd::ConditionNoLongerFulfilled => {
            let mut i = 0;
            while i < n {
                if cond[i] {
                    let start = i;
                    while i < n && cond[i] {
                        i += 1;
                    }
                    spans.push((start, i));
                } else {
                    i += 1;
                }
            }
        }
        end => {
            let fired: Vec<bool> = match end {
                PeriodEnd::Event { event } => column(data, &format!("{EVENT_COLUMN_PREFIX}{event}"))?
                    .iter()
                    .map(|v| v.is_some_and(|v| v != 0.0))
                    .collect(),
                _ => vec![false; n],
            };
            let limit = match end {
                PeriodEnd::Elapsed { duration } => Some(elapsed_samples(*duration, data.header.time_step)),
                _ => None,
            };
            let mut open: Option<usize> = None;
            for i in 0..n {
                if let Some(start) = open {
                    if fired[i] || limit.is_some_and(|l| i - start >= l) {
                        spans.push((start, i));
                        open = None;
                    }
                }
                let rising = cond[i] && (i == 0 || !cond[i - 1]);
                if open.is_none() && rising {
                    open = Some(i);
                }
            }
            if let Some(start) = open {
                spans.push((start, n));
            }
        }
    }
    Ok(ActiveIntervals {
        intervals: spans
            .into_iter()
            .filter(|(a, b)| b > a)
            .map(|(a, b)| interval(data, a, b))
            .collect(),
    })
}
