//! Sample-by-sample evaluation during execution.

use std::collections::BTreeMap;

use super::activation::{compare_holds, interval, Interval};
use super::judge::{case_verdict, judge, lookup, CaseEvaluation};
use super::metrics::{lead_data_present, ttc_at, window_samples, MetricResult};
use super::EvalError;
use crate::engine::trace::EVENT_COLUMN_PREFIX;
use crate::engine::EvaluationData;
use crate::spec::{
    ApplicationPeriod, ConditionExpr, EvaluationCriterion, EvaluationMetric, MetricFormula, MetricName, Operand,
    PeriodEnd, TestCase,
};
use crate::units::Unit;

enum Node {
    Flag(String),
    Compare { prev: Option<f64> },
    And(Box<Node>, Box<Node>),
    Or(Box<Node>, Box<Node>),
    Once { latched: bool, inner: Box<Node> },
}

impl Node {
    fn new(expr: &ConditionExpr) -> Node {
        match expr {
            ConditionExpr::Flag(n) => Node::Flag(n.clone()),
            ConditionExpr::Compare { .. } => Node::Compare { prev: None },
            ConditionExpr::And(a, b) => Node::And(Box::new(Node::new(a)), Box::new(Node::new(b))),
            ConditionExpr::Or(a, b) => Node::Or(Box::new(Node::new(a)), Box::new(Node::new(b))),
            ConditionExpr::Once(c) => Node::Once {
                latched: false,
                inner: Box::new(Node::new(c)),
            },
        }
    }

    /// Both children are always stepped so their history stays complete.
    fn step(&mut self, expr: &ConditionExpr, data: &EvaluationData, i: usize) -> Result<bool, EvalError> {
        Ok(match (self, expr) {
            (Node::Flag(name), _) => value(data, name, i)?.is_some_and(|v| v != 0.0),
            (
                Node::Compare { prev },
                ConditionExpr::Compare {
                    signal,
                    op,
                    rhs,
                    tolerance,
                },
            ) => {
                let lhs = value(data, signal, i)?;
                let r = match rhs {
                    Operand::Number(v) => Some(*v),
                    Operand::Signal(s) => value(data, s, i)?,
                };
                let d = match (lhs, r) {
                    (Some(a), Some(b)) => Some(a - b),
                    _ => None,
                };
                let holds = compare_holds(*op, *tolerance, d, *prev);
                *prev = d;
                holds
            }
            (Node::And(a, b), ConditionExpr::And(ea, eb)) => {
                let x = a.step(ea, data, i)?;
                let y = b.step(eb, data, i)?;
                x && y
            }
            (Node::Or(a, b), ConditionExpr::Or(ea, eb)) => {
                let x = a.step(ea, data, i)?;
                let y = b.step(eb, data, i)?;
                x || y
            }
            (Node::Once { latched, inner }, ConditionExpr::Once(c)) => {
                let v = inner.step(c, data, i)?;
                *latched |= v;
                *latched
            }
            _ => unreachable!("state tree mirrors the expression"),
        })
    }
}

fn value(data: &EvaluationData, name: &str, i: usize) -> Result<Option<f64>, EvalError> {
    data.column(name)
        .map(|c| c[i])
        .ok_or_else(|| EvalError::UnknownSignal(name.to_owned()))
}

fn require(data: &EvaluationData, name: &str) -> Result<(), EvalError> {
    if data.has_column(name) {
        Ok(())
    } else {
        Err(EvalError::UnknownSignal(name.to_owned()))
    }
}

struct CriterionState<'a> {
    criterion: &'a EvaluationCriterion,
    metric: &'a EvaluationMetric,
    node: Node,
    prev_cond: bool,
    open: Option<usize>,
    intervals: Vec<Interval>,
    results: Vec<MetricResult>,
}

impl<'a> CriterionState<'a> {
    fn observe(&mut self, data: &EvaluationData, i: usize) -> Result<(), EvalError> {
        let period: &'a ApplicationPeriod = &self.criterion.application_period;
        let cond = self.node.step(&period.start, data, i)?;
        match &period.end {
            PeriodEnd::ConditionNoLongerFulfilled => {
                if !cond {
                    if let Some(start) = self.open.take() {
                        self.intervals.push(interval(data, start, i));
                    }
                } else if self.open.is_none() {
                    self.open = Some(i);
                }
            }
            end => {
                if let Some(start) = self.open {
                    let close = match end {
                        PeriodEnd::Event { event } => {
                            value(data, &format!("{EVENT_COLUMN_PREFIX}{event}"), i)?.is_some_and(|v| v != 0.0)
                        }
                        PeriodEnd::Elapsed { duration } => {
                            i - start >= super::activation::elapsed_samples(*duration, data.header.time_step)
                        }
                        PeriodEnd::ConditionNoLongerFulfilled => unreachable!(),
                    };
                    if close {
                        self.intervals.push(interval(data, start, i));
                        self.open = None;
                    }
                } else if let PeriodEnd::Event { event } = end {
                    // the event column must exist even while inactive
                    value(data, &format!("{EVENT_COLUMN_PREFIX}{event}"), i)?;
                }
                let rising = cond && (i == 0 || !self.prev_cond);
                if self.open.is_none() && rising {
                    self.open = Some(i);
                }
            }
        }
        self.prev_cond = cond;
        if let Some(start) = self.open {
            self.measure(data, start, i)?;
        }
        Ok(())
    }

    fn measure(&mut self, data: &EvaluationData, start: usize, i: usize) -> Result<(), EvalError> {
        let name = &self.metric.name;
        let push = |out: &mut Vec<MetricResult>, value: f64, unit: Unit| {
            out.push(MetricResult {
                time: data.time(i),
                value,
                unit,
                metric: name.clone(),
            })
        };
        match self.metric.formula {
            MetricFormula::EgoSpeed => {
                if let Some(v) = value(data, "v_ego", i)? {
                    push(&mut self.results, v, Unit::MeterPerSecond);
                }
            }
            MetricFormula::AverageEgoDeceleration { window } => {
                let a = data
                    .column("a_ego")
                    .ok_or_else(|| EvalError::UnknownSignal("a_ego".into()))?;
                let n = window_samples(window, data.header.time_step);
                if i + 1 >= start + n {
                    let w = &a[i + 1 - n..=i];
                    if w.iter().all(Option::is_some) {
                        let sum: f64 = w.iter().map(|x| x.unwrap()).sum();
                        push(&mut self.results, sum / n as f64, Unit::MeterPerSecondSquared);
                    }
                }
            }
            MetricFormula::TimeToCollision => {
                let get = |c: &str| data.column(c).and_then(|col| col[i]);
                if let Some(t) = ttc_at(get("gap"), get("v_ego"), get("v_lead")) {
                    push(&mut self.results, t, Unit::Second);
                }
            }
        }
        Ok(())
    }
}

/// Evaluates a test case while its evaluation data grows; feed it every row
/// through [`observe`](Self::observe) and collect the evaluation with
/// [`finish`](Self::finish).
pub struct IncrementalEvaluator<'a> {
    case: &'a TestCase,
    states: Vec<CriterionState<'a>>,
    observed: usize,
    error: Option<EvalError>,
}

impl<'a> IncrementalEvaluator<'a> {
    pub fn new(case: &'a TestCase, metrics: &'a [EvaluationMetric]) -> Result<Self, EvalError> {
        let catalog: BTreeMap<&MetricName, &EvaluationMetric> = metrics.iter().map(|m| (&m.name, m)).collect();
        let states = case
            .criteria
            .iter()
            .map(|c| {
                Ok(CriterionState {
                    criterion: c,
                    metric: lookup(&catalog, &c.metric)?,
                    node: Node::new(&c.application_period.start),
                    prev_cond: false,
                    open: None,
                    intervals: Vec::new(),
                    results: Vec::new(),
                })
            })
            .collect::<Result<_, EvalError>>()?;
        Ok(IncrementalEvaluator {
            case,
            states,
            observed: 0,
            error: None,
        })
    }

    /// Processes row `index`, which must be the next unseen row of `data`.
    pub fn observe(&mut self, data: &EvaluationData, index: usize) {
        if self.error.is_some() {
            return;
        }
        debug_assert_eq!(index, self.observed);
        for s in &mut self.states {
            if let Err(e) = s.observe(data, index) {
                self.error = Some(e);
                return;
            }
        }
        self.observed = index + 1;
    }

    /// Closes open periods at the end of `data` and judges every criterion.
    pub fn finish(self, data: &EvaluationData) -> Result<CaseEvaluation, EvalError> {
        if data.header.scenario_id != self.case.scenario.id {
            return Err(EvalError::TraceMismatch {
                expected: self.case.scenario.id.clone(),
                found: data.header.scenario_id.clone(),
            });
        }
        if let Some(e) = self.error {
            return Err(e);
        }
        let valid = data.header.valid;
        let mut criteria = Vec::new();
        if valid {
            for mut s in self.states {
                if let Some(start) = s.open.take() {
                    s.intervals.push(interval(data, start, self.observed));
                }
                match s.metric.formula {
                    MetricFormula::EgoSpeed => require(data, "v_ego")?,
                    MetricFormula::AverageEgoDeceleration { .. } => require(data, "a_ego")?,
                    MetricFormula::TimeToCollision => {
                        lead_data_present(data)?;
                        require(data, "v_ego")?;
                    }
                }
                criteria.push(judge(s.criterion, s.intervals, s.results));
            }
        }
        Ok(CaseEvaluation {
            case_id: self.case.id.clone(),
            scenario_id: self.case.scenario.id.clone(),
            config_id: data.header.config_id.clone(),
            verdict: case_verdict(valid, &criteria),
            criteria,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::evaluate_case;
    use crate::eval::testing::table;
    use crate::spec::{build_test_case, builtin_metric_catalog, parse_condition, CriterionScope, Judgement, ThresholdDirection};
    use crate::speedcontrol;
    use crate::units::Quantity;

    fn replay(tc: &TestCase, data: &EvaluationData) -> Result<CaseEvaluation, EvalError> {
        let metrics = builtin_metric_catalog();
        let mut ev = IncrementalEvaluator::new(tc, &metrics)?;
        for i in 0..data.len() {
            ev.observe(data, i);
        }
        ev.finish(data)
    }

    #[test]
    fn matches_batch_on_synthetic_data() {
        let mut data = table(
            0.5,
            &[
                ("acc_active", &[0.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 0.0, 1.0, 1.0, 1.0, 1.0]),
                ("v_ego", &[36.0, 35.0, 34.0, 33.5, 33.2, 33.3, 33.33, 33.0, 33.1, 33.2, 33.3, 33.3]),
                ("v_set", &[33.3; 12]),
                ("a_ego", &[0.0, 2.0, 2.0, 1.0, 0.6, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]),
            ],
        );
        data.header.scenario_id = speedcontrol::SCENARIO_ID.into();
        let elapsed = EvaluationCriterion {
            id: "EC3".into(),
            metric: MetricName::new(crate::spec::AVERAGE_EGO_DECELERATION),
            judgement: Judgement::Threshold {
                value: Quantity::si(1.5, crate::units::Dimension::Acceleration),
                direction: ThresholdDirection::MustNotExceed,
            },
            application_period: ApplicationPeriod {
                start: parse_condition("flag(acc_active) || v_ego > 40").unwrap(),
                end: PeriodEnd::Elapsed { duration: 2.5 },
            },
            scope: CriterionScope::Scene,
        };
        let mut crit = speedcontrol::criteria();
        crit.push(elapsed);
        let tc = build_test_case(&speedcontrol::concrete_scenario(), crit).unwrap();
        let batch = evaluate_case(&tc, &builtin_metric_catalog(), &data).unwrap();
        assert_eq!(replay(&tc, &data).unwrap(), batch);
    }

    #[test]
    fn reports_unknown_signal_at_finish() {
        let mut data = table(1.0, &[("v_ego", &[1.0, 2.0])]);
        data.header.scenario_id = speedcontrol::SCENARIO_ID.into();
        let tc = speedcontrol::test_case();
        assert!(matches!(replay(&tc, &data), Err(EvalError::UnknownSignal(_))));
    }
}
