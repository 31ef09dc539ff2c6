//! Test planning metadata and the test specification layer: metrics,
//! evaluation criteria with application periods, test cases, procedures and
//! the specification that bundles them.

pub mod condition;
mod plan;
mod validate;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::scenario::ConcreteScenario;
use crate::units::{serde_si, Dimension, Quantity, Unit};

pub use condition::{parse_condition, CompareOp, ConditionExpr, Operand, SyntaxError};
pub use plan::{PlanDocument, PlanDocumentKind, TestLevel, TestObjectKind, TestObjectRef, TestObjective, TestPlan, TestScope, ExcludedFeature, validate_plan};
pub use validate::{signal_catalog, validate_criterion, validate_specification};

/// Name under which a metric is registered, e.g. `Ego_speed`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MetricName(pub String);

impl MetricName {
    pub fn new(s: &str) -> Self {
        MetricName(s.to_owned())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for MetricName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

pub const EGO_SPEED: &str = "Ego_speed";
pub const AVERAGE_EGO_DECELERATION: &str = "Average_ego_deceleration";
pub const TIME_TO_COLLISION: &str = "TTC";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum MetricFormula {
    /// Ego speed in each scene.
    EgoSpeed,
    /// Mean ego deceleration over the scenes within the trailing window.
    AverageEgoDeceleration {
        #[serde(with = "serde_si::time")]
        window: f64,
    },
    /// Gap over closing speed, when closing.
    TimeToCollision,
}

impl MetricFormula {
    pub fn output_dimension(&self) -> Dimension {
        match self {
            MetricFormula::EgoSpeed => Dimension::Speed,
            MetricFormula::AverageEgoDeceleration { .. } => Dimension::Acceleration,
            MetricFormula::TimeToCollision => Dimension::Time,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationMetric {
    pub name: MetricName,
    pub formula: MetricFormula,
    pub output_unit: Unit,
}

/// Ego speed, 2 s average deceleration and TTC.
pub fn builtin_metric_catalog() -> Vec<EvaluationMetric> {
    vec![
        EvaluationMetric {
            name: MetricName::new(EGO_SPEED),
            formula: MetricFormula::EgoSpeed,
            output_unit: Unit::MeterPerSecond,
        },
        EvaluationMetric {
            name: MetricName::new(AVERAGE_EGO_DECELERATION),
            formula: MetricFormula::AverageEgoDeceleration { window: 2.0 },
            output_unit: Unit::MeterPerSecondSquared,
        },
        EvaluationMetric {
            name: MetricName::new(TIME_TO_COLLISION),
            formula: MetricFormula::TimeToCollision,
            output_unit: Unit::Second,
        },
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum PeriodEnd {
    /// Active for as long as the start condition holds.
    ConditionNoLongerFulfilled,
    /// Ends a fixed time after it started.
    Elapsed {
        #[serde(with = "serde_si::time")]
        duration: f64,
    },
    /// Ends at the sample where the named scenario event fires.
    Event { event: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApplicationPeriod {
    pub start: ConditionExpr,
    pub end: PeriodEnd,
}

impl ApplicationPeriod {
    pub fn while_holds(start: ConditionExpr) -> Self {
        ApplicationPeriod {
            start,
            end: PeriodEnd::ConditionNoLongerFulfilled,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThresholdDirection {
    MustNotExceed,
    MustNotFallBelow,
}

/// A breakpoint of a piecewise-linear evaluation scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalePoint {
    pub value: Quantity,
    /// Fulfillment in percent.
    pub fulfillment: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationScale {
    pub breakpoints: Vec<ScalePoint>,
    /// Fulfillment outside the breakpoints' span, in percent.
    pub out_of_domain: f64,
}

impl EvaluationScale {
    /// Piecewise-linear fulfillment for an SI metric value.
    pub fn fulfillment(&self, value: f64) -> f64 {
        let pts: Vec<(f64, f64)> = self
            .breakpoints
            .iter()
            .map(|p| (p.value.si_value(), p.fulfillment))
            .collect();
        let (Some(first), Some(last)) = (pts.first(), pts.last()) else {
            return self.out_of_domain;
        };
        if !(value >= first.0 && value <= last.0) {
            return self.out_of_domain;
        }
        for w in pts.windows(2) {
            let ((x0, f0), (x1, f1)) = (w[0], w[1]);
            if value >= x0 && value <= x1 {
                if x1 == x0 {
                    return f1;
                }
                return f0 + (f1 - f0) * ((value - x0) / (x1 - x0));
            }
        }
        // single breakpoint
        first.1
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Judgement {
    Threshold {
        value: Quantity,
        direction: ThresholdDirection,
    },
    Scale(EvaluationScale),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CriterionScope {
    Scene,
    Scenario,
    Procedure,
    CrossProcedure,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationCriterion {
    pub id: String,
    pub metric: MetricName,
    pub judgement: Judgement,
    pub application_period: ApplicationPeriod,
    pub scope: CriterionScope,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestCase {
    pub id: String,
    pub name: String,
    pub scenario: ConcreteScenario,
    pub criteria: Vec<EvaluationCriterion>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SpecError {
    #[error("a test case needs one or more evaluation criteria")]
    EmptyCriteria,
}

/// Combines a concrete scenario with its evaluation criteria.
///
/// The id is `{scenario id}-{first 8 bytes of the SHA-256 of the criteria's
/// JSON form}`, so identical inputs always produce the same id.
pub fn build_test_case(
    scenario: &ConcreteScenario,
    criteria: Vec<EvaluationCriterion>,
) -> Result<TestCase, SpecError> {
    if criteria.is_empty() {
        return Err(SpecError::EmptyCriteria);
    }
    let json = serde_json::to_vec(&criteria).expect("criteria serialize");
    let digest = Sha256::digest(&json);
    Ok(TestCase {
        id: format!("{}-{}", scenario.id, hex::encode(&digest[..8])),
        name: format!("Test Case {}", scenario.id),
        scenario: scenario.clone(),
        criteria,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestProcedure {
    pub id: String,
    /// Case ids in execution order.
    pub cases: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub setup: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wrapup: Option<String>,
    #[serde(default)]
    pub cross_case_criteria: Vec<EvaluationCriterion>,
    #[serde(default)]
    pub bench_configs: Vec<String>,
}

/// The one machine-readable case/procedure format this crate reads.
pub const BUILTIN_FORMAT: &str = "scenario-testbench/toml-v1";

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TestDesignSpec {
    #[serde(default)]
    pub features_to_test: Vec<String>,
    #[serde(default)]
    pub test_conditions: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub case_format: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub procedure_format: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestSpecification {
    pub design: TestDesignSpec,
    pub cases: Vec<TestCase>,
    pub procedures: Vec<TestProcedure>,
    pub metrics: Vec<EvaluationMetric>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plan: Option<TestPlan>,
}

impl TestSpecification {
    pub fn case(&self, id: &str) -> Option<&TestCase> {
        self.cases.iter().find(|c| c.id == id)
    }

    pub fn procedure(&self, id: &str) -> Option<&TestProcedure> {
        self.procedures.iter().find(|p| p.id == id)
    }

    pub fn metric(&self, name: &MetricName) -> Option<&EvaluationMetric> {
        self.metrics.iter().find(|m| &m.name == name)
    }

    pub fn metric_map(&self) -> BTreeMap<&MetricName, &EvaluationMetric> {
        self.metrics.iter().map(|m| (&m.name, m)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::speedcontrol;
    use crate::units::kmh;

    #[test]
    fn test_case_from_speedcontrol() {
        let tc = build_test_case(&speedcontrol::concrete_scenario(), speedcontrol::criteria()).unwrap();
        assert_eq!(tc.name, "Test Case SpeedControl");
        assert!(tc.id.starts_with("SpeedControl-"));
        let again = build_test_case(&speedcontrol::concrete_scenario(), speedcontrol::criteria()).unwrap();
        assert_eq!(tc.id, again.id);
    }

    #[test]
    fn test_case_needs_criteria() {
        assert_eq!(
            build_test_case(&speedcontrol::concrete_scenario(), vec![]),
            Err(SpecError::EmptyCriteria)
        );
    }

    #[test]
    fn criteria_hash_changes_id() {
        let mut crit = speedcontrol::criteria();
        crit.pop();
        let a = build_test_case(&speedcontrol::concrete_scenario(), crit).unwrap();
        let b = build_test_case(&speedcontrol::concrete_scenario(), speedcontrol::criteria()).unwrap();
        assert_ne!(a.id, b.id);
    }

    #[test]
    fn speed_scale_values() {
        let scale = speedcontrol::speed_scale(Quantity::new(120.0, Unit::KilometerPerHour));
        assert_eq!(scale.fulfillment(kmh(114.0)), 0.0);
        assert_eq!(scale.fulfillment(kmh(117.0)), 50.0);
        assert_eq!(scale.fulfillment(kmh(120.0)), 100.0);
        assert_eq!(scale.fulfillment(kmh(121.0)), 0.0);
        assert_eq!(scale.fulfillment(kmh(100.0)), 0.0);
    }

    #[test]
    fn criterion_toml_round_trip() {
        #[derive(Serialize, Deserialize, PartialEq, Debug)]
        struct Wrap {
            criteria: Vec<EvaluationCriterion>,
        }
        let w = Wrap { criteria: speedcontrol::criteria() };
        let text = toml::to_string(&w).unwrap();
        let back: Wrap = toml::from_str(&text).unwrap();
        assert_eq!(back, w);
    }
}
