//! Deriving concrete scenarios from a logical scenario, and assigning
//! recorded scenarios to logical ones.
//!
//! Random sampling uses ChaCha8 seeded through `seed_from_u64`, so the same
//! seed gives the same scenarios on every platform.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution as _, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scenario::{
    is_member, validate_logical, ConcreteScenario, Distribution, EffectTemplate, EventEffect, Field,
    InitialState, LogicalScenario, MovableObject, ParameterRange, RealWorldTestDrive, ScenarioEvent,
    Scene, Scenery,
};
use crate::units::{Dimension, Quantity};
use crate::validation::ValidationReport;

const MAX_NORMAL_ATTEMPTS: usize = 1000;
const MAX_CORRELATION_ATTEMPTS: usize = 1000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Strategy {
    Grid { points_per_parameter: usize },
    UniformRandom { count: usize, seed: u64 },
    Boundary { include_center: bool },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcretizationConfig {
    pub strategy: Strategy,
    pub id_prefix: String,
}

impl ConcretizationConfig {
    pub fn validate(&self) -> ValidationReport {
        let mut r = ValidationReport::new();
        match self.strategy {
            Strategy::Grid { points_per_parameter } => {
                r.check(points_per_parameter >= 2, "strategy.points_per_parameter", "points_per_parameter >= 2")
            }
            Strategy::UniformRandom { count, .. } => r.check(count >= 1, "strategy.count", "count >= 1"),
            Strategy::Boundary { .. } => {}
        }
        r
    }
}

#[derive(Debug, Error)]
pub enum ConcretizeError {
    #[error("invalid logical scenario:\n{0}")]
    InvalidLogical(ValidationReport),
    #[error("invalid concretization config:\n{0}")]
    InvalidConfig(ValidationReport),
    #[error("no sample satisfied the correlations after {0} attempts")]
    CorrelationsUnsatisfiable(usize),
}

/// `{prefix}-{index}`, zero-padded to the width of the largest index.
pub fn scenario_id(prefix: &str, index: usize, count: usize) -> String {
    let width = count.saturating_sub(1).to_string().len();
    format!("{prefix}-{index:0width$}")
}

/// Values in the range's unit: `n` evenly spaced points including both
/// endpoints, or the single value of a point range.
fn grid_values(p: &ParameterRange, n: usize) -> Vec<f64> {
    if p.is_point() {
        return vec![p.min];
    }
    (0..n)
        .map(|i| {
            if i == n - 1 {
                p.max
            } else {
                p.min + (p.max - p.min) * (i as f64 / (n - 1) as f64)
            }
        })
        .collect()
}

fn cartesian(axes: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut out = vec![Vec::new()];
    for axis in axes {
        let mut next = Vec::with_capacity(out.len() * axis.len());
        for prefix in &out {
            for v in axis {
                let mut row = prefix.clone();
                row.push(*v);
                next.push(row);
            }
        }
        out = next;
    }
    out
}

fn sample_one(p: &ParameterRange, rng: &mut ChaCha8Rng) -> f64 {
    if p.is_point() {
        return p.min;
    }
    match &p.distribution {
        None | Some(Distribution::Uniform) => rng.random_range(p.min..=p.max),
        Some(Distribution::Normal { mean, stddev }) => {
            let normal = Normal::new(*mean, *stddev).expect("validated stddev > 0");
            let mut last = *mean;
            for _ in 0..MAX_NORMAL_ATTEMPTS {
                last = normal.sample(rng);
                if last >= p.min && last <= p.max {
                    return last;
                }
            }
            last.clamp(p.min, p.max)
        }
    }
}

/// Correlations that do not hold for a value assignment (values in each
/// range's own unit).
fn violated_correlations(l: &LogicalScenario, values: &BTreeMap<String, f64>) -> Vec<String> {
    let mut out = Vec::new();
    for p in &l.parameters {
        for c in &p.correlations {
            let (Some(other), Some(&lhs), Some(&rhs)) =
                (l.parameter(&c.other), values.get(&p.name), values.get(&c.other))
            else {
                continue;
            };
            let rhs_here = p.unit.from_si(other.unit.to_si(rhs)) + c.offset;
            if !c.op.holds(lhs, rhs_here) {
                out.push(format!(
                    "correlation not enforced: {} {} {} + {}",
                    p.name,
                    c.op.symbol(),
                    c.other,
                    c.offset
                ));
            }
        }
    }
    out
}

fn resolve(field: &Field, dim: Dimension, values_si: &BTreeMap<String, f64>) -> f64 {
    match field {
        Field::Fixed(q) => q.expect(dim).expect("validated dimension"),
        Field::Param { param } => values_si[param],
    }
}

/// Instantiates the templates of `l` with the given parameter values (in
/// each range's unit).
pub fn instantiate(l: &LogicalScenario, id: &str, values: &BTreeMap<String, f64>) -> ConcreteScenario {
    let values_si: BTreeMap<String, f64> = l
        .parameters
        .iter()
        .map(|p| (p.name.clone(), p.unit.to_si(values[&p.name])))
        .collect();
    let scenery = Scenery {
        lane_count: l.scenery.lane_count,
        lane_width: resolve(&l.scenery.lane_width, Dimension::Length, &values_si),
        curvature: resolve(&l.scenery.curvature, Dimension::Curvature, &values_si),
        ambient_temperature: resolve(&l.scenery.ambient_temperature, Dimension::Temperature, &values_si),
        stationary_elements: l.scenery.stationary_elements.clone(),
    };
    let objects: Vec<MovableObject> = l
        .objects
        .iter()
        .map(|o| MovableObject {
            id: o.id.clone(),
            kind: o.kind,
            roles: o.roles.clone(),
            initial_state: InitialState {
                position: resolve(&o.position, Dimension::Length, &values_si),
                lane_index: o.lane_index,
                speed: resolve(&o.speed, Dimension::Speed, &values_si),
            },
            behavior: o.behavior.clone(),
        })
        .collect();
    let events = l
        .events
        .iter()
        .map(|e| ScenarioEvent {
            id: e.id.clone(),
            trigger_time: resolve(&e.trigger_time, Dimension::Time, &values_si),
            effect: match &e.effect {
                EffectTemplate::ActivateAcc { set_speed } => EventEffect::ActivateAcc {
                    set_speed: resolve(set_speed, Dimension::Speed, &values_si),
                },
                EffectTemplate::ChangeSetSpeed { set_speed } => EventEffect::ChangeSetSpeed {
                    set_speed: resolve(set_speed, Dimension::Speed, &values_si),
                },
                EffectTemplate::DeactivateAcc => EventEffect::DeactivateAcc,
            },
        })
        .collect();
    let parameter_values = l
        .parameters
        .iter()
        .map(|p| (p.name.clone(), Quantity::si(values_si[&p.name], p.dimension())))
        .collect();
    ConcreteScenario {
        id: id.to_owned(),
        parent: Some(l.id.clone()),
        initial_scene: Scene::initial(scenery, &objects, l.self_representations.clone()),
        objects,
        events,
        goals_values: l.goals_values.clone(),
        duration: resolve(&l.duration, Dimension::Time, &values_si),
        parameter_values,
        flags: Vec::new(),
    }
}

/// Assignments of parameter values (in each range's unit), before ids.
fn assignments(l: &LogicalScenario, strategy: &Strategy) -> Result<Vec<BTreeMap<String, f64>>, ConcretizeError> {
    let names: Vec<String> = l.parameters.iter().map(|p| p.name.clone()).collect();
    let zip = |rows: Vec<Vec<f64>>| -> Vec<BTreeMap<String, f64>> {
        rows.into_iter()
            .map(|row| names.iter().cloned().zip(row).collect())
            .collect()
    };
    Ok(match *strategy {
        Strategy::Grid { points_per_parameter } => {
            let axes: Vec<Vec<f64>> = l
                .parameters
                .iter()
                .map(|p| grid_values(p, points_per_parameter))
                .collect();
            zip(cartesian(&axes))
        }
        Strategy::Boundary { include_center } => {
            let axes: Vec<Vec<f64>> = l
                .parameters
                .iter()
                .map(|p| if p.is_point() { vec![p.min] } else { vec![p.min, p.max] })
                .collect();
            let mut rows = cartesian(&axes);
            if include_center {
                rows.push(l.parameters.iter().map(|p| p.min + (p.max - p.min) / 2.0).collect());
            }
            zip(rows)
        }
        Strategy::UniformRandom { count, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut out = Vec::with_capacity(count);
            for _ in 0..count {
                let mut attempt = 0;
                loop {
                    let values: BTreeMap<String, f64> = l
                        .parameters
                        .iter()
                        .map(|p| (p.name.clone(), sample_one(p, &mut rng)))
                        .collect();
                    if violated_correlations(l, &values).is_empty() {
                        out.push(values);
                        break;
                    }
                    attempt += 1;
                    if attempt >= MAX_CORRELATION_ATTEMPTS {
                        return Err(ConcretizeError::CorrelationsUnsatisfiable(attempt));
                    }
                }
            }
            out
        }
    })
}

/// Concrete scenarios for `l`, deterministic in `(l, cfg)`.
///
/// Grid and boundary strategies do not enforce correlations; outputs that
/// violate one carry a note in `flags`.
pub fn concretize(l: &LogicalScenario, cfg: &ConcretizationConfig) -> Result<Vec<ConcreteScenario>, ConcretizeError> {
    let report = validate_logical(l);
    if !report.is_empty() {
        return Err(ConcretizeError::InvalidLogical(report));
    }
    let report = cfg.validate();
    if !report.is_empty() {
        return Err(ConcretizeError::InvalidConfig(report));
    }
    let rows = assignments(l, &cfg.strategy)?;
    let count = rows.len();
    Ok(rows
        .iter()
        .enumerate()
        .map(|(i, values)| {
            let mut c = instantiate(l, &scenario_id(&cfg.id_prefix, i, count), values);
            if !matches!(cfg.strategy, Strategy::UniformRandom { .. }) {
                c.flags = violated_correlations(l, values);
            }
            c
        })
        .collect())
}

/// For each recorded scenario, the catalog entries it is a member of.
/// A scenario lacking a catalog parameter is not a member of that entry.
pub fn assign_drive(d: &RealWorldTestDrive, catalog: &[LogicalScenario]) -> BTreeMap<String, Vec<String>> {
    d.recorded_scenarios
        .iter()
        .map(|c| {
            let ids = catalog
                .iter()
                .filter(|l| is_member(c, l) == Ok(true))
                .map(|l| l.id.clone())
                .collect();
            (c.id.clone(), ids)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{validate_concrete, Correlation, CorrelationOp};
    use crate::speedcontrol;
    use crate::units::Unit;

    fn collapse_all_but(l: &mut LogicalScenario, keep: &str) {
        for p in &mut l.parameters {
            if p.name != keep {
                p.max = p.min;
            }
        }
    }

    #[test]
    fn boundary_gives_all_corners() {
        let l = speedcontrol::logical_scenario();
        let cfg = ConcretizationConfig {
            strategy: Strategy::Boundary { include_center: false },
            id_prefix: "B".into(),
        };
        let out = concretize(&l, &cfg).unwrap();
        assert_eq!(out.len(), 64);
        assert_eq!(out[0].id, "B-00");
        assert_eq!(out[63].id, "B-63");
        for c in &out {
            for p in &l.parameters {
                let v = c.parameter_values[&p.name].si_value();
                assert!(v == p.min_si() || v == p.max_si());
            }
        }
        let with_center = ConcretizationConfig {
            strategy: Strategy::Boundary { include_center: true },
            id_prefix: "B".into(),
        };
        assert_eq!(concretize(&l, &with_center).unwrap().len(), 65);
    }

    #[test]
    fn grid_on_single_parameter() {
        let mut l = speedcontrol::logical_scenario();
        collapse_all_but(&mut l, "set_speed");
        let cfg = ConcretizationConfig {
            strategy: Strategy::Grid { points_per_parameter: 2 },
            id_prefix: "G".into(),
        };
        let out = concretize(&l, &cfg).unwrap();
        let speeds: Vec<f64> = out.iter().map(|c| c.parameter_values["set_speed"].si_value()).collect();
        assert_eq!(speeds, vec![Unit::KilometerPerHour.to_si(60.0), Unit::KilometerPerHour.to_si(200.0)]);
        assert_eq!(out[0].id, "G-0");
    }

    #[test]
    fn random_is_reproducible() {
        let l = speedcontrol::logical_scenario();
        let cfg = ConcretizationConfig {
            strategy: Strategy::UniformRandom { count: 1, seed: 42 },
            id_prefix: "R".into(),
        };
        let a = concretize(&l, &cfg).unwrap();
        let b = concretize(&l, &cfg).unwrap();
        assert_eq!(a.len(), 1);
        assert_eq!(toml::to_string(&a[0]).unwrap(), toml::to_string(&b[0]).unwrap());
    }

    #[test]
    fn outputs_are_valid_members() {
        let l = speedcontrol::logical_scenario();
        for strategy in [
            Strategy::Grid { points_per_parameter: 2 },
            Strategy::Boundary { include_center: true },
            Strategy::UniformRandom { count: 20, seed: 7 },
        ] {
            let cfg = ConcretizationConfig { strategy, id_prefix: "X".into() };
            for c in concretize(&l, &cfg).unwrap() {
                assert!(validate_concrete(&c).is_empty(), "{}", validate_concrete(&c));
                assert_eq!(is_member(&c, &l), Ok(true), "{}", c.id);
            }
        }
    }

    #[test]
    fn invalid_logical_rejected() {
        let mut l = speedcontrol::logical_scenario();
        l.parameters[0].min = 9.0;
        let cfg = ConcretizationConfig {
            strategy: Strategy::Boundary { include_center: false },
            id_prefix: "X".into(),
        };
        assert!(matches!(concretize(&l, &cfg), Err(ConcretizeError::InvalidLogical(_))));
    }

    #[test]
    fn correlations_enforced_when_sampling_and_flagged_otherwise() {
        let mut l = speedcontrol::logical_scenario();
        // set speed below initial speed
        let set = l.parameters.iter_mut().find(|p| p.name == "set_speed").unwrap();
        set.correlations.push(Correlation {
            op: CorrelationOp::Less,
            other: "initial_speed".into(),
            offset: 0.0,
        });
        let cfg = ConcretizationConfig {
            strategy: Strategy::UniformRandom { count: 50, seed: 1 },
            id_prefix: "R".into(),
        };
        for c in concretize(&l, &cfg).unwrap() {
            assert!(c.parameter_values["set_speed"].si_value() < c.parameter_values["initial_speed"].si_value());
        }
        let cfg = ConcretizationConfig {
            strategy: Strategy::Boundary { include_center: false },
            id_prefix: "B".into(),
        };
        let out = concretize(&l, &cfg).unwrap();
        let flagged = out.iter().filter(|c| !c.flags.is_empty()).count();
        // set_speed max (200) is never below initial speed; min (60) always is
        assert_eq!(flagged, 32);
    }

    #[test]
    fn normal_sampling_stays_in_range() {
        let mut l = speedcontrol::logical_scenario();
        l.parameters[0].distribution = Some(Distribution::Normal { mean: 3.9, stddev: 2.0 });
        let cfg = ConcretizationConfig {
            strategy: Strategy::UniformRandom { count: 100, seed: 3 },
            id_prefix: "N".into(),
        };
        for c in concretize(&l, &cfg).unwrap() {
            let v = c.scenery().lane_width;
            assert!((2.5..=3.9).contains(&v));
        }
    }

    #[test]
    fn drive_assignment() {
        let drive = speedcontrol::real_world_drive();
        let catalog = vec![speedcontrol::logical_scenario()];
        let a = assign_drive(&drive, &catalog);
        assert_eq!(a["REC-A9-0417"], Vec::<String>::new());
        assert_eq!(a["REC-A9-0418"], vec![speedcontrol::LOGICAL_ID.to_owned()]);
        let empty = assign_drive(&drive, &[]);
        assert!(empty.values().all(|v| v.is_empty()));
        assert_eq!(empty.len(), 2);
    }

    #[test]
    fn id_padding() {
        assert_eq!(scenario_id("p", 3, 10), "p-3");
        assert_eq!(scenario_id("p", 3, 11), "p-03");
        assert_eq!(scenario_id("p", 0, 1), "p-0");
    }
}
