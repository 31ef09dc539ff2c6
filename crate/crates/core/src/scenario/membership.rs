use std::collections::BTreeSet;

use thiserror::Error;

use super::{ConcreteScenario, Field, LogicalScenario};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MembershipError {
    #[error("concrete scenario `{scenario}` has no value for parameter `{parameter}`")]
    MissingParameter { scenario: String, parameter: String },
}

const FIXED_RELATIVE_TOLERANCE: f64 = 1e-9;

fn approx_equal(a: f64, b: f64) -> bool {
    a == b || (a - b).abs() <= FIXED_RELATIVE_TOLERANCE * a.abs().max(b.abs())
}

/// Whether `c` is one of the concrete scenarios described by `l`.
///
/// Bounds are inclusive. Besides the recorded parameter values, the
/// concrete scenario's structure must match the templates: same objects
/// (id and kind), same events (id and effect kind), fixed slots equal and
/// parameter-backed slots inside their ranges.
pub fn is_member(c: &ConcreteScenario, l: &LogicalScenario) -> Result<bool, MembershipError> {
    for p in &l.parameters {
        let q = c
            .parameter_values
            .get(&p.name)
            .ok_or_else(|| MembershipError::MissingParameter {
                scenario: c.id.clone(),
                parameter: p.name.clone(),
            })?;
        if q.dimension() != p.dimension() || !p.contains_si(q.si_value()) {
            return Ok(false);
        }
    }

    let template_objects: BTreeSet<_> = l.objects.iter().map(|o| (o.id.as_str(), o.kind)).collect();
    let concrete_objects: BTreeSet<_> = c.objects.iter().map(|o| (o.id.as_str(), o.kind)).collect();
    if template_objects != concrete_objects {
        return Ok(false);
    }
    let template_events: BTreeSet<_> = l.events.iter().map(|e| (e.id.as_str(), e.effect.kind())).collect();
    let concrete_events: BTreeSet<_> = c.events.iter().map(|e| (e.id.as_str(), e.effect.kind())).collect();
    if template_events != concrete_events {
        return Ok(false);
    }
    if c.scenery().lane_count != l.scenery.lane_count {
        return Ok(false);
    }
    for t in &l.objects {
        let matches_lane = c
            .objects
            .iter()
            .any(|o| o.id == t.id && o.initial_state.lane_index == t.lane_index);
        if !matches_lane {
            return Ok(false);
        }
    }

    let values = c.field_values();
    for (path, field, dim) in l.fields() {
        let Some(&value) = values.get(&path) else {
            return Ok(false);
        };
        let inside = match field {
            Field::Fixed(q) => q.expect(dim).is_ok_and(|v| approx_equal(v, value)),
            Field::Param { param } => l.parameter(param).is_some_and(|p| p.contains_si(value)),
        };
        if !inside {
            return Ok(false);
        }
    }
    Ok(true)
}
