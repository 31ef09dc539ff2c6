use std::collections::{BTreeMap, BTreeSet};

use super::{
    Behavior, ConcreteScenario, Distribution, EventEffect, Field, FunctionalScenario, GoalValue,
    LogicalScenario, MovableObject, ObjectKind, ObjectRole, RealWorldTestDrive, SelfRepresentation,
};
use crate::validation::ValidationReport;

pub fn validate_functional(s: &FunctionalScenario) -> ValidationReport {
    let mut r = ValidationReport::new();
    r.check(!s.id.trim().is_empty(), "id", "id must be non-empty");
    r.check(!s.narrative.trim().is_empty(), "narrative", "narrative must be non-empty");
    r
}

fn check_unique<'a>(r: &mut ValidationReport, path: &str, ids: impl Iterator<Item = &'a str>) {
    let mut seen = BTreeSet::new();
    for id in ids {
        if id.trim().is_empty() {
            r.push(path, "id must be non-empty");
        } else if !seen.insert(id) {
            r.push(format!("{path}[{id}]"), format!("duplicate id `{id}`"));
        }
    }
}

struct ObjectView<'a> {
    id: &'a str,
    kind: ObjectKind,
    roles: &'a BTreeSet<ObjectRole>,
    lane_index: u32,
    behavior: &'a Behavior,
}

fn check_objects(r: &mut ValidationReport, lane_count: u32, objects: &[ObjectView<'_>]) {
    let egos = objects.iter().filter(|o| o.kind == ObjectKind::EgoVehicle).count();
    if egos != 1 {
        r.push("objects", format!("exactly one ego vehicle required, found {egos}"));
    }
    check_unique(r, "objects", objects.iter().map(|o| o.id));
    for o in objects {
        let path = format!("objects[{}]", o.id);
        if o.lane_index >= lane_count {
            r.push(
                format!("{path}.lane_index"),
                format!("lane_index {} outside 0..{lane_count}", o.lane_index),
            );
        }
        let drives_test_object = matches!(o.behavior, Behavior::TestObject);
        if o.kind == ObjectKind::EgoVehicle && !drives_test_object {
            r.push(format!("{path}.behavior"), "ego vehicle must be driven by the test object");
        }
        if o.kind != ObjectKind::EgoVehicle && drives_test_object {
            r.push(format!("{path}.behavior"), "only the ego vehicle is driven by the test object");
        }
        if let Behavior::Scripted { segments } = o.behavior {
            if segments.windows(2).any(|w| w[0].from > w[1].from) {
                r.push(format!("{path}.behavior"), "scripted segments must be sorted by start time");
            }
            if segments.iter().any(|s| !s.acceleration.is_finite() || !s.from.is_finite()) {
                r.push(format!("{path}.behavior"), "scripted segment values must be finite");
            }
        }
        if o.roles.is_empty() {
            r.push(format!("{path}.roles"), "an object is an actor, an observer, or both");
        }
    }
}

fn check_self_representations(
    r: &mut ValidationReport,
    reps: &[SelfRepresentation],
    objects: &[ObjectView<'_>],
) {
    for (i, rep) in reps.iter().enumerate() {
        match objects.iter().find(|o| o.id == rep.owner) {
            None => r.push(
                format!("self_representations[{i}].owner"),
                format!("owner `{}` is not an object of the scenario", rep.owner),
            ),
            Some(o) if o.roles.is_empty() => r.push(
                format!("self_representations[{i}].owner"),
                "owner must be an actor or observer",
            ),
            Some(_) => {}
        }
    }
}

fn check_goals(r: &mut ValidationReport, goals: &[GoalValue], objects: &[ObjectView<'_>]) {
    for (i, g) in goals.iter().enumerate() {
        let is_actor = objects
            .iter()
            .any(|o| o.id == g.owner && o.roles.contains(&ObjectRole::Actor));
        r.check(
            is_actor,
            format!("goals_values[{i}].owner"),
            format!("owner `{}` is not an actor of the scenario", g.owner),
        );
    }
}

/// Structural checks on a logical scenario: every range-valued slot backed by
/// exactly one parameter, well-formed ranges, distributions and correlations.
pub fn validate_logical(s: &LogicalScenario) -> ValidationReport {
    let mut r = ValidationReport::new();
    r.check(!s.id.trim().is_empty(), "id", "id must be non-empty");
    r.check(s.scenery.lane_count >= 1, "scenery.lane_count", "lane_count >= 1");

    let mut declared: BTreeMap<&str, usize> = BTreeMap::new();
    for p in &s.parameters {
        *declared.entry(p.name.as_str()).or_default() += 1;
    }
    for (name, count) in &declared {
        if *count > 1 {
            r.push(format!("parameters[{name}]"), format!("parameter declared {count} times"));
        }
    }

    for p in &s.parameters {
        let path = format!("parameters[{}]", p.name);
        if !p.min.is_finite() || !p.max.is_finite() {
            r.push(&path, "bounds must be finite");
        } else if p.min > p.max {
            r.push(&path, format!("min <= max violated ({} > {})", p.min, p.max));
        }
        if let Some(Distribution::Normal { mean, stddev }) = &p.distribution {
            if !(stddev.is_finite() && *stddev > 0.0) {
                r.push(format!("{path}.distribution"), "normal distribution needs stddev > 0");
            }
            if !mean.is_finite() {
                r.push(format!("{path}.distribution"), "normal distribution needs a finite mean");
            }
        }
        for (i, c) in p.correlations.iter().enumerate() {
            let cpath = format!("{path}.correlations[{i}]");
            match s.parameter(&c.other) {
                None => r.push(&cpath, format!("correlation references unknown parameter `{}`", c.other)),
                Some(_) if c.other == p.name => r.push(&cpath, "a parameter cannot correlate with itself"),
                Some(o) if o.dimension() != p.dimension() => r.push(
                    &cpath,
                    format!("correlated parameters differ in dimension ({} vs {})", p.dimension(), o.dimension()),
                ),
                Some(_) => {}
            }
            r.check(c.offset.is_finite(), &cpath, "offset must be finite");
        }
    }

    for (path, field, dim) in s.fields() {
        match field {
            Field::Param { param } => match s.parameter(param) {
                None => r.push(&path, format!("unbacked range field: no parameter `{param}`")),
                Some(p) => {
                    if p.dimension() != dim {
                        r.push(&path, format!("parameter `{param}` is a {} range, expected {dim}", p.dimension()));
                    } else {
                        check_field_bounds(&mut r, &path, p.min_si());
                    }
                }
            },
            Field::Fixed(q) => match q.expect(dim) {
                Ok(v) => check_field_bounds(&mut r, &path, v),
                Err(e) => r.push(&path, e.to_string()),
            },
        }
    }

    let views: Vec<_> = s
        .objects
        .iter()
        .map(|o| ObjectView {
            id: &o.id,
            kind: o.kind,
            roles: &o.roles,
            lane_index: o.lane_index,
            behavior: &o.behavior,
        })
        .collect();
    check_objects(&mut r, s.scenery.lane_count, &views);
    check_unique(&mut r, "events", s.events.iter().map(|e| e.id.as_str()));
    check_self_representations(&mut r, &s.self_representations, &views);
    check_goals(&mut r, &s.goals_values, &views);
    r
}

/// Field-specific physical bounds, checked on the lowest value a slot can
/// take.
fn check_field_bounds(r: &mut ValidationReport, path: &str, lo: f64) {
    if !lo.is_finite() {
        r.push(path, "value must be finite");
        return;
    }
    let leaf = path.rsplit('.').next().unwrap_or(path);
    match leaf {
        "duration" => r.check(lo > 0.0, path, "duration > 0"),
        "lane_width" => r.check(lo > 0.0, path, "lane_width > 0"),
        "speed" | "set_speed" => r.check(lo >= 0.0, path, "speed >= 0"),
        "trigger_time" => r.check(lo >= 0.0, path, "trigger_time >= 0"),
        _ => {}
    }
}

pub fn validate_concrete(s: &ConcreteScenario) -> ValidationReport {
    validate_concrete_with_parent(s, None)
}

/// Validates a concrete scenario; with a parent, also checks that every
/// parent parameter has exactly one fixed value.
pub fn validate_concrete_with_parent(
    s: &ConcreteScenario,
    parent: Option<&LogicalScenario>,
) -> ValidationReport {
    let mut r = ValidationReport::new();
    r.check(!s.id.trim().is_empty(), "id", "id must be non-empty");
    r.check(
        s.duration.is_finite() && s.duration > 0.0,
        "duration",
        "duration > 0",
    );

    let scene = &s.initial_scene;
    let scenery = &scene.scenery;
    r.check(scene.time == 0.0, "initial_scene.time", "the initial scene is at t = 0");
    r.check(scenery.lane_count >= 1, "scenery.lane_count", "lane_count >= 1");
    r.check(
        scenery.lane_width.is_finite() && scenery.lane_width > 0.0,
        "scenery.lane_width",
        "lane_width > 0",
    );
    r.check(scenery.curvature.is_finite(), "scenery.curvature", "value must be finite");
    r.check(
        scenery.ambient_temperature.is_finite(),
        "scenery.ambient_temperature",
        "value must be finite",
    );

    let views: Vec<_> = s
        .objects
        .iter()
        .map(|o: &MovableObject| ObjectView {
            id: &o.id,
            kind: o.kind,
            roles: &o.roles,
            lane_index: o.initial_state.lane_index,
            behavior: &o.behavior,
        })
        .collect();
    check_objects(&mut r, scenery.lane_count, &views);
    for o in &s.objects {
        let st = &o.initial_state;
        let path = format!("objects[{}]", o.id);
        r.check(st.position.is_finite(), format!("{path}.position"), "value must be finite");
        r.check(
            st.speed.is_finite() && st.speed >= 0.0,
            format!("{path}.speed"),
            "speed >= 0",
        );
        match scene.object_states.get(&o.id) {
            None => r.push(format!("initial_scene.object_states[{}]", o.id), "object has no initial state"),
            Some(state) => r.check(
                state.position == st.position && state.speed == st.speed && state.lane_index == st.lane_index,
                format!("initial_scene.object_states[{}]", o.id),
                "initial scene disagrees with the object's initial state",
            ),
        }
    }
    for id in scene.object_states.keys() {
        r.check(
            s.objects.iter().any(|o| &o.id == id),
            format!("initial_scene.object_states[{id}]"),
            format!("state for unknown object `{id}`"),
        );
    }
    check_self_representations(&mut r, &scene.self_representations, &views);
    check_goals(&mut r, &s.goals_values, &views);

    check_unique(&mut r, "events", s.events.iter().map(|e| e.id.as_str()));
    for e in &s.events {
        let path = format!("events[{}]", e.id);
        r.check(
            e.trigger_time.is_finite() && e.trigger_time >= 0.0,
            format!("{path}.trigger_time"),
            "trigger_time >= 0",
        );
        if let EventEffect::ActivateAcc { set_speed } | EventEffect::ChangeSetSpeed { set_speed } = e.effect {
            r.check(
                set_speed.is_finite() && set_speed >= 0.0,
                format!("{path}.set_speed"),
                "speed >= 0",
            );
        }
    }

    for (name, q) in &s.parameter_values {
        r.check(
            q.value.is_finite(),
            format!("parameter_values[{name}]"),
            "value must be finite",
        );
    }
    if let Some(l) = parent {
        if s.parent.as_deref() != Some(l.id.as_str()) {
            r.push("parent", format!("scenario does not declare `{}` as its parent", l.id));
        }
        for p in &l.parameters {
            match s.parameter_values.get(&p.name) {
                None => r.push(
                    format!("parameter_values[{}]", p.name),
                    format!("missing parameter value `{}`", p.name),
                ),
                Some(q) if q.dimension() != p.dimension() => r.push(
                    format!("parameter_values[{}]", p.name),
                    format!("expected a {} value", p.dimension()),
                ),
                Some(_) => {}
            }
        }
        for name in s.parameter_values.keys() {
            r.check(
                l.parameter(name).is_some(),
                format!("parameter_values[{name}]"),
                format!("value for a parameter `{name}` the parent does not declare"),
            );
        }
    }
    r
}

pub fn validate_drive(d: &RealWorldTestDrive) -> ValidationReport {
    let mut r = ValidationReport::new();
    r.check(!d.id.trim().is_empty(), "id", "id must be non-empty");
    r.check(
        !d.recorded_scenarios.is_empty(),
        "recorded_scenarios",
        "a test drive contains one or more concrete scenarios",
    );
    for c in &d.recorded_scenarios {
        r.extend_prefixed(&format!("recorded_scenarios[{}]", c.id), validate_concrete(c));
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{ParameterRange, ScenarioEvent};
    use crate::speedcontrol;
    use crate::units::Unit;

    #[test]
    fn speedcontrol_logical_is_valid() {
        let r = validate_logical(&speedcontrol::logical_scenario());
        assert!(r.is_empty(), "{r}");
    }

    #[test]
    fn inverted_range_is_one_violation() {
        let mut l = speedcontrol::logical_scenario();
        l.parameters.push(ParameterRange::new("spare", Unit::Meter, 5.0, 3.0));
        let r = validate_logical(&l);
        assert_eq!(r.len(), 1, "{r}");
        assert!(r.mentions("min <= max"));
    }

    #[test]
    fn unbacked_range_field_is_one_violation() {
        let mut l = speedcontrol::logical_scenario();
        l.scenery.lane_width = Field::param("undeclared_width");
        let r = validate_logical(&l);
        assert_eq!(r.len(), 1, "{r}");
        assert!(r.mentions("unbacked range field"));
    }

    #[test]
    fn normal_needs_positive_stddev() {
        let mut l = speedcontrol::logical_scenario();
        l.parameters[0].distribution = Some(Distribution::Normal { mean: 3.0, stddev: 0.0 });
        assert!(validate_logical(&l).mentions("stddev > 0"));
    }

    #[test]
    fn correlation_must_reference_known_parameter() {
        let mut l = speedcontrol::logical_scenario();
        l.parameters[0].correlations.push(super::super::Correlation {
            op: super::super::CorrelationOp::LessEqual,
            other: "nope".into(),
            offset: 0.0,
        });
        assert!(validate_logical(&l).mentions("unknown parameter"));
    }

    #[test]
    fn speedcontrol_concrete_is_valid() {
        let c = speedcontrol::concrete_scenario();
        let l = speedcontrol::logical_scenario();
        assert!(validate_concrete(&c).is_empty(), "{}", validate_concrete(&c));
        let r = validate_concrete_with_parent(&c, Some(&l));
        assert!(r.is_empty(), "{r}");
    }

    #[test]
    fn zero_egos_detected() {
        let mut c = speedcontrol::concrete_scenario();
        c.objects[0].kind = ObjectKind::OtherVehicle;
        c.objects[0].behavior = Behavior::ConstantSpeed;
        let r = validate_concrete(&c);
        assert!(r.mentions("exactly one ego"), "{r}");
    }

    #[test]
    fn two_egos_detected() {
        let mut c = speedcontrol::concrete_scenario();
        let mut twin = c.objects[0].clone();
        twin.id = "twin".into();
        c.objects.push(twin);
        c.initial_scene = crate::scenario::Scene::initial(
            c.initial_scene.scenery.clone(),
            &c.objects,
            c.initial_scene.self_representations.clone(),
        );
        assert!(validate_concrete(&c).mentions("exactly one ego"));
    }

    #[test]
    fn zero_duration_detected() {
        let mut c = speedcontrol::concrete_scenario();
        c.duration = 0.0;
        let r = validate_concrete(&c);
        assert_eq!(r.len(), 1);
        assert!(r.mentions("duration > 0"));
    }

    #[test]
    fn missing_parameter_value_detected_against_parent() {
        let mut c = speedcontrol::concrete_scenario();
        c.parameter_values.remove("set_speed");
        let r = validate_concrete_with_parent(&c, Some(&speedcontrol::logical_scenario()));
        assert!(r.mentions("missing parameter value `set_speed`"), "{r}");
    }

    #[test]
    fn negative_trigger_time_detected() {
        let mut c = speedcontrol::concrete_scenario();
        c.events.push(ScenarioEvent {
            id: "early".into(),
            trigger_time: -1.0,
            effect: EventEffect::DeactivateAcc,
        });
        assert!(validate_concrete(&c).mentions("trigger_time >= 0"));
    }

    #[test]
    fn self_representation_owner_must_exist() {
        let mut c = speedcontrol::concrete_scenario();
        c.initial_scene.self_representations[0].owner = "ghost".into();
        assert!(validate_concrete(&c).mentions("not an object"));
    }
}
