//! Scenes and scenarios at the functional, logical and concrete abstraction
//! levels.
//!
//! Concrete values are SI `f64`. Logical templates use [`Field`], which is
//! either a fixed unit-tagged value or a reference to a named
//! [`ParameterRange`].

mod membership;
mod validate;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::units::{serde_si, Dimension, Quantity, Unit};

pub use membership::{is_member, MembershipError};
pub use validate::{validate_concrete, validate_concrete_with_parent, validate_drive, validate_functional, validate_logical};

// ---------------------------------------------------------------------------
// Scene building blocks
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pose {
    #[serde(with = "serde_si::length")]
    pub position: f64,
    #[serde(with = "serde_si::length", default)]
    pub lateral_offset: f64,
}

/// A labeled, geo-spatially fixed prop (sign, guard rail, ...).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationaryElement {
    pub label: String,
    pub pose: Pose,
}

/// Straight or constant-curvature multi-lane road.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenery {
    pub lane_count: u32,
    #[serde(with = "serde_si::length")]
    pub lane_width: f64,
    #[serde(with = "serde_si::curvature")]
    pub curvature: f64,
    #[serde(with = "serde_si::temperature")]
    pub ambient_temperature: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub stationary_elements: Vec<StationaryElement>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObjectKind {
    EgoVehicle,
    OtherVehicle,
    Other,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObjectRole {
    Actor,
    Observer,
}

fn default_roles() -> BTreeSet<ObjectRole> {
    BTreeSet::from([ObjectRole::Actor])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccelerationSegment {
    #[serde(with = "serde_si::time")]
    pub from: f64,
    #[serde(with = "serde_si::acceleration")]
    pub acceleration: f64,
}

/// How an object moves when the engine advances the scene.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Behavior {
    /// Longitudinal motion is commanded by the test object.
    TestObject,
    ConstantSpeed,
    /// Piecewise-constant acceleration; each segment holds until the next.
    Scripted { segments: Vec<AccelerationSegment> },
}

impl Behavior {
    pub fn acceleration_at(&self, time: f64) -> f64 {
        match self {
            Behavior::TestObject | Behavior::ConstantSpeed => 0.0,
            Behavior::Scripted { segments } => segments
                .iter()
                .rev()
                .find(|s| s.from <= time)
                .map_or(0.0, |s| s.acceleration),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InitialState {
    #[serde(with = "serde_si::length")]
    pub position: f64,
    pub lane_index: u32,
    #[serde(with = "serde_si::speed")]
    pub speed: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MovableObject {
    pub id: String,
    pub kind: ObjectKind,
    #[serde(default = "default_roles")]
    pub roles: BTreeSet<ObjectRole>,
    pub initial_state: InitialState,
    pub behavior: Behavior,
}

/// What an actor or observer knows about itself: skills and named states.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelfRepresentation {
    pub owner: String,
    #[serde(default)]
    pub skills: BTreeMap<String, bool>,
    #[serde(default)]
    pub states: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum EventEffect {
    ActivateAcc {
        #[serde(with = "serde_si::speed")]
        set_speed: f64,
    },
    ChangeSetSpeed {
        #[serde(with = "serde_si::speed")]
        set_speed: f64,
    },
    DeactivateAcc,
}

impl EventEffect {
    pub fn kind(&self) -> &'static str {
        match self {
            EventEffect::ActivateAcc { .. } => "activate_acc",
            EventEffect::ChangeSetSpeed { .. } => "change_set_speed",
            EventEffect::DeactivateAcc => "deactivate_acc",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioEvent {
    pub id: String,
    #[serde(with = "serde_si::time")]
    pub trigger_time: f64,
    pub effect: EventEffect,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GoalKind {
    Goal,
    Value,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Persistence {
    Transient,
    Permanent,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GapPreference {
    Small,
    Medium,
    Large,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum GoalDescription {
    MaintainSetSpeed,
    ReachDestination { destination: String },
    DesiredGap { gap: GapPreference },
    Text { text: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GoalValue {
    pub owner: String,
    pub kind: GoalKind,
    pub persistence: Persistence,
    pub description: GoalDescription,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectState {
    #[serde(with = "serde_si::length")]
    pub position: f64,
    pub lane_index: u32,
    #[serde(with = "serde_si::speed")]
    pub speed: f64,
    #[serde(with = "serde_si::acceleration")]
    pub acceleration: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RelationKind {
    /// `subject` drives behind `object` in the same lane.
    Follows,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Relation {
    pub kind: RelationKind,
    pub subject: String,
    pub object: String,
}

/// Snapshot of the world at one point in time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scene {
    #[serde(with = "serde_si::time")]
    pub time: f64,
    pub scenery: Scenery,
    pub object_states: BTreeMap<String, ObjectState>,
    #[serde(default)]
    pub self_representations: Vec<SelfRepresentation>,
    #[serde(default)]
    pub relationships: Vec<Relation>,
}

impl Scene {
    /// The scene at `t = 0` implied by the objects' initial states.
    pub fn initial(
        scenery: Scenery,
        objects: &[MovableObject],
        self_representations: Vec<SelfRepresentation>,
    ) -> Scene {
        let object_states: BTreeMap<_, _> = objects
            .iter()
            .map(|o| {
                (
                    o.id.clone(),
                    ObjectState {
                        position: o.initial_state.position,
                        lane_index: o.initial_state.lane_index,
                        speed: o.initial_state.speed,
                        acceleration: 0.0,
                    },
                )
            })
            .collect();
        let relationships = follows_relations(&object_states);
        Scene {
            time: 0.0,
            scenery,
            object_states,
            self_representations,
            relationships,
        }
    }

    /// The object directly ahead of `id` in its lane, if any.
    pub fn leader_of(&self, id: &str) -> Option<&str> {
        self.relationships
            .iter()
            .find(|r| r.kind == RelationKind::Follows && r.subject == id)
            .map(|r| r.object.as_str())
    }
}

/// Each object follows the nearest object strictly ahead in the same lane.
pub fn follows_relations(states: &BTreeMap<String, ObjectState>) -> Vec<Relation> {
    let mut out = Vec::new();
    for (id, s) in states {
        let leader = states
            .iter()
            .filter(|(other, o)| {
                *other != id && o.lane_index == s.lane_index && o.position > s.position
            })
            .min_by(|a, b| a.1.position.total_cmp(&b.1.position));
        if let Some((leader_id, _)) = leader {
            out.push(Relation {
                kind: RelationKind::Follows,
                subject: id.clone(),
                object: leader_id.clone(),
            });
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Abstraction levels
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FunctionalScenario {
    pub id: String,
    pub narrative: String,
    #[serde(default)]
    pub vocabulary_tags: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Distribution {
    Uniform,
    /// Mean and standard deviation in the range's unit.
    Normal { mean: f64, stddev: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CorrelationOp {
    #[serde(rename = "<")]
    Less,
    #[serde(rename = "<=")]
    LessEqual,
    #[serde(rename = ">")]
    Greater,
    #[serde(rename = ">=")]
    GreaterEqual,
}

impl CorrelationOp {
    pub fn holds(self, lhs: f64, rhs: f64) -> bool {
        match self {
            CorrelationOp::Less => lhs < rhs,
            CorrelationOp::LessEqual => lhs <= rhs,
            CorrelationOp::Greater => lhs > rhs,
            CorrelationOp::GreaterEqual => lhs >= rhs,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            CorrelationOp::Less => "<",
            CorrelationOp::LessEqual => "<=",
            CorrelationOp::Greater => ">",
            CorrelationOp::GreaterEqual => ">=",
        }
    }
}

/// `this <op> other + offset`, offset in the owning range's unit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Correlation {
    pub op: CorrelationOp,
    pub other: String,
    #[serde(default)]
    pub offset: f64,
}

/// A named parameter with inclusive bounds. `min`, `max`, the distribution
/// parameters and correlation offsets are written in `unit`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterRange {
    pub name: String,
    pub unit: Unit,
    pub min: f64,
    pub max: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distribution: Option<Distribution>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub correlations: Vec<Correlation>,
}

impl ParameterRange {
    pub fn new(name: &str, unit: Unit, min: f64, max: f64) -> Self {
        ParameterRange {
            name: name.to_owned(),
            unit,
            min,
            max,
            distribution: None,
            correlations: Vec::new(),
        }
    }

    pub fn min_si(&self) -> f64 {
        self.unit.to_si(self.min)
    }

    pub fn max_si(&self) -> f64 {
        self.unit.to_si(self.max)
    }

    pub fn dimension(&self) -> Dimension {
        self.unit.dimension()
    }

    /// Inclusive containment of an SI value.
    pub fn contains_si(&self, value: f64) -> bool {
        value >= self.min_si() && value <= self.max_si()
    }

    pub fn is_point(&self) -> bool {
        self.min_si() == self.max_si()
    }
}

/// A template slot: fixed value or reference to a parameter range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Field {
    Param { param: String },
    Fixed(Quantity),
}

impl Field {
    pub fn param(name: &str) -> Field {
        Field::Param {
            param: name.to_owned(),
        }
    }

    pub fn fixed(value: f64, dimension: Dimension) -> Field {
        Field::Fixed(Quantity::si(value, dimension))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneryTemplate {
    pub lane_count: u32,
    pub lane_width: Field,
    pub curvature: Field,
    pub ambient_temperature: Field,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub stationary_elements: Vec<StationaryElement>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectTemplate {
    pub id: String,
    pub kind: ObjectKind,
    #[serde(default = "default_roles")]
    pub roles: BTreeSet<ObjectRole>,
    pub position: Field,
    pub lane_index: u32,
    pub speed: Field,
    pub behavior: Behavior,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum EffectTemplate {
    ActivateAcc { set_speed: Field },
    ChangeSetSpeed { set_speed: Field },
    DeactivateAcc,
}

impl EffectTemplate {
    pub fn kind(&self) -> &'static str {
        match self {
            EffectTemplate::ActivateAcc { .. } => "activate_acc",
            EffectTemplate::ChangeSetSpeed { .. } => "change_set_speed",
            EffectTemplate::DeactivateAcc => "deactivate_acc",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventTemplate {
    pub id: String,
    pub trigger_time: Field,
    pub effect: EffectTemplate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogicalScenario {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parent: Option<String>,
    pub duration: Field,
    pub scenery: SceneryTemplate,
    pub objects: Vec<ObjectTemplate>,
    #[serde(default)]
    pub self_representations: Vec<SelfRepresentation>,
    #[serde(default)]
    pub events: Vec<EventTemplate>,
    #[serde(default)]
    pub goals_values: Vec<GoalValue>,
    pub parameters: Vec<ParameterRange>,
}

impl LogicalScenario {
    pub fn parameter(&self, name: &str) -> Option<&ParameterRange> {
        self.parameters.iter().find(|p| p.name == name)
    }

    /// Every template slot with its path and expected dimension, in a fixed
    /// order shared with [`ConcreteScenario::field_values`].
    pub fn fields(&self) -> Vec<(String, &Field, Dimension)> {
        let mut out = vec![
            ("duration".to_owned(), &self.duration, Dimension::Time),
            ("scenery.lane_width".to_owned(), &self.scenery.lane_width, Dimension::Length),
            ("scenery.curvature".to_owned(), &self.scenery.curvature, Dimension::Curvature),
            (
                "scenery.ambient_temperature".to_owned(),
                &self.scenery.ambient_temperature,
                Dimension::Temperature,
            ),
        ];
        for o in &self.objects {
            out.push((format!("objects[{}].position", o.id), &o.position, Dimension::Length));
            out.push((format!("objects[{}].speed", o.id), &o.speed, Dimension::Speed));
        }
        for e in &self.events {
            out.push((format!("events[{}].trigger_time", e.id), &e.trigger_time, Dimension::Time));
            match &e.effect {
                EffectTemplate::ActivateAcc { set_speed } | EffectTemplate::ChangeSetSpeed { set_speed } => {
                    out.push((format!("events[{}].set_speed", e.id), set_speed, Dimension::Speed));
                }
                EffectTemplate::DeactivateAcc => {}
            }
        }
        out
    }

    /// Number of parameters whose range is not a single point.
    pub fn ranged_parameter_count(&self) -> usize {
        self.parameters.iter().filter(|p| !p.is_point()).count()
    }
}

/// Serialized shape of a concrete scenario; the initial scene is derived
/// from scenery, objects and self-representations on load.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct ConcreteScenarioDoc {
    id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    parent: Option<String>,
    #[serde(with = "serde_si::time")]
    duration: f64,
    scenery: Scenery,
    objects: Vec<MovableObject>,
    #[serde(default)]
    self_representations: Vec<SelfRepresentation>,
    #[serde(default)]
    events: Vec<ScenarioEvent>,
    #[serde(default)]
    goals_values: Vec<GoalValue>,
    #[serde(default)]
    parameter_values: BTreeMap<String, Quantity>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    flags: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "ConcreteScenarioDoc", into = "ConcreteScenarioDoc")]
pub struct ConcreteScenario {
    pub id: String,
    pub parent: Option<String>,
    pub initial_scene: Scene,
    pub objects: Vec<MovableObject>,
    pub events: Vec<ScenarioEvent>,
    pub goals_values: Vec<GoalValue>,
    pub duration: f64,
    /// Parameter name to fixed value, stored in SI.
    pub parameter_values: BTreeMap<String, Quantity>,
    /// Notes attached during concretization (e.g. unchecked correlations).
    pub flags: Vec<String>,
}

impl From<ConcreteScenarioDoc> for ConcreteScenario {
    fn from(d: ConcreteScenarioDoc) -> Self {
        let initial_scene = Scene::initial(d.scenery, &d.objects, d.self_representations);
        ConcreteScenario {
            id: d.id,
            parent: d.parent,
            initial_scene,
            objects: d.objects,
            events: d.events,
            goals_values: d.goals_values,
            duration: d.duration,
            parameter_values: d.parameter_values.into_iter().map(|(k, q)| (k, q.to_si())).collect(),
            flags: d.flags,
        }
    }
}

impl From<ConcreteScenario> for ConcreteScenarioDoc {
    fn from(c: ConcreteScenario) -> Self {
        ConcreteScenarioDoc {
            id: c.id,
            parent: c.parent,
            duration: c.duration,
            scenery: c.initial_scene.scenery,
            objects: c.objects,
            self_representations: c.initial_scene.self_representations,
            events: c.events,
            goals_values: c.goals_values,
            parameter_values: c.parameter_values,
            flags: c.flags,
        }
    }
}

impl ConcreteScenario {
    pub fn ego(&self) -> Option<&MovableObject> {
        self.objects.iter().find(|o| o.kind == ObjectKind::EgoVehicle)
    }

    pub fn scenery(&self) -> &Scenery {
        &self.initial_scene.scenery
    }

    /// Concrete counterparts of [`LogicalScenario::fields`], keyed by path.
    pub fn field_values(&self) -> BTreeMap<String, f64> {
        let s = self.scenery();
        let mut out = BTreeMap::from([
            ("duration".to_owned(), self.duration),
            ("scenery.lane_width".to_owned(), s.lane_width),
            ("scenery.curvature".to_owned(), s.curvature),
            ("scenery.ambient_temperature".to_owned(), s.ambient_temperature),
        ]);
        for o in &self.objects {
            out.insert(format!("objects[{}].position", o.id), o.initial_state.position);
            out.insert(format!("objects[{}].speed", o.id), o.initial_state.speed);
        }
        for e in &self.events {
            out.insert(format!("events[{}].trigger_time", e.id), e.trigger_time);
            match e.effect {
                EventEffect::ActivateAcc { set_speed } | EventEffect::ChangeSetSpeed { set_speed } => {
                    out.insert(format!("events[{}].set_speed", e.id), set_speed);
                }
                EventEffect::DeactivateAcc => {}
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriveMetadata {
    pub date: String,
    pub route: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RealWorldTestDrive {
    pub id: String,
    pub recorded_scenarios: Vec<ConcreteScenario>,
    pub metadata: DriveMetadata,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::speedcontrol;

    #[test]
    fn scripted_behavior_holds_segments() {
        let b = Behavior::Scripted {
            segments: vec![
                AccelerationSegment { from: 1.0, acceleration: -2.0 },
                AccelerationSegment { from: 3.0, acceleration: 0.5 },
            ],
        };
        assert_eq!(b.acceleration_at(0.5), 0.0);
        assert_eq!(b.acceleration_at(1.0), -2.0);
        assert_eq!(b.acceleration_at(2.9), -2.0);
        assert_eq!(b.acceleration_at(10.0), 0.5);
    }

    #[test]
    fn follows_picks_nearest_leader_in_lane() {
        let st = |p: f64, lane: u32| ObjectState {
            position: p,
            lane_index: lane,
            speed: 10.0,
            acceleration: 0.0,
        };
        let states = BTreeMap::from([
            ("ego".to_owned(), st(0.0, 0)),
            ("far".to_owned(), st(80.0, 0)),
            ("near".to_owned(), st(30.0, 0)),
            ("beside".to_owned(), st(10.0, 1)),
        ]);
        let rel = follows_relations(&states);
        let leader = |id: &str| {
            rel.iter()
                .find(|r| r.subject == id)
                .map(|r| r.object.clone())
        };
        assert_eq!(leader("ego").as_deref(), Some("near"));
        assert_eq!(leader("near").as_deref(), Some("far"));
        assert_eq!(leader("far"), None);
        assert_eq!(leader("beside"), None);
    }

    #[test]
    fn concrete_scenario_toml_round_trip() {
        let c = speedcontrol::concrete_scenario();
        let text = toml::to_string(&c).unwrap();
        let back: ConcreteScenario = toml::from_str(&text).unwrap();
        assert_eq!(back, c);
        assert!(text.contains("lane_width = \"3.75 m\""));
    }

    #[test]
    fn logical_fields_and_concrete_values_share_paths() {
        let l = speedcontrol::logical_scenario();
        let c = speedcontrol::concrete_scenario();
        let values = c.field_values();
        for (path, _, _) in l.fields() {
            assert!(values.contains_key(&path), "missing {path}");
        }
    }
}
