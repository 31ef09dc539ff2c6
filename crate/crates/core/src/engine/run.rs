use std::collections::BTreeMap;

use thiserror::Error;

use super::bench::{validate_configuration_for, ElementRole, LoopMode, TestBenchConfiguration, VehicleLimits};
use super::object::{builtin_acc_port, Signals, TestObject, TestObjectPort};
use super::trace::{EvaluationData, ExecutionTrace, Sample, TraceHeader, EVENT_COLUMN_PREFIX};
use crate::scenario::{follows_relations, Behavior, ConcreteScenario, EventEffect, Scene};
use crate::spec::TestCase;
use crate::validation::ValidationReport;

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("invalid configuration:\n{0}")]
    InvalidConfiguration(ValidationReport),
    #[error("test object port does not match the adapter schema of `{adapter}`")]
    PortMismatch {
        adapter: String,
        expected: TestObjectPort,
        found: TestObjectPort,
    },
    #[error("the engine cannot derive signal `{0}`")]
    UnknownSignal(String),
    #[error("required input `{0}` has no value in this scene")]
    UnavailableSignal(String),
    #[error("test object did not produce output `{0}`")]
    MissingOutput(String),
    #[error("non-finite value in `{signal}` at step {step}")]
    NumericalFault {
        step: usize,
        signal: String,
        /// Samples before the fault; flagged invalid.
        trace: Box<ExecutionTrace>,
    },
}

/// Number of steps after the initial one: `floor(duration / dt)`.
pub fn step_count(duration: f64, dt: f64) -> usize {
    (duration / dt + 1e-9).floor() as usize
}

/// First step index whose time is not before `t`.
pub fn first_index_at_or_after(t: f64, dt: f64) -> usize {
    (t / dt - 1e-9).ceil().max(0.0) as usize
}

/// Event-scheduler state: what the driver has commanded so far.
#[derive(Debug, Clone, PartialEq)]
pub struct ScheduleState {
    pub acc_command: bool,
    pub v_set: f64,
    /// `(step index, event index)` in firing order.
    pending: Vec<(usize, usize)>,
    effects: Vec<(String, EventEffect)>,
}

impl ScheduleState {
    /// The set speed starts at the ego self-representation's `v_set` state,
    /// else at the first commanded set speed, else 0.
    pub fn new(scenario: &ConcreteScenario, dt: f64) -> Self {
        let ego = scenario.ego().map(|o| o.id.as_str());
        let from_self = scenario
            .initial_scene
            .self_representations
            .iter()
            .find(|r| Some(r.owner.as_str()) == ego)
            .and_then(|r| r.states.get("v_set").copied());
        let mut pending: Vec<(usize, usize)> = scenario
            .events
            .iter()
            .enumerate()
            .map(|(i, e)| (first_index_at_or_after(e.trigger_time, dt), i))
            .collect();
        pending.sort();
        let first_set_speed = pending.iter().find_map(|&(_, i)| match scenario.events[i].effect {
            EventEffect::ActivateAcc { set_speed } | EventEffect::ChangeSetSpeed { set_speed } => Some(set_speed),
            EventEffect::DeactivateAcc => None,
        });
        ScheduleState {
            acc_command: false,
            v_set: from_self.or(first_set_speed).unwrap_or(0.0),
            pending,
            effects: scenario.events.iter().map(|e| (e.id.clone(), e.effect.clone())).collect(),
        }
    }

    /// Applies the events due at `step`; returns their ids.
    pub fn advance(&mut self, step: usize) -> Vec<String> {
        let mut fired = Vec::new();
        for &(at, i) in &self.pending {
            if at != step {
                continue;
            }
            let (id, effect) = &self.effects[i];
            match *effect {
                EventEffect::ActivateAcc { set_speed } => {
                    self.acc_command = true;
                    self.v_set = set_speed;
                }
                EventEffect::ChangeSetSpeed { set_speed } => self.v_set = set_speed,
                EventEffect::DeactivateAcc => self.acc_command = false,
            }
            fired.push(id.clone());
        }
        fired
    }
}

/// Stimuli for the test object, projected from the scene and the schedule.
pub fn derive_inputs(
    scene: &Scene,
    ego_id: &str,
    schedule: &ScheduleState,
    port: &TestObjectPort,
) -> Result<Signals, EngineError> {
    let ego = scene.object_states.get(ego_id);
    let lead = scene
        .leader_of(ego_id)
        .and_then(|id| scene.object_states.get(id));
    let mut out = Signals::new();
    for s in &port.inputs {
        let value = match s.name.as_str() {
            "time" => Some(scene.time),
            "v_ego" => ego.map(|e| e.speed),
            "a_ego" => ego.map(|e| e.acceleration),
            "x_ego" => ego.map(|e| e.position),
            "v_set" => Some(schedule.v_set),
            "acc_command" => Some(if schedule.acc_command { 1.0 } else { 0.0 }),
            "gap" => lead.zip(ego).map(|(l, e)| l.position - e.position),
            "v_lead" => lead.map(|l| l.speed),
            other => return Err(EngineError::UnknownSignal(other.to_owned())),
        };
        match value {
            Some(v) => {
                out.insert(s.name.clone(), v);
            }
            None if s.optional => {}
            None => return Err(EngineError::UnavailableSignal(s.name.clone())),
        }
    }
    Ok(out)
}

fn flag(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

/// Runs one test case; see [`run_test_case_observed`].
pub fn run_test_case(
    cfg: &TestBenchConfiguration,
    tc: &TestCase,
    object: &mut dyn TestObject,
) -> Result<ExecutionTrace, EngineError> {
    run_test_case_observed(cfg, tc, object, &mut |_, _| {})
}

/// Steps the scenario from its initial scene.
///
/// At step `s` (time `s·dt`): due events fire, inputs are derived from the
/// scene, the object computes outputs that take effect at `s + 1`, the
/// sample is recorded with the outputs available now, and the scene is
/// advanced by forward Euler using the acceleration applied during
/// `[t_s, t_{s+1})`. In open loop the ego never accelerates.
///
/// `observer` sees the evaluation data after each recorded row.
pub fn run_test_case_observed(
    cfg: &TestBenchConfiguration,
    tc: &TestCase,
    object: &mut dyn TestObject,
    observer: &mut dyn FnMut(&EvaluationData, usize),
) -> Result<ExecutionTrace, EngineError> {
    let scenario = &tc.scenario;
    let report = validate_configuration_for(cfg, scenario);
    if !report.is_empty() {
        return Err(EngineError::InvalidConfiguration(report));
    }
    let adapter = cfg
        .element(ElementRole::TestObjectAdapter)
        .expect("validated: one adapter");
    let port = adapter.port.clone().unwrap_or_else(builtin_acc_port);
    let found = object.port();
    if !found.same_schema(&port) {
        return Err(EngineError::PortMismatch {
            adapter: adapter.id.clone(),
            expected: port,
            found,
        });
    }
    let limits = cfg
        .element(ElementRole::VehicleDynamics)
        .map(VehicleLimits::from_element)
        .unwrap_or_default();
    let ego = scenario.ego().map(|o| o.id.clone()).unwrap_or_default();
    let behaviors: BTreeMap<&str, &Behavior> = scenario
        .objects
        .iter()
        .map(|o| (o.id.as_str(), &o.behavior))
        .collect();

    let dt = cfg.time_step;
    let n = step_count(scenario.duration, dt);
    let event_ids: Vec<String> = scenario.events.iter().map(|e| e.id.clone()).collect();
    let header = TraceHeader {
        scenario_id: scenario.id.clone(),
        case_id: tc.id.clone(),
        config_id: cfg.id.clone(),
        time_step: dt,
        valid: true,
        fault: None,
    };
    let mut data = EvaluationData::new(header, &event_ids);
    let mut samples = Vec::with_capacity(n + 1);
    let mut scene = scenario.initial_scene.clone();
    let mut schedule = ScheduleState::new(scenario, dt);
    let mut available: Signals = port.outputs.iter().map(|s| (s.name.clone(), 0.0)).collect();

    object.reset();
    for s in 0..=n {
        let t = s as f64 * dt;
        scene.time = t;
        let fired = schedule.advance(s);
        let inputs = derive_inputs(&scene, &ego, &schedule, &port)?;
        let outputs = object.step(t, &inputs);
        for sig in &port.outputs {
            match outputs.get(&sig.name) {
                None => return Err(EngineError::MissingOutput(sig.name.clone())),
                Some(v) if !v.is_finite() => {
                    data.header.valid = false;
                    data.header.fault = Some(format!("non-finite `{}` at step {s}", sig.name));
                    return Err(EngineError::NumericalFault {
                        step: s,
                        signal: sig.name.clone(),
                        trace: Box::new(ExecutionTrace { samples, data }),
                    });
                }
                Some(_) => {}
            }
        }

        for (id, state) in scene.object_states.iter_mut() {
            let wanted = if *id == ego {
                match cfg.loop_mode {
                    LoopMode::Closed => available
                        .get("a_target")
                        .copied()
                        .unwrap_or(0.0)
                        .clamp(limits.a_min, limits.a_max),
                    LoopMode::Open => 0.0,
                }
            } else {
                behaviors.get(id.as_str()).map_or(0.0, |b| b.acceleration_at(t))
            };
            // never drive backwards
            state.acceleration = wanted.max(-state.speed / dt);
        }

        let ego_state = &scene.object_states[&ego];
        let lead = scene
            .leader_of(&ego)
            .and_then(|id| scene.object_states.get(id));
        let mut row: BTreeMap<&str, f64> = BTreeMap::from([
            ("time", t),
            ("v_ego", ego_state.speed),
            ("a_ego", (-ego_state.acceleration).max(0.0)),
            ("v_set", schedule.v_set),
        ]);
        if let Some(a) = available.get("acc_active") {
            row.insert("acc_active", *a);
        }
        if let Some(a) = available.get("a_target") {
            row.insert("a_target", *a);
        }
        if let Some(l) = lead {
            row.insert("gap", l.position - ego_state.position);
            row.insert("v_lead", l.speed);
        }
        let event_cols: Vec<(String, f64)> = event_ids
            .iter()
            .map(|id| (format!("{EVENT_COLUMN_PREFIX}{id}"), flag(fired.contains(id))))
            .collect();
        for (c, v) in &event_cols {
            row.insert(c.as_str(), *v);
        }
        data.push_row(&row);
        let mut flags = BTreeMap::from([("acc_command".to_owned(), schedule.acc_command)]);
        for id in &fired {
            flags.insert(format!("{EVENT_COLUMN_PREFIX}{id}"), true);
        }
        samples.push(Sample {
            index: s,
            time: t,
            scene: scene.clone(),
            inputs,
            outputs: available.clone(),
            flags,
        });
        observer(&data, s);

        available = outputs;
        if s < n {
            for state in scene.object_states.values_mut() {
                state.position += state.speed * dt;
                state.speed = (state.speed + state.acceleration * dt).max(0.0);
            }
            scene.relationships = follows_relations(&scene.object_states);
        }
    }
    Ok(ExecutionTrace { samples, data })
}
