use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::units::Unit;
use crate::validation::ValidationReport;

pub type Signals = BTreeMap<String, f64>;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PortSignal {
    pub name: String,
    pub unit: Unit,
    /// Optional inputs are left out when the scene cannot provide them.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub optional: bool,
}

impl PortSignal {
    pub fn new(name: &str, unit: Unit) -> Self {
        PortSignal {
            name: name.to_owned(),
            unit,
            optional: false,
        }
    }

    pub fn optional(name: &str, unit: Unit) -> Self {
        PortSignal {
            optional: true,
            ..PortSignal::new(name, unit)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TestObjectPort {
    pub inputs: Vec<PortSignal>,
    pub outputs: Vec<PortSignal>,
}

impl TestObjectPort {
    pub fn validate(&self) -> ValidationReport {
        let mut r = ValidationReport::new();
        for (side, list) in [("inputs", &self.inputs), ("outputs", &self.outputs)] {
            let mut seen = BTreeSet::new();
            for s in list {
                if !seen.insert(s.name.as_str()) {
                    r.push(side, format!("duplicate signal `{}`", s.name));
                }
            }
        }
        r
    }

    /// Same signals regardless of declaration order.
    pub fn same_schema(&self, other: &TestObjectPort) -> bool {
        let norm = |v: &[PortSignal]| -> BTreeSet<PortSignal> { v.iter().cloned().collect() };
        norm(&self.inputs) == norm(&other.inputs) && norm(&self.outputs) == norm(&other.outputs)
    }

    pub fn has_output(&self, name: &str) -> bool {
        self.outputs.iter().any(|s| s.name == name)
    }
}

/// Inputs `v_ego`, `v_set`, `acc_command` and optional `gap`, `v_lead`;
/// outputs `a_target` and `acc_active`.
pub fn builtin_acc_port() -> TestObjectPort {
    TestObjectPort {
        inputs: vec![
            PortSignal::new("v_ego", Unit::MeterPerSecond),
            PortSignal::new("v_set", Unit::MeterPerSecond),
            PortSignal::new("acc_command", Unit::Flag),
            PortSignal::optional("gap", Unit::Meter),
            PortSignal::optional("v_lead", Unit::MeterPerSecond),
        ],
        outputs: vec![
            PortSignal::new("a_target", Unit::MeterPerSecondSquared),
            PortSignal::new("acc_active", Unit::Flag),
        ],
    }
}

/// The system under test as seen by the engine. Flags travel as 0/1.
pub trait TestObject {
    fn port(&self) -> TestObjectPort;

    /// Called once before a run.
    fn reset(&mut self) {}

    /// Consumes the inputs at `time`; the outputs become effective at the
    /// next step.
    fn step(&mut self, time: f64, inputs: &Signals) -> Signals;
}

/// Parameters of the built-in ACC controller, SI.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AccParams {
    /// Speed-error gain, 1/s.
    pub k_p: f64,
    pub a_min: f64,
    pub a_max: f64,
    pub time_gap: f64,
    /// Smallest deceleration commanded while above the set speed.
    pub settle_decel: f64,
    pub standstill_gap: f64,
    /// Gap-error gain, 1/s².
    pub k_gap: f64,
    /// Relative-speed gain, 1/s.
    pub k_rel: f64,
}

impl Default for AccParams {
    fn default() -> Self {
        AccParams {
            k_p: 2.0,
            a_min: -3.0,
            a_max: 2.0,
            time_gap: 1.8,
            settle_decel: 0.05,
            standstill_gap: 5.0,
            k_gap: 0.25,
            k_rel: 0.75,
        }
    }
}

impl AccParams {
    pub fn validate(&self) -> ValidationReport {
        let mut r = ValidationReport::new();
        let all = [
            self.k_p,
            self.a_min,
            self.a_max,
            self.time_gap,
            self.settle_decel,
            self.standstill_gap,
            self.k_gap,
            self.k_rel,
        ];
        r.check(all.iter().all(|v| v.is_finite()), "", "ACC parameters must be finite");
        r.check(self.a_min < 0.0 && 0.0 < self.a_max, "a_min", "ACC requires a_min < 0 < a_max");
        r.check(self.k_p > 0.0, "k_p", "k_p > 0");
        r.check(self.time_gap >= 0.0, "time_gap", "time_gap >= 0");
        r.check(
            self.settle_decel >= 0.0 && self.settle_decel <= -self.a_min,
            "settle_decel",
            "settle_decel must lie in [0, |a_min|]",
        );
        r.check(self.standstill_gap >= 0.0, "standstill_gap", "standstill_gap >= 0");
        r.check(self.k_gap >= 0.0 && self.k_rel >= 0.0, "k_gap", "following gains must be >= 0");
        r
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct AccState {
    pub active: bool,
    /// Whether the last step was governed by the following law.
    pub following: bool,
}

/// One step of the built-in controller.
///
/// Inactive: `a_target = 0`. Active: proportional speed control clamped to
/// `[a_min, a_max]`; while faster than the set speed at least
/// `settle_decel` is commanded so the set speed is actually reached. With a
/// lead vehicle the constant-time-gap law can only lower the command.
pub fn builtin_acc_step(inputs: &Signals, state: &mut AccState, p: &AccParams) -> Signals {
    let get = |n: &str| inputs.get(n).copied();
    let active = get("acc_command").is_some_and(|v| v != 0.0);
    state.active = active;
    state.following = false;
    let mut a_target = 0.0;
    if active {
        let v_ego = get("v_ego").unwrap_or(0.0);
        let v_set = get("v_set").unwrap_or(v_ego);
        let mut a = (p.k_p * (v_set - v_ego)).clamp(p.a_min, p.a_max);
        if v_ego > v_set {
            a = a.min(-p.settle_decel);
        }
        if let (Some(gap), Some(v_lead)) = (get("gap"), get("v_lead")) {
            let desired = p.standstill_gap + p.time_gap * v_ego;
            let a_follow = p.k_gap * (gap - desired) + p.k_rel * (v_lead - v_ego);
            if a_follow < a {
                a = a_follow;
                state.following = true;
            }
        }
        a_target = a.clamp(p.a_min, p.a_max);
    }
    Signals::from([
        ("a_target".to_owned(), a_target),
        ("acc_active".to_owned(), if active { 1.0 } else { 0.0 }),
    ])
}

/// The built-in ACC as a test object.
#[derive(Debug, Clone, Default)]
pub struct AccController {
    pub params: AccParams,
    pub state: AccState,
}

impl AccController {
    pub fn new(params: AccParams) -> Self {
        AccController {
            params,
            state: AccState::default(),
        }
    }
}

impl TestObject for AccController {
    fn port(&self) -> TestObjectPort {
        builtin_acc_port()
    }

    fn reset(&mut self) {
        self.state = AccState::default();
    }

    fn step(&mut self, _time: f64, inputs: &Signals) -> Signals {
        builtin_acc_step(inputs, &mut self.state, &self.params)
    }
}

/// Emits the same outputs at every step, on the built-in port.
#[derive(Debug, Clone)]
pub struct ConstantOutput {
    pub outputs: Signals,
}

impl ConstantOutput {
    /// `a_target = 0`, `acc_active = 0`.
    pub fn zero() -> Self {
        ConstantOutput {
            outputs: Signals::from([("a_target".to_owned(), 0.0), ("acc_active".to_owned(), 0.0)]),
        }
    }
}

impl TestObject for ConstantOutput {
    fn port(&self) -> TestObjectPort {
        builtin_acc_port()
    }

    fn step(&mut self, _time: f64, _inputs: &Signals) -> Signals {
        self.outputs.clone()
    }
}
