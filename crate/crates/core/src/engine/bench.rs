use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::object::TestObjectPort;
use crate::scenario::{ConcreteScenario, ObjectKind};
use crate::units::{serde_si, Dimension, Quantity};
use crate::validation::ValidationReport;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BenchKind {
    SoftwareInTheLoop,
    HardwareInTheLoopSimulated,
    VehicleInTheLoopSimulated,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Capability {
    RunsSimulationModels,
    RecordsSignals,
    ConnectsEcu,
    ConnectsDevelopmentUnit,
}

impl Capability {
    pub fn tag(self) -> &'static str {
        match self {
            Capability::RunsSimulationModels => "runs_simulation_models",
            Capability::RecordsSignals => "records_signals",
            Capability::ConnectsEcu => "connects_ecu",
            Capability::ConnectsDevelopmentUnit => "connects_development_unit",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestBench {
    pub id: String,
    pub kind: BenchKind,
    pub capabilities: BTreeSet<Capability>,
}

pub fn validate_bench(b: &TestBench) -> ValidationReport {
    let mut r = ValidationReport::new();
    r.check(!b.id.trim().is_empty(), "id", "id must be non-empty");
    r.check(!b.capabilities.is_empty(), "capabilities", "a test bench has one or more capabilities");
    r
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ElementRole {
    VehicleDynamics,
    LeadVehicleModel,
    EventScheduler,
    SignalRecorder,
    TestObjectAdapter,
}

/// Where an adapter routes the test object's signals. All targets are
/// served in-process; the target only decides what the bench must offer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AdapterTarget {
    InProcess,
    Ecu,
    DevelopmentUnit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Element {
    pub id: String,
    pub role: ElementRole,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<AdapterTarget>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub parameters: BTreeMap<String, Quantity>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub sub_elements: Vec<Element>,
    /// Adapter signal schema; the built-in ACC port when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub port: Option<TestObjectPort>,
}

impl Element {
    pub fn new(id: &str, role: ElementRole) -> Self {
        Element {
            id: id.to_owned(),
            role,
            target: None,
            parameters: BTreeMap::new(),
            sub_elements: Vec::new(),
            port: None,
        }
    }

    pub fn with_parameter(mut self, name: &str, value: Quantity) -> Self {
        self.parameters.insert(name.to_owned(), value);
        self
    }

    /// This element and all nested elements, depth first.
    pub fn walk(&self) -> Vec<&Element> {
        let mut out = vec![self];
        for e in &self.sub_elements {
            out.extend(e.walk());
        }
        out
    }

    pub fn required_capability(&self) -> Capability {
        match (self.role, self.target) {
            (ElementRole::SignalRecorder, _) => Capability::RecordsSignals,
            (ElementRole::TestObjectAdapter, Some(AdapterTarget::Ecu)) => Capability::ConnectsEcu,
            (ElementRole::TestObjectAdapter, Some(AdapterTarget::DevelopmentUnit)) => {
                Capability::ConnectsDevelopmentUnit
            }
            _ => Capability::RunsSimulationModels,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LoopMode {
    Closed,
    Open,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestBenchConfiguration {
    pub id: String,
    pub bench: String,
    pub elements: Vec<Element>,
    pub loop_mode: LoopMode,
    #[serde(with = "serde_si::time")]
    pub time_step: f64,
}

impl TestBenchConfiguration {
    pub fn all_elements(&self) -> Vec<&Element> {
        self.elements.iter().flat_map(|e| e.walk()).collect()
    }

    pub fn element(&self, role: ElementRole) -> Option<&Element> {
        self.all_elements().into_iter().find(|e| e.role == role)
    }

    pub fn required_capabilities(&self) -> BTreeSet<Capability> {
        self.all_elements()
            .into_iter()
            .map(Element::required_capability)
            .collect()
    }
}

/// Longitudinal limits of the ego point mass.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VehicleLimits {
    pub a_min: f64,
    pub a_max: f64,
}

impl Default for VehicleLimits {
    fn default() -> Self {
        VehicleLimits {
            a_min: -10.0,
            a_max: 5.0,
        }
    }
}

impl VehicleLimits {
    pub fn from_element(e: &Element) -> Self {
        let d = VehicleLimits::default();
        let get = |name: &str, default: f64| {
            e.parameters
                .get(name)
                .and_then(|q| q.expect(Dimension::Acceleration).ok())
                .unwrap_or(default)
        };
        VehicleLimits {
            a_min: get("a_min", d.a_min),
            a_max: get("a_max", d.a_max),
        }
    }
}

fn check_element(r: &mut ValidationReport, path: &str, e: &Element) {
    r.check(!e.id.trim().is_empty(), path, "element id must be non-empty");
    let accel = |name: &str| e.parameters.get(name).map(|q| q.expect(Dimension::Acceleration));
    match e.role {
        ElementRole::VehicleDynamics => {
            for name in ["a_min", "a_max"] {
                if let Some(Err(_)) = accel(name) {
                    r.push(format!("{path}.parameters.{name}"), "must be an acceleration");
                }
            }
            let l = VehicleLimits::from_element(e);
            r.check(
                l.a_min < 0.0 && 0.0 < l.a_max,
                format!("{path}.parameters"),
                "vehicle dynamics requires a_min < 0 < a_max",
            );
        }
        ElementRole::TestObjectAdapter => {
            if let Some(port) = &e.port {
                r.extend_prefixed(&format!("{path}.port"), port.validate());
            }
        }
        _ => {}
    }
    if e.target.is_some() && e.role != ElementRole::TestObjectAdapter {
        r.push(format!("{path}.target"), "only a test object adapter has a target");
    }
    for s in &e.sub_elements {
        check_element(r, &format!("{path}.sub_elements[{}]", s.id), s);
    }
}

/// Structure and role schemas of a configuration on its own.
pub fn validate_configuration(cfg: &TestBenchConfiguration) -> ValidationReport {
    let mut r = ValidationReport::new();
    r.check(!cfg.id.trim().is_empty(), "id", "id must be non-empty");
    r.check(!cfg.elements.is_empty(), "elements", "a configuration has one or more elements");
    r.check(
        cfg.time_step.is_finite() && cfg.time_step > 0.0,
        "time_step",
        "time_step > 0",
    );
    let mut ids = BTreeSet::new();
    for e in cfg.all_elements() {
        if !ids.insert(e.id.as_str()) {
            r.push(format!("elements[{}]", e.id), format!("duplicate element id `{}`", e.id));
        }
    }
    for e in &cfg.elements {
        check_element(&mut r, &format!("elements[{}]", e.id), e);
    }
    let count = |role| cfg.all_elements().into_iter().filter(|e| e.role == role).count();
    for role in [ElementRole::VehicleDynamics, ElementRole::EventScheduler] {
        r.check(
            count(role) >= 1,
            "elements",
            format!("required element role `{}` missing", role_tag(role)),
        );
    }
    r.check(
        count(ElementRole::TestObjectAdapter) == 1,
        "elements",
        "exactly one test object adapter required",
    );
    r
}

/// Additional requirements a scenario places on a configuration.
pub fn validate_configuration_for(cfg: &TestBenchConfiguration, scenario: &ConcreteScenario) -> ValidationReport {
    let mut r = validate_configuration(cfg);
    let has_others = scenario.objects.iter().any(|o| o.kind != ObjectKind::EgoVehicle);
    if has_others {
        r.check(
            cfg.element(ElementRole::LeadVehicleModel).is_some(),
            "elements",
            "required element role `lead_vehicle_model` missing: scenario has other objects",
        );
    }
    r.check(
        cfg.time_step <= scenario.duration,
        "time_step",
        "time_step exceeds the scenario duration",
    );
    r
}

pub(crate) fn role_tag(role: ElementRole) -> &'static str {
    match role {
        ElementRole::VehicleDynamics => "vehicle_dynamics",
        ElementRole::LeadVehicleModel => "lead_vehicle_model",
        ElementRole::EventScheduler => "event_scheduler",
        ElementRole::SignalRecorder => "signal_recorder",
        ElementRole::TestObjectAdapter => "test_object_adapter",
    }
}

/// Capabilities the configuration needs but the bench lacks.
pub fn missing_capabilities(cfg: &TestBenchConfiguration, bench: &TestBench) -> BTreeSet<Capability> {
    cfg.required_capabilities()
        .difference(&bench.capabilities)
        .copied()
        .collect()
}

/// Whether `bench` offers every capability the configuration's elements need.
pub fn match_bench(cfg: &TestBenchConfiguration, bench: &TestBench) -> bool {
    missing_capabilities(cfg, bench).is_empty()
}
