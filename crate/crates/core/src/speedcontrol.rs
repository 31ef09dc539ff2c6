//! The SpeedControl example: an ACC-equipped ego vehicle driving 150 km/h
//! on a free motorway, the ACC activated at 2 s with a set speed of
//! 120 km/h. Builders for every layer, used by tests, examples and the
//! bundled campaign.

use std::collections::{BTreeMap, BTreeSet};

use crate::engine::{
    AdapterTarget, BenchKind, Capability, Element, ElementRole, LoopMode, TestBench,
    TestBenchConfiguration,
};
use crate::product::{
    DecompositionNode, Item, ItemDefinition, NodeKind, ProductModel, Requirement, VehicleFunction,
};
use crate::scenario::{
    Behavior, ConcreteScenario, DriveMetadata, EffectTemplate, EventEffect, EventTemplate, Field,
    FunctionalScenario, GapPreference, GoalDescription, GoalKind, GoalValue, InitialState,
    LogicalScenario, MovableObject, ObjectKind, ObjectRole, ObjectTemplate, ParameterRange, Persistence,
    RealWorldTestDrive, ScenarioEvent, Scene, Scenery, SceneryTemplate, SelfRepresentation,
};
use crate::spec::{
    build_test_case, builtin_metric_catalog, parse_condition, ApplicationPeriod, CriterionScope,
    EvaluationCriterion, EvaluationScale, ExcludedFeature, Judgement, MetricName, PlanDocument,
    PlanDocumentKind, ScalePoint, TestCase, TestDesignSpec, TestLevel, TestObjectKind,
    TestObjectRef, TestObjective, TestPlan, TestProcedure, TestScope, TestSpecification,
    ThresholdDirection, AVERAGE_EGO_DECELERATION, BUILTIN_FORMAT, EGO_SPEED,
};
use crate::units::{kmh, Dimension, Quantity, Unit};

pub const EGO: &str = "ego";
pub const ACTIVATION_EVENT: &str = "acc_activation";
pub const FUNCTIONAL_ID: &str = "FS-SpeedControl";
pub const LOGICAL_ID: &str = "LS-SpeedControl";
pub const SCENARIO_ID: &str = "SpeedControl";
pub const PROCEDURE_ID: &str = "TP-SpeedControl";
pub const BENCH_ID: &str = "HIL-1";
pub const CONFIG_ID: &str = "HIL-ACC";

/// Start condition of the set-speed criterion: ACC active and the set speed
/// reached for the first time.
pub const SET_SPEED_REACHED: &str = "flag(acc_active) && once(v_ego == v_set ~ 0)";
pub const ACC_ACTIVE: &str = "flag(acc_active)";

pub fn functional_scenario() -> FunctionalScenario {
    FunctionalScenario {
        id: FUNCTIONAL_ID.into(),
        narrative: "The ego vehicle drives on a motorway without other road users. The driver \
                    activates the ACC system, which brings the vehicle to the set speed."
            .into(),
        vocabulary_tags: vec!["motorway".into(), "free driving".into(), "acc activation".into()],
    }
}

fn ego_self_representation() -> SelfRepresentation {
    SelfRepresentation {
        owner: EGO.into(),
        skills: BTreeMap::from([("acc_ready".to_owned(), true)]),
        states: BTreeMap::new(),
    }
}

fn ego_goals() -> Vec<GoalValue> {
    vec![
        GoalValue {
            owner: EGO.into(),
            kind: GoalKind::Goal,
            persistence: Persistence::Transient,
            description: GoalDescription::MaintainSetSpeed,
        },
        GoalValue {
            owner: EGO.into(),
            kind: GoalKind::Value,
            persistence: Persistence::Permanent,
            description: GoalDescription::DesiredGap {
                gap: GapPreference::Medium,
            },
        },
    ]
}

pub fn logical_scenario() -> LogicalScenario {
    LogicalScenario {
        id: LOGICAL_ID.into(),
        parent: Some(FUNCTIONAL_ID.into()),
        duration: Field::Fixed(Quantity::new(30.0, Unit::Second)),
        scenery: SceneryTemplate {
            lane_count: 3,
            lane_width: Field::param("lane_width"),
            curvature: Field::param("curvature"),
            ambient_temperature: Field::param("ambient_temperature"),
            stationary_elements: Vec::new(),
        },
        objects: vec![ObjectTemplate {
            id: EGO.into(),
            kind: ObjectKind::EgoVehicle,
            roles: BTreeSet::from([ObjectRole::Actor]),
            position: Field::Fixed(Quantity::new(0.0, Unit::Meter)),
            lane_index: 1,
            speed: Field::param("initial_speed"),
            behavior: Behavior::TestObject,
        }],
        self_representations: vec![ego_self_representation()],
        events: vec![EventTemplate {
            id: ACTIVATION_EVENT.into(),
            trigger_time: Field::param("activation_time"),
            effect: EffectTemplate::ActivateAcc {
                set_speed: Field::param("set_speed"),
            },
        }],
        goals_values: ego_goals(),
        parameters: vec![
            ParameterRange::new("lane_width", Unit::Meter, 2.5, 3.9),
            ParameterRange::new("curvature", Unit::PerMeter, 0.0, 1e-3),
            ParameterRange::new("ambient_temperature", Unit::DegreeCelsius, 5.0, 35.0),
            ParameterRange::new("initial_speed", Unit::KilometerPerHour, 80.0, 160.0),
            ParameterRange::new("activation_time", Unit::Second, 1.0, 10.0),
            ParameterRange::new("set_speed", Unit::KilometerPerHour, 60.0, 200.0),
        ],
    }
}

struct Values {
    lane_width: f64,
    curvature: f64,
    temperature: f64,
    initial_speed: f64,
    activation_time: f64,
    set_speed: f64,
}

fn scenario_from(id: &str, parent: Option<&str>, v: Values) -> ConcreteScenario {
    let scenery = Scenery {
        lane_count: 3,
        lane_width: v.lane_width,
        curvature: v.curvature,
        ambient_temperature: v.temperature,
        stationary_elements: Vec::new(),
    };
    let objects = vec![MovableObject {
        id: EGO.into(),
        kind: ObjectKind::EgoVehicle,
        roles: BTreeSet::from([ObjectRole::Actor]),
        initial_state: InitialState {
            position: 0.0,
            lane_index: 1,
            speed: v.initial_speed,
        },
        behavior: Behavior::TestObject,
    }];
    let parameter_values = BTreeMap::from([
        ("lane_width".to_owned(), Quantity::si(v.lane_width, Dimension::Length)),
        ("curvature".to_owned(), Quantity::si(v.curvature, Dimension::Curvature)),
        (
            "ambient_temperature".to_owned(),
            Quantity::si(v.temperature, Dimension::Temperature),
        ),
        ("initial_speed".to_owned(), Quantity::si(v.initial_speed, Dimension::Speed)),
        ("activation_time".to_owned(), Quantity::si(v.activation_time, Dimension::Time)),
        ("set_speed".to_owned(), Quantity::si(v.set_speed, Dimension::Speed)),
    ]);
    ConcreteScenario {
        id: id.into(),
        parent: parent.map(str::to_owned),
        initial_scene: Scene::initial(scenery, &objects, vec![ego_self_representation()]),
        objects,
        events: vec![ScenarioEvent {
            id: ACTIVATION_EVENT.into(),
            trigger_time: v.activation_time,
            effect: EventEffect::ActivateAcc {
                set_speed: v.set_speed,
            },
        }],
        goals_values: ego_goals(),
        duration: 30.0,
        parameter_values,
        flags: Vec::new(),
    }
}

/// Lane width 3.75 m, curvature 5e-4 1/m, 20 °C, 150 km/h, ACC activated at
/// 2 s with a set speed of 120 km/h.
pub fn concrete_scenario() -> ConcreteScenario {
    scenario_from(
        SCENARIO_ID,
        Some(LOGICAL_ID),
        Values {
            lane_width: 3.75,
            curvature: 5e-4,
            temperature: 20.0,
            initial_speed: kmh(150.0),
            activation_time: 2.0,
            set_speed: kmh(120.0),
        },
    )
}

/// A scenario extracted from a recorded drive: 3.4 m lanes on a bend too
/// tight for the logical SpeedControl scenario.
pub fn recorded_drive_scenario() -> ConcreteScenario {
    scenario_from(
        "REC-A9-0417",
        None,
        Values {
            lane_width: 3.4,
            curvature: 5e-3,
            temperature: 14.0,
            initial_speed: kmh(140.0),
            activation_time: 3.0,
            set_speed: kmh(120.0),
        },
    )
}

pub fn real_world_drive() -> RealWorldTestDrive {
    let mut copy = concrete_scenario();
    copy.id = "REC-A9-0418".into();
    copy.parent = None;
    RealWorldTestDrive {
        id: "DRIVE-A9".into(),
        recorded_scenarios: vec![recorded_drive_scenario(), copy],
        metadata: DriveMetadata {
            date: "2019-04-17".into(),
            route: "A9 northbound".into(),
        },
    }
}

/// ACC system with its ECU (microcontroller, resistor, ACC software) and an
/// undecomposed radar sensor.
pub fn acc_system_decomposition() -> DecompositionNode {
    use NodeKind::*;
    let mut flip_flop = DecompositionNode::leaf("flip-flop", HardwareElementarySubpart);
    flip_flop.name = "Flip-flop".into();
    let alu = DecompositionNode::new("alu", HardwareSubpart, vec![flip_flop]);
    let microcontroller = DecompositionNode::new(
        "microcontroller",
        HardwareComponent,
        vec![
            DecompositionNode::leaf("cpu", HardwarePart),
            DecompositionNode::new("flash", HardwarePart, vec![alu]),
        ],
    );
    let software = DecompositionNode::new(
        "acc-software",
        SoftwareComponent,
        vec![DecompositionNode::leaf("target-acceleration", SoftwareUnit)],
    );
    let ecu = DecompositionNode::new(
        "acc-ecu",
        Component,
        vec![
            microcontroller,
            DecompositionNode::leaf("resistor", HardwarePart),
            software,
        ],
    );
    DecompositionNode::new(
        "acc-system",
        System,
        vec![ecu, DecompositionNode::leaf("radar-sensor", Component)],
    )
}

pub fn product_model() -> ProductModel {
    ProductModel {
        functions: vec![VehicleFunction {
            id: "F-ACC".into(),
            description: "Automatically controls the ego vehicle's speed to maintain the set speed."
                .into(),
            implemented_by: vec!["I-ACC".into()],
        }],
        items: vec![Item {
            id: "I-ACC".into(),
            definition: "ID-ACC".into(),
            systems: vec![acc_system_decomposition()],
        }],
        definitions: vec![ItemDefinition {
            id: "ID-ACC".into(),
            functionality: "Longitudinal speed control to a driver-selected set speed.".into(),
            functional_scenarios: vec![FUNCTIONAL_ID.into()],
            derived_requirements: vec!["R-SPEED".into(), "R-DECEL".into()],
        }],
        requirements: vec![
            Requirement {
                id: "R-SPEED".into(),
                statement: "After reaching the set speed, the ego speed stays within 5 % below it \
                            and never exceeds it."
                    .into(),
                verified_by: vec!["EC1".into()],
            },
            Requirement {
                id: "R-DECEL".into(),
                statement: "While active, the 2 s average deceleration does not exceed 3.5 m/s².".into(),
                verified_by: vec!["EC2".into()],
            },
        ],
    }
}

/// 0 % at 95 % of the set speed, 100 % at the set speed, linear in between,
/// 0 % anywhere else (in particular above the set speed).
pub fn speed_scale(v_set: Quantity) -> EvaluationScale {
    EvaluationScale {
        breakpoints: vec![
            ScalePoint {
                value: Quantity::new(v_set.value * 0.95, v_set.unit),
                fulfillment: 0.0,
            },
            ScalePoint {
                value: v_set,
                fulfillment: 100.0,
            },
        ],
        out_of_domain: 0.0,
    }
}

pub fn set_speed_criterion() -> EvaluationCriterion {
    EvaluationCriterion {
        id: "EC1".into(),
        metric: MetricName::new(EGO_SPEED),
        judgement: Judgement::Scale(speed_scale(Quantity::new(120.0, Unit::KilometerPerHour))),
        application_period: ApplicationPeriod::while_holds(
            parse_condition(SET_SPEED_REACHED).expect("valid condition"),
        ),
        scope: CriterionScope::Scene,
    }
}

pub fn deceleration_criterion() -> EvaluationCriterion {
    EvaluationCriterion {
        id: "EC2".into(),
        metric: MetricName::new(AVERAGE_EGO_DECELERATION),
        judgement: Judgement::Threshold {
            value: Quantity::new(3.5, Unit::MeterPerSecondSquared),
            direction: ThresholdDirection::MustNotExceed,
        },
        application_period: ApplicationPeriod::while_holds(
            parse_condition(ACC_ACTIVE).expect("valid condition"),
        ),
        scope: CriterionScope::Scene,
    }
}

pub fn criteria() -> Vec<EvaluationCriterion> {
    vec![set_speed_criterion(), deceleration_criterion()]
}

pub fn test_case() -> TestCase {
    build_test_case(&concrete_scenario(), criteria()).expect("criteria are non-empty")
}

pub fn procedure(case_id: &str) -> TestProcedure {
    TestProcedure {
        id: PROCEDURE_ID.into(),
        cases: vec![case_id.into()],
        setup: Some("power up ECU, clear fault memory".into()),
        wrapup: Some("read out fault memory".into()),
        cross_case_criteria: Vec::new(),
        bench_configs: vec![CONFIG_ID.into()],
    }
}

pub fn component_test_plan() -> TestPlan {
    TestPlan {
        id: "PLAN-ACC-COMPONENT".into(),
        level: TestLevel::Component,
        objectives: vec![TestObjective {
            id: "O1".into(),
            description: "The ACC ECU controls the ego speed to the set speed.".into(),
            children: vec![
                TestObjective {
                    id: "O1.1".into(),
                    description: "The set speed is reached and held without overshoot.".into(),
                    children: Vec::new(),
                },
                TestObjective {
                    id: "O1.2".into(),
                    description: "Braking towards the set speed stays comfortable.".into(),
                    children: Vec::new(),
                },
            ],
        }],
        test_object: TestObjectRef {
            id: "acc-ecu".into(),
            name: "ACC ECU".into(),
            version: "sw 1.4.2 / hw C".into(),
            kind: TestObjectKind::Component,
        },
        scope: TestScope {
            included_features: vec!["R-SPEED".into(), "R-DECEL".into()],
            excluded_features: vec![ExcludedFeature {
                feature: "following mode".into(),
                rationale: "no lead vehicle in the selected scenarios".into(),
            }],
        },
        strategy_notes: "Simulated hardware-in-the-loop runs of concrete scenarios.".into(),
        design_technique: "scenario-based test design".into(),
        derived_from: Some("SPTP-ACC".into()),
        documents: vec![
            PlanDocument {
                id: "PP".into(),
                title: "Project plan".into(),
                kind: PlanDocumentKind::ProjectPlan,
                parent: None,
            },
            PlanDocument {
                id: "PTP".into(),
                title: "Project test plan".into(),
                kind: PlanDocumentKind::ProjectTestPlan,
                parent: Some("PP".into()),
            },
            PlanDocument {
                id: "SPTP-ACC".into(),
                title: "Component test plan, ACC".into(),
                kind: PlanDocumentKind::SubProcessTestPlan,
                parent: Some("PTP".into()),
            },
            PlanDocument {
                id: "OTS".into(),
                title: "Organizational test strategy".into(),
                kind: PlanDocumentKind::OrganizationalTestStrategy,
                parent: None,
            },
        ],
    }
}

/// One case, one procedure, two criteria.
pub fn specification() -> TestSpecification {
    let tc = test_case();
    TestSpecification {
        design: TestDesignSpec {
            features_to_test: vec!["R-SPEED".into(), "R-DECEL".into()],
            test_conditions: vec!["ACC activation above the set speed".into()],
            case_format: Some(BUILTIN_FORMAT.into()),
            procedure_format: Some(BUILTIN_FORMAT.into()),
        },
        procedures: vec![procedure(&tc.id)],
        cases: vec![tc],
        metrics: builtin_metric_catalog(),
        plan: Some(component_test_plan()),
    }
}

pub fn hil_bench() -> TestBench {
    TestBench {
        id: BENCH_ID.into(),
        kind: BenchKind::HardwareInTheLoopSimulated,
        capabilities: BTreeSet::from([
            Capability::RunsSimulationModels,
            Capability::ConnectsEcu,
            Capability::RecordsSignals,
        ]),
    }
}

pub fn sil_bench() -> TestBench {
    TestBench {
        id: "SIL-1".into(),
        kind: BenchKind::SoftwareInTheLoop,
        capabilities: BTreeSet::from([Capability::RunsSimulationModels, Capability::RecordsSignals]),
    }
}

/// Vehicle dynamics, event scheduler, signal recorder and the adapter to
/// the ACC ECU, closed loop at 10 ms.
pub fn hil_configuration() -> TestBenchConfiguration {
    let dynamics = Element::new("ego-dynamics", ElementRole::VehicleDynamics)
        .with_parameter("a_min", Quantity::new(-8.0, Unit::MeterPerSecondSquared))
        .with_parameter("a_max", Quantity::new(4.0, Unit::MeterPerSecondSquared));
    let mut adapter = Element::new("acc-ecu-adapter", ElementRole::TestObjectAdapter);
    adapter.target = Some(AdapterTarget::Ecu);
    TestBenchConfiguration {
        id: CONFIG_ID.into(),
        bench: BENCH_ID.into(),
        elements: vec![
            dynamics,
            Element::new("scheduler", ElementRole::EventScheduler),
            Element::new("recorder", ElementRole::SignalRecorder),
            adapter,
        ],
        loop_mode: LoopMode::Closed,
        time_step: 0.01,
    }
}
