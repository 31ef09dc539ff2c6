use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::validation::ValidationReport;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestLevel {
    Vehicle,
    System,
    Component,
    Unit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestObjective {
    pub id: String,
    pub description: String,
    #[serde(default)]
    pub children: Vec<TestObjective>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestObjectKind {
    Vehicle,
    System,
    Component,
    SoftwareUnit,
}

/// Identifies the exact hardware and/or software under test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestObjectRef {
    pub id: String,
    pub name: String,
    pub version: String,
    pub kind: TestObjectKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExcludedFeature {
    pub feature: String,
    pub rationale: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TestScope {
    /// Requirement ids.
    #[serde(default)]
    pub included_features: Vec<String>,
    #[serde(default)]
    pub excluded_features: Vec<ExcludedFeature>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlanDocumentKind {
    ProjectPlan,
    OrganizationalTestStrategy,
    ProjectTestPlan,
    SubProcessTestPlan,
}

/// Planning documents above the test plan. Only identity and containment
/// are modeled.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanDocument {
    pub id: String,
    pub title: String,
    pub kind: PlanDocumentKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parent: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestPlan {
    pub id: String,
    pub level: TestLevel,
    pub objectives: Vec<TestObjective>,
    pub test_object: TestObjectRef,
    #[serde(default)]
    pub scope: TestScope,
    #[serde(default)]
    pub strategy_notes: String,
    #[serde(default)]
    pub design_technique: String,
    /// Id of the sub-process test plan document this plan derives from.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub derived_from: Option<String>,
    #[serde(default)]
    pub documents: Vec<PlanDocument>,
}

fn check_objectives(r: &mut ValidationReport, path: &str, objectives: &[TestObjective], seen: &mut BTreeSet<String>) {
    for o in objectives {
        let p = format!("{path}[{}]", o.id);
        r.check(!o.description.trim().is_empty(), &p, "objective description must be non-empty");
        if !seen.insert(o.id.clone()) {
            r.push(&p, format!("duplicate objective id `{}`", o.id));
        }
        check_objectives(r, &format!("{p}.children"), &o.children, seen);
    }
}

pub fn validate_plan(plan: &TestPlan) -> ValidationReport {
    let mut r = ValidationReport::new();
    r.check(!plan.objectives.is_empty(), "objectives", "a test plan has one or more objectives");
    check_objectives(&mut r, "objectives", &plan.objectives, &mut BTreeSet::new());
    r.check(
        !plan.test_object.version.trim().is_empty(),
        "test_object.version",
        "test object version must be non-empty",
    );
    let ids: BTreeSet<_> = plan.documents.iter().map(|d| d.id.as_str()).collect();
    for d in &plan.documents {
        if let Some(parent) = &d.parent {
            r.check(
                ids.contains(parent.as_str()),
                format!("documents[{}].parent", d.id),
                format!("unknown parent document `{parent}`"),
            );
        }
        if d.parent.as_deref() == Some(d.id.as_str()) {
            r.push(format!("documents[{}].parent", d.id), "a document cannot be its own parent");
        }
    }
    if let Some(from) = &plan.derived_from {
        r.check(
            ids.contains(from.as_str()),
            "derived_from",
            format!("unknown plan document `{from}`"),
        );
    }
    r
}
