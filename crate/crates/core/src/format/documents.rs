use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{read_document, to_document, DocumentKind, FormatError};
use crate::engine::{TestBench, TestBenchConfiguration};
use crate::product::{tree_from_records, DecompositionNode, Item, NodeRecord, ProductModel, Requirement, ItemDefinition, VehicleFunction};
use crate::scenario::ConcreteScenario;
use crate::spec::{
    build_test_case, builtin_metric_catalog, EvaluationCriterion, EvaluationMetric, TestCase, TestDesignSpec,
    TestPlan, TestProcedure, TestSpecification,
};
use crate::validation::ValidationReport;

/// A test case as written: a scenario reference plus criteria. Without an
/// explicit id the case gets the derived one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseRecord {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    pub scenario: String,
    pub criteria: Vec<EvaluationCriterion>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpecFile {
    #[serde(default)]
    pub design: TestDesignSpec,
    /// Concrete-scenario files, relative to the specification file.
    pub scenarios: Vec<String>,
    /// Defaults to the built-in catalog.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metrics: Option<Vec<EvaluationMetric>>,
    pub cases: Vec<CaseRecord>,
    pub procedures: Vec<TestProcedure>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plan: Option<TestPlan>,
}

fn base_dir(path: &Path) -> &Path {
    path.parent().unwrap_or_else(|| Path::new("."))
}

/// Loads a specification and the scenario files it lists.
pub fn load_specification(path: &Path) -> Result<TestSpecification, FormatError> {
    let file: SpecFile = read_document(path, DocumentKind::TestSpecification)?;
    let dir = base_dir(path);
    let mut scenarios: BTreeMap<String, ConcreteScenario> = BTreeMap::new();
    for rel in &file.scenarios {
        let s: ConcreteScenario = read_document(&dir.join(rel), DocumentKind::ConcreteScenario)?;
        scenarios.insert(s.id.clone(), s);
    }
    let mut report = ValidationReport::new();
    let mut cases = Vec::new();
    for (i, rec) in file.cases.iter().enumerate() {
        let at = format!("cases[{i}]");
        let Some(s) = scenarios.get(&rec.scenario) else {
            report.push(format!("{at}.scenario"), format!("unknown scenario `{}`", rec.scenario));
            continue;
        };
        match build_test_case(s, rec.criteria.clone()) {
            Ok(mut tc) => {
                if let Some(id) = &rec.id {
                    tc.id = id.clone();
                }
                cases.push(tc);
            }
            Err(e) => report.push(format!("{at}.criteria"), e.to_string()),
        }
    }
    if !report.is_empty() {
        return Err(FormatError::Invalid {
            path: path.to_owned(),
            report,
        });
    }
    Ok(TestSpecification {
        design: file.design,
        cases,
        procedures: file.procedures,
        metrics: file.metrics.unwrap_or_else(builtin_metric_catalog),
        plan: file.plan,
    })
}

/// Specification text referencing each case's scenario through
/// `scenario_files` (scenario id to relative path).
pub fn spec_document(spec: &TestSpecification, scenario_files: &BTreeMap<String, String>) -> String {
    let file = SpecFile {
        design: spec.design.clone(),
        scenarios: scenario_files.values().cloned().collect(),
        metrics: Some(spec.metrics.clone()),
        cases: spec
            .cases
            .iter()
            .map(|c: &TestCase| CaseRecord {
                id: Some(c.id.clone()),
                scenario: c.scenario.id.clone(),
                criteria: c.criteria.clone(),
            })
            .collect(),
        procedures: spec.procedures.clone(),
        plan: spec.plan.clone(),
    };
    to_document(DocumentKind::TestSpecification, &file)
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BenchesFile {
    #[serde(default)]
    pub benches: Vec<TestBench>,
    #[serde(default)]
    pub configurations: Vec<TestBenchConfiguration>,
}

pub fn load_benches(path: &Path) -> Result<BenchesFile, FormatError> {
    read_document(path, DocumentKind::TestBenches)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ItemRecord {
    pub id: String,
    pub definition: String,
    /// Root node ids of the item's systems.
    pub systems: Vec<String>,
}

/// Product model with decompositions written as flat node records.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ProductFile {
    #[serde(default)]
    pub functions: Vec<VehicleFunction>,
    #[serde(default)]
    pub definitions: Vec<ItemDefinition>,
    #[serde(default)]
    pub requirements: Vec<Requirement>,
    #[serde(default)]
    pub items: Vec<ItemRecord>,
    #[serde(default)]
    pub nodes: Vec<NodeRecord>,
}

pub fn load_product(path: &Path) -> Result<ProductModel, FormatError> {
    let file: ProductFile = read_document(path, DocumentKind::ProductModel)?;
    let mut report = ValidationReport::new();
    let mut items = Vec::new();
    for item in &file.items {
        let mut systems = Vec::new();
        for root in &item.systems {
            match tree_from_records(root, &file.nodes) {
                Ok(t) => systems.push(t),
                Err(r) => report.extend_prefixed(&format!("items[{}]", item.id), r),
            }
        }
        items.push(Item {
            id: item.id.clone(),
            definition: item.definition.clone(),
            systems,
        });
    }
    if !report.is_empty() {
        return Err(FormatError::Invalid {
            path: path.to_owned(),
            report,
        });
    }
    Ok(ProductModel {
        functions: file.functions,
        items,
        definitions: file.definitions,
        requirements: file.requirements,
    })
}

fn flatten(node: &DecompositionNode, out: &mut Vec<NodeRecord>) {
    out.push(NodeRecord {
        id: node.id.clone(),
        kind: node.kind,
        name: node.name.clone(),
        children: node.children.iter().map(|c| c.id.clone()).collect(),
    });
    for c in &node.children {
        flatten(c, out);
    }
}

pub fn product_document(model: &ProductModel) -> String {
    let mut nodes = Vec::new();
    for item in &model.items {
        for s in &item.systems {
            flatten(s, &mut nodes);
        }
    }
    let file = ProductFile {
        functions: model.functions.clone(),
        definitions: model.definitions.clone(),
        requirements: model.requirements.clone(),
        items: model
            .items
            .iter()
            .map(|i| ItemRecord {
                id: i.id.clone(),
                definition: i.definition.clone(),
                systems: i.systems.iter().map(|s| s.id.clone()).collect(),
            })
            .collect(),
        nodes,
    };
    to_document(DocumentKind::ProductModel, &file)
}
