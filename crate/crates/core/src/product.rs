//! Item decomposition for the concept, design and implementation phase.
//!
//! An item consists of systems; systems of components or subsystems;
//! components of subcomponents, hardware/software components, hardware
//! parts and software units. Hardware parts refine into subparts and
//! elementary subparts. The structure is a tree, and a component may hold
//! one or more hardware parts and/or one or more software units at a single
//! level.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::validation::ValidationReport;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeKind {
    System,
    Component,
    HardwareComponent,
    SoftwareComponent,
    HardwarePart,
    HardwareSubpart,
    HardwareElementarySubpart,
    SoftwareUnit,
}

impl NodeKind {
    /// Kinds a node of this kind may contain directly.
    pub fn allowed_children(self) -> &'static [NodeKind] {
        use NodeKind::*;
        match self {
            System => &[System, Component],
            Component => &[Component, HardwareComponent, SoftwareComponent, HardwarePart, SoftwareUnit],
            HardwareComponent => &[HardwareComponent, HardwarePart],
            SoftwareComponent => &[SoftwareComponent, SoftwareUnit],
            HardwarePart => &[HardwareSubpart],
            HardwareSubpart => &[HardwareSubpart, HardwareElementarySubpart],
            HardwareElementarySubpart | SoftwareUnit => &[],
        }
    }

    pub fn is_component(self) -> bool {
        matches!(
            self,
            NodeKind::Component | NodeKind::HardwareComponent | NodeKind::SoftwareComponent
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecompositionNode {
    pub id: String,
    pub kind: NodeKind,
    #[serde(default)]
    pub name: String,
    #[serde(default)]
    pub children: Vec<DecompositionNode>,
}

impl DecompositionNode {
    pub fn new(id: &str, kind: NodeKind, children: Vec<DecompositionNode>) -> Self {
        DecompositionNode {
            id: id.to_owned(),
            kind,
            name: String::new(),
            children,
        }
    }

    pub fn leaf(id: &str, kind: NodeKind) -> Self {
        Self::new(id, kind, Vec::new())
    }

    pub fn walk(&self) -> Vec<&DecompositionNode> {
        let mut out = vec![self];
        for c in &self.children {
            out.extend(c.walk());
        }
        out
    }
}

/// Checks kind/children rules and that every id occurs exactly once.
///
/// A component without children is accepted as not decomposed any further.
/// A hardware component must contain at least one hardware part (possibly
/// nested in sub-components), a software component at least one software
/// unit.
pub fn validate_decomposition(root: &DecompositionNode) -> ValidationReport {
    let mut r = ValidationReport::new();
    r.check(
        root.kind == NodeKind::System,
        root.id.as_str(),
        format!("decomposition root must be a system, found {:?}", root.kind),
    );
    let mut seen = BTreeMap::new();
    check_node(root, root.id.clone(), &mut seen, &mut r);
    r
}

fn contains_kind(node: &DecompositionNode, kind: NodeKind) -> bool {
    node.children
        .iter()
        .any(|c| c.kind == kind || (c.kind == node.kind && contains_kind(c, kind)))
}

fn check_node(
    node: &DecompositionNode,
    path: String,
    seen: &mut BTreeMap<String, String>,
    r: &mut ValidationReport,
) {
    if node.id.trim().is_empty() {
        r.push(&path, "node id must be non-empty");
    }
    if let Some(first) = seen.insert(node.id.clone(), path.clone()) {
        r.push(
            &path,
            format!("tree structure violated: `{}` already appears at {first}", node.id),
        );
    }
    let allowed = node.kind.allowed_children();
    for c in &node.children {
        if !allowed.contains(&c.kind) {
            r.push(
                format!("{path}/{}", c.id),
                format!("{:?} cannot contain {:?}", node.kind, c.kind),
            );
        }
    }
    match node.kind {
        NodeKind::System => r.check(
            !node.children.is_empty(),
            &path,
            "a system consists of one or more components or subsystems",
        ),
        NodeKind::HardwareComponent => r.check(
            contains_kind(node, NodeKind::HardwarePart),
            &path,
            "a hardware component contains one or more hardware parts",
        ),
        NodeKind::SoftwareComponent => r.check(
            contains_kind(node, NodeKind::SoftwareUnit),
            &path,
            "a software component contains one or more software units",
        ),
        _ => {}
    }
    for c in &node.children {
        check_node(c, format!("{path}/{}", c.id), seen, r);
    }
}

/// Flat node list as written in decomposition files: children by id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeRecord {
    pub id: String,
    pub kind: NodeKind,
    #[serde(default)]
    pub name: String,
    #[serde(default)]
    pub children: Vec<String>,
}

/// Builds a tree from flat records, reporting cycles, shared children and
/// dangling references instead of looping or duplicating.
pub fn tree_from_records(
    root: &str,
    records: &[NodeRecord],
) -> Result<DecompositionNode, ValidationReport> {
    let mut r = ValidationReport::new();
    let mut by_id = BTreeMap::new();
    for rec in records {
        if by_id.insert(rec.id.as_str(), rec).is_some() {
            r.push(format!("nodes[{}]", rec.id), format!("duplicate node id `{}`", rec.id));
        }
    }
    let mut parents: BTreeMap<&str, &str> = BTreeMap::new();
    for rec in records {
        for child in &rec.children {
            if !by_id.contains_key(child.as_str()) {
                r.push(format!("nodes[{}].children", rec.id), format!("unknown node `{child}`"));
            } else if let Some(other) = parents.insert(child.as_str(), rec.id.as_str()) {
                r.push(
                    format!("nodes[{child}]"),
                    format!("tree structure violated: `{child}` has parents `{other}` and `{}`", rec.id),
                );
            }
        }
    }
    if !by_id.contains_key(root) {
        r.push("root", format!("unknown root node `{root}`"));
    }
    if let Some(p) = parents.get(root) {
        r.push("root", format!("root `{root}` has parent `{p}`"));
    }
    if !r.is_empty() {
        return Err(r);
    }

    fn build(
        id: &str,
        by_id: &BTreeMap<&str, &NodeRecord>,
        on_path: &mut BTreeSet<String>,
        r: &mut ValidationReport,
    ) -> Option<DecompositionNode> {
        if !on_path.insert(id.to_owned()) {
            r.push(format!("nodes[{id}]"), format!("tree structure violated: cycle through `{id}`"));
            return None;
        }
        let rec = by_id[id];
        let children = rec
            .children
            .iter()
            .filter_map(|c| build(c, by_id, on_path, r))
            .collect();
        on_path.remove(id);
        Some(DecompositionNode {
            id: rec.id.clone(),
            kind: rec.kind,
            name: rec.name.clone(),
            children,
        })
    }

    let tree = build(root, &by_id, &mut BTreeSet::new(), &mut r);
    let reachable: BTreeSet<_> = tree
        .as_ref()
        .map(|t| t.walk().into_iter().map(|n| n.id.clone()).collect())
        .unwrap_or_default();
    for rec in records {
        if !reachable.contains(&rec.id) && r.is_empty() {
            r.push(format!("nodes[{}]", rec.id), format!("node `{}` is not reachable from the root", rec.id));
        }
    }
    match tree {
        Some(t) if r.is_empty() => Ok(t),
        _ => Err(r),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VehicleFunction {
    pub id: String,
    pub description: String,
    pub implemented_by: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ItemDefinition {
    pub id: String,
    pub functionality: String,
    #[serde(default)]
    pub functional_scenarios: Vec<String>,
    #[serde(default)]
    pub derived_requirements: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Requirement {
    pub id: String,
    pub statement: String,
    /// Ids of evaluation criteria that verify this requirement.
    #[serde(default)]
    pub verified_by: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Item {
    pub id: String,
    pub definition: String,
    pub systems: Vec<DecompositionNode>,
}

/// Everything from the product side that tests trace back to.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ProductModel {
    #[serde(default)]
    pub functions: Vec<VehicleFunction>,
    #[serde(default)]
    pub items: Vec<Item>,
    #[serde(default)]
    pub definitions: Vec<ItemDefinition>,
    #[serde(default)]
    pub requirements: Vec<Requirement>,
}

/// Cross-reference and multiplicity checks. `known_criteria`, when given,
/// is the set of criterion ids requirements may point at.
pub fn validate_product(model: &ProductModel, known_criteria: Option<&BTreeSet<String>>) -> ValidationReport {
    let mut r = ValidationReport::new();
    let item_ids: BTreeSet<_> = model.items.iter().map(|i| i.id.as_str()).collect();
    let def_ids: BTreeSet<_> = model.definitions.iter().map(|d| d.id.as_str()).collect();
    let req_ids: BTreeSet<_> = model.requirements.iter().map(|q| q.id.as_str()).collect();

    for f in &model.functions {
        let path = format!("functions[{}]", f.id);
        r.check(
            !f.implemented_by.is_empty(),
            &path,
            "a vehicle function is implemented by one or more items",
        );
        for i in &f.implemented_by {
            r.check(item_ids.contains(i.as_str()), format!("{path}.implemented_by"), format!("unknown item `{i}`"));
        }
    }
    for item in &model.items {
        let path = format!("items[{}]", item.id);
        r.check(
            def_ids.contains(item.definition.as_str()),
            format!("{path}.definition"),
            format!("unknown item definition `{}`", item.definition),
        );
        r.check(!item.systems.is_empty(), &path, "an item consists of one or more systems");
        for s in &item.systems {
            r.extend_prefixed(&format!("{path}.systems"), validate_decomposition(s));
        }
    }
    for d in &model.definitions {
        let path = format!("definitions[{}]", d.id);
        r.check(!d.functionality.trim().is_empty(), &path, "functionality must be non-empty");
        for q in &d.derived_requirements {
            r.check(
                req_ids.contains(q.as_str()),
                format!("{path}.derived_requirements"),
                format!("unknown requirement `{q}`"),
            );
        }
    }
    for q in &model.requirements {
        let path = format!("requirements[{}]", q.id);
        r.check(!q.statement.trim().is_empty(), &path, "statement must be non-empty");
        if let Some(known) = known_criteria {
            for c in &q.verified_by {
                r.check(
                    known.contains(c),
                    format!("{path}.verified_by"),
                    format!("unknown evaluation criterion `{c}`"),
                );
            }
        }
    }
    r
}
