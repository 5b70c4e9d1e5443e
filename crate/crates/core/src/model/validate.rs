//! Reference, geometry and connectivity checks on a parsed model.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use super::{distance, FrameModel, ModuleTag};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Issue {
    pub severity: Severity,
    /// Location in model terms, e.g. `members[id=12]`.
    pub path: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub issues: Vec<Issue>,
    /// Body-in-white mass, kg.
    pub structural_mass: f64,
    /// Structural member mass per module, kg.
    pub module_masses: BTreeMap<ModuleTag, f64>,
    /// Structural mass plus all lumped masses, kg.
    pub total_mass: f64,
}

impl ValidationReport {
    pub fn errors(&self) -> impl Iterator<Item = &Issue> {
        self.issues.iter().filter(|i| i.severity == Severity::Error)
    }

    pub fn is_ok(&self) -> bool {
        self.errors().next().is_none()
    }

    /// `Err(Validation)` listing every error, for analysis entry points.
    pub fn into_result(self) -> crate::Result<Self> {
        if self.is_ok() {
            return Ok(self);
        }
        let msg = self
            .errors()
            .map(|i| format!("{}: {}", i.path, i.message))
            .collect::<Vec<_>>()
            .join("; ");
        Err(crate::Error::Validation(msg))
    }
}

/// Σ ρ·A·L over members plus lumped masses flagged structural.
pub fn structural_mass(model: &FrameModel) -> f64 {
    let members: f64 = model.members.iter().map(|m| model.member_mass(m)).sum();
    let lumped: f64 = model.nodes.iter().filter(|n| n.structural).map(|n| n.lumped_mass).sum();
    members + lumped
}

/// Checks references, member geometry, group membership and that the
/// frame forms a single connected component. Never fails; problems are
/// carried in the report.
pub fn validate(model: &FrameModel) -> ValidationReport {
    let mut issues = Vec::new();
    let mut err = |path: String, message: String| {
        issues.push(Issue {
            severity: Severity::Error,
            path,
            message,
        })
    };
    let index = model.node_index();
    let member_ids: BTreeSet<u32> = model.members.iter().map(|m| m.id).collect();

    for n in &model.nodes {
        if n.position.iter().any(|x| !x.is_finite()) {
            err(format!("nodes[id={}]", n.id), "non-finite coordinate".into());
        }
    }

    for m in &model.members {
        let path = format!("members[id={}]", m.id);
        if m.node_i == m.node_j {
            err(path.clone(), "node_i equals node_j".into());
        }
        for end in [m.node_i, m.node_j] {
            if !index.contains_key(&end) {
                err(path.clone(), format!("unknown node {end}"));
            }
        }
        if !model.sections.contains_key(&m.section) {
            err(path.clone(), format!("unknown section `{}`", m.section));
        }
        if !model.materials.contains_key(&m.material) {
            err(path.clone(), format!("unknown material `{}`", m.material));
        }
        if let (Some(a), Some(b)) = (model.node(m.node_i), model.node(m.node_j)) {
            let len = distance(&a.position, &b.position);
            if len <= 1e-9 {
                err(path.clone(), "zero length".into());
            } else {
                let axis = [
                    (b.position[0] - a.position[0]) / len,
                    (b.position[1] - a.position[1]) / len,
                    (b.position[2] - a.position[2]) / len,
                ];
                let v = m.orientation;
                let vn = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
                let cross = [
                    axis[1] * v[2] - axis[2] * v[1],
                    axis[2] * v[0] - axis[0] * v[2],
                    axis[0] * v[1] - axis[1] * v[0],
                ];
                let cn = (cross[0] * cross[0] + cross[1] * cross[1] + cross[2] * cross[2]).sqrt();
                if !(vn > 0.0) || cn <= 1e-6 * vn {
                    err(path.clone(), "orientation parallel to member axis".into());
                }
            }
        }
    }

    for (name, g) in &model.groups {
        let path = format!("groups.{name}");
        for id in &g.nodes {
            if !index.contains_key(id) {
                err(path.clone(), format!("unknown node {id}"));
            }
        }
        for id in &g.members {
            if !member_ids.contains(id) {
                err(path.clone(), format!("unknown member {id}"));
            }
        }
        if let Some(f) = &g.fractions {
            if f.len() != g.nodes.len() {
                err(
                    path.clone(),
                    format!("{} fractions for {} nodes", f.len(), g.nodes.len()),
                );
            }
            if f.iter().any(|x| !(*x >= 0.0)) || !(f.iter().sum::<f64>() > 0.0) {
                err(path.clone(), "fractions must be >= 0 with a positive sum".into());
            }
        }
    }

    for (name, set) in &model.constraints {
        for (i, c) in set.iter().enumerate() {
            let path = format!("constraints.{name}[{i}]");
            if !index.contains_key(&c.node) {
                err(path.clone(), format!("unknown node {}", c.node));
            }
            if c.dofs.is_empty() {
                err(path, "empty dof set".into());
            }
        }
    }

    for (name, loads) in &model.loadcases {
        for (i, l) in loads.iter().enumerate() {
            if !index.contains_key(&l.node) {
                err(format!("loadcases.{name}[{i}]"), format!("unknown node {}", l.node));
            }
        }
    }

    if !model.nodes.is_empty() {
        let components = components(model, &index);
        if components > 1 {
            err(
                "members".into(),
                format!("frame is not connected ({components} components)"),
            );
        }
    }

    let used: BTreeSet<u32> = model.members.iter().flat_map(|m| [m.node_i, m.node_j]).collect();
    let mut warnings = Vec::new();
    for n in &model.nodes {
        if !used.contains(&n.id) && n.lumped_mass > 0.0 {
            warnings.push(Issue {
                severity: Severity::Warning,
                path: format!("nodes[id={}]", n.id),
                message: "lumped mass on a node without members".into(),
            });
        }
    }
    issues.extend(warnings);

    ValidationReport {
        issues,
        structural_mass: structural_mass(model),
        module_masses: model.module_masses(),
        total_mass: model.total_mass(),
    }
}

/// Connected components over nodes, linking member end nodes.
fn components(model: &FrameModel, index: &BTreeMap<u32, usize>) -> usize {
    let n = model.nodes.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut i: usize) -> usize {
        while p[i] != i {
            p[i] = p[p[i]];
            i = p[i];
        }
        i
    }
    for m in &model.members {
        if let (Some(&a), Some(&b)) = (index.get(&m.node_i), index.get(&m.node_j)) {
            let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
            if ra != rb {
                parent[ra] = rb;
            }
        }
    }
    (0..n).filter(|&i| find(&mut parent, i) == i).count()
}
