//! Member subdivision, global stiffness/mass assembly and constraint
//! elimination.

use std::collections::BTreeMap;

use crate::element::{global_matrices, BeamProps, MassKind};
use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::model::{ConstraintSpec, Dof, FrameModel, Vec3};
use crate::sparse::CsrMatrix;

pub const DOF_PER_NODE: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AssemblyOptions {
    /// Overrides the model's target element length, m.
    pub element_length: Option<f64>,
    /// Shear-flexible bending (Timoshenko). Off gives Euler-Bernoulli.
    pub shear: bool,
    pub mass: MassKind,
    pub execution: Execution,
}

impl Default for AssemblyOptions {
    fn default() -> Self {
        Self {
            element_length: None,
            shear: true,
            mass: MassKind::Consistent,
            execution: Execution::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeshElement {
    pub a: usize,
    pub b: usize,
    /// Index into `FrameModel::members`.
    pub member: usize,
}

/// Finite-element mesh: member-attached model nodes first (in model
/// order), then the internal nodes of each subdivided member.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    pub positions: Vec<Vec3>,
    /// Model node id of each mesh node; `None` for internal nodes.
    pub node_ids: Vec<Option<u32>>,
    pub elements: Vec<MeshElement>,
    index: BTreeMap<u32, usize>,
}

impl Mesh {
    pub fn build(model: &FrameModel, element_length: f64) -> Result<Mesh> {
        if !(element_length > 0.0) {
            return Err(Error::invalid("element length", "must be > 0"));
        }
        let model_index = model.node_index();
        let mut attached = vec![false; model.nodes.len()];
        for m in &model.members {
            for id in [m.node_i, m.node_j] {
                let &i = model_index.get(&id).ok_or(Error::UnknownNode(id))?;
                attached[i] = true;
            }
        }
        let mut positions = Vec::new();
        let mut node_ids = Vec::new();
        let mut index = BTreeMap::new();
        for (n, _) in model.nodes.iter().zip(&attached).filter(|(_, &a)| a) {
            index.insert(n.id, positions.len());
            positions.push(n.position);
            node_ids.push(Some(n.id));
        }
        let mut elements = Vec::new();
        for (mi, m) in model.members.iter().enumerate() {
            let a = index[&m.node_i];
            let b = index[&m.node_j];
            let (pa, pb) = (positions[a], positions[b]);
            let len = crate::model::distance(&pa, &pb);
            if !(len > 1e-12) {
                return Err(Error::ZeroLength(m.id));
            }
            let n_sub = ((len / element_length) - 1e-9).ceil().max(1.0) as usize;
            let mut prev = a;
            for k in 1..=n_sub {
                let next = if k == n_sub {
                    b
                } else {
                    let s = k as f64 / n_sub as f64;
                    positions.push([
                        pa[0] + s * (pb[0] - pa[0]),
                        pa[1] + s * (pb[1] - pa[1]),
                        pa[2] + s * (pb[2] - pa[2]),
                    ]);
                    node_ids.push(None);
                    positions.len() - 1
                };
                elements.push(MeshElement {
                    a: prev,
                    b: next,
                    member: mi,
                });
                prev = next;
            }
        }
        Ok(Mesh {
            positions,
            node_ids,
            elements,
            index,
        })
    }

    pub fn n_nodes(&self) -> usize {
        self.positions.len()
    }

    pub fn n_dof(&self) -> usize {
        DOF_PER_NODE * self.positions.len()
    }

    /// Mesh index of a model node.
    pub fn node(&self, id: u32) -> Result<usize> {
        self.index.get(&id).copied().ok_or(Error::UnknownNode(id))
    }

    pub fn dof(&self, id: u32, dof: Dof) -> Result<usize> {
        Ok(DOF_PER_NODE * self.node(id)? + dof.index())
    }
}

/// Assembled, unconstrained stiffness and mass.
#[derive(Debug, Clone)]
pub struct GlobalSystem {
    pub mesh: Mesh,
    pub k: CsrMatrix,
    pub m: CsrMatrix,
}

fn beam_props(model: &FrameModel) -> Result<Vec<BeamProps>> {
    model
        .members
        .iter()
        .map(|m| {
            let sec = model
                .sections
                .get(&m.section)
                .ok_or_else(|| Error::Validation(format!("member {}: unknown section `{}`", m.id, m.section)))?;
            let mat = model
                .materials
                .get(&m.material)
                .ok_or_else(|| Error::Validation(format!("member {}: unknown material `{}`", m.id, m.material)))?;
            sec.check()?;
            Ok(BeamProps {
                youngs_modulus: mat.youngs_modulus,
                shear_modulus: mat.shear_modulus(),
                density: mat.density,
                section: sec.properties(),
            })
        })
        .collect()
}

/// Assembles global `K` and `M`. Element matrices are computed
/// independently (in parallel under `Execution::Parallel`) and merged in
/// element order, so the result does not depend on the policy.
pub fn assemble(model: &FrameModel, opts: &AssemblyOptions) -> Result<GlobalSystem> {
    let length = opts.element_length.unwrap_or(model.meta.element_length);
    let mesh = Mesh::build(model, length)?;
    let props = beam_props(model)?;

    let blocks = exec::map(opts.execution, &mesh.elements, |e| {
        let member = &model.members[e.member];
        global_matrices(
            &props[e.member],
            mesh.positions[e.a],
            mesh.positions[e.b],
            member.orientation,
            member.id,
            opts.shear,
            opts.mass,
        )
    });

    let n = mesh.n_dof();
    let mut kt = Vec::with_capacity(144 * mesh.elements.len());
    let mut mt = Vec::with_capacity(144 * mesh.elements.len() + 3 * model.nodes.len());
    for (e, block) in mesh.elements.iter().zip(blocks) {
        let (ke, me) = block?;
        let dofs: [usize; 12] = std::array::from_fn(|i| if i < 6 { 6 * e.a + i } else { 6 * e.b + i - 6 });
        for i in 0..12 {
            for j in 0..12 {
                let kv = ke[(i, j)];
                if kv != 0.0 {
                    kt.push((dofs[i], dofs[j], kv));
                }
                let mv = me[(i, j)];
                if mv != 0.0 {
                    mt.push((dofs[i], dofs[j], mv));
                }
            }
        }
    }
    for node in &model.nodes {
        if node.lumped_mass > 0.0 {
            let i = mesh.node(node.id)?;
            for d in 0..3 {
                mt.push((6 * i + d, 6 * i + d, node.lumped_mass));
            }
        }
    }
    Ok(GlobalSystem {
        k: CsrMatrix::from_triplets(n, kt),
        m: CsrMatrix::from_triplets(n, mt),
        mesh,
    })
}

/// Map between full and reduced (free) degrees of freedom.
#[derive(Debug, Clone, PartialEq)]
pub struct DofMap {
    /// Full DOF index of each free DOF, ascending.
    pub free: Vec<usize>,
    /// Reduced index of each full DOF, `None` when eliminated.
    pub reduced: Vec<Option<usize>>,
    /// Eliminated full DOFs, ascending.
    pub eliminated: Vec<usize>,
}

impl DofMap {
    pub fn n_free(&self) -> usize {
        self.free.len()
    }

    /// Scatters a reduced vector to full length, zero on eliminated DOFs.
    pub fn expand(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.reduced.len()];
        for (k, &g) in self.free.iter().enumerate() {
            out[g] = x[k];
        }
        out
    }

    pub fn restrict(&self, x: &[f64]) -> Vec<f64> {
        self.free.iter().map(|&g| x[g]).collect()
    }
}

/// Stiffness and mass on the free DOFs.
#[derive(Debug, Clone)]
pub struct ReducedSystem {
    pub dofs: DofMap,
    pub k: CsrMatrix,
    pub m: CsrMatrix,
}

/// Eliminates the constrained rows and columns. An empty set leaves the
/// system unchanged.
pub fn apply_constraints(system: &GlobalSystem, constraints: &[ConstraintSpec]) -> Result<ReducedSystem> {
    let n = system.mesh.n_dof();
    let mut fixed = vec![false; n];
    for c in constraints {
        for &d in &c.dofs {
            fixed[system.mesh.dof(c.node, d)?] = true;
        }
    }
    let free: Vec<usize> = (0..n).filter(|&i| !fixed[i]).collect();
    let eliminated: Vec<usize> = (0..n).filter(|&i| fixed[i]).collect();
    let mut reduced = vec![None; n];
    for (k, &g) in free.iter().enumerate() {
        reduced[g] = Some(k);
    }
    let (k, m) = if eliminated.is_empty() {
        (system.k.clone(), system.m.clone())
    } else {
        (system.k.principal(&free), system.m.principal(&free))
    };
    Ok(ReducedSystem {
        dofs: DofMap {
            free,
            reduced,
            eliminated,
        },
        k,
        m,
    })
}

/// Rigid-body field of the mesh: translation `t` plus small rotation
/// `w` about the origin.
pub fn rigid_field(mesh: &Mesh, t: Vec3, w: Vec3) -> Vec<f64> {
    let mut u = vec![0.0; mesh.n_dof()];
    for (i, p) in mesh.positions.iter().enumerate() {
        let cross = [
            w[1] * p[2] - w[2] * p[1],
            w[2] * p[0] - w[0] * p[2],
            w[0] * p[1] - w[1] * p[0],
        ];
        for d in 0..3 {
            u[6 * i + d] = t[d] + cross[d];
            u[6 * i + 3 + d] = w[d];
        }
    }
    u
}
