//! Generalized eigenanalysis `K φ = ω² M φ`.
//!
//! Large systems use shift-invert block Krylov iteration: the operator
//! `(K − σM)⁻¹ M` with a small negative shift σ is well defined even for a
//! free-free (singular) `K`, maps the lowest eigenvalues to the largest,
//! and each Krylov block is M-orthonormalized before a Rayleigh-Ritz
//! projection on the original pencil. Small systems go to a dense solver.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::Serialize;

use crate::assembly::{apply_constraints, assemble, AssemblyOptions, GlobalSystem, Mesh, ReducedSystem};
use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::model::{ConstraintSpec, FrameModel};
use crate::sparse::{norm, EnvelopeCholesky};

/// Below this many free DOFs the dense solver is used.
pub const DENSE_LIMIT: usize = 600;

#[derive(Debug, Clone, PartialEq)]
pub struct ModalOptions {
    /// Flexible modes wanted (rigid modes come on top).
    pub n_modes: usize,
    /// Shift σ in s⁻²; must be negative for free-free systems.
    pub shift: f64,
    /// Frequencies below this are rigid-body modes, Hz.
    pub rigid_threshold: f64,
    /// Relative change of the Ritz values between restarts.
    pub tolerance: f64,
    pub max_restarts: usize,
    pub block_size: usize,
    /// Krylov blocks per restart.
    pub krylov_steps: usize,
    pub execution: Execution,
    /// Forces the iterative solver even for small systems.
    pub force_iterative: bool,
}

impl Default for ModalOptions {
    fn default() -> Self {
        Self {
            n_modes: 10,
            shift: -1.0,
            rigid_threshold: 0.5,
            tolerance: 1e-10,
            max_restarts: 40,
            block_size: 6,
            krylov_steps: 4,
            execution: Execution::default(),
            force_iterative: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeClass {
    Torsion,
    Bending,
    Mixed,
}

impl ModeClass {
    pub fn as_str(&self) -> &'static str {
        match self {
            ModeClass::Torsion => "torsion",
            ModeClass::Bending => "bending",
            ModeClass::Mixed => "mixed",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mode {
    /// Hz
    pub frequency: f64,
    /// ω², s⁻²
    pub eigenvalue: f64,
    /// Mass-normalized shape over the full mesh DOFs.
    pub shape: Vec<f64>,
    /// `‖Kφ − λMφ‖ / ‖Kφ‖`
    pub residual: f64,
    pub class: ModeClass,
    /// Antisymmetric share of vertical motion, in [0, 1].
    pub antisymmetry: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModeSet {
    /// Every computed mode, ascending, rigid modes first.
    pub modes: Vec<Mode>,
    pub rigid_mode_count: usize,
    pub dense: bool,
    pub iterations: usize,
}

impl ModeSet {
    pub fn flexible(&self) -> &[Mode] {
        &self.modes[self.rigid_mode_count..]
    }

    pub fn first_flexible(&self) -> Option<f64> {
        self.flexible().first().map(|m| m.frequency)
    }

    pub fn frequencies(&self) -> Vec<f64> {
        self.modes.iter().map(|m| m.frequency).collect()
    }
}

/// Eigenpairs on a reduced system: (eigenvalues ascending, reduced
/// vectors, block iterations).
type Pairs = (Vec<f64>, Vec<Vec<f64>>, usize);

fn dense_pairs(sys: &ReducedSystem, n_want: usize) -> Result<Pairs> {
    let k = sys.k.to_dense();
    let m = sys.m.to_dense();
    let chol = m.cholesky().ok_or(Error::MassNotPositiveDefinite)?;
    let l = chol.l();
    let linv = l
        .clone()
        .solve_lower_triangular(&DMatrix::identity(l.nrows(), l.nrows()))
        .ok_or(Error::MassNotPositiveDefinite)?;
    let mut c = &linv * k * linv.transpose();
    c = (&c + c.transpose()) * 0.5;
    let eig = SymmetricEigen::new(c);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let take = n_want.min(order.len());
    let lt = linv.transpose();
    let mut values = Vec::with_capacity(take);
    let mut vectors = Vec::with_capacity(take);
    for &i in &order[..take] {
        values.push(eig.eigenvalues[i]);
        let phi = &lt * eig.eigenvectors.column(i);
        vectors.push(phi.iter().copied().collect());
    }
    Ok((values, vectors, 0))
}

/// Deterministic pseudo-random start vectors (splitmix64).
fn start_block(n: usize, p: usize) -> Vec<Vec<f64>> {
    let mut state: u64 = 0x005E_ED0F_F4A3_u64;
    let mut next = || {
        state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^= z >> 31;
        (z >> 11) as f64 / (1u64 << 53) as f64 - 0.5
    };
    (0..p).map(|_| (0..n).map(|_| next()).collect()).collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// M-orthonormalizes `v` against the basis (two passes); returns `None`
/// when `v` is numerically dependent.
fn m_orthonormalize(
    sys: &ReducedSystem,
    basis: &[Vec<f64>],
    m_basis: &[Vec<f64>],
    mut v: Vec<f64>,
) -> Option<(Vec<f64>, Vec<f64>)> {
    let mut mv = sys.m.mul_vec(&v);
    let start = dot(&v, &mv).max(0.0).sqrt();
    if !(start > 0.0) {
        return None;
    }
    for _ in 0..2 {
        for (b, mb) in basis.iter().zip(m_basis) {
            let c = dot(mb, &v);
            for (x, y) in v.iter_mut().zip(b) {
                *x -= c * y;
            }
        }
        mv = sys.m.mul_vec(&v);
    }
    let nrm = dot(&v, &mv).max(0.0).sqrt();
    if !(nrm > 1e-10 * start) {
        return None;
    }
    v.iter_mut().for_each(|x| *x /= nrm);
    mv.iter_mut().for_each(|x| *x /= nrm);
    Some((v, mv))
}

fn krylov_pairs(sys: &ReducedSystem, n_want: usize, opts: &ModalOptions) -> Result<Pairs> {
    let n = sys.k.n();
    let shifted = sys.k.add_scaled(&sys.m, -opts.shift);
    let factor = EnvelopeCholesky::factor(&shifted).map_err(|e| match e {
        Error::InsufficientlyConstrained { .. } if opts.shift < 0.0 => Error::MassNotPositiveDefinite,
        other => other,
    })?;
    // (K − σM)⁻¹ M v with one refinement step: the shifted pencil of a
    // stiff frame is badly conditioned
    let apply = |v: &Vec<f64>| -> Vec<f64> {
        let b = sys.m.mul_vec(v);
        let mut x = factor.solve(&b);
        let ax = shifted.mul_vec(&x);
        let r: Vec<f64> = b.iter().zip(&ax).map(|(p, q)| p - q).collect();
        for (xi, di) in x.iter_mut().zip(factor.solve(&r)) {
            *xi += di;
        }
        x
    };
    let p = (n_want + opts.block_size).min(n);
    let mut block = start_block(n, p);
    let mut previous: Vec<f64> = Vec::new();
    let rigid = (2.0 * std::f64::consts::PI * opts.rigid_threshold).powi(2);
    let sigma = opts.shift;

    for restart in 0..opts.max_restarts {
        let mut basis: Vec<Vec<f64>> = Vec::new();
        let mut m_basis: Vec<Vec<f64>> = Vec::new();
        let mut current = block.clone();
        for step in 0..opts.krylov_steps {
            if step > 0 {
                let prev = &basis[basis.len() - current.len()..];
                current = exec::map(opts.execution, prev, |v| apply(v));
            }
            let mut added = Vec::new();
            for v in current {
                if let Some((q, mq)) = m_orthonormalize(sys, &basis, &m_basis, v) {
                    basis.push(q.clone());
                    m_basis.push(mq);
                    added.push(q);
                }
                if basis.len() >= n {
                    break;
                }
            }
            current = added;
            if current.is_empty() || basis.len() >= n {
                break;
            }
        }

        // Rayleigh-Ritz on (K, M) over the M-orthonormal basis
        let kb = exec::map(opts.execution, &basis, |v| sys.k.mul_vec(v));
        let q = basis.len();
        let mut kp = DMatrix::zeros(q, q);
        let mut mp = DMatrix::zeros(q, q);
        for i in 0..q {
            for j in 0..=i {
                let kv = 0.5 * (dot(&basis[i], &kb[j]) + dot(&basis[j], &kb[i]));
                let mv = 0.5 * (dot(&basis[i], &m_basis[j]) + dot(&basis[j], &m_basis[i]));
                kp[(i, j)] = kv;
                kp[(j, i)] = kv;
                mp[(i, j)] = mv;
                mp[(j, i)] = mv;
            }
        }
        let chol = mp.cholesky().ok_or(Error::MassNotPositiveDefinite)?;
        let l = chol.l();
        let linv = l
            .clone()
            .solve_lower_triangular(&DMatrix::identity(q, q))
            .ok_or(Error::MassNotPositiveDefinite)?;
        let c = &linv * &kp * linv.transpose();
        let eig = SymmetricEigen::new((&c + c.transpose()) * 0.5);
        let mut order: Vec<usize> = (0..q).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let lt = linv.transpose();
        let ritz = |i: usize| -> (f64, Vec<f64>) {
            let y: DVector<f64> = &lt * eig.eigenvectors.column(i);
            let mut phi = vec![0.0; n];
            for (k, b) in basis.iter().enumerate() {
                let c = y[k];
                for (x, v) in phi.iter_mut().zip(b) {
                    *x += c * v;
                }
            }
            (eig.eigenvalues[i], phi)
        };
        let keep = p.min(q);
        let pairs: Vec<(f64, Vec<f64>)> = exec::map(opts.execution, &order[..keep], |&i| ritz(i));

        let want = n_want.min(keep);
        // Ritz values settle long before Ritz vectors do: the inverse is
        // only accurate to about cond·ε, and that error is amplified in any
        // residual on (K, M). Rigid-body values are roundoff around zero
        // and only need to stay below the rigid threshold.
        let values: Vec<f64> = pairs[..want].iter().map(|(l, _)| *l).collect();
        let converged: Vec<bool> = if previous.len() == want {
            values
                .iter()
                .zip(&previous)
                .map(|(&a, &b)| {
                    (a.abs() < rigid && b.abs() < rigid) || (a - b).abs() <= opts.tolerance * (a.abs() + sigma.abs())
                })
                .collect()
        } else {
            vec![false]
        };
        previous = values;
        if converged.iter().all(|&c| c) {
            let (values, vectors) = pairs.into_iter().take(want).unzip();
            return Ok((values, vectors, restart + 1));
        }
        block = pairs.into_iter().map(|(_, v)| v).collect();
    }
    Err(Error::NoConvergence {
        iterations: opts.max_restarts,
    })
}

/// Label from the antisymmetric share of vertical motion over mirror node
/// pairs `(x, y, z) ↔ (x, −y, z)`: above 0.6 torsion, below 0.4 bending,
/// otherwise mixed. Returns the label and the share.
pub fn classify_mode(mesh: &Mesh, shape: &[f64]) -> (ModeClass, f64) {
    let key = |p: &[f64; 3]| {
        let q = |v: f64| (v * 1e6).round() as i64;
        (q(p[0]), q(p[1]), q(p[2]))
    };
    let lookup: std::collections::HashMap<(i64, i64, i64), usize> =
        mesh.positions.iter().enumerate().map(|(i, p)| (key(p), i)).collect();
    let (mut sym, mut anti) = (0.0, 0.0);
    for (i, p) in mesh.positions.iter().enumerate() {
        if p[1] <= 1e-6 {
            continue;
        }
        if let Some(&j) = lookup.get(&key(&[p[0], -p[1], p[2]])) {
            let (a, b) = (shape[6 * i + 2], shape[6 * j + 2]);
            sym += (0.5 * (a + b)).powi(2);
            anti += (0.5 * (a - b)).powi(2);
        }
    }
    let share = if sym + anti > 0.0 { anti / (sym + anti) } else { 0.5 };
    let class = if share > 0.6 {
        ModeClass::Torsion
    } else if share < 0.4 {
        ModeClass::Bending
    } else {
        ModeClass::Mixed
    };
    (class, share)
}

/// Modal analysis of an assembled system under optional constraints.
pub fn modal_on_system(system: &GlobalSystem, constraints: &[ConstraintSpec], opts: &ModalOptions) -> Result<ModeSet> {
    if opts.n_modes == 0 {
        return Err(Error::invalid("n_modes", "must be >= 1"));
    }
    let reduced = apply_constraints(system, constraints)?;
    let n = reduced.k.n();
    let n_want = (opts.n_modes + 6).min(n);
    let dense = n < DENSE_LIMIT && !opts.force_iterative;
    let (values, vectors, iterations) = if dense {
        dense_pairs(&reduced, n_want)?
    } else {
        krylov_pairs(&reduced, n_want, opts)?
    };
    let threshold = (2.0 * std::f64::consts::PI * opts.rigid_threshold).powi(2);
    let modes: Vec<Mode> = values
        .iter()
        .zip(vectors)
        .map(|(&lam, v)| {
            let kphi = reduced.k.mul_vec(&v);
            let mphi = reduced.m.mul_vec(&v);
            let r: Vec<f64> = kphi.iter().zip(&mphi).map(|(a, b)| a - lam * b).collect();
            let kn = norm(&kphi);
            let shape = reduced.dofs.expand(&v);
            let (class, antisymmetry) = classify_mode(&system.mesh, &shape);
            Mode {
                frequency: lam.max(0.0).sqrt() / (2.0 * std::f64::consts::PI),
                eigenvalue: lam,
                residual: if kn > 0.0 { norm(&r) / kn } else { 0.0 },
                shape,
                class,
                antisymmetry,
            }
        })
        .collect();
    let rigid_mode_count = values.iter().take_while(|&&l| l < threshold).count();
    Ok(ModeSet {
        modes,
        rigid_mode_count,
        dense,
        iterations,
    })
}

/// Assembles the model and runs [`modal_on_system`].
pub fn modal_analysis(
    model: &FrameModel,
    constraints: &[ConstraintSpec],
    opts: &ModalOptions,
    assembly: &AssemblyOptions,
) -> Result<ModeSet> {
    let system = assemble(model, assembly)?;
    modal_on_system(&system, constraints, opts)
}

/// Lowest free-free frequency above the rigid threshold, Hz.
pub fn first_flexible_frequency(model: &FrameModel, assembly: &AssemblyOptions) -> Result<f64> {
    let opts = ModalOptions {
        n_modes: 1,
        execution: assembly.execution,
        ..Default::default()
    };
    let set = modal_analysis(model, &[], &opts, assembly)?;
    set.first_flexible()
        .ok_or_else(|| Error::invalid("modal analysis", "no flexible mode found"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::parse_model;

    fn beam(n_elem_mm: f64) -> FrameModel {
        let text = format!(
            r#"{{
            "meta": {{ "wheelbase": 2700, "track_width": 1650, "element_length": {n_elem_mm} }},
            "materials": {{ "steel": {{ "youngs_modulus": 210000, "poisson_ratio": 0.3, "density": 7850 }} }},
            "sections": {{ "s40": {{ "width": 40, "height": 40, "thickness": 1.0 }} }},
            "nodes": [ {{ "id": 1, "position": [0, 0, 0] }}, {{ "id": 2, "position": [2000, 0, 0] }} ],
            "members": [ {{ "id": 1, "nodes": [1, 2], "section": "s40", "material": "steel",
                           "orientation": [0, 0, 1], "module": "deck" }} ]
        }}"#
        );
        parse_model(&text).unwrap()
    }

    #[test]
    fn single_member_has_six_rigid_modes() {
        let set = modal_analysis(
            &beam(2000.0),
            &[],
            &ModalOptions::default(),
            &AssemblyOptions::default(),
        )
        .unwrap();
        assert_eq!(set.rigid_mode_count, 6);
        assert!(set.dense);
    }

    #[test]
    fn krylov_agrees_with_dense() {
        let model = beam(50.0);
        let asm = AssemblyOptions::default();
        let dense = modal_analysis(
            &model,
            &[],
            &ModalOptions {
                n_modes: 4,
                ..Default::default()
            },
            &asm,
        )
        .unwrap();
        let it = modal_analysis(
            &model,
            &[],
            &ModalOptions {
                n_modes: 4,
                force_iterative: true,
                ..Default::default()
            },
            &asm,
        )
        .unwrap();
        assert_eq!(it.rigid_mode_count, 6);
        for (a, b) in dense.flexible().iter().zip(it.flexible()).take(4) {
            assert!((a.frequency - b.frequency).abs() < 1e-7 * a.frequency);
        }
    }

    #[test]
    fn modes_are_mass_orthonormal() {
        let model = beam(100.0);
        let sys = assemble(&model, &AssemblyOptions::default()).unwrap();
        let set = modal_on_system(
            &sys,
            &[],
            &ModalOptions {
                force_iterative: true,
                ..Default::default()
            },
        )
        .unwrap();
        for a in &set.modes {
            for b in &set.modes {
                let mb = sys.m.mul_vec(&b.shape);
                let v = dot(&a.shape, &mb);
                let expect = if std::ptr::eq(a, b) { 1.0 } else { 0.0 };
                assert!((v - expect).abs() < 1e-6);
            }
        }
    }
}
