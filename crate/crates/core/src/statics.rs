//! Linear static solution and the bending and torsional stiffness tests.

use serde::Serialize;

use crate::assembly::{apply_constraints, assemble, AssemblyOptions, GlobalSystem};
use crate::error::{Error, Result};
use crate::model::{constraint_sets, groups, ConstraintSpec, Dof, FrameModel, LoadSpec};
use crate::sparse::{norm, EnvelopeCholesky};

/// Default total load of the bending test, N.
pub const BENDING_LOAD: f64 = 5036.0;
/// Default torque of the torsion test, N·m.
pub const TORSION_TORQUE: f64 = 1000.0;

#[derive(Debug, Clone, PartialEq)]
pub struct StaticResult {
    /// Full displacement vector (m, rad), zero at constrained DOFs.
    pub displacements: Vec<f64>,
    /// `(full dof, reaction)` at every constrained DOF, N or N·m.
    pub reactions: Vec<(usize, f64)>,
    /// Largest |Uz| over all mesh nodes and the mesh node carrying it.
    pub max_vertical: f64,
    pub max_vertical_node: usize,
    /// `‖K u − f‖ / ‖f‖` on the free DOFs.
    pub residual: f64,
}

/// Builds the full load vector of a load list.
pub fn load_vector(system: &GlobalSystem, loads: &[LoadSpec]) -> Result<Vec<f64>> {
    let mut f = vec![0.0; system.mesh.n_dof()];
    for l in loads {
        let i = system.mesh.node(l.node)?;
        for d in 0..3 {
            f[6 * i + d] += l.force[d];
            f[6 * i + 3 + d] += l.moment[d];
        }
    }
    Ok(f)
}

/// Solves `K u = f` with the given constraints eliminated. A singular or
/// indefinite reduced stiffness is reported as insufficiently constrained.
pub fn solve_static(system: &GlobalSystem, constraints: &[ConstraintSpec], f: &[f64]) -> Result<StaticResult> {
    let reduced = apply_constraints(system, constraints)?;
    let fr = reduced.dofs.restrict(f);
    let chol = EnvelopeCholesky::factor(&reduced.k).map_err(|e| match e {
        Error::InsufficientlyConstrained { pivot } => Error::InsufficientlyConstrained {
            pivot: reduced.dofs.free[pivot],
        },
        other => other,
    })?;
    let mut u = chol.solve(&fr);
    // one step of iterative refinement
    let r: Vec<f64> = reduced.k.mul_vec(&u).iter().zip(&fr).map(|(a, b)| b - a).collect();
    let du = chol.solve(&r);
    for (x, d) in u.iter_mut().zip(du) {
        *x += d;
    }
    let ku = reduced.k.mul_vec(&u);
    let fnorm = norm(&fr);
    let residual = if fnorm > 0.0 {
        norm(&ku.iter().zip(&fr).map(|(a, b)| a - b).collect::<Vec<_>>()) / fnorm
    } else {
        0.0
    };

    let full = reduced.dofs.expand(&u);
    let kfull = system.k.mul_vec(&full);
    let reactions = reduced.dofs.eliminated.iter().map(|&g| (g, kfull[g] - f[g])).collect();
    let (max_vertical_node, max_vertical) = (0..system.mesh.n_nodes())
        .map(|i| (i, full[6 * i + 2].abs()))
        .fold((0, 0.0), |best, c| if c.1 > best.1 { c } else { best });
    Ok(StaticResult {
        displacements: full,
        reactions,
        max_vertical,
        max_vertical_node,
        residual,
    })
}

fn pin_translations(model: &FrameModel, group: &str) -> Result<Vec<ConstraintSpec>> {
    Ok(model
        .group(group)?
        .nodes
        .iter()
        .map(|&node| ConstraintSpec {
            node,
            dofs: vec![Dof::Ux, Dof::Uy, Dof::Uz],
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BendingResult {
    /// Total downward load, N.
    pub total_load: f64,
    /// Maximum vertical deflection over all nodes, m.
    pub max_deflection: f64,
    pub max_deflection_position: [f64; 3],
    /// K_B, N/m.
    pub stiffness: f64,
    /// Σ vertical reactions, N.
    pub vertical_reaction: f64,
    pub residual: f64,
}

/// Bending test: all four springhouses pinned in Ux, Uy, Uz, the total
/// load split over the load-point group by its fractions (uniform when
/// absent), `K_B = F / U_max`. A `bending` constraint set in the model
/// replaces the default springhouse pins.
pub fn bending_stiffness_test(model: &FrameModel, total_load: f64, opts: &AssemblyOptions) -> Result<BendingResult> {
    let system = assemble(model, opts)?;
    bending_on_system(model, &system, total_load)
}

pub fn bending_on_system(model: &FrameModel, system: &GlobalSystem, total_load: f64) -> Result<BendingResult> {
    let constraints = match model.constraints.get(constraint_sets::BENDING) {
        Some(set) => set.clone(),
        None => {
            let mut c = pin_translations(model, groups::FRONT_SPRINGHOUSES)?;
            c.extend(pin_translations(model, groups::REAR_SPRINGHOUSES)?);
            c
        }
    };
    let points = model.group(groups::BENDING_LOAD_POINTS)?;
    if points.nodes.is_empty() {
        return Err(Error::invalid("bending load points", "group is empty"));
    }
    let fractions = points
        .fractions
        .clone()
        .unwrap_or_else(|| vec![1.0; points.nodes.len()]);
    let sum: f64 = fractions.iter().sum();
    let loads: Vec<LoadSpec> = points
        .nodes
        .iter()
        .zip(&fractions)
        .map(|(&node, w)| LoadSpec {
            node,
            force: [0.0, 0.0, -total_load * w / sum],
            moment: [0.0; 3],
        })
        .collect();
    let f = load_vector(system, &loads)?;
    let res = solve_static(system, &constraints, &f)?;
    if !(res.max_vertical > 0.0) {
        return Err(Error::InfiniteStiffness);
    }
    let vertical_reaction = res.reactions.iter().filter(|(g, _)| g % 6 == 2).map(|(_, r)| r).sum();
    Ok(BendingResult {
        total_load,
        max_deflection: res.max_vertical,
        max_deflection_position: system.mesh.positions[res.max_vertical_node],
        stiffness: total_load / res.max_vertical,
        vertical_reaction,
        residual: res.residual,
    })
}

/// Twist angles and torsional stiffness from two vertical deflections.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TorsionAngles {
    pub phi_d_deg: f64,
    pub phi_p_deg: f64,
    /// N·m/deg
    pub stiffness: f64,
}

/// `φ = atan(v / (B/2))` per side, `K_T = F·B / ((φ_d + φ_p)/2)` in
/// N·m/deg.
pub fn torsional_stiffness_averaged(force: f64, track: f64, v_d: f64, v_p: f64) -> Result<TorsionAngles> {
    if !(track > 0.0) {
        return Err(Error::invalid("track width", "must be > 0"));
    }
    if !(v_d >= 0.0 && v_p >= 0.0) {
        return Err(Error::invalid("deflections", "must be >= 0"));
    }
    if v_d == 0.0 && v_p == 0.0 {
        return Err(Error::InfiniteStiffness);
    }
    let phi_d = (v_d / (track / 2.0)).atan().to_degrees();
    let phi_p = (v_p / (track / 2.0)).atan().to_degrees();
    Ok(TorsionAngles {
        phi_d_deg: phi_d,
        phi_p_deg: phi_p,
        stiffness: force * track / ((phi_d + phi_p) / 2.0),
    })
}

/// The literal single-deflection form `F·B / atan(U / 2B)` in
/// N·m/deg. It disagrees with [`torsional_stiffness_averaged`] by about a
/// factor of four at small angles and is reported only as a flagged
/// secondary figure.
pub fn torsional_stiffness_literal(force: f64, track: f64, u_max: f64) -> Result<f64> {
    if !(track > 0.0) {
        return Err(Error::invalid("track width", "must be > 0"));
    }
    if !(u_max > 0.0) {
        return Err(Error::InfiniteStiffness);
    }
    Ok(force * track / (u_max / (2.0 * track)).atan().to_degrees())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TorsionResult {
    /// Vertical force at each front springhouse, N.
    pub force: f64,
    pub track: f64,
    /// F·B, N·m.
    pub torque: f64,
    pub v_d: f64,
    pub v_p: f64,
    pub phi_d_deg: f64,
    pub phi_p_deg: f64,
    /// Canonical K_T, N·m/deg.
    pub stiffness: f64,
    /// Literal single-deflection form with U_max = max(v_d, v_p).
    pub literal_one_side: f64,
    /// Literal single-deflection form with U_max = v_d + v_p.
    pub literal_both_sides: f64,
    pub residual: f64,
}

/// Torsion test: rear springhouses pinned in Ux, Uy, Uz (or the model's
/// `torsion` constraint set), ±F vertical at the front springhouses with
/// the couple `T = F·B`, K_T from their vertical deflections.
pub fn torsional_stiffness_test(model: &FrameModel, torque: f64, opts: &AssemblyOptions) -> Result<TorsionResult> {
    let system = assemble(model, opts)?;
    torsion_on_system(model, &system, torque)
}

pub fn torsion_on_system(model: &FrameModel, system: &GlobalSystem, torque: f64) -> Result<TorsionResult> {
    let track = model.meta.track_width;
    if !(track > 0.0) {
        return Err(Error::invalid("track width", "must be > 0"));
    }
    let front = &model.group(groups::FRONT_SPRINGHOUSES)?.nodes;
    if front.len() != 2 {
        return Err(Error::invalid(
            "front_springhouses",
            format!("torsion test needs 2 nodes, found {}", front.len()),
        ));
    }
    let constraints = match model.constraints.get(constraint_sets::TORSION) {
        Some(set) => set.clone(),
        None => pin_translations(model, groups::REAR_SPRINGHOUSES)?,
    };
    let force = torque / track;
    // the node at larger y is pushed up
    let y = |id: u32| model.node(id).map(|n| n.position[1]).ok_or(Error::UnknownNode(id));
    let (up, down) = if y(front[0])? >= y(front[1])? {
        (front[0], front[1])
    } else {
        (front[1], front[0])
    };
    let loads = [
        LoadSpec {
            node: up,
            force: [0.0, 0.0, force],
            moment: [0.0; 3],
        },
        LoadSpec {
            node: down,
            force: [0.0, 0.0, -force],
            moment: [0.0; 3],
        },
    ];
    let f = load_vector(system, &loads)?;
    let res = solve_static(system, &constraints, &f)?;
    let v_d = res.displacements[system.mesh.dof(up, Dof::Uz)?].abs();
    let v_p = res.displacements[system.mesh.dof(down, Dof::Uz)?].abs();
    let averaged = torsional_stiffness_averaged(force, track, v_d, v_p)?;
    Ok(TorsionResult {
        force,
        track,
        torque: force * track,
        v_d,
        v_p,
        phi_d_deg: averaged.phi_d_deg,
        phi_p_deg: averaged.phi_p_deg,
        stiffness: averaged.stiffness,
        literal_one_side: torsional_stiffness_literal(force, track, v_d.max(v_p))?,
        literal_both_sides: torsional_stiffness_literal(force, track, v_d + v_p)?,
        residual: res.residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn averaged_angle_hand_case() {
        let r = torsional_stiffness_averaged(1000.0, 1.65, 0.005, 0.005).unwrap();
        assert_relative_eq!(r.phi_d_deg, 0.347_242_9, max_relative = 1e-6);
        assert_relative_eq!(r.stiffness, 4751.717, max_relative = 1e-6);
    }

    #[test]
    fn averaged_angle_symmetric_case() {
        for v in [1e-4, 3e-3, 0.02] {
            let r = torsional_stiffness_averaged(500.0, 1.5, v, v).unwrap();
            let phi = (2.0 * v / 1.5f64).atan().to_degrees();
            assert_eq!(r.phi_d_deg, phi);
            assert_eq!(r.stiffness, 500.0 * 1.5 / phi);
        }
    }

    #[test]
    fn literal_form_is_four_times_at_small_angles() {
        let v = 1e-4;
        let averaged = torsional_stiffness_averaged(1000.0, 1.65, v, v).unwrap().stiffness;
        let lit = torsional_stiffness_literal(1000.0, 1.65, v).unwrap();
        assert_relative_eq!(lit / averaged, 4.0, max_relative = 1e-6);
    }

    #[test]
    fn zero_deflection_is_infinite_stiffness() {
        assert_eq!(
            torsional_stiffness_averaged(1.0, 1.65, 0.0, 0.0),
            Err(Error::InfiniteStiffness)
        );
        assert!(torsional_stiffness_averaged(1.0, 0.0, 1.0, 1.0).is_err());
    }
}
