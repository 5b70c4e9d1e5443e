//! Two-node shear-flexible 3D beam element.
//!
//! DOF order per node: `ux, uy, uz, rx, ry, rz`. Local x runs from node i
//! to node j, local y = v × x for the member orientation vector v, and
//! local z = x × y, so v lies in the local x-z plane (a member along
//! global X with v = Z has local axes equal to global axes). Bending in the x-y
//! plane uses `I_z` with the shear factor `Φ_y = 12 E I_z / (G A_sy L²)`,
//! bending in x-z uses `I_y` with `Φ_z = 12 E I_y / (G A_sz L²)`.

use nalgebra::{Matrix3, SMatrix, Vector3};

use crate::error::{Error, Result};
use crate::section::SectionProperties;

pub type Mat12 = SMatrix<f64, 12, 12>;

/// Elastic and inertial constants of one element.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamProps {
    pub youngs_modulus: f64,
    pub shear_modulus: f64,
    pub density: f64,
    pub section: SectionProperties,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MassKind {
    #[default]
    Consistent,
    Lumped,
}

/// Local stiffness. With `shear == false` both Φ vanish and the
/// Euler-Bernoulli element is recovered.
pub fn local_stiffness(p: &BeamProps, length: f64, shear: bool) -> Mat12 {
    let l = length;
    let s = &p.section;
    let e = p.youngs_modulus;
    let g = p.shear_modulus;
    let (phi_y, phi_z) = if shear {
        (
            12.0 * e * s.iz / (g * s.shear_area_y * l * l),
            12.0 * e * s.iy / (g * s.shear_area_z * l * l),
        )
    } else {
        (0.0, 0.0)
    };
    let mut k = Mat12::zeros();
    let mut put = |i: usize, j: usize, v: f64| {
        k[(i, j)] = v;
        k[(j, i)] = v;
    };

    let ea = e * s.area / l;
    put(0, 0, ea);
    put(0, 6, -ea);
    put(6, 6, ea);

    let gj = g * s.torsion / l;
    put(3, 3, gj);
    put(3, 9, -gj);
    put(9, 9, gj);

    // x-y plane: v (1, 7), θz (5, 11)
    let c = e * s.iz / ((1.0 + phi_y) * l.powi(3));
    put(1, 1, 12.0 * c);
    put(1, 5, 6.0 * l * c);
    put(1, 7, -12.0 * c);
    put(1, 11, 6.0 * l * c);
    put(5, 5, (4.0 + phi_y) * l * l * c);
    put(5, 7, -6.0 * l * c);
    put(5, 11, (2.0 - phi_y) * l * l * c);
    put(7, 7, 12.0 * c);
    put(7, 11, -6.0 * l * c);
    put(11, 11, (4.0 + phi_y) * l * l * c);

    // x-z plane: w (2, 8), θy (4, 10); couplings change sign
    let c = e * s.iy / ((1.0 + phi_z) * l.powi(3));
    put(2, 2, 12.0 * c);
    put(2, 4, -6.0 * l * c);
    put(2, 8, -12.0 * c);
    put(2, 10, -6.0 * l * c);
    put(4, 4, (4.0 + phi_z) * l * l * c);
    put(4, 8, 6.0 * l * c);
    put(4, 10, (2.0 - phi_z) * l * l * c);
    put(8, 8, 12.0 * c);
    put(8, 10, 6.0 * l * c);
    put(10, 10, (4.0 + phi_z) * l * l * c);
    k
}

/// Local mass matrix.
pub fn local_mass(p: &BeamProps, length: f64, kind: MassKind) -> Mat12 {
    let l = length;
    let s = &p.section;
    let rho = p.density;
    let m = rho * s.area * l;
    let mut out = Mat12::zeros();
    match kind {
        MassKind::Lumped => {
            let half = 0.5 * m;
            let end_rot = m * l * l / 24.0;
            for base in [0, 6] {
                for d in 0..3 {
                    out[(base + d, base + d)] = half;
                }
                out[(base + 3, base + 3)] = 0.5 * rho * s.polar() * l;
                out[(base + 4, base + 4)] = 0.5 * rho * s.iy * l + end_rot;
                out[(base + 5, base + 5)] = 0.5 * rho * s.iz * l + end_rot;
            }
        }
        MassKind::Consistent => {
            let mut put = |i: usize, j: usize, v: f64| {
                out[(i, j)] += v;
                if i != j {
                    out[(j, i)] += v;
                }
            };
            // axial and torsion
            put(0, 0, m / 3.0);
            put(0, 6, m / 6.0);
            put(6, 6, m / 3.0);
            let jm = rho * s.polar() * l;
            put(3, 3, jm / 3.0);
            put(3, 9, jm / 6.0);
            put(9, 9, jm / 3.0);

            // translational inertia, cubic shape functions
            let t = m / 420.0;
            // (v, θz) = (1, 5, 7, 11) sign +1; (w, θy) = (2, 4, 8, 10) sign -1
            for (a, b, c, d, sg) in [(1, 5, 7, 11, 1.0), (2, 4, 8, 10, -1.0)] {
                put(a, a, 156.0 * t);
                put(a, b, sg * 22.0 * l * t);
                put(a, c, 54.0 * t);
                put(a, d, -sg * 13.0 * l * t);
                put(b, b, 4.0 * l * l * t);
                put(b, c, sg * 13.0 * l * t);
                put(b, d, -3.0 * l * l * t);
                put(c, c, 156.0 * t);
                put(c, d, -sg * 22.0 * l * t);
                put(d, d, 4.0 * l * l * t);
            }

            // rotary inertia of the section
            for (a, b, c, d, sg, inertia) in [(1, 5, 7, 11, 1.0, s.iz), (2, 4, 8, 10, -1.0, s.iy)] {
                let r = rho * inertia / (30.0 * l);
                put(a, a, 36.0 * r);
                put(a, b, sg * 3.0 * l * r);
                put(a, c, -36.0 * r);
                put(a, d, sg * 3.0 * l * r);
                put(b, b, 4.0 * l * l * r);
                put(b, c, -sg * 3.0 * l * r);
                put(b, d, -l * l * r);
                put(c, c, 36.0 * r);
                put(c, d, -sg * 3.0 * l * r);
                put(d, d, 4.0 * l * l * r);
            }
        }
    }
    out
}

/// Rows are the local x, y, z axes in global coordinates.
pub fn local_axes(xi: [f64; 3], xj: [f64; 3], orientation: [f64; 3], member: u32) -> Result<(Matrix3<f64>, f64)> {
    let d = Vector3::new(xj[0] - xi[0], xj[1] - xi[1], xj[2] - xi[2]);
    let len = d.norm();
    if !(len > 1e-12) {
        return Err(Error::ZeroLength(member));
    }
    let ex = d / len;
    let v = Vector3::from(orientation);
    let vn = v.norm();
    let y = v.cross(&ex);
    if !(vn > 0.0) || y.norm() <= 1e-6 * vn {
        return Err(Error::SingularOrientation(member));
    }
    let ey = y.normalize();
    let ez = ex.cross(&ey);
    Ok((
        Matrix3::from_rows(&[ex.transpose(), ey.transpose(), ez.transpose()]),
        len,
    ))
}

/// 12x12 block-diagonal transformation `u_local = T u_global`.
pub fn transformation(axes: &Matrix3<f64>) -> Mat12 {
    let mut t = Mat12::zeros();
    for b in 0..4 {
        t.fixed_view_mut::<3, 3>(3 * b, 3 * b).copy_from(axes);
    }
    t
}

/// Global-frame stiffness and mass of one element.
pub fn global_matrices(
    p: &BeamProps,
    xi: [f64; 3],
    xj: [f64; 3],
    orientation: [f64; 3],
    member: u32,
    shear: bool,
    mass: MassKind,
) -> Result<(Mat12, Mat12)> {
    let (axes, len) = local_axes(xi, xj, orientation, member)?;
    let t = transformation(&axes);
    let k = t.transpose() * local_stiffness(p, len, shear) * t;
    let m = t.transpose() * local_mass(p, len, mass) * t;
    Ok((k, m))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::section::RectHollowSection;
    use approx::assert_relative_eq;

    fn props() -> BeamProps {
        let section = RectHollowSection::new(0.04, 0.04, 0.001).unwrap().properties();
        BeamProps {
            youngs_modulus: 210e9,
            shear_modulus: 210e9 / 2.6,
            density: 7850.0,
            section,
        }
    }

    #[test]
    fn axial_term_by_hand() {
        let k = local_stiffness(&props(), 1.0, true);
        assert_relative_eq!(k[(0, 0)], 3.276e7, max_relative = 1e-12);
        assert_relative_eq!(k[(3, 3)], 210e9 / 2.6 * props().section.torsion, max_relative = 1e-12);
    }

    #[test]
    fn euler_bernoulli_limit() {
        let p = props();
        let l = 0.7;
        let k = local_stiffness(&p, l, false);
        let ei = p.youngs_modulus * p.section.iz;
        assert_relative_eq!(k[(1, 1)], 12.0 * ei / l.powi(3), max_relative = 1e-12);
        assert_relative_eq!(k[(5, 5)], 4.0 * ei / l, max_relative = 1e-12);
        assert_relative_eq!(k[(5, 11)], 2.0 * ei / l, max_relative = 1e-12);
        // a very long element has negligible shear flexibility
        let long = local_stiffness(&p, 200.0, true);
        let eb = local_stiffness(&p, 200.0, false);
        assert_relative_eq!(long[(1, 1)], eb[(1, 1)], max_relative = 1e-6);
    }

    #[test]
    fn matrices_are_symmetric() {
        let p = props();
        for kind in [MassKind::Consistent, MassKind::Lumped] {
            let (k, m) =
                global_matrices(&p, [0.1, 0.2, 0.3], [0.5, -0.2, 0.9], [0.0, 0.0, 1.0], 1, true, kind).unwrap();
            assert!((k - k.transpose()).amax() <= 1e-12 * k.amax());
            assert!((m - m.transpose()).amax() <= 1e-12 * m.amax());
        }
    }

    #[test]
    fn vertical_orientation_swaps_bending_planes() {
        let p = props();
        let (k, _) = global_matrices(
            &p,
            [0.0; 3],
            [0.8, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            1,
            true,
            MassKind::Consistent,
        )
        .unwrap();
        let local = local_stiffness(&p, 0.8, true);
        assert_relative_eq!(k[(0, 0)], local[(0, 0)], max_relative = 1e-12);
        assert_relative_eq!(k[(2, 2)], local[(1, 1)], max_relative = 1e-12);
    }

    #[test]
    fn aligned_member_is_unrotated() {
        let p = props();
        let (k, m) = global_matrices(
            &p,
            [0.0; 3],
            [0.8, 0.0, 0.0],
            [0.0, 0.0, 1.0],
            1,
            true,
            MassKind::Consistent,
        )
        .unwrap();
        assert!((k - local_stiffness(&p, 0.8, true)).amax() <= 1e-9 * k.amax());
        assert!((m - local_mass(&p, 0.8, MassKind::Consistent)).amax() <= 1e-12);
    }

    #[test]
    fn rigid_motions_are_free_of_strain() {
        let p = props();
        let xi = [0.1, 0.2, 0.3];
        let xj = [0.5, -0.2, 0.9];
        let (k, _) = global_matrices(&p, xi, xj, [0.3, 0.1, 1.0], 1, true, MassKind::Consistent).unwrap();
        // translation along (1, 2, 3) and small rotation about z through the origin
        let mut tr = nalgebra::SVector::<f64, 12>::zeros();
        let mut rot = nalgebra::SVector::<f64, 12>::zeros();
        for (b, x) in [(0, xi), (6, xj)] {
            tr[b] = 1.0;
            tr[b + 1] = 2.0;
            tr[b + 2] = 3.0;
            rot[b] = -x[1];
            rot[b + 1] = x[0];
            rot[b + 5] = 1.0;
        }
        assert!((k * tr).norm() < 1e-9 * k.norm() * tr.norm());
        assert!((k * rot).norm() < 1e-9 * k.norm() * rot.norm());
    }

    #[test]
    fn consistent_mass_preserves_translation_inertia() {
        let p = props();
        let l = 0.9;
        let (_, m) = global_matrices(
            &p,
            [0.0; 3],
            [0.3, 0.6, l],
            [1.0, 0.0, 0.0],
            1,
            true,
            MassKind::Consistent,
        )
        .unwrap();
        let total = p.density * p.section.area * (0.09f64 + 0.36 + l * l).sqrt();
        for d in 0..3 {
            let mut e = nalgebra::SVector::<f64, 12>::zeros();
            e[d] = 1.0;
            e[d + 6] = 1.0;
            assert_relative_eq!((e.transpose() * m * e)[0], total, max_relative = 1e-12);
        }
    }

    #[test]
    fn singular_orientation_and_zero_length() {
        let p = props();
        assert!(matches!(
            global_matrices(
                &p,
                [0.0; 3],
                [1.0, 0.0, 0.0],
                [2.0, 0.0, 0.0],
                7,
                true,
                MassKind::Consistent
            ),
            Err(Error::SingularOrientation(7))
        ));
        assert!(matches!(
            global_matrices(&p, [0.0; 3], [0.0; 3], [0.0, 0.0, 1.0], 3, true, MassKind::Consistent),
            Err(Error::ZeroLength(3))
        ));
    }
}
