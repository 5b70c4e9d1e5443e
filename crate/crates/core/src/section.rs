//! Cross-section properties of thin-walled rectangular hollow profiles.
//!
//! Local axes follow the beam element convention: the section height `h`
//! runs along local y, the width `b` along local z (the side of the member
//! orientation vector). `I_z` therefore governs deflection in the local
//! x-y plane.
//! Corners are sharp; the torsion constant is the single-cell Bredt value.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Outer dimensions and wall thickness of a rectangular tube, in meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RectHollowSection {
    pub width: f64,
    pub height: f64,
    pub thickness: f64,
}

impl RectHollowSection {
    pub fn new(width: f64, height: f64, thickness: f64) -> Result<Self> {
        let s = Self {
            width,
            height,
            thickness,
        };
        s.check()?;
        Ok(s)
    }

    pub fn check(&self) -> Result<()> {
        let Self {
            width: b,
            height: h,
            thickness: t,
        } = *self;
        if !(b.is_finite() && h.is_finite() && t.is_finite()) {
            return Err(Error::invalid("section", "non-finite dimension"));
        }
        if b <= 0.0 || h <= 0.0 {
            return Err(Error::invalid("section", "b, h > 0 violated"));
        }
        if t <= 0.0 || t >= 0.5 * b.min(h) {
            return Err(Error::invalid("section", "t < min(b,h)/2 violated"));
        }
        Ok(())
    }

    /// Section with width and height exchanged.
    pub fn transposed(&self) -> Self {
        Self {
            width: self.height,
            height: self.width,
            thickness: self.thickness,
        }
    }

    pub fn properties(&self) -> SectionProperties {
        compute_properties(self)
    }
}

/// Geometric stiffness properties of a section (SI units).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SectionProperties {
    pub area: f64,
    /// Second moment about local y (deflection along local z).
    pub iy: f64,
    /// Second moment about local z (deflection along local y).
    pub iz: f64,
    pub torsion: f64,
    /// Shear area for deflection along local y: the two webs of height h.
    pub shear_area_y: f64,
    /// Shear area for deflection along local z: the two flanges of width b.
    pub shear_area_z: f64,
}

impl SectionProperties {
    pub fn polar(&self) -> f64 {
        self.iy + self.iz
    }
}

/// Area, bending inertias, Bredt torsion constant and wall shear areas.
pub fn compute_properties(section: &RectHollowSection) -> SectionProperties {
    let RectHollowSection {
        width: b,
        height: h,
        thickness: t,
    } = *section;
    let bi = b - 2.0 * t;
    let hi = h - 2.0 * t;
    let area = b * h - bi * hi;
    let iz = (b * h.powi(3) - bi * hi.powi(3)) / 12.0;
    let iy = (h * b.powi(3) - hi * bi.powi(3)) / 12.0;
    let enclosed = (b - t) * (h - t);
    let median_perimeter = 2.0 * ((b - t) + (h - t));
    let torsion = 4.0 * enclosed * enclosed * t / median_perimeter;
    SectionProperties {
        area,
        iy,
        iz,
        torsion,
        shear_area_y: 2.0 * h * t,
        shear_area_z: 2.0 * b * t,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn mm(b: f64, h: f64, t: f64) -> RectHollowSection {
        RectHollowSection::new(b * 1e-3, h * 1e-3, t * 1e-3).unwrap()
    }

    #[test]
    fn square_40x1_hand_values() {
        let p = mm(40.0, 40.0, 1.0).properties();
        // 1600 - 38^2
        assert_relative_eq!(p.area * 1e6, 156.0, max_relative = 1e-12);
        // (40^4 - 38^4) / 12
        assert_relative_eq!(p.iz * 1e12, 39_572.0, max_relative = 1e-12);
        assert_relative_eq!(p.iy, p.iz, max_relative = 1e-14);
        // 4 * 1521^2 * 1 / 156
        assert_relative_eq!(p.torsion * 1e12, 59_319.0, max_relative = 1e-12);
        assert_relative_eq!(p.shear_area_y * 1e6, 80.0, max_relative = 1e-12);
    }

    #[test]
    fn wall_thickness_limit_rejected() {
        let err = RectHollowSection::new(0.040, 0.040, 0.025).unwrap_err();
        assert!(err.to_string().contains("t < min(b,h)/2 violated"));
        assert!(RectHollowSection::new(0.040, 0.040, 0.0).is_err());
        assert!(RectHollowSection::new(-0.04, 0.040, 0.001).is_err());
    }

    #[test]
    fn degenerate_wall_vanishes() {
        let p = mm(40.0, 60.0, 1e-9).properties();
        assert!(p.area < 1e-12 && p.torsion < 1e-15);
    }

    #[test]
    fn thin_wall_area_matches_perimeter_times_t() {
        let s = mm(40.0, 40.0, 1.0);
        let p = s.properties();
        let approx_area = 2.0 * (s.width + s.height) * s.thickness;
        assert!((p.area - approx_area).abs() / p.area < 0.05);
    }

    proptest! {
        #[test]
        fn monotone_in_thickness(b in 40.0f64..70.0, h in 40.0f64..70.0, t in 0.5f64..3.0, dt in 0.01f64..1.0) {
            let p1 = mm(b, h, t).properties();
            let p2 = mm(b, h, t + dt).properties();
            prop_assert!(p2.area > p1.area);
            prop_assert!(p2.iy > p1.iy && p2.iz > p1.iz);
            prop_assert!(p2.torsion > p1.torsion);
        }

        #[test]
        fn transpose_swaps_inertias(b in 40.0f64..70.0, h in 40.0f64..70.0, t in 0.5f64..3.0) {
            let s = mm(b, h, t);
            let p = s.properties();
            let q = s.transposed().properties();
            prop_assert!((p.iy - q.iz).abs() <= 1e-12 * p.iy);
            prop_assert!((p.iz - q.iy).abs() <= 1e-12 * p.iz);
            prop_assert!((p.area - q.area).abs() <= 1e-12 * p.area);
            prop_assert!((p.torsion - q.torsion).abs() <= 1e-12 * p.torsion);
        }

        #[test]
        fn bounded_by_solid_and_polar(b in 40.0f64..70.0, h in 40.0f64..70.0, t in 0.5f64..3.0) {
            let s = mm(b, h, t);
            let p = s.properties();
            prop_assert!(p.iz <= s.width * s.height.powi(3) / 12.0);
            prop_assert!(p.iy <= s.height * s.width.powi(3) / 12.0);
            prop_assert!(p.torsion <= p.iy + p.iz);
        }
    }
}
