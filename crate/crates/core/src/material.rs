//! Johnson-Cook flow stress and the plateau crush-force law derived from it.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::MaterialSpec;
use crate::section::RectHollowSection;

/// Johnson-Cook constants, SI (stresses in Pa, rate in 1/s).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JcParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub n: f64,
    pub m: f64,
    pub ref_strain_rate: f64,
}

impl JcParams {
    /// DP600 dual-phase steel, reference rate 1/s.
    pub const DP600: JcParams = JcParams {
        a: 350.0e6,
        b: 902.0e6,
        c: 0.014,
        n: 0.189,
        m: 1.23,
        ref_strain_rate: 1.0,
    };

    pub fn check(&self) -> Result<()> {
        let ok = self.a > 0.0
            && self.b > 0.0
            && self.c >= 0.0
            && self.n >= 0.0
            && self.m > 0.0
            && self.ref_strain_rate > 0.0
            && [self.a, self.b, self.c, self.n, self.m, self.ref_strain_rate]
                .iter()
                .all(|v| v.is_finite());
        if ok {
            Ok(())
        } else {
            Err(Error::invalid(
                "Johnson-Cook parameters",
                "require A, B, m, rate0 > 0 and C, n >= 0",
            ))
        }
    }

    /// Strain-rate bracket `1 + C ln(rate / rate0)`.
    pub fn rate_factor(&self, strain_rate: f64) -> Result<f64> {
        if !(strain_rate > 0.0) {
            return Err(Error::invalid(
                "strain rate",
                format!("{strain_rate} must be > 0 (logarithm domain)"),
            ));
        }
        if self.c == 0.0 {
            return Ok(1.0);
        }
        Ok(1.0 + self.c * (strain_rate / self.ref_strain_rate).ln())
    }

    /// `[A + B ε^n] [1 + C ln(ε̇/ε̇0)] [1 - T*^m]`, Pa.
    pub fn flow_stress(&self, plastic_strain: f64, strain_rate: f64, homologous_temp: f64) -> Result<f64> {
        if !(plastic_strain >= 0.0) || !plastic_strain.is_finite() {
            return Err(Error::invalid(
                "plastic strain",
                format!("{plastic_strain} must be >= 0"),
            ));
        }
        if !(0.0..=1.0).contains(&homologous_temp) {
            return Err(Error::invalid(
                "homologous temperature",
                format!("{homologous_temp} outside [0, 1]"),
            ));
        }
        let hardening = if plastic_strain == 0.0 {
            self.a
        } else {
            self.a + self.b * plastic_strain.powf(self.n)
        };
        let rate = self.rate_factor(strain_rate)?;
        let thermal = if homologous_temp == 0.0 {
            1.0
        } else {
            1.0 - homologous_temp.powf(self.m)
        };
        Ok(hardening * rate * thermal)
    }
}

/// Tuning of the reduced-order crush law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrushSettings {
    /// Fraction of the fully plastic squash load a folding tube sustains.
    pub efficiency: f64,
    /// Effective plastic strain at which the flow stress is evaluated.
    pub reference_strain: f64,
    /// Crush fraction of the cell length at which the tube locks up.
    pub densification: f64,
}

impl Default for CrushSettings {
    fn default() -> Self {
        Self {
            efficiency: 0.25,
            reference_strain: 0.3,
            densification: 0.7,
        }
    }
}

/// Axial crush behavior of one tube over one cell length.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrushLaw {
    /// Section area, m².
    pub area: f64,
    /// Elastic pre-crush stiffness EA/L for the cell length, N/m.
    pub stiffness: f64,
    /// η·A_section, multiplied by the flow stress to give the plateau.
    pub plateau_scale: f64,
    pub reference_strain: f64,
    pub densification: f64,
    pub jc: JcParams,
}

impl CrushLaw {
    /// Plateau force at a crush strain rate, N. Rates below the reference
    /// rate are clamped so the plateau never drops below its static value.
    pub fn plateau(&self, strain_rate: f64) -> f64 {
        let rate = strain_rate.max(self.jc.ref_strain_rate);
        let sigma = self
            .jc
            .flow_stress(self.reference_strain, rate, 0.0)
            .expect("crush law parameters validated at construction");
        self.plateau_scale * sigma
    }
}

/// Builds the plateau crush law of `section` over a cell of `cell_length`.
pub fn crush_law(
    section: &RectHollowSection,
    material: &MaterialSpec,
    cell_length: f64,
    settings: &CrushSettings,
) -> Result<CrushLaw> {
    if !(settings.efficiency > 0.0 && settings.efficiency <= 1.0) {
        return Err(Error::invalid(
            "crush efficiency",
            format!("{} outside (0, 1]", settings.efficiency),
        ));
    }
    if !(settings.densification > 0.0 && settings.densification < 1.0) {
        return Err(Error::invalid(
            "densification fraction",
            format!("{} outside (0, 1)", settings.densification),
        ));
    }
    if !(settings.reference_strain >= 0.0) {
        return Err(Error::invalid("reference strain", "must be >= 0"));
    }
    if !(cell_length > 0.0) {
        return Err(Error::invalid("cell length", "must be > 0"));
    }
    let jc = material.jc.ok_or_else(|| {
        Error::invalid(
            format!("material {}", material.name),
            "Johnson-Cook parameters required for crush analysis",
        )
    })?;
    jc.check()?;
    section.check()?;
    let area = section.properties().area;
    Ok(CrushLaw {
        area,
        stiffness: material.youngs_modulus * area / cell_length,
        plateau_scale: settings.efficiency * area,
        reference_strain: settings.reference_strain,
        densification: settings.densification,
        jc,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    const JC: JcParams = JcParams::DP600;

    fn dp600() -> MaterialSpec {
        MaterialSpec {
            name: "DP600".into(),
            youngs_modulus: 210e9,
            poisson_ratio: 0.3,
            density: 7850.0,
            jc: Some(JC),
        }
    }

    #[test]
    fn yield_at_reference_state() {
        assert_eq!(JC.flow_stress(0.0, 1.0, 0.0).unwrap(), 350.0e6);
    }

    #[test]
    fn hardened_value_by_hand() {
        // 350 + 902 * 0.1^0.189 = 933.72 MPa
        let s = JC.flow_stress(0.1, 1.0, 0.0).unwrap();
        assert_relative_eq!(s / 1e6, 933.72, max_relative = 1e-5);
    }

    #[test]
    fn rate_bracket_at_e() {
        let f = JC.rate_factor(std::f64::consts::E).unwrap();
        assert!((f - 1.014).abs() < 1e-15);
    }

    #[test]
    fn melt_limit_and_domain_errors() {
        assert_eq!(JC.flow_stress(0.2, 5.0, 1.0).unwrap(), 0.0);
        assert!(JC.flow_stress(0.1, 0.0, 0.0).is_err());
        assert!(JC.flow_stress(0.1, -1.0, 0.0).is_err());
        assert!(JC.flow_stress(-0.1, 1.0, 0.0).is_err());
        assert!(JC.flow_stress(0.1, 1.0, 1.5).is_err());
    }

    #[test]
    fn squash_load_of_40x1_tube() {
        let sec = RectHollowSection::new(0.04, 0.04, 0.001).unwrap();
        let settings = CrushSettings {
            efficiency: 1.0,
            reference_strain: 0.0,
            densification: 0.7,
        };
        let law = crush_law(&sec, &dp600(), 0.25, &settings).unwrap();
        assert_relative_eq!(law.plateau(1.0), 54_600.0, max_relative = 1e-12);
        assert_relative_eq!(law.stiffness, 210e9 * 156e-6 / 0.25, max_relative = 1e-12);
    }

    #[test]
    fn zero_efficiency_rejected() {
        let sec = RectHollowSection::new(0.04, 0.04, 0.001).unwrap();
        let settings = CrushSettings {
            efficiency: 0.0,
            ..Default::default()
        };
        assert!(crush_law(&sec, &dp600(), 0.25, &settings).is_err());
    }

    proptest! {
        #[test]
        fn monotone_in_strain_rate_and_temperature(
            e1 in 0.0f64..1.0, de in 0.0f64..1.0,
            r1 in 1e-3f64..1e4, dr in 0.0f64..1e3,
            t1 in 0.0f64..0.9, dt in 0.0f64..0.09,
        ) {
            let base = JC.flow_stress(e1, r1, t1).unwrap();
            prop_assert!(JC.flow_stress(e1 + de, r1, t1).unwrap() >= base);
            prop_assert!(JC.flow_stress(e1, r1 + dr, t1).unwrap() >= base);
            prop_assert!(JC.flow_stress(e1, r1, t1 + dt).unwrap() <= base);
        }

        #[test]
        fn zero_rate_coefficient_is_rate_free(rate in 1e-6f64..1e6) {
            let jc = JcParams { c: 0.0, ..JC };
            prop_assert_eq!(jc.rate_factor(rate).unwrap(), 1.0);
        }

        #[test]
        fn plateau_increases_with_rate(r in 1.0f64..1e3, dr in 1e-3f64..1e3) {
            let sec = RectHollowSection::new(0.05, 0.05, 0.001).unwrap();
            let law = crush_law(&sec, &dp600(), 0.2, &CrushSettings::default()).unwrap();
            prop_assert!(law.plateau(r + dr) > law.plateau(r));
        }
    }

    #[test]
    fn continuous_at_zero_strain() {
        let s0 = JC.flow_stress(0.0, 1.0, 0.0).unwrap();
        let s1 = JC.flow_stress(1e-40, 1.0, 0.0).unwrap();
        assert!((s1 - s0) / s0 < 1e-4);
    }
}
