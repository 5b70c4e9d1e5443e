//! Johnson-Cook flow stress and the derived crush law.

use proptest::prelude::*;
use spaceframe::material::{crush_law, CrushSettings, JcParams};
use spaceframe::model::demo::demo_frame;
use spaceframe::section::RectHollowSection;

const DP600: JcParams = JcParams::DP600;

#[test]
fn quasi_static_yield_is_a() {
    assert_eq!(DP600.flow_stress(0.0, 1.0, 0.0).unwrap(), 350.0e6);
}

#[test]
fn hardened_stress_by_hand() {
    let s = DP600.flow_stress(0.1, 1.0, 0.0).unwrap();
    let hand = 350.0e6 + 902.0e6 * 0.1f64.powf(0.189);
    assert_eq!(s, hand);
    assert!((s / 933.7e6 - 1.0).abs() < 1e-3, "{s}");
}

#[test]
fn rate_bracket_at_e() {
    assert_eq!(DP600.rate_factor(std::f64::consts::E).unwrap(), 1.014);
}

#[test]
fn invalid_inputs_are_rejected() {
    assert!(DP600.rate_factor(0.0).is_err());
    assert!(DP600.flow_stress(-0.1, 1.0, 0.0).is_err());
    assert!(DP600.flow_stress(0.1, 1.0, 1.5).is_err());
    let bad = JcParams { a: -1.0, ..DP600 };
    assert!(bad.check().is_err());
}

#[test]
fn melt_temperature_removes_strength() {
    assert_eq!(DP600.flow_stress(0.2, 10.0, 1.0).unwrap(), 0.0);
}

#[test]
fn crush_plateau_scales_with_rate_and_area() {
    let m = demo_frame();
    let mat = m.materials.values().next().unwrap();
    let settings = CrushSettings::default();
    let thin = RectHollowSection::new(0.05, 0.05, 0.001).unwrap();
    let thick = RectHollowSection::new(0.05, 0.05, 0.002).unwrap();
    let a = crush_law(&thin, mat, 0.3, &settings).unwrap();
    let b = crush_law(&thick, mat, 0.3, &settings).unwrap();
    assert!(b.plateau(1.0) > 1.9 * a.plateau(1.0));
    assert!(a.plateau(100.0) > a.plateau(1.0));
    // below the reference rate the static plateau holds
    assert_eq!(a.plateau(1e-6), a.plateau(1.0));
    assert!(crush_law(&thin, mat, 0.0, &settings).is_err());
}

proptest! {
    #[test]
    fn flow_stress_is_monotone(e1 in 0.0..1.0f64, de in 0.0..1.0f64, r1 in 1.0..1e3f64, dr in 0.0..1e3f64) {
        let s = |e: f64, r: f64| DP600.flow_stress(e, r, 0.0).unwrap();
        prop_assert!(s(e1 + de, r1) >= s(e1, r1));
        prop_assert!(s(e1, r1 + dr) >= s(e1, r1));
    }
}
