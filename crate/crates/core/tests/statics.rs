//! Stiffness test procedures: hand cases for the torsion formulas and
//! equilibrium of the frame tests.

use proptest::prelude::*;
use spaceframe::assembly::AssemblyOptions;
use spaceframe::model::demo::demo_frame;
use spaceframe::statics::{
    bending_stiffness_test, torsional_stiffness_averaged, torsional_stiffness_literal, torsional_stiffness_test,
    BENDING_LOAD, TORSION_TORQUE,
};
use spaceframe::Error;

#[test]
fn torsion_hand_case() {
    let r = torsional_stiffness_averaged(1000.0, 1.65, 0.005, 0.005).unwrap();
    assert!((r.phi_d_deg - 0.3472).abs() < 1e-4);
    assert!((r.stiffness / 1e3 - 4.752).abs() / 4.752 < 1e-3, "{}", r.stiffness);
}

#[test]
fn bending_test_on_demo_frame() {
    let m = demo_frame();
    let b = bending_stiffness_test(&m, BENDING_LOAD, &AssemblyOptions::default()).unwrap();
    assert!((b.vertical_reaction - b.total_load).abs() <= 1e-6 * b.total_load);
    assert!(b.residual < 1e-9);
    assert!((b.stiffness - b.total_load / b.max_deflection).abs() < 1e-9 * b.stiffness);
}

#[test]
fn torsion_test_on_demo_frame() {
    let m = demo_frame();
    let t = torsional_stiffness_test(&m, TORSION_TORQUE, &AssemblyOptions::default()).unwrap();
    assert!((t.force * t.track - t.torque).abs() < 1e-9 * t.torque);
    assert!(t.v_d > 0.0 && t.v_p > 0.0);
    let ratio = t.literal_one_side / t.stiffness;
    assert!(ratio > 3.5 && ratio < 4.5, "{ratio}");
}

#[test]
fn stiffer_sections_stiffen_the_frame() {
    let m = demo_frame();
    let mut stiff = m.clone();
    for s in stiff.sections.values_mut() {
        s.thickness *= 1.5;
    }
    let asm = AssemblyOptions::default();
    let a = bending_stiffness_test(&m, BENDING_LOAD, &asm).unwrap();
    let b = bending_stiffness_test(&stiff, BENDING_LOAD, &asm).unwrap();
    assert!(b.stiffness > a.stiffness);
}

#[test]
fn zero_deflection_is_reported() {
    assert_eq!(
        torsional_stiffness_averaged(1000.0, 1.65, 0.0, 0.0).unwrap_err(),
        Error::InfiniteStiffness
    );
    assert_eq!(
        torsional_stiffness_literal(1000.0, 1.65, 0.0).unwrap_err(),
        Error::InfiniteStiffness
    );
}

proptest! {
    #[test]
    fn symmetric_case_reduces_to_single_angle(f in 1.0..1e5f64, track in 0.5..2.5f64, v in 1e-6..0.05f64) {
        let r = torsional_stiffness_averaged(f, track, v, v).unwrap();
        let phi = (v / (track / 2.0)).atan().to_degrees();
        prop_assert_eq!(r.phi_d_deg, r.phi_p_deg);
        prop_assert_eq!(r.stiffness, f * track / phi);
    }

    #[test]
    fn literal_form_is_four_times_at_small_angles(f in 1.0..1e5f64, track in 0.5..2.5f64, v in 1e-6..1e-4f64) {
        let canonical = torsional_stiffness_averaged(f, track, v, v).unwrap().stiffness;
        let literal = torsional_stiffness_literal(f, track, v).unwrap();
        prop_assert!((literal / canonical - 4.0).abs() < 0.02);
    }

    #[test]
    fn bending_reactions_balance_any_load(load in 100.0..50_000.0f64) {
        let m = demo_frame();
        let b = bending_stiffness_test(&m, load, &AssemblyOptions::default()).unwrap();
        prop_assert!((b.vertical_reaction - load).abs() <= 1e-6 * load);
        // linear: stiffness does not depend on the load level
        let k0 = bending_stiffness_test(&m, BENDING_LOAD, &AssemblyOptions::default()).unwrap().stiffness;
        prop_assert!((b.stiffness - k0).abs() <= 1e-8 * k0);
    }
}
