//! Beam element and modal oracles against closed-form Euler-Bernoulli
//! results, plus matrix properties.

mod common;

use common::{braced_box, rel, tube};
use proptest::prelude::*;
use spaceframe::assembly::{assemble, rigid_field, AssemblyOptions};
use spaceframe::modal::{modal_analysis, modal_on_system, ModalOptions};
use spaceframe::model::demo::demo_frame;
use spaceframe::model::{ConstraintSpec, Dof, LoadSpec};
use spaceframe::section::RectHollowSection;
use spaceframe::statics::{load_vector, solve_static};

const EI: f64 = 210e9 * 3.9572e-8;
const RHO_A: f64 = 7850.0 * 156e-6;

fn euler_bernoulli() -> AssemblyOptions {
    AssemblyOptions {
        shear: false,
        ..Default::default()
    }
}

fn cantilever_tip(elements: usize, asm: &AssemblyOptions) -> f64 {
    let model = tube(1000.0, 1000.0 / elements as f64);
    let sys = assemble(&model, asm).unwrap();
    let fixed = [ConstraintSpec {
        node: 1,
        dofs: Dof::ALL.to_vec(),
    }];
    let load = [LoadSpec {
        node: 2,
        force: [0.0, 0.0, -100.0],
        moment: [0.0; 3],
    }];
    let f = load_vector(&sys, &load).unwrap();
    let r = solve_static(&sys, &fixed, &f).unwrap();
    r.displacements[6 * sys.mesh.node(2).unwrap() + 2].abs()
}

#[test]
fn section_matches_tube_constants() {
    let p = RectHollowSection::new(0.04, 0.04, 0.001).unwrap().properties();
    assert!(rel(p.area, 156e-6) < 1e-12);
    assert!(rel(p.iy, 3.9572e-8) < 1e-4);
    assert!(rel(p.iz, 3.9572e-8) < 1e-4);
}

#[test]
fn cantilever_tip_deflection() {
    let exact = 100.0 * 1.0 / (3.0 * EI);
    assert!((exact * 1e3 - 4.011).abs() < 1e-3);
    for n in [4, 8, 16] {
        let d = cantilever_tip(n, &euler_bernoulli());
        assert!(rel(d, exact) < 1e-3, "{n} elements: {d} vs {exact}");
    }
}

#[test]
fn shear_flexibility_only_softens() {
    let eb = cantilever_tip(8, &euler_bernoulli());
    let tim = cantilever_tip(8, &AssemblyOptions::default());
    assert!(tim > eb);
    // slender tube: the shear share is well below one percent
    assert!(rel(tim, eb) < 1e-2);
}

#[test]
fn free_free_first_bending_frequency() {
    let model = tube(2000.0, 50.0);
    let set = modal_analysis(&model, &[], &ModalOptions::default(), &euler_bernoulli()).unwrap();
    let exact = 4.730041f64.powi(2) / (2.0 * std::f64::consts::PI) * (EI / (RHO_A * 2.0f64.powi(4))).sqrt();
    assert!((exact - 73.3).abs() < 0.1);
    assert_eq!(set.rigid_mode_count, 6);
    let f1 = set.first_flexible().unwrap();
    assert!(rel(f1, exact) < 0.01, "{f1} vs {exact}");
}

#[test]
fn demo_frame_has_six_rigid_modes() {
    let set = modal_analysis(
        &demo_frame(),
        &[],
        &ModalOptions::default(),
        &AssemblyOptions::default(),
    )
    .unwrap();
    assert_eq!(set.rigid_mode_count, 6);
    assert!(set.first_flexible().unwrap() > 1.0);
}

/// Eigenvalue interlacing under `r` added constraints:
/// λ_k(free) ≤ λ_k(constrained) ≤ λ_{k+r}(free), modes counted from the
/// lowest (rigid ones included).
#[test]
fn constraints_interlace_frequencies() {
    let model = demo_frame();
    let sys = assemble(&model, &AssemblyOptions::default()).unwrap();
    let pins = &model.constraints["bending"];
    let r: usize = pins.iter().map(|c| c.dofs.len()).sum();
    let free = modal_on_system(
        &sys,
        &[],
        &ModalOptions {
            n_modes: r,
            ..Default::default()
        },
    )
    .unwrap();
    let pinned = modal_on_system(
        &sys,
        pins,
        &ModalOptions {
            n_modes: 6,
            ..Default::default()
        },
    )
    .unwrap();
    assert_eq!(pinned.rigid_mode_count, 0);
    for (k, m) in pinned.modes.iter().take(6).enumerate() {
        let lo = free.modes[k].eigenvalue;
        let hi = free.modes[k + r].eigenvalue;
        assert!(m.eigenvalue >= lo * (1.0 - 1e-9) - 1e-6, "mode {k}");
        assert!(m.eigenvalue <= hi * (1.0 + 1e-9), "mode {k}: {} > {}", m.eigenvalue, hi);
    }
}

fn rotation(ax: f64, ay: f64, az: f64) -> impl Fn([f64; 3]) -> [f64; 3] {
    move |p: [f64; 3]| {
        let (s, c) = ax.sin_cos();
        let p = [p[0], c * p[1] - s * p[2], s * p[1] + c * p[2]];
        let (s, c) = ay.sin_cos();
        let p = [c * p[0] + s * p[2], p[1], -s * p[0] + c * p[2]];
        let (s, c) = az.sin_cos();
        [c * p[0] - s * p[1], s * p[0] + c * p[1], p[2]]
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn mass_row_sum_is_total_mass(
        lx in 300.0..1500.0f64, ly in 300.0..1200.0f64, lz in 200.0..800.0f64,
        w in 30.0..80.0f64, t in 0.6..2.0f64, axis in 0usize..3, lumped in proptest::bool::ANY,
    ) {
        let model = braced_box(lx, ly, lz, w, t);
        let asm = AssemblyOptions {
            mass: if lumped { spaceframe::element::MassKind::Lumped } else { Default::default() },
            ..Default::default()
        };
        let sys = assemble(&model, &asm).unwrap();
        let mut dir = [0.0; 3];
        dir[axis] = 1.0;
        let r = rigid_field(&sys.mesh, dir, [0.0; 3]);
        let mr = sys.m.mul_vec(&r);
        let carried: f64 = mr.iter().zip(&r).map(|(a, b)| a * b).sum();
        prop_assert!(rel(carried, model.total_mass()) < 1e-10);
    }

    #[test]
    fn frequencies_are_frame_invariant(
        ax in -3.0..3.0f64, ay in -3.0..3.0f64, az in -3.0..3.0f64,
        dx in -2000.0..2000.0f64, dz in -500.0..500.0f64,
    ) {
        let model = braced_box(1200.0, 800.0, 500.0, 40.0, 1.0);
        let rot = rotation(ax, ay, az);
        let moved = model.transformed(|p| {
            let q = rot(p);
            [q[0] + dx * 1e-3, q[1], q[2] + dz * 1e-3]
        });
        let opts = ModalOptions { n_modes: 6, ..Default::default() };
        let asm = AssemblyOptions::default();
        let a = modal_analysis(&model, &[], &opts, &asm).unwrap();
        let b = modal_analysis(&moved, &[], &opts, &asm).unwrap();
        prop_assert_eq!(b.rigid_mode_count, 6);
        for (x, y) in a.flexible().iter().zip(b.flexible()) {
            prop_assert!(rel(y.frequency, x.frequency) < 1e-8, "{} vs {}", y.frequency, x.frequency);
        }
    }

    #[test]
    fn unconstrained_frames_have_six_rigid_modes(
        lx in 400.0..1500.0f64, ly in 400.0..1200.0f64, lz in 200.0..800.0f64, w in 30.0..70.0f64,
    ) {
        let model = braced_box(lx, ly, lz, w, 1.0);
        let set = modal_analysis(&model, &[], &ModalOptions::default(), &AssemblyOptions::default()).unwrap();
        prop_assert_eq!(set.rigid_mode_count, 6);
    }
}
