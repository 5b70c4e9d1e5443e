//! Crash integrator oracles and scenario properties.

use proptest::prelude::*;
use spaceframe::crash::{
    energy_audit, explicit_integrate, run_all_scenarios, run_scenario, Barrier, CrashOptions, CrushCell, CrushChain,
    IntegrateOptions, Plateau, Scenario,
};
use spaceframe::model::demo::demo_frame;
use spaceframe::model::G;

fn single_cell(m: f64, k: f64, plateau: f64, v0: f64) -> CrushChain {
    CrushChain {
        scenario: Scenario::Frontal,
        masses: vec![m],
        cells: vec![CrushCell {
            length: 2.0,
            stiffness: k,
            plateau: Plateau::Fixed(plateau),
            densification: 0.9,
        }],
        barrier: Barrier::Rigid,
        vehicle_speed: v0,
        barrier_speed: 0.0,
        angle_deg: 0.0,
        intrusion_cells: 1,
    }
}

#[test]
fn elastic_impact_is_a_half_sine() {
    let (m, k, v0) = (1000.0, 1e6, 10.0);
    let h = explicit_integrate(&single_cell(m, k, 1e12, v0), &IntegrateOptions::new(0.2, 1e-4)).unwrap();
    let peak_force = v0 * (k * m).sqrt();
    assert!((peak_force / 1e3 - 316.2).abs() < 0.1);
    assert!((h.peak_deceleration * m / peak_force - 1.0).abs() < 0.01);
    assert!((h.peak_deceleration / G - 32.2).abs() < 0.35);
    // contact lasts half a period
    let contact: Vec<f64> = h
        .samples
        .iter()
        .filter(|s| s.cell_force[0] > 0.0)
        .map(|s| s.time)
        .collect();
    let duration = contact.last().unwrap() - contact.first().unwrap();
    let expect = std::f64::consts::PI * (m / k).sqrt();
    assert!((duration - expect).abs() < 2e-4, "{duration} vs {expect}");
}

#[test]
fn rigid_plastic_stop() {
    let (m, fp, v0) = (1000.0, 400e3, 15.278);
    let h = explicit_integrate(&single_cell(m, 1e10, fp, v0), &IntegrateOptions::new(0.09, 1e-4)).unwrap();
    let expect = m * v0 * v0 / (2.0 * fp);
    assert!((expect * 1e3 - 291.8).abs() < 0.1);
    assert!(
        (h.max_intrusion / expect - 1.0).abs() < 0.01,
        "{} vs {expect}",
        h.max_intrusion
    );
    let plateau = fp / m;
    assert!((h.peak_deceleration_raw / plateau - 1.0).abs() < 0.01);
    // the channel filter overshoots a square pulse by a few percent
    assert!(h.peak_deceleration >= plateau && h.peak_deceleration < 1.05 * plateau);
    assert!(energy_audit(&h) < 0.02);
}

#[test]
fn demo_scenarios_balance_energy() {
    let runs = run_all_scenarios(&demo_frame(), &CrashOptions::default()).unwrap();
    assert_eq!(runs.len(), 4);
    for r in &runs {
        assert!(
            r.metrics.energy_imbalance < 0.02,
            "{}: {}",
            r.metrics.scenario,
            r.metrics.energy_imbalance
        );
    }
}

#[test]
fn frontal_history_spans_ninety_ms() {
    let r = run_scenario(&demo_frame(), Scenario::Frontal, &CrashOptions::default()).unwrap();
    let h = r.histories.unwrap();
    let last = h.samples.last().unwrap().time;
    assert!((last - 0.09).abs() < 1e-9);
    assert!((h.samples[1].time - h.samples[0].time - 1e-4).abs() < 1e-12);
}

#[test]
fn halving_the_step_keeps_the_peak() {
    let m = demo_frame();
    for s in [Scenario::Frontal, Scenario::Rear, Scenario::Lateral] {
        let base = run_scenario(&m, s, &CrashOptions::default()).unwrap().metrics;
        let fine = run_scenario(
            &m,
            s,
            &CrashOptions {
                dt: Some(base.dt / 2.0),
                ..Default::default()
            },
        )
        .unwrap()
        .metrics;
        let change = (fine.peak_deceleration - base.peak_deceleration).abs() / base.peak_deceleration;
        assert!(change < 0.02, "{s}: {change}");
    }
}

#[test]
fn cell_count_override() {
    let m = demo_frame();
    let r = run_scenario(
        &m,
        Scenario::Frontal,
        &CrashOptions {
            n_cells: Some(6),
            ..Default::default()
        },
    )
    .unwrap();
    assert_eq!(r.chain.n_cells(), 6);
    assert_eq!(r.metrics.n_cells, 6);
}

#[test]
fn roof_is_quasi_static() {
    let r = run_scenario(&demo_frame(), Scenario::Roof, &CrashOptions::default()).unwrap();
    let roof = r.roof.unwrap();
    assert!(roof.intrusion.windows(2).all(|w| w[1] >= w[0]));
    assert_eq!(r.metrics.platen_velocity, Some(1.5e-3 / 60.0));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn chains_never_create_energy(
        n in 1usize..5, m in 200.0..1500.0f64, k in 1e6..1e8f64,
        plateau in 5e4..5e5f64, v0 in 2.0..20.0f64,
    ) {
        let chain = CrushChain {
            scenario: Scenario::Frontal,
            masses: vec![m / n as f64; n],
            cells: (0..n).map(|i| CrushCell {
                length: 0.4,
                stiffness: k,
                plateau: Plateau::Fixed(plateau * (1.0 + 0.3 * i as f64)),
                densification: 0.7,
            }).collect(),
            barrier: Barrier::Rigid,
            vehicle_speed: v0,
            barrier_speed: 0.0,
            angle_deg: 0.0,
            intrusion_cells: 1,
        };
        let h = explicit_integrate(&chain, &IntegrateOptions::new(0.09, 1e-3)).unwrap();
        prop_assert!(energy_audit(&h) < 0.02);
        // compression only: a cell never pulls
        prop_assert!(h.samples.iter().all(|s| s.cell_force.iter().all(|&f| f >= 0.0)));
    }
}
