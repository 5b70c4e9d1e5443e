//! Scenario runner and metric extraction.

use serde::Serialize;

use super::chain::{build_chain, CrushChain};
use super::integrate::{energy_audit, explicit_integrate, CrashHistories, IntegrateOptions};
use super::roof::{roof_quasi_static, RoofResult};
use super::Scenario;
use crate::error::Result;
use crate::exec::{self, Execution};
use crate::model::FrameModel;

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CrashOptions {
    /// Overrides every scenario's cell count.
    pub n_cells: Option<usize>,
    /// Overrides the automatic time step, s.
    pub dt: Option<f64>,
    pub execution: Execution,
}

/// Table-4 style metrics of one scenario (SI).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrashMetrics {
    pub scenario: Scenario,
    /// m
    pub max_intrusion: f64,
    /// s
    pub intrusion_time: f64,
    /// Passenger-cell peak after the CFC 60 channel filter, m/s².
    pub peak_deceleration: f64,
    /// s
    pub peak_deceleration_time: f64,
    /// Unfiltered passenger-cell peak, m/s².
    pub peak_deceleration_raw: f64,
    /// Largest rate of change of the intrusion measure, m/s.
    pub max_intrusion_velocity: f64,
    /// Recorded platen speed (roof only), m/s.
    pub platen_velocity: Option<f64>,
    /// Largest relative energy imbalance over the run.
    pub energy_imbalance: f64,
    /// Time step used, s (0 for the quasi-static roof).
    pub dt: f64,
    pub n_cells: usize,
    pub intrusion_location: String,
}

impl CrashMetrics {
    /// The second gated quantity of the scenario's block: deceleration
    /// (frontal, rear), intrusion velocity (lateral) or platen velocity
    /// (roof).
    pub fn secondary(&self) -> f64 {
        match self.scenario {
            Scenario::Frontal | Scenario::Rear => self.peak_deceleration,
            Scenario::Lateral => self.max_intrusion_velocity,
            Scenario::Roof => self.platen_velocity.unwrap_or(0.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioRun {
    pub chain: CrushChain,
    pub metrics: CrashMetrics,
    /// Time histories of dynamic scenarios.
    pub histories: Option<CrashHistories>,
    /// Load-intrusion path of the roof test.
    pub roof: Option<RoofResult>,
}

pub fn run_scenario(model: &FrameModel, scenario: Scenario, opts: &CrashOptions) -> Result<ScenarioRun> {
    let mut cfg = model.crash.scenario(scenario).clone();
    if let Some(n) = opts.n_cells {
        cfg.n_cells = n;
        cfg.intrusion_cells = cfg.intrusion_cells.min(n);
    }
    let chain = build_chain(model, scenario, &cfg, model.crash.vehicle_mass)?;
    let location = chain.intrusion_location();

    if scenario == Scenario::Roof {
        let roof = roof_quasi_static(&chain, &model.crash.roof)?;
        let metrics = CrashMetrics {
            scenario,
            max_intrusion: roof.max_intrusion,
            intrusion_time: 0.0,
            peak_deceleration: 0.0,
            peak_deceleration_time: 0.0,
            peak_deceleration_raw: 0.0,
            max_intrusion_velocity: 0.0,
            platen_velocity: Some(roof.platen_speed),
            energy_imbalance: 0.0,
            dt: 0.0,
            n_cells: chain.n_cells(),
            intrusion_location: "platen displacement (total roof-chain compression)".into(),
        };
        return Ok(ScenarioRun {
            chain,
            metrics,
            histories: None,
            roof: Some(roof),
        });
    }

    let iopts = IntegrateOptions {
        dt: opts.dt,
        ..IntegrateOptions::new(cfg.duration, cfg.output_interval)
    };
    let h = explicit_integrate(&chain, &iopts)?;
    let metrics = CrashMetrics {
        scenario,
        max_intrusion: h.max_intrusion,
        intrusion_time: h.max_intrusion_time,
        peak_deceleration: h.peak_deceleration,
        peak_deceleration_time: h.peak_deceleration_time,
        peak_deceleration_raw: h.peak_deceleration_raw,
        max_intrusion_velocity: h.max_intrusion_velocity,
        platen_velocity: None,
        energy_imbalance: h.max_imbalance.max(energy_audit(&h)),
        dt: h.dt,
        n_cells: chain.n_cells(),
        intrusion_location: location,
    };
    Ok(ScenarioRun {
        chain,
        metrics,
        histories: Some(h),
        roof: None,
    })
}

/// All four scenarios, independent runs spread over the execution policy.
pub fn run_all_scenarios(model: &FrameModel, opts: &CrashOptions) -> Result<Vec<ScenarioRun>> {
    exec::map(opts.execution, &Scenario::ALL, |&s| run_scenario(model, s, opts))
        .into_iter()
        .collect()
}
