//! Reduced-order crash analysis on crush chains.
//!
//! The frame's crush path for a scenario is collapsed into a 1D series of
//! lumped masses joined by rate-dependent elastic-plastic crush cells. The
//! dynamic scenarios (frontal, rear, lateral) are integrated with central
//! differences; the roof test is solved quasi-statically. This is a pulse
//! level model: it yields intrusion and deceleration, not deformation
//! shapes.

mod chain;
mod integrate;
mod roof;
mod scenario;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::material::CrushSettings;
use crate::model::Vec3;

pub use chain::{
    build_chain, distribute_mass, series_force, Barrier, CellState, CrushCell, CrushChain, Plateau, BARRIER_FACE_DEPTH,
};
pub use integrate::{
    cfc_filter, energy_audit, explicit_integrate, max_frequency, peak_g, stable_time_step, CrashHistories,
    EnergySample, HistorySample, IntegrateOptions,
};
pub use roof::{roof_quasi_static, RoofResult};
pub use scenario::{run_all_scenarios, run_scenario, CrashMetrics, CrashOptions, ScenarioRun};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scenario {
    Frontal,
    Rear,
    Lateral,
    Roof,
}

impl Scenario {
    pub const ALL: [Scenario; 4] = [Scenario::Frontal, Scenario::Rear, Scenario::Lateral, Scenario::Roof];

    pub fn as_str(&self) -> &'static str {
        match self {
            Scenario::Frontal => "frontal",
            Scenario::Rear => "rear",
            Scenario::Lateral => "lateral",
            Scenario::Roof => "roof",
        }
    }

    /// Unit vector pointing from the struck face into the vehicle.
    pub fn crush_axis(&self) -> Vec3 {
        match self {
            Scenario::Frontal => [1.0, 0.0, 0.0],
            Scenario::Rear => [-1.0, 0.0, 0.0],
            Scenario::Lateral => [0.0, -1.0, 0.0],
            Scenario::Roof => [0.0, 0.0, -1.0],
        }
    }

    /// Regulatory program the scenario stands in for.
    pub fn program(&self) -> &'static str {
        match self {
            Scenario::Frontal => "US-NCAP",
            Scenario::Rear => "FMVSS-301",
            Scenario::Lateral => "FMVSS-214",
            Scenario::Roof => "FMVSS-216",
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Scenario {
    type Err = crate::Error;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Scenario::ALL
            .into_iter()
            .find(|sc| sc.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| crate::Error::invalid("scenario", format!("unknown scenario `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum BarrierSpec {
    /// Fixed rigid wall; absorbs no energy.
    Rigid,
    /// Moving barrier with an elastic-plastic face. The face plateau is
    /// `plateau_ratio` times the chain's first-cell static plateau.
    Deformable {
        stiffness: f64,
        mass: f64,
        plateau_ratio: f64,
    },
}

/// Per-scenario crush-chain configuration (SI).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    /// Member group forming the crush path.
    pub group: String,
    /// Closing speed, m/s.
    pub speed: f64,
    /// Impact angle from the crush axis, degrees.
    pub angle_deg: f64,
    /// Simulated window, s.
    pub duration: f64,
    pub barrier: BarrierSpec,
    pub n_cells: usize,
    /// Share of vehicle mass on the first chain mass.
    pub bumper_fraction: f64,
    /// Share of vehicle mass spread over the intermediate chain masses.
    pub crush_zone_fraction: f64,
    /// Number of rearmost cells whose crush counts as intrusion.
    pub intrusion_cells: usize,
    pub crush: CrushSettings,
    /// History sampling interval, s.
    pub output_interval: f64,
}

impl ScenarioConfig {
    fn dynamic(group: &str, speed_kmh: f64, angle_deg: f64, barrier: BarrierSpec) -> Self {
        Self {
            group: group.into(),
            speed: speed_kmh / 3.6,
            angle_deg,
            duration: 0.090,
            barrier,
            n_cells: 4,
            bumper_fraction: 0.03,
            crush_zone_fraction: 0.12,
            intrusion_cells: 1,
            crush: CrushSettings::default(),
            output_interval: 1.0e-4,
        }
    }

    /// Speed component along the crush axis.
    pub fn normal_speed(&self) -> f64 {
        self.speed * self.angle_deg.to_radians().cos()
    }
}

/// Quasi-static roof crush settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoofConfig {
    pub chain: ScenarioConfig,
    /// Platen resultant, N.
    pub load: f64,
    /// Platen tilt angles, degrees.
    pub tilt_x_deg: f64,
    pub tilt_z_deg: f64,
    /// Platen speed, m/s. Recorded, not integrated.
    pub platen_speed: f64,
    pub load_steps: usize,
}

impl RoofConfig {
    /// Component of the platen resultant along the roof crush axis.
    pub fn axial_load(&self) -> f64 {
        self.load * self.tilt_x_deg.to_radians().cos() * self.tilt_z_deg.to_radians().cos()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrashConfig {
    /// Vehicle mass carried by the chain, kg.
    pub vehicle_mass: f64,
    pub frontal: ScenarioConfig,
    pub rear: ScenarioConfig,
    pub lateral: ScenarioConfig,
    pub roof: RoofConfig,
}

impl Default for CrashConfig {
    fn default() -> Self {
        Self {
            vehicle_mass: 1000.0,
            frontal: ScenarioConfig::dynamic("front_rails", 55.0, 0.0, BarrierSpec::Rigid),
            rear: ScenarioConfig::dynamic("rear_rails", 50.0, 0.0, BarrierSpec::Rigid),
            lateral: ScenarioConfig::dynamic(
                "side_structure",
                50.0,
                27.0,
                BarrierSpec::Deformable {
                    stiffness: 1.0e6,
                    mass: 1368.0,
                    plateau_ratio: 0.3,
                },
            ),
            roof: RoofConfig {
                chain: ScenarioConfig {
                    n_cells: 2,
                    ..ScenarioConfig::dynamic("roof_pillars", 0.0, 0.0, BarrierSpec::Rigid)
                },
                load: 1.5 * 9800.0,
                tilt_x_deg: 5.0,
                tilt_z_deg: 25.0,
                platen_speed: 1.5e-3 / 60.0,
                load_steps: 100,
            },
        }
    }
}

impl CrashConfig {
    pub fn scenario(&self, s: Scenario) -> &ScenarioConfig {
        match s {
            Scenario::Frontal => &self.frontal,
            Scenario::Rear => &self.rear,
            Scenario::Lateral => &self.lateral,
            Scenario::Roof => &self.roof.chain,
        }
    }

    pub fn scenario_mut(&mut self, s: Scenario) -> &mut ScenarioConfig {
        match s {
            Scenario::Frontal => &mut self.frontal,
            Scenario::Rear => &mut self.rear,
            Scenario::Lateral => &mut self.lateral,
            Scenario::Roof => &mut self.roof.chain,
        }
    }
}
