//! Quasi-static roof crush on the roof chain.
//!
//! The platen speed of the physical test is some nine orders of magnitude
//! below crash rates, so there is nothing to integrate in time: the platen
//! load is ramped in increments and every cell, carrying the same series
//! force, is brought to equilibrium on its static crush curve. The platen
//! speed is carried through as a recorded test condition.

use serde::Serialize;

use super::chain::CrushChain;
use super::RoofConfig;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RoofResult {
    /// Axial platen load at each increment, N.
    pub load: Vec<f64>,
    /// Platen intrusion at each increment, m.
    pub intrusion: Vec<f64>,
    pub max_intrusion: f64,
    /// Axial component of the platen resultant, N.
    pub axial_load: f64,
    /// Recorded platen speed, m/s.
    pub platen_speed: f64,
}

/// Ramps the axial platen load in `load_steps` increments; intrusion is
/// the total chain compression under the platen.
pub fn roof_quasi_static(chain: &CrushChain, cfg: &RoofConfig) -> Result<RoofResult> {
    if cfg.load_steps == 0 {
        return Err(Error::invalid("roof load steps", "must be >= 1"));
    }
    let axial = cfg.axial_load();
    if !(axial > 0.0) {
        return Err(Error::invalid("roof load", "must be > 0"));
    }
    let mut load = Vec::with_capacity(cfg.load_steps + 1);
    let mut intrusion = Vec::with_capacity(cfg.load_steps + 1);
    // plastic crush never recovers while the load only increases, so the
    // static curve of each virgin cell is also its loading path
    let mut plastic_floor = vec![0.0f64; chain.n_cells()];
    for step in 0..=cfg.load_steps {
        let f = axial * step as f64 / cfg.load_steps as f64;
        let mut total = 0.0;
        for (cell, floor) in chain.cells.iter().zip(plastic_floor.iter_mut()) {
            let crush = cell.static_crush(f);
            let plastic = (crush - f / cell.stiffness).max(*floor);
            *floor = plastic;
            total += plastic + f / cell.stiffness;
        }
        load.push(f);
        intrusion.push(total);
    }
    let max_intrusion = intrusion.iter().copied().fold(0.0, f64::max);
    Ok(RoofResult {
        load,
        intrusion,
        max_intrusion,
        axial_load: axial,
        platen_speed: cfg.platen_speed,
    })
}
