//! Target gating with signed deviation percentages.
//!
//! Rows carry values in reporting units (Hz, kN/mm, kN·m/deg, kg, mm, g,
//! m/s, mm/min); deviations are unit-free.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::crash::{CrashMetrics, Scenario};
use crate::error::{Error, Result};
use crate::model::{CrashLimits, TargetSet, G};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Direction {
    HigherBetter,
    LowerBetter,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GateRow {
    pub metric: String,
    pub unit: &'static str,
    pub target: f64,
    pub result: f64,
    /// Signed margin in percent of the target; positive means better.
    pub deviation: f64,
    pub direction: Direction,
    /// A result exactly on the target passes.
    pub pass: bool,
}

impl GateRow {
    pub fn new(metric: impl Into<String>, unit: &'static str, target: f64, result: f64, direction: Direction) -> Self {
        let (deviation, pass) = match direction {
            Direction::HigherBetter => ((result - target) / target * 100.0, result >= target),
            Direction::LowerBetter => ((target - result) / target * 100.0, result <= target),
        };
        Self {
            metric: metric.into(),
            unit,
            target,
            result,
            deviation,
            direction,
            pass,
        }
    }
}

/// Deviation of a result against a target.
pub fn deviation(target: f64, result: f64, direction: Direction) -> f64 {
    GateRow::new("", "", target, result, direction).deviation
}

/// Two rows of one crash scenario; the block margin is the smaller one.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrashBlock {
    pub scenario: Scenario,
    pub program: &'static str,
    pub rows: [GateRow; 2],
    pub min_deviation: f64,
    pub pass: bool,
}

impl CrashBlock {
    pub fn new(scenario: Scenario, rows: [GateRow; 2]) -> Self {
        Self {
            scenario,
            program: scenario.program(),
            min_deviation: rows[0].deviation.min(rows[1].deviation),
            pass: rows.iter().all(|r| r.pass),
            rows,
        }
    }
}

/// Analysis results to gate, SI units. `None` marks a metric that was not
/// evaluated.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct GateInputs {
    /// Hz
    pub frequency: Option<f64>,
    /// N/m
    pub bending_stiffness: Option<f64>,
    /// N·m/deg
    pub torsional_stiffness: Option<f64>,
    /// kg
    pub biw_mass: Option<f64>,
    /// kg
    pub total_mass: Option<f64>,
    pub crash: BTreeMap<Scenario, CrashMetrics>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GateReport {
    pub static_rows: Vec<GateRow>,
    /// Empty when the crash stage was not reached.
    pub crash: Vec<CrashBlock>,
    pub pass: bool,
}

impl GateReport {
    pub fn rows(&self) -> impl Iterator<Item = &GateRow> {
        self.static_rows
            .iter()
            .chain(self.crash.iter().flat_map(|b| b.rows.iter()))
    }

    /// The failing row with the most negative deviation.
    pub fn binding(&self) -> Option<&GateRow> {
        self.rows()
            .filter(|r| !r.pass)
            .min_by(|a, b| a.deviation.total_cmp(&b.deviation))
    }

    pub fn static_pass(&self) -> bool {
        self.static_rows.iter().all(|r| r.pass)
    }
}

fn need(v: Option<f64>, name: &str) -> Result<f64> {
    v.ok_or_else(|| Error::MissingMetric(name.to_string()))
}

/// Frequency, stiffness and mass rows.
pub fn gate_static(inputs: &GateInputs, targets: &TargetSet) -> Result<Vec<GateRow>> {
    use Direction::*;
    Ok(vec![
        GateRow::new(
            "natural_frequency",
            "Hz",
            targets.natural_frequency_min,
            need(inputs.frequency, "natural_frequency")?,
            HigherBetter,
        ),
        GateRow::new(
            "bending_stiffness",
            "kN/mm",
            targets.bending_stiffness_min / 1e6,
            need(inputs.bending_stiffness, "bending_stiffness")? / 1e6,
            HigherBetter,
        ),
        GateRow::new(
            "torsional_stiffness",
            "kN*m/deg",
            targets.torsional_stiffness_min / 1e3,
            need(inputs.torsional_stiffness, "torsional_stiffness")? / 1e3,
            HigherBetter,
        ),
        GateRow::new(
            "biw_mass",
            "kg",
            targets.biw_mass_max,
            need(inputs.biw_mass, "biw_mass")?,
            LowerBetter,
        ),
        GateRow::new(
            "total_mass",
            "kg",
            targets.total_mass_max,
            need(inputs.total_mass, "total_mass")?,
            LowerBetter,
        ),
    ])
}

fn limits(targets: &TargetSet, s: Scenario) -> CrashLimits {
    match s {
        Scenario::Frontal => targets.frontal,
        Scenario::Rear => targets.rear,
        Scenario::Lateral => targets.lateral,
        Scenario::Roof => targets.roof,
    }
}

/// Crash block of one scenario from its metrics.
pub fn gate_crash(scenario: Scenario, metrics: &CrashMetrics, targets: &TargetSet) -> CrashBlock {
    let lim = limits(targets, scenario);
    let intrusion = GateRow::new(
        format!("{scenario}.max_intrusion"),
        "mm",
        lim.max_intrusion * 1e3,
        metrics.max_intrusion * 1e3,
        Direction::LowerBetter,
    );
    let second = match scenario {
        Scenario::Frontal | Scenario::Rear => GateRow::new(
            format!("{scenario}.max_deceleration"),
            "g",
            lim.secondary / G,
            metrics.secondary() / G,
            Direction::LowerBetter,
        ),
        Scenario::Lateral => GateRow::new(
            format!("{scenario}.max_intrusion_velocity"),
            "m/s",
            lim.secondary,
            metrics.secondary(),
            Direction::LowerBetter,
        ),
        Scenario::Roof => GateRow::new(
            format!("{scenario}.max_platen_velocity"),
            "mm/min",
            lim.secondary * 6e4,
            metrics.secondary() * 6e4,
            Direction::LowerBetter,
        ),
    };
    CrashBlock::new(scenario, [intrusion, second])
}

/// Full gate; every static metric and all four crash scenarios must be
/// present.
pub fn gate(inputs: &GateInputs, targets: &TargetSet) -> Result<GateReport> {
    let static_rows = gate_static(inputs, targets)?;
    let crash = Scenario::ALL
        .iter()
        .map(|&s| {
            inputs
                .crash
                .get(&s)
                .map(|m| gate_crash(s, m, targets))
                .ok_or_else(|| Error::MissingMetric(format!("{s} crash metrics")))
        })
        .collect::<Result<Vec<_>>>()?;
    let pass = static_rows.iter().all(|r| r.pass) && crash.iter().all(|b| b.pass);
    Ok(GateReport {
        static_rows,
        crash,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deviation_conventions() {
        let r = GateRow::new("k", "kN/mm", 10.0, 11.53, Direction::HigherBetter);
        assert!((r.deviation - 15.3).abs() < 1e-9 && r.pass);
        let r = GateRow::new("m", "kg", 250.0, 250.0, Direction::LowerBetter);
        assert_eq!(r.deviation, 0.0);
        assert!(r.pass);
        let r = GateRow::new("i", "mm", 110.0, 120.0, Direction::LowerBetter);
        assert!(!r.pass && r.deviation < 0.0);
    }

    #[test]
    fn crash_block_takes_smaller_margin() {
        let b = CrashBlock::new(
            Scenario::Frontal,
            [
                GateRow::new("i", "mm", 110.0, 82.0, Direction::LowerBetter),
                GateRow::new("a", "g", 30.0, 25.0, Direction::LowerBetter),
            ],
        );
        assert!((b.min_deviation - 100.0 / 6.0).abs() < 1e-9);
        assert!(b.pass);
    }

    #[test]
    fn missing_metric_is_named() {
        let err = gate(&GateInputs::default(), &TargetSet::default()).unwrap_err();
        assert!(matches!(err, Error::MissingMetric(ref m) if m == "natural_frequency"));
    }
}
