//! Run reports and CSV artifacts.
//!
//! Everything is computed in SI; conversion to presentation units (Hz,
//! kN/mm, kN·m/deg, mm, g, m/s, mm/min, kg) happens here. Reports are
//! byte-deterministic: object keys are sorted, every result float is
//! rounded to 6 significant digits, and wall-clock timings are left out.

use std::path::Path;

use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use crate::assembly::Mesh;
use crate::crash::{CrashHistories, RoofResult, ScenarioRun};
use crate::design::{CrashBlock, DesignOutcome, GateReport, GateRow, StaticEvaluation, Trial};
use crate::error::{Error, Result};
use crate::modal::ModeSet;
use crate::model::{serialize_model, FrameModel, G};
use crate::statics::{BendingResult, TorsionResult};

pub const TOOL: &str = "spaceframe";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Rounds to 6 significant digits; non-finite values pass through and
/// negative zero becomes zero.
pub fn sig6(x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    if !x.is_finite() {
        return x;
    }
    format!("{x:.5e}").parse().expect("formatted float parses")
}

/// A value with its unit.
pub fn q(value: f64, unit: &str) -> Value {
    json!({ "value": value, "unit": unit })
}

fn round_all(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            if let Some(r) = n.as_f64().map(sig6).and_then(serde_json::Number::from_f64) {
                *n = r;
            }
        }
        Value::Array(a) => a.iter_mut().for_each(round_all),
        Value::Object(o) => o.values_mut().for_each(round_all),
        _ => {}
    }
}

/// SHA-256 of the canonical (SI) serialization of a model.
pub fn model_digest(model: &FrameModel) -> String {
    let d = Sha256::digest(serialize_model(model).as_bytes());
    let hex: String = d.iter().map(|b| format!("{b:02x}")).collect();
    format!("sha256:{hex}")
}

/// Structured report of one CLI run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    model: Value,
    options: Value,
    analyses: Map<String, Value>,
}

impl RunReport {
    /// Header with the model echoed in canonical form and the run options.
    pub fn new(model: &FrameModel, options: Value) -> Self {
        let echo: Value = serde_json::from_str(&serialize_model(model)).expect("canonical model is JSON");
        Self {
            model: json!({
                "name": model.meta.name,
                "digest": model_digest(model),
                "definition": echo,
            }),
            options,
            analyses: Map::new(),
        }
    }

    pub fn add(&mut self, name: &str, block: Value) {
        self.analyses.insert(name.to_string(), block);
    }

    pub fn is_empty(&self) -> bool {
        self.analyses.is_empty()
    }

    pub fn to_value(&self) -> Value {
        let mut options = self.options.clone();
        round_all(&mut options);
        let mut analyses = Value::Object(self.analyses.clone());
        round_all(&mut analyses);
        json!({
            "tool": TOOL,
            "version": VERSION,
            "model": self.model,
            "options": options,
            "analyses": analyses,
        })
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.to_value()).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
    }
}

pub fn modal_block(modes: &ModeSet) -> Value {
    let list: Vec<Value> = modes
        .modes
        .iter()
        .enumerate()
        .map(|(i, m)| {
            json!({
                "index": i + 1,
                "frequency": q(m.frequency, "Hz"),
                "rigid": i < modes.rigid_mode_count,
                "class": m.class.as_str(),
                "antisymmetry": m.antisymmetry,
                "residual": m.residual,
            })
        })
        .collect();
    json!({
        "first_flexible": q(modes.first_flexible().unwrap_or(0.0), "Hz"),
        "rigid_modes": modes.rigid_mode_count,
        "solver": if modes.dense { "dense" } else { "shift-invert block Krylov" },
        "modes": list,
    })
}

pub fn bending_block(b: &BendingResult) -> Value {
    json!({
        "total_load": q(b.total_load / 1e3, "kN"),
        "max_deflection": q(b.max_deflection * 1e3, "mm"),
        "max_deflection_position": b.max_deflection_position.map(|x| x * 1e3),
        "stiffness": q(b.stiffness / 1e6, "kN/mm"),
        "vertical_reaction": q(b.vertical_reaction / 1e3, "kN"),
        "residual": b.residual,
    })
}

pub fn torsion_block(t: &TorsionResult) -> Value {
    json!({
        "force": q(t.force / 1e3, "kN"),
        "track": q(t.track * 1e3, "mm"),
        "torque": q(t.torque / 1e3, "kN*m"),
        "v_d": q(t.v_d * 1e3, "mm"),
        "v_p": q(t.v_p * 1e3, "mm"),
        "phi_d": q(t.phi_d_deg, "deg"),
        "phi_p": q(t.phi_p_deg, "deg"),
        "stiffness": q(t.stiffness / 1e3, "kN*m/deg"),
        "literal_one_side": q(t.literal_one_side / 1e3, "kN*m/deg"),
        "literal_both_sides": q(t.literal_both_sides / 1e3, "kN*m/deg"),
        "residual": t.residual,
    })
}

pub fn static_block(s: &StaticEvaluation) -> Value {
    let modules: Map<String, Value> = s
        .module_masses
        .iter()
        .map(|(t, m)| (t.to_string(), q(*m, "kg")))
        .collect();
    json!({
        "modal": modal_block(&s.modes),
        "bending": bending_block(&s.bending),
        "torsion": torsion_block(&s.torsion),
        "biw_mass": q(s.biw_mass, "kg"),
        "total_mass": q(s.total_mass, "kg"),
        "module_masses": modules,
    })
}

pub fn crash_block(run: &ScenarioRun) -> Value {
    let m = &run.metrics;
    let cells: Vec<Value> = run
        .chain
        .cells
        .iter()
        .map(|c| {
            json!({
                "length": q(c.length * 1e3, "mm"),
                "stiffness": q(c.stiffness / 1e6, "kN/mm"),
                "static_plateau": q(c.static_plateau() / 1e3, "kN"),
                "densification": c.densification,
            })
        })
        .collect();
    let mut block = json!({
        "scenario": m.scenario.as_str(),
        "program": m.scenario.program(),
        "max_intrusion": q(m.max_intrusion * 1e3, "mm"),
        "intrusion_time": q(m.intrusion_time * 1e3, "ms"),
        "intrusion_location": m.intrusion_location,
        "peak_deceleration": q(m.peak_deceleration / G, "g"),
        "peak_deceleration_time": q(m.peak_deceleration_time * 1e3, "ms"),
        "peak_deceleration_unfiltered": q(m.peak_deceleration_raw / G, "g"),
        "max_intrusion_velocity": q(m.max_intrusion_velocity, "m/s"),
        "energy_imbalance": q(m.energy_imbalance * 100.0, "%"),
        "time_step": q(m.dt * 1e6, "us"),
        "n_cells": m.n_cells,
        "vehicle_mass": q(run.chain.vehicle_mass(), "kg"),
        "impact_speed": q(run.chain.vehicle_speed * 3.6, "km/h"),
        "cells": cells,
    });
    if let Some(v) = m.platen_velocity {
        block["platen_velocity"] = q(v * 6e4, "mm/min");
    }
    if let Some(r) = &run.roof {
        block["platen_load"] = q(r.axial_load / 1e3, "kN");
    }
    block
}

fn row(r: &GateRow) -> Value {
    json!({
        "metric": r.metric,
        "unit": r.unit,
        "target": r.target,
        "result": r.result,
        "deviation": q(r.deviation, "%"),
        "direction": r.direction,
        "pass": r.pass,
    })
}

fn block(b: &CrashBlock) -> Value {
    json!({
        "scenario": b.scenario.as_str(),
        "program": b.program,
        "rows": b.rows.iter().map(row).collect::<Vec<_>>(),
        "min_deviation": q(b.min_deviation, "%"),
        "pass": b.pass,
    })
}

pub fn gate_block(g: &GateReport) -> Value {
    json!({
        "static": g.static_rows.iter().map(row).collect::<Vec<_>>(),
        "crash": g.crash.iter().map(block).collect::<Vec<_>>(),
        "binding": g.binding().map(|r| r.metric.clone()),
        "pass": g.pass,
    })
}

fn trial(t: &Trial) -> Value {
    json!({
        "try": t.try_index,
        "coordinate": t.coordinate,
        "width": t.design.width * 1e3,
        "height": t.design.height * 1e3,
        "thickness": t.design.thickness * 1e3,
        "mass": t.mass,
        "feasible": t.feasible,
        "frequency": t.frequency,
    })
}

/// Optimization summary. Trial entries are compact: sizes in mm, mass in
/// kg, frequency in Hz.
pub fn design_block(out: &DesignOutcome) -> Value {
    let optima: Map<String, Value> = out
        .optima
        .iter()
        .map(|(t, o)| {
            (
                t.to_string(),
                json!({
                    "width": q(o.design.width * 1e3, "mm"),
                    "height": q(o.design.height * 1e3, "mm"),
                    "thickness": q(o.design.thickness * 1e3, "mm"),
                    "backbone_thickness": q(o.design.backbone_thickness * 1e3, "mm"),
                    "frequency": q(o.frequency, "Hz"),
                    "start_frequency": o.start_frequency.map(|f| q(f, "Hz")),
                    "mass": q(o.mass, "kg"),
                    "mass_budget": q(o.mass_budget, "kg"),
                    "tries": o.tries,
                    "trials": o.log.iter().map(trial).collect::<Vec<_>>(),
                }),
            )
        })
        .collect();
    let log: Vec<Value> = out
        .log
        .iter()
        .map(|r| {
            json!({
                "iteration": r.iteration,
                "modules": r.modules,
                "frequency": q(r.frequency, "Hz"),
                "bending_stiffness": q(r.bending_stiffness / 1e6, "kN/mm"),
                "torsional_stiffness": q(r.torsional_stiffness / 1e3, "kN*m/deg"),
                "biw_mass": q(r.biw_mass, "kg"),
                "static_pass": r.static_pass,
            })
        })
        .collect();
    json!({
        "iterations": out.log.len(),
        "reoptimizations": out.reoptimizations,
        "optima": optima,
        "log": log,
        "pass": out.pass(),
    })
}

fn csv_text(header: &[&str], rows: impl Iterator<Item = Vec<f64>>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::Io(e.to_string());
    w.write_record(header).map_err(io)?;
    for r in rows {
        w.write_record(r.iter().map(|x| sig6(*x).to_string())).map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv is utf-8"))
}

/// Crash time history: passenger deceleration (filtered and raw),
/// intrusion, barrier force and per-cell force/crush.
pub fn crash_history_csv(h: &CrashHistories) -> Result<String> {
    let n = h.samples.first().map_or(0, |s| s.cell_force.len());
    let mut header: Vec<String> = [
        "time_ms",
        "deceleration_g",
        "deceleration_unfiltered_g",
        "intrusion_mm",
        "passenger_velocity_mps",
        "barrier_force_kN",
    ]
    .map(String::from)
    .to_vec();
    for i in 1..=n {
        header.push(format!("cell{i}_force_kN"));
    }
    for i in 1..=n {
        header.push(format!("cell{i}_crush_mm"));
    }
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    csv_text(
        &header,
        h.samples.iter().map(|s| {
            let mut r = vec![
                s.time * 1e3,
                -s.filtered_acceleration / G,
                -s.acceleration.last().copied().unwrap_or(0.0) / G,
                s.intrusion * 1e3,
                s.velocity.last().copied().unwrap_or(0.0),
                s.barrier_force / 1e3,
            ];
            r.extend(s.cell_force.iter().map(|f| f / 1e3));
            r.extend(s.cell_crush.iter().map(|c| c * 1e3));
            r
        }),
    )
}

/// Roof load-intrusion path.
pub fn roof_csv(r: &RoofResult) -> Result<String> {
    csv_text(
        &["load_kN", "intrusion_mm"],
        r.load.iter().zip(&r.intrusion).map(|(l, i)| vec![l / 1e3, i * 1e3]),
    )
}

/// Mode shapes at the model nodes: one row per (mode, node).
pub fn mode_table_csv(modes: &ModeSet, mesh: &Mesh) -> Result<String> {
    let header = ["mode", "frequency_hz", "node", "ux", "uy", "uz", "rx", "ry", "rz"];
    let rows = modes.modes.iter().enumerate().flat_map(|(k, m)| {
        mesh.node_ids.iter().enumerate().filter_map(move |(i, id)| {
            let id = (*id)?;
            let mut r = vec![(k + 1) as f64, m.frequency, id as f64];
            r.extend_from_slice(&m.shape[6 * i..6 * i + 6]);
            Some(r)
        })
    });
    csv_text(&header, rows)
}
