//! JSON model file: reading with unit conversion, writing in SI.
//!
//! ```json
//! {
//!   "meta": { "name": "demo", "units": { "length": "mm" },
//!             "wheelbase": 2700, "track_width": 1650, "element_length": 15 },
//!   "materials": { "DP600": { "youngs_modulus": 210000, "poisson_ratio": 0.3,
//!                             "density": 7850,
//!                             "jc": { "a": 350, "b": 902, "c": 0.014,
//!                                     "n": 0.189, "m": 1.23 } } },
//!   "sections": { "s60": { "width": 60, "height": 60, "thickness": 1.0 } },
//!   "nodes":   [ { "id": 1, "position": [0, 825, 0] } ],
//!   "members": [ { "id": 1, "nodes": [1, 2], "section": "s60",
//!                  "material": "DP600", "orientation": [0, 0, 1],
//!                  "module": "deck" } ],
//!   "groups": { "front_springhouses": { "nodes": [3, 4] } },
//!   "constraints": { "bending": [ { "node": 3, "dofs": ["Ux", "Uy", "Uz"] } ] },
//!   "loadcases": {},
//!   "targets": { "bending_stiffness_min": { "value": 10, "unit": "kN/mm" } },
//!   "crash": { "vehicle_mass": 1000, "frontal": { "n_cells": 4 } }
//! }
//! ```
//!
//! Omitted `targets` entries take the sedan design-specification defaults;
//! omitted `crash` entries take the scenario defaults. The full schema is
//! documented in `docs/model-format.md`.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::units::{Family, UnitDecl, Units};
use super::{
    ConstraintSpec, CrashLimits, Dof, FrameModel, Group, LoadSpec, MaterialSpec, MemberSpec, Meta, ModuleTag, NodeSpec,
    TargetSet, Vec3, G,
};
use crate::crash::{BarrierSpec, CrashConfig, RoofConfig, ScenarioConfig};
use crate::error::{Error, Result};
use crate::material::JcParams;
use crate::section::RectHollowSection;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileModel {
    meta: FileMeta,
    #[serde(default)]
    materials: BTreeMap<String, FileMaterial>,
    #[serde(default)]
    sections: BTreeMap<String, FileSection>,
    #[serde(default)]
    nodes: Vec<FileNode>,
    #[serde(default)]
    members: Vec<FileMember>,
    #[serde(default)]
    groups: BTreeMap<String, FileGroup>,
    #[serde(default)]
    constraints: BTreeMap<String, Vec<FileConstraint>>,
    #[serde(default)]
    loadcases: BTreeMap<String, Vec<FileLoad>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    targets: Option<FileTargets>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    crash: Option<FileCrash>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileMeta {
    #[serde(default)]
    name: String,
    #[serde(default)]
    units: UnitDecl,
    wheelbase: f64,
    track_width: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    element_length: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileMaterial {
    youngs_modulus: f64,
    poisson_ratio: f64,
    density: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    jc: Option<FileJc>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileJc {
    a: f64,
    b: f64,
    c: f64,
    n: f64,
    m: f64,
    #[serde(default = "one")]
    ref_strain_rate: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileSection {
    width: f64,
    height: f64,
    thickness: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileNode {
    id: u32,
    position: Vec3,
    #[serde(default, skip_serializing_if = "is_zero")]
    lumped_mass: f64,
    #[serde(default, skip_serializing_if = "is_false")]
    structural: bool,
}

fn is_zero(v: &f64) -> bool {
    *v == 0.0
}

fn is_false(v: &bool) -> bool {
    !*v
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileMember {
    id: u32,
    nodes: [u32; 2],
    section: String,
    material: String,
    orientation: Vec3,
    module: ModuleTag,
    #[serde(default, skip_serializing_if = "is_false")]
    backbone: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileGroup {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    nodes: Vec<u32>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    members: Vec<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    fractions: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConstraint {
    node: u32,
    dofs: Vec<Dof>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileLoad {
    node: u32,
    #[serde(default)]
    force: Vec3,
    #[serde(default)]
    moment: Vec3,
}

/// A value with an explicit unit tag, used where no unit family applies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Quantity {
    pub value: f64,
    pub unit: String,
}

impl Quantity {
    fn new(value: f64, unit: &str) -> Self {
        Self {
            value,
            unit: unit.into(),
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum QKind {
    Frequency,
    Bending,
    Torsion,
    Mass,
    Length,
    Accel,
    Speed,
}

impl QKind {
    fn name(self) -> &'static str {
        match self {
            QKind::Frequency => "frequency",
            QKind::Bending => "bending stiffness",
            QKind::Torsion => "torsional stiffness",
            QKind::Mass => "mass",
            QKind::Length => "length",
            QKind::Accel => "acceleration",
            QKind::Speed => "speed",
        }
    }

    /// (tag, multiplier, divisor) to the internal unit; first entry is internal.
    fn table(self) -> &'static [(&'static str, f64, f64)] {
        match self {
            QKind::Frequency => &[("Hz", 1.0, 1.0)],
            QKind::Bending => &[("N/m", 1.0, 1.0), ("N/mm", 1e3, 1.0), ("kN/mm", 1e6, 1.0)],
            QKind::Torsion => &[
                ("N*m/deg", 1.0, 1.0),
                ("kN*m/deg", 1e3, 1.0),
                ("N*m/rad", std::f64::consts::PI, 180.0),
            ],
            QKind::Mass => &[("kg", 1.0, 1.0), ("t", 1e3, 1.0)],
            QKind::Length => &[("m", 1.0, 1.0), ("mm", 1.0, 1e3)],
            QKind::Accel => &[("m/s2", 1.0, 1.0), ("g", G, 1.0)],
            QKind::Speed => &[("m/s", 1.0, 1.0), ("km/h", 1.0, 3.6), ("mm/min", 1.0, 6e4)],
        }
    }

    fn to_internal(self, q: &Quantity, path: &str) -> Result<f64> {
        let (_, mul, div) = self
            .table()
            .iter()
            .find(|(t, _, _)| *t == q.unit)
            .ok_or_else(|| Error::UnknownUnit {
                family: self.name(),
                unit: q.unit.clone(),
                path: path.to_string(),
            })?;
        Ok(q.value * mul / div)
    }

    fn internal(self, v: f64) -> Quantity {
        Quantity::new(v, self.table()[0].0)
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileTargets {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    natural_frequency_min: Option<Quantity>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    bending_stiffness_min: Option<Quantity>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    torsional_stiffness_min: Option<Quantity>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    biw_mass_max: Option<Quantity>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    total_mass_max: Option<Quantity>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    frontal: Option<FileLimits>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    rear: Option<FileLimits>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    lateral: Option<FileLimits>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    roof: Option<FileLimits>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileLimits {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    max_intrusion: Option<Quantity>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    max_deceleration: Option<Quantity>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    max_intrusion_velocity: Option<Quantity>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    max_platen_velocity: Option<Quantity>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileCrash {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    vehicle_mass: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    frontal: Option<FileScenario>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    rear: Option<FileScenario>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    lateral: Option<FileScenario>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    roof: Option<FileRoof>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileScenario {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    group: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    speed: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    angle_deg: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    duration: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    barrier: Option<FileBarrier>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    n_cells: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    bumper_fraction: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    crush_zone_fraction: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    intrusion_cells: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    efficiency: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    reference_strain: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    densification: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    output_interval: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
enum FileBarrier {
    Rigid,
    Deformable {
        stiffness: f64,
        mass: f64,
        plateau_ratio: f64,
    },
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileRoof {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    chain: Option<FileScenario>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    load: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    tilt_x_deg: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    tilt_z_deg: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    platen_speed: Option<Quantity>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    load_steps: Option<usize>,
}

/// Default element length when a file does not declare one (15 mm).
pub const DEFAULT_ELEMENT_LENGTH: f64 = 0.015;

/// Parses a JSON model file, converting every quantity to SI.
pub fn parse_model(text: &str) -> Result<FrameModel> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let file: FileModel = serde_path_to_error::deserialize(de).map_err(|e| Error::Schema {
        path: e.path().to_string(),
        message: e.inner().to_string(),
    })?;
    from_file(file)
}

fn finite(path: &str, v: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Schema {
            path: path.into(),
            message: "value must be finite".into(),
        })
    }
}

fn finite3(path: &str, v: Vec3) -> Result<Vec3> {
    for x in v {
        finite(path, x)?;
    }
    Ok(v)
}

fn from_file(file: FileModel) -> Result<FrameModel> {
    let u = file.meta.units.resolve()?;
    let len = |v: f64| u.to_si(Family::Length, v);

    let meta = Meta {
        name: file.meta.name.clone(),
        wheelbase: len(finite("meta.wheelbase", file.meta.wheelbase)?),
        track_width: len(finite("meta.track_width", file.meta.track_width)?),
        element_length: match file.meta.element_length {
            Some(v) => len(finite("meta.element_length", v)?),
            None => DEFAULT_ELEMENT_LENGTH,
        },
    };
    if !(meta.wheelbase > 0.0 && meta.track_width > 0.0 && meta.element_length > 0.0) {
        return Err(Error::invalid(
            "meta",
            "wheelbase, track_width and element_length must be > 0",
        ));
    }

    let mut materials = BTreeMap::new();
    for (name, m) in &file.materials {
        let path = format!("materials.{name}");
        let jc = match &m.jc {
            Some(j) => {
                let p = JcParams {
                    a: u.to_si(Family::Stress, j.a),
                    b: u.to_si(Family::Stress, j.b),
                    c: j.c,
                    n: j.n,
                    m: j.m,
                    ref_strain_rate: j.ref_strain_rate,
                };
                p.check()
                    .map_err(|e| Error::invalid(format!("{path}.jc"), e.to_string()))?;
                Some(p)
            }
            None => None,
        };
        let mat = MaterialSpec {
            name: name.clone(),
            youngs_modulus: u.to_si(Family::Stress, finite(&path, m.youngs_modulus)?),
            poisson_ratio: finite(&path, m.poisson_ratio)?,
            density: u.to_si(Family::Density, finite(&path, m.density)?),
            jc,
        };
        if !(mat.youngs_modulus > 0.0) {
            return Err(Error::invalid(path, "E > 0 violated"));
        }
        if !(mat.poisson_ratio > 0.0 && mat.poisson_ratio < 0.5) {
            return Err(Error::invalid(path, "0 < nu < 0.5 violated"));
        }
        if !(mat.density > 0.0) {
            return Err(Error::invalid(path, "rho > 0 violated"));
        }
        materials.insert(name.clone(), mat);
    }

    let mut sections = BTreeMap::new();
    for (name, s) in &file.sections {
        let sec = RectHollowSection::new(len(s.width), len(s.height), len(s.thickness))
            .map_err(|e| Error::invalid(format!("sections.{name}"), e.to_string()))?;
        sections.insert(name.clone(), sec);
    }

    let mut seen = BTreeSet::new();
    let mut nodes = Vec::with_capacity(file.nodes.len());
    for (i, n) in file.nodes.iter().enumerate() {
        if !seen.insert(n.id) {
            return Err(Error::DuplicateId {
                kind: "node",
                id: n.id.to_string(),
            });
        }
        let path = format!("nodes[{i}]");
        let mass = u.to_si(Family::Mass, finite(&path, n.lumped_mass)?);
        if mass < 0.0 {
            return Err(Error::invalid(path, "lumped_mass >= 0 violated"));
        }
        nodes.push(NodeSpec {
            id: n.id,
            position: u.vec_to_si(Family::Length, finite3(&format!("{path}.position"), n.position)?),
            lumped_mass: mass,
            structural: n.structural,
        });
    }

    let mut seen = BTreeSet::new();
    let mut members = Vec::with_capacity(file.members.len());
    for (i, m) in file.members.iter().enumerate() {
        if !seen.insert(m.id) {
            return Err(Error::DuplicateId {
                kind: "member",
                id: m.id.to_string(),
            });
        }
        members.push(MemberSpec {
            id: m.id,
            node_i: m.nodes[0],
            node_j: m.nodes[1],
            section: m.section.clone(),
            material: m.material.clone(),
            orientation: finite3(&format!("members[{i}].orientation"), m.orientation)?,
            module: m.module,
            backbone: m.backbone,
        });
    }

    let groups = file
        .groups
        .iter()
        .map(|(k, g)| {
            (
                k.clone(),
                Group {
                    nodes: g.nodes.clone(),
                    members: g.members.clone(),
                    fractions: g.fractions.clone(),
                },
            )
        })
        .collect();

    let constraints = file
        .constraints
        .iter()
        .map(|(k, set)| {
            (
                k.clone(),
                set.iter()
                    .map(|c| ConstraintSpec {
                        node: c.node,
                        dofs: c.dofs.clone(),
                    })
                    .collect(),
            )
        })
        .collect();

    let mut loadcases = BTreeMap::new();
    for (k, loads) in &file.loadcases {
        let mut out = Vec::with_capacity(loads.len());
        for (i, l) in loads.iter().enumerate() {
            let path = format!("loadcases.{k}[{i}]");
            out.push(LoadSpec {
                node: l.node,
                force: u.vec_to_si(Family::Force, finite3(&path, l.force)?),
                moment: u.vec_to_si(Family::Moment, finite3(&path, l.moment)?),
            });
        }
        loadcases.insert(k.clone(), out);
    }

    let targets = targets_from_file(file.targets.as_ref())?;
    let crash = crash_from_file(file.crash.as_ref(), &u)?;

    Ok(FrameModel {
        meta,
        materials,
        sections,
        nodes,
        members,
        groups,
        constraints,
        loadcases,
        targets,
        crash,
    })
}

fn targets_from_file(t: Option<&FileTargets>) -> Result<TargetSet> {
    let mut out = TargetSet::default();
    let Some(t) = t else { return Ok(out) };
    let get = |q: &Option<Quantity>, kind: QKind, path: &str, slot: &mut f64| -> Result<()> {
        if let Some(q) = q {
            *slot = kind.to_internal(q, path)?;
        }
        Ok(())
    };
    get(
        &t.natural_frequency_min,
        QKind::Frequency,
        "targets.natural_frequency_min",
        &mut out.natural_frequency_min,
    )?;
    get(
        &t.bending_stiffness_min,
        QKind::Bending,
        "targets.bending_stiffness_min",
        &mut out.bending_stiffness_min,
    )?;
    get(
        &t.torsional_stiffness_min,
        QKind::Torsion,
        "targets.torsional_stiffness_min",
        &mut out.torsional_stiffness_min,
    )?;
    get(
        &t.biw_mass_max,
        QKind::Mass,
        "targets.biw_mass_max",
        &mut out.biw_mass_max,
    )?;
    get(
        &t.total_mass_max,
        QKind::Mass,
        "targets.total_mass_max",
        &mut out.total_mass_max,
    )?;

    let blocks: [(&str, &Option<FileLimits>, &mut CrashLimits, &str, QKind); 4] = [
        (
            "frontal",
            &t.frontal,
            &mut out.frontal,
            "max_deceleration",
            QKind::Accel,
        ),
        ("rear", &t.rear, &mut out.rear, "max_deceleration", QKind::Accel),
        (
            "lateral",
            &t.lateral,
            &mut out.lateral,
            "max_intrusion_velocity",
            QKind::Speed,
        ),
        ("roof", &t.roof, &mut out.roof, "max_platen_velocity", QKind::Speed),
    ];
    for (name, block, slot, secondary, kind) in blocks {
        let Some(b) = block else { continue };
        let path = format!("targets.{name}");
        if let Some(q) = &b.max_intrusion {
            slot.max_intrusion = QKind::Length.to_internal(q, &format!("{path}.max_intrusion"))?;
        }
        let given = [
            ("max_deceleration", &b.max_deceleration),
            ("max_intrusion_velocity", &b.max_intrusion_velocity),
            ("max_platen_velocity", &b.max_platen_velocity),
        ];
        for (field, q) in given {
            let Some(q) = q else { continue };
            if field != secondary {
                return Err(Error::Schema {
                    path: format!("{path}.{field}"),
                    message: format!("{name} block accepts `max_intrusion` and `{secondary}` only"),
                });
            }
            slot.secondary = kind.to_internal(q, &format!("{path}.{field}"))?;
        }
    }
    let all = [
        out.natural_frequency_min,
        out.bending_stiffness_min,
        out.torsional_stiffness_min,
        out.biw_mass_max,
        out.total_mass_max,
        out.frontal.max_intrusion,
        out.frontal.secondary,
        out.rear.max_intrusion,
        out.rear.secondary,
        out.lateral.max_intrusion,
        out.lateral.secondary,
        out.roof.max_intrusion,
        out.roof.secondary,
    ];
    if all.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
        return Err(Error::invalid("targets", "all limits must be positive"));
    }
    Ok(out)
}

fn scenario_from_file(
    base: &ScenarioConfig,
    f: Option<&FileScenario>,
    u: &Units,
    path: &str,
) -> Result<ScenarioConfig> {
    let mut s = base.clone();
    let Some(f) = f else { return Ok(s) };
    if let Some(g) = &f.group {
        s.group = g.clone();
    }
    if let Some(v) = f.speed {
        s.speed = u.to_si(Family::Speed, v);
    }
    if let Some(v) = f.angle_deg {
        s.angle_deg = v;
    }
    if let Some(v) = f.duration {
        s.duration = u.to_si(Family::Time, v);
    }
    if let Some(b) = &f.barrier {
        s.barrier = match *b {
            FileBarrier::Rigid => BarrierSpec::Rigid,
            FileBarrier::Deformable {
                stiffness,
                mass,
                plateau_ratio,
            } => BarrierSpec::Deformable {
                stiffness: u.to_si(Family::Stiffness, stiffness),
                mass: u.to_si(Family::Mass, mass),
                plateau_ratio,
            },
        };
    }
    if let Some(v) = f.n_cells {
        s.n_cells = v;
    }
    if let Some(v) = f.bumper_fraction {
        s.bumper_fraction = v;
    }
    if let Some(v) = f.crush_zone_fraction {
        s.crush_zone_fraction = v;
    }
    if let Some(v) = f.intrusion_cells {
        s.intrusion_cells = v;
    }
    if let Some(v) = f.efficiency {
        s.crush.efficiency = v;
    }
    if let Some(v) = f.reference_strain {
        s.crush.reference_strain = v;
    }
    if let Some(v) = f.densification {
        s.crush.densification = v;
    }
    if let Some(v) = f.output_interval {
        s.output_interval = u.to_si(Family::Time, v);
    }
    check_scenario(&s, path)?;
    Ok(s)
}

fn check_scenario(s: &ScenarioConfig, path: &str) -> Result<()> {
    let bad = |m: &str| Err(Error::invalid(path.to_string(), m.to_string()));
    if s.n_cells == 0 {
        return bad("n_cells >= 1 required");
    }
    if s.intrusion_cells == 0 || s.intrusion_cells > s.n_cells {
        return bad("intrusion_cells must be in 1..=n_cells");
    }
    if !(s.speed >= 0.0) || !(s.duration > 0.0) || !(s.output_interval > 0.0) {
        return bad("speed >= 0, duration > 0 and output_interval > 0 required");
    }
    if !(s.bumper_fraction >= 0.0 && s.crush_zone_fraction >= 0.0 && s.bumper_fraction + s.crush_zone_fraction < 1.0) {
        return bad("mass fractions must be >= 0 and sum below 1");
    }
    if let BarrierSpec::Deformable {
        stiffness,
        mass,
        plateau_ratio,
    } = s.barrier
    {
        if !(stiffness > 0.0 && mass > 0.0 && plateau_ratio > 0.0) {
            return bad("deformable barrier needs positive stiffness, mass and plateau_ratio");
        }
    }
    Ok(())
}

fn crash_from_file(f: Option<&FileCrash>, u: &Units) -> Result<CrashConfig> {
    let mut c = CrashConfig::default();
    let Some(f) = f else { return Ok(c) };
    if let Some(m) = f.vehicle_mass {
        c.vehicle_mass = u.to_si(Family::Mass, m);
        if !(c.vehicle_mass > 0.0) {
            return Err(Error::invalid("crash.vehicle_mass", "must be > 0"));
        }
    }
    c.frontal = scenario_from_file(&c.frontal, f.frontal.as_ref(), u, "crash.frontal")?;
    c.rear = scenario_from_file(&c.rear, f.rear.as_ref(), u, "crash.rear")?;
    c.lateral = scenario_from_file(&c.lateral, f.lateral.as_ref(), u, "crash.lateral")?;
    if let Some(r) = &f.roof {
        c.roof.chain = scenario_from_file(&c.roof.chain, r.chain.as_ref(), u, "crash.roof.chain")?;
        if let Some(v) = r.load {
            c.roof.load = u.to_si(Family::Force, v);
        }
        if let Some(v) = r.tilt_x_deg {
            c.roof.tilt_x_deg = v;
        }
        if let Some(v) = r.tilt_z_deg {
            c.roof.tilt_z_deg = v;
        }
        if let Some(q) = &r.platen_speed {
            c.roof.platen_speed = QKind::Speed.to_internal(q, "crash.roof.platen_speed")?;
        }
        if let Some(v) = r.load_steps {
            c.roof.load_steps = v;
        }
        if !(c.roof.load > 0.0 && c.roof.load_steps > 0 && c.roof.platen_speed > 0.0) {
            return Err(Error::invalid(
                "crash.roof",
                "load, load_steps and platen_speed must be > 0",
            ));
        }
    }
    Ok(c)
}

fn scenario_to_file(s: &ScenarioConfig) -> FileScenario {
    FileScenario {
        group: Some(s.group.clone()),
        speed: Some(s.speed),
        angle_deg: Some(s.angle_deg),
        duration: Some(s.duration),
        barrier: Some(match s.barrier {
            BarrierSpec::Rigid => FileBarrier::Rigid,
            BarrierSpec::Deformable {
                stiffness,
                mass,
                plateau_ratio,
            } => FileBarrier::Deformable {
                stiffness,
                mass,
                plateau_ratio,
            },
        }),
        n_cells: Some(s.n_cells),
        bumper_fraction: Some(s.bumper_fraction),
        crush_zone_fraction: Some(s.crush_zone_fraction),
        intrusion_cells: Some(s.intrusion_cells),
        efficiency: Some(s.crush.efficiency),
        reference_strain: Some(s.crush.reference_strain),
        densification: Some(s.crush.densification),
        output_interval: Some(s.output_interval),
    }
}

fn roof_to_file(r: &RoofConfig) -> FileRoof {
    FileRoof {
        chain: Some(scenario_to_file(&r.chain)),
        load: Some(r.load),
        tilt_x_deg: Some(r.tilt_x_deg),
        tilt_z_deg: Some(r.tilt_z_deg),
        platen_speed: Some(QKind::Speed.internal(r.platen_speed)),
        load_steps: Some(r.load_steps),
    }
}

fn limits_to_file(l: &CrashLimits, secondary: &str, kind: QKind) -> FileLimits {
    let mut f = FileLimits {
        max_intrusion: Some(QKind::Length.internal(l.max_intrusion)),
        ..Default::default()
    };
    let q = Some(kind.internal(l.secondary));
    match secondary {
        "max_deceleration" => f.max_deceleration = q,
        "max_intrusion_velocity" => f.max_intrusion_velocity = q,
        _ => f.max_platen_velocity = q,
    }
    f
}

/// Writes the model as JSON with every unit family declared in SI, so a
/// subsequent [`parse_model`] reproduces the model exactly.
pub fn serialize_model(model: &FrameModel) -> String {
    let t = &model.targets;
    let file = FileModel {
        meta: FileMeta {
            name: model.meta.name.clone(),
            units: UnitDecl::si(),
            wheelbase: model.meta.wheelbase,
            track_width: model.meta.track_width,
            element_length: Some(model.meta.element_length),
        },
        materials: model
            .materials
            .iter()
            .map(|(k, m)| {
                (
                    k.clone(),
                    FileMaterial {
                        youngs_modulus: m.youngs_modulus,
                        poisson_ratio: m.poisson_ratio,
                        density: m.density,
                        jc: m.jc.map(|j| FileJc {
                            a: j.a,
                            b: j.b,
                            c: j.c,
                            n: j.n,
                            m: j.m,
                            ref_strain_rate: j.ref_strain_rate,
                        }),
                    },
                )
            })
            .collect(),
        sections: model
            .sections
            .iter()
            .map(|(k, s)| {
                (
                    k.clone(),
                    FileSection {
                        width: s.width,
                        height: s.height,
                        thickness: s.thickness,
                    },
                )
            })
            .collect(),
        nodes: model
            .nodes
            .iter()
            .map(|n| FileNode {
                id: n.id,
                position: n.position,
                lumped_mass: n.lumped_mass,
                structural: n.structural,
            })
            .collect(),
        members: model
            .members
            .iter()
            .map(|m| FileMember {
                id: m.id,
                nodes: [m.node_i, m.node_j],
                section: m.section.clone(),
                material: m.material.clone(),
                orientation: m.orientation,
                module: m.module,
                backbone: m.backbone,
            })
            .collect(),
        groups: model
            .groups
            .iter()
            .map(|(k, g)| {
                (
                    k.clone(),
                    FileGroup {
                        nodes: g.nodes.clone(),
                        members: g.members.clone(),
                        fractions: g.fractions.clone(),
                    },
                )
            })
            .collect(),
        constraints: model
            .constraints
            .iter()
            .map(|(k, set)| {
                (
                    k.clone(),
                    set.iter()
                        .map(|c| FileConstraint {
                            node: c.node,
                            dofs: c.dofs.clone(),
                        })
                        .collect(),
                )
            })
            .collect(),
        loadcases: model
            .loadcases
            .iter()
            .map(|(k, loads)| {
                (
                    k.clone(),
                    loads
                        .iter()
                        .map(|l| FileLoad {
                            node: l.node,
                            force: l.force,
                            moment: l.moment,
                        })
                        .collect(),
                )
            })
            .collect(),
        targets: Some(FileTargets {
            natural_frequency_min: Some(QKind::Frequency.internal(t.natural_frequency_min)),
            bending_stiffness_min: Some(QKind::Bending.internal(t.bending_stiffness_min)),
            torsional_stiffness_min: Some(QKind::Torsion.internal(t.torsional_stiffness_min)),
            biw_mass_max: Some(QKind::Mass.internal(t.biw_mass_max)),
            total_mass_max: Some(QKind::Mass.internal(t.total_mass_max)),
            frontal: Some(limits_to_file(&t.frontal, "max_deceleration", QKind::Accel)),
            rear: Some(limits_to_file(&t.rear, "max_deceleration", QKind::Accel)),
            lateral: Some(limits_to_file(&t.lateral, "max_intrusion_velocity", QKind::Speed)),
            roof: Some(limits_to_file(&t.roof, "max_platen_velocity", QKind::Speed)),
        }),
        crash: Some(FileCrash {
            vehicle_mass: Some(model.crash.vehicle_mass),
            frontal: Some(scenario_to_file(&model.crash.frontal)),
            rear: Some(scenario_to_file(&model.crash.rear)),
            lateral: Some(scenario_to_file(&model.crash.lateral)),
            roof: Some(roof_to_file(&model.crash.roof)),
        }),
    };
    let mut s = serde_json::to_string_pretty(&file).expect("model serializes to JSON");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    pub(crate) const TWO_NODE: &str = r#"{
        "meta": { "name": "bar", "wheelbase": 2700, "track_width": 1650 },
        "materials": { "steel": { "youngs_modulus": 210000, "poisson_ratio": 0.3, "density": 7850 } },
        "sections": { "s40": { "width": 40, "height": 40, "thickness": 1.0 } },
        "nodes": [ { "id": 1, "position": [0, 0, 0] }, { "id": 2, "position": [1000, 0, 0] } ],
        "members": [ { "id": 1, "nodes": [1, 2], "section": "s40", "material": "steel",
                       "orientation": [0, 0, 1], "module": "deck" } ]
    }"#;

    #[test]
    fn minimal_file_converts_to_si() {
        let m = parse_model(TWO_NODE).unwrap();
        assert_eq!(m.members.len(), 1);
        assert_eq!(m.nodes[1].position, [1.0, 0.0, 0.0]);
        assert_eq!(m.meta.element_length, DEFAULT_ELEMENT_LENGTH);
        assert_eq!(m.materials["steel"].youngs_modulus, 210000.0 * 1e6);
        // rho * A * L with A = 156 mm², L = 1 m
        assert_relative_eq!(m.member_mass(&m.members[0]), 7850.0 * 156e-6, max_relative = 1e-12);
    }

    #[test]
    fn omitted_targets_take_design_spec() {
        let m = parse_model(TWO_NODE).unwrap();
        let t = &m.targets;
        assert_eq!(t.natural_frequency_min, 38.0);
        assert_eq!(t.bending_stiffness_min, 10.0e6);
        assert_eq!(t.torsional_stiffness_min, 12.0e3);
        assert_eq!(t.biw_mass_max, 250.0);
        assert_eq!(t.frontal.max_intrusion, 0.110);
        assert_relative_eq!(t.frontal.secondary / G, 30.0);
        assert_eq!(t.rear.max_intrusion, 0.145);
        assert_relative_eq!(t.rear.secondary / G, 16.0);
        assert_eq!(t.lateral.max_intrusion, 0.285);
        assert_eq!(t.lateral.secondary, 9.0);
        assert_eq!(t.roof.max_intrusion, 0.127);
        assert_relative_eq!(t.roof.secondary * 60.0e3, 5.0);
    }

    #[test]
    fn thick_wall_is_rejected_at_parse() {
        let text = TWO_NODE.replace(r#""thickness": 1.0"#, r#""thickness": 25"#);
        let err = parse_model(&text).unwrap_err();
        assert!(err.to_string().contains("t < min(b,h)/2 violated"), "{err}");
    }

    #[test]
    fn schema_errors_carry_field_path() {
        let text = TWO_NODE.replace(r#""module": "deck""#, r#""module": "trunk""#);
        match parse_model(&text).unwrap_err() {
            Error::Schema { path, .. } => assert_eq!(path, "members[0].module"),
            other => panic!("unexpected {other:?}"),
        }
        let text = TWO_NODE.replace(r#""density": 7850"#, r#""density": 7850, "colour": "red""#);
        assert!(matches!(parse_model(&text), Err(Error::Schema { .. })));
    }

    #[test]
    fn unknown_unit_and_duplicate_id() {
        let text = TWO_NODE.replace(r#""name": "bar","#, r#""name": "bar", "units": { "length": "in" },"#);
        assert!(matches!(parse_model(&text), Err(Error::UnknownUnit { .. })));
        let text = TWO_NODE.replace(r#""id": 2, "position""#, r#""id": 1, "position""#);
        assert!(matches!(
            parse_model(&text),
            Err(Error::DuplicateId { kind: "node", .. })
        ));
    }

    #[test]
    fn target_quantities_with_units() {
        let text = TWO_NODE.replace(
            r#""members""#,
            r#""targets": { "bending_stiffness_min": { "value": 12, "unit": "kN/mm" },
                            "lateral": { "max_intrusion_velocity": { "value": 36, "unit": "km/h" } } },
               "members""#,
        );
        let m = parse_model(&text).unwrap();
        assert_eq!(m.targets.bending_stiffness_min, 12.0e6);
        assert_eq!(m.targets.lateral.secondary, 10.0);
        let bad = text.replace(r#""unit": "kN/mm""#, r#""unit": "lbf/in""#);
        assert!(matches!(parse_model(&bad), Err(Error::UnknownUnit { .. })));
    }

    #[test]
    fn crash_overrides_apply() {
        let text = TWO_NODE.replace(
            r#""members""#,
            r#""crash": { "vehicle_mass": 900, "frontal": { "speed": 36, "n_cells": 3 } },
               "members""#,
        );
        let m = parse_model(&text).unwrap();
        assert_eq!(m.crash.vehicle_mass, 900.0);
        assert_eq!(m.crash.frontal.speed, 10.0);
        assert_eq!(m.crash.frontal.n_cells, 3);
        assert_eq!(m.crash.rear, CrashConfig::default().rear);
    }

    #[test]
    fn round_trip_is_identity() {
        let m = parse_model(TWO_NODE).unwrap();
        let again = parse_model(&serialize_model(&m)).unwrap();
        assert_eq!(m, again);
    }
}
