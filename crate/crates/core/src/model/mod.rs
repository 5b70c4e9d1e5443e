//! Frame data model: nodes, members, sections, materials, node groups,
//! constraint sets, load cases, design targets and crash configuration.
//!
//! Every quantity held here is SI (m, kg, s, N, Pa). Unit conversion is
//! confined to [`schema`], which reads and writes the JSON model file.

pub mod demo;
pub mod schema;
pub mod units;
mod validate;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::crash::CrashConfig;
use crate::material::JcParams;
use crate::section::RectHollowSection;

pub use schema::{parse_model, serialize_model};
pub use validate::{structural_mass, validate, Issue, Severity, ValidationReport};

pub type Vec3 = [f64; 3];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeSpec {
    pub id: u32,
    pub position: Vec3,
    /// Attached point mass in kg (battery, motor, occupants, ...).
    pub lumped_mass: f64,
    /// Whether `lumped_mass` counts toward the body-in-white mass.
    pub structural: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaterialSpec {
    pub name: String,
    pub youngs_modulus: f64,
    pub poisson_ratio: f64,
    pub density: f64,
    pub jc: Option<JcParams>,
}

impl MaterialSpec {
    pub fn shear_modulus(&self) -> f64 {
        self.youngs_modulus / (2.0 * (1.0 + self.poisson_ratio))
    }
}

/// The four structural modules a space frame is decomposed into.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModuleTag {
    Deck,
    Front,
    Rear,
    Roof,
}

impl ModuleTag {
    pub const ALL: [ModuleTag; 4] = [ModuleTag::Deck, ModuleTag::Front, ModuleTag::Rear, ModuleTag::Roof];

    pub fn as_str(&self) -> &'static str {
        match self {
            ModuleTag::Deck => "deck",
            ModuleTag::Front => "front",
            ModuleTag::Rear => "rear",
            ModuleTag::Roof => "roof",
        }
    }
}

impl fmt::Display for ModuleTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MemberSpec {
    pub id: u32,
    pub node_i: u32,
    pub node_j: u32,
    pub section: String,
    pub material: String,
    /// Any vector in the local x-z plane, i.e. along the section width `b`;
    /// the height `h` lies along local y, perpendicular to it.
    pub orientation: Vec3,
    pub module: ModuleTag,
    /// Backbone beams, pillars and shotguns keep a separate wall thickness.
    pub backbone: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Dof {
    Ux,
    Uy,
    Uz,
    Rx,
    Ry,
    Rz,
}

impl Dof {
    pub const ALL: [Dof; 6] = [Dof::Ux, Dof::Uy, Dof::Uz, Dof::Rx, Dof::Ry, Dof::Rz];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Dof::Ux => "Ux",
            Dof::Uy => "Uy",
            Dof::Uz => "Uz",
            Dof::Rx => "Rx",
            Dof::Ry => "Ry",
            Dof::Rz => "Rz",
        }
    }

    pub fn from_name(s: &str) -> Option<Dof> {
        Dof::ALL.into_iter().find(|d| d.name().eq_ignore_ascii_case(s))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstraintSpec {
    pub node: u32,
    pub dofs: Vec<Dof>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoadSpec {
    pub node: u32,
    pub force: Vec3,
    pub moment: Vec3,
}

/// A named set of nodes and/or members. Load-point groups may carry
/// per-node load fractions (normalized when used).
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Group {
    pub nodes: Vec<u32>,
    pub members: Vec<u32>,
    pub fractions: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Meta {
    pub name: String,
    pub wheelbase: f64,
    pub track_width: f64,
    /// Target element length used when members are subdivided.
    pub element_length: f64,
}

/// Limits for one crash block: a primary intrusion limit and a secondary
/// limit (deceleration, intrusion velocity or platen velocity).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrashLimits {
    pub max_intrusion: f64,
    pub secondary: f64,
}

/// Design targets, SI units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetSet {
    /// Hz
    pub natural_frequency_min: f64,
    /// N/m
    pub bending_stiffness_min: f64,
    /// N·m/deg
    pub torsional_stiffness_min: f64,
    pub biw_mass_max: f64,
    pub total_mass_max: f64,
    /// intrusion m, deceleration m/s²
    pub frontal: CrashLimits,
    /// intrusion m, deceleration m/s²
    pub rear: CrashLimits,
    /// intrusion m, intrusion velocity m/s
    pub lateral: CrashLimits,
    /// intrusion m, platen velocity m/s
    pub roof: CrashLimits,
}

/// Standard gravity used for g's.
pub const G: f64 = 9.81;

impl Default for TargetSet {
    /// Sedan electric car design specification.
    fn default() -> Self {
        Self {
            natural_frequency_min: 38.0,
            bending_stiffness_min: 10.0e6,
            torsional_stiffness_min: 12.0e3,
            biw_mass_max: 250.0,
            total_mass_max: 1000.0,
            frontal: CrashLimits {
                max_intrusion: 0.110,
                secondary: 30.0 * G,
            },
            rear: CrashLimits {
                max_intrusion: 0.145,
                secondary: 16.0 * G,
            },
            lateral: CrashLimits {
                max_intrusion: 0.285,
                secondary: 9.0,
            },
            roof: CrashLimits {
                max_intrusion: 0.127,
                secondary: 5.0e-3 / 60.0,
            },
        }
    }
}

/// Complete frame description; immutable once validated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameModel {
    pub meta: Meta,
    pub materials: BTreeMap<String, MaterialSpec>,
    pub sections: BTreeMap<String, RectHollowSection>,
    pub nodes: Vec<NodeSpec>,
    pub members: Vec<MemberSpec>,
    pub groups: BTreeMap<String, Group>,
    pub constraints: BTreeMap<String, Vec<ConstraintSpec>>,
    pub loadcases: BTreeMap<String, Vec<LoadSpec>>,
    pub targets: TargetSet,
    pub crash: CrashConfig,
}

/// Well-known group names.
pub mod groups {
    pub const FRONT_SPRINGHOUSES: &str = "front_springhouses";
    pub const REAR_SPRINGHOUSES: &str = "rear_springhouses";
    pub const BENDING_LOAD_POINTS: &str = "bending_load_points";
}

/// Well-known constraint-set names.
pub mod constraint_sets {
    pub const BENDING: &str = "bending";
    pub const TORSION: &str = "torsion";
}

impl FrameModel {
    pub fn node(&self, id: u32) -> Option<&NodeSpec> {
        self.nodes.iter().find(|n| n.id == id)
    }

    pub fn node_index(&self) -> BTreeMap<u32, usize> {
        self.nodes.iter().enumerate().map(|(i, n)| (n.id, i)).collect()
    }

    pub fn group(&self, name: &str) -> crate::Result<&Group> {
        self.groups
            .get(name)
            .ok_or_else(|| crate::Error::MissingGroup(name.to_string()))
    }

    pub fn member_length(&self, m: &MemberSpec) -> f64 {
        match (self.node(m.node_i), self.node(m.node_j)) {
            (Some(a), Some(b)) => distance(&a.position, &b.position),
            _ => 0.0,
        }
    }

    /// ρ·A·L of one member.
    pub fn member_mass(&self, m: &MemberSpec) -> f64 {
        let (Some(sec), Some(mat)) = (self.sections.get(&m.section), self.materials.get(&m.material)) else {
            return 0.0;
        };
        mat.density * sec.properties().area * self.member_length(m)
    }

    /// Structural member mass per module.
    pub fn module_masses(&self) -> BTreeMap<ModuleTag, f64> {
        let mut out: BTreeMap<ModuleTag, f64> = ModuleTag::ALL.iter().map(|&t| (t, 0.0)).collect();
        for m in &self.members {
            *out.entry(m.module).or_default() += self.member_mass(m);
        }
        out
    }

    /// Structural mass plus every lumped node mass.
    pub fn total_mass(&self) -> f64 {
        let members: f64 = self.members.iter().map(|m| self.member_mass(m)).sum();
        members + self.nodes.iter().map(|n| n.lumped_mass).sum::<f64>()
    }

    /// Copy with every coordinate mapped through the affine map `f`.
    /// Orientation vectors and load vectors are mapped as directions,
    /// i.e. `f(p) - f(0)`.
    pub fn transformed(&self, f: impl Fn(Vec3) -> Vec3) -> FrameModel {
        let origin = f([0.0; 3]);
        let dir = |v: Vec3| {
            let p = f(v);
            [p[0] - origin[0], p[1] - origin[1], p[2] - origin[2]]
        };
        let mut out = self.clone();
        for n in &mut out.nodes {
            n.position = f(n.position);
        }
        for m in &mut out.members {
            m.orientation = dir(m.orientation);
        }
        for l in out.loadcases.values_mut().flatten() {
            l.force = dir(l.force);
            l.moment = dir(l.moment);
        }
        out
    }

    /// Runs [`validate`] and converts errors into `Error::Validation`.
    pub fn ensure_valid(&self) -> crate::Result<()> {
        validate(self).into_result().map(|_| ())
    }
}

pub fn distance(a: &Vec3, b: &Vec3) -> f64 {
    ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2) + (b[2] - a[2]).powi(2)).sqrt()
}
