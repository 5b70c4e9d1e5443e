//! Unit families used by the model file and their factors to SI.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A family of physically equivalent units with exact factors to SI.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Length,
    Force,
    Moment,
    Stress,
    Density,
    Mass,
    Speed,
    Time,
    Stiffness,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::Length => "length",
            Family::Force => "force",
            Family::Moment => "moment",
            Family::Stress => "stress",
            Family::Density => "density",
            Family::Mass => "mass",
            Family::Speed => "speed",
            Family::Time => "time",
            Family::Stiffness => "stiffness",
        }
    }

    fn table(self) -> &'static [(&'static str, Factor)] {
        use Factor::*;
        match self {
            Family::Length => &[("m", Mul(1.0)), ("mm", Div(1e3)), ("cm", Div(1e2))],
            Family::Force => &[("N", Mul(1.0)), ("kN", Mul(1e3))],
            Family::Moment => &[("N*m", Mul(1.0)), ("N*mm", Div(1e3)), ("kN*m", Mul(1e3))],
            Family::Stress => &[("Pa", Mul(1.0)), ("MPa", Mul(1e6)), ("GPa", Mul(1e9))],
            Family::Density => &[("kg/m3", Mul(1.0)), ("g/cm3", Mul(1e3))],
            Family::Mass => &[("kg", Mul(1.0)), ("t", Mul(1e3))],
            Family::Speed => &[("m/s", Mul(1.0)), ("km/h", Div(3.6)), ("mm/s", Div(1e3))],
            Family::Time => &[("s", Mul(1.0)), ("ms", Div(1e3))],
            Family::Stiffness => &[("N/m", Mul(1.0)), ("N/mm", Mul(1e3)), ("kN/mm", Mul(1e6))],
        }
    }

    pub fn si_tag(self) -> &'static str {
        self.table()[0].0
    }
}

/// Conversion to SI; `Div` keeps factors like km/h → m/s (÷3.6) exact.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Factor {
    Mul(f64),
    Div(f64),
}

impl Factor {
    pub fn to_si(self, v: f64) -> f64 {
        match self {
            Factor::Mul(f) => v * f,
            Factor::Div(d) => v / d,
        }
    }
}

/// Unit declarations of a model file, one tag per family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UnitDecl {
    #[serde(default = "d_length")]
    pub length: String,
    #[serde(default = "d_force")]
    pub force: String,
    #[serde(default = "d_moment")]
    pub moment: String,
    #[serde(default = "d_stress")]
    pub stress: String,
    #[serde(default = "d_density")]
    pub density: String,
    #[serde(default = "d_mass")]
    pub mass: String,
    #[serde(default = "d_speed")]
    pub speed: String,
    #[serde(default = "d_time")]
    pub time: String,
    #[serde(default = "d_stiffness")]
    pub stiffness: String,
}

fn d_length() -> String {
    "mm".into()
}
fn d_force() -> String {
    "N".into()
}
fn d_moment() -> String {
    "N*m".into()
}
fn d_stress() -> String {
    "MPa".into()
}
fn d_density() -> String {
    "kg/m3".into()
}
fn d_mass() -> String {
    "kg".into()
}
fn d_speed() -> String {
    "km/h".into()
}
fn d_time() -> String {
    "ms".into()
}
fn d_stiffness() -> String {
    "N/mm".into()
}

impl Default for UnitDecl {
    /// Presentation defaults: mm, N, N·m, MPa, kg/m³, kg, km/h, ms, N/mm.
    fn default() -> Self {
        Self {
            length: d_length(),
            force: d_force(),
            moment: d_moment(),
            stress: d_stress(),
            density: d_density(),
            mass: d_mass(),
            speed: d_speed(),
            time: d_time(),
            stiffness: d_stiffness(),
        }
    }
}

impl UnitDecl {
    /// Every family declared in its SI unit.
    pub fn si() -> Self {
        Self {
            length: Family::Length.si_tag().into(),
            force: Family::Force.si_tag().into(),
            moment: Family::Moment.si_tag().into(),
            stress: Family::Stress.si_tag().into(),
            density: Family::Density.si_tag().into(),
            mass: Family::Mass.si_tag().into(),
            speed: Family::Speed.si_tag().into(),
            time: Family::Time.si_tag().into(),
            stiffness: Family::Stiffness.si_tag().into(),
        }
    }

    pub fn resolve(&self) -> Result<Units> {
        let mut factors = BTreeMap::new();
        for (family, tag) in [
            (Family::Length, &self.length),
            (Family::Force, &self.force),
            (Family::Moment, &self.moment),
            (Family::Stress, &self.stress),
            (Family::Density, &self.density),
            (Family::Mass, &self.mass),
            (Family::Speed, &self.speed),
            (Family::Time, &self.time),
            (Family::Stiffness, &self.stiffness),
        ] {
            let factor = family
                .table()
                .iter()
                .find(|(t, _)| *t == tag.as_str())
                .map(|(_, f)| *f)
                .ok_or_else(|| Error::UnknownUnit {
                    family: family.name(),
                    unit: tag.clone(),
                    path: format!("meta.units.{}", family.name()),
                })?;
            factors.insert(family.name(), factor);
        }
        Ok(Units { factors })
    }
}

/// Resolved conversion factors.
#[derive(Debug, Clone)]
pub struct Units {
    factors: BTreeMap<&'static str, Factor>,
}

impl Units {
    pub fn to_si(&self, family: Family, v: f64) -> f64 {
        self.factors[family.name()].to_si(v)
    }

    pub fn vec_to_si(&self, family: Family, v: [f64; 3]) -> [f64; 3] {
        v.map(|x| self.to_si(family, x))
    }
}
