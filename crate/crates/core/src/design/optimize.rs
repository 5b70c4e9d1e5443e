//! Per-module section search.
//!
//! A module is analysed on its own: its members are cut out of the frame
//! and every node it shares with another module is pinned in all six
//! DOFs. The objective is that substructure's first flexible frequency.
//! The search is a coordinate sweep over a fixed (width, height,
//! thickness) grid; one sweep over the three coordinates is one try.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::Mutex;

use serde::Serialize;

use crate::assembly::{assemble, AssemblyOptions};
use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::modal::{modal_on_system, ModalOptions};
use crate::model::{ConstraintSpec, Dof, FrameModel, ModuleTag};
use crate::section::RectHollowSection;

/// Section design of one module. Backbone members share the outer size
/// but keep their own wall thickness.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModuleDesign {
    pub width: f64,
    pub height: f64,
    pub thickness: f64,
    pub backbone_thickness: f64,
}

impl ModuleDesign {
    fn key(&self) -> (i64, i64, i64) {
        let um = |v: f64| (v * 1e6).round() as i64;
        (um(self.width), um(self.height), um(self.thickness))
    }
}

/// Search box, m.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Bounds {
    pub width: (f64, f64),
    pub height: (f64, f64),
    pub thickness: (f64, f64),
    /// Grid step of width and height.
    pub size_step: f64,
    pub thickness_step: f64,
}

impl Default for Bounds {
    fn default() -> Self {
        Self {
            width: (0.040, 0.070),
            height: (0.040, 0.070),
            thickness: (0.0007, 0.0012),
            size_step: 0.005,
            thickness_step: 0.0001,
        }
    }
}

/// Grid values of one coordinate, built on whole micrometres.
fn axis(range: (f64, f64), step: f64) -> Result<Vec<f64>> {
    let um = |v: f64| (v * 1e6).round() as i64;
    let (lo, hi, st) = (um(range.0), um(range.1), um(step));
    if !(st > 0 && lo > 0 && hi >= lo) {
        return Err(Error::invalid(
            "design bounds",
            format!("bad range {range:?} / step {step}"),
        ));
    }
    Ok((0..)
        .map(|i| lo + i * st)
        .take_while(|&v| v <= hi)
        .map(|v| v as f64 / 1e6)
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Grid {
    pub widths: Vec<f64>,
    pub heights: Vec<f64>,
    pub thicknesses: Vec<f64>,
}

impl Grid {
    pub fn new(b: &Bounds) -> Result<Self> {
        Ok(Self {
            widths: axis(b.width, b.size_step)?,
            heights: axis(b.height, b.size_step)?,
            thicknesses: axis(b.thickness, b.thickness_step)?,
        })
    }

    pub fn len(&self) -> usize {
        self.widths.len() * self.heights.len() * self.thicknesses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn axis(&self, c: usize) -> &[f64] {
        match c {
            0 => &self.widths,
            1 => &self.heights,
            _ => &self.thicknesses,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizeOptions {
    pub bounds: Bounds,
    /// Coordinate sweeps; must be ≥ 1.
    pub max_tries: usize,
    /// Structural mass allowed for the module, kg.
    pub mass_budget: f64,
    pub execution: Execution,
    pub assembly: AssemblyOptions,
}

impl OptimizeOptions {
    pub fn new(mass_budget: f64) -> Self {
        Self {
            bounds: Bounds::default(),
            max_tries: 6,
            mass_budget,
            execution: Execution::default(),
            assembly: AssemblyOptions::default(),
        }
    }
}

/// One probed candidate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trial {
    /// 0 for the starting design.
    pub try_index: usize,
    pub coordinate: &'static str,
    pub design: ModuleDesign,
    /// kg
    pub mass: f64,
    pub feasible: bool,
    /// Hz; only evaluated for feasible candidates.
    pub frequency: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModuleOptimum {
    pub module: ModuleTag,
    pub design: ModuleDesign,
    /// Hz
    pub frequency: f64,
    /// kg
    pub mass: f64,
    pub mass_budget: f64,
    pub start: ModuleDesign,
    /// Hz; `None` when the start violated the budget or bounds.
    pub start_frequency: Option<f64>,
    pub tries: usize,
    pub log: Vec<Trial>,
}

/// Current design of a module, read from its first regular and first
/// backbone member.
pub fn current_design(model: &FrameModel, tag: ModuleTag) -> Result<ModuleDesign> {
    let section_of = |backbone: bool| {
        model
            .members
            .iter()
            .find(|m| m.module == tag && m.backbone == backbone)
            .and_then(|m| model.sections.get(&m.section))
    };
    let regular = section_of(false)
        .or_else(|| section_of(true))
        .ok_or_else(|| Error::invalid(format!("module {tag}"), "has no members"))?;
    let backbone = section_of(true).unwrap_or(regular);
    Ok(ModuleDesign {
        width: regular.width,
        height: regular.height,
        thickness: regular.thickness,
        backbone_thickness: backbone.thickness,
    })
}

/// Name of the section a module's members receive from [`apply_design`].
pub fn section_name(tag: ModuleTag, backbone: bool) -> String {
    if backbone {
        format!("{tag}_backbone")
    } else {
        tag.to_string()
    }
}

/// Writes the module's two sections (`<module>` and `<module>_backbone`)
/// and points the module's members at them.
pub fn apply_design(model: &mut FrameModel, tag: ModuleTag, d: &ModuleDesign) -> Result<()> {
    let regular = RectHollowSection::new(d.width, d.height, d.thickness)?;
    let backbone = RectHollowSection::new(d.width, d.height, d.backbone_thickness)?;
    model.sections.insert(section_name(tag, false), regular);
    model.sections.insert(section_name(tag, true), backbone);
    for m in model.members.iter_mut().filter(|m| m.module == tag) {
        m.section = section_name(tag, m.backbone);
    }
    Ok(())
}

/// Structural member mass of one module, kg.
pub fn module_mass(model: &FrameModel, tag: ModuleTag) -> f64 {
    model
        .members
        .iter()
        .filter(|m| m.module == tag)
        .map(|m| model.member_mass(m))
        .sum()
}

/// Budgets as shares of `biw_budget` proportional to current module masses.
pub fn module_budgets(model: &FrameModel, biw_budget: f64) -> BTreeMap<ModuleTag, f64> {
    let masses = model.module_masses();
    let total: f64 = masses.values().sum();
    masses
        .into_iter()
        .map(|(t, m)| (t, if total > 0.0 { biw_budget * m / total } else { 0.0 }))
        .collect()
}

/// Nodes a module shares with members of other modules.
pub fn interface_nodes(model: &FrameModel, tag: ModuleTag) -> BTreeSet<u32> {
    let nodes_of = |inside: bool| -> BTreeSet<u32> {
        model
            .members
            .iter()
            .filter(|m| (m.module == tag) == inside)
            .flat_map(|m| [m.node_i, m.node_j])
            .collect()
    };
    nodes_of(true).intersection(&nodes_of(false)).copied().collect()
}

/// The module cut out of the frame, with its interface pin set.
pub fn isolate_module(model: &FrameModel, tag: ModuleTag) -> Result<(FrameModel, Vec<ConstraintSpec>)> {
    let members: Vec<_> = model.members.iter().filter(|m| m.module == tag).cloned().collect();
    if members.is_empty() {
        return Err(Error::invalid(format!("module {tag}"), "has no members"));
    }
    let used: BTreeSet<u32> = members.iter().flat_map(|m| [m.node_i, m.node_j]).collect();
    let mut sub = model.clone();
    sub.members = members;
    sub.nodes.retain(|n| used.contains(&n.id));
    sub.groups.clear();
    sub.constraints.clear();
    sub.loadcases.clear();
    let pins = interface_nodes(model, tag)
        .into_iter()
        .map(|node| ConstraintSpec {
            node,
            dofs: Dof::ALL.to_vec(),
        })
        .collect();
    Ok((sub, pins))
}

/// First flexible frequency of a module on its own, interface pinned.
pub fn module_frequency(model: &FrameModel, tag: ModuleTag, asm: &AssemblyOptions) -> Result<f64> {
    let (sub, pins) = isolate_module(model, tag)?;
    substructure_frequency(&sub, &pins, asm)
}

fn substructure_frequency(sub: &FrameModel, pins: &[ConstraintSpec], asm: &AssemblyOptions) -> Result<f64> {
    let sys = assemble(sub, asm)?;
    let opts = ModalOptions {
        n_modes: 1,
        execution: asm.execution,
        ..Default::default()
    };
    modal_on_system(&sys, pins, &opts)?
        .first_flexible()
        .ok_or_else(|| Error::invalid("module modal analysis", "no flexible mode found"))
}

#[derive(Debug, Clone, Copy)]
struct Eval {
    mass: f64,
    frequency: Option<f64>,
}

/// Candidate ranking: higher frequency, then smaller mass, then
/// lexicographic (width, height, thickness).
fn better(a: (&ModuleDesign, &Eval), b: (&ModuleDesign, &Eval)) -> bool {
    let (fa, fb) = (
        a.1.frequency.unwrap_or(f64::NEG_INFINITY),
        b.1.frequency.unwrap_or(f64::NEG_INFINITY),
    );
    if fa != fb {
        return fa > fb;
    }
    if a.1.mass != b.1.mass {
        return a.1.mass < b.1.mass;
    }
    a.0.key() < b.0.key()
}

struct Evaluator<'a> {
    sub: FrameModel,
    pins: Vec<ConstraintSpec>,
    tag: ModuleTag,
    opts: &'a OptimizeOptions,
    cache: Mutex<HashMap<(i64, i64, i64), Eval>>,
}

impl<'a> Evaluator<'a> {
    fn new(model: &FrameModel, tag: ModuleTag, opts: &'a OptimizeOptions) -> Result<Self> {
        let (sub, pins) = isolate_module(model, tag)?;
        Ok(Self {
            sub,
            pins,
            tag,
            opts,
            cache: Mutex::new(HashMap::new()),
        })
    }

    fn in_bounds(&self, d: &ModuleDesign) -> bool {
        let b = &self.opts.bounds;
        let within = |v: f64, r: (f64, f64)| v >= r.0 - 1e-12 && v <= r.1 + 1e-12;
        within(d.width, b.width) && within(d.height, b.height) && within(d.thickness, b.thickness)
    }

    fn eval(&self, d: &ModuleDesign) -> Result<Eval> {
        if let Some(e) = self.cache.lock().expect("cache lock").get(&d.key()) {
            return Ok(*e);
        }
        let mut sub = self.sub.clone();
        apply_design(&mut sub, self.tag, d)?;
        let mass = module_mass(&sub, self.tag);
        let feasible = self.in_bounds(d) && mass <= self.opts.mass_budget;
        let frequency = if feasible {
            Some(substructure_frequency(&sub, &self.pins, &self.opts.assembly)?)
        } else {
            None
        };
        let e = Eval { mass, frequency };
        self.cache.lock().expect("cache lock").insert(d.key(), e);
        Ok(e)
    }

    fn eval_all(&self, designs: &[ModuleDesign]) -> Result<Vec<Eval>> {
        exec::map(self.opts.execution, designs, |d| self.eval(d))
            .into_iter()
            .collect()
    }
}

fn trial(try_index: usize, coordinate: &'static str, d: ModuleDesign, e: Eval) -> Trial {
    Trial {
        try_index,
        coordinate,
        design: d,
        mass: e.mass,
        feasible: e.frequency.is_some(),
        frequency: e.frequency,
    }
}

fn with_coordinate(d: &ModuleDesign, c: usize, v: f64) -> ModuleDesign {
    let mut out = *d;
    match c {
        0 => out.width = v,
        1 => out.height = v,
        _ => out.thickness = v,
    }
    out
}

/// Coordinate search from the module's current design. Each try sweeps
/// width, height and thickness in turn over the grid, moving to the best
/// feasible value of each; the search stops early once a full sweep
/// changes nothing.
pub fn optimize_module(model: &FrameModel, tag: ModuleTag, opts: &OptimizeOptions) -> Result<ModuleOptimum> {
    if opts.max_tries == 0 {
        return Err(Error::invalid("max tries", "must be >= 1"));
    }
    let grid = Grid::new(&opts.bounds)?;
    let ev = Evaluator::new(model, tag, opts)?;
    let start = current_design(model, tag)?;
    let start_eval = ev.eval(&start)?;
    let mut log = vec![trial(0, "start", start, start_eval)];
    let (mut best, mut best_eval) = (start, start_eval);
    let mut tries = 0;
    const NAMES: [&str; 3] = ["width", "height", "thickness"];
    for t in 1..=opts.max_tries {
        tries = t;
        let before = best.key();
        for (c, name) in NAMES.into_iter().enumerate() {
            let candidates: Vec<ModuleDesign> = grid.axis(c).iter().map(|&v| with_coordinate(&best, c, v)).collect();
            let evals = ev.eval_all(&candidates)?;
            for (d, e) in candidates.iter().zip(&evals) {
                log.push(trial(t, name, *d, *e));
                if e.frequency.is_some() && better((d, e), (&best, &best_eval)) {
                    best = *d;
                    best_eval = *e;
                }
            }
        }
        if best.key() == before {
            break;
        }
    }
    let frequency = best_eval
        .frequency
        .ok_or_else(|| Error::NoFeasibleCandidate(format!("module {tag} within {:.3} kg", opts.mass_budget)))?;
    Ok(ModuleOptimum {
        module: tag,
        design: best,
        frequency,
        mass: best_eval.mass,
        mass_budget: opts.mass_budget,
        start,
        start_frequency: start_eval.frequency,
        tries,
        log,
    })
}

/// Brute-force reference: every grid point, same feasibility and ranking.
pub fn enumerate_module(model: &FrameModel, tag: ModuleTag, opts: &OptimizeOptions) -> Result<(ModuleDesign, f64)> {
    let grid = Grid::new(&opts.bounds)?;
    let ev = Evaluator::new(model, tag, opts)?;
    let backbone_thickness = current_design(model, tag)?.backbone_thickness;
    let mut all = Vec::with_capacity(grid.len());
    for &width in &grid.widths {
        for &height in &grid.heights {
            for &thickness in &grid.thicknesses {
                all.push(ModuleDesign {
                    width,
                    height,
                    thickness,
                    backbone_thickness,
                });
            }
        }
    }
    let evals = ev.eval_all(&all)?;
    let mut best: Option<(ModuleDesign, Eval)> = None;
    for (d, e) in all.iter().zip(&evals) {
        if e.frequency.is_none() {
            continue;
        }
        if best.as_ref().is_none_or(|(bd, be)| better((d, e), (bd, be))) {
            best = Some((*d, *e));
        }
    }
    best.map(|(d, e)| (d, e.frequency.expect("feasible")))
        .ok_or_else(|| Error::NoFeasibleCandidate(format!("module {tag} within {:.3} kg", opts.mass_budget)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_axes_are_exact() {
        let g = Grid::new(&Bounds::default()).unwrap();
        assert_eq!(g.widths.len(), 7);
        assert_eq!(g.thicknesses.len(), 6);
        assert_eq!(g.widths[6], 0.07);
        assert_eq!(g.thicknesses[5], 0.0012);
    }

    #[test]
    fn ranking_prefers_frequency_then_mass_then_order() {
        let d = |w: f64| ModuleDesign {
            width: w,
            height: 0.05,
            thickness: 0.001,
            backbone_thickness: 0.0012,
        };
        let e = |f: f64, m: f64| Eval {
            mass: m,
            frequency: Some(f),
        };
        assert!(better((&d(0.04), &e(50.0, 10.0)), (&d(0.05), &e(49.0, 1.0))));
        assert!(better((&d(0.05), &e(50.0, 9.0)), (&d(0.04), &e(50.0, 10.0))));
        assert!(better((&d(0.04), &e(50.0, 9.0)), (&d(0.05), &e(50.0, 9.0))));
    }
}
