//! Outer design loop: optimize every module, reassemble, check the static
//! targets, repair the weakest module, and gate crash once the static
//! targets hold.

use std::collections::BTreeMap;

use serde::Serialize;

use super::gate::{gate, gate_static, GateInputs, GateReport};
use super::optimize::{
    apply_design, module_budgets, module_mass, optimize_module, Bounds, ModuleOptimum, OptimizeOptions,
};
use crate::assembly::{assemble, AssemblyOptions};
use crate::crash::{run_all_scenarios, CrashOptions, ScenarioRun};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::modal::{modal_on_system, ModalOptions, ModeSet};
use crate::model::{structural_mass, FrameModel, ModuleTag, TargetSet};
use crate::statics::{
    bending_on_system, torsion_on_system, BendingResult, TorsionResult, BENDING_LOAD, TORSION_TORQUE,
};

/// Whole-frame static results.
#[derive(Debug, Clone, PartialEq)]
pub struct StaticEvaluation {
    pub modes: ModeSet,
    /// First free-free flexible frequency, Hz.
    pub frequency: f64,
    pub bending: BendingResult,
    pub torsion: TorsionResult,
    /// Structural (body-in-white) mass, kg.
    pub biw_mass: f64,
    /// kg
    pub total_mass: f64,
    pub module_masses: BTreeMap<ModuleTag, f64>,
}

impl StaticEvaluation {
    pub fn gate_inputs(&self) -> GateInputs {
        GateInputs {
            frequency: Some(self.frequency),
            bending_stiffness: Some(self.bending.stiffness),
            torsional_stiffness: Some(self.torsion.stiffness),
            biw_mass: Some(self.biw_mass),
            total_mass: Some(self.total_mass),
            crash: BTreeMap::new(),
        }
    }
}

/// Free-free modes plus both stiffness tests on one assembly.
pub fn evaluate_static(model: &FrameModel, asm: &AssemblyOptions, n_modes: usize) -> Result<StaticEvaluation> {
    let sys = assemble(model, asm)?;
    let opts = ModalOptions {
        n_modes,
        execution: asm.execution,
        ..Default::default()
    };
    let modes = modal_on_system(&sys, &[], &opts)?;
    let frequency = modes
        .first_flexible()
        .ok_or_else(|| Error::invalid("modal analysis", "no flexible mode found"))?;
    let bending = bending_on_system(model, &sys, BENDING_LOAD)?;
    let torsion = torsion_on_system(model, &sys, TORSION_TORQUE)?;
    Ok(StaticEvaluation {
        modes,
        frequency,
        bending,
        torsion,
        biw_mass: structural_mass(model),
        total_mass: model.total_mass(),
        module_masses: model.module_masses(),
    })
}

/// Static evaluation, crash runs (only when the static rows pass, unless
/// `force_crash`) and the resulting gate.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameEvaluation {
    pub statics: StaticEvaluation,
    pub crash: Vec<ScenarioRun>,
    pub report: GateReport,
}

pub fn evaluate_frame(
    model: &FrameModel,
    asm: &AssemblyOptions,
    crash: &CrashOptions,
    n_modes: usize,
    force_crash: bool,
) -> Result<FrameEvaluation> {
    let statics = evaluate_static(model, asm, n_modes)?;
    let mut inputs = statics.gate_inputs();
    let static_rows = gate_static(&inputs, &model.targets)?;
    let static_pass = static_rows.iter().all(|r| r.pass);
    if !(static_pass || force_crash) {
        return Ok(FrameEvaluation {
            statics,
            crash: Vec::new(),
            report: GateReport {
                static_rows,
                crash: Vec::new(),
                pass: false,
            },
        });
    }
    let runs = run_all_scenarios(model, crash)?;
    inputs.crash = runs.iter().map(|r| (r.metrics.scenario, r.metrics.clone())).collect();
    let report = gate(&inputs, &model.targets)?;
    Ok(FrameEvaluation {
        statics,
        crash: runs,
        report,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DesignOptions {
    /// Outer iterations (the all-module pass counts as the first).
    pub max_iterations: usize,
    /// Coordinate sweeps per module optimization.
    pub max_tries: usize,
    pub bounds: Bounds,
    /// Overrides the model's targets.
    pub targets: Option<TargetSet>,
    pub assembly: AssemblyOptions,
    pub crash: CrashOptions,
    /// Modes reported for the whole frame.
    pub n_modes: usize,
    pub execution: Execution,
}

impl Default for DesignOptions {
    fn default() -> Self {
        Self {
            max_iterations: 6,
            max_tries: 6,
            bounds: Bounds::default(),
            targets: None,
            assembly: AssemblyOptions::default(),
            crash: CrashOptions::default(),
            n_modes: 6,
            execution: Execution::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterationRecord {
    pub iteration: usize,
    /// Modules re-optimized in this iteration.
    pub modules: Vec<ModuleTag>,
    /// Module budgets used, kg.
    pub budgets: BTreeMap<ModuleTag, f64>,
    /// Standalone frequency of every module after the iteration, Hz.
    pub module_frequencies: BTreeMap<ModuleTag, f64>,
    pub frequency: f64,
    /// N/m
    pub bending_stiffness: f64,
    /// N·m/deg
    pub torsional_stiffness: f64,
    pub biw_mass: f64,
    pub static_pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DesignOutcome {
    pub model: FrameModel,
    pub evaluation: FrameEvaluation,
    pub log: Vec<IterationRecord>,
    /// Latest optimum of every module; empty when the input already passed.
    pub optima: BTreeMap<ModuleTag, ModuleOptimum>,
    pub reoptimizations: usize,
}

impl DesignOutcome {
    pub fn report(&self) -> &GateReport {
        &self.evaluation.report
    }

    pub fn pass(&self) -> bool {
        self.evaluation.report.pass
    }
}

fn record(
    iteration: usize,
    modules: Vec<ModuleTag>,
    budgets: &BTreeMap<ModuleTag, f64>,
    optima: &BTreeMap<ModuleTag, ModuleOptimum>,
    eval: &FrameEvaluation,
) -> IterationRecord {
    let s = &eval.statics;
    IterationRecord {
        iteration,
        modules,
        budgets: budgets.clone(),
        module_frequencies: optima.iter().map(|(&t, o)| (t, o.frequency)).collect(),
        frequency: s.frequency,
        bending_stiffness: s.bending.stiffness,
        torsional_stiffness: s.torsion.stiffness,
        biw_mass: s.biw_mass,
        static_pass: eval.report.static_pass(),
    }
}

/// Runs the loop. A model that already meets every target is returned
/// after a single evaluation.
///
/// Module budgets start as shares of the body-in-white mass limit in
/// proportion to the input's module masses. A repair hands the mass left
/// unused by all modules to the weakest one (lowest standalone frequency)
/// and re-optimizes it from its current optimum. The loop stops at the
/// iteration cap, on a repair that changes nothing, or as soon as the
/// static targets hold; crash is then run once and gated.
pub fn design_loop(model: &FrameModel, opts: &DesignOptions) -> Result<DesignOutcome> {
    if opts.max_iterations == 0 {
        return Err(Error::invalid("max iterations", "must be >= 1"));
    }
    let mut model = model.clone();
    if let Some(t) = &opts.targets {
        model.targets = t.clone();
    }
    model.ensure_valid()?;
    let asm = AssemblyOptions {
        execution: opts.execution,
        ..opts.assembly
    };
    let crash = CrashOptions {
        execution: opts.execution,
        ..opts.crash
    };
    let first = evaluate_frame(&model, &asm, &crash, opts.n_modes, false)?;
    if first.report.pass {
        return Ok(DesignOutcome {
            model,
            evaluation: first,
            log: Vec::new(),
            optima: BTreeMap::new(),
            reoptimizations: 0,
        });
    }

    let biw_limit = model.targets.biw_mass_max;
    // non-member structural mass (flagged lumped masses) is not designable
    let fixed = structural_mass(&model) - model.module_masses().values().sum::<f64>();
    let mut budgets = module_budgets(&model, biw_limit - fixed);
    let module_opts = |budget: f64| OptimizeOptions {
        bounds: opts.bounds,
        max_tries: opts.max_tries,
        mass_budget: budget,
        execution: opts.execution,
        assembly: asm,
    };

    let mut optima = BTreeMap::new();
    for tag in ModuleTag::ALL {
        let o = optimize_module(&model, tag, &module_opts(budgets[&tag]))?;
        apply_design(&mut model, tag, &o.design)?;
        optima.insert(tag, o);
    }
    let mut eval = evaluate_frame(&model, &asm, &crash, opts.n_modes, false)?;
    let mut log = vec![record(1, ModuleTag::ALL.to_vec(), &budgets, &optima, &eval)];
    let mut reoptimizations = 0;

    while !eval.report.static_pass() && log.len() < opts.max_iterations {
        let weakest = *optima
            .iter()
            .min_by(|a, b| a.1.frequency.total_cmp(&b.1.frequency).then(a.0.cmp(b.0)))
            .expect("four modules")
            .0;
        let used: f64 = ModuleTag::ALL.iter().map(|&t| module_mass(&model, t)).sum();
        let slack = (biw_limit - fixed - used).max(0.0);
        let budget = module_mass(&model, weakest) + slack;
        let o = optimize_module(&model, weakest, &module_opts(budget))?;
        let stalled = o.design == optima[&weakest].design;
        budgets.insert(weakest, budget);
        apply_design(&mut model, weakest, &o.design)?;
        optima.insert(weakest, o);
        reoptimizations += 1;
        if stalled {
            log.push(record(log.len() + 1, vec![weakest], &budgets, &optima, &eval));
            break;
        }
        eval = evaluate_frame(&model, &asm, &crash, opts.n_modes, false)?;
        log.push(record(log.len() + 1, vec![weakest], &budgets, &optima, &eval));
    }

    Ok(DesignOutcome {
        model,
        evaluation: eval,
        log,
        optima,
        reoptimizations,
    })
}
