//! Modular design flow: per-module section search, the outer repair loop
//! and target gating.

mod design_loop;
pub mod gate;
pub mod optimize;

pub use design_loop::{
    design_loop, evaluate_frame, evaluate_static, DesignOptions, DesignOutcome, FrameEvaluation, IterationRecord,
    StaticEvaluation,
};
pub use gate::{deviation, gate, gate_crash, gate_static, CrashBlock, Direction, GateInputs, GateReport, GateRow};
pub use optimize::{
    apply_design, current_design, enumerate_module, interface_nodes, isolate_module, module_budgets, module_frequency,
    module_mass, optimize_module, section_name, Bounds, Grid, ModuleDesign, ModuleOptimum, OptimizeOptions, Trial,
};
