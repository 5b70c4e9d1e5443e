use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use spaceframe::assembly::{assemble, AssemblyOptions};
use spaceframe::crash::{run_scenario, CrashOptions, Scenario, ScenarioRun};
use spaceframe::design::{design_loop, evaluate_frame, evaluate_static, DesignOptions, GateReport};
use spaceframe::modal::{modal_on_system, ModalOptions};
use spaceframe::model::demo::{demo_frame, DEMO_NAME, DEMO_SOURCE};
use spaceframe::model::{parse_model, serialize_model, validate, FrameModel, Severity};
use spaceframe::report::{self, RunReport};
use spaceframe::statics::{bending_stiffness_test, torsional_stiffness_test, BENDING_LOAD, TORSION_TORQUE};
use spaceframe::Error;

#[derive(Parser, Debug)]
#[command(
    name = "spaceframe",
    version,
    about = "Space-frame chassis stiffness, modal, crash and design-gate analysis"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check a model file and print its mass summary
    Validate(Common),
    /// Free-free modes plus bending and torsion tests
    Static(Common),
    /// Free-free modal analysis; writes a mode-shape table
    Modal(Common),
    /// Torsional stiffness test
    Torsion(Common),
    /// Bending stiffness test
    Bending(Common),
    /// Crash scenarios; writes one CSV time history per scenario
    Crash(Common),
    /// Module optimization and repair loop; writes the optimized model
    Optimize(Common),
    /// Full target gate (static and crash)
    Gate(Common),
    /// Write the bundled demo frame model
    Demo(Common),
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Model file, or `demo-frame` for the bundled demo
    #[arg(value_name = "MODEL")]
    model_arg: Option<String>,
    /// Model file (alternative to the positional argument)
    #[arg(long = "model", value_name = "PATH")]
    model: Option<String>,
    /// Crash scenario: frontal, rear, lateral or roof (default: all)
    #[arg(long)]
    scenario: Option<String>,
    /// Output directory for reports and CSV files
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Exit with status 1 when a target fails
    #[arg(long)]
    strict: bool,
    /// Crush cells per scenario chain
    #[arg(long = "n-cells")]
    n_cells: Option<usize>,
    /// Explicit time step, s
    #[arg(long)]
    dt: Option<f64>,
    /// Coordinate sweeps per module optimization
    #[arg(long = "max-tries", default_value_t = 6)]
    max_tries: usize,
    /// Accepted for reproducible scripts; the analyses use no randomness
    #[arg(long)]
    seedless: bool,
}

impl Common {
    fn model_name(&self) -> Option<&str> {
        self.model.as_deref().or(self.model_arg.as_deref())
    }

    fn crash_options(&self) -> Result<CrashOptions, Error> {
        if let Some(dt) = self.dt {
            if !(dt > 0.0 && dt.is_finite()) {
                return Err(Error::invalid("--dt", "must be a positive time step in seconds"));
            }
        }
        if self.n_cells == Some(0) {
            return Err(Error::invalid("--n-cells", "must be >= 1"));
        }
        Ok(CrashOptions {
            n_cells: self.n_cells,
            dt: self.dt,
            ..Default::default()
        })
    }

    fn scenarios(&self) -> Result<Vec<Scenario>, Error> {
        match &self.scenario {
            None => Ok(Scenario::ALL.to_vec()),
            Some(s) => Scenario::ALL
                .into_iter()
                .find(|x| x.as_str().eq_ignore_ascii_case(s))
                .map(|x| vec![x])
                .ok_or_else(|| Error::invalid("--scenario", format!("unknown scenario `{s}`"))),
        }
    }

    fn options_echo(&self, command: &str) -> serde_json::Value {
        json!({
            "command": command,
            "scenario": self.scenario,
            "strict": self.strict,
            "n_cells": self.n_cells,
            "dt": self.dt.map(|d| report::q(d, "s")),
            "max_tries": self.max_tries,
        })
    }
}

/// Outcome of a subcommand that ran to completion.
enum Status {
    Ok,
    /// Analysis finished but a target failed under `--strict`.
    Failed,
}

fn load_model(name: Option<&str>) -> Result<FrameModel, Error> {
    let name = name.ok_or_else(|| Error::invalid("model", "no model given (path or `demo-frame`)"))?;
    if name == DEMO_NAME {
        return Ok(demo_frame());
    }
    let text = std::fs::read_to_string(name).map_err(|e| Error::Io(format!("{name}: {e}")))?;
    parse_model(&text)
}

fn write(out: &Path, file: &str, text: &str) -> Result<PathBuf, Error> {
    std::fs::create_dir_all(out).map_err(|e| Error::Io(format!("{}: {e}", out.display())))?;
    let path = out.join(file);
    std::fs::write(&path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    Ok(path)
}

fn emit(out: &Path, command: &str, rep: &RunReport) -> Result<(), Error> {
    let path = write(out, &format!("{command}-report.json"), &rep.to_json())?;
    println!("report: {}", path.display());
    Ok(())
}

fn print_gate(g: &GateReport) {
    println!(
        "{:<34} {:>10} {:>10} {:>9}  unit",
        "metric", "target", "result", "dev %"
    );
    for r in g.rows() {
        println!(
            "{:<34} {:>10.4} {:>10.4} {:>9.2}  {}{}",
            r.metric,
            r.target,
            r.result,
            r.deviation,
            r.unit,
            if r.pass { "" } else { "  FAIL" }
        );
    }
    for b in &g.crash {
        println!("{:<10} ({}) min dev {:.2}%", b.scenario, b.program, b.min_deviation);
    }
    println!("gate: {}", if g.pass { "PASS" } else { "FAIL" });
    if let Some(r) = g.binding() {
        println!("binding: {} ({:.2}%)", r.metric, r.deviation);
    }
}

fn strict_status(c: &Common, pass: bool) -> Status {
    if c.strict && !pass {
        Status::Failed
    } else {
        Status::Ok
    }
}

fn crash_summary(run: &ScenarioRun) {
    let m = &run.metrics;
    println!(
        "{:<8} intrusion {:.2} mm, deceleration {:.2} g (unfiltered {:.2} g), intrusion velocity {:.3} m/s, energy imbalance {:.3}%",
        m.scenario.as_str(),
        m.max_intrusion * 1e3,
        m.peak_deceleration / 9.81,
        m.peak_deceleration_raw / 9.81,
        m.max_intrusion_velocity,
        m.energy_imbalance * 100.0
    );
}

fn run(command: &Command) -> Result<Status, Error> {
    let (name, c) = match command {
        Command::Validate(c) => ("validate", c),
        Command::Static(c) => ("static", c),
        Command::Modal(c) => ("modal", c),
        Command::Torsion(c) => ("torsion", c),
        Command::Bending(c) => ("bending", c),
        Command::Crash(c) => ("crash", c),
        Command::Optimize(c) => ("optimize", c),
        Command::Gate(c) => ("gate", c),
        Command::Demo(c) => ("demo", c),
    };
    if let Command::Demo(_) = command {
        let path = write(&c.out, &format!("{DEMO_NAME}.json"), DEMO_SOURCE)?;
        println!("wrote {}", path.display());
        return Ok(Status::Ok);
    }
    let model = load_model(c.model_name())?;
    let asm = AssemblyOptions::default();
    let mut rep = RunReport::new(&model, c.options_echo(name));
    let started = Instant::now();
    let status = match command {
        Command::Validate(_) => {
            let v = validate(&model);
            for i in &v.issues {
                let tag = if i.severity == Severity::Error {
                    "error"
                } else {
                    "warning"
                };
                println!("{tag}: {}: {}", i.path, i.message);
            }
            println!(
                "{}: {} nodes, {} members, structural mass {:.3} kg, total mass {:.3} kg",
                model.meta.name,
                model.nodes.len(),
                model.members.len(),
                v.structural_mass,
                v.total_mass
            );
            for (t, m) in &v.module_masses {
                println!("  {t:<6} {m:.3} kg");
            }
            v.into_result()?;
            Status::Ok
        }
        Command::Static(_) => {
            let s = evaluate_static(&model, &asm, 6)?;
            println!(
                "first flexible {:.3} Hz, bending {:.3} kN/mm, torsion {:.3} kN*m/deg, BIW mass {:.3} kg",
                s.frequency,
                s.bending.stiffness / 1e6,
                s.torsion.stiffness / 1e3,
                s.biw_mass
            );
            rep.add("static", report::static_block(&s));
            Status::Ok
        }
        Command::Modal(_) => {
            let sys = assemble(&model, &asm)?;
            let modes = modal_on_system(&sys, &[], &ModalOptions::default())?;
            for (i, m) in modes.modes.iter().enumerate() {
                println!("{:>3} {:>10.3} Hz  {}", i + 1, m.frequency, m.class.as_str());
            }
            let path = write(&c.out, "modes.csv", &report::mode_table_csv(&modes, &sys.mesh)?)?;
            println!("mode shapes: {}", path.display());
            rep.add("modal", report::modal_block(&modes));
            Status::Ok
        }
        Command::Torsion(_) => {
            let t = torsional_stiffness_test(&model, TORSION_TORQUE, &asm)?;
            println!("torsional stiffness {:.3} kN*m/deg", t.stiffness / 1e3);
            rep.add("torsion", report::torsion_block(&t));
            Status::Ok
        }
        Command::Bending(_) => {
            let b = bending_stiffness_test(&model, BENDING_LOAD, &asm)?;
            println!("bending stiffness {:.3} kN/mm", b.stiffness / 1e6);
            rep.add("bending", report::bending_block(&b));
            Status::Ok
        }
        Command::Crash(_) => {
            let opts = c.crash_options()?;
            let mut blocks = serde_json::Map::new();
            for s in c.scenarios()? {
                let run = run_scenario(&model, s, &opts)?;
                crash_summary(&run);
                let csv = match (&run.histories, &run.roof) {
                    (Some(h), _) => report::crash_history_csv(h)?,
                    (None, Some(r)) => report::roof_csv(r)?,
                    (None, None) => unreachable!("every scenario yields a history or a roof path"),
                };
                let path = write(&c.out, &format!("crash-{s}.csv"), &csv)?;
                println!("         history: {}", path.display());
                blocks.insert(s.as_str().into(), report::crash_block(&run));
            }
            rep.add("crash", blocks.into());
            Status::Ok
        }
        Command::Optimize(_) => {
            let opts = DesignOptions {
                max_tries: c.max_tries,
                crash: c.crash_options()?,
                ..Default::default()
            };
            let out = design_loop(&model, &opts)?;
            for (t, o) in &out.optima {
                println!(
                    "{t:<6} b {:.0} mm, h {:.0} mm, t {:.1} mm: {:.2} Hz, {:.2} / {:.2} kg, {} tries",
                    o.design.width * 1e3,
                    o.design.height * 1e3,
                    o.design.thickness * 1e3,
                    o.frequency,
                    o.mass,
                    o.mass_budget,
                    o.tries
                );
            }
            print_gate(out.report());
            let path = write(
                &c.out,
                &format!("{}-optimized.json", model.meta.name),
                &serialize_model(&out.model),
            )?;
            println!("optimized model: {}", path.display());
            rep.add("design", report::design_block(&out));
            rep.add("static", report::static_block(&out.evaluation.statics));
            rep.add("gate", report::gate_block(out.report()));
            strict_status(c, out.pass())
        }
        Command::Gate(_) => {
            let e = evaluate_frame(&model, &asm, &c.crash_options()?, 6, true)?;
            print_gate(&e.report);
            rep.add("static", report::static_block(&e.statics));
            let crash: serde_json::Map<_, _> = e
                .crash
                .iter()
                .map(|r| (r.metrics.scenario.as_str().to_string(), report::crash_block(r)))
                .collect();
            rep.add("crash", crash.into());
            rep.add("gate", report::gate_block(&e.report));
            strict_status(c, e.report.pass)
        }
        Command::Demo(_) => unreachable!(),
    };
    eprintln!("{name}: {:.2?}", started.elapsed());
    if name != "validate" {
        emit(&c.out, name, &rep)?;
    }
    Ok(status)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli.command) {
        Ok(Status::Ok) => ExitCode::SUCCESS,
        Ok(Status::Failed) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_input_error() { 2 } else { 1 })
        }
    }
}
