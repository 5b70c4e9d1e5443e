//! Report determinism and formatting.

use proptest::prelude::*;
use serde_json::{json, Value};
use spaceframe::assembly::AssemblyOptions;
use spaceframe::crash::CrashOptions;
use spaceframe::design::evaluate_frame;
use spaceframe::exec::Execution;
use spaceframe::model::demo::demo_frame;
use spaceframe::model::parse_model;
use spaceframe::report::*;

fn full_report(execution: Execution) -> (RunReport, Vec<String>) {
    let m = demo_frame();
    let asm = AssemblyOptions {
        execution,
        ..Default::default()
    };
    let crash = CrashOptions {
        execution,
        ..Default::default()
    };
    let ev = evaluate_frame(&m, &asm, &crash, 6, true).unwrap();
    let mut r = RunReport::new(&m, json!({ "n_modes": 6, "dt": crash.dt }));
    r.add("static", static_block(&ev.statics));
    for run in &ev.crash {
        r.add(&format!("crash.{}", run.metrics.scenario), crash_block(run));
    }
    r.add("gate", gate_block(&ev.report));
    let csvs = ev
        .crash
        .iter()
        .map(|run| match (&run.histories, &run.roof) {
            (Some(h), _) => crash_history_csv(h).unwrap(),
            (None, Some(roof)) => roof_csv(roof).unwrap(),
            _ => unreachable!(),
        })
        .collect();
    (r, csvs)
}

#[test]
fn reports_are_byte_identical_across_runs_and_policies() {
    let (a, ca) = full_report(Execution::Parallel);
    let (b, cb) = full_report(Execution::Parallel);
    let (c, cc) = full_report(Execution::Sequential);
    assert_eq!(a.to_json(), b.to_json());
    assert_eq!(a.to_json(), c.to_json());
    assert_eq!(ca, cb);
    assert_eq!(ca, cc);
}

#[test]
fn report_echo_reproduces_the_model() {
    let m = demo_frame();
    let r = RunReport::new(&m, json!({}));
    let v = r.to_value();
    assert_eq!(v["model"]["digest"], model_digest(&m));
    let echoed = serde_json::to_string(&v["model"]["definition"]).unwrap();
    assert_eq!(parse_model(&echoed).unwrap(), m);
}

#[test]
fn header_only_report_has_empty_analyses() {
    let r = RunReport::new(&demo_frame(), json!({ "strict": false }));
    assert!(r.is_empty());
    let v: Value = serde_json::from_str(&r.to_json()).unwrap();
    assert_eq!(v["tool"], TOOL);
    assert_eq!(v["analyses"], json!({}));
    assert!(r.to_json().ends_with("}\n"));
}

#[test]
fn result_floats_carry_six_significant_digits() {
    let mut r = RunReport::new(&demo_frame(), json!({}));
    r.add(
        "x",
        json!({ "f": q(54.028861870754, "Hz"), "tiny": 1.234567891e-9, "neg": -0.0 }),
    );
    let v = r.to_value();
    assert_eq!(v["analyses"]["x"]["f"]["value"], json!(54.0289));
    assert_eq!(v["analyses"]["x"]["tiny"], json!(1.23457e-9));
    assert_eq!(v["analyses"]["x"]["neg"], json!(0.0));
}

proptest! {
    #[test]
    fn sig6_is_idempotent_and_close(x in -1e12..1e12f64) {
        let r = sig6(x);
        prop_assert_eq!(sig6(r), r);
        prop_assert!((r - x).abs() <= 5e-6 * x.abs());
    }
}
