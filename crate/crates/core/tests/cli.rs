use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::process::Command;

use num_complex::Complex64;
use oext::cli::{read_jobs, run, sweep, JobSpec, Params, ReportRecord, RunOptions, Status, SweepReport, Verb};
use oext::dimgrp::{default_realization_system, TraceModel};
use oext::orderext::{Ambient, CocycleSequence, OrderExtension};
use oext::realize::PhiSpec;
use oext::unitary::{CMatrix, UnitaryPath};
use oext::zmod::{ext_group, rat, FGAbelianGroup, IntMatrix, RatMatrix};
use serde_json::Value;

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

fn oext_bin(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_oext")).args(args).current_dir(fixtures()).output().unwrap();
    (out.status.code().unwrap(), String::from_utf8(out.stdout).unwrap(), String::from_utf8(out.stderr).unwrap())
}

fn schema_validator(def: &str) -> jsonschema::Validator {
    let text = std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("../../schema/oext.schema.json")).unwrap();
    let mut schema: Value = serde_json::from_str(&text).unwrap();
    schema["$ref"] = Value::String(format!("#/$defs/{def}"));
    jsonschema::validator_for(&schema).unwrap()
}

fn assert_valid(def: &str, v: &Value) {
    let val = schema_validator(def);
    let errs: Vec<String> = val.iter_errors(v).map(|e| e.to_string()).collect();
    assert!(errs.is_empty(), "{def}: {errs:?}");
}

fn write(dir: &Path, name: &str, v: &impl serde::Serialize) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, serde_json::to_vec(v).unwrap()).unwrap();
    p
}

fn job(verb: Verb, inputs: &[(&str, &Path)], params: Params) -> JobSpec {
    JobSpec { verb, inputs: inputs.iter().map(|(k, p)| (k.to_string(), p.to_path_buf())).collect(), params, output: None }
}

#[test]
fn bott_on_the_winding_fixture() {
    let (code, out, _) = oext_bin(&["bott", "--blocks", "winding_8_1_1.json", "--grid", "256"]);
    assert_eq!(code, 0);
    let rec: ReportRecord = serde_json::from_str(&out).unwrap();
    assert_eq!(rec.result["rounded"], 1);
    assert_eq!(rec.result["constant"], true);
    assert!(rec.diagnostics["max_residual"].as_f64().unwrap() < 1e-8);
    assert_valid("ReportRecord", &serde_json::from_str(&out).unwrap());
}

#[test]
fn malformed_json_reports_its_position() {
    let (code, out, err) = oext_bin(&["snf", "--matrix", "malformed.json"]);
    assert_eq!(code, 1);
    assert!(out.is_empty());
    assert!(err.contains("malformed.json:3:"), "{err}");
}

#[test]
fn unknown_fields_are_rejected() {
    let (code, _, err) = oext_bin(&["ext", "--g1", "unknown_field.json", "--g0", "z.json"]);
    assert_eq!(code, 1);
    assert!(err.contains("unknown field"), "{err}");
}

#[test]
fn undecided_classification_exits_two() {
    let (code, out, _) = oext_bin(&["classify-rotation-algebra", "--theta", "golden", "--phi", "0.0000000015,0", "--qmax", "10^6", "--tol", "1e-9"]);
    assert_eq!(code, 2);
    let rec: ReportRecord = serde_json::from_str(&out).unwrap();
    assert_eq!(rec.status, Status::Undecided);
    assert_eq!(rec.result["verdict"], "undecided");
    let (code, out, _) = oext_bin(&["classify-rotation-algebra", "--phi", "0.5,0"]);
    assert_eq!(code, 0);
    assert!(out.contains("non_trivial"));
}

#[test]
fn rotation_of_the_projection_loop_is_its_trace() {
    let dir = tempfile::tempdir().unwrap();
    let n = 4;
    // p = diag(1, 1, 0, 0)
    let path = UnitaryPath::from_fn(256, n, |t| {
        CMatrix::from_fn(n, n, |i, j| match (i == j, i < 2) {
            (false, _) => Complex64::new(0.0, 0.0),
            (true, true) => Complex64::from_polar(1.0, 2.0 * PI * t),
            (true, false) => Complex64::new(1.0, 0.0),
        })
    })
    .unwrap();
    let p = write(dir.path(), "path.json", &path);
    assert_valid("UnitaryPath", &serde_json::to_value(&path).unwrap());
    let full = run(&job(Verb::Rotation, &[("path", &p)], Params { trace: Some(oext::unitary::MatrixTrace::Full), ..Default::default() }), Path::new(""), RunOptions::default());
    assert_eq!(full.status, Status::Ok, "{:?}", full.error);
    assert!((full.result["value"].as_f64().unwrap() - 2.0).abs() < 1e-6);
    let norm = run(&job(Verb::Rotation, &[("path", &p)], Params::default()), Path::new(""), RunOptions::default());
    assert!((norm.result["value"].as_f64().unwrap() - 0.5).abs() < 1e-6);
    assert!(norm.diagnostics["max_unitarity_defect"].as_f64().unwrap() < 1e-12);
}

#[test]
fn every_algebraic_verb_runs_with_diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let g0 = FGAbelianGroup::free(1);
    let g1 = FGAbelianGroup::cyclic(2);
    let amb = Ambient::new(g0.clone(), g1.clone(), RatMatrix::from_vec(1, 1, vec![rat(1, 1)])).unwrap();
    let e = ext_group(&g1, &g0).representatives[0].clone();
    let x = OrderExtension::with_rotation(&amb, e, &RatMatrix::zeros(1, 1)).unwrap();
    let xp = write(d, "x.json", &x);
    assert_valid("OrderExtension", &serde_json::to_value(&x).unwrap());

    let sum = run(&job(Verb::OextSum, &[("x", &xp), ("y", &xp)], Params::default()), d, RunOptions::default());
    assert_eq!(sum.status, Status::Ok, "{:?}", sum.error);
    assert_eq!(sum.diagnostics["ext_class_additive"], true);
    let sp = write(d, "sum.json", &sum.result);
    let triv = run(&job(Verb::OextTrivial, &[("x", &sp)], Params::default()), d, RunOptions::default());
    assert_eq!(triv.result["trivial"], true);
    let inv = run(&job(Verb::OextInverse, &[("x", &xp)], Params::default()), d, RunOptions::default());
    assert_eq!(inv.diagnostics["sum_with_original_trivial"], true);
    let iso = run(&job(Verb::OextIso, &[("x", &sp), ("y", &write(d, "t.json", &OrderExtension::trivial(&amb)))], Params::default()), d, RunOptions::default());
    assert_eq!(iso.result["verdict"], "isomorphic");
    assert_eq!(iso.diagnostics["certificate_verified"], true);

    let m = write(d, "m.json", &IntMatrix::from_rows(&[[2, 4, 4], [-6, 6, 12]]));
    let snf = run(&job(Verb::Snf, &[("matrix", &m)], Params::default()), d, RunOptions::default());
    assert_eq!(snf.diagnostics["reconstructs"], true);
    assert_eq!(snf.result["diagonal"], serde_json::json!(["2", "6"]));

    let sys = default_realization_system(10);
    let g: Vec<IntMatrix> = (0..6).map(|n| IntMatrix::from_rows(&[[n as i64 - 2, 1], [0, 3]])).collect();
    let (psi, _) = CocycleSequence::from_cochain(&sys, 8, &g, None).unwrap();
    let pp = write(d, "psi.json", &psi);
    assert_valid("CocycleSequence", &serde_json::to_value(&psi).unwrap());
    let sol = run(&job(Verb::SolveCocycle, &[("psi", &pp)], Params { depth: Some(5), ..Default::default() }), d, RunOptions::default());
    assert_eq!(sol.status, Status::Ok, "{:?}", sol.error);
    assert_eq!(sol.diagnostics["verified"], true);
    let asm = run(&job(Verb::Assemble, &[("psi", &pp)], Params { depth: Some(5), ..Default::default() }), d, RunOptions::default());
    assert_eq!(asm.status, Status::Ok, "{:?}", asm.error);
    assert_eq!(asm.diagnostics["triviality"]["trivial"], true);

    let model = TraceModel::uniform(&sys);
    let phi = PhiSpec::from_integer_map(sys, model, &IntMatrix::from_rows(&[[1, 0], [2, -1]])).unwrap();
    let php = write(d, "phi.json", &phi);
    assert_valid("PhiSpec", &serde_json::to_value(&phi).unwrap());
    let rz = run(&job(Verb::Realize, &[("phi", &php)], Params { depth: Some(4), ..Default::default() }), d, RunOptions::default());
    assert_eq!(rz.status, Status::Ok, "{:?}", rz.error);
    assert_eq!(rz.diagnostics["all_positive"], true);
    assert_eq!(rz.diagnostics["telescoping"]["pass"], true);

    // flags a verb does not take are refused
    let bad = run(&job(Verb::Snf, &[("matrix", &m)], Params { depth: Some(1), ..Default::default() }), d, RunOptions::default());
    assert_eq!(bad.status, Status::Error);
    for rec in [&sum, &triv, &inv, &iso, &snf, &sol, &asm, &rz, &bad] {
        assert_valid("ReportRecord", &serde_json::to_value(rec).unwrap());
    }
}

#[test]
fn fixture_sweep_isolates_failures() {
    let jobs = read_jobs(&fixtures().join("jobs.json")).unwrap();
    assert_valid("JobList", &serde_json::to_value(&jobs).unwrap());
    let report = sweep(&jobs, &fixtures(), RunOptions::default());
    let statuses: Vec<Status> = report.records.iter().map(|r| r.status).collect();
    use Status::*;
    assert_eq!(statuses, vec![Ok, Ok, Ok, Ok, Ok, Ok, Undecided, Error]);
    assert_eq!(report.records[3].result["rounded"], 3);
    assert_eq!((report.summary.ok, report.summary.undecided, report.summary.error), (6, 1, 1));
    assert_eq!(report.exit_code(), 1);
    assert_valid("SweepReport", &serde_json::to_value(&report).unwrap());
    let (code, out, _) = oext_bin(&["sweep", "--jobs", "jobs.json"]);
    assert_eq!(code, 1);
    let parsed: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(parsed["summary"]["undecided"], 1);
}

#[test]
fn seeded_sweeps_are_byte_identical() {
    let jobs: Vec<JobSpec> = (0..100)
        .map(|s| job(Verb::ClassifyRotationAlgebra, &[], Params { seed: Some(s), qmax: Some(10_000), ..Default::default() }))
        .collect();
    let a = serde_json::to_string(&sweep(&jobs, Path::new(""), RunOptions::default())).unwrap();
    let b = serde_json::to_string(&sweep(&jobs, Path::new(""), RunOptions::default())).unwrap();
    assert_eq!(a, b);
    let report: Value = serde_json::from_str(&a).unwrap();
    let undecided = report["records"].as_array().unwrap().iter().filter(|r| r["status"] == "undecided").count();
    assert_eq!(report["summary"]["undecided"], undecided);
    assert_eq!(report["summary"]["jobs"], 100);
    let empty: SweepReport = sweep(&[], Path::new(""), RunOptions::default());
    assert!(empty.records.is_empty());
    assert_eq!(empty.exit_code(), 0);
}

#[test]
fn timing_is_opt_in() {
    let j = job(Verb::ClassifyRotationAlgebra, &[], Params { phi: Some(["0".into(), "0".into()]), ..Default::default() });
    assert!(run(&j, Path::new(""), RunOptions::default()).wall_time.is_none());
    assert!(run(&j, Path::new(""), RunOptions { timing: true }).wall_time.is_some());
}

#[test]
fn fixtures_match_the_schema() {
    for (file, def) in [
        ("winding_8_1_1.json", "WindingBlocks"),
        ("winding_mixed.json", "WindingBlocks"),
        ("matrix.json", "IntMatrix"),
        ("z.json", "FGAbelianGroup"),
        ("z4.json", "FGAbelianGroup"),
        ("z6.json", "FGAbelianGroup"),
    ] {
        let v: Value = serde_json::from_str(&std::fs::read_to_string(fixtures().join(file)).unwrap()).unwrap();
        assert_valid(def, &v);
    }
    let v: Value = serde_json::from_str(&std::fs::read_to_string(fixtures().join("unknown_field.json")).unwrap()).unwrap();
    assert!(!schema_validator("FGAbelianGroup").is_valid(&v));
    let text = std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("../../schema/oext.schema.json")).unwrap();
    let schema: Value = serde_json::from_str(&text).unwrap();
    assert_eq!(schema["version"], oext::cli::SCHEMA_VERSION);
}
