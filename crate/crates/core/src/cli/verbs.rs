//! Per-verb input parsing and dispatch.

use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use super::job::{CliError, Inputs, Params, Verb};
use crate::dimgrp::Parity;
use crate::orderext::{
    assemble_stage_extension, baer_sum, oext_inverse, oext_is_isomorphic, oext_is_trivial, solve_cocycle, solve_cocycle_k1,
    verify_cochain, verify_isomorphism, CocycleSequence, IsoDecision, OrderExtension,
};
use crate::realize::{classify_rotation_algebra, realize_phi, telescoping_check, PhiSpec, RotationAlgebraModel, RotationVerdict};
use crate::unitary::{
    bott, bott_over_loop, make_winding_pair, rotation_number, winding_norm_check, MatrixTrace, UnitaryPath, UnitarySample,
    unitarity_defect, WindingBlock, DEFAULT_CIRCLE_GRID, DEFAULT_GAP, DEFAULT_UNITARITY_TOL,
};
use crate::zmod::{ext_group, format_rat, hom_group, parse_rat, smith_normal_form, FGAbelianGroup, IntMatrix, Rat};

/// Inputs parsed against their formats, ready to run.
#[derive(Clone, Debug)]
pub enum Prepared {
    Snf(IntMatrix),
    Hom(FGAbelianGroup, FGAbelianGroup),
    Ext(FGAbelianGroup, FGAbelianGroup),
    OextSum(OrderExtension, OrderExtension),
    OextInverse(OrderExtension),
    OextTrivial(OrderExtension),
    OextIso(OrderExtension, OrderExtension),
    SolveCocycle(CocycleSequence),
    Assemble(CocycleSequence),
    BottPair(UnitarySample, UnitarySample),
    BottBlocks(Vec<WindingBlock>),
    Rotation(UnitaryPath),
    WindingPair(Vec<WindingBlock>),
    Realize(Box<PhiSpec>),
    Classify(RotationAlgebraModel, [Rat; 2]),
}

pub struct Outcome {
    pub result: Value,
    pub diagnostics: Value,
    pub undecided: bool,
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("report values serialize")
}

fn op<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Operation(e.to_string())
}

/// Input roles and flags each verb accepts.
fn signature(verb: Verb) -> (&'static [&'static [&'static str]], &'static [&'static str]) {
    match verb {
        Verb::Snf => (&[&["matrix"]], &[]),
        Verb::Hom => (&[&["source", "target"]], &[]),
        Verb::Ext => (&[&["g1", "g0"]], &[]),
        Verb::OextSum | Verb::OextIso => (&[&["x", "y"]], &[]),
        Verb::OextInverse | Verb::OextTrivial => (&[&["x"]], &[]),
        Verb::SolveCocycle => (&[&["psi"]], &["depth", "k1"]),
        Verb::Assemble => (&[&["psi"]], &["depth"]),
        Verb::Bott => (&[&["u", "v"], &["blocks"]], &["gap", "grid", "tol"]),
        Verb::Rotation => (&[&["path"]], &["gap", "trace", "tol"]),
        Verb::WindingPair => (&[&["blocks"]], &["grid", "gap", "tol"]),
        Verb::Realize => (&[&["phi"]], &["depth", "stage"]),
        Verb::ClassifyRotationAlgebra => (&[&[]], &["theta", "phi", "qmax", "tol", "seed"]),
        Verb::Sweep => (&[&["jobs"]], &[]),
    }
}

pub fn check_signature(verb: Verb, inputs: &Inputs, params: &Params) -> Result<(), CliError> {
    let (role_sets, flags) = signature(verb);
    let mut roles: Vec<&str> = inputs.roles().collect();
    roles.sort_unstable();
    let matches = role_sets.iter().any(|set| {
        let mut s = set.to_vec();
        s.sort_unstable();
        s == roles
    });
    if !matches {
        let want: Vec<String> = role_sets.iter().map(|s| format!("{{{}}}", s.join(", "))).collect();
        return Err(CliError::Usage(format!("{verb}: inputs {{{}}} do not match any of {}", roles.join(", "), want.join(" or "))));
    }
    if let Some(bad) = params.set_names().into_iter().find(|p| !flags.contains(p)) {
        return Err(CliError::Usage(format!("{verb} does not take --{bad}")));
    }
    Ok(())
}

fn parse_param_rat(name: &str, s: &str) -> Result<Rat, CliError> {
    parse_rat(s).map_err(|e| CliError::Usage(format!("--{name}: {e}")))
}

fn classifier_inputs(params: &Params) -> Result<(RotationAlgebraModel, [Rat; 2]), CliError> {
    let qmax = params.qmax.unwrap_or(1_000_000);
    let tol = parse_param_rat("tol", params.tol.as_deref().unwrap_or("1e-9"))?;
    let model = match params.theta.as_deref().unwrap_or("golden") {
        "golden" => RotationAlgebraModel::golden(qmax, tol),
        t => RotationAlgebraModel::new(parse_param_rat("theta", t)?, Rat::from_integer(0.into()), qmax, tol),
    }
    .map_err(op)?;
    let phi = match (&params.phi, params.seed) {
        (Some([a, b]), None) => [parse_param_rat("phi", a)?, parse_param_rat("phi", b)?],
        (None, Some(seed)) => random_phi(seed),
        (Some(_), Some(_)) => return Err(CliError::Usage("give either --phi or --seed, not both".into())),
        (None, None) => return Err(CliError::Usage("classify-rotation-algebra needs --phi or --seed".into())),
    };
    Ok((model, phi))
}

/// A point of `[0, 1)²` on the grid `10⁻¹²ℤ²`, drawn from the seed.
pub fn random_phi(seed: u64) -> [Rat; 2] {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let den = 1_000_000_000_000i64;
    let mut draw = || Rat::new(rng.random_range(0..den).into(), den.into());
    [draw(), draw()]
}

pub fn prepare(verb: Verb, inputs: &Inputs, params: &Params) -> Result<Prepared, CliError> {
    check_signature(verb, inputs, params)?;
    Ok(match verb {
        Verb::Snf => Prepared::Snf(inputs.parse("matrix")?),
        Verb::Hom => Prepared::Hom(inputs.parse("source")?, inputs.parse("target")?),
        Verb::Ext => Prepared::Ext(inputs.parse("g1")?, inputs.parse("g0")?),
        Verb::OextSum => Prepared::OextSum(inputs.parse("x")?, inputs.parse("y")?),
        Verb::OextInverse => Prepared::OextInverse(inputs.parse("x")?),
        Verb::OextTrivial => Prepared::OextTrivial(inputs.parse("x")?),
        Verb::OextIso => Prepared::OextIso(inputs.parse("x")?, inputs.parse("y")?),
        Verb::SolveCocycle => Prepared::SolveCocycle(inputs.parse("psi")?),
        Verb::Assemble => Prepared::Assemble(inputs.parse("psi")?),
        Verb::Bott if inputs.has("blocks") => Prepared::BottBlocks(inputs.parse("blocks")?),
        Verb::Bott => Prepared::BottPair(inputs.parse("u")?, inputs.parse("v")?),
        Verb::Rotation => Prepared::Rotation(inputs.parse("path")?),
        Verb::WindingPair => Prepared::WindingPair(inputs.parse("blocks")?),
        Verb::Realize => Prepared::Realize(Box::new(inputs.parse("phi")?)),
        Verb::ClassifyRotationAlgebra => {
            let (m, phi) = classifier_inputs(params)?;
            Prepared::Classify(m, phi)
        }
        Verb::Sweep => return Err(CliError::Usage("sweep jobs cannot contain sweep".into())),
    })
}

fn float_tol(params: &Params, default: f64) -> Result<f64, CliError> {
    match &params.tol {
        Some(t) => parse_param_rat("tol", t)?.to_f64().ok_or_else(|| CliError::Usage("--tol out of range".into())),
        None => Ok(default),
    }
}

/// Residuals above `tol` mean the value is not an integer to the requested accuracy.
fn check_residual(residual: f64, tol: f64) -> Result<(), CliError> {
    if residual > tol {
        return Err(CliError::Operation(format!("Bott residual {residual:e} exceeds tol {tol:e}")));
    }
    Ok(())
}

fn depth_or(params: &Params, default: usize) -> usize {
    params.depth.unwrap_or(default)
}

fn ok(result: Value, diagnostics: Value) -> Result<Outcome, CliError> {
    Ok(Outcome { result, diagnostics, undecided: false })
}

pub fn execute(prepared: &Prepared, params: &Params) -> Result<Outcome, CliError> {
    let gap = params.gap.unwrap_or(DEFAULT_GAP);
    match prepared {
        Prepared::Snf(a) => {
            let (u, s, v) = smith_normal_form(a);
            let diag: Vec<String> = (0..s.rows().min(s.cols())).map(|i| s[(i, i)].to_string()).collect();
            ok(
                json!({ "u": u, "s": s, "v": v, "diagonal": diag }),
                json!({
                    "reconstructs": u.mul(&s).mul(&v) == *a,
                    "det_u": u.determinant().to_string(),
                    "det_v": v.determinant().to_string(),
                }),
            )
        }
        Prepared::Hom(g, h) => {
            let hg = hom_group(g, h);
            let round_trip = hg.basis.iter().enumerate().all(|(i, b)| {
                let c = hg.coordinates(b);
                hg.group.elements_equal(&c, &hg.group.unit_vector(i))
            });
            ok(
                json!({ "group": hg.group.describe(), "presentation": hg.group, "summands": hg.summands }),
                json!({ "basis_size": hg.basis.len(), "coordinates_round_trip": round_trip }),
            )
        }
        Prepared::Ext(g1, g0) => {
            let eg = ext_group(g1, g0);
            let round_trip = eg.representatives.iter().enumerate().all(|(i, r)| {
                let c = eg.class_of(r);
                eg.group.elements_equal(&c, &eg.group.unit_vector(i))
            });
            ok(
                json!({ "group": eg.group.describe(), "presentation": eg.group, "summands": eg.summands }),
                json!({ "representatives": eg.representatives.len(), "class_round_trip": round_trip }),
            )
        }
        Prepared::OextSum(x, y) => {
            let s = baer_sum(x, y).map_err(op)?;
            let eg = ext_group(&x.ambient.g1, &x.ambient.g0);
            let expect: Vec<_> = x.ext_class().iter().zip(y.ext_class()).map(|(a, b)| a + b).collect();
            ok(
                to_value(&s),
                json!({
                    "validates": s.validate().is_ok(),
                    "ext_class": s.ext_class().iter().map(ToString::to_string).collect::<Vec<_>>(),
                    "ext_class_additive": eg.group.elements_equal(&s.ext_class(), &expect),
                }),
            )
        }
        Prepared::OextInverse(x) => {
            let inv = oext_inverse(x);
            let sum = baer_sum(x, &inv).map_err(op)?;
            ok(to_value(&inv), json!({ "validates": inv.validate().is_ok(), "sum_with_original_trivial": oext_is_trivial(&sum).trivial }))
        }
        Prepared::OextTrivial(x) => {
            let r = oext_is_trivial(x);
            ok(to_value(&r), json!({ "ext_class": x.ext_class().iter().map(ToString::to_string).collect::<Vec<_>>() }))
        }
        Prepared::OextIso(x, y) => {
            let d = oext_is_isomorphic(x, y).map_err(op)?;
            let verified = match &d {
                IsoDecision::Isomorphic { phi } => Some(verify_isomorphism(x, y, phi).is_ok()),
                IsoDecision::NotIsomorphic { .. } => None,
            };
            ok(to_value(&d), json!({ "certificate_verified": verified }))
        }
        Prepared::SolveCocycle(psi) => {
            let k1 = params.k1.unwrap_or(false);
            let (maps, source) = if k1 { (&psi.psi1, Parity::K0) } else { (&psi.psi0, Parity::K1) };
            let depth = depth_or(params, maps.len());
            let c = if k1 { solve_cocycle_k1(psi, depth) } else { solve_cocycle(psi, depth) }.map_err(op)?;
            ok(to_value(&c), json!({ "depth": depth, "verified": verify_cochain(&psi.system, maps, &c, depth, source) }))
        }
        Prepared::Assemble(psi) => {
            let depth = depth_or(params, psi.psi0.len());
            let st = assemble_stage_extension(psi, depth).map_err(op)?;
            let report = oext_is_trivial(&st.oext);
            ok(to_value(&st), json!({ "depth": depth, "triviality": report, "validates": st.oext.validate().is_ok() }))
        }
        Prepared::BottPair(u, v) => {
            let tol = float_tol(params, 1e-8)?;
            let b = bott(u, v, gap).map_err(op)?;
            check_residual(b.residual, tol)?;
            ok(
                json!({ "raw": b.raw, "rounded": b.rounded }),
                json!({ "residual": b.residual, "gap_distance": b.gap_distance, "commutator_norm": b.commutator_norm, "gap": gap, "tol": tol }),
            )
        }
        Prepared::BottBlocks(blocks) => {
            let grid = params.grid.unwrap_or(DEFAULT_CIRCLE_GRID);
            let (w, z) = make_winding_pair(blocks, grid).map_err(op)?;
            let values = bott_over_loop(&w, &z, gap).map_err(op)?;
            let rounded = values[0].rounded;
            let constant = values.iter().all(|b| b.rounded == rounded);
            let max_residual = values.iter().map(|b| b.residual).fold(0.0, f64::max);
            let min_gap = values.iter().map(|b| b.gap_distance).fold(f64::INFINITY, f64::min);
            let expected: i64 = blocks.iter().map(|b| b.n).sum();
            let tol = float_tol(params, 1e-8)?;
            check_residual(max_residual, tol)?;
            ok(
                json!({ "rounded": rounded, "constant": constant, "samples": values.len() }),
                json!({ "max_residual": max_residual, "min_gap_distance": min_gap, "gap": gap, "tol": tol, "sum_n": expected, "grid": grid }),
            )
        }
        Prepared::Rotation(path) => {
            let trace = params.trace.unwrap_or(MatrixTrace::Normalized);
            let tol = float_tol(params, DEFAULT_UNITARITY_TOL)?;
            let defect = path.frames().iter().map(|f| unitarity_defect(f.matrix())).fold(0.0, f64::max);
            if defect > tol {
                return Err(CliError::Operation(format!("frame unitarity defect {defect:e} exceeds tol {tol:e}")));
            }
            let r = rotation_number(path, trace, gap).map_err(op)?;
            ok(
                json!({ "value": r.value, "trace": trace }),
                json!({
                    "max_step": r.max_step,
                    "step_bound": r.step_bound,
                    "eigen_steps": r.eigen_steps,
                    "time_grid": path.time_grid(),
                    "gap": gap,
                    "max_unitarity_defect": defect,
                }),
            )
        }
        Prepared::WindingPair(blocks) => {
            let grid = params.grid.unwrap_or(DEFAULT_CIRCLE_GRID);
            let (w, z) = make_winding_pair(blocks, grid).map_err(op)?;
            let norm = winding_norm_check(blocks, grid).map_err(op)?;
            let b = bott(&w, &z.frame(0), gap).map_err(op)?;
            check_residual(b.residual, float_tol(params, 1e-8)?)?;
            ok(json!({ "w": w, "z": z }), json!({ "norm_check": norm, "bott_at_zero": b }))
        }
        Prepared::Realize(phi) => {
            let depth = params.depth.ok_or_else(|| CliError::Usage("realize needs --depth".into()))?;
            let cert = realize_phi(phi, depth).map_err(op)?;
            let stage = params.stage.unwrap_or(0);
            let tele = if depth >= stage + 2 { Some(telescoping_check(&cert, stage).map_err(op)?) } else { None };
            let min_approx = cert.bounds.iter().map(|b| b.approx_slack.clone()).min().map(|r| format_rat(&r));
            ok(
                to_value(&cert),
                json!({
                    "slacks": cert.bounds,
                    "all_positive": cert.bounds.iter().all(|b| b.all_positive()),
                    "min_approx_slack": min_approx,
                    "telescoping": tele,
                }),
            )
        }
        Prepared::Classify(model, phi) => {
            let c = classify_rotation_algebra(model, phi);
            let undecided = matches!(c.verdict, RotationVerdict::Undecided);
            let mut result = to_value(&c.verdict);
            result["phi"] = json!(phi.iter().map(format_rat).collect::<Vec<_>>());
            Ok(Outcome {
                result,
                diagnostics: json!({
                    "distance": c.distance,
                    "nearest": c.nearest,
                    "tol": c.tol,
                    "error_bound": c.error_bound,
                    "theta": format_rat(&model.theta),
                    "theta_error": model.theta_error.to_f64(),
                    "qmax": model.qmax,
                }),
                undecided,
            })
        }
    }
}
