//! Stage-by-stage construction of the maps `h_s: ℤ^{k_s} → ℤ^{k_{s+1}}` of a
//! telescoped system, with exact certificates.
//!
//! Indices are 0-based. For the telescoped system with `ℓ_s = max_j [s,j]`:
//!
//! 1. `|φχ¹_{∞,s}(e_j) − Dχ⁰_{∞,s+1}h_s(e_j)| < 2^{−(s+1)}ℓ_s⁻¹·Dχ⁰_{∞,s}(e_j)` at every trace,
//! 2. `|h_sχ¹_{s−1}(e_j) − χ⁰_s h_{s−1}(e_j)| < 2^{−s+1}ℓ_{s−1}⁻¹·χ⁰_{s+1,s−1}(e_j)` entrywise for `s ≥ 1`,
//! 3. `χ⁰_s(i,j) ≥ 2^{s+2}·max(|χ¹_s(i,j)|, 1)`,
//!
//! and `ψ_s = h_{s+1}χ¹_s − χ⁰_{s+1}h_s` satisfies `|ψ_s(i,j)| < 2^{−s}ℓ_s⁻¹·χ⁰_{s+2,s}(i,j)`.
//! Inequality 1 is checked against the declared values of `φ` with the precision
//! subtracted from the bound, so it holds for the true `φ`.

use num_traits::{Signed, ToPrimitive, Zero};
use serde::Serialize;

use super::phi::{pow2, PhiSpec};
use super::RealizeError;
use crate::dimgrp::{approx_in_range_d_model, growth_slack, InductiveSystem, Parity, TraceFunctional, TraceModel};
use crate::orderext::{verify_cochain, CochainSequence, CocycleSequence};
use crate::zmod::{Int, IntMatrix, Rat, RatMatrix};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StageSlack {
    /// Index in the telescoped system.
    pub stage: usize,
    /// The stage of the original system it came from.
    pub source_stage: usize,
    pub ell: Int,
    #[serde(serialize_with = "ser_rat")]
    pub approx_slack: Rat,
    #[serde(serialize_with = "ser_opt_rat")]
    pub coherence_slack: Option<Rat>,
    pub growth_slack: Option<Int>,
    #[serde(serialize_with = "ser_opt_rat")]
    pub psi_slack: Option<Rat>,
}

fn ser_rat<S: serde::Serializer>(x: &Rat, s: S) -> Result<S::Ok, S::Error> {
    crate::zmod::matrix::rat_repr::serialize(x, s)
}

fn ser_opt_rat<S: serde::Serializer>(x: &Option<Rat>, s: S) -> Result<S::Ok, S::Error> {
    match x {
        Some(r) => crate::zmod::matrix::rat_repr::serialize(r, s),
        None => s.serialize_none(),
    }
}

impl StageSlack {
    /// Every reported slack is strictly positive.
    pub fn all_positive(&self) -> bool {
        self.approx_slack.is_positive()
            && self.coherence_slack.as_ref().is_none_or(Signed::is_positive)
            && self.growth_slack.as_ref().is_none_or(Signed::is_positive)
            && self.psi_slack.as_ref().is_none_or(Signed::is_positive)
    }
}

/// The telescoped system, the maps `h_s`, the cocycle `ψ` and the per-stage slacks.
/// `psi` and `cochain` use the target-stage convention of [`CocycleSequence`], where
/// `g_s = −h_s` solves the cocycle equations.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RealizationCertificate {
    pub system: InductiveSystem,
    pub model: TraceModel,
    pub sigma: Vec<usize>,
    pub phi_values: Vec<RatMatrix>,
    #[serde(serialize_with = "ser_rat")]
    pub precision: Rat,
    pub h: Vec<IntMatrix>,
    pub psi_maps: Vec<IntMatrix>,
    pub psi: CocycleSequence,
    pub cochain: CochainSequence,
    pub bounds: Vec<StageSlack>,
}

impl RealizationCertificate {
    pub fn depth(&self) -> usize {
        self.h.len()
    }
}

fn abs_int(x: &Int) -> Int {
    x.abs()
}

/// Runs the construction for `depth` steps. Each step takes the earliest stage at which
/// a suitable `ξ` exists, then the earliest later stage at which inequality 2 holds.
pub fn realize_phi(phi: &PhiSpec, depth: usize) -> Result<RealizationCertificate, RealizeError> {
    phi.validate()?;
    if depth == 0 {
        return Err(RealizeError::Precondition("depth must be positive".into()));
    }
    let sys = &phi.system;
    let model = &phi.model;
    let top = model.stage();
    let mut sigma = vec![0usize];
    let mut hs: Vec<IntMatrix> = Vec::new();
    for s in 0..depth {
        let a = sigma[s];
        let ell = sys.ell(a);
        let d_a = model.d_matrix(sys, a)?;
        let factor = pow2(-(s as i64 + 1)) / Rat::from_integer(ell.clone());
        let bounds: Vec<Vec<Rat>> = (0..sys.rank(a))
            .map(|j| d_a.column(j).iter().map(|d| &factor * d - &phi.precision).collect())
            .collect();
        if let Some(b) = bounds.iter().flatten().find(|b| !b.is_positive()) {
            return Err(RealizeError::DepthExhausted { stage: s, source_stage: a, detail: format!("precision exceeds the bound, slack {b}") });
        }
        let mut found = None;
        for m in a + 1..=top {
            let cols: Option<Vec<Vec<Int>>> = (0..sys.rank(a))
                .map(|j| {
                    let target = phi.values[a].column(j);
                    approx_in_range_d_model(&target, model, sys, &bounds[j], m, 0).ok().map(|v| v.coords)
                })
                .collect();
            if let Some(cols) = cols {
                found = Some((m, IntMatrix::from_columns(sys.rank(m), &cols)));
                break;
            }
        }
        let Some((m, eta)) = found else {
            return Err(RealizeError::DepthExhausted { stage: s, source_stage: a, detail: format!("no approximation up to stage {top}") });
        };
        let mut chosen = None;
        for l in m..=top {
            let h = sys.composite(Parity::K0, l, m)?.mul(&eta);
            if s == 0 || coherence_slack(sys, &sigma, &hs, s, l, &h)?.is_positive() {
                chosen = Some((l, h));
                break;
            }
        }
        let Some((l, h)) = chosen else {
            return Err(RealizeError::DepthExhausted { stage: s, source_stage: a, detail: format!("coherence fails up to stage {top}") });
        };
        sigma.push(l);
        hs.push(h);
    }
    assemble_certificate(phi, sigma, hs)
}

/// Slack of inequality 2 at index `s` in original-system terms, with `h_s` landing at stage `l`.
fn coherence_slack(sys: &InductiveSystem, sigma: &[usize], hs: &[IntMatrix], s: usize, l: usize, h: &IntMatrix) -> Result<Rat, RealizeError> {
    let (a, b) = (sigma[s], sigma[s - 1]);
    let x = h.mul(&sys.composite(Parity::K1, a, b)?).sub(&sys.composite(Parity::K0, l, a)?.mul(&hs[s - 1]));
    let y = sys.composite(Parity::K0, l, b)?;
    let factor = pow2(-(s as i64) + 1) / Rat::from_integer(sys.ell(b));
    Ok(min_slack(&x, &y, &factor))
}

/// `min_{i,j} factor·y(i,j) − |x(i,j)|`.
fn min_slack(x: &IntMatrix, y: &IntMatrix, factor: &Rat) -> Rat {
    x.entries()
        .iter()
        .zip(y.entries())
        .map(|(xv, yv)| factor * Rat::from_integer(yv.clone()) - Rat::from_integer(abs_int(xv)))
        .min()
        .unwrap_or_else(Rat::zero)
}

fn assemble_certificate(phi: &PhiSpec, sigma: Vec<usize>, h: Vec<IntMatrix>) -> Result<RealizationCertificate, RealizeError> {
    let depth = h.len();
    let system = phi.system.telescope(&sigma)?;
    let last = sigma[depth];
    let traces = phi
        .model
        .traces
        .iter()
        .map(|t| t.pull_back(&phi.system, last).map(|p| TraceFunctional { stage: depth, weights: p.weights }))
        .collect::<Result<Vec<_>, _>>()?;
    let model = TraceModel::new(traces)?;
    let phi_values = sigma.iter().map(|&a| phi.values[a].clone()).collect();
    let psi_maps: Vec<IntMatrix> = (0..depth.saturating_sub(1))
        .map(|s| h[s + 1].mul(system.map(Parity::K1, s)).sub(&system.map(Parity::K0, s + 1).mul(&h[s])))
        .collect();
    let psi0 = psi_maps
        .iter()
        .enumerate()
        .map(|(s, p)| Ok(system.composite(Parity::K0, depth, s + 2)?.mul(p)))
        .collect::<Result<Vec<_>, RealizeError>>()?;
    let g: Vec<IntMatrix> = h.iter().map(IntMatrix::neg).collect();
    let hh = g
        .iter()
        .enumerate()
        .map(|(s, gs)| Ok(system.composite(Parity::K0, depth, s + 1)?.mul(gs)))
        .collect::<Result<Vec<_>, RealizeError>>()?;
    let psi = CocycleSequence { system: system.clone(), target_stage: depth, psi0, psi1: Vec::new(), model: None };
    let cochain = CochainSequence { target_stage: depth, g, h: hh };
    let mut cert = RealizationCertificate {
        system,
        model,
        sigma,
        phi_values,
        precision: phi.precision.clone(),
        h,
        psi_maps,
        psi,
        cochain,
        bounds: Vec::new(),
    };
    cert.bounds = verify_certificate(&cert)?;
    Ok(cert)
}

/// Recomputes every inequality in exact arithmetic. Fails unless all slacks are
/// positive, `ψ` matches the maps `h`, and the cochain solves `ψ`.
pub fn verify_certificate(cert: &RealizationCertificate) -> Result<Vec<StageSlack>, RealizeError> {
    let fail = |m: String| Err(RealizeError::CertificateInvalid(m));
    let sys = &cert.system;
    let depth = cert.h.len();
    if sys.nstages() != depth + 1 || cert.phi_values.len() != depth + 1 || cert.sigma.len() != depth + 1 {
        return fail("certificate shapes disagree with its depth".into());
    }
    let mut out = Vec::with_capacity(depth);
    for s in 0..depth {
        let h = &cert.h[s];
        if h.rows() != sys.rank(s + 1) || h.cols() != sys.rank(s) {
            return fail(format!("h_{s} has the wrong shape"));
        }
        let ell = sys.ell(s);
        let d_s = cert.model.d_matrix(sys, s)?;
        let dh = cert.model.d_matrix(sys, s + 1)?.mul_int(h);
        let factor = pow2(-(s as i64 + 1)) / Rat::from_integer(ell.clone());
        let approx_slack = d_s
            .entries()
            .iter()
            .zip(cert.phi_values[s].entries().iter().zip(dh.entries()))
            .map(|(d, (p, q))| &factor * d - &cert.precision - (p - q).abs())
            .min()
            .unwrap_or_else(Rat::zero);
        let coherence_slack = if s >= 1 {
            let x = h.mul(sys.map(Parity::K1, s - 1)).sub(&sys.map(Parity::K0, s).mul(&cert.h[s - 1]));
            let y = sys.composite(Parity::K0, s + 1, s - 1)?;
            Some(min_slack(&x, &y, &(pow2(-(s as i64) + 1) / Rat::from_integer(sys.ell(s - 1)))))
        } else {
            None
        };
        let growth = Some(growth_slack(sys.map(Parity::K0, s), sys.map(Parity::K1, s), s));
        let psi_slack = if s + 1 < depth {
            let psi = &cert.psi_maps[s];
            let expect = cert.h[s + 1].mul(sys.map(Parity::K1, s)).sub(&sys.map(Parity::K0, s + 1).mul(h));
            if *psi != expect {
                return fail(format!("psi_{s} does not match h"));
            }
            let y = sys.composite(Parity::K0, s + 2, s)?;
            Some(min_slack(psi, &y, &(pow2(-(s as i64)) / Rat::from_integer(ell.clone()))))
        } else {
            None
        };
        let row = StageSlack { stage: s, source_stage: cert.sigma[s], ell, approx_slack, coherence_slack, growth_slack: growth, psi_slack };
        if !row.all_positive() {
            return fail(format!("stage {s} has a nonpositive slack: {row:?}"));
        }
        out.push(row);
    }
    if depth >= 2 && !verify_cochain(sys, &cert.psi.psi0, &cert.cochain, depth - 1, Parity::K1) {
        return fail("cochain does not solve psi".into());
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TelescopingReport {
    pub stage: usize,
    /// `lhs[i][j] = Σ_{s=n+1}^{P−1} τ_i(ψ_s χ¹_{s,n} e_j)` with `P = depth − 1`.
    pub lhs: Vec<Vec<String>>,
    /// `rhs[i][j] = τ_i(φ χ¹_{∞,n} e_j − h_{n+1} χ¹_n e_j)`.
    pub rhs: Vec<Vec<String>>,
    pub gap: f64,
    /// `2^{−(P+1)}ℓ_P⁻¹ + precision`.
    pub gap_bound: f64,
    /// `lhs = D h_P χ¹_{P,n} − D h_{n+1} χ¹_n` exactly.
    pub exact_identity: bool,
    pub pass: bool,
}

/// Partial sum of the `ψ` series at stage `n` against its closed form. The difference
/// is `D h_P χ¹_{P,n}(e_j) − φ χ¹_{∞,n}(e_j)`, which inequality 1 at `P` and the growth
/// condition bound by `2^{−(P+1)}ℓ_P⁻¹` for the true `φ`.
pub fn telescoping_check(cert: &RealizationCertificate, n: usize) -> Result<TelescopingReport, RealizeError> {
    let depth = cert.h.len();
    if depth < 2 || n + 2 > depth {
        return Err(RealizeError::Precondition(format!("stage {n} needs depth at least {}", n + 2)));
    }
    let sys = &cert.system;
    let p = depth - 1;
    let t = cert.psi.target_stage;
    let d_t = cert.model.d_matrix(sys, t)?;
    let r = cert.model.len();
    let k = sys.rank(n);
    let mut lhs = RatMatrix::zeros(r, k);
    for s in n + 1..p {
        lhs = lhs.add(&d_t.mul_int(&cert.psi.psi0[s].mul(&sys.composite(Parity::K1, s, n)?)));
    }
    let head = cert.model.d_matrix(sys, n + 2)?.mul_int(&cert.h[n + 1].mul(sys.map(Parity::K1, n)));
    let rhs = cert.phi_values[n].sub(&head);
    let tail = cert.model.d_matrix(sys, p + 1)?.mul_int(&cert.h[p].mul(&sys.composite(Parity::K1, p, n)?));
    let exact_identity = lhs == tail.sub(&head);
    let gap_exact = lhs.sub(&rhs).entries().iter().map(Signed::abs).max().unwrap_or_else(Rat::zero);
    let bound_exact = pow2(-(p as i64 + 1)) / Rat::from_integer(sys.ell(p)) + &cert.precision;
    let show = |m: &RatMatrix| (0..r).map(|i| (0..k).map(|j| crate::zmod::matrix::rat_repr::to_string(&m[(i, j)])).collect()).collect();
    Ok(TelescopingReport {
        stage: n,
        lhs: show(&lhs),
        rhs: show(&rhs),
        gap: gap_exact.to_f64().unwrap_or(f64::INFINITY),
        gap_bound: bound_exact.to_f64().unwrap_or(f64::INFINITY),
        exact_identity,
        pass: exact_identity && gap_exact <= bound_exact,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dimgrp::default_realization_system;
    use crate::orderext::solve_cocycle;
    fn setup(stages: usize) -> (InductiveSystem, TraceModel) {
        let s = default_realization_system(stages);
        let m = TraceModel::uniform(&s);
        (s, m)
    }

    #[test]
    fn zero_phi_gives_zero_maps() {
        let (s, m) = setup(12);
        let cert = realize_phi(&PhiSpec::zero(s, m).unwrap(), 4).unwrap();
        assert!(cert.h.iter().all(IntMatrix::is_zero));
        assert!(cert.psi_maps.iter().all(IntMatrix::is_zero));
        let t = telescoping_check(&cert, 0).unwrap();
        assert!(t.pass && t.gap == 0.0);
    }

    #[test]
    fn theta_constant_certificate() {
        let (s, m) = setup(24);
        let tiny = Rat::new(Int::from(1), num_traits::pow(Int::from(10), 600));
        let (theta, err) = crate::realize::rotation::golden_conjugate(&tiny);
        let phi = PhiSpec::constant_on_generator(s, m, 0, theta, err).unwrap();
        let cert = realize_phi(&phi, 5).unwrap();
        assert_eq!(cert.bounds.len(), 5);
        assert!(cert.bounds.iter().all(StageSlack::all_positive));
        for n in 0..=3 {
            let t = telescoping_check(&cert, n).unwrap();
            assert!(t.pass, "{t:?}");
            assert!(t.gap_bound <= 1.0 / 16.0 + 1e-15);
        }
        let mut bad = cert.clone();
        bad.psi.psi0[2][(0, 0)] += Int::from(1);
        let t = telescoping_check(&bad, 0).unwrap();
        assert!(!t.pass);
    }

    #[test]
    fn integer_map_certificate_solves() {
        let (s, m) = setup(24);
        let g = IntMatrix::from_rows(&[[1, 2], [0, -1]]);
        let phi = PhiSpec::from_integer_map(s, m, &g).unwrap();
        let cert = realize_phi(&phi, 5).unwrap();
        let sol = solve_cocycle(&cert.psi, 4).unwrap();
        assert!(verify_cochain(&cert.system, &cert.psi.psi0, &sol, 4, Parity::K1));
    }
}
