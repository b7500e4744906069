//! Stage-wise cocycles `ψ_n` gluing split extensions along an inductive system,
//! the coboundary solver, and the truncated limit extension.
//!
//! Maps into the limit group are represented at a common target stage `T`: `ψ_n`
//! is a `k_T × k_n` integer matrix. A cochain `h_n: ℤ^{k_n} → K` is required to
//! factor through stage `n + 1`, i.e. `h_n = χ_{T,n+1}·g_n`, which makes the
//! truncated problem a genuine integer system.

use serde::{Deserialize, Serialize};

use super::oext::{Ambient, OExtError, OrderExtension};
use crate::dimgrp::{InductiveSystem, Parity, SystemError, TraceError, TraceModel};
use crate::zmod::{solve_linear, ExtensionPresentation, FGAbelianGroup, GroupHom, Int, IntMatrix, RatMatrix};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CocycleError {
    #[error("no cochain solves the cocycle equations up to depth {0}")]
    NotFoundAtDepth(usize),
    #[error("depth {depth} needs a target stage of at least {needed}, have {target}")]
    TargetTooShallow { depth: usize, needed: usize, target: usize },
    #[error("cocycle sequence has {have} maps, depth {depth} needs {depth}")]
    TooFewMaps { have: usize, depth: usize },
    #[error("psi_{index} has shape {rows}x{cols}, expected {er}x{ec}")]
    Shape { index: usize, rows: usize, cols: usize, er: usize, ec: usize },
    #[error("D(psi_{0}) is not zero")]
    NotInKerD(usize),
    #[error("assembly needs depth at least 2")]
    DepthTooSmall,
    #[error("chi^1 from stage 0 to stage {0} is not injective")]
    NotInjective(usize),
    #[error("Psi does not land in the lattice K_N")]
    OutsideLattice,
    #[error(transparent)]
    System(#[from] SystemError),
    #[error(transparent)]
    Trace(#[from] TraceError),
    #[error(transparent)]
    OExt(#[from] OExtError),
}

/// `ψ_n⁰: ℤ^{k_n} → K_0` and `ψ_n¹: ℤ^{k_n} → K_1` at a common target stage.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CocycleSequence {
    pub system: InductiveSystem,
    pub target_stage: usize,
    pub psi0: Vec<IntMatrix>,
    #[serde(default)]
    pub psi1: Vec<IntMatrix>,
    /// Traces defining `ker D`; when present, `ψ⁰` and the cochains must land in `ker D`.
    #[serde(default)]
    pub model: Option<TraceModel>,
}

/// `h_n = χ_{T,n+1}·g_n` for `n = 0..=depth`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CochainSequence {
    pub target_stage: usize,
    pub g: Vec<IntMatrix>,
    pub h: Vec<IntMatrix>,
}

impl CocycleSequence {
    pub fn validate(&self) -> Result<(), CocycleError> {
        let s = &self.system;
        if self.target_stage >= s.nstages() {
            return Err(SystemError::StageOutOfRange { stage: self.target_stage, available: s.nstages() }.into());
        }
        let kt = s.rank(self.target_stage);
        for (parity_psi, list) in [(0, &self.psi0), (1, &self.psi1)] {
            for (n, p) in list.iter().enumerate() {
                if n >= s.nstages() || p.rows() != kt || p.cols() != s.rank(n) {
                    let ec = if n < s.nstages() { s.rank(n) } else { 0 };
                    return Err(CocycleError::Shape { index: n, rows: p.rows(), cols: p.cols(), er: kt, ec });
                }
                if parity_psi == 0 {
                    if let Some(m) = &self.model {
                        let d = m.d_matrix(s, self.target_stage)?;
                        if !d.mul_int(p).is_zero() {
                            return Err(CocycleError::NotInKerD(n));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// `ψ_n = h_n − h_{n+1}·χ_n¹` for a cochain given through `g`.
    pub fn from_cochain(
        system: &InductiveSystem,
        target_stage: usize,
        g: &[IntMatrix],
        model: Option<TraceModel>,
    ) -> Result<(CocycleSequence, CochainSequence), CocycleError> {
        let h = cochain_from_g(system, target_stage, g, Parity::K0)?;
        let psi0 = (0..g.len().saturating_sub(1))
            .map(|n| h[n].sub(&h[n + 1].mul(system.map(Parity::K1, n))))
            .collect();
        let psi = CocycleSequence { system: system.clone(), target_stage, psi0, psi1: Vec::new(), model };
        psi.validate()?;
        Ok((psi, CochainSequence { target_stage, g: g.to_vec(), h }))
    }
}

fn cochain_from_g(system: &InductiveSystem, t: usize, g: &[IntMatrix], target: Parity) -> Result<Vec<IntMatrix>, CocycleError> {
    g.iter()
        .enumerate()
        .map(|(n, gn)| {
            if n + 1 > t {
                return Err(CocycleError::TargetTooShallow { depth: n, needed: n + 1, target: t });
            }
            Ok(system.composite(target, t, n + 1)?.mul(gn))
        })
        .collect()
}

/// Exact re-check of `ψ_n = h_n − h_{n+1}χ_n` for `n < depth` and of the factorization of each `h_n`.
pub fn verify_cochain(
    system: &InductiveSystem,
    psi: &[IntMatrix],
    cochain: &CochainSequence,
    depth: usize,
    source: Parity,
) -> bool {
    let target = other(source);
    let t = cochain.target_stage;
    if cochain.h.len() < depth + 1 || cochain.g.len() < depth + 1 || psi.len() < depth {
        return false;
    }
    for n in 0..=depth {
        match system.composite(target, t, n + 1) {
            Ok(x) if x.mul(&cochain.g[n]) == cochain.h[n] => {}
            _ => return false,
        }
    }
    (0..depth).all(|n| psi[n] == cochain.h[n].sub(&cochain.h[n + 1].mul(system.map(source, n))))
}

fn other(p: Parity) -> Parity {
    match p {
        Parity::K0 => Parity::K1,
        Parity::K1 => Parity::K0,
    }
}

/// Solves `ψ_n = χ_{T,n+1} g_n − χ_{T,n+2} g_{n+1} χ_n` for `n < depth` as one integer
/// system in the entries of `g_0, …, g_depth`, optionally with `D(χ_{T,n+1} g_n) = 0`.
fn solve_generic(
    system: &InductiveSystem,
    t: usize,
    psi: &[IntMatrix],
    depth: usize,
    source: Parity,
    kerd: Option<&RatMatrix>,
) -> Result<CochainSequence, CocycleError> {
    if psi.len() < depth {
        return Err(CocycleError::TooFewMaps { have: psi.len(), depth });
    }
    if t < depth + 1 || t >= system.nstages() {
        return Err(CocycleError::TargetTooShallow { depth, needed: depth + 1, target: t });
    }
    let target = other(source);
    let kt = system.rank(t);
    // offsets of g_n inside the unknown vector; g_n is k_{n+1} × k_n, row-major
    let mut offsets = Vec::with_capacity(depth + 2);
    let mut total = 0;
    for n in 0..=depth {
        offsets.push(total);
        total += system.rank(n + 1) * system.rank(n);
    }
    let xs: Vec<IntMatrix> = (0..=depth + 1).map(|n| system.composite(target, t, n.min(t))).collect::<Result<_, _>>()?;
    let mut rows: Vec<Vec<Int>> = Vec::new();
    let mut rhs: Vec<Int> = Vec::new();
    for n in 0..depth {
        let (kn, kn1, kn2) = (system.rank(n), system.rank(n + 1), system.rank(n + 2));
        let chi = system.map(source, n);
        let xa = &xs[n + 1];
        let xb = &xs[n + 2];
        for a in 0..kt {
            for b in 0..kn {
                let mut row = vec![Int::from(0); total];
                for i in 0..kn1 {
                    row[offsets[n] + i * kn + b] += &xa[(a, i)];
                }
                for i in 0..kn2 {
                    for j in 0..kn1 {
                        let c = &xb[(a, i)] * &chi[(j, b)];
                        row[offsets[n + 1] + i * kn1 + j] -= c;
                    }
                }
                rows.push(row);
                rhs.push(psi[n][(a, b)].clone());
            }
        }
    }
    if let Some(d) = kerd {
        let (dm, _) = d.clear_denominators();
        for n in 0..=depth {
            let dx = dm.mul(&xs[n + 1]);
            let (kn, kn1) = (system.rank(n), system.rank(n + 1));
            for r in 0..dx.rows() {
                for b in 0..kn {
                    let mut row = vec![Int::from(0); total];
                    for i in 0..kn1 {
                        row[offsets[n] + i * kn + b] = dx[(r, i)].clone();
                    }
                    rows.push(row);
                    rhs.push(Int::from(0));
                }
            }
        }
    }
    let mut a = IntMatrix::zeros(rows.len(), total);
    for (i, r) in rows.iter().enumerate() {
        for (j, v) in r.iter().enumerate() {
            a[(i, j)] = v.clone();
        }
    }
    let sol = solve_linear(&a, &rhs).ok_or(CocycleError::NotFoundAtDepth(depth))?;
    let g: Vec<IntMatrix> = (0..=depth)
        .map(|n| {
            let (kn, kn1) = (system.rank(n), system.rank(n + 1));
            IntMatrix::from_vec(kn1, kn, sol[offsets[n]..offsets[n] + kn1 * kn].to_vec())
        })
        .collect();
    let h = cochain_from_g(system, t, &g, target)?;
    let out = CochainSequence { target_stage: t, g, h };
    debug_assert!(verify_cochain(system, psi, &out, depth, source));
    Ok(out)
}

/// Cochain `h` with `ψ_n⁰ = h_n − h_{n+1}χ_n¹` for `n < depth`, each `h_n` factoring
/// through stage `n+1` (and landing in `ker D` when the sequence carries a trace model).
/// `NotFoundAtDepth` refers to this truncation only.
pub fn solve_cocycle(psi: &CocycleSequence, depth: usize) -> Result<CochainSequence, CocycleError> {
    psi.validate()?;
    let kerd = match &psi.model {
        Some(m) => Some(m.d_matrix(&psi.system, psi.target_stage)?),
        None => None,
    };
    let out = solve_generic(&psi.system, psi.target_stage, &psi.psi0, depth, Parity::K1, kerd.as_ref())?;
    if !verify_cochain(&psi.system, &psi.psi0, &out, depth, Parity::K1) {
        return Err(CocycleError::NotFoundAtDepth(depth));
    }
    Ok(out)
}

/// The mirror problem `ψ_n¹ = h_n¹ − h_{n+1}¹χ_n⁰` with values in `K_1`.
pub fn solve_cocycle_k1(psi: &CocycleSequence, depth: usize) -> Result<CochainSequence, CocycleError> {
    psi.validate()?;
    let out = solve_generic(&psi.system, psi.target_stage, &psi.psi1, depth, Parity::K0, None)?;
    if !verify_cochain(&psi.system, &psi.psi1, &out, depth, Parity::K0) {
        return Err(CocycleError::NotFoundAtDepth(depth));
    }
    Ok(out)
}

/// Truncated limit extension at depth `N` with its lattice data.
#[derive(Clone, Debug, Serialize)]
pub struct StageExtension {
    pub depth: usize,
    pub oext: OrderExtension,
    /// Generators of `K_N` in `ℤ^{k_T}` (columns).
    pub lattice: IntMatrix,
}

/// `K_n = ker D ∩ im χ_{T,n+1}` (or `im χ_{T,n+1}` without a trace model), as generator columns.
fn lattice_at(psi: &CocycleSequence, n: usize) -> Result<IntMatrix, CocycleError> {
    let x = psi.system.composite(Parity::K0, psi.target_stage, n + 1)?;
    match &psi.model {
        None => Ok(x),
        Some(m) => {
            let d = m.d_matrix(&psi.system, psi.target_stage)?;
            let (dm, _) = d.mul_int(&x).clear_denominators();
            Ok(x.mul(&crate::zmod::integer_kernel(&dm)))
        }
    }
}

/// `E = (K_N/K_0 ⊕ ℤ^{k_N}) / ⟨(Ψb, χ¹_{N,0}b)⟩` with `Ψ = Σ_{n<N} ψ_n χ¹_{n,0}`,
/// an extension of `G1 = coker χ¹_{N,0}` by `G0 = K_N/K_0`, with zero rotation data.
/// It is the quotient of the stage-`N` glued extension by the image of stage 0; a
/// solvable `ψ` makes it split, so a nonsplit truncation certifies an obstruction.
pub fn assemble_stage_extension(psi: &CocycleSequence, depth: usize) -> Result<StageExtension, CocycleError> {
    psi.validate()?;
    if depth < 2 {
        return Err(CocycleError::DepthTooSmall);
    }
    if psi.psi0.len() < depth {
        return Err(CocycleError::TooFewMaps { have: psi.psi0.len(), depth });
    }
    if psi.target_stage < depth + 1 {
        return Err(CocycleError::TargetTooShallow { depth, needed: depth + 1, target: psi.target_stage });
    }
    let s = &psi.system;
    let kt = s.rank(psi.target_stage);
    let chi_n0 = s.composite(Parity::K1, depth, 0)?;
    if crate::zmod::snf::rank(&chi_n0) != s.rank(0) {
        return Err(CocycleError::NotInjective(depth));
    }
    let ambient_free = FGAbelianGroup::free(kt);
    let kn = lattice_at(psi, depth)?;
    let k0 = lattice_at(psi, 0)?;
    let g0 = ambient_free.subgroup_quotient(&kn, &k0.column_vectors()).ok_or(CocycleError::OutsideLattice)?;
    let mut big_psi = IntMatrix::zeros(kt, s.rank(0));
    for n in 0..depth {
        big_psi = big_psi.add(&psi.psi0[n].mul(&s.composite(Parity::K1, n, 0)?));
    }
    let r0 = g0.ngens();
    let kd = s.rank(depth);
    let mut rows: Vec<Vec<Int>> = g0.presentation().row_vectors().into_iter().map(|mut r| {
        r.resize(r0 + kd, Int::from(0));
        r
    }).collect();
    for b in 0..s.rank(0) {
        let t = ambient_free.express_in(&kn, &big_psi.column(b)).ok_or(CocycleError::OutsideLattice)?;
        let mut r = t;
        r.extend(chi_n0.column(b));
        rows.push(r);
    }
    let mut pres = IntMatrix::zeros(rows.len(), r0 + kd);
    for (i, r) in rows.iter().enumerate() {
        for (j, v) in r.iter().enumerate() {
            pres[(i, j)] = v.clone();
        }
    }
    let e = FGAbelianGroup::new(pres);
    let g1 = FGAbelianGroup::new(chi_n0.transpose());
    let iota = GroupHom::new(g0.clone(), e.clone(), IntMatrix::identity(r0).vstack(&IntMatrix::zeros(kd, r0)))
        .map_err(OExtError::from)?;
    let q = GroupHom::new(e.clone(), g1.clone(), IntMatrix::zeros(kd, r0).hstack(&IntMatrix::identity(kd)))
        .map_err(OExtError::from)?;
    let ext = ExtensionPresentation::new(iota, q).map_err(OExtError::from)?;
    let ntraces = psi.model.as_ref().map_or(1, |m| m.len());
    let ambient = Ambient::new(g0, g1, RatMatrix::zeros(ntraces, r0))?;
    let oext = OrderExtension::new(ambient, ext, RatMatrix::zeros(ntraces, r0 + kd))?;
    Ok(StageExtension { depth, oext, lattice: kn })
}
