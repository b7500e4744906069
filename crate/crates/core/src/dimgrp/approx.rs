//! Constructive approximation inside `Range D`.
//!
//! At stage `m` the extreme traces see `D(x)_j = x_j / [m,j]`, so the best
//! approximation of a target value `t_j` is `x_j = round(t_j·[m,j])` with error at
//! most `1/(2[m,j])`. The bound is checked at the extreme traces of the stage where
//! the candidate lives. Both sides are affine on the trace simplex of that stage and
//! every trace of the limit restricts to a point of it, so the coordinatewise bound
//! there holds for every trace of the limit.

use num_traits::{Signed, Zero};

use super::system::{AffElement, InductiveSystem, StageVector, SystemError};
use super::trace::{TraceError, TraceModel};
use crate::zmod::matrix::round_rat;
use crate::zmod::{Int, Rat};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ApproxError {
    #[error("no approximation within the bound up to stage {last_stage}")]
    NotFound { last_stage: usize },
    #[error("bound must be strictly positive")]
    NonPositiveBound,
    #[error("target and bound must live at the same stage")]
    StageMismatch,
    #[error(transparent)]
    System(#[from] SystemError),
    #[error(transparent)]
    Trace(#[from] TraceError),
}

/// Finds `ξ` at some stage `m ∈ [target.stage, target.stage + search_depth]` with
/// `|target − D(ξ)| < bound` at every extreme trace of stage `m`.
pub fn approx_in_range_d(
    target: &AffElement,
    system: &InductiveSystem,
    bound: &AffElement,
    search_depth: usize,
) -> Result<StageVector, ApproxError> {
    if target.stage != bound.stage || target.values.len() != bound.values.len() {
        return Err(ApproxError::StageMismatch);
    }
    if bound.values.iter().any(|b| !b.is_positive()) {
        return Err(ApproxError::NonPositiveBound);
    }
    let last = (target.stage + search_depth).min(system.nstages() - 1);
    for m in target.stage..=last {
        let t = target.push_forward(system, m)?;
        let b = bound.push_forward(system, m)?;
        let u = system.unit(m);
        let x: Vec<Int> = t.values.iter().zip(u).map(|(tj, uj)| round_rat(&(tj * Rat::from_integer(uj.clone())))).collect();
        let ok = x
            .iter()
            .zip(u)
            .zip(t.values.iter().zip(&b.values))
            .all(|((xj, uj), (tj, bj))| (tj - Rat::new(xj.clone(), uj.clone())).abs() < *bj);
        if ok {
            return Ok(StageVector::new(m, x));
        }
    }
    Err(ApproxError::NotFound { last_stage: last })
}

/// As [`approx_in_range_d`] but against a [`TraceModel`]: finds `ξ` at a stage
/// `m ∈ [start, start + search_depth]` with `|τ_i(ξ) − target_i| < bound_i` for all
/// traces of the model. Solves on a set of columns with the smallest weights and rounds.
pub fn approx_in_range_d_model(
    target: &[Rat],
    model: &TraceModel,
    system: &InductiveSystem,
    bound: &[Rat],
    start: usize,
    search_depth: usize,
) -> Result<StageVector, ApproxError> {
    if target.len() != model.len() || bound.len() != model.len() {
        return Err(ApproxError::StageMismatch);
    }
    if bound.iter().any(|b| !b.is_positive()) {
        return Err(ApproxError::NonPositiveBound);
    }
    let last = (start + search_depth).min(model.stage());
    for m in start..=last {
        let d = model.d_matrix(system, m)?;
        let Some(cols) = pick_columns(&d) else { continue };
        let sub = crate::zmod::RatMatrix::from_columns(d.rows(), &cols.iter().map(|&j| d.column(j)).collect::<Vec<_>>());
        let Some(y) = sub.solve_square(target) else { continue };
        let mut x = vec![Int::zero(); system.rank(m)];
        for (&j, yj) in cols.iter().zip(&y) {
            x[j] = round_rat(yj);
        }
        let dx = d.mul_int_vec(&x);
        if dx.iter().zip(target).zip(bound).all(|((a, t), b)| (a - t).abs() < *b) {
            return Ok(StageVector::new(m, reduce_mod_kernel(&d, x)));
        }
    }
    Err(ApproxError::NotFound { last_stage: last })
}

/// Moves `x` to a short representative of `x + ker D` by rounding its least-squares
/// coordinates in a kernel basis. The trace values are unchanged and the part of `x`
/// that no trace of the model sees stays small, so it dies out under the connecting maps.
fn reduce_mod_kernel(d: &crate::zmod::RatMatrix, x: Vec<Int>) -> Vec<Int> {
    let k = crate::zmod::integer_kernel(&d.clear_denominators().0);
    if k.cols() == 0 {
        return x;
    }
    let kt = k.transpose();
    let gram = kt.mul(&k).to_rat();
    let rhs: Vec<Rat> = kt.mul_vec(&x).into_iter().map(Rat::from_integer).collect();
    let Some(t) = gram.solve_square(&rhs) else { return x };
    let t: Vec<Int> = t.iter().map(round_rat).collect();
    let shift = k.mul_vec(&t);
    x.iter().zip(shift).map(|(a, b)| a - b).collect()
}

/// Greedy choice of `r` linearly independent columns, preferring small column sums.
fn pick_columns(d: &crate::zmod::RatMatrix) -> Option<Vec<usize>> {
    let r = d.rows();
    let mut order: Vec<usize> = (0..d.cols()).collect();
    let weight = |j: usize| d.column(j).iter().fold(Rat::zero(), |a, x| a + x.abs());
    order.sort_by_key(|&j| weight(j));
    let mut chosen: Vec<usize> = Vec::new();
    for j in order {
        let mut trial = chosen.clone();
        trial.push(j);
        if rank_of_columns(d, &trial) == trial.len() {
            chosen = trial;
        }
        if chosen.len() == r {
            return Some(chosen);
        }
    }
    None
}

fn rank_of_columns(d: &crate::zmod::RatMatrix, cols: &[usize]) -> usize {
    let sub = crate::zmod::RatMatrix::from_columns(d.rows(), &cols.iter().map(|&j| d.column(j)).collect::<Vec<_>>());
    let (n, _) = sub.clear_denominators();
    crate::zmod::snf::rank(&n)
}
