//! Rotation numbers of sampled paths and the path combinators.
//!
//! The rotation number is `Σ_k (1/2πi)·τ(Log(F_{k+1}F_k*))`. When every eigenvalue
//! of a step lies within the arc `2·asin(δ/2)` of 1, with `δ = |F_{k+1}F_k* − I|_F`,
//! and `n` such arcs still sum below `π`, the sum of principal arguments equals
//! `arg det`, which is what the fast path computes. The total is then the winding
//! of `det F` along the samples and does not move under refinement beyond rounding.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::bott::eigenvalues;
use super::sample::{block_diag, mul, CMatrix, UnitaryError, UnitaryPath, UnitarySample};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatrixTrace {
    /// `tr/n`.
    Normalized,
    /// The unnormalized trace `Tr`.
    Full,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RotationValue {
    pub value: f64,
    /// Largest `|F_{k+1}F_k* − I|_F` over the steps.
    pub max_step: f64,
    /// Largest total eigenphase arc `n·2·asin(δ/2)` over the steps; refinement keeps
    /// the value while this stays below `π`.
    pub step_bound: f64,
    /// Steps that needed the eigenvalue path.
    pub eigen_steps: usize,
}

pub fn rotation_number(path: &UnitaryPath, trace: MatrixTrace, gap: f64) -> Result<RotationValue, UnitaryError> {
    let n = path.dim();
    let id = CMatrix::identity(n, n);
    let mut total = 0.0;
    let mut max_step: f64 = 0.0;
    let mut step_bound: f64 = 0.0;
    let mut eigen_steps = 0;
    for (k, w) in path.frames().windows(2).enumerate() {
        let x = mul(w[1].matrix(), &w[0].matrix().adjoint());
        let delta = (&x - &id).norm();
        max_step = max_step.max(delta);
        let arc = n as f64 * 2.0 * (delta / 2.0).min(1.0).asin();
        step_bound = step_bound.max(arc);
        if arc < PI {
            total += x.determinant().arg();
        } else {
            eigen_steps += 1;
            let (ev, _) = eigenvalues(&x)?;
            let distance = ev.iter().map(|l| (l + 1.0).norm()).fold(f64::INFINITY, f64::min);
            if distance < gap {
                return Err(UnitaryError::StepTooLarge { index: k, distance, gap });
            }
            total += ev.iter().map(|l| l.arg()).sum::<f64>();
        }
    }
    let mut value = total / (2.0 * PI);
    if trace == MatrixTrace::Normalized {
        value /= n as f64;
    }
    Ok(RotationValue { value, max_step, step_bound, eigen_steps })
}

/// Frame-wise product.
pub fn path_product(p: &UnitaryPath, q: &UnitaryPath) -> Result<UnitaryPath, UnitaryError> {
    if p.time_grid() != q.time_grid() {
        return Err(UnitaryError::GridMismatch(p.time_grid(), q.time_grid()));
    }
    if p.dim() != q.dim() {
        return Err(UnitaryError::DimMismatch(p.dim(), q.dim()));
    }
    let frames = p.frames().iter().zip(q.frames()).map(|(a, b)| a.mul(b)).collect::<Result<Vec<_>, _>>()?;
    UnitaryPath::new(frames)
}

/// `R_t = [[cos(πt/2), −sin(πt/2)], [sin(πt/2), cos(πt/2)]] ⊗ I_n`.
fn rotation_block(n: usize, t: f64) -> CMatrix {
    let (s, c) = (PI * t / 2.0).sin_cos();
    let mut r = CMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        r[(i, i)] = Complex64::new(c, 0.0);
        r[(n + i, n + i)] = Complex64::new(c, 0.0);
        r[(i, n + i)] = Complex64::new(-s, 0.0);
        r[(n + i, i)] = Complex64::new(s, 0.0);
    }
    r
}

/// `V_t = R_t(1 ⊕ W)R_t⁻¹`, which runs from `1 ⊕ W` to `W ⊕ 1`.
fn swap_path_frame(w: &CMatrix, t: f64) -> CMatrix {
    let n = w.nrows();
    let r = rotation_block(n, t);
    let inner = block_diag(&CMatrix::identity(n, n), w);
    &r * inner * r.transpose()
}

/// `t ↦ V_t (u ⊕ 1) V_t*` with `V_t = R_t(1⊕W)R_t⁻¹`. It runs from `u ⊕ 1` to
/// `WuW* ⊕ 1` and has constant determinant, so its rotation number vanishes.
pub fn conjugation_sandwich(u: &UnitarySample, w: &UnitarySample, grid: usize) -> Result<UnitaryPath, UnitaryError> {
    if u.dim() != w.dim() {
        return Err(UnitaryError::DimMismatch(u.dim(), w.dim()));
    }
    let n = u.dim();
    let base = block_diag(u.matrix(), &CMatrix::identity(n, n));
    UnitaryPath::from_fn(grid, 2 * n, |t| {
        let v = swap_path_frame(w.matrix(), t);
        &v * &base * v.adjoint()
    })
}

/// The sandwich from `z ⊕ 1` to `u z u* ⊕ 1`, followed by
/// `t ↦ (e^{2πith} ⊕ 1)(u z u* ⊕ 1)`. Its full-trace rotation number is `Tr h`.
pub fn zeta_path(u: &UnitarySample, z: &UnitarySample, h: &CMatrix, grid: usize) -> Result<UnitaryPath, UnitaryError> {
    let n = u.dim();
    if z.dim() != n || h.nrows() != n || h.ncols() != n {
        return Err(UnitaryError::DimMismatch(n, z.dim()));
    }
    if (h - h.adjoint()).norm() > 1e-12 {
        return Err(UnitaryError::Parse("h is not self-adjoint".into()));
    }
    let first = conjugation_sandwich(z, u, grid)?;
    let end = first.end().matrix().clone();
    let eig = h.clone().symmetric_eigen();
    let second = UnitaryPath::from_fn(grid, 2 * n, |t| {
        let phases = eig.eigenvalues.map(|l| Complex64::from_polar(1.0, 2.0 * PI * t * l));
        let e = &eig.eigenvectors * CMatrix::from_diagonal(&phases) * eig.eigenvectors.adjoint();
        block_diag(&e, &CMatrix::identity(n, n)) * &end
    })?;
    first.concat(&second, 1e-9)
}
