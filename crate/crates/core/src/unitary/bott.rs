//! Bott elements of almost commuting pairs and the winding-pair construction.

use std::f64::consts::PI;

use nalgebra::Schur;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::sample::{
    holder_norm_bound, mul, winding_w, CMatrix, LoopFrames, UnitaryError, UnitaryLoop, UnitarySample, WindingBlock,
};
use super::sparse::{winding_z_sparse, Sparse};

/// Entries at or below this modulus are treated as structural zeros when splitting
/// a matrix into blocks. The dropped mass is reported by [`eigenvalues`].
const DROP_TOL: f64 = 1e-13;

/// Eigenvalues computed block by block over the connected components of the
/// sparsity pattern. Returns the eigenvalues and the Frobenius norm of the entries
/// dropped as zeros; for a normal matrix each eigenvalue moves by at most that much.
pub fn eigenvalues(m: &CMatrix) -> Result<(Vec<Complex64>, f64), UnitaryError> {
    let n = m.nrows();
    let zero = Complex64::new(0.0, 0.0);
    let entries = (0..n).flat_map(|i| (0..n).map(move |j| (i, j, m[(i, j)]))).filter(|e| e.2 != zero);
    eigenvalues_from_entries(n, entries)
}

fn eigenvalues_from_entries(
    n: usize,
    entries: impl Iterator<Item = (usize, usize, Complex64)>,
) -> Result<(Vec<Complex64>, f64), UnitaryError> {
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    let mut parent: Vec<usize> = (0..n).collect();
    let mut kept = Vec::new();
    let mut dropped = 0.0;
    for (i, j, x) in entries {
        let a = x.norm();
        if i != j && a <= DROP_TOL {
            dropped += a * a;
            continue;
        }
        kept.push((i, j, x));
        let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
        if ri != rj {
            parent[ri] = rj;
        }
    }
    let roots: Vec<usize> = (0..n).map(|i| find(&mut parent, i)).collect();
    let mut size = vec![0usize; n];
    let mut pos = vec![0usize; n];
    for i in 0..n {
        pos[i] = size[roots[i]];
        size[roots[i]] += 1;
    }
    let mut diag = vec![Complex64::new(0.0, 0.0); n];
    let mut subs: std::collections::BTreeMap<usize, CMatrix> = Default::default();
    for (i, j, x) in kept {
        let r = roots[i];
        if size[r] == 1 {
            diag[i] = x;
        } else {
            subs.entry(r).or_insert_with(|| CMatrix::zeros(size[r], size[r]))[(pos[i], pos[j])] = x;
        }
    }
    let mut out: Vec<Complex64> = (0..n).filter(|&i| size[roots[i]] == 1).map(|i| diag[i]).collect();
    for sub in subs.into_values() {
        match Schur::try_new(sub.clone(), f64::EPSILON, 100_000) {
            Some(schur) => {
                let (_, t) = schur.unpack();
                out.extend((0..t.nrows()).map(|k| t[(k, k)]));
            }
            None => out.extend(normal_eigenvalues(&sub)?),
        }
    }
    Ok((out, dropped.sqrt()))
}

/// Eigenvalues of a normal matrix from the Hermitian matrix `cos a·H + sin a·K`,
/// `M = H + iK`, whose eigenspaces are joint eigenspaces of `H` and `K` unless two
/// eigenvalues of `M` sit symmetrically about the angle `a`. A second angle is tried
/// when the Rayleigh quotients do not reproduce `M`.
fn normal_eigenvalues(m: &CMatrix) -> Result<Vec<Complex64>, UnitaryError> {
    let n = m.nrows();
    let h = (m + m.adjoint()) * Complex64::new(0.5, 0.0);
    let k = (m - m.adjoint()) * Complex64::new(0.0, -0.5);
    let scale = m.norm().max(1.0);
    for a in [0.737_190_5_f64, 2.113_829_1] {
        let (s, c) = a.sin_cos();
        let eig = (&h * Complex64::new(c, 0.0) + &k * Complex64::new(s, 0.0)).symmetric_eigen();
        let v = &eig.eigenvectors;
        let mv = m * v;
        let lambda: Vec<Complex64> = (0..n).map(|j| v.column(j).dotc(&mv.column(j))).collect();
        let residual = (0..n).map(|j| (mv.column(j) - v.column(j) * lambda[j]).norm_squared()).sum::<f64>().sqrt();
        if residual <= 1e-9 * scale {
            return Ok(lambda);
        }
    }
    Err(UnitaryError::NoConvergence)
}

/// `B(u,v) = (1/2πi) Tr log(vuv*u*)` with the principal branch.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BottValue {
    pub raw: f64,
    pub rounded: i64,
    pub residual: f64,
    /// Smallest distance from the spectrum of `vuv*u*` to −1.
    pub gap_distance: f64,
    /// `|vuv*u* − I|_F`.
    pub commutator_norm: f64,
}

pub fn bott(u: &UnitarySample, v: &UnitarySample, gap: f64) -> Result<BottValue, UnitaryError> {
    bott_at(u, v, gap, 0)
}

fn bott_at(u: &UnitarySample, v: &UnitarySample, gap: f64, index: usize) -> Result<BottValue, UnitaryError> {
    if u.dim() != v.dim() {
        return Err(UnitaryError::DimMismatch(u.dim(), v.dim()));
    }
    if let (Some(su), Some(sv)) = (Sparse::from_dense(u.matrix()), Sparse::from_dense(v.matrix())) {
        return bott_sparse(&su, &sv, gap, index);
    }
    let c = mul(&mul(&mul(v.matrix(), u.matrix()), &v.matrix().adjoint()), &u.matrix().adjoint());
    let commutator_norm = (&c - CMatrix::identity(c.nrows(), c.ncols())).norm();
    let (ev, _) = eigenvalues(&c)?;
    bott_from_spectrum(&ev, commutator_norm, gap, index)
}

fn bott_sparse(u: &Sparse, v: &Sparse, gap: f64, index: usize) -> Result<BottValue, UnitaryError> {
    let c = v.mul(u).mul(&v.adjoint()).mul(&u.adjoint());
    let (ev, _) = eigenvalues_from_entries(c.dim(), c.entries())?;
    bott_from_spectrum(&ev, c.distance_to_identity(), gap, index)
}

fn bott_from_spectrum(ev: &[Complex64], commutator_norm: f64, gap: f64, index: usize) -> Result<BottValue, UnitaryError> {
    let gap_distance = ev.iter().map(|l| (l + 1.0).norm()).fold(f64::INFINITY, f64::min);
    if gap_distance < gap {
        return Err(UnitaryError::SpectrumNearMinusOne { index, distance: gap_distance, gap });
    }
    let raw = ev.iter().map(|l| l.arg()).sum::<f64>() / (2.0 * PI);
    let rounded = raw.round() as i64;
    Ok(BottValue { raw, rounded, residual: (raw - rounded as f64).abs(), gap_distance, commutator_norm })
}

/// `w = ⊕ diag(1, ω, …, ω^{M−1})` with `ω = e^{−2πiN/M}` and the loop `z(t)` of
/// companion blocks with corner `e^{2πiLt}`. Then `z w z* w* = ⊕ ω⁻¹·I`, so
/// `B(w, z(t)) = Σ N_s` whenever every `|N_s|/M_s < 1/2`.
pub fn make_winding_pair(blocks: &[WindingBlock], grid: usize) -> Result<(UnitarySample, UnitaryLoop), UnitaryError> {
    let z = UnitaryLoop::winding(blocks.to_vec(), grid)?;
    Ok((winding_w(blocks), z))
}

/// `B(u, z(t_k))` at every circle sample.
pub fn bott_over_loop(u: &UnitarySample, z: &UnitaryLoop, gap: f64) -> Result<Vec<BottValue>, UnitaryError> {
    if u.dim() != z.dim() {
        return Err(UnitaryError::DimMismatch(u.dim(), z.dim()));
    }
    match (Sparse::from_dense(u.matrix()), z.source()) {
        (Some(su), LoopFrames::Winding(blocks)) => (0..z.grid())
            .map(|k| bott_sparse(&su, &winding_z_sparse(blocks, k as f64 / z.grid() as f64), gap, k))
            .collect(),
        _ => (0..z.grid()).map(|k| bott_at(u, &z.frame(k), gap, k)).collect(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormCheck {
    /// `max_k |w z(t_k) w* − z(t_k)|`, bounded above by `sqrt(|A|_1 |A|_∞)`.
    pub lhs: f64,
    pub rhs: f64,
    pub eps: f64,
    pub pass: bool,
}

/// `lhs ≤ 2π·max_s |N_s|/M_s + ε` with the grid artifact `ε = 2π·(2π/grid)`.
pub fn winding_norm_check(blocks: &[WindingBlock], grid: usize) -> Result<NormCheck, UnitaryError> {
    let (w, z) = make_winding_pair(blocks, grid)?;
    let wa = w.adjoint();
    let mut lhs: f64 = 0.0;
    for zt in z.frames() {
        let a = mul(&mul(w.matrix(), zt.matrix()), wa.matrix()) - zt.matrix();
        lhs = lhs.max(holder_norm_bound(&a));
    }
    let eps = 2.0 * PI * (2.0 * PI / grid as f64);
    let ratio = blocks.iter().map(|b| b.n.unsigned_abs() as f64 / b.m as f64).fold(0.0, f64::max);
    let rhs = 2.0 * PI * ratio + eps;
    Ok(NormCheck { lhs, rhs, eps, pass: lhs <= rhs })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HomotopyScan {
    pub values: Vec<i64>,
    pub max_residual: f64,
    pub constant: bool,
}

/// Rounded Bott values along a sampled path of pairs.
pub fn bott_homotopy_scan(pairs: &[(UnitarySample, UnitarySample)], gap: f64) -> Result<HomotopyScan, UnitaryError> {
    let vals = pairs.iter().enumerate().map(|(k, (u, v))| bott_at(u, v, gap, k)).collect::<Result<Vec<_>, _>>()?;
    let values: Vec<i64> = vals.iter().map(|b| b.rounded).collect();
    let constant = values.windows(2).all(|w| w[0] == w[1]);
    let max_residual = vals.iter().map(|b| b.residual).fold(0.0, f64::max);
    Ok(HomotopyScan { values, max_residual, constant })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::unitary::sample::DEFAULT_GAP;

    fn blocks(b: &[(usize, i64, i64)]) -> Vec<WindingBlock> {
        b.iter().map(|&(m, n, l)| WindingBlock::new(m, n, l).unwrap()).collect()
    }

    #[test]
    fn normal_eigenvalues_handle_clusters() {
        let phases: Vec<Complex64> = [0.4, 0.4, 0.4, -1.3, -1.3, 2.0].iter().map(|&a| Complex64::from_polar(1.0, a)).collect();
        let x = UnitarySample::random_seeded(6, 11);
        let m = x.conjugate(&UnitarySample::diagonal(&phases)).unwrap();
        let mut got: Vec<f64> = normal_eigenvalues(m.matrix()).unwrap().iter().map(|l| l.arg()).collect();
        got.sort_by(f64::total_cmp);
        for (g, e) in got.iter().zip([-1.3, -1.3, 0.4, 0.4, 0.4, 2.0]) {
            assert!((g - e).abs() < 1e-10);
        }
    }

    #[test]
    fn commuting_pair_is_zero() {
        let u = UnitarySample::diagonal(&[Complex64::from_polar(1.0, 0.3), Complex64::from_polar(1.0, -2.0)]);
        let v = UnitarySample::diagonal(&[Complex64::from_polar(1.0, 1.1), Complex64::from_polar(1.0, 2.9)]);
        let b = bott(&u, &v, DEFAULT_GAP).unwrap();
        assert_eq!(b.rounded, 0);
        assert!(b.raw.abs() < 1e-12);
    }

    #[test]
    fn winding_pair_examples() {
        for (bl, expect) in [(blocks(&[(8, 1, 1)]), 1), (blocks(&[(8, 0, 1)]), 0), (blocks(&[(16, 2, 1), (16, 1, -1)]), 3)] {
            let (w, z) = make_winding_pair(&bl, 64).unwrap();
            for b in bott_over_loop(&w, &z, DEFAULT_GAP).unwrap() {
                assert_eq!(b.rounded, expect);
                assert!(b.residual < 1e-10);
            }
            // swapping the arguments negates
            assert_eq!(bott(&z.frame(5), &w, DEFAULT_GAP).unwrap().rounded, -expect);
        }
    }

    #[test]
    fn norm_check_examples() {
        let c = winding_norm_check(&blocks(&[(8, 0, 1)]), 256).unwrap();
        assert_eq!(c.lhs, 0.0);
        for m in [8, 64] {
            let c = winding_norm_check(&blocks(&[(m, 1, 1)]), 2048).unwrap();
            assert!(c.pass);
            // the exact norm of (ω^{±1} − 1)·S is 2 sin(π/M)
            assert!((c.lhs - 2.0 * (PI / m as f64).sin()).abs() < 1e-12);
        }
    }

    #[test]
    fn conjugated_pair_keeps_its_value() {
        let (w, z) = make_winding_pair(&blocks(&[(6, 1, 1), (5, -1, 1)]), 8).unwrap();
        let q = UnitarySample::random_seeded(11, 2);
        let u = q.conjugate(&w).unwrap();
        let v = q.conjugate(&z.frame(3)).unwrap();
        assert_eq!(bott(&u, &v, DEFAULT_GAP).unwrap().rounded, 0);
        let (w, z) = make_winding_pair(&blocks(&[(9, 2, 1)]), 8).unwrap();
        let u = q.conjugate(&w.direct_sum(&UnitarySample::identity(2))).unwrap();
        let v = q.conjugate(&z.frame(1).direct_sum(&UnitarySample::identity(2))).unwrap();
        let b = bott(&u, &v, DEFAULT_GAP).unwrap();
        assert_eq!(b.rounded, 2);
        assert!(b.residual < 1e-9);
    }

    #[test]
    fn gap_failure_is_reported_with_index() {
        let (w, _) = make_winding_pair(&blocks(&[(4, 2, 1)]), 4).unwrap();
        let (_, z) = make_winding_pair(&blocks(&[(4, 2, 1)]), 4).unwrap();
        let ok = make_winding_pair(&blocks(&[(4, 0, 1)]), 4).unwrap();
        let pairs = vec![(ok.0.clone(), ok.1.frame(0)), (w, z.frame(0))];
        match bott_homotopy_scan(&pairs, DEFAULT_GAP) {
            Err(UnitaryError::SpectrumNearMinusOne { index, .. }) => assert_eq!(index, 1),
            other => panic!("{other:?}"),
        }
    }
}
