//! Complex unitary matrices, sampled loops and paths.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub type CMatrix = DMatrix<Complex64>;

pub const DEFAULT_UNITARITY_TOL: f64 = 1e-10;
pub const DEFAULT_GAP: f64 = 0.1;
pub const DEFAULT_CIRCLE_GRID: usize = 2048;
pub const DEFAULT_TIME_GRID: usize = 4096;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum UnitaryError {
    #[error("matrix is not square ({0}x{1})")]
    NotSquare(usize, usize),
    #[error("matrix is not unitary: |UU* - I| = {0:e}")]
    NotUnitary(f64),
    #[error("dimension mismatch: {0} vs {1}")]
    DimMismatch(usize, usize),
    #[error("grid mismatch: {0} vs {1}")]
    GridMismatch(usize, usize),
    #[error("spectrum of vuv*u* comes within {distance:e} of -1 (gap {gap}) at sample {index}")]
    SpectrumNearMinusOne { index: usize, distance: f64, gap: f64 },
    #[error("step {index} has spectrum within {distance:e} of -1 (gap {gap}); refine the grid")]
    StepTooLarge { index: usize, distance: f64, gap: f64 },
    #[error("eigenvalue iteration did not converge")]
    NoConvergence,
    #[error("invalid winding block: {0}")]
    InvalidBlock(String),
    #[error("path needs at least two frames")]
    TooShort,
    #[error("twist does not match the endpoints: |end - u0 start u0*| = {0:e}")]
    TwistMismatch(f64),
    #[error("bad complex matrix data: {0}")]
    Parse(String),
}

/// A square matrix with `|UU* − I|_F ≤ tol`.
#[derive(Clone, Debug, PartialEq)]
pub struct UnitarySample {
    m: CMatrix,
}

impl UnitarySample {
    pub fn new(m: CMatrix) -> Result<Self, UnitaryError> {
        Self::with_tolerance(m, DEFAULT_UNITARITY_TOL)
    }

    pub fn with_tolerance(m: CMatrix, tol: f64) -> Result<Self, UnitaryError> {
        if m.nrows() != m.ncols() {
            return Err(UnitaryError::NotSquare(m.nrows(), m.ncols()));
        }
        let d = unitarity_defect(&m);
        if d > tol {
            return Err(UnitaryError::NotUnitary(d));
        }
        Ok(UnitarySample { m })
    }

    pub(crate) fn new_unchecked(m: CMatrix) -> Self {
        UnitarySample { m }
    }

    pub fn identity(n: usize) -> Self {
        UnitarySample { m: CMatrix::identity(n, n) }
    }

    pub fn diagonal(phases: &[Complex64]) -> Self {
        UnitarySample { m: CMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(phases)) }
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.m
    }

    pub fn into_matrix(self) -> CMatrix {
        self.m
    }

    pub fn adjoint(&self) -> Self {
        UnitarySample { m: self.m.adjoint() }
    }

    pub fn mul(&self, other: &Self) -> Result<Self, UnitaryError> {
        if self.dim() != other.dim() {
            return Err(UnitaryError::DimMismatch(self.dim(), other.dim()));
        }
        Ok(UnitarySample { m: mul(&self.m, &other.m) })
    }

    /// `u·x·u*`.
    pub fn conjugate(&self, x: &Self) -> Result<Self, UnitaryError> {
        self.mul(x)?.mul(&self.adjoint())
    }

    pub fn direct_sum(&self, other: &Self) -> Self {
        UnitarySample { m: block_diag(&self.m, &other.m) }
    }

    /// Haar-distributed unitary from a seeded generator (QR of a complex Gaussian matrix).
    pub fn random(n: usize, rng: &mut ChaCha8Rng) -> Self {
        let g = CMatrix::from_fn(n, n, |_, _| {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            Complex64::new(re, im)
        });
        let qr = g.qr();
        let r = qr.r();
        let mut q = qr.q();
        for j in 0..n {
            let d = r[(j, j)];
            let ph = if d.norm() > 0.0 { d / d.norm() } else { Complex64::new(1.0, 0.0) };
            for i in 0..n {
                q[(i, j)] *= ph;
            }
        }
        UnitarySample { m: q }
    }

    pub fn random_seeded(n: usize, seed: u64) -> Self {
        Self::random(n, &mut ChaCha8Rng::seed_from_u64(seed))
    }
}

pub fn unitarity_defect(m: &CMatrix) -> f64 {
    let p = mul(m, &m.adjoint());
    (p - CMatrix::identity(m.nrows(), m.ncols())).norm()
}

/// Product that skips zero entries of `a` when it is sparse. Winding data are
/// permutation-like, so this keeps per-sample work quadratic.
pub fn mul(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let (n, k) = a.shape();
    let zero = Complex64::new(0.0, 0.0);
    let nnz = a.iter().filter(|x| **x != zero).count();
    if nnz * 4 > n * k {
        return a * b;
    }
    let mut out = CMatrix::zeros(n, b.ncols());
    for l in 0..k {
        for i in 0..n {
            let x = a[(i, l)];
            if x == zero {
                continue;
            }
            for j in 0..b.ncols() {
                let y = b[(l, j)];
                if y != zero {
                    out[(i, j)] += x * y;
                }
            }
        }
    }
    out
}

pub fn block_diag(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let (n, m) = (a.nrows(), b.nrows());
    let mut out = CMatrix::zeros(n + m, n + m);
    out.view_mut((0, 0), (n, n)).copy_from(a);
    out.view_mut((n, n), (m, m)).copy_from(b);
    out
}

/// Upper bound `sqrt(|A|_1 |A|_∞)` for the operator norm.
pub fn holder_norm_bound(a: &CMatrix) -> f64 {
    let col = (0..a.ncols()).map(|j| a.column(j).iter().map(|x| x.norm()).sum::<f64>()).fold(0.0, f64::max);
    let row = (0..a.nrows()).map(|i| a.row(i).iter().map(|x| x.norm()).sum::<f64>()).fold(0.0, f64::max);
    (col * row).sqrt()
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SampleWire {
    dim: usize,
    entries: Vec<Vec<[f64; 2]>>,
}

pub(crate) fn matrix_to_pairs(m: &CMatrix) -> Vec<Vec<[f64; 2]>> {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect()).collect()
}

pub(crate) fn pairs_to_matrix(rows: &[Vec<[f64; 2]>]) -> Result<CMatrix, UnitaryError> {
    let n = rows.len();
    let c = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != c) {
        return Err(UnitaryError::Parse("ragged rows".into()));
    }
    Ok(CMatrix::from_fn(n, c, |i, j| Complex64::new(rows[i][j][0], rows[i][j][1])))
}

impl Serialize for UnitarySample {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        SampleWire { dim: self.dim(), entries: matrix_to_pairs(&self.m) }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for UnitarySample {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let w = SampleWire::deserialize(d)?;
        let m = pairs_to_matrix(&w.entries).map_err(serde::de::Error::custom)?;
        if m.nrows() != w.dim {
            return Err(serde::de::Error::custom(format!("dim {} but {} rows", w.dim, m.nrows())));
        }
        UnitarySample::new(m).map_err(serde::de::Error::custom)
    }
}

/// One companion block of a winding pair.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindingBlock {
    #[serde(rename = "M")]
    pub m: usize,
    #[serde(rename = "N")]
    pub n: i64,
    #[serde(rename = "L")]
    pub l: i64,
}

impl WindingBlock {
    pub fn new(m: usize, n: i64, l: i64) -> Result<Self, UnitaryError> {
        let b = WindingBlock { m, n, l };
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<(), UnitaryError> {
        if self.m < 2 {
            return Err(UnitaryError::InvalidBlock(format!("M = {} < 2", self.m)));
        }
        if self.n.unsigned_abs() as usize > self.m {
            return Err(UnitaryError::InvalidBlock(format!("|N| = {} > M = {}", self.n.abs(), self.m)));
        }
        if self.l != 1 && self.l != -1 {
            return Err(UnitaryError::InvalidBlock(format!("L = {} is not +-1", self.l)));
        }
        Ok(())
    }
}

/// Frames of a loop over the circle, `t_k = k/grid`. Winding loops are generated on
/// demand since their frames differ only in the corner entries.
#[derive(Clone, Debug, PartialEq)]
pub enum LoopFrames {
    Sampled(Vec<UnitarySample>),
    Winding(Vec<WindingBlock>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct UnitaryLoop {
    grid: usize,
    closed: bool,
    frames: LoopFrames,
}

impl UnitaryLoop {
    /// `frames` holds `grid` samples, or `grid + 1` with the last equal to the first.
    pub fn sampled(frames: Vec<UnitarySample>, closed: bool) -> Result<Self, UnitaryError> {
        let Some(first) = frames.first() else { return Err(UnitaryError::TooShort) };
        let n = first.dim();
        if let Some(f) = frames.iter().find(|f| f.dim() != n) {
            return Err(UnitaryError::DimMismatch(n, f.dim()));
        }
        Ok(UnitaryLoop { grid: frames.len(), closed, frames: LoopFrames::Sampled(frames) })
    }

    pub fn winding(blocks: Vec<WindingBlock>, grid: usize) -> Result<Self, UnitaryError> {
        if blocks.is_empty() {
            return Err(UnitaryError::InvalidBlock("no blocks".into()));
        }
        for b in &blocks {
            b.validate()?;
        }
        Ok(UnitaryLoop { grid: grid.max(1), closed: true, frames: LoopFrames::Winding(blocks) })
    }

    pub fn grid(&self) -> usize {
        self.grid
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    pub fn dim(&self) -> usize {
        match &self.frames {
            LoopFrames::Sampled(f) => f[0].dim(),
            LoopFrames::Winding(b) => b.iter().map(|b| b.m).sum(),
        }
    }

    pub fn source(&self) -> &LoopFrames {
        &self.frames
    }

    /// Frame at `t = k/grid`; indices wrap for closed loops.
    pub fn frame(&self, k: usize) -> UnitarySample {
        match &self.frames {
            LoopFrames::Sampled(f) => f[if self.closed { k % f.len() } else { k.min(f.len() - 1) }].clone(),
            LoopFrames::Winding(b) => winding_z(b, (k % self.grid) as f64 / self.grid as f64),
        }
    }

    pub fn frames(&self) -> impl Iterator<Item = UnitarySample> + '_ {
        (0..self.grid).map(move |k| self.frame(k))
    }
}

/// `z(t) = ⊕ S_s(t)` with `S e_i = e_{i+1}` and corner entry `e^{2πiL t}` at `(0, M−1)`.
pub(crate) fn winding_z(blocks: &[WindingBlock], t: f64) -> UnitarySample {
    let n: usize = blocks.iter().map(|b| b.m).sum();
    let mut m = CMatrix::zeros(n, n);
    let mut off = 0;
    for b in blocks {
        for i in 0..b.m - 1 {
            m[(off + i + 1, off + i)] = Complex64::new(1.0, 0.0);
        }
        m[(off, off + b.m - 1)] = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * b.l as f64 * t);
        off += b.m;
    }
    UnitarySample::new_unchecked(m)
}

/// `w = ⊕ diag(1, ω, …, ω^{M−1})`, `ω = e^{−2πiN/M}`.
pub(crate) fn winding_w(blocks: &[WindingBlock]) -> UnitarySample {
    let mut d = Vec::new();
    for b in blocks {
        let step = -2.0 * std::f64::consts::PI * b.n as f64 / b.m as f64;
        d.extend((0..b.m).map(|k| Complex64::from_polar(1.0, step * k as f64)));
    }
    UnitarySample::diagonal(&d)
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LoopWire {
    grid: usize,
    closed: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    frames: Option<Vec<UnitarySample>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    winding: Option<Vec<WindingBlock>>,
}

impl Serialize for UnitaryLoop {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let (frames, winding) = match &self.frames {
            LoopFrames::Sampled(f) => (Some(f.clone()), None),
            LoopFrames::Winding(b) => (None, Some(b.clone())),
        };
        LoopWire { grid: self.grid, closed: self.closed, frames, winding }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for UnitaryLoop {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let w = LoopWire::deserialize(d)?;
        let out = match (w.frames, w.winding) {
            (Some(f), None) => {
                let l = UnitaryLoop::sampled(f, w.closed).map_err(serde::de::Error::custom)?;
                if l.grid != w.grid {
                    return Err(serde::de::Error::custom("grid does not match the number of frames"));
                }
                l
            }
            (None, Some(b)) => UnitaryLoop::winding(b, w.grid).map_err(serde::de::Error::custom)?,
            _ => return Err(serde::de::Error::custom("exactly one of frames, winding is required")),
        };
        Ok(out)
    }
}

/// Frames on `[0,1]` at `t_k = k/time_grid`, optionally with a twist `u₀`, `end = u₀·start·u₀*`.
#[derive(Clone, Debug, PartialEq)]
pub struct UnitaryPath {
    frames: Vec<UnitarySample>,
    twist: Option<UnitarySample>,
}

impl UnitaryPath {
    pub fn new(frames: Vec<UnitarySample>) -> Result<Self, UnitaryError> {
        if frames.len() < 2 {
            return Err(UnitaryError::TooShort);
        }
        let n = frames[0].dim();
        if let Some(f) = frames.iter().find(|f| f.dim() != n) {
            return Err(UnitaryError::DimMismatch(n, f.dim()));
        }
        Ok(UnitaryPath { frames, twist: None })
    }

    /// Samples `f(k/grid)` for `k = 0..=grid`.
    pub fn from_fn(grid: usize, dim: usize, f: impl Fn(f64) -> CMatrix) -> Result<Self, UnitaryError> {
        let frames = (0..=grid)
            .map(|k| {
                let m = f(k as f64 / grid as f64);
                if m.nrows() != dim {
                    return Err(UnitaryError::DimMismatch(dim, m.nrows()));
                }
                UnitarySample::new(m)
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(frames)
    }

    pub fn with_twist(mut self, u0: UnitarySample, tol: f64) -> Result<Self, UnitaryError> {
        let expect = u0.conjugate(self.start())?;
        let d = (self.end().matrix() - expect.matrix()).norm();
        if d > tol {
            return Err(UnitaryError::TwistMismatch(d));
        }
        self.twist = Some(u0);
        Ok(self)
    }

    pub fn time_grid(&self) -> usize {
        self.frames.len() - 1
    }

    pub fn dim(&self) -> usize {
        self.frames[0].dim()
    }

    pub fn frames(&self) -> &[UnitarySample] {
        &self.frames
    }

    pub fn start(&self) -> &UnitarySample {
        &self.frames[0]
    }

    pub fn end(&self) -> &UnitarySample {
        self.frames.last().unwrap()
    }

    pub fn twist(&self) -> Option<&UnitarySample> {
        self.twist.as_ref()
    }

    /// `max_k |F_{k+1} − F_k|_F`.
    pub fn max_step(&self) -> f64 {
        self.frames.windows(2).map(|w| (w[1].matrix() - w[0].matrix()).norm()).fold(0.0, f64::max)
    }

    pub fn adjoint(&self) -> Self {
        UnitaryPath { frames: self.frames.iter().map(UnitarySample::adjoint).collect(), twist: self.twist.clone() }
    }

    /// Runs `self` then `other`, which must start where `self` ends.
    pub fn concat(&self, other: &Self, tol: f64) -> Result<Self, UnitaryError> {
        if self.dim() != other.dim() {
            return Err(UnitaryError::DimMismatch(self.dim(), other.dim()));
        }
        let gap = (self.end().matrix() - other.start().matrix()).norm();
        if gap > tol {
            return Err(UnitaryError::TwistMismatch(gap));
        }
        let mut frames = self.frames.clone();
        frames.extend(other.frames[1..].iter().cloned());
        Ok(UnitaryPath { frames, twist: None })
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PathWire {
    time_grid: usize,
    frames: Vec<UnitarySample>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    twist: Option<UnitarySample>,
}

impl Serialize for UnitaryPath {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        PathWire { time_grid: self.time_grid(), frames: self.frames.clone(), twist: self.twist.clone() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for UnitaryPath {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let w = PathWire::deserialize(d)?;
        if w.frames.len() != w.time_grid + 1 {
            return Err(serde::de::Error::custom("time_grid + 1 frames expected"));
        }
        let p = UnitaryPath::new(w.frames).map_err(serde::de::Error::custom)?;
        match w.twist {
            Some(u0) => p.with_twist(u0, 1e-8).map_err(serde::de::Error::custom),
            None => Ok(p),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_unitaries_are_unitary_and_seeded() {
        let a = UnitarySample::random_seeded(7, 3);
        assert!(unitarity_defect(a.matrix()) < 1e-12);
        assert_eq!(a, UnitarySample::random_seeded(7, 3));
        assert_ne!(a, UnitarySample::random_seeded(7, 4));
    }

    #[test]
    fn sparse_product_matches_dense() {
        let b = [WindingBlock::new(5, 1, 1).unwrap(), WindingBlock::new(3, -1, -1).unwrap()];
        let z = winding_z(&b, 0.3);
        let r = UnitarySample::random_seeded(8, 1);
        assert!((mul(z.matrix(), r.matrix()) - z.matrix() * r.matrix()).norm() < 1e-13);
        assert!(unitarity_defect(z.matrix()) < 1e-14);
    }

    #[test]
    fn json_round_trip_and_rejection() {
        let u = UnitarySample::random_seeded(3, 9);
        let s = serde_json::to_string(&u).unwrap();
        let back: UnitarySample = serde_json::from_str(&s).unwrap();
        assert!((back.matrix() - u.matrix()).norm() < 1e-15);
        assert!(serde_json::from_str::<UnitarySample>(r#"{"dim":1,"entries":[[[2.0,0.0]]]}"#).is_err());
        assert!(serde_json::from_str::<WindingBlock>(r#"{"M":8,"N":1,"L":1,"x":0}"#).is_err());
        let l = UnitaryLoop::winding(vec![WindingBlock::new(4, 1, 1).unwrap()], 16).unwrap();
        let back: UnitaryLoop = serde_json::from_str(&serde_json::to_string(&l).unwrap()).unwrap();
        assert_eq!(back, l);
    }

    #[test]
    fn block_validation() {
        assert!(WindingBlock::new(1, 0, 1).is_err());
        assert!(WindingBlock::new(4, 5, 1).is_err());
        assert!(WindingBlock::new(4, 1, 0).is_err());
    }
}
