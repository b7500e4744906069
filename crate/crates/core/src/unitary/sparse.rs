//! Row-compressed complex matrices for permutation-like frames, where dense products
//! would dominate a circle scan.

use num_complex::Complex64;

use super::sample::{CMatrix, WindingBlock};

/// Compressed sparse rows: row `i` holds `cols[ptr[i]..ptr[i+1]]` with matching `vals`.
#[derive(Clone, Debug, PartialEq)]
pub(crate) struct Sparse {
    n: usize,
    ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<Complex64>,
}

impl Sparse {
    /// The nonzero pattern of a square `m`, or `None` when more than a quarter is filled.
    pub(crate) fn from_dense(m: &CMatrix) -> Option<Self> {
        let n = m.nrows();
        let zero = Complex64::new(0.0, 0.0);
        let nnz = m.iter().filter(|x| **x != zero).count();
        if nnz * 4 > n * n {
            return None;
        }
        let mut out = Sparse { n, ptr: Vec::with_capacity(n + 1), cols: Vec::with_capacity(nnz), vals: Vec::with_capacity(nnz) };
        out.ptr.push(0);
        for i in 0..n {
            for j in 0..n {
                if m[(i, j)] != zero {
                    out.cols.push(j);
                    out.vals.push(m[(i, j)]);
                }
            }
            out.ptr.push(out.cols.len());
        }
        Some(out)
    }

    pub(crate) fn dim(&self) -> usize {
        self.n
    }

    fn row(&self, i: usize) -> impl Iterator<Item = (usize, Complex64)> + '_ {
        let r = self.ptr[i]..self.ptr[i + 1];
        self.cols[r.clone()].iter().copied().zip(self.vals[r].iter().copied())
    }

    pub(crate) fn mul(&self, b: &Sparse) -> Sparse {
        let zero = Complex64::new(0.0, 0.0);
        let mut acc = vec![zero; b.n];
        let mut touched = vec![false; b.n];
        let mut out = Sparse { n: self.n, ptr: Vec::with_capacity(self.n + 1), cols: Vec::new(), vals: Vec::new() };
        out.ptr.push(0);
        for i in 0..self.n {
            let start = out.cols.len();
            for (l, x) in self.row(i) {
                for (j, y) in b.row(l) {
                    if !touched[j] {
                        touched[j] = true;
                        out.cols.push(j);
                    }
                    acc[j] += x * y;
                }
            }
            out.cols[start..].sort_unstable();
            for &j in &out.cols[start..] {
                touched[j] = false;
                out.vals.push(std::mem::replace(&mut acc[j], zero));
            }
            out.ptr.push(out.cols.len());
        }
        out
    }

    pub(crate) fn adjoint(&self) -> Sparse {
        let mut count = vec![0usize; self.n + 1];
        for &j in &self.cols {
            count[j + 1] += 1;
        }
        for j in 0..self.n {
            count[j + 1] += count[j];
        }
        let ptr = count.clone();
        let mut cols = vec![0; self.cols.len()];
        let mut vals = vec![Complex64::new(0.0, 0.0); self.vals.len()];
        for i in 0..self.n {
            for (j, x) in self.row(i) {
                cols[count[j]] = i;
                vals[count[j]] = x.conj();
                count[j] += 1;
            }
        }
        Sparse { n: self.n, ptr, cols, vals }
    }

    /// `(i, j, m_ij)` over the stored entries.
    pub(crate) fn entries(&self) -> impl Iterator<Item = (usize, usize, Complex64)> + '_ {
        (0..self.n).flat_map(move |i| self.row(i).map(move |(j, x)| (i, j, x)))
    }

    /// `|M − I|_F`.
    pub(crate) fn distance_to_identity(&self) -> f64 {
        let mut s = 0.0;
        for i in 0..self.n {
            let mut diag = false;
            for (j, x) in self.row(i) {
                if i == j {
                    diag = true;
                    s += (x - 1.0).norm_sqr();
                } else {
                    s += x.norm_sqr();
                }
            }
            if !diag {
                s += 1.0;
            }
        }
        s.sqrt()
    }
}

/// The winding frame `z(t)` built directly in sparse form.
pub(crate) fn winding_z_sparse(blocks: &[WindingBlock], t: f64) -> Sparse {
    let n: usize = blocks.iter().map(|b| b.m).sum();
    let mut out = Sparse { n, ptr: Vec::with_capacity(n + 1), cols: Vec::with_capacity(n), vals: Vec::with_capacity(n) };
    out.ptr.push(0);
    let mut off = 0;
    for b in blocks {
        out.cols.push(off + b.m - 1);
        out.vals.push(Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * b.l as f64 * t));
        out.ptr.push(out.cols.len());
        for i in 1..b.m {
            out.cols.push(off + i - 1);
            out.vals.push(Complex64::new(1.0, 0.0));
            out.ptr.push(out.cols.len());
        }
        off += b.m;
    }
    out
}
