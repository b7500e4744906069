//! Smith normal form with unimodular transforms, integer solving and integer kernels.

use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::matrix::{Int, IntMatrix, Rat};

/// `P·A·Q = S` with `P`, `Q` unimodular and `S` diagonal, `d_i | d_{i+1}`, `d_i ≥ 0`.
#[derive(Clone, Debug)]
pub struct SmithDecomposition {
    pub s: IntMatrix,
    pub p: IntMatrix,
    pub p_inv: IntMatrix,
    pub q: IntMatrix,
    pub q_inv: IntMatrix,
    pub rank: usize,
}

impl SmithDecomposition {
    /// Diagonal entries `d_0, …, d_{min(r,c)-1}`.
    pub fn diagonal(&self) -> Vec<Int> {
        (0..self.s.rows().min(self.s.cols())).map(|i| self.s[(i, i)].clone()).collect()
    }

    /// `U = P⁻¹`, so that `A = U·S·V`.
    pub fn u(&self) -> &IntMatrix {
        &self.p_inv
    }

    /// `V = Q⁻¹`, so that `A = U·S·V`.
    pub fn v(&self) -> &IntMatrix {
        &self.q_inv
    }
}

struct Work {
    s: IntMatrix,
    p: IntMatrix,
    p_inv: IntMatrix,
    q: IntMatrix,
    q_inv: IntMatrix,
}

impl Work {
    // row[i] += c * row[t]
    fn row_add(&mut self, i: usize, t: usize, c: &Int) {
        self.s.add_row_multiple(i, t, c);
        self.p.add_row_multiple(i, t, c);
        self.p_inv.add_col_multiple(t, i, &-c);
    }

    fn row_swap(&mut self, a: usize, b: usize) {
        self.s.swap_rows(a, b);
        self.p.swap_rows(a, b);
        self.p_inv.swap_cols(a, b);
    }

    fn row_negate(&mut self, i: usize) {
        self.s.negate_row(i);
        self.p.negate_row(i);
        self.p_inv.negate_col(i);
    }

    // col[j] += c * col[t]
    fn col_add(&mut self, j: usize, t: usize, c: &Int) {
        self.s.add_col_multiple(j, t, c);
        self.q.add_col_multiple(j, t, c);
        self.q_inv.add_row_multiple(t, j, &-c);
    }

    fn col_swap(&mut self, a: usize, b: usize) {
        self.s.swap_cols(a, b);
        self.q.swap_cols(a, b);
        self.q_inv.swap_rows(a, b);
    }
}

/// Smith normal form of `a` with both transforms and their inverses.
pub fn smith_decomposition(a: &IntMatrix) -> SmithDecomposition {
    let (r, c) = (a.rows(), a.cols());
    let mut w = Work {
        s: a.clone(),
        p: IntMatrix::identity(r),
        p_inv: IntMatrix::identity(r),
        q: IntMatrix::identity(c),
        q_inv: IntMatrix::identity(c),
    };
    let mut t = 0;
    while t < r.min(c) {
        // smallest nonzero entry of the trailing block becomes the pivot
        let mut best: Option<(usize, usize)> = None;
        for i in t..r {
            for j in t..c {
                let x = &w.s[(i, j)];
                if !x.is_zero() && best.is_none_or(|(bi, bj)| x.abs() < w.s[(bi, bj)].abs()) {
                    best = Some((i, j));
                }
            }
        }
        let Some((pi, pj)) = best else { break };
        w.row_swap(t, pi);
        w.col_swap(t, pj);

        let mut clean = true;
        for i in t + 1..r {
            if w.s[(i, t)].is_zero() {
                continue;
            }
            let f = w.s[(i, t)].div_floor(&w.s[(t, t)]);
            w.row_add(i, t, &-f);
            if !w.s[(i, t)].is_zero() {
                clean = false;
            }
        }
        for j in t + 1..c {
            if w.s[(t, j)].is_zero() {
                continue;
            }
            let f = w.s[(t, j)].div_floor(&w.s[(t, t)]);
            w.col_add(j, t, &-f);
            if !w.s[(t, j)].is_zero() {
                clean = false;
            }
        }
        if !clean {
            continue;
        }
        // pivot must divide the whole trailing block
        let offender = (t + 1..r).find(|&i| (t + 1..c).any(|j| !w.s[(i, j)].is_multiple_of(&w.s[(t, t)])));
        if let Some(i) = offender {
            w.row_add(t, i, &Int::one());
            continue;
        }
        if w.s[(t, t)].is_negative() {
            w.row_negate(t);
        }
        t += 1;
    }
    SmithDecomposition { s: w.s, p: w.p, p_inv: w.p_inv, q: w.q, q_inv: w.q_inv, rank: t }
}

/// Returns `(U, S, V)` with `A = U·S·V`.
pub fn smith_normal_form(a: &IntMatrix) -> (IntMatrix, IntMatrix, IntMatrix) {
    let d = smith_decomposition(a);
    (d.p_inv, d.s, d.q_inv)
}

/// Invariant factors of `a` (diagonal of `S`, length `min(rows, cols)`).
pub fn invariant_factors(a: &IntMatrix) -> Vec<Int> {
    smith_decomposition(a).diagonal()
}

/// Integer solution of `A·x = b`, or `None` when none exists.
pub fn solve_linear(a: &IntMatrix, b: &[Int]) -> Option<Vec<Int>> {
    assert_eq!(a.rows(), b.len(), "right-hand side length mismatch");
    solve_with(&smith_decomposition(a), b)
}

/// Solve using a precomputed decomposition of `A`.
pub fn solve_with(d: &SmithDecomposition, b: &[Int]) -> Option<Vec<Int>> {
    let pb = d.p.mul_vec(b);
    let cols = d.q.rows();
    let mut y = vec![Int::zero(); cols];
    for (i, ci) in pb.iter().enumerate() {
        if i < d.rank {
            let s = &d.s[(i, i)];
            if !ci.is_multiple_of(s) {
                return None;
            }
            y[i] = ci / s;
        } else if !ci.is_zero() {
            return None;
        }
    }
    Some(d.q.mul_vec(&y))
}

/// A rational solution of `A·x = b`, or `None` when none exists over `ℚ`.
pub fn solve_rational(a: &IntMatrix, b: &[Rat]) -> Option<Vec<Rat>> {
    assert_eq!(a.rows(), b.len(), "right-hand side length mismatch");
    let d = smith_decomposition(a);
    let pb: Vec<Rat> = (0..d.p.rows()).map(|i| (0..d.p.cols()).map(|j| Rat::from_integer(d.p[(i, j)].clone()) * &b[j]).sum()).collect();
    let mut y = vec![Rat::zero(); d.q.rows()];
    for (i, ci) in pb.into_iter().enumerate() {
        if i < d.rank {
            y[i] = ci / Rat::from_integer(d.s[(i, i)].clone());
        } else if !ci.is_zero() {
            return None;
        }
    }
    Some((0..d.q.rows()).map(|i| (0..d.q.cols()).map(|j| Rat::from_integer(d.q[(i, j)].clone()) * &y[j]).sum()).collect())
}

/// Basis of `{x ∈ ℤ^cols : A·x = 0}` as the columns of the returned matrix.
pub fn integer_kernel(a: &IntMatrix) -> IntMatrix {
    let d = smith_decomposition(a);
    d.q.submatrix(0, d.q.rows(), d.rank, d.q.cols())
}

/// Rank over ℚ.
pub fn rank(a: &IntMatrix) -> usize {
    smith_decomposition(a).rank
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zmod::matrix::{int, ints};

    #[test]
    fn two_by_two_example() {
        let a = IntMatrix::from_rows(&[[2, 4], [6, 8]]);
        let (u, s, v) = smith_normal_form(&a);
        assert_eq!(s, IntMatrix::diagonal(2, 2, &ints(&[2, 4])));
        assert_eq!(u.mul(&s).mul(&v), a);
    }

    #[test]
    fn identity_and_zero() {
        let (_, s, _) = smith_normal_form(&IntMatrix::identity(3));
        assert_eq!(s, IntMatrix::identity(3));
        let (_, s, _) = smith_normal_form(&IntMatrix::zeros(2, 2));
        assert!(s.is_zero());
    }

    #[test]
    fn solve_examples() {
        assert_eq!(solve_linear(&IntMatrix::from_rows(&[[2]]), &ints(&[4])), Some(ints(&[2])));
        assert_eq!(solve_linear(&IntMatrix::from_rows(&[[2]]), &ints(&[3])), None);
        assert_eq!(solve_linear(&IntMatrix::from_rows(&[[1, 2], [3, 4]]), &ints(&[1, 1])), Some(ints(&[-1, 1])));
    }

    #[test]
    fn kernel_is_annihilated_and_saturated() {
        let a = IntMatrix::from_rows(&[[2, 4, 6], [1, 2, 3]]);
        let k = integer_kernel(&a);
        assert_eq!(k.cols(), 2);
        assert!(a.mul(&k).is_zero());
        // a saturated kernel lattice has trivial torsion in its cokernel
        let f = invariant_factors(&k.transpose());
        assert!(f.iter().all(|d| *d == int(1)));
    }
}
