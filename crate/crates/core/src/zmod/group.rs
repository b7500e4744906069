//! Finitely generated abelian groups given by presentations, and homomorphisms between them.

use std::fmt;

use num_integer::Integer;
use num_traits::{One, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::matrix::{is_zero_vec, Int, IntMatrix};
use super::snf::{integer_kernel, smith_decomposition, solve_linear};

/// `ℤ^n / rowspace(M)` for a relation matrix `M` with `n` columns.
///
/// The Smith decomposition of `M` supplies canonical coordinates: `to_canon`
/// maps generator coordinates to a vector in `⊕ ℤ/d_i` (order `0` means a free
/// coordinate) and `from_canon` maps back. Coordinates with `d_i = 1` are dropped.
#[derive(Clone)]
pub struct FGAbelianGroup {
    presentation: IntMatrix,
    orders: Vec<Int>,
    to_canon: IntMatrix,
    from_canon: IntMatrix,
}

impl PartialEq for FGAbelianGroup {
    fn eq(&self, other: &Self) -> bool {
        self.presentation == other.presentation
    }
}

impl Eq for FGAbelianGroup {}

impl fmt::Debug for FGAbelianGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FGAbelianGroup({})", self.describe())
    }
}

impl FGAbelianGroup {
    pub fn new(presentation: IntMatrix) -> Self {
        let n = presentation.cols();
        let d = smith_decomposition(&presentation);
        let diag = d.diagonal();
        let qt = d.q.transpose();
        let qinv_t = d.q_inv.transpose();
        let mut keep = Vec::new();
        let mut orders = Vec::new();
        for i in 0..n {
            let di = diag.get(i).cloned().unwrap_or_else(Int::zero);
            if !di.is_one() {
                keep.push(i);
                orders.push(di);
            }
        }
        let to_canon = IntMatrix::from_vec(keep.len(), n, keep.iter().flat_map(|&i| qt.row(i)).collect());
        let from_canon = IntMatrix::from_columns(n, &keep.iter().map(|&i| qinv_t.column(i)).collect::<Vec<_>>());
        FGAbelianGroup { presentation, orders, to_canon, from_canon }
    }

    /// `ℤ^rank`.
    pub fn free(rank: usize) -> Self {
        Self::new(IntMatrix::zeros(0, rank))
    }

    /// `⊕ ℤ/d_i` with one generator per entry; `d_i = 0` gives a copy of ℤ.
    pub fn cyclic_sum(orders: &[Int]) -> Self {
        let n = orders.len();
        let rows: Vec<usize> = (0..n).filter(|&i| !orders[i].is_zero()).collect();
        let mut m = IntMatrix::zeros(rows.len(), n);
        for (r, &i) in rows.iter().enumerate() {
            m[(r, i)] = orders[i].clone();
        }
        Self::new(m)
    }

    pub fn cyclic(order: i64) -> Self {
        Self::cyclic_sum(&[Int::from(order)])
    }

    pub fn presentation(&self) -> &IntMatrix {
        &self.presentation
    }

    /// Number of generators.
    pub fn ngens(&self) -> usize {
        self.presentation.cols()
    }

    /// Orders of the canonical coordinates (`0` = free).
    pub fn canonical_orders(&self) -> &[Int] {
        &self.orders
    }

    pub fn to_canon(&self) -> &IntMatrix {
        &self.to_canon
    }

    pub fn from_canon(&self) -> &IntMatrix {
        &self.from_canon
    }

    /// Torsion invariant factors `d_1 | d_2 | … ` (all ≥ 2).
    pub fn invariant_factors(&self) -> Vec<Int> {
        self.orders.iter().filter(|d| !d.is_zero()).cloned().collect()
    }

    pub fn free_rank(&self) -> usize {
        self.orders.iter().filter(|d| d.is_zero()).count()
    }

    pub fn is_trivial(&self) -> bool {
        self.orders.is_empty()
    }

    /// Isomorphism of abstract groups, by normal forms.
    pub fn is_isomorphic(&self, other: &FGAbelianGroup) -> bool {
        self.invariant_factors() == other.invariant_factors() && self.free_rank() == other.free_rank()
    }

    /// Order of the group, `None` if infinite.
    pub fn order(&self) -> Option<Int> {
        if self.free_rank() > 0 {
            None
        } else {
            Some(self.orders.iter().fold(Int::one(), |a, d| a * d))
        }
    }

    /// Canonical coordinates of `x`, reduced into `[0, d_i)` on torsion coordinates.
    pub fn canonical(&self, x: &[Int]) -> Vec<Int> {
        let mut c = self.to_canon.mul_vec(x);
        for (ci, d) in c.iter_mut().zip(&self.orders) {
            if !d.is_zero() {
                *ci = ci.mod_floor(d);
            }
        }
        c
    }

    /// Reduced representative in generator coordinates.
    pub fn reduce(&self, x: &[Int]) -> Vec<Int> {
        self.from_canon.mul_vec(&self.canonical(x))
    }

    pub fn is_zero_element(&self, x: &[Int]) -> bool {
        is_zero_vec(&self.canonical(x))
    }

    pub fn elements_equal(&self, x: &[Int], y: &[Int]) -> bool {
        let d: Vec<Int> = x.iter().zip(y).map(|(a, b)| a - b).collect();
        self.is_zero_element(&d)
    }

    /// Generator coordinates of the `i`-th canonical generator.
    pub fn canonical_generator(&self, i: usize) -> Vec<Int> {
        self.from_canon.column(i)
    }

    pub fn unit_vector(&self, i: usize) -> Vec<Int> {
        let mut v = vec![Int::zero(); self.ngens()];
        v[i] = Int::one();
        v
    }

    /// Compact textual form such as `Z^2 + Z/2 + Z/6`.
    pub fn describe(&self) -> String {
        let mut parts = Vec::new();
        let r = self.free_rank();
        if r == 1 {
            parts.push("Z".to_string());
        } else if r > 1 {
            parts.push(format!("Z^{r}"));
        }
        for d in self.invariant_factors() {
            parts.push(format!("Z/{d}"));
        }
        if parts.is_empty() {
            "0".to_string()
        } else {
            parts.join(" + ")
        }
    }

    /// Direct sum with generators of `self` first.
    pub fn direct_sum(&self, other: &FGAbelianGroup) -> FGAbelianGroup {
        FGAbelianGroup::new(self.presentation.block_diag(&other.presentation))
    }

    /// Subgroup generated by the columns of `gens` (generator coordinates of `self`),
    /// presented on those columns. Additional `kill` vectors (elements of the subgroup)
    /// are set to zero in the result. Returns `None` if a kill vector is not in the subgroup.
    pub fn subgroup_quotient(&self, gens: &IntMatrix, kill: &[Vec<Int>]) -> Option<FGAbelianGroup> {
        let m = gens.cols();
        let aug = gens.hstack(&self.presentation.transpose());
        let ker = integer_kernel(&aug);
        let mut rows: Vec<Vec<Int>> = ker.column_vectors().into_iter().map(|v| v[..m].to_vec()).collect();
        for k in kill {
            let sol = solve_linear(&aug, k)?;
            rows.push(sol[..m].to_vec());
        }
        rows.retain(|r| !is_zero_vec(r));
        let mut pres = IntMatrix::zeros(rows.len(), m);
        for (i, r) in rows.iter().enumerate() {
            for (j, x) in r.iter().enumerate() {
                pres[(i, j)] = x.clone();
            }
        }
        Some(FGAbelianGroup::new(pres))
    }

    /// Coordinates `t` with `gens·t ≡ x` in `self`, if `x` lies in the subgroup generated by `gens`.
    pub fn express_in(&self, gens: &IntMatrix, x: &[Int]) -> Option<Vec<Int>> {
        let aug = gens.hstack(&self.presentation.transpose());
        solve_linear(&aug, x).map(|s| s[..gens.cols()].to_vec())
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GroupWire {
    presentation: IntMatrix,
}

impl Serialize for FGAbelianGroup {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        GroupWire { presentation: self.presentation.clone() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for FGAbelianGroup {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let w = GroupWire::deserialize(d)?;
        Ok(FGAbelianGroup::new(w.presentation))
    }
}

/// Homomorphism given on generators: column `j` is the image of generator `j`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GroupHom {
    pub source: FGAbelianGroup,
    pub target: FGAbelianGroup,
    pub matrix: IntMatrix,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum HomError {
    #[error("matrix is {0}x{1}, expected {2}x{3}")]
    Shape(usize, usize, usize, usize),
    #[error("relation {0} of the source does not map to zero")]
    NotWellDefined(usize),
}

impl GroupHom {
    pub fn new(source: FGAbelianGroup, target: FGAbelianGroup, matrix: IntMatrix) -> Result<Self, HomError> {
        if matrix.rows() != target.ngens() || matrix.cols() != source.ngens() {
            return Err(HomError::Shape(matrix.rows(), matrix.cols(), target.ngens(), source.ngens()));
        }
        for i in 0..source.presentation().rows() {
            let img = matrix.mul_vec(&source.presentation().row(i));
            if !target.is_zero_element(&img) {
                return Err(HomError::NotWellDefined(i));
            }
        }
        Ok(GroupHom { source, target, matrix })
    }

    /// Skips the well-definedness check; for maps correct by construction.
    pub(crate) fn new_unchecked(source: FGAbelianGroup, target: FGAbelianGroup, matrix: IntMatrix) -> Self {
        debug_assert_eq!((matrix.rows(), matrix.cols()), (target.ngens(), source.ngens()));
        GroupHom { source, target, matrix }
    }

    pub fn identity(g: &FGAbelianGroup) -> Self {
        GroupHom::new_unchecked(g.clone(), g.clone(), IntMatrix::identity(g.ngens()))
    }

    pub fn zero(source: &FGAbelianGroup, target: &FGAbelianGroup) -> Self {
        GroupHom::new_unchecked(source.clone(), target.clone(), IntMatrix::zeros(target.ngens(), source.ngens()))
    }

    pub fn apply(&self, x: &[Int]) -> Vec<Int> {
        self.matrix.mul_vec(x)
    }

    /// `self ∘ first`
    pub fn compose_after(&self, first: &GroupHom) -> GroupHom {
        GroupHom::new_unchecked(first.source.clone(), self.target.clone(), self.matrix.mul(&first.matrix))
    }

    /// Some `x` with `self(x) = y` in the target.
    pub fn preimage(&self, y: &[Int]) -> Option<Vec<Int>> {
        self.target.express_in(&self.matrix, y)
    }

    /// Generators of the kernel, in source generator coordinates.
    pub fn kernel_generators(&self) -> Vec<Vec<Int>> {
        let n = self.source.ngens();
        let aug = self.matrix.hstack(&self.target.presentation().transpose());
        integer_kernel(&aug).column_vectors().into_iter().map(|v| v[..n].to_vec()).collect()
    }

    pub fn is_injective(&self) -> bool {
        self.kernel_generators().iter().all(|k| self.source.is_zero_element(k))
    }

    pub fn is_surjective(&self) -> bool {
        (0..self.target.ngens()).all(|i| self.preimage(&self.target.unit_vector(i)).is_some())
    }

    pub fn is_zero(&self) -> bool {
        (0..self.source.ngens()).all(|j| self.target.is_zero_element(&self.matrix.column(j)))
    }

    /// Equality as maps of groups.
    pub fn equals(&self, other: &GroupHom) -> bool {
        self.source == other.source
            && self.target == other.target
            && (0..self.source.ngens())
                .all(|j| self.target.elements_equal(&self.matrix.column(j), &other.matrix.column(j)))
    }

    /// Matrix between canonical coordinates, reduced modulo target orders.
    pub fn canonical_matrix(&self) -> IntMatrix {
        let m = self.target.to_canon().mul(&self.matrix).mul(self.source.from_canon());
        let orders = self.target.canonical_orders();
        let mut out = m.clone();
        for i in 0..m.rows() {
            if !orders[i].is_zero() {
                for j in 0..m.cols() {
                    out[(i, j)] = m[(i, j)].mod_floor(&orders[i]);
                }
            }
        }
        out
    }

    /// Isomorphism of groups: surjective between isomorphic finitely generated groups.
    pub fn is_isomorphism(&self) -> bool {
        self.source.is_isomorphic(&self.target) && self.is_surjective()
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GroupHomWire {
    source: FGAbelianGroup,
    target: FGAbelianGroup,
    matrix: IntMatrix,
}

impl<'de> Deserialize<'de> for GroupHom {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let w = GroupHomWire::deserialize(d)?;
        GroupHom::new(w.source, w.target, w.matrix).map_err(D::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zmod::matrix::{int, ints};

    #[test]
    fn normal_form_of_small_presentations() {
        let g = FGAbelianGroup::new(IntMatrix::from_rows(&[[2, 0, 0], [0, 3, 0]]));
        assert_eq!(g.invariant_factors(), ints(&[6]));
        assert_eq!(g.free_rank(), 1);
        assert_eq!(g.describe(), "Z + Z/6");
        assert!(FGAbelianGroup::cyclic(1).is_trivial());
    }

    #[test]
    fn canonical_round_trip() {
        let g = FGAbelianGroup::new(IntMatrix::from_rows(&[[4, 6], [2, 8]]));
        for a in -5..5 {
            for b in -5..5 {
                let x = ints(&[a, b]);
                assert!(g.elements_equal(&g.reduce(&x), &x));
            }
        }
        assert_eq!(g.order(), Some(int(20)));
    }

    #[test]
    fn hom_checks() {
        let z4 = FGAbelianGroup::cyclic(4);
        let z2 = FGAbelianGroup::cyclic(2);
        assert!(GroupHom::new(z4.clone(), z2.clone(), IntMatrix::from_rows(&[[1]])).is_ok());
        assert!(GroupHom::new(z2.clone(), z4.clone(), IntMatrix::from_rows(&[[1]])).is_err());
        let f = GroupHom::new(z2.clone(), z4.clone(), IntMatrix::from_rows(&[[2]])).unwrap();
        assert!(f.is_injective());
        assert!(!f.is_surjective());
        assert_eq!(f.kernel_generators().len(), 1);
    }

    #[test]
    fn subgroup_of_free_group() {
        let z2 = FGAbelianGroup::free(2);
        let gens = IntMatrix::from_rows(&[[2, 0, 2], [0, 2, 2]]);
        let h = z2.subgroup_quotient(&gens, &[]).unwrap();
        assert_eq!(h.free_rank(), 2);
        assert!(h.invariant_factors().is_empty());
        let q = z2.subgroup_quotient(&gens, &[ints(&[4, 0])]).unwrap();
        assert_eq!(q.describe(), "Z + Z/2");
    }
}
