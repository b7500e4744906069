//! Short exact sequences `0 → G0 → E → G1 → 0` of finitely generated abelian groups.

use num_integer::Integer;
use num_traits::Zero;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::group::{FGAbelianGroup, GroupHom};
use super::matrix::{Int, IntMatrix};
use super::snf::solve_linear;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ExactnessError {
    #[error("iota is not injective")]
    NotInjective,
    #[error("q is not surjective")]
    NotSurjective,
    #[error("q o iota is not zero")]
    CompositeNonzero,
    #[error("kernel of q is not contained in the image of iota")]
    KernelNotImage,
    #[error("map groups do not match the declared G0, E, G1")]
    GroupMismatch,
}

#[derive(Clone, Debug)]
pub struct ExtensionPresentation {
    pub g0: FGAbelianGroup,
    pub e: FGAbelianGroup,
    pub g1: FGAbelianGroup,
    pub iota: GroupHom,
    pub q: GroupHom,
}

impl ExtensionPresentation {
    /// Builds and verifies exactness.
    pub fn new(iota: GroupHom, q: GroupHom) -> Result<Self, ExactnessError> {
        if iota.target != q.source {
            return Err(ExactnessError::GroupMismatch);
        }
        let ext = ExtensionPresentation {
            g0: iota.source.clone(),
            e: iota.target.clone(),
            g1: q.target.clone(),
            iota,
            q,
        };
        ext.check_exact()?;
        Ok(ext)
    }

    pub(crate) fn new_unchecked(iota: GroupHom, q: GroupHom) -> Self {
        ExtensionPresentation { g0: iota.source.clone(), e: iota.target.clone(), g1: q.target.clone(), iota, q }
    }

    pub fn check_exact(&self) -> Result<(), ExactnessError> {
        if self.iota.source != self.g0 || self.iota.target != self.e || self.q.source != self.e || self.q.target != self.g1
        {
            return Err(ExactnessError::GroupMismatch);
        }
        if !self.iota.is_injective() {
            return Err(ExactnessError::NotInjective);
        }
        if !self.q.is_surjective() {
            return Err(ExactnessError::NotSurjective);
        }
        if !self.q.compose_after(&self.iota).is_zero() {
            return Err(ExactnessError::CompositeNonzero);
        }
        for k in self.q.kernel_generators() {
            if self.iota.preimage(&k).is_none() {
                return Err(ExactnessError::KernelNotImage);
            }
        }
        Ok(())
    }

    /// The extension `E = ℤ^{g0 ⊕ c1} / ⟨[M0 | 0], [-c_j | a_j e_j]⟩` where `c1` counts
    /// the canonical generators of `G1` and `a_j` their orders. `cocycle[j]` must be
    /// given exactly on the torsion coordinates.
    pub fn from_cocycle(g0: &FGAbelianGroup, g1: &FGAbelianGroup, cocycle: &[Option<Vec<Int>>]) -> Self {
        let n0 = g0.ngens();
        let orders = g1.canonical_orders();
        let c1 = orders.len();
        let m0 = g0.presentation();
        let mut rows: Vec<Vec<Int>> = Vec::new();
        for i in 0..m0.rows() {
            let mut r = m0.row(i);
            r.resize(n0 + c1, Int::zero());
            rows.push(r);
        }
        for (j, aj) in orders.iter().enumerate() {
            if aj.is_zero() {
                continue;
            }
            let c = cocycle[j].as_ref().expect("cocycle must be given on torsion coordinates");
            let mut r: Vec<Int> = c.iter().map(|x| -x).collect();
            r.resize(n0 + c1, Int::zero());
            r[n0 + j] = aj.clone();
            rows.push(r);
        }
        let mut pres = IntMatrix::zeros(rows.len(), n0 + c1);
        for (i, r) in rows.iter().enumerate() {
            for (j, x) in r.iter().enumerate() {
                pres[(i, j)] = x.clone();
            }
        }
        let e = FGAbelianGroup::new(pres);
        let iota_m = IntMatrix::identity(n0).vstack(&IntMatrix::zeros(c1, n0));
        let q_m = IntMatrix::zeros(g1.ngens(), n0).hstack(g1.from_canon());
        let iota = GroupHom::new_unchecked(g0.clone(), e.clone(), iota_m);
        let q = GroupHom::new_unchecked(e, g1.clone(), q_m);
        ExtensionPresentation::new_unchecked(iota, q)
    }

    /// The split extension `G0 ⊕ G1`.
    pub fn split(g0: &FGAbelianGroup, g1: &FGAbelianGroup) -> Self {
        let e = g0.direct_sum(g1);
        let (n0, n1) = (g0.ngens(), g1.ngens());
        let iota = GroupHom::new_unchecked(
            g0.clone(),
            e.clone(),
            IntMatrix::identity(n0).vstack(&IntMatrix::zeros(n1, n0)),
        );
        let q = GroupHom::new_unchecked(e, g1.clone(), IntMatrix::zeros(n1, n0).hstack(&IntMatrix::identity(n1)));
        ExtensionPresentation::new_unchecked(iota, q)
    }

    /// A lift in `E` of the `j`-th canonical generator of `G1`.
    pub fn lift_canonical(&self, j: usize) -> Vec<Int> {
        self.q.preimage(&self.g1.canonical_generator(j)).expect("q is surjective")
    }

    /// Lifts `x_j` of all canonical generators of `G1` (generator coordinates of `E`).
    pub fn canonical_lifts(&self) -> Vec<Vec<Int>> {
        (0..self.g1.canonical_orders().len()).map(|j| self.lift_canonical(j)).collect()
    }

    /// For lifts `x_j`, the elements `c_j ∈ G0` with `ι(c_j) = a_j·x_j` on torsion coordinates.
    pub fn cocycle_for_lifts(&self, lifts: &[Vec<Int>]) -> Vec<Option<Vec<Int>>> {
        self.g1
            .canonical_orders()
            .iter()
            .zip(lifts)
            .map(|(aj, x)| {
                if aj.is_zero() {
                    return None;
                }
                let ax: Vec<Int> = x.iter().map(|v| v * aj).collect();
                Some(self.iota.preimage(&ax).expect("a_j x_j lies in ker q = im iota"))
            })
            .collect()
    }

    /// Cocycle of the canonical lifts.
    pub fn cocycle(&self) -> Vec<Option<Vec<Int>>> {
        self.cocycle_for_lifts(&self.canonical_lifts())
    }

    /// Exact splitting test: the class in `Ext(G1, G0)` vanishes.
    pub fn is_split(&self) -> bool {
        let ext = super::homext::ext_group(&self.g1, &self.g0);
        ext.class_of(self).iter().all(Zero::is_zero)
    }

    /// A section `s: G1 → E` with `q∘s = id`, if the sequence splits.
    pub fn section(&self) -> Option<GroupHom> {
        let lifts = self.adjusted_lifts_to_zero_cocycle()?;
        // s on canonical generators is x_j; on original generators go through to_canon
        let c1 = lifts.len();
        let x = IntMatrix::from_columns(self.e.ngens(), &lifts);
        let m = if c1 == 0 { IntMatrix::zeros(self.e.ngens(), self.g1.ngens()) } else { x.mul(self.g1.to_canon()) };
        GroupHom::new(self.g1.clone(), self.e.clone(), m).ok()
    }

    /// Lifts whose cocycle is zero, obtained by shifting each `x_j` by `ι(g_j)`.
    fn adjusted_lifts_to_zero_cocycle(&self) -> Option<Vec<Vec<Int>>> {
        let mut lifts = self.canonical_lifts();
        let cocycle = self.cocycle_for_lifts(&lifts);
        let b = self.g0.canonical_orders();
        for (j, c) in cocycle.iter().enumerate() {
            let Some(c) = c else { continue };
            let aj = &self.g1.canonical_orders()[j];
            let canon = self.g0.to_canon().mul_vec(c);
            // need a_j·g ≡ c (mod b) coordinatewise
            let mut g = Vec::with_capacity(canon.len());
            for (ci, bi) in canon.iter().zip(b) {
                g.push(solve_congruence(aj, ci, bi)?);
            }
            let shift = self.iota.apply(&self.g0.from_canon().mul_vec(&g));
            for (xi, si) in lifts[j].iter_mut().zip(&shift) {
                *xi -= si;
            }
        }
        Some(lifts)
    }
}

/// Some `g` with `a·g ≡ c (mod b)` (`b = 0` means equality over ℤ).
pub(crate) fn solve_congruence(a: &Int, c: &Int, b: &Int) -> Option<Int> {
    let m = IntMatrix::from_vec(1, 2, vec![a.clone(), b.clone()]);
    let sol = solve_linear(&m, std::slice::from_ref(c))?;
    let g = sol[0].clone();
    Some(if b.is_zero() { g } else { g.mod_floor(b) })
}

/// Serialized as the three groups plus the matrices of `ι` and `q`.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ExtensionWire {
    g0: FGAbelianGroup,
    e: FGAbelianGroup,
    g1: FGAbelianGroup,
    iota: IntMatrix,
    q: IntMatrix,
}

impl Serialize for ExtensionPresentation {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        ExtensionWire {
            g0: self.g0.clone(),
            e: self.e.clone(),
            g1: self.g1.clone(),
            iota: self.iota.matrix.clone(),
            q: self.q.matrix.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for ExtensionPresentation {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let w = ExtensionWire::deserialize(d)?;
        let iota = GroupHom::new(w.g0, w.e.clone(), w.iota).map_err(D::Error::custom)?;
        let q = GroupHom::new(w.e, w.g1, w.q).map_err(D::Error::custom)?;
        ExtensionPresentation::new(iota, q).map_err(D::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zmod::homext::ext_group;
    use crate::zmod::matrix::ints;

    #[test]
    fn cocycle_extensions_are_exact() {
        let g0 = FGAbelianGroup::free(1);
        let g1 = FGAbelianGroup::cyclic(2);
        let ext = ext_group(&g1, &g0);
        let e = &ext.representatives[0];
        e.check_exact().unwrap();
        assert_eq!(e.e.describe(), "Z");
        assert!(!e.is_split());
        assert!(e.section().is_none());
        let s = ExtensionPresentation::split(&g0, &g1);
        s.check_exact().unwrap();
        assert!(s.is_split());
        let sec = s.section().unwrap();
        assert!(s.q.compose_after(&sec).equals(&GroupHom::identity(&g1)));
    }

    #[test]
    fn class_round_trip() {
        let g0 = FGAbelianGroup::new(IntMatrix::from_rows(&[[4, 0], [0, 0]]));
        let g1 = FGAbelianGroup::new(IntMatrix::from_rows(&[[6, 0], [0, 2]]));
        let ext = ext_group(&g1, &g0);
        assert_eq!(ext.summands.len(), 4);
        for a in 0..2 {
            for b in 0..2 {
                let coords: Vec<Int> = ints(&[a, b, 1, 0][..ext.summands.len()]);
                let e = ext.extension_for(&coords);
                e.check_exact().unwrap();
                assert!(ext.group.elements_equal(&ext.class_of(&e), &coords));
            }
        }
    }
}
