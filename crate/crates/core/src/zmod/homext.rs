//! `Hom` and `Ext` of finitely generated abelian groups with explicit generators.

use num_integer::Integer;
use num_traits::{One, Zero};
use serde::Serialize;

use super::extension::ExtensionPresentation;
use super::group::{FGAbelianGroup, GroupHom};
use super::matrix::{Int, IntMatrix};

/// One cyclic summand `Hom(ℤ/a_j, ℤ/b_i)` of a Hom group: canonical source
/// coordinate `j` goes to `multiplier` times canonical target coordinate `i`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HomSummand {
    pub source_coord: usize,
    pub target_coord: usize,
    pub multiplier: Int,
    pub order: Int,
}

/// `Hom(G, H)` as a group together with a representative map per generator.
#[derive(Clone, Debug)]
pub struct HomGroup {
    pub source: FGAbelianGroup,
    pub target: FGAbelianGroup,
    pub group: FGAbelianGroup,
    pub summands: Vec<HomSummand>,
    pub basis: Vec<GroupHom>,
}

impl HomGroup {
    /// Coordinates of `h` in the generators of `self.group`.
    pub fn coordinates(&self, h: &GroupHom) -> Vec<Int> {
        let c = h.canonical_matrix();
        self.summands
            .iter()
            .map(|s| {
                let x = &c[(s.target_coord, s.source_coord)];
                debug_assert!(x.is_multiple_of(&s.multiplier));
                let v = x / &s.multiplier;
                if s.order.is_zero() {
                    v
                } else {
                    v.mod_floor(&s.order)
                }
            })
            .collect()
    }

    /// `Σ t_k · basis_k`.
    pub fn combination(&self, t: &[Int]) -> GroupHom {
        let mut m = IntMatrix::zeros(self.target.ngens(), self.source.ngens());
        for (tk, b) in t.iter().zip(&self.basis) {
            m = m.add(&b.matrix.scale(tk));
        }
        GroupHom::new_unchecked(self.source.clone(), self.target.clone(), m)
    }
}

/// `Hom(ℤ/a, ℤ/b)` is cyclic of order `gcd(a, b)` generated by `1 ↦ b/gcd`.
/// Returns `(multiplier, order)`, or `None` for the trivial group.
fn hom_cyclic(a: &Int, b: &Int) -> Option<(Int, Int)> {
    if b.is_zero() {
        return if a.is_zero() { Some((Int::one(), Int::zero())) } else { None };
    }
    let g = a.gcd(b);
    if g.is_one() {
        return None;
    }
    Some((b / &g, g))
}

pub fn hom_group(g: &FGAbelianGroup, h: &FGAbelianGroup) -> HomGroup {
    let a = g.canonical_orders();
    let b = h.canonical_orders();
    let mut summands = Vec::new();
    for (j, aj) in a.iter().enumerate() {
        for (i, bi) in b.iter().enumerate() {
            if let Some((multiplier, order)) = hom_cyclic(aj, bi) {
                summands.push(HomSummand { source_coord: j, target_coord: i, multiplier, order });
            }
        }
    }
    let basis = summands
        .iter()
        .map(|s| {
            let mut e = IntMatrix::zeros(b.len(), a.len());
            e[(s.target_coord, s.source_coord)] = s.multiplier.clone();
            let m = h.from_canon().mul(&e).mul(g.to_canon());
            GroupHom::new_unchecked(g.clone(), h.clone(), m)
        })
        .collect();
    let orders: Vec<Int> = summands.iter().map(|s| s.order.clone()).collect();
    HomGroup {
        source: g.clone(),
        target: h.clone(),
        group: FGAbelianGroup::cyclic_sum(&orders),
        summands,
        basis,
    }
}

/// One cyclic summand `Ext(ℤ/a_j, ℤ/b_i) = ℤ/gcd(a_j, b_i)` (with `gcd(a, 0) = a`).
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ExtSummand {
    /// Canonical coordinate of `G1` (a torsion coordinate).
    pub g1_coord: usize,
    /// Canonical coordinate of `G0`.
    pub g0_coord: usize,
    pub order: Int,
}

/// `Ext(G1, G0)` with a representative extension per generator.
#[derive(Clone, Debug)]
pub struct ExtGroup {
    pub g1: FGAbelianGroup,
    pub g0: FGAbelianGroup,
    pub group: FGAbelianGroup,
    pub summands: Vec<ExtSummand>,
    pub representatives: Vec<ExtensionPresentation>,
}

impl ExtGroup {
    /// Class coordinates of an extension of `g1` by `g0` in this group's generators.
    pub fn class_of(&self, ext: &ExtensionPresentation) -> Vec<Int> {
        let cocycle = ext.cocycle();
        self.reduce_cocycle(&cocycle)
    }

    /// Reduce a cocycle (one `G0` element per torsion canonical generator of `G1`,
    /// indexed by canonical coordinate) to class coordinates.
    pub fn reduce_cocycle(&self, cocycle: &[Option<Vec<Int>>]) -> Vec<Int> {
        self.summands
            .iter()
            .map(|s| {
                let c = cocycle[s.g1_coord].as_ref().expect("cocycle missing on a torsion coordinate");
                let canon = self.g0.to_canon().mul_vec(c);
                canon[s.g0_coord].mod_floor(&s.order)
            })
            .collect()
    }

    /// Extension with the given class coordinates.
    pub fn extension_for(&self, coords: &[Int]) -> ExtensionPresentation {
        let a = self.g1.canonical_orders();
        let mut cocycle: Vec<Option<Vec<Int>>> = a
            .iter()
            .map(|aj| if aj.is_zero() { None } else { Some(vec![Int::zero(); self.g0.ngens()]) })
            .collect();
        for (s, t) in self.summands.iter().zip(coords) {
            let e = self.g0.canonical_generator(s.g0_coord);
            let c = cocycle[s.g1_coord].as_mut().expect("torsion coordinate");
            for (ci, ei) in c.iter_mut().zip(&e) {
                *ci += ei * t;
            }
        }
        ExtensionPresentation::from_cocycle(&self.g0, &self.g1, &cocycle)
    }
}

pub fn ext_group(g1: &FGAbelianGroup, g0: &FGAbelianGroup) -> ExtGroup {
    let mut summands = Vec::new();
    for (j, aj) in g1.canonical_orders().iter().enumerate() {
        if aj.is_zero() {
            continue;
        }
        for (i, bi) in g0.canonical_orders().iter().enumerate() {
            let order = if bi.is_zero() { aj.clone() } else { aj.gcd(bi) };
            if !order.is_one() {
                summands.push(ExtSummand { g1_coord: j, g0_coord: i, order });
            }
        }
    }
    let orders: Vec<Int> = summands.iter().map(|s| s.order.clone()).collect();
    let mut ext = ExtGroup {
        g1: g1.clone(),
        g0: g0.clone(),
        group: FGAbelianGroup::cyclic_sum(&orders),
        summands,
        representatives: Vec::new(),
    };
    ext.representatives = (0..ext.summands.len())
        .map(|k| {
            let mut coords = vec![Int::zero(); ext.summands.len()];
            coords[k] = Int::one();
            ext.extension_for(&coords)
        })
        .collect();
    ext
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zmod::matrix::ints;

    fn z(n: i64) -> FGAbelianGroup {
        if n == 0 {
            FGAbelianGroup::free(1)
        } else {
            FGAbelianGroup::cyclic(n)
        }
    }

    /// Count assignments `1 ↦ y ∈ ℤ/n` with `m·y ≡ 0`.
    fn brute_hom_count(m: i64, n: i64) -> i64 {
        (0..n).filter(|y| (m * y) % n == 0).count() as i64
    }

    #[test]
    fn hom_examples() {
        assert_eq!(hom_group(&z(0), &z(4)).group.describe(), "Z/4");
        assert_eq!(hom_group(&z(6), &z(4)).group.describe(), "Z/2");
        assert!(hom_group(&z(2), &z(0)).group.is_trivial());
        assert_eq!(hom_group(&z(0), &z(0)).group.describe(), "Z");
    }

    #[test]
    fn hom_matches_enumeration() {
        for m in 1..=8 {
            for n in 1..=8 {
                let h = hom_group(&z(m), &z(n));
                assert_eq!(h.group.order().unwrap(), Int::from(brute_hom_count(m, n)), "Hom(Z/{m}, Z/{n})");
                for b in &h.basis {
                    assert!(GroupHom::new(b.source.clone(), b.target.clone(), b.matrix.clone()).is_ok());
                }
            }
        }
    }

    #[test]
    fn hom_coordinates_round_trip() {
        let g = FGAbelianGroup::new(IntMatrix::from_rows(&[[2, 4, 0], [0, 6, 0]]));
        let h = FGAbelianGroup::new(IntMatrix::from_rows(&[[4, 0], [0, 0]]));
        let hg = hom_group(&g, &h);
        for k in 0..hg.basis.len() {
            let mut t = vec![Int::zero(); hg.basis.len()];
            t[k] = Int::from(1);
            assert_eq!(hg.coordinates(&hg.basis[k]), t);
        }
        let t = ints(&[1, 1, 1, 1, 1, 1, 1, 1][..hg.basis.len()]);
        let c = hg.coordinates(&hg.combination(&t));
        assert!(hg.group.elements_equal(&c, &t));
    }

    #[test]
    fn ext_examples() {
        assert!(ext_group(&z(0), &z(5)).group.is_trivial());
        assert_eq!(ext_group(&z(2), &z(0)).group.describe(), "Z/2");
        assert_eq!(ext_group(&z(6), &z(4)).group.describe(), "Z/2");
    }
}
