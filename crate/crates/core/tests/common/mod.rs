//! Seeded generators shared by the property and acceptance suites.
#![allow(dead_code)]

use num_traits::{ToPrimitive, Zero};
use oext::orderext::{Ambient, OrderExtension};
use oext::zmod::{ext_group, hom_group, Int, FGAbelianGroup, Rat, RatMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `⊕ ℤ/d_i` with `1..=max_rank` summands, each free or of order `2..=max_torsion`.
pub fn random_group(rng: &mut ChaCha8Rng, max_rank: usize, max_torsion: i64) -> FGAbelianGroup {
    let k = rng.random_range(1..=max_rank);
    let orders: Vec<Int> =
        (0..k).map(|_| if rng.random_bool(0.4) { Int::zero() } else { Int::from(rng.random_range(2..=max_torsion)) }).collect();
    FGAbelianGroup::cyclic_sum(&orders)
}

fn small_rat(rng: &mut ChaCha8Rng) -> Rat {
    Rat::new(Int::from(rng.random_range(-6..=6)), Int::from(rng.random_range(1..=4)))
}

/// A matrix with `rows` rows over the generators of `g` that vanishes on torsion generators.
pub fn free_part_matrix(rng: &mut ChaCha8Rng, rows: usize, g: &FGAbelianGroup) -> RatMatrix {
    let cols = g.ngens();
    let torsion: Vec<bool> = (0..cols).map(|j| g.presentation().column(j).iter().any(|x| !x.is_zero())).collect();
    let entries = (0..rows * cols).map(|k| if torsion[k % cols] { Rat::zero() } else { small_rat(rng) }).collect();
    RatMatrix::from_vec(rows, cols, entries)
}

/// Ranks at most 3, torsion orders at most 12, one or two traces.
pub fn random_ambient(seed: u64) -> Ambient {
    let mut r = rng(seed);
    let g0 = random_group(&mut r, 3, 12);
    let g1 = random_group(&mut r, 3, 12);
    let traces = r.random_range(1..=2);
    let d = free_part_matrix(&mut r, traces, &g0);
    Ambient::new(g0, g1, d).expect("D vanishes on torsion")
}

/// A random extension class with random rotation data. With `in_range`, the extra
/// rotation is `D∘h` for a random `h`, so `Range R = Range D` whenever the class splits.
pub fn random_oext(amb: &Ambient, rng: &mut ChaCha8Rng, in_range: bool) -> OrderExtension {
    let ext = ext_group(&amb.g1, &amb.g0);
    let coords: Vec<Int> = ext.summands.iter().map(|s| Int::from(rng.random_range(0..s.order.to_i64().unwrap()))).collect();
    let pres = ext.extension_for(&coords);
    let phi = if in_range { d_of_random_hom(amb, rng) } else { free_part_matrix(rng, amb.ntraces(), &amb.g1) };
    OrderExtension::with_rotation(amb, pres, &phi).expect("rotation data is admissible")
}

/// `D∘h` on the generators of `G1` for a random `h ∈ Hom(G1, G0)`.
pub fn d_of_random_hom(amb: &Ambient, rng: &mut ChaCha8Rng) -> RatMatrix {
    let hom = hom_group(&amb.g1, &amb.g0);
    let t: Vec<Int> = (0..hom.basis.len()).map(|_| Int::from(rng.random_range(-3..=3))).collect();
    let h = hom.combination(&t);
    amb.d.mul_int(&h.matrix)
}
