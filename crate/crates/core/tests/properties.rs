mod common;

use std::f64::consts::PI;

use common::{d_of_random_hom, random_ambient, random_group, random_oext, rng};
use num_complex::Complex64;
use num_traits::{One, Signed, Zero};
use oext::dimgrp::{approx_in_range_d, AffElement, InductiveSystem, Parity, StageVector, TraceFunctional};
use oext::orderext::{
    baer_sum, kernel_sequence, oext_inverse, oext_is_isomorphic, oext_is_trivial, solve_cocycle, verify_cochain,
    CocycleSequence, OrderExtension,
};
use oext::realize::{classify_rotation_algebra, RotationAlgebraModel, RotationVerdict};
use oext::unitary::{
    bott, make_winding_pair, path_product, rotation_number, CMatrix, MatrixTrace, UnitaryPath, UnitarySample,
    WindingBlock,
};
use oext::zmod::{
    ext_group, hom_group, int, rat, smith_decomposition, solve_linear, FGAbelianGroup, Int, IntMatrix, Rat, RatMatrix,
};
use proptest::prelude::*;
use rand::Rng;

fn int_matrix(max_dim: usize, range: i64) -> impl Strategy<Value = IntMatrix> {
    (1..=max_dim, 1..=max_dim).prop_flat_map(move |(r, c)| {
        proptest::collection::vec(-range..=range, r * c).prop_map(move |v| IntMatrix::from_vec(r, c, v.into_iter().map(Int::from).collect()))
    })
}

fn group_from_orders(orders: &[i64]) -> FGAbelianGroup {
    FGAbelianGroup::cyclic_sum(&orders.iter().map(|&d| Int::from(d)).collect::<Vec<_>>())
}

fn orders() -> impl Strategy<Value = Vec<i64>> {
    proptest::collection::vec(prop_oneof![Just(0i64), 2i64..=12], 1..=3)
}

fn iso(x: &OrderExtension, y: &OrderExtension) -> bool {
    oext_is_isomorphic(x, y).expect("same ambient").is_isomorphic()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn smith_decomposition_reconstructs(a in int_matrix(4, 20)) {
        let d = smith_decomposition(&a);
        prop_assert_eq!(d.u().mul(&d.s).mul(d.v()), a.clone());
        prop_assert!(d.u().determinant().abs().is_one());
        prop_assert!(d.v().determinant().abs().is_one());
        let diag = d.diagonal();
        for w in diag.windows(2) {
            prop_assert!(w[0].is_zero() && w[1].is_zero() || !w[0].is_zero() && (&w[1] % &w[0]).is_zero());
        }
        prop_assert!(diag.iter().all(|x| !x.is_negative()));
    }

    #[test]
    fn solve_linear_verifies_or_is_obstructed(a in int_matrix(4, 6), b in proptest::collection::vec(-30i64..=30, 4)) {
        let b: Vec<Int> = b.into_iter().take(a.rows()).map(Int::from).collect();
        match solve_linear(&a, &b) {
            Some(x) => prop_assert_eq!(a.mul_vec(&x), b),
            None => {
                // P·b must violate divisibility by some d_i or be nonzero past the rank
                let d = smith_decomposition(&a);
                let c = d.p.mul_vec(&b);
                let diag = d.diagonal();
                let obstructed = c.iter().enumerate().any(|(i, ci)| match diag.get(i) {
                    Some(di) if !di.is_zero() => !(ci % di).is_zero(),
                    _ => !ci.is_zero(),
                });
                prop_assert!(obstructed);
            }
        }
    }

    #[test]
    fn solve_linear_finds_planted_solutions(a in int_matrix(4, 6), x in proptest::collection::vec(-9i64..=9, 4)) {
        let x: Vec<Int> = x.into_iter().take(a.cols()).map(Int::from).collect();
        let b = a.mul_vec(&x);
        let y = solve_linear(&a, &b).expect("b is in the image");
        prop_assert_eq!(a.mul_vec(&y), b);
    }

    #[test]
    fn invariant_factors_are_proper(p in int_matrix(4, 12)) {
        let g = FGAbelianGroup::new(p);
        let f = g.invariant_factors();
        prop_assert!(f.iter().all(|d| d >= &int(2)));
        for w in f.windows(2) {
            prop_assert!((&w[1] % &w[0]).is_zero());
        }
        let normal = FGAbelianGroup::cyclic_sum(&f.iter().cloned().chain(std::iter::repeat_n(Int::zero(), g.free_rank())).collect::<Vec<_>>());
        prop_assert!(g.is_isomorphic(&normal));
    }

    #[test]
    fn hom_and_ext_ignore_the_presentation(p in int_matrix(3, 8), h in orders()) {
        let g = FGAbelianGroup::new(p);
        let normal = FGAbelianGroup::cyclic_sum(&g.canonical_orders().to_vec());
        let h = group_from_orders(&h);
        prop_assert!(hom_group(&g, &h).group.is_isomorphic(&hom_group(&normal, &h).group));
        prop_assert!(ext_group(&g, &h).group.is_isomorphic(&ext_group(&normal, &h).group));
        prop_assert!(ext_group(&h, &g).group.is_isomorphic(&ext_group(&h, &normal).group));
    }

    #[test]
    fn ext_is_additive_in_the_first_argument(g in orders(), g2 in orders(), h in orders()) {
        let (g, g2, h) = (group_from_orders(&g), group_from_orders(&g2), group_from_orders(&h));
        let lhs = ext_group(&g.direct_sum(&g2), &h).group;
        let rhs = ext_group(&g, &h).group.direct_sum(&ext_group(&g2, &h).group);
        prop_assert!(lhs.is_isomorphic(&rhs));
    }

    #[test]
    fn ext_class_round_trips(g1 in orders(), g0 in orders(), seed in any::<u64>()) {
        let (g1, g0) = (group_from_orders(&g1), group_from_orders(&g0));
        let ext = ext_group(&g1, &g0);
        let mut r = rng(seed);
        let coords: Vec<Int> = ext.summands.iter().map(|s| {
            let o: i64 = s.order.to_string().parse().unwrap();
            Int::from(r.random_range(0..o))
        }).collect();
        let e = ext.extension_for(&coords);
        prop_assert!(e.check_exact().is_ok());
        prop_assert_eq!(ext.class_of(&e), coords.clone());
        prop_assert_eq!(e.is_split(), coords.iter().all(Zero::is_zero));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn baer_sum_group_laws(seed in any::<u64>()) {
        let amb = random_ambient(seed);
        let mut r = rng(seed ^ 0x5eed);
        let flip = r.random_bool(0.5);
        let x = random_oext(&amb, &mut r, flip);
        let flip = r.random_bool(0.5);
        let y = random_oext(&amb, &mut r, flip);
        let z = random_oext(&amb, &mut r, false);
        let t = OrderExtension::trivial(&amb);
        let xy = baer_sum(&x, &y).unwrap();
        prop_assert!(xy.validate().is_ok());
        prop_assert!(iso(&baer_sum(&x, &t).unwrap(), &x));
        prop_assert!(iso(&baer_sum(&x, &oext_inverse(&x)).unwrap(), &t));
        prop_assert!(iso(&xy, &baer_sum(&y, &x).unwrap()));
        let left = baer_sum(&xy, &z).unwrap();
        let right = baer_sum(&x, &baer_sum(&y, &z).unwrap()).unwrap();
        prop_assert!(iso(&left, &right));
    }

    #[test]
    fn baer_sum_descends_to_classes(seed in any::<u64>()) {
        let amb = random_ambient(seed);
        let mut r = rng(seed.wrapping_add(17));
        let x = random_oext(&amb, &mut r, false);
        let y = random_oext(&amb, &mut r, false);
        // shifting R by D∘h∘q is an isomorphic copy
        let shift = d_of_random_hom(&amb, &mut r);
        let x2 = OrderExtension::new(amb.clone(), x.ext.clone(), x.rmap.add(&shift.mul_int(&x.ext.q.matrix))).unwrap();
        prop_assert!(iso(&x, &x2));
        prop_assert!(iso(&baer_sum(&x, &y).unwrap(), &baer_sum(&x2, &y).unwrap()));
    }

    #[test]
    fn triviality_criteria_agree(seed in any::<u64>()) {
        let amb = random_ambient(seed);
        let mut r = rng(seed.wrapping_mul(3));
        let flip = r.random_bool(0.7);
        let x = random_oext(&amb, &mut r, flip);
        let report = oext_is_trivial(&x);
        prop_assert_eq!(iso(&x, &OrderExtension::trivial(&amb)), report.trivial);
        if report.range_equal {
            let k = kernel_sequence(&x).unwrap();
            prop_assert!(k.check_exact().is_ok());
            prop_assert!(k.iota.is_injective() && k.q.is_surjective());
        }
    }

    #[test]
    fn solved_cochains_reverify(seed in any::<u64>(), depth in 2usize..=4) {
        let mut r = rng(seed);
        let sys = oext::dimgrp::default_realization_system(depth + 3);
        let g: Vec<IntMatrix> = (0..=depth)
            .map(|_| IntMatrix::from_vec(2, 2, (0..4).map(|_| Int::from(r.random_range(-5..=5))).collect()))
            .collect();
        let (psi, _) = CocycleSequence::from_cochain(&sys, depth + 2, &g, None).unwrap();
        let sol = solve_cocycle(&psi, depth).unwrap();
        prop_assert!(verify_cochain(&sys, &psi.psi0, &sol, depth, Parity::K1));
    }
}

fn random_system(seed: u64) -> InductiveSystem {
    let mut r = rng(seed);
    let stages = 4;
    let ranks: Vec<usize> = (0..stages).map(|_| r.random_range(1..=3)).collect();
    let maps0 = (0..stages - 1)
        .map(|n| IntMatrix::from_vec(ranks[n + 1], ranks[n], (0..ranks[n] * ranks[n + 1]).map(|_| Int::from(r.random_range(1..=4))).collect()))
        .collect();
    let maps1 = (0..stages - 1)
        .map(|n| IntMatrix::from_vec(ranks[n + 1], ranks[n], (0..ranks[n] * ranks[n + 1]).map(|_| Int::from(r.random_range(-2..=2))).collect()))
        .collect();
    let unit0 = (0..ranks[0]).map(|_| Int::from(r.random_range(1..=3))).collect();
    InductiveSystem::new(ranks, maps0, maps1, unit0).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn push_forward_is_functorial(seed in any::<u64>(), parity_k0 in any::<bool>()) {
        let sys = random_system(seed);
        let parity = if parity_k0 { Parity::K0 } else { Parity::K1 };
        let mut r = rng(!seed);
        let x = StageVector::new(0, (0..sys.rank(0)).map(|_| Int::from(r.random_range(-9..=9))).collect());
        let direct = sys.push_forward(&x, 3, parity).unwrap();
        let stepped = sys.push_forward(&sys.push_forward(&x, 1, parity).unwrap(), 3, parity).unwrap();
        prop_assert_eq!(&direct, &stepped);
        prop_assert_eq!(sys.composite(parity, 3, 0).unwrap(), sys.composite(parity, 3, 1).unwrap().mul(&sys.composite(parity, 1, 0).unwrap()));
    }

    #[test]
    fn dimension_map_is_positive_and_unital(seed in any::<u64>(), eval in 0usize..4) {
        let sys = random_system(seed);
        let mut r = rng(seed ^ 1);
        for n in 0..=eval {
            let unit = StageVector::new(n, sys.unit(n).to_vec());
            prop_assert!(sys.dimension_map(&unit, eval).unwrap().values.iter().all(Rat::is_one));
            let pos = StageVector::new(n, (0..sys.rank(n)).map(|_| Int::from(r.random_range(0..=7))).collect());
            prop_assert!(sys.dimension_map(&pos, eval).unwrap().values.iter().all(|v| !v.is_negative()));
        }
        // a random convex combination of extreme traces is normalized
        let c: Vec<i64> = (0..sys.rank(eval)).map(|_| r.random_range(0..=5)).collect();
        let total: i64 = c.iter().sum::<i64>().max(1);
        let w: Vec<Rat> = (0..sys.rank(eval)).map(|j| {
            let cj = if c.iter().all(|&x| x == 0) && j == 0 { 1 } else { c[j] };
            Rat::new(Int::from(cj), Int::from(total) * sys.unit(eval)[j].clone())
        }).collect();
        let tau = TraceFunctional::new(&sys, eval, w).unwrap();
        prop_assert!(tau.eval(&sys, &StageVector::new(0, sys.unit(0).to_vec())).unwrap().is_one());
    }

    #[test]
    fn aff_push_forward_does_not_grow(seed in any::<u64>()) {
        let sys = random_system(seed);
        let mut r = rng(seed ^ 2);
        let a = AffElement { stage: 0, values: (0..sys.rank(0)).map(|_| rat(r.random_range(-20..=20), r.random_range(1..=7))).collect() };
        let mut prev = a.clone();
        for m in 1..4 {
            let next = a.push_forward(&sys, m).unwrap();
            let (lo, hi) = (prev.values.iter().min().unwrap(), prev.values.iter().max().unwrap());
            prop_assert!(next.values.iter().all(|v| v >= lo && v <= hi));
            prop_assert!(next.sup_norm() <= prev.sup_norm());
            prev = next;
        }
    }

    #[test]
    fn approximation_meets_its_bound(seed in any::<u64>(), num in -40i64..=40, den in 1i64..=9, b in 1i64..=8) {
        let sys = oext::dimgrp::default_realization_system(6);
        let target = AffElement::constant(0, 2, rat(num, den));
        let bound = AffElement::constant(0, 2, rat(1, 1 << b));
        let _ = seed;
        if let Ok(xi) = approx_in_range_d(&target, &sys, &bound, 5) {
            let d = sys.dimension_map(&xi, xi.stage).unwrap();
            let t = target.push_forward(&sys, xi.stage).unwrap();
            let bd = bound.push_forward(&sys, xi.stage).unwrap();
            for j in 0..2 {
                prop_assert!((&t.values[j] - &d.values[j]).abs() < bd.values[j]);
            }
        }
    }
}

fn blocks_strategy(max_ratio_den: usize) -> impl Strategy<Value = Vec<WindingBlock>> {
    proptest::collection::vec((8usize..=32, any::<bool>(), any::<u8>()), 1..=3).prop_map(move |v| {
        v.into_iter()
            .map(|(m, pos, n)| {
                let cap = (m / max_ratio_den) as i64;
                let n = (n as i64) % (2 * cap + 1) - cap;
                WindingBlock::new(m, n, if pos { 1 } else { -1 }).unwrap()
            })
            .collect()
    })
}

fn hermitian(rng: &mut rand_chacha::ChaCha8Rng, n: usize, scale: f64) -> CMatrix {
    let a = CMatrix::from_fn(n, n, |_, _| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
    (&a + a.adjoint()) * Complex64::new(scale / 2.0, 0.0)
}

fn expi(h: &CMatrix, t: f64) -> CMatrix {
    let eig = h.clone().symmetric_eigen();
    let phases = eig.eigenvalues.map(|l| Complex64::from_polar(1.0, 2.0 * PI * t * l));
    &eig.eigenvectors * CMatrix::from_diagonal(&phases) * eig.eigenvectors.adjoint()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn bott_antisymmetry_and_additivity(blocks in blocks_strategy(8), k in 0usize..64, l in 0usize..64) {
        let (w, z) = make_winding_pair(&blocks, 64).unwrap();
        let (zk, zl) = (z.frame(k), z.frame(l));
        let expect: i64 = blocks.iter().map(|b| b.n).sum();
        let b1 = bott(&w, &zk, 0.1).unwrap();
        prop_assert_eq!(b1.rounded, expect);
        prop_assert_eq!(bott(&zk, &w, 0.1).unwrap().rounded, -b1.rounded);
        prop_assert_eq!(bott(&w.adjoint(), &zk, 0.1).unwrap().rounded, -b1.rounded);
        let prod = zk.mul(&zl).unwrap();
        let b12 = bott(&w, &prod, 0.1).unwrap();
        prop_assert_eq!(b12.rounded, b1.rounded + bott(&w, &zl, 0.1).unwrap().rounded);
    }

    #[test]
    fn bott_is_additive_over_direct_sums(a in blocks_strategy(4), b in blocks_strategy(4), seed in any::<u64>()) {
        let (wa, za) = make_winding_pair(&a, 32).unwrap();
        let (wb, zb) = make_winding_pair(&b, 32).unwrap();
        let ba = bott(&wa, &za.frame(3), 0.1).unwrap().rounded;
        let bb = bott(&wb, &zb.frame(7), 0.1).unwrap().rounded;
        let (u, v) = (wa.direct_sum(&wb), za.frame(3).direct_sum(&zb.frame(7)));
        prop_assert_eq!(bott(&u, &v, 0.1).unwrap().rounded, ba + bb);
        // and is unchanged by a common unitary conjugation
        let x = UnitarySample::random_seeded(u.dim(), seed);
        prop_assert_eq!(bott(&x.conjugate(&u).unwrap(), &x.conjugate(&v).unwrap(), 0.1).unwrap().rounded, ba + bb);
    }

    #[test]
    fn rotation_is_additive_and_odd(seed in any::<u64>(), n in 1usize..=4) {
        let mut r = rng(seed);
        let (h, k) = (hermitian(&mut r, n, 0.8), hermitian(&mut r, n, 0.8));
        let u0 = UnitarySample::random(n, &mut r);
        let p = UnitaryPath::from_fn(512, n, |t| expi(&h, t) * u0.matrix()).unwrap();
        let q = UnitaryPath::from_fn(512, n, |t| expi(&k, t)).unwrap();
        let rp = rotation_number(&p, MatrixTrace::Full, 0.1).unwrap().value;
        let rq = rotation_number(&q, MatrixTrace::Full, 0.1).unwrap().value;
        let rpq = rotation_number(&path_product(&p, &q).unwrap(), MatrixTrace::Full, 0.1).unwrap().value;
        prop_assert!((rpq - rp - rq).abs() < 1e-6);
        prop_assert!((rp - h.trace().re).abs() < 1e-6);
        let adj = rotation_number(&p.adjoint(), MatrixTrace::Full, 0.1).unwrap().value;
        prop_assert!((adj + rp).abs() < 1e-6);
    }

    #[test]
    fn small_loops_have_zero_rotation(seed in any::<u64>(), n in 1usize..=5) {
        let mut r = rng(seed);
        let u = UnitarySample::random(n, &mut r);
        let (a, b) = (hermitian(&mut r, n, 0.05), hermitian(&mut r, n, 0.05));
        let path = UnitaryPath::from_fn(256, n, |t| {
            let (s, c) = (2.0 * PI * t).sin_cos();
            let gen = &a * Complex64::new(c, 0.0) + &b * Complex64::new(s, 0.0);
            u.matrix() * expi(&gen, 1.0)
        }).unwrap();
        prop_assert!(rotation_number(&path, MatrixTrace::Normalized, 0.1).unwrap().value.abs() < 1e-9);
    }

    #[test]
    fn refinement_moves_rotation_less_than_the_step_bound(seed in any::<u64>(), n in 1usize..=3) {
        let mut r = rng(seed);
        let (h, k) = (hermitian(&mut r, n, 1.0), hermitian(&mut r, n, 1.0));
        // a non-geodesic path, so coarse and fine grids genuinely differ
        let f = |t: f64| expi(&h, t) * expi(&k, t * t);
        let coarse = rotation_number(&UnitaryPath::from_fn(64, n, f).unwrap(), MatrixTrace::Normalized, 0.1).unwrap();
        let fine = rotation_number(&UnitaryPath::from_fn(128, n, f).unwrap(), MatrixTrace::Normalized, 0.1).unwrap();
        prop_assert!((coarse.value - fine.value).abs() < coarse.step_bound);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn classifier_is_translation_invariant(p in 0i64..1_000_000, q in 0i64..1_000_000, m1 in -50i64..50, n1 in -400i64..400, m2 in -50i64..50, n2 in -400i64..400) {
        let model = RotationAlgebraModel::golden(2_000, rat(1, 1_000_000_000)).unwrap();
        let phi = [rat(p, 1_000_000), rat(q, 1_000_000)];
        let shift = |r: &Rat, m: i64, n: i64| r + Rat::from_integer(m.into()) + Rat::from_integer(n.into()) * &model.theta;
        let moved = [shift(&phi[0], m1, n1), shift(&phi[1], m2, n2)];
        let a = classify_rotation_algebra(&model, &phi);
        let b = classify_rotation_algebra(&model, &moved);
        if a.is_decided() && b.is_decided() {
            prop_assert_eq!(matches!(a.verdict, RotationVerdict::Trivial), matches!(b.verdict, RotationVerdict::Trivial));
        }
    }

    #[test]
    fn classifier_matches_brute_force(p in 0i64..1_000_000, q in 0i64..1_000_000, planted in any::<bool>(), n1 in -300i64..300, n2 in -300i64..300) {
        let qmax = 300u64;
        let model = RotationAlgebraModel::golden(qmax, rat(1, 1_000_000)).unwrap();
        let phi = if planted {
            [Rat::from_integer(n1.into()) * &model.theta + rat(p % 7, 10_000_000), Rat::from_integer(n2.into()) * &model.theta]
        } else {
            [rat(p, 1_000_000), rat(q, 1_000_000)]
        };
        let c = classify_rotation_algebra(&model, &phi);
        let theta = (5f64.sqrt() - 1.0) / 2.0;
        let brute = |r: f64| (-(qmax as i64)..=qmax as i64).map(|n| { let x = r - n as f64 * theta; (x - x.round()).abs() }).fold(f64::INFINITY, f64::min);
        let d = brute(f64_of(&phi[0])).max(brute(f64_of(&phi[1])));
        match c.verdict {
            RotationVerdict::Trivial => prop_assert!(d <= 1e-6 + 1e-12),
            RotationVerdict::NonTrivial { .. } => prop_assert!(d >= 2e-6 - 1e-12),
            RotationVerdict::Undecided => prop_assert!(d > 1e-6 - 1e-9 && d < 2e-6 + 1e-9),
        }
        prop_assert!((c.distance - d).abs() < 1e-9);
    }
}

fn f64_of(r: &Rat) -> f64 {
    num_traits::ToPrimitive::to_f64(r).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn reports_are_deterministic(seed in any::<u64>()) {
        use oext::cli::{run, JobSpec, Params, RunOptions, Verb};
        let job = JobSpec {
            verb: Verb::ClassifyRotationAlgebra,
            inputs: Default::default(),
            params: Params { seed: Some(seed), qmax: Some(1000), ..Default::default() },
            output: None,
        };
        let a = serde_json::to_vec(&run(&job, std::path::Path::new(""), RunOptions::default())).unwrap();
        let b = serde_json::to_vec(&run(&job, std::path::Path::new(""), RunOptions::default())).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn matrices_round_trip_through_json(a in int_matrix(4, 1_000_000)) {
        let s = serde_json::to_string(&a).unwrap();
        prop_assert_eq!(serde_json::from_str::<IntMatrix>(&s).unwrap(), a.clone());
        let r = a.to_rat();
        prop_assert_eq!(serde_json::from_str::<RatMatrix>(&serde_json::to_string(&r).unwrap()).unwrap(), r);
    }
}

#[test]
fn random_groups_stay_small() {
    let mut r = rng(3);
    for _ in 0..50 {
        let g = random_group(&mut r, 3, 12);
        assert!(g.ngens() <= 3);
        assert!(g.invariant_factors().iter().all(|d| d <= &int(12 * 12 * 12)));
    }
}
