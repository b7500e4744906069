//! Membership of `(r_1, r_2)` in `(ℤ+θℤ)²` for the irrational rotation algebra, whose
//! `ker Q` is `ℝ²/(ℤ+θℤ)²`.
//!
//! For one coordinate, `d(r) = min_{|n|≤qmax} ‖nθ − r‖` (distance to the nearest integer).
//! The number of `n` with `‖nθ − r‖ < δ` is a sum of `⌊x_n + δ⌋ − ⌊x_n − δ⌋`, which
//! is a difference of two floor sums, so each count costs `O(log)` big-integer steps.
//! Bisection on `δ` isolates the nearest `n`, and bisection on prefix counts locates it.

use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::RealizeError;
use crate::zmod::matrix::rat_repr;
use crate::zmod::{Int, Rat};

/// `θ` carried as a rational surrogate `theta` with `|θ − theta| ≤ theta_error`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RotationAlgebraModel {
    #[serde(serialize_with = "rat_repr::serialize", deserialize_with = "rat_repr::deserialize")]
    pub theta: Rat,
    #[serde(serialize_with = "rat_repr::serialize", deserialize_with = "rat_repr::deserialize")]
    pub theta_error: Rat,
    pub qmax: u64,
    #[serde(serialize_with = "rat_repr::serialize", deserialize_with = "rat_repr::deserialize")]
    pub tol: Rat,
}

/// The window shift `qmax·theta_error` may use at most this fraction of `tol`.
const ERROR_SHARE: i64 = 1000;

impl RotationAlgebraModel {
    pub fn new(theta: Rat, theta_error: Rat, qmax: u64, tol: Rat) -> Result<Self, RealizeError> {
        if !tol.is_positive() || theta <= Rat::zero() || theta >= Rat::one() {
            return Err(RealizeError::Precondition("need 0 < theta < 1 and tol > 0".into()));
        }
        let m = RotationAlgebraModel { theta, theta_error, qmax, tol };
        if m.error_bound() * Rat::from_integer(ERROR_SHARE.into()) > m.tol {
            return Err(RealizeError::PrecisionInsufficient(format!(
                "qmax * theta_error = {} exceeds tol/{ERROR_SHARE}",
                m.error_bound()
            )));
        }
        Ok(m)
    }

    /// `θ = (√5 − 1)/2` with error at most `tol/(1000·qmax)`.
    pub fn golden(qmax: u64, tol: Rat) -> Result<Self, RealizeError> {
        let (theta, err) = golden_conjugate(&(tol.clone() / Rat::from_integer(Int::from(qmax.max(1)) * Int::from(ERROR_SHARE))));
        Self::new(theta, err, qmax, tol)
    }

    /// `qmax·theta_error`: how far any `nθ` in the window can move.
    pub fn error_bound(&self) -> Rat {
        Rat::from_integer(self.qmax.into()) * &self.theta_error
    }
}

/// A Fibonacci ratio `F_k/F_{k+1}` approximating `(√5 − 1)/2`, with the bound
/// `1/F_{k+1}²` on its error, which is at most `max_error`.
pub fn golden_conjugate(max_error: &Rat) -> (Rat, Rat) {
    let (mut a, mut b) = (Int::one(), Int::one());
    while Rat::new(Int::one(), &b * &b) > *max_error {
        let c = &a + &b;
        a = b;
        b = c;
    }
    let err = Rat::new(Int::one(), &b * &b);
    (Rat::new(a, b), err)
}

/// Nearest lattice point `m + nθ` to one coordinate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NearestPoint {
    pub m: String,
    pub n: i64,
    /// `r − m − nθ` with the surrogate.
    pub residual: String,
    pub distance: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum RotationVerdict {
    Trivial,
    NonTrivial { representative: [f64; 2] },
    Undecided,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RotationClassification {
    #[serde(flatten)]
    pub verdict: RotationVerdict,
    /// `max(d(r_1), d(r_2))` with the surrogate.
    pub distance: f64,
    pub nearest: [NearestPoint; 2],
    pub tol: f64,
    pub error_bound: f64,
}

impl RotationClassification {
    pub fn is_decided(&self) -> bool {
        !matches!(self.verdict, RotationVerdict::Undecided)
    }
}

/// `Σ_{i=0}^{n−1} ⌊(a·i + b)/m⌋` for `m > 0`.
pub(crate) fn floor_sum(n: &Int, m: &Int, a: &Int, b: &Int) -> Int {
    let mut ans = Int::zero();
    let (mut n, mut m, mut a, mut b) = (n.clone(), m.clone(), a.clone(), b.clone());
    let two = Int::from(2);
    // reduce to 0 ≤ a, b < m
    let (qa, ra) = a.div_mod_floor(&m);
    if !qa.is_zero() {
        ans += &n * (&n - 1) / &two * qa;
        a = ra;
    }
    let (qb, rb) = b.div_mod_floor(&m);
    if !qb.is_zero() {
        ans += &n * qb;
        b = rb;
    }
    loop {
        if a >= m {
            ans += &n * (&n - 1) / &two * (&a / &m);
            a %= &m;
        }
        if b >= m {
            ans += &n * (&b / &m);
            b %= &m;
        }
        let y_max = &a * &n + &b;
        if y_max < m {
            break;
        }
        n = &y_max / &m;
        b = &y_max % &m;
        std::mem::swap(&mut m, &mut a);
    }
    ans
}

struct Window<'a> {
    theta: &'a Rat,
    r: &'a Rat,
    q: i64,
}

impl Window<'_> {
    /// `#{n ∈ [−q, −q + len) : ‖nθ − r‖ < δ}` for `0 < δ ≤ 1/2`.
    fn count(&self, len: i64, delta: &Rat) -> Int {
        if len <= 0 {
            return Int::zero();
        }
        // x_{n'} = (n' − q)θ − r over the common denominator den
        let den = self.theta.denom() * self.r.denom() * delta.denom();
        let a = self.theta.numer() * self.r.denom() * delta.denom();
        let base = -Int::from(self.q) * &a - self.r.numer() * self.theta.denom() * delta.denom();
        let dl = delta.numer() * self.theta.denom() * self.r.denom();
        let n = Int::from(len);
        floor_sum(&n, &den, &a, &(&base + &dl)) - floor_sum(&n, &den, &a, &(&base - &dl))
    }

    /// `(m, |r − m − nθ|)` for the integer `m` nearest to `r − nθ`.
    fn distance(&self, n: i64) -> (Int, Rat) {
        let x = self.r - Rat::from_integer(n.into()) * self.theta;
        let m = x.round();
        ((&m).to_integer(), (x - m).abs())
    }
}

/// Nearest `nθ + m` to `r` over `|n| ≤ q`.
pub(crate) fn nearest_point(theta: &Rat, r: &Rat, q: u64) -> (i64, Int, Rat) {
    let w = Window { theta, r, q: q as i64 };
    let total = 2 * q as i64 + 1;
    let (mut lo, mut hi) = (Rat::zero(), Rat::new(1.into(), 2.into()));
    // at δ = 1/2 every point counts except exact half-integer distances
    let mut count = w.count(total, &hi);
    if count.is_zero() {
        let (m, d) = w.distance(-(q as i64));
        return (-(q as i64), m, d);
    }
    for _ in 0..256 {
        if count <= Int::one() {
            break;
        }
        let mid = (&lo + &hi) / Rat::from_integer(2.into());
        let c = w.count(total, &mid);
        if c.is_zero() {
            lo = mid;
        } else {
            hi = mid;
            count = c;
        }
    }
    // locate every point in the final window by prefix bisection
    let mut best: Option<(i64, Int, Rat)> = None;
    let mut start = 0i64;
    let mut seen = Int::zero();
    while seen < count {
        // count(a) = seen < count(b); the next point sits at index b − 1 once b = a + 1
        let (mut a, mut b) = (start, total);
        while b - a > 1 {
            let mid = (a + b) / 2;
            if w.count(mid, &hi) > seen { b = mid } else { a = mid }
        }
        let idx = b - 1;
        let n = idx - q as i64;
        let (m, d) = w.distance(n);
        if best.as_ref().is_none_or(|(_, _, bd)| d < *bd) {
            best = Some((n, m, d));
        }
        seen += 1;
        start = idx + 1;
    }
    best.expect("count is positive")
}

/// Three-valued lattice membership of `(r_1, r_2)`: `Trivial` when both distances are at
/// most `tol − e`, `NonTrivial` when one is at least `2·tol + e`, `Undecided` otherwise,
/// where `e = qmax·theta_error`.
pub fn classify_rotation_algebra(model: &RotationAlgebraModel, phi: &[Rat; 2]) -> RotationClassification {
    let e = model.error_bound();
    let pts: Vec<(i64, Int, Rat, Rat)> = phi
        .iter()
        .map(|r| {
            let (n, m, d) = nearest_point(&model.theta, r, model.qmax);
            let residual = r - Rat::from_integer(m.clone()) - Rat::from_integer(n.into()) * &model.theta;
            (n, m, d, residual)
        })
        .collect();
    let dmax = pts.iter().map(|p| p.2.clone()).max().expect("two coordinates");
    let two = Rat::from_integer(2.into());
    let verdict = if dmax <= &model.tol - &e {
        RotationVerdict::Trivial
    } else if dmax >= &two * &model.tol + &e {
        RotationVerdict::NonTrivial { representative: [f(&pts[0].3), f(&pts[1].3)] }
    } else {
        RotationVerdict::Undecided
    };
    let nearest = pts.iter().map(|(n, m, d, res)| NearestPoint { m: m.to_string(), n: *n, residual: rat_repr::to_string(res), distance: f(d) });
    let nearest: Vec<NearestPoint> = nearest.collect();
    RotationClassification {
        verdict,
        distance: f(&dmax),
        nearest: [nearest[0].clone(), nearest[1].clone()],
        tol: f(&model.tol),
        error_bound: f(&e),
    }
}

fn f(x: &Rat) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zmod::rat;

    fn brute_floor_sum(n: i64, m: i64, a: i64, b: i64) -> i64 {
        (0..n).map(|i| (a * i + b).div_euclid(m)).sum()
    }

    #[test]
    fn floor_sum_matches_direct_sum() {
        for n in 0..12 {
            for m in 1..7 {
                for a in -9..9 {
                    for b in -9..9 {
                        let got = floor_sum(&n.into(), &m.into(), &a.into(), &b.into());
                        assert_eq!(got, brute_floor_sum(n, m, a, b).into(), "{n} {m} {a} {b}");
                    }
                }
            }
        }
    }

    fn brute_nearest(theta: &Rat, r: &Rat, q: i64) -> Rat {
        (-q..=q)
            .map(|n| {
                let x = Rat::from_integer(n.into()) * theta - r;
                (x.clone() - x.round()).abs()
            })
            .min()
            .unwrap()
    }

    #[test]
    fn nearest_point_matches_enumeration() {
        let theta = rat(377, 610);
        for (num, den) in [(1, 2), (1, 3), (7, 11), (-5, 13), (123, 1000), (0, 1)] {
            let r = rat(num, den);
            let (n, m, d) = nearest_point(&theta, &r, 40);
            assert_eq!(d, brute_nearest(&theta, &r, 40), "r = {r}");
            assert_eq!((&r - Rat::from_integer(m) - Rat::from_integer(n.into()) * &theta).abs(), d);
        }
    }

    #[test]
    fn spec_examples() {
        let model = RotationAlgebraModel::golden(1_000_000, rat(1, 1_000_000_000)).unwrap();
        let zero = classify_rotation_algebra(&model, &[rat(0, 1), rat(0, 1)]);
        assert_eq!(zero.verdict, RotationVerdict::Trivial);
        let th = &model.theta;
        let member = [Rat::from_integer(3.into()) + th * Rat::from_integer(2.into()), -th * Rat::from_integer(5.into())];
        assert_eq!(classify_rotation_algebra(&model, &member).verdict, RotationVerdict::Trivial);
        let half = classify_rotation_algebra(&model, &[rat(1, 2), rat(0, 1)]);
        assert!(matches!(half.verdict, RotationVerdict::NonTrivial { .. }));
    }

    #[test]
    fn insufficient_precision_is_reported() {
        let e = RotationAlgebraModel::new(rat(618, 1000), rat(1, 1000), 1000, rat(1, 1_000_000));
        assert!(matches!(e, Err(RealizeError::PrecisionInsufficient(_))));
    }
}
