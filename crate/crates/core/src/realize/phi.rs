//! `φ ∈ Hom(K_1, Aff)` presented by its values on the stage generators.

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize};

use crate::dimgrp::{InductiveSystem, Parity, TraceModel};
use crate::zmod::{IntMatrix, Rat, RatMatrix};

use super::RealizeError;

/// `values[n]` is the `r × k_n` matrix of `τ_i(φ χ¹_{∞,n}(e_j))` over the traces of
/// `model`, for stages `0..=model.stage()`. Each value is within `precision` of the
/// true one, and `values[n] = values[n+1]·χ_n¹` up to `precision`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PhiSpec {
    pub system: InductiveSystem,
    pub model: TraceModel,
    pub values: Vec<RatMatrix>,
    #[serde(serialize_with = "crate::zmod::matrix::rat_repr::serialize")]
    pub precision: Rat,
}

impl PhiSpec {
    pub fn new(system: InductiveSystem, model: TraceModel, values: Vec<RatMatrix>, precision: Rat) -> Result<Self, RealizeError> {
        let p = PhiSpec { system, model, values, precision };
        p.validate()?;
        Ok(p)
    }

    /// Values at the model stage, pulled back along `χ¹` to every earlier stage.
    pub fn from_top(system: InductiveSystem, model: TraceModel, top: RatMatrix, precision: Rat) -> Result<Self, RealizeError> {
        let t = model.stage();
        if t >= system.nstages() {
            return Err(RealizeError::Precondition(format!("trace model lives at stage {t} beyond the system")));
        }
        let mut values = vec![top];
        for n in (0..t).rev() {
            let next = values.last().expect("nonempty").mul_int(system.map(Parity::K1, n));
            values.push(next);
        }
        values.reverse();
        Self::new(system, model, values, precision)
    }

    pub fn zero(system: InductiveSystem, model: TraceModel) -> Result<Self, RealizeError> {
        let t = model.stage();
        let top = RatMatrix::zeros(model.len(), system.rank(t));
        Self::from_top(system, model, top, Rat::zero())
    }

    /// `φ = D∘g` for an integer map `g: ℤ^{k_T} → ℤ^{k_T}` from the `K_1` lattice to the
    /// `K_0` lattice at the model stage `T`.
    pub fn from_integer_map(system: InductiveSystem, model: TraceModel, g: &IntMatrix) -> Result<Self, RealizeError> {
        let t = model.stage();
        let d = model.d_matrix(&system, t)?;
        if g.rows() != system.rank(t) || g.cols() != system.rank(t) {
            return Err(RealizeError::Precondition("g must be square of the model stage rank".into()));
        }
        let top = d.mul_int(g);
        Self::from_top(system, model, top, Rat::zero())
    }

    /// `φ(e_j) = value` at every trace for one generator of the model stage, zero on the
    /// others. `value_error` bounds the error of `value`; the declared precision scales it
    /// by the largest coefficient met when pulling back.
    pub fn constant_on_generator(
        system: InductiveSystem,
        model: TraceModel,
        j: usize,
        value: Rat,
        value_error: Rat,
    ) -> Result<Self, RealizeError> {
        let t = model.stage();
        if j >= system.rank(t) {
            return Err(RealizeError::Precondition(format!("generator {j} out of range")));
        }
        let mut coeff = crate::zmod::Int::one();
        for n in 0..=t {
            let x = system.composite(Parity::K1, t, n)?;
            for c in 0..x.cols() {
                coeff = coeff.max(x[(j, c)].abs());
            }
        }
        let precision = value_error * Rat::from_integer(coeff);
        let mut top = RatMatrix::zeros(model.len(), system.rank(t));
        for i in 0..model.len() {
            top[(i, j)] = value.clone();
        }
        Self::from_top(system, model, top, precision)
    }

    pub fn top_stage(&self) -> usize {
        self.values.len() - 1
    }

    pub fn validate(&self) -> Result<(), RealizeError> {
        let t = self.model.stage();
        if t >= self.system.nstages() {
            return Err(RealizeError::Precondition(format!("trace model lives at stage {t} beyond the system")));
        }
        if self.values.len() != t + 1 {
            return Err(RealizeError::Precondition(format!("expected values for stages 0..={t}, got {}", self.values.len())));
        }
        if self.precision.is_negative() {
            return Err(RealizeError::Precondition("precision must be nonnegative".into()));
        }
        for (n, v) in self.values.iter().enumerate() {
            if v.rows() != self.model.len() || v.cols() != self.system.rank(n) {
                return Err(RealizeError::Precondition(format!("values at stage {n} have the wrong shape")));
            }
        }
        for n in 0..t {
            let pulled = self.values[n + 1].mul_int(self.system.map(Parity::K1, n));
            let diff = pulled.sub(&self.values[n]);
            if diff.entries().iter().any(|x| x.abs() > self.precision) {
                return Err(RealizeError::Precondition(format!("values at stages {n} and {} disagree beyond precision", n + 1)));
            }
        }
        Ok(())
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PhiWire {
    system: InductiveSystem,
    model: TraceModel,
    #[serde(default)]
    values: Option<Vec<RatMatrix>>,
    #[serde(default)]
    top: Option<RatMatrix>,
    #[serde(deserialize_with = "crate::zmod::matrix::rat_repr::deserialize")]
    precision: Rat,
}

/// Accepts either the full `values` list or only the `top` stage values.
impl<'de> Deserialize<'de> for PhiSpec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let w = PhiWire::deserialize(d)?;
        match (w.values, w.top) {
            (Some(v), None) => PhiSpec::new(w.system, w.model, v, w.precision).map_err(D::Error::custom),
            (None, Some(t)) => PhiSpec::from_top(w.system, w.model, t, w.precision).map_err(D::Error::custom),
            _ => Err(D::Error::custom("exactly one of values, top is required")),
        }
    }
}

pub(crate) fn pow2(e: i64) -> Rat {
    let two = Rat::from_integer(2.into());
    let mut r = Rat::one();
    for _ in 0..e.unsigned_abs() {
        r = if e >= 0 { r * &two } else { r / &two };
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dimgrp::default_realization_system;
    use crate::zmod::rat;

    #[test]
    fn pullback_is_consistent_and_round_trips() {
        let s = default_realization_system(6);
        let m = TraceModel::uniform(&s);
        let p = PhiSpec::constant_on_generator(s.clone(), m.clone(), 0, rat(61_803, 100_000), rat(1, 100_000)).unwrap();
        assert_eq!(p.values.len(), 6);
        let json = serde_json::to_string(&p).unwrap();
        let back: PhiSpec = serde_json::from_str(&json).unwrap();
        assert_eq!(back, p);
        let mut bad = p.clone();
        bad.values[2][(0, 1)] += rat(1, 10);
        assert!(bad.validate().is_err());
        assert!(PhiSpec::from_integer_map(s, m, &IntMatrix::identity(2)).is_ok());
    }
}
