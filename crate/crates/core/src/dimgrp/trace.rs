//! Normalized traces at a finite stage and finite trace models of `T_A`.

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use super::system::{InductiveSystem, Parity, StageVector, SystemError};
use crate::zmod::{Int, Rat, RatMatrix};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TraceError {
    #[error("negative weight at index {0}")]
    Negative(usize),
    #[error("weights evaluate the unit to {0}, not 1")]
    NotNormalized(String),
    #[error(transparent)]
    System(#[from] SystemError),
    #[error("trace model is empty")]
    Empty,
    #[error("vector at stage {vector} lies beyond the trace stage {trace}")]
    TooDeep { vector: usize, trace: usize },
}

/// `τ(x) = Σ_j w_j x_j` on `ℤ^{k_m}` with `w ≥ 0` and `τ([1]) = 1`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceFunctional {
    pub stage: usize,
    #[serde(
        serialize_with = "crate::zmod::matrix::rat_repr::serialize_vec",
        deserialize_with = "crate::zmod::matrix::rat_repr::deserialize_vec"
    )]
    pub weights: Vec<Rat>,
}

impl TraceFunctional {
    pub fn new(system: &InductiveSystem, stage: usize, weights: Vec<Rat>) -> Result<Self, TraceError> {
        system.check_vector(&StageVector::new(stage, vec![Int::zero(); weights.len()]))?;
        if let Some(i) = weights.iter().position(|w| w.is_negative()) {
            return Err(TraceError::Negative(i));
        }
        let t = TraceFunctional { stage, weights };
        let total = t.eval_coords(system.unit(stage));
        if total != Rat::from_integer(1.into()) {
            return Err(TraceError::NotNormalized(total.to_string()));
        }
        Ok(t)
    }

    /// The extreme trace `x ↦ x_j / [m,j]`.
    pub fn extreme(system: &InductiveSystem, stage: usize, j: usize) -> Self {
        let mut w = vec![Rat::zero(); system.rank(stage)];
        w[j] = Rat::new(1.into(), system.unit(stage)[j].clone());
        TraceFunctional { stage, weights: w }
    }

    fn eval_coords(&self, x: &[Int]) -> Rat {
        self.weights.iter().zip(x).fold(Rat::zero(), |acc, (w, xi)| acc + w * Rat::from_integer(xi.clone()))
    }

    /// The same trace seen at an earlier stage: `w_n = χ_{m,n}ᵀ w`.
    pub fn pull_back(&self, system: &InductiveSystem, stage: usize) -> Result<TraceFunctional, TraceError> {
        let x = system.composite(Parity::K0, self.stage, stage)?;
        let k = system.rank(stage);
        let weights = (0..k)
            .map(|j| {
                (0..x.rows()).fold(Rat::zero(), |acc, i| acc + &self.weights[i] * Rat::from_integer(x[(i, j)].clone()))
            })
            .collect();
        Ok(TraceFunctional { stage, weights })
    }

    pub fn eval(&self, system: &InductiveSystem, x: &StageVector) -> Result<Rat, TraceError> {
        if x.stage > self.stage {
            return Err(TraceError::TooDeep { vector: x.stage, trace: self.stage });
        }
        let t = self.pull_back(system, x.stage)?;
        Ok(t.eval_coords(&x.coords))
    }
}

/// A finite family of traces defined at one stage, standing in for `T_A`.
/// `D` with respect to the model sends `x` to `(τ_i(x))_i`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceModel {
    pub traces: Vec<TraceFunctional>,
}

impl TraceModel {
    pub fn new(traces: Vec<TraceFunctional>) -> Result<Self, TraceError> {
        if traces.is_empty() {
            return Err(TraceError::Empty);
        }
        Ok(TraceModel { traces })
    }

    /// All extreme traces of one stage: `D` at that stage is the plain dimension map.
    pub fn extreme(system: &InductiveSystem, stage: usize) -> Self {
        TraceModel { traces: (0..system.rank(stage)).map(|j| TraceFunctional::extreme(system, stage, j)).collect() }
    }

    /// The trace `x ↦ Σ_j x_j / (k·[m,j])` at the last stage, which for
    /// [`default_realization_system`](super::default_realization_system) is the unique trace of the limit.
    pub fn uniform(system: &InductiveSystem) -> Self {
        let m = system.nstages() - 1;
        let k = system.rank(m);
        let weights = system.unit(m).iter().map(|u| Rat::new(1.into(), u * Int::from(k))).collect();
        TraceModel { traces: vec![TraceFunctional { stage: m, weights }] }
    }

    pub fn len(&self) -> usize {
        self.traces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.traces.is_empty()
    }

    /// The stage at which the model is defined (the deepest stage it can evaluate).
    pub fn stage(&self) -> usize {
        self.traces.iter().map(|t| t.stage).min().unwrap_or(0)
    }

    /// `D` on `ℤ^{k_n}` as an `r × k_n` rational matrix.
    pub fn d_matrix(&self, system: &InductiveSystem, stage: usize) -> Result<RatMatrix, TraceError> {
        let k = system.rank(stage);
        let mut m = RatMatrix::zeros(self.traces.len(), k);
        for (i, t) in self.traces.iter().enumerate() {
            if stage > t.stage {
                return Err(TraceError::TooDeep { vector: stage, trace: t.stage });
            }
            let w = t.pull_back(system, stage)?;
            for (j, x) in w.weights.into_iter().enumerate() {
                m[(i, j)] = x;
            }
        }
        Ok(m)
    }

    pub fn evaluate(&self, system: &InductiveSystem, x: &StageVector) -> Result<Vec<Rat>, TraceError> {
        self.traces.iter().map(|t| t.eval(system, x)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dimgrp::system::default_realization_system;
    use crate::zmod::{ints, rat};

    #[test]
    fn uniform_trace_is_consistent_across_stages() {
        let s = default_realization_system(5);
        let model = TraceModel::uniform(&s);
        for n in 0..5 {
            let d = model.d_matrix(&s, n).unwrap();
            let u = s.unit(n);
            // D([1]) = 1 and the weights stay proportional to (1,1)
            assert_eq!(d.mul_int_vec(u), vec![rat(1, 1)]);
            assert_eq!(d[(0, 0)], d[(0, 1)]);
        }
    }

    #[test]
    fn trace_validation() {
        let s = default_realization_system(3);
        assert!(TraceFunctional::new(&s, 0, vec![rat(1, 2), rat(1, 2)]).is_ok());
        assert!(TraceFunctional::new(&s, 0, vec![rat(1, 1), rat(1, 2)]).is_err());
        assert!(TraceFunctional::new(&s, 0, vec![rat(3, 2), rat(-1, 2)]).is_err());
        let t = TraceFunctional::extreme(&s, 2, 1);
        assert_eq!(t.eval(&s, &StageVector::new(2, s.unit(2).to_vec())).unwrap(), rat(1, 1));
        assert_eq!(t.eval(&s, &StageVector::new(0, ints(&[1, 1]))).unwrap(), rat(1, 1));
    }
}
