//! Inductive systems `ℤ^{k_0} → ℤ^{k_1} → …` with the unit class and the dimension map.

use num_traits::{One, Signed, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::zmod::matrix::int_repr;
use crate::zmod::{Int, IntMatrix, Rat};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SystemError {
    #[error("stage {stage} out of range (system has {available} stages)")]
    StageOutOfRange { stage: usize, available: usize },
    #[error("target stage {to} precedes source stage {from}")]
    Backwards { from: usize, to: usize },
    #[error("map {index} for parity {parity} has shape {rows}x{cols}, expected {er}x{ec}")]
    Shape { index: usize, parity: u8, rows: usize, cols: usize, er: usize, ec: usize },
    #[error("chi^0 at index {0} has a non-positive entry")]
    NonPositive(usize),
    #[error("unit at stage {0} is inconsistent with chi^0")]
    UnitMismatch(usize),
    #[error("vector of length {len} at stage {stage}, expected {expected}")]
    VectorLength { stage: usize, len: usize, expected: usize },
    #[error("growth condition cannot be met before stage {0}; the seed has too few stages or chi^1 grows as fast as chi^0")]
    GrowthUnattainable(usize),
    #[error("system needs at least one stage")]
    Empty,
}

/// Which K-group a vector or map belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Parity {
    K0,
    K1,
}

/// Lattices `ℤ^{k_n}` with connecting maps `χ_n⁰` (entrywise positive) and `χ_n¹`,
/// and the class of the unit `([n,i])_i` at every stage.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InductiveSystem {
    stages: Vec<usize>,
    maps0: Vec<IntMatrix>,
    maps1: Vec<IntMatrix>,
    unit: Vec<Vec<Int>>,
}

/// An element of `ℤ^{k_n}` at stage `n`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StageVector {
    pub stage: usize,
    #[serde(serialize_with = "int_repr::serialize_vec", deserialize_with = "int_repr::deserialize_vec")]
    pub coords: Vec<Int>,
}

impl StageVector {
    pub fn new(stage: usize, coords: Vec<Int>) -> Self {
        StageVector { stage, coords }
    }
}

/// A function on the extreme traces of stage `m`, one value per summand.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AffElement {
    pub stage: usize,
    #[serde(
        serialize_with = "crate::zmod::matrix::rat_repr::serialize_vec",
        deserialize_with = "crate::zmod::matrix::rat_repr::deserialize_vec"
    )]
    pub values: Vec<Rat>,
}

impl AffElement {
    pub fn constant(stage: usize, rank: usize, value: Rat) -> Self {
        AffElement { stage, values: vec![value; rank] }
    }

    /// Restriction to the traces of a later stage. Each value at stage `m+1` is a
    /// convex combination of stage-`m` values with weights `χ(i,j)[m,j]/[m+1,i]`.
    pub fn push_forward(&self, system: &InductiveSystem, target: usize) -> Result<AffElement, SystemError> {
        system.check_range(self.stage, target)?;
        let mut v = self.values.clone();
        for m in self.stage..target {
            let chi = &system.maps0[m];
            let um = &system.unit[m];
            let un = &system.unit[m + 1];
            v = (0..chi.rows())
                .map(|i| {
                    let mut acc = Rat::zero();
                    for (j, vj) in v.iter().enumerate() {
                        acc += vj * Rat::from_integer(&chi[(i, j)] * &um[j]);
                    }
                    acc / Rat::from_integer(un[i].clone())
                })
                .collect();
        }
        Ok(AffElement { stage: target, values: v })
    }

    pub fn sup_norm(&self) -> Rat {
        self.values.iter().map(|x| x.abs()).max().unwrap_or_else(Rat::zero)
    }

    pub fn sub(&self, other: &AffElement) -> AffElement {
        assert_eq!(self.stage, other.stage, "stage mismatch");
        AffElement { stage: self.stage, values: self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect() }
    }
}

impl InductiveSystem {
    /// Builds a system from stage ranks, maps and the unit at stage 0; the unit at
    /// later stages is `unit_{n+1} = χ_n⁰·unit_n`.
    pub fn new(stages: Vec<usize>, maps0: Vec<IntMatrix>, maps1: Vec<IntMatrix>, unit0: Vec<Int>) -> Result<Self, SystemError> {
        if stages.is_empty() {
            return Err(SystemError::Empty);
        }
        let mut unit = vec![unit0];
        for (n, chi) in maps0.iter().enumerate() {
            if n + 1 >= stages.len() {
                break;
            }
            let next = chi.mul_vec(&unit[n]);
            unit.push(next);
        }
        Self::from_parts(stages, maps0, maps1, unit)
    }

    pub fn from_parts(
        stages: Vec<usize>,
        maps0: Vec<IntMatrix>,
        maps1: Vec<IntMatrix>,
        unit: Vec<Vec<Int>>,
    ) -> Result<Self, SystemError> {
        if stages.is_empty() {
            return Err(SystemError::Empty);
        }
        let nmaps = stages.len() - 1;
        for (parity, maps) in [(0u8, &maps0), (1u8, &maps1)] {
            if maps.len() != nmaps {
                return Err(SystemError::Shape { index: maps.len(), parity, rows: 0, cols: 0, er: 0, ec: 0 });
            }
            for (n, m) in maps.iter().enumerate() {
                if m.rows() != stages[n + 1] || m.cols() != stages[n] {
                    return Err(SystemError::Shape {
                        index: n,
                        parity,
                        rows: m.rows(),
                        cols: m.cols(),
                        er: stages[n + 1],
                        ec: stages[n],
                    });
                }
            }
        }
        for (n, m) in maps0.iter().enumerate() {
            if m.entries().iter().any(|x| !x.is_positive()) {
                return Err(SystemError::NonPositive(n));
            }
        }
        if unit.len() != stages.len() {
            return Err(SystemError::UnitMismatch(unit.len()));
        }
        for (n, u) in unit.iter().enumerate() {
            if u.len() != stages[n] {
                return Err(SystemError::VectorLength { stage: n, len: u.len(), expected: stages[n] });
            }
            if u.iter().any(|x| !x.is_positive()) {
                return Err(SystemError::UnitMismatch(n));
            }
            if n > 0 && maps0[n - 1].mul_vec(&unit[n - 1]) != *u {
                return Err(SystemError::UnitMismatch(n));
            }
        }
        Ok(InductiveSystem { stages, maps0, maps1, unit })
    }

    pub fn nstages(&self) -> usize {
        self.stages.len()
    }

    pub fn stages(&self) -> &[usize] {
        &self.stages
    }

    pub fn rank(&self, n: usize) -> usize {
        self.stages[n]
    }

    pub fn map(&self, parity: Parity, n: usize) -> &IntMatrix {
        match parity {
            Parity::K0 => &self.maps0[n],
            Parity::K1 => &self.maps1[n],
        }
    }

    pub fn maps0(&self) -> &[IntMatrix] {
        &self.maps0
    }

    pub fn maps1(&self) -> &[IntMatrix] {
        &self.maps1
    }

    /// `([n,i])_i`.
    pub fn unit(&self, n: usize) -> &[Int] {
        &self.unit[n]
    }

    /// `ℓ_n = max_i [n,i]`.
    pub fn ell(&self, n: usize) -> Int {
        self.unit[n].iter().max().cloned().unwrap_or_else(Int::one)
    }

    fn check_range(&self, source: usize, target: usize) -> Result<(), SystemError> {
        if target >= self.stages.len() {
            return Err(SystemError::StageOutOfRange { stage: target, available: self.stages.len() });
        }
        if target < source {
            return Err(SystemError::Backwards { from: source, to: target });
        }
        Ok(())
    }

    /// `χ_{target,source} = χ_{target-1} ⋯ χ_{source}` (identity when equal).
    pub fn composite(&self, parity: Parity, target: usize, source: usize) -> Result<IntMatrix, SystemError> {
        self.check_range(source, target)?;
        let mut m = IntMatrix::identity(self.stages[source]);
        for n in source..target {
            m = self.map(parity, n).mul(&m);
        }
        Ok(m)
    }

    pub fn push_forward(&self, x: &StageVector, target: usize, parity: Parity) -> Result<StageVector, SystemError> {
        self.check_vector(x)?;
        self.check_range(x.stage, target)?;
        let mut v = x.coords.clone();
        for n in x.stage..target {
            v = self.map(parity, n).mul_vec(&v);
        }
        Ok(StageVector { stage: target, coords: v })
    }

    pub fn check_vector(&self, x: &StageVector) -> Result<(), SystemError> {
        if x.stage >= self.stages.len() {
            return Err(SystemError::StageOutOfRange { stage: x.stage, available: self.stages.len() });
        }
        if x.coords.len() != self.stages[x.stage] {
            return Err(SystemError::VectorLength { stage: x.stage, len: x.coords.len(), expected: self.stages[x.stage] });
        }
        Ok(())
    }

    /// `D(a)` at the extreme traces of `eval_stage`: `(χ a)_j / [m,j]`.
    pub fn dimension_map(&self, a: &StageVector, eval_stage: usize) -> Result<AffElement, SystemError> {
        let p = self.push_forward(a, eval_stage, Parity::K0)?;
        let u = &self.unit[eval_stage];
        Ok(AffElement {
            stage: eval_stage,
            values: p.coords.iter().zip(u).map(|(x, d)| Rat::new(x.clone(), d.clone())).collect(),
        })
    }

    /// The system restricted to the stages `indices` (strictly increasing), with
    /// composite connecting maps. The limit groups are unchanged.
    pub fn telescope(&self, indices: &[usize]) -> Result<InductiveSystem, SystemError> {
        if indices.is_empty() {
            return Err(SystemError::Empty);
        }
        let mut maps0 = Vec::new();
        let mut maps1 = Vec::new();
        for w in indices.windows(2) {
            if w[1] <= w[0] {
                return Err(SystemError::Backwards { from: w[0], to: w[1] });
            }
            maps0.push(self.composite(Parity::K0, w[1], w[0])?);
            maps1.push(self.composite(Parity::K1, w[1], w[0])?);
        }
        let last = *indices.last().expect("nonempty");
        if last >= self.stages.len() {
            return Err(SystemError::StageOutOfRange { stage: last, available: self.stages.len() });
        }
        InductiveSystem::from_parts(
            indices.iter().map(|&i| self.stages[i]).collect(),
            maps0,
            maps1,
            indices.iter().map(|&i| self.unit[i].clone()).collect(),
        )
    }

    /// First `n` stages.
    pub fn truncate(&self, n: usize) -> InductiveSystem {
        let n = n.clamp(1, self.stages.len());
        InductiveSystem {
            stages: self.stages[..n].to_vec(),
            maps0: self.maps0[..n - 1].to_vec(),
            maps1: self.maps1[..n - 1].to_vec(),
            unit: self.unit[..n].to_vec(),
        }
    }

    /// Whether `χ_t⁰(i,j) ≥ 2^{t+2}·max(|χ_t¹(i,j)|, 1)` for every map `t < depth`
    /// (indices counted from zero).
    pub fn is_admissible(&self, depth: usize) -> bool {
        (0..depth.min(self.maps0.len())).all(|t| growth_holds(&self.maps0[t], &self.maps1[t], t))
    }
}

fn growth_holds(chi0: &IntMatrix, chi1: &IntMatrix, t: usize) -> bool {
    !growth_slack(chi0, chi1, t).is_negative()
}

/// `min_{i,j} χ⁰(i,j) − 2^{t+2}·max(|χ¹(i,j)|, 1)`; the growth condition at index `t`
/// holds when this is nonnegative.
pub fn growth_slack(chi0: &IntMatrix, chi1: &IntMatrix, t: usize) -> Int {
    let factor = num_traits::pow(Int::from(2), t + 2);
    chi0.entries()
        .iter()
        .zip(chi1.entries())
        .map(|(a, b)| {
            let m = if b.abs() > Int::one() { b.abs() } else { Int::one() };
            a - &factor * m
        })
        .min()
        .unwrap_or_default()
}

/// Telescopes `seed` until every one of the first `depth` composite maps meets the
/// growth condition, choosing each new stage as early as possible.
pub fn make_admissible_system(seed: &InductiveSystem, depth: usize) -> Result<InductiveSystem, SystemError> {
    let mut indices = vec![0usize];
    for t in 0..depth {
        let from = *indices.last().expect("nonempty");
        let mut found = None;
        for to in from + 1..seed.nstages() {
            let c0 = seed.composite(Parity::K0, to, from)?;
            let c1 = seed.composite(Parity::K1, to, from)?;
            if growth_holds(&c0, &c1, t) {
                found = Some(to);
                break;
            }
        }
        match found {
            Some(to) => indices.push(to),
            None => return Err(SystemError::GrowthUnattainable(from)),
        }
    }
    seed.telescope(&indices)
}

/// The system used for desk runs of the realization pipeline:
/// `k_s = 2`, `χ_s⁰ = 2^{s+2}·[[3,2],[2,3]]`, `χ_s¹ = [[1,-1],[1,0]]`, unit `(1,1)`.
/// Its limit has a unique trace, `K_1 ≅ ℤ²`, and the growth condition holds with
/// strictly positive slack at every index.
pub fn default_realization_system(stages: usize) -> InductiveSystem {
    let maps0: Vec<IntMatrix> = (0..stages.saturating_sub(1))
        .map(|s| IntMatrix::from_rows(&[[3, 2], [2, 3]]).scale(&num_traits::pow(Int::from(2), s + 2)))
        .collect();
    let maps1 = vec![IntMatrix::from_rows(&[[1, -1], [1, 0]]); stages.saturating_sub(1)];
    InductiveSystem::new(vec![2; stages.max(1)], maps0, maps1, vec![Int::one(), Int::one()])
        .expect("default system is well formed")
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum UnitWire {
    PerStage(Vec<Vec<int_repr::IntRepr>>),
    Initial(Vec<int_repr::IntRepr>),
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SystemWire {
    stages: Vec<usize>,
    maps0: Vec<IntMatrix>,
    maps1: Vec<IntMatrix>,
    unit: UnitWire,
}

impl Serialize for InductiveSystem {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        SystemWire {
            stages: self.stages.clone(),
            maps0: self.maps0.clone(),
            maps1: self.maps1.clone(),
            unit: UnitWire::PerStage(self.unit.iter().map(|u| u.iter().map(int_repr::IntRepr::from).collect()).collect()),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for InductiveSystem {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let w = SystemWire::deserialize(d)?;
        let conv = |v: Vec<int_repr::IntRepr>| v.into_iter().map(|x| x.into_int::<D::Error>()).collect::<Result<Vec<_>, _>>();
        match w.unit {
            UnitWire::Initial(u0) => InductiveSystem::new(w.stages, w.maps0, w.maps1, conv(u0)?),
            UnitWire::PerStage(us) => {
                let unit = us.into_iter().map(conv).collect::<Result<Vec<_>, _>>()?;
                InductiveSystem::from_parts(w.stages, w.maps0, w.maps1, unit)
            }
        }
        .map_err(D::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zmod::{int, ints, rat};

    fn doubling(n: usize) -> InductiveSystem {
        InductiveSystem::new(
            vec![1; n],
            vec![IntMatrix::from_rows(&[[2]]); n - 1],
            vec![IntMatrix::from_rows(&[[1]]); n - 1],
            ints(&[1]),
        )
        .unwrap()
    }

    #[test]
    fn push_forward_and_dimension_map() {
        let s = default_realization_system(4);
        let x = StageVector::new(1, ints(&[1, 0]));
        assert_eq!(s.push_forward(&x, 1, Parity::K0).unwrap(), x);
        let one = s.push_forward(&x, 2, Parity::K0).unwrap();
        assert_eq!(one.coords, s.maps0()[1].column(0));
        let d = s.dimension_map(&StageVector::new(1, s.unit(1).to_vec()), 3).unwrap();
        assert!(d.values.iter().all(|v| *v == rat(1, 1)));
        let d = s.dimension_map(&x, 1).unwrap();
        assert_eq!(d.values, vec![Rat::new(int(1), s.unit(1)[0].clone()), rat(0, 1)]);
    }

    #[test]
    fn aff_push_forward_commutes_with_d() {
        let s = default_realization_system(5);
        let a = StageVector::new(0, ints(&[3, -7]));
        let d0 = s.dimension_map(&a, 1).unwrap();
        assert_eq!(d0.push_forward(&s, 4).unwrap(), s.dimension_map(&a, 4).unwrap());
    }

    #[test]
    fn admissible_telescoping_of_doubling() {
        let seed = doubling(20);
        let adm = make_admissible_system(&seed, 4).unwrap();
        assert!(adm.is_admissible(4));
        // χ⁰ entries are the powers 2^{t+2}
        let powers: Vec<Int> = adm.maps0().iter().map(|m| m[(0, 0)].clone()).collect();
        assert_eq!(powers, ints(&[4, 8, 16, 32]));
        assert_eq!(make_admissible_system(&adm, 4).unwrap(), adm);
    }

    #[test]
    fn growth_failure_is_reported() {
        let seed =
            InductiveSystem::new(vec![1; 6], vec![IntMatrix::from_rows(&[[2]]); 5], vec![IntMatrix::from_rows(&[[2]]); 5], ints(&[1]))
                .unwrap();
        assert!(matches!(make_admissible_system(&seed, 2), Err(SystemError::GrowthUnattainable(_))));
    }

    #[test]
    fn json_accepts_initial_unit() {
        let s: InductiveSystem = serde_json::from_str(
            r#"{"stages":[1,1],"maps0":[{"rows":1,"cols":1,"entries":[3]}],"maps1":[{"rows":1,"cols":1,"entries":[1]}],"unit":[2]}"#,
        )
        .unwrap();
        assert_eq!(s.unit(1), &ints(&[6])[..]);
        let back: InductiveSystem = serde_json::from_str(&serde_json::to_string(&s).unwrap()).unwrap();
        assert_eq!(back, s);
    }
}
