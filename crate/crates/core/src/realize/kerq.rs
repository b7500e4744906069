//! `Hom(G₁, ker D) → Hom(G₁, G₀) → Hom(G₁, Aff)` and the quotient
//! `Hom(G₁, Aff) / D∘Hom(G₁, G₀)` that models `ker Q`.
//!
//! `Aff` is modelled by formal coordinates `ℚ^r` in which `D` is a rational matrix,
//! optionally followed by a real embedding `ℚ^r → ℝ^s` (for the rotation algebra,
//! `D = I` in the basis `(1, θ)` and the embedding is `[1, θ]`).

use serde::{Deserialize, Serialize};

use super::RealizeError;
use crate::zmod::{hom_group, integer_kernel, FGAbelianGroup, GroupHom, Int, IntMatrix, RatMatrix};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AffModel {
    pub g0: FGAbelianGroup,
    pub g1: FGAbelianGroup,
    /// `r × n₀`: `D` on the generators of `G₀`.
    pub d: RatMatrix,
    /// `s × r` real embedding of the formal coordinates.
    #[serde(default)]
    pub embedding: Option<Vec<Vec<f64>>>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KernelWitness {
    /// Coordinates of the homomorphism in the `Hom(G₁, G₀)` basis.
    pub hom_coords: Vec<Int>,
    /// The factorization through `ker D` on the generators of `G₁`.
    pub preimage: IntMatrix,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KerQReport {
    pub ker_d: String,
    pub hom_g1_ker_d: String,
    pub hom_g1_g0: String,
    /// `r·rank(G₁)`; torsion of `G₁` contributes nothing.
    pub hom_g1_aff_dim: usize,
    pub torsion_killed: bool,
    pub inclusion_injective: bool,
    pub image_in_kernel: bool,
    pub kernel_witnesses: Vec<KernelWitness>,
    pub exact: bool,
    /// `D∘b` for each basis element `b` of `Hom(G₁, G₀)`, as an `r × rank(G₁)` matrix
    /// of values on the free canonical generators of `G₁`.
    pub lattice: Vec<RatMatrix>,
    /// The same generators after the embedding, flattened per free generator.
    pub real_lattice: Option<Vec<Vec<f64>>>,
    pub quotient: String,
}

fn describe_lattice_rank(lattice: &[RatMatrix]) -> usize {
    if lattice.is_empty() {
        return 0;
    }
    let cols: Vec<Vec<crate::zmod::Rat>> = lattice.iter().map(|m| m.entries().to_vec()).collect();
    let (cleared, _) = RatMatrix::from_columns(cols[0].len(), &cols).clear_denominators();
    crate::zmod::snf::rank(&cleared)
}

pub fn ker_q_resolution(model: &AffModel) -> Result<KerQReport, RealizeError> {
    let (g0, g1, d) = (&model.g0, &model.g1, &model.d);
    if d.cols() != g0.ngens() {
        return Err(RealizeError::Precondition("D must have one column per generator of G0".into()));
    }
    let (dm, _) = d.clear_denominators();
    if !dm.mul(&g0.presentation().transpose()).is_zero() {
        return Err(RealizeError::Precondition("D does not vanish on the relations of G0".into()));
    }
    let r = d.rows();
    // ker D as a subgroup of G0
    let kgens = integer_kernel(&dm);
    let kgroup = g0.subgroup_quotient(&kgens, &[]).ok_or_else(|| RealizeError::Precondition("ker D".into()))?;
    let incl = GroupHom::new(kgroup.clone(), g0.clone(), kgens.clone()).map_err(|e| RealizeError::Precondition(e.to_string()))?;
    let inclusion_injective = incl.is_injective();

    let free: Vec<usize> = g1.canonical_orders().iter().enumerate().filter(|(_, o)| o == &&Int::from(0)).map(|(i, _)| i).collect();
    let torsion_killed = g1.canonical_orders().len() > free.len();
    let values = |h: &GroupHom| -> RatMatrix {
        let cols: Vec<Vec<crate::zmod::Rat>> = free.iter().map(|&i| d.mul_int_vec(&h.apply(&g1.canonical_generator(i)))).collect();
        RatMatrix::from_columns(r, &cols)
    };

    let hom_k = hom_group(g1, &kgroup);
    let image_in_kernel = hom_k.basis.iter().all(|b| values(&incl.compose_after(b)).is_zero());

    let hom0 = hom_group(g1, g0);
    let lattice: Vec<RatMatrix> = hom0.basis.iter().map(&values).collect();
    // kernel of t ↦ Σ t_k D∘b_k
    let flat: Vec<Vec<crate::zmod::Rat>> = lattice.iter().map(|m| m.entries().to_vec()).collect();
    let rows = r * free.len();
    let mut kernel_witnesses = Vec::new();
    let mut witnesses_ok = true;
    if !hom0.basis.is_empty() {
        let kernel = if rows == 0 {
            IntMatrix::identity(hom0.basis.len())
        } else {
            integer_kernel(&RatMatrix::from_columns(rows, &flat).clear_denominators().0)
        };
        for t in kernel.column_vectors() {
            let h = hom0.combination(&t);
            let cols: Option<Vec<Vec<Int>>> =
                (0..g1.ngens()).map(|j| g0.express_in(&kgens, &h.apply(&g1.unit_vector(j)))).collect();
            let Some(cols) = cols else {
                witnesses_ok = false;
                continue;
            };
            let pre = IntMatrix::from_columns(kgroup.ngens(), &cols);
            match GroupHom::new(g1.clone(), kgroup.clone(), pre.clone()) {
                Ok(hk) if incl.compose_after(&hk).equals(&h) => kernel_witnesses.push(KernelWitness { hom_coords: t, preimage: pre }),
                _ => witnesses_ok = false,
            }
        }
    }
    let real_lattice = model.embedding.as_ref().map(|emb| {
        lattice
            .iter()
            .map(|m| {
                (0..m.cols())
                    .flat_map(|j| {
                        let col = m.column(j);
                        emb.iter()
                            .map(move |row| row.iter().zip(&col).map(|(e, x)| e * num_traits::ToPrimitive::to_f64(x).unwrap_or(f64::NAN)).sum())
                            .collect::<Vec<f64>>()
                    })
                    .collect()
            })
            .collect()
    });
    let ambient_dim = model.embedding.as_ref().map_or(r, Vec::len) * free.len();
    let field = if model.embedding.is_some() { "R" } else { "Q" };
    let quotient = format!("{field}^{ambient_dim} / lattice of rank {} on {} generators", describe_lattice_rank(&lattice), lattice.len());
    Ok(KerQReport {
        ker_d: kgroup.describe(),
        hom_g1_ker_d: hom_k.group.describe(),
        hom_g1_g0: hom0.group.describe(),
        hom_g1_aff_dim: r * free.len(),
        torsion_killed,
        inclusion_injective,
        image_in_kernel,
        exact: inclusion_injective && image_in_kernel && witnesses_ok,
        kernel_witnesses,
        lattice,
        real_lattice,
        quotient,
    })
}

/// `G₀ = G₁ = ℤ²`, `D(a, b) = a + bθ` in formal coordinates `(1, θ)`.
pub fn rotation_algebra_ambient(theta: f64) -> AffModel {
    AffModel {
        g0: FGAbelianGroup::free(2),
        g1: FGAbelianGroup::free(2),
        d: IntMatrix::identity(2).to_rat(),
        embedding: Some(vec![vec![1.0, theta]]),
    }
}
