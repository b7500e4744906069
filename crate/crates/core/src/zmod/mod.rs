//! Exact integer linear algebra and finitely generated abelian groups.

pub mod extension;
pub mod group;
pub mod homext;
pub mod matrix;
pub mod snf;

pub use extension::{ExactnessError, ExtensionPresentation};
pub use group::{FGAbelianGroup, GroupHom, HomError};
pub use homext::{ext_group, hom_group, ExtGroup, ExtSummand, HomGroup, HomSummand};
pub use matrix::{format_rat, int, ints, parse_rat, rat, Int, IntMatrix, Rat, RatMatrix};
pub use snf::{integer_kernel, invariant_factors, smith_decomposition, smith_normal_form, solve_linear, solve_rational, SmithDecomposition};
