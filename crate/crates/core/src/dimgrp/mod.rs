//! Dimension groups: inductive systems of lattices, traces, the dimension map `D`
//! and approximation in `Range D`.

pub mod approx;
pub mod system;
pub mod trace;

pub use approx::{approx_in_range_d, approx_in_range_d_model, ApproxError};
pub use system::{
    default_realization_system, growth_slack, make_admissible_system, AffElement, InductiveSystem, Parity, StageVector, SystemError,
};
pub use trace::{TraceError, TraceFunctional, TraceModel};
