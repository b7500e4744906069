//! Orderextensions: extensions of finitely generated groups carrying a rotation map
//! compatible with the dimension map, and stage-wise cocycles along inductive systems.

pub mod cocycle;
pub mod oext;

pub use cocycle::{
    assemble_stage_extension, solve_cocycle, solve_cocycle_k1, verify_cochain, CochainSequence, CocycleError,
    CocycleSequence, StageExtension,
};
pub use oext::{
    baer_sum, kernel_sequence, oext_inverse, oext_is_isomorphic, oext_is_trivial, verify_isomorphism, Ambient,
    IsoDecision, OExtError, OrderExtension, TrivialityReport,
};
