//! Numerical unitaries on sampled grids: Bott elements, winding pairs, rotation
//! numbers of paths and the path combinators.

pub mod bott;
pub mod path;
pub mod sample;
mod sparse;

pub use bott::{bott, bott_homotopy_scan, bott_over_loop, eigenvalues, make_winding_pair, winding_norm_check, BottValue, HomotopyScan, NormCheck};
pub use path::{conjugation_sandwich, path_product, rotation_number, zeta_path, MatrixTrace, RotationValue};
pub use sample::{
    unitarity_defect, CMatrix, LoopFrames, UnitaryError, UnitaryLoop, UnitaryPath, UnitarySample, WindingBlock, DEFAULT_CIRCLE_GRID,
    DEFAULT_GAP, DEFAULT_TIME_GRID, DEFAULT_UNITARITY_TOL,
};
