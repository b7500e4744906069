//! The realization pipeline: certificates for `φ ∈ Hom(K_1, Aff)` along a telescoped
//! system, the `ker Q` resolution, and the rotation-algebra classifier.

pub mod certificate;
pub mod kerq;
pub mod phi;
pub mod rotation;

pub use certificate::{realize_phi, telescoping_check, verify_certificate, RealizationCertificate, StageSlack, TelescopingReport};
pub use kerq::{ker_q_resolution, rotation_algebra_ambient, AffModel, KerQReport, KernelWitness};
pub use phi::PhiSpec;
pub use rotation::{classify_rotation_algebra, golden_conjugate, NearestPoint, RotationAlgebraModel, RotationClassification, RotationVerdict};

use crate::dimgrp::{ApproxError, SystemError, TraceError};
use crate::orderext::CocycleError;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RealizeError {
    #[error("construction stops at stage {stage} (original stage {source_stage}): {detail}")]
    DepthExhausted { stage: usize, source_stage: usize, detail: String },
    #[error("{0}")]
    Precondition(String),
    #[error("certificate check failed: {0}")]
    CertificateInvalid(String),
    #[error("insufficient precision: {0}")]
    PrecisionInsufficient(String),
    #[error(transparent)]
    System(#[from] SystemError),
    #[error(transparent)]
    Trace(#[from] TraceError),
    #[error(transparent)]
    Approx(#[from] ApproxError),
    #[error(transparent)]
    Cocycle(#[from] CocycleError),
}
