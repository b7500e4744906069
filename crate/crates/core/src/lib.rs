//! Ordered K-theory extension invariants at desk scale.
//!
//! Finitely generated `Hom`/`Ext`, orderextensions with rotation data and their
//! Baer sums, dimension groups of inductive systems, Bott elements and rotation
//! numbers of sampled unitaries, stage-wise realization certificates, and the
//! lattice classifier for irrational rotation algebras.

pub mod zmod;
pub mod dimgrp;
pub mod orderext;
pub mod unitary;
pub mod realize;
pub mod cli;
