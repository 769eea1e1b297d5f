//! Nevanlinna-Pick interpolation toolkit.
//!
//! * [`numerics`]: subspaces, spectral norms, positivity verdicts.
//! * [`kernels`]: Szegő, Bergman, Drury-Arveson and weighted Bergman kernels.
//! * [`pick`]: scalar, block, family and multiplicity Pick matrices.
//! * [`schur`]: classical interpolation on the disk by Schur's recursion.
//! * [`constrained_hardy`]: the `H∞₁` kernel family and parameter sweeps.
//! * [`npc`]: the complete Nevanlinna-Pick test and Drury-Arveson embedding.
//! * [`finite_algebra`]: idempotent algebras, their lattices, and both sides
//!   of the distance formula.
//! * [`search`]: seeded search for distance-formula violations.
//! * [`cli`]: JSON problem files and reports.

pub mod bfgs;
pub mod cli;
pub mod constrained_hardy;
pub mod error;
pub mod finite_algebra;
pub mod io;
pub mod kernels;
pub mod npc;
pub mod numerics;
pub mod pick;
pub mod schur;
pub mod search;
pub mod simplex;

pub use error::{NpError, Result};
pub use numerics::{CMatrix, CVector, HermitianMatrix, PsdVerdict, Subspace, C64};
