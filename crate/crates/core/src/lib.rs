//! Quantum-graph vertex couplings whose boundary-condition matrix `U` has
//! at most two eigenvalues.
//!
//! The crate builds such couplings (classical permutation-symmetric ones,
//! or from a spectral form `(α, β, M)`), evaluates their scattering
//! matrices `S(k)`, classifies them into scattering types, and designs
//! equally-transmitting couplings with a prescribed ratio of reflection to
//! transmission probability.

#![allow(clippy::needless_range_loop)]

pub mod classify;
pub mod coupling;
pub mod error;
pub mod mps;
pub mod numkernel;
pub mod random;
pub mod scattering;

pub use classify::{classify, CInterval, CouplingClass, RhoCurve};
pub use coupling::{decompose, ClassicalKind, TwoEigSpectralForm, VertexCoupling};
pub use error::{Error, Result};
pub use mps::MpsProfile;
pub use numkernel::{ComplexMatrix, ComplexScalar, Tolerance};
pub use scattering::{MuNu, ScatteringResult};
