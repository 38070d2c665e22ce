//! Certification, construction, numerical search and dynamical preparation of
//! maximally entangled pure states.
//!
//! A pure state on a tensor product of finite-dimensional factors is called
//! maximally entangled when every local generator of the factors' symmetry
//! algebras has vanishing expectation value, i.e. every local measurement is
//! maximally uncertain. The crate provides
//!
//! - [`tensor`]: composite spaces, state vectors, density matrices, partial
//!   traces, entropies and coefficient-tensor slices;
//! - [`generators`]: Pauli, spin-`s` and generalized Gell-Mann generator sets;
//! - [`measurement`]: expectations and variances of local observables;
//! - [`certify`]: the generator, slice and marginal criteria;
//! - [`catalog`]: named maximally entangled states and parameter families;
//! - [`solver`]: sphere-constrained descent on the total squared expectation;
//! - [`lambda`]: a Lindblad simulation of two Λ-atoms in a two-mode cavity
//!   that relaxes into a long-lived entangled atomic state.

// `!(x <= limit)` is deliberate throughout: NaN must fail every check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod catalog;
pub mod certify;
mod error;
pub mod generators;
pub mod lambda;
pub mod measurement;
pub mod random;
pub mod solver;
pub mod tensor;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;

pub use catalog::CatalogEntry;
pub use certify::{CertReport, SliceReport};
pub use generators::{GeneratorKind, GeneratorSet};
pub use lambda::{SimConfig, Trajectory};
pub use measurement::LocalExpectations;
pub use solver::{SolveOptions, SolveResult};
pub use tensor::{CompositeSpace, DensityMatrix, SliceFamily, StateVector};
