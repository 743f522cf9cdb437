//! Robustness analysis of gate-model quantum circuits against coherent
//! control errors.
//!
//! A coherent control error perturbs a gate `U = exp(-iH)` into
//! `U(eps) = exp(-i(1+eps)H)`, modeling over- or under-rotation caused by
//! imperfect classical control. This crate computes analytic worst-case
//! fidelity bounds for such errors (norm-based and pair-wise Lipschitz
//! bounds, phase-optimized Hamiltonian norms, diamond-distance bounds) and
//! validates them empirically with a dense state-vector simulator,
//! single-qubit state tomography, and a small regularized variational
//! training lab.
//!
//! The main entry points are:
//! * [`circuit::Circuit`] — circuit data model with JSON (de)serialization,
//! * [`bounds::full_report`] — all analytic robustness quantities at once,
//! * [`sim::monte_carlo`] — sampled fidelity statistics under noise,
//! * [`tomography::validation_sweep`] — simulated hardware-style validation,
//! * [`vqa::regularization_study`] — regularized variational training.

pub mod bounds;
pub mod circuit;
pub mod error;
pub mod gates;
pub mod numerics;
pub mod presets;
pub mod qft;
pub mod rng;
pub mod sim;
pub mod tomography;
pub mod vqa;

pub use error::Error;
pub type Result<T> = std::result::Result<T, Error>;
