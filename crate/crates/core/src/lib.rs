// SPDX-License-Identifier: Apache-2.0

//! Entanglement generation and transport in chains of coupled quantum
//! harmonic oscillators, simulated on Gaussian covariance matrices.
//!
//! The chain starts uncoupled in its ground state (or in equilibrium with
//! local Ohmic baths), the nearest-neighbour coupling is switched on suddenly
//! or over a linear ramp, and the logarithmic negativity between two sites is
//! tracked in time.

// `!(x <= tol)` is used on purpose so that NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod decoherence;
pub mod dynamics;
pub mod entanglement;
pub mod error;
pub mod experiments;
pub mod gaussian;
pub mod io;
pub mod lattice;
pub mod linalg;
pub mod units;

pub use error::{Error, Result};
