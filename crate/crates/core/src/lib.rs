//! Vector approximate message passing (VAMP) with plug-in, possibly
//! non-separable denoisers.
//!
//! The crate is organised around the pieces of a VAMP experiment:
//!
//! - [`operators`]: measurement operators held in SVD form `A = U diag(s) Vᵀ`,
//!   Haar orthogonal factors, geometric spectra, the fast `J·P·H·D` operator,
//!   the 2-D Haar wavelet and PGM image I/O.
//! - [`denoisers`]: the denoiser families behind one contract, with analytic
//!   or Monte Carlo divergences.
//! - [`vamp`]: the two-block VAMP iteration and its LMMSE half.
//! - [`amp`]: the AMP baseline with Onsager correction.
//! - [`state_evolution`]: the scalar recursion predicting VAMP's per-iteration
//!   MSE, plus the generalized recursion harness.
//! - [`lifting`]: bilinear problems rewritten as linear problems in
//!   `vec(c bᵀ)`.

pub mod amp;
pub mod denoisers;
mod error;
pub mod lifting;
pub mod linalg;
pub mod operators;
pub mod rng;
pub mod state_evolution;
pub mod stats;
pub mod vamp;

pub use error::{Error, Result};

/// Converts a (non-negative) ratio to decibels with a floor of `-300 dB`.
pub fn to_db(ratio: f64) -> f64 {
    if ratio <= 1e-30 {
        -300.0
    } else {
        10.0 * ratio.log10()
    }
}
