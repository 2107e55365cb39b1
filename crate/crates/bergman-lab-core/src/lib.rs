//! Numerical laboratory for the Bergman-type operators
//!
//! ```text
//! K_α f(z)  = ∫ f(w) / (1 − ⟨z,w⟩)^α   dv(w)
//! K_α⁺ f(z) = ∫ f(w) / |1 − ⟨z,w⟩|^α   dv(w)
//! ```
//!
//! on the unit ball of ℂ^d with normalized volume measure `dv`.
//!
//! The crate is `no_std` (with `alloc`). Enabling the `std` feature lets
//! Monte Carlo estimators spread their chunks over scoped threads; results
//! are bit-identical either way because the chunking is fixed.
#![no_std]
// NaN must fail every range check, and quadrature nodes keep their published digits
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

extern crate alloc;
#[cfg(feature = "std")]
extern crate std;

pub mod ball_measure;
pub mod classifier;
mod error;
mod fft;
pub mod hls_verifier;
pub mod kernel_integrals;
pub mod norm_bounds;
pub mod operator_engine;
pub mod par;
pub mod special_fn;

pub use error::{Error, Result};
pub use kernel_integrals::Params;
