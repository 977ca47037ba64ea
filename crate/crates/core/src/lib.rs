//! Simulation, Gaussian analytics and parameter estimation for the
//! one-compartment intravenous-bolus pharmacokinetic model driven by
//! fractional Brownian motion.
//!
//! The concentration is `C_t = |C0^{1-β} + σ B^H_t(θ)|^{γ+1} e^{-υt}` with
//! `θ_t = (1-β) e^{υ(1-β)t}` and `γ = β/(1-β)`; `X = C^{1-β}` (signed) is a
//! fractional Ornstein–Uhlenbeck process with drift rate `υ(1-β)`.

// `!(x > 0.0)` style guards reject NaN along with out-of-range values, and
// published approximation coefficients are kept digit for digit.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

pub mod analytics;
pub mod commands;
pub mod error;
pub mod estimation;
pub mod fbm;
pub mod grid;
pub mod io;
pub mod linalg;
pub mod model;
pub mod noise;
pub mod procedure;
pub mod quadrature;

pub use error::{Error, Result};
pub use fbm::{fbm_covariance, FbmSampler, GeneratorKind, Hurst};
pub use model::{ModelParams, ProcessBundle};
pub use grid::{SamplePath, TimeGrid};
pub use noise::Seed;
