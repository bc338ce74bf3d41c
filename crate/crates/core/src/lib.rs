//! Joint detection probabilities of down-converted photon pairs in
//! Hermite-Gaussian modes after free-space propagation through weak
//! atmospheric turbulence.
//!
//! The probability factorises over the two transverse axes,
//! P(HG_{m_s n_s}, HG_{m_i n_i}) = Π(m_s, m_i) Π(n_s, n_i), with Π given in
//! closed form by the 𝓕 and 𝓚 kernels in [`engine`]. [`channel`] turns the
//! link geometry and turbulence level into the constants those kernels use,
//! and [`oracle`] checks the vacuum limit by direct quadrature.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod cli;
pub mod engine;
pub mod error;
pub mod golden;
pub mod oracle;
pub mod specfun;
pub mod sum;
pub mod validate;

pub use channel::{DerivedConstants, OpticalConfig, Turbulence, TurbulenceSpec, WaistConvention};
pub use engine::{Engine, ModeIndex, ModePair, Normalization, ProbabilityMatrix};
pub use error::{Error, Result};
