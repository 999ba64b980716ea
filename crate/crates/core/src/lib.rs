//! Mass integrals `m_k` of the metrics `e^{-2u} delta` on `R^n \ Omega`,
//! with the curvature algebra and boundary geometry behind them.
//!
//! The crate is organised bottom-up:
//!
//! * [`symfun`] - elementary symmetric functions, Newton tensors, Garding cones.
//! * [`tensor`] - generalized Kronecker deltas, `L_k` and `P_(k)` contractions.
//! * [`profile`] - conformal factors: radial expressions, Taylor jets, built-in fields.
//! * [`confgeom`] - pointwise curvature of `e^{-2u} delta`.
//! * [`quadrature`] - sphere grids, surface integrals and radial extrapolation.
//! * [`mass`] - the three mass evaluators and the positive-mass lower bound.
//! * [`horizon`] - boundary geometry and Penrose-type inequality checks.
//! * [`verify`] - seeded property suites used by `gbc verify`.

pub mod confgeom;
pub mod error;
pub mod horizon;
pub mod mass;
pub mod profile;
pub mod quadrature;
pub mod report;
pub mod symfun;
pub mod tensor;
pub mod verify;

pub use error::{Error, Result};
