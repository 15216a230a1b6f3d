//! Stability laboratory for explicit finite-difference transport schemes on
//! the half-line with numerical boundary conditions.
//!
//! The modules follow the computation from the scheme record down to the
//! boundary layers:
//!
//! - [`scheme`]: coefficients, the symbol `F`, the small-`t` expansion of `log F(e^{it})`.
//! - [`evolution`]: time stepping, temporal Green's functions, norm growth.
//! - [`spectral`]: companion matrix, Lopatinskii determinant, projectors.
//! - [`greens`]: generalized Gaussians, boundary layers, the remainder `Err`.
//! - [`resolvent`]: spatial Green's functions and inverse-Laplace reconstruction.

pub mod error;
pub mod evolution;
pub mod greens;
pub mod poly;
pub mod resolvent;
pub mod scheme;
pub mod spectral;

pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use scheme::SchemeDefinition;
