// Indexed loops stay as written where several arrays share the index, the
// negated comparisons deliberately route NaN into the error branch, and the
// quadrature/gamma coefficient tables keep their published digits.
#![allow(clippy::needless_range_loop)]
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::excessive_precision)]

//! Desk-scale machinery for Volterra equations of scalar type
//! `u(t) = u_0 + int_0^t a(t-s) A u(s) ds + L(t)`:
//!
//! - [`kernels`]: scalar kernels with analytic Laplace data, sampled sector
//!   certification, and the shifted-kernel solve.
//! - [`resolvent`]: scalar and operator resolvent tables (direct convolution
//!   quadrature and eigen-decomposition routes), Laplace-domain bound checks,
//!   discrete defects, and a 1-D elliptic operator builder.
//! - [`positivity`]: Gram-matrix positive-definiteness checks for operator
//!   families and the Fourier nonnegativity test for the scalar symbol.
//! - [`stochastic`]: cadlag martingale simulation, the stochastic convolution
//!   `S(t) u_0 + int_0^t S(t-s) dL(s)`, and pathwise diagnostics.
//! - [`config`]: the JSON experiment schema shared with the CLI.

pub mod config;
pub mod error;
pub mod grid;
pub mod kernels;
pub mod linalg;
pub mod positivity;
pub mod quad;
pub mod resolvent;
pub mod stochastic;

pub use error::{CoreError, Result};
pub use grid::TimeGrid;
