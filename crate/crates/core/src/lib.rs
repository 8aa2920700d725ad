//! Stochastic collocation under correlated Gaussian-mixture inputs.
//!
//! The pipeline builds an orthonormal polynomial basis for the mixture from
//! exact moments, computes a quadrature rule with nonnegative weights by
//! block coordinate descent on the exactness residual, and projects a
//! black-box model onto the basis to get a polynomial surrogate.

// Negated float comparisons are used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod basis;
pub mod collocation;
pub mod distribution;
pub mod error;
pub mod io;
pub mod multi_index;
pub mod pipeline;
pub mod quadrature;

pub use basis::OrthoBasis;
pub use collocation::{Benchmark, ModelAdapter, Statistics, Surrogate, project};
pub use distribution::{GaussianMixture, MomentTable};
pub use error::{Error, Result};
pub use multi_index::{MultiIndex, enumerate_indices};
pub use quadrature::{QuadratureRule, SolverConfig};
