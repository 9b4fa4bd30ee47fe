//! Sparse expectation-maximization for high-dimensional latent-variable
//! models, with decorrelated score and Wald inference on single coordinates.
//!
//! The crate is organised bottom-up:
//!
//! - [`sparsity`]: top-`s` support selection and hard truncation
//! - [`models`]: Gaussian mixture, mixture of regressions and regression with
//!   missing covariates, each exposing its surrogate `Q_n`, gradient, M-steps,
//!   curvature matrix `T_n` and observed-data log-likelihood
//! - [`lp`]: dense simplex, Dantzig selector and CLIME
//! - [`em`]: the truncated EM loop and its sample-splitting variant
//! - [`inference`]: decorrelated score/Wald tests and confidence intervals
//! - [`datagen`]: seeded synthetic data and initializations
//! - [`experiments`]: the trace, scaling, type-I, fit and infer drivers

pub mod datagen;
pub mod em;
pub mod error;
pub mod experiments;
pub mod inference;
pub mod lp;
pub mod models;
pub mod sparsity;

pub use error::{Error, Result};
pub use models::{Dataset, ModelHandle, ModelTag};
pub use sparsity::{supp_top, trunc, SupportSet};
