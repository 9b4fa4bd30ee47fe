//! The three latent-variable models behind one interface.
//!
//! `Q_n`, its gradient and `T_n` follow the closed forms of the surrogate
//! written without the `1/sigma^2` factor: for every model
//! `Q_n(b'; b) = sigma^2 * E[log f_{b'}(y, z) | y; b] / n + const`. Multiply by
//! [`ModelHandle::fisher_scale`] to move to the log-likelihood scale, where
//! `grad1_q(b) * fisher_scale() == grad loglik(b) / n`.

mod data;
mod gmm;
mod mr;
mod rmc;

use std::sync::OnceLock;

use ndarray::{Array1, Array2, ArrayView1};

use crate::error::{Error, Result};
use crate::lp::{clime_inverse, SquareMatrix};

pub use data::{Dataset, GmmData, ModelTag, MrData, RmcData};

/// Logistic function without overflow for any finite argument.
pub fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

/// `log cosh(t)`, stable for large `|t|`.
pub(crate) fn log_cosh(t: f64) -> f64 {
    let a = t.abs();
    a + (-2.0 * a).exp().ln_1p() - std::f64::consts::LN_2
}

/// `(4 / sigma^2) * s * (1 - s)` with `s = sigmoid(2 t / sigma^2)`.
pub(crate) fn nu(t: f64, sigma2: f64) -> f64 {
    let arg = 2.0 * t / sigma2;
    4.0 / sigma2 * sigmoid(arg) * sigmoid(-arg)
}

/// Default CLIME tuning `sqrt(log d / n)`; `log` floored at `log 2` so that
/// `d = 1` still gets a positive value.
pub fn default_clime_lambda(n: usize, d: usize) -> f64 {
    ((d.max(2) as f64).ln() / n as f64).sqrt()
}

/// A dataset bound to its model, plus the lazily computed CLIME precision
/// estimate used by the exact mixture-of-regressions M-step.
#[derive(Debug)]
pub struct ModelHandle {
    data: Dataset,
    clime_lambda: Option<f64>,
    theta: OnceLock<Result<SquareMatrix>>,
}

impl Clone for ModelHandle {
    fn clone(&self) -> Self {
        let theta = OnceLock::new();
        if let Some(cached) = self.theta.get() {
            let _ = theta.set(cached.clone());
        }
        ModelHandle {
            data: self.data.clone(),
            clime_lambda: self.clime_lambda,
            theta,
        }
    }
}

impl ModelHandle {
    /// Binds `data` to its model. `clime_lambda` is only meaningful for the
    /// mixture of regressions; `None` there selects [`default_clime_lambda`].
    pub fn new(data: Dataset, clime_lambda: Option<f64>) -> Result<Self> {
        data.validate()?;
        let clime_lambda = match (data.tag(), clime_lambda) {
            (ModelTag::Mr, Some(l)) if !(l >= 0.0 && l.is_finite()) => {
                return Err(Error::invalid(format!("clime_lambda must be >= 0, got {l}")));
            }
            (ModelTag::Mr, Some(l)) => Some(l),
            (ModelTag::Mr, None) => Some(default_clime_lambda(data.n(), data.d())),
            (tag, Some(_)) => {
                return Err(Error::invalid(format!("clime_lambda is only used by the mr model, not {tag}")));
            }
            (_, None) => None,
        };
        Ok(ModelHandle {
            data,
            clime_lambda,
            theta: OnceLock::new(),
        })
    }

    pub fn gmm(y: Array2<f64>, sigma: f64) -> Result<Self> {
        Self::new(Dataset::Gmm(GmmData { y, sigma }), None)
    }

    pub fn mr(x: Array2<f64>, y: Array1<f64>, sigma: f64, clime_lambda: Option<f64>) -> Result<Self> {
        Self::new(Dataset::Mr(MrData { x, y, sigma }), clime_lambda)
    }

    pub fn rmc(x: Array2<f64>, mask: Array2<bool>, y: Array1<f64>, sigma: f64, p_m: f64) -> Result<Self> {
        Self::new(Dataset::Rmc(RmcData { x, mask, y, sigma, p_m }), None)
    }

    pub fn tag(&self) -> ModelTag {
        self.data.tag()
    }

    pub fn data(&self) -> &Dataset {
        &self.data
    }

    pub fn n(&self) -> usize {
        self.data.n()
    }

    pub fn d(&self) -> usize {
        self.data.d()
    }

    pub fn sigma(&self) -> f64 {
        self.data.sigma()
    }

    pub fn clime_lambda(&self) -> Option<f64> {
        self.clime_lambda
    }

    /// Factor `1 / sigma^2` converting `grad1_q` and `t_matrix` to the
    /// log-likelihood scale.
    pub fn fisher_scale(&self) -> f64 {
        1.0 / (self.sigma() * self.sigma())
    }

    /// The same model restricted to samples `range` (own CLIME cache).
    pub fn subset(&self, range: std::ops::Range<usize>) -> Result<ModelHandle> {
        if range.start >= range.end || range.end > self.n() {
            return Err(Error::invalid(format!("sample range {range:?} invalid for n = {}", self.n())));
        }
        Ok(ModelHandle {
            data: self.data.subset(range),
            clime_lambda: self.clime_lambda,
            theta: OnceLock::new(),
        })
    }

    fn check_dim(&self, v: ArrayView1<'_, f64>, what: &str) -> Result<()> {
        if v.len() != self.d() {
            return Err(Error::invalid(format!("{what} has length {}, expected {}", v.len(), self.d())));
        }
        Ok(())
    }

    /// Posterior weight of the `+` component for sample `i`.
    pub fn weight_omega(&self, beta: ArrayView1<'_, f64>, i: usize) -> Result<f64> {
        self.check_dim(beta, "beta")?;
        if i >= self.n() {
            return Err(Error::invalid(format!("sample index {i} out of range for n = {}", self.n())));
        }
        match &self.data {
            Dataset::Gmm(g) => Ok(gmm::omega(g, beta, i)),
            Dataset::Mr(m) => Ok(mr::omega(m, beta, i)),
            Dataset::Rmc(_) => Err(Error::Unsupported(
                "weight_omega is defined only for the mixture models".into(),
            )),
        }
    }

    /// Surrogate `Q_n(beta_prime; beta)`.
    pub fn q_value(&self, beta_prime: ArrayView1<'_, f64>, beta: ArrayView1<'_, f64>) -> Result<f64> {
        self.check_dim(beta_prime, "beta_prime")?;
        self.check_dim(beta, "beta")?;
        Ok(match &self.data {
            Dataset::Gmm(g) => gmm::q_value(g, beta_prime, beta),
            Dataset::Mr(m) => mr::q_value(m, beta_prime, beta),
            Dataset::Rmc(r) => rmc::q_value(r, beta_prime, beta),
        })
    }

    /// Gradient of `Q_n(.; beta)` in its first slot, evaluated at `beta`.
    pub fn grad1_q(&self, beta: ArrayView1<'_, f64>) -> Result<Array1<f64>> {
        self.check_dim(beta, "beta")?;
        Ok(match &self.data {
            Dataset::Gmm(g) => gmm::grad1_q(g, beta),
            Dataset::Mr(m) => mr::grad1_q(m, beta),
            Dataset::Rmc(r) => rmc::grad1_q(r, beta),
        })
    }

    /// Exact maximizer of `Q_n(.; beta)`; CLIME-regularized for MR.
    pub fn m_step_exact(&self, beta: ArrayView1<'_, f64>) -> Result<Array1<f64>> {
        self.check_dim(beta, "beta")?;
        match &self.data {
            Dataset::Gmm(g) => Ok(gmm::m_step_exact(g, beta)),
            Dataset::Mr(m) => {
                let theta = self.clime_theta()?;
                Ok(theta.dot(&mr::weighted_moment(m, beta)))
            }
            Dataset::Rmc(_) => Err(Error::Unsupported(
                "exact M-step needs an invertible conditional second moment; use the gradient M-step for rmc".into(),
            )),
        }
    }

    /// One gradient-ascent step `beta + eta * grad1_q(beta)`.
    pub fn m_step_gradient(&self, beta: ArrayView1<'_, f64>, eta: f64) -> Result<Array1<f64>> {
        if !(eta >= 0.0 && eta.is_finite()) {
            return Err(Error::invalid(format!("step size must be finite and >= 0, got {eta}")));
        }
        let g = self.grad1_q(beta)?;
        Ok(&beta + &(g * eta))
    }

    /// Modified curvature `T_n(beta)`.
    pub fn t_matrix(&self, beta: ArrayView1<'_, f64>) -> Result<SquareMatrix> {
        self.check_dim(beta, "beta")?;
        match &self.data {
            Dataset::Gmm(g) => Ok(gmm::t_matrix(g, beta)),
            Dataset::Mr(m) => Ok(mr::t_matrix(m, beta)),
            Dataset::Rmc(_) => Err(Error::Unsupported(
                "T_n has no closed form for the missing-covariate model".into(),
            )),
        }
    }

    /// Observed-data log-likelihood `sum_i log h_beta(y_i)`.
    pub fn loglik(&self, beta: ArrayView1<'_, f64>) -> Result<f64> {
        self.check_dim(beta, "beta")?;
        Ok(match &self.data {
            Dataset::Gmm(g) => gmm::loglik(g, beta),
            Dataset::Mr(m) => mr::loglik(m, beta),
            Dataset::Rmc(r) => rmc::loglik(r, beta),
        })
    }

    /// Sample covariance `(1/n) X'X` (MR only).
    pub fn sigma_hat(&self) -> Result<SquareMatrix> {
        match &self.data {
            Dataset::Mr(m) => Ok(mr::sigma_hat(m)),
            _ => Err(Error::Unsupported("sigma_hat is defined for the mr model only".into())),
        }
    }

    /// CLIME estimate of the precision matrix, computed once per handle.
    pub fn clime_theta(&self) -> Result<&SquareMatrix> {
        let lambda = self
            .clime_lambda
            .ok_or_else(|| Error::Unsupported("CLIME is used by the mr model only".into()))?;
        self.theta
            .get_or_init(|| {
                let sigma_hat = self.sigma_hat()?;
                clime_inverse(sigma_hat.view(), lambda, false)
            })
            .as_ref()
            .map_err(Clone::clone)
    }
}
