//! Decorrelated score and Wald inference for one coordinate of `beta`.
//!
//! All statistics are formed on the log-likelihood scale: the gradient and
//! `T_n` returned by the model are multiplied by
//! [`ModelHandle::fisher_scale`] first.

use ndarray::{Array1, ArrayView1, ArrayView2};
use serde::{Deserialize, Serialize};
use statrs::function::erf::{erfc, erfc_inv};

use crate::error::{Error, Result};
use crate::lp::{dantzig_direction, nuisance_indices, SquareMatrix};
use crate::models::{ModelHandle, ModelTag};

/// `Phi(x)`, through the complementary error function.
pub fn std_normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

fn std_normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// `Phi^{-1}(p)`: closed-form start from `erfc_inv`, polished by Newton steps
/// on [`std_normal_cdf`] so the two functions invert each other.
pub fn std_normal_quantile(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::invalid(format!("quantile needs p in (0, 1), got {p}")));
    }
    let mut x = -std::f64::consts::SQRT_2 * erfc_inv(2.0 * p);
    for _ in 0..3 {
        let pdf = std_normal_pdf(x);
        if pdf < 1e-300 {
            break;
        }
        let step = (std_normal_cdf(x) - p) / pdf;
        x -= step;
        if step.abs() < 1e-15 * x.abs().max(1.0) {
            break;
        }
    }
    Ok(x)
}

/// Two-sided p-value `2 (1 - Phi(|z|))`, evaluated as `2 Phi(-|z|)` to keep
/// precision in the tail.
pub fn two_sided_p_value(statistic: f64) -> f64 {
    (2.0 * std_normal_cdf(-statistic.abs())).min(1.0)
}

/// Two-sided p-value and decision at level `delta`. A statistic exactly at
/// the critical value is not rejected.
pub fn two_sided_decision(statistic: f64, delta: f64) -> Result<(f64, bool)> {
    let crit = std_normal_quantile(1.0 - delta / 2.0)?;
    Ok((two_sided_p_value(statistic), statistic.abs() > crit))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InferenceConfig {
    /// Coordinate of interest.
    pub alpha_index: usize,
    /// Dantzig tuning; `None` picks [`default_lambda`].
    pub lambda: Option<f64>,
    /// Significance level.
    pub delta: f64,
    /// Hypothesized value of the coordinate under the null.
    pub null_value: f64,
    /// Evaluate the score statistic at `beta_hat` instead of at the
    /// null-restricted `beta_hat_0`.
    pub score_at_beta_hat: bool,
}

impl InferenceConfig {
    pub fn new(alpha_index: usize, delta: f64) -> Self {
        InferenceConfig {
            alpha_index,
            lambda: None,
            delta,
            null_value: 0.0,
            score_at_beta_hat: false,
        }
    }

    fn validate(&self, d: usize) -> Result<()> {
        if d < 2 {
            return Err(Error::invalid("inference needs d >= 2"));
        }
        if self.alpha_index >= d {
            return Err(Error::invalid(format!(
                "alpha_index {} out of range for d = {d}",
                self.alpha_index
            )));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::invalid(format!("delta must lie in (0, 1), got {}", self.delta)));
        }
        if !self.null_value.is_finite() {
            return Err(Error::invalid("null_value must be finite"));
        }
        if let Some(l) = self.lambda {
            if !(l >= 0.0 && l.is_finite()) {
                return Err(Error::invalid(format!("lambda must be finite and >= 0, got {l}")));
            }
        }
        Ok(())
    }

    fn critical_value(&self) -> Result<f64> {
        std_normal_quantile(1.0 - self.delta / 2.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InferenceResult {
    pub statistic: f64,
    pub p_value: f64,
    pub reject: bool,
    pub ci_lo: f64,
    pub ci_hi: f64,
    /// Decorrelation direction over the nuisance coordinates, in increasing
    /// index order with `alpha_index` removed.
    pub w_hat: Array1<f64>,
    /// `-[T_n]_{alpha|gamma}` on the log-likelihood scale.
    pub info_scalar: f64,
    /// Dantzig tuning actually used.
    pub lambda: f64,
    /// One-step corrected estimate the interval is centred on.
    pub estimate: f64,
}

/// `sqrt(2 log d / n) * max |T_ij|`: the universal threshold for `d` averages
/// of scale `max |T_ij|`, so that the population direction stays feasible
/// for the Dantzig program with high probability.
pub fn default_lambda(t: ArrayView2<'_, f64>, n: usize) -> f64 {
    let d = t.nrows().max(2) as f64;
    let scale = t.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    (2.0 * d.ln() / n as f64).sqrt() * scale
}

fn check_w(d: usize, w: ArrayView1<'_, f64>) -> Result<()> {
    if w.len() + 1 != d {
        return Err(Error::invalid(format!("w has length {}, expected {}", w.len(), d - 1)));
    }
    Ok(())
}

/// `g[alpha] - <w, g[gamma]>`.
fn decorrelate(g: ArrayView1<'_, f64>, w: ArrayView1<'_, f64>, alpha: usize) -> f64 {
    let gamma = nuisance_indices(g.len(), alpha);
    g[alpha] - gamma.iter().zip(w.iter()).map(|(&j, wj)| wj * g[j]).sum::<f64>()
}

/// Decorrelated score `[grad]_alpha - w' [grad]_gamma` at `beta`, on the
/// log-likelihood scale.
pub fn score_function(
    model: &ModelHandle,
    beta: ArrayView1<'_, f64>,
    w: ArrayView1<'_, f64>,
    cfg: &InferenceConfig,
) -> Result<f64> {
    cfg.validate(model.d())?;
    check_w(model.d(), w)?;
    let g = model.grad1_q(beta)? * model.fisher_scale();
    Ok(decorrelate(g.view(), w, cfg.alpha_index))
}

/// `[1, -w'] T [1, -w']'` with the `1` placed at `alpha_index`.
pub fn info_alpha_given_gamma(t: ArrayView2<'_, f64>, w: ArrayView1<'_, f64>, alpha_index: usize) -> Result<f64> {
    let d = t.nrows();
    if t.ncols() != d {
        return Err(Error::invalid("T must be square"));
    }
    if alpha_index >= d {
        return Err(Error::invalid(format!("alpha_index {alpha_index} out of range for d = {d}")));
    }
    check_w(d, w)?;
    let mut v = Array1::zeros(d);
    v[alpha_index] = 1.0;
    for (&j, wj) in nuisance_indices(d, alpha_index).iter().zip(w.iter()) {
        v[j] = -wj;
    }
    Ok(v.dot(&t.dot(&v)))
}

/// `T[a,a] - w' T[g,a]`, the denominator of the one-step Wald update.
fn wald_denominator(t: ArrayView2<'_, f64>, w: ArrayView1<'_, f64>, alpha: usize) -> f64 {
    decorrelate(t.column(alpha), w, alpha)
}

/// Curvature, Dantzig direction and information at one evaluation point.
struct Decorrelated {
    t: SquareMatrix,
    w: Array1<f64>,
    lambda: f64,
    info: f64,
    score: f64,
}

fn decorrelated_at(model: &ModelHandle, beta: ArrayView1<'_, f64>, cfg: &InferenceConfig) -> Result<Decorrelated> {
    if model.tag() == ModelTag::Rmc {
        return Err(Error::Unsupported("inference is not available for the rmc model".into()));
    }
    cfg.validate(model.d())?;
    if beta.len() != model.d() {
        return Err(Error::invalid(format!("beta has length {}, expected {}", beta.len(), model.d())));
    }
    let scale = model.fisher_scale();
    let t = model.t_matrix(beta)? * scale;
    let lambda = cfg.lambda.unwrap_or_else(|| default_lambda(t.view(), model.n()));
    let w = dantzig_direction(t.view(), cfg.alpha_index, lambda)?;
    let info = -info_alpha_given_gamma(t.view(), w.view(), cfg.alpha_index)?;
    let g = model.grad1_q(beta)? * scale;
    let score = decorrelate(g.view(), w.view(), cfg.alpha_index);
    Ok(Decorrelated { t, w, lambda, info, score })
}

fn finish(statistic: f64, estimate: f64, dec: Decorrelated, n: usize, cfg: &InferenceConfig) -> Result<InferenceResult> {
    let crit = cfg.critical_value()?;
    let half = crit / (n as f64 * dec.info).sqrt();
    let (p_value, reject) = two_sided_decision(statistic, cfg.delta)?;
    Ok(InferenceResult {
        statistic,
        p_value,
        reject,
        ci_lo: estimate - half,
        ci_hi: estimate + half,
        w_hat: dec.w,
        info_scalar: dec.info,
        lambda: dec.lambda,
        estimate,
    })
}

fn one_step(alpha_hat: f64, dec: &Decorrelated, alpha: usize) -> Result<f64> {
    let denom = wald_denominator(dec.t.view(), dec.w.view(), alpha);
    if denom == 0.0 || !denom.is_finite() {
        return Err(Error::DegenerateInformation(denom));
    }
    Ok(alpha_hat - dec.score / denom)
}

/// Decorrelated score test of `beta[alpha] = null_value`.
///
/// The statistic is `sqrt(n) S / sqrt(info)`, with `T_n`, `w` and the score
/// taken at `beta_hat` with coordinate `alpha` replaced by `null_value`. The
/// interval is centred on the one-step update from that same point.
pub fn score_test(model: &ModelHandle, beta_hat: ArrayView1<'_, f64>, cfg: &InferenceConfig) -> Result<InferenceResult> {
    cfg.validate(model.d())?;
    let mut point = beta_hat.to_owned();
    if !cfg.score_at_beta_hat {
        point[cfg.alpha_index] = cfg.null_value;
    }
    let dec = decorrelated_at(model, point.view(), cfg)?;
    if dec.info.is_nan() || dec.info <= 0.0 {
        return Err(Error::DegenerateInformation(dec.info));
    }
    let n = model.n();
    let statistic = (n as f64).sqrt() * dec.score / dec.info.sqrt();
    let estimate = one_step(point[cfg.alpha_index], &dec, cfg.alpha_index)?;
    finish(statistic, estimate, dec, n, cfg)
}

/// One-step corrected estimate `alpha_hat - S / (T[a,a] - w' T[g,a])` at
/// `beta_hat`.
pub fn wald_estimator(model: &ModelHandle, beta_hat: ArrayView1<'_, f64>, cfg: &InferenceConfig) -> Result<f64> {
    let dec = decorrelated_at(model, beta_hat, cfg)?;
    one_step(beta_hat[cfg.alpha_index], &dec, cfg.alpha_index)
}

/// Wald test and confidence interval for `beta[alpha]`.
pub fn wald_test(model: &ModelHandle, beta_hat: ArrayView1<'_, f64>, cfg: &InferenceConfig) -> Result<InferenceResult> {
    let dec = decorrelated_at(model, beta_hat, cfg)?;
    if dec.info.is_nan() || dec.info <= 0.0 {
        return Err(Error::DegenerateInformation(dec.info));
    }
    let estimate = one_step(beta_hat[cfg.alpha_index], &dec, cfg.alpha_index)?;
    let n = model.n();
    let statistic = (n as f64).sqrt() * (estimate - cfg.null_value) * dec.info.sqrt();
    finish(statistic, estimate, dec, n, cfg)
}
