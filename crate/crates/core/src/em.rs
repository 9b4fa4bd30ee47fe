//! Truncated EM: alternate an M-step with hard truncation to the `s_hat`
//! largest coordinates, for a fixed number of iterations.

use ndarray::{Array1, ArrayView1};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{ModelHandle, ModelTag};
use crate::sparsity::{supp_top, trunc, SupportSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MStep {
    /// Maximize `Q_n(.; beta)` in closed form.
    Exact,
    /// One gradient-ascent step on `Q_n(.; beta)`.
    Gradient,
}

impl std::str::FromStr for MStep {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "exact" => Ok(MStep::Exact),
            "gradient" => Ok(MStep::Gradient),
            other => Err(Error::invalid(format!("unknown M-step `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmConfig {
    /// Sparsity kept by the truncation step.
    pub s_hat: usize,
    /// Number of EM iterations `T`.
    pub iterations: usize,
    pub m_step: MStep,
    /// Step size of the gradient M-step.
    pub eta: f64,
    /// Use a fresh block of `n / T` samples per iteration.
    pub resample: bool,
    /// Stop once `||beta^(t+1) - beta^(t)||_2 < tol`. Off by default.
    pub tol: Option<f64>,
    /// Record the observed-data log-likelihood of every iterate.
    pub record_loglik: bool,
}

impl EmConfig {
    pub fn new(s_hat: usize, iterations: usize, m_step: MStep) -> Self {
        EmConfig {
            s_hat,
            iterations,
            m_step,
            eta: 1.0,
            resample: false,
            tol: None,
            record_loglik: true,
        }
    }

    pub fn with_eta(mut self, eta: f64) -> Self {
        self.eta = eta;
        self
    }

    fn validate(&self, model: &ModelHandle, init: ArrayView1<'_, f64>) -> Result<()> {
        let d = model.d();
        if init.len() != d {
            return Err(Error::invalid(format!("init has length {}, expected {d}", init.len())));
        }
        if init.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("init has non-finite entries"));
        }
        if self.s_hat == 0 || self.s_hat > d {
            return Err(Error::invalid(format!("s_hat must lie in [1, {d}], got {}", self.s_hat)));
        }
        match self.m_step {
            MStep::Exact if model.tag() == ModelTag::Rmc => {
                return Err(Error::Unsupported("exact M-step is not available for the rmc model".into()));
            }
            MStep::Gradient if !(self.eta > 0.0 && self.eta.is_finite()) => {
                return Err(Error::invalid(format!("eta must be positive, got {}", self.eta)));
            }
            _ => {}
        }
        Ok(())
    }
}

/// Every iterate of one EM run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmTrace {
    /// `beta^(0), ..., beta^(T)`.
    pub iterates: Vec<Array1<f64>>,
    /// M-step outputs `beta^(t + 0.5)` before truncation.
    pub half_iterates: Vec<Array1<f64>>,
    /// Support kept at each truncation step.
    pub supports: Vec<SupportSet>,
    /// Observed-data log-likelihood of each iterate (on the full sample).
    pub logliks: Vec<f64>,
}

impl EmTrace {
    /// The final iterate `beta^(T)`.
    pub fn estimate(&self) -> &Array1<f64> {
        self.iterates.last().expect("trace always holds beta^(0)")
    }

    pub fn num_iterations(&self) -> usize {
        self.iterates.len() - 1
    }

    /// `||beta^(t) - beta^(T)||_2` for every `t`.
    pub fn optimization_errors(&self) -> Vec<f64> {
        let last = self.estimate();
        self.iterates.iter().map(|b| l2_dist(b.view(), last.view())).collect()
    }
}

pub(crate) fn l2_dist(a: ArrayView1<'_, f64>, b: ArrayView1<'_, f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Flips `estimate` to the sign closest to `truth`; mixtures identify the
/// parameter only up to sign.
pub fn sign_align(estimate: ArrayView1<'_, f64>, truth: ArrayView1<'_, f64>) -> Array1<f64> {
    if l2_dist(estimate, truth) <= l2_dist((-&estimate).view(), truth) {
        estimate.to_owned()
    } else {
        -&estimate
    }
}

/// `min(||estimate - truth||, ||estimate + truth||)`.
pub fn aligned_error(estimate: ArrayView1<'_, f64>, truth: ArrayView1<'_, f64>) -> f64 {
    l2_dist(estimate, truth).min(l2_dist((-&estimate).view(), truth))
}

fn m_step(model: &ModelHandle, beta: ArrayView1<'_, f64>, cfg: &EmConfig) -> Result<Array1<f64>> {
    match cfg.m_step {
        MStep::Exact => model.m_step_exact(beta),
        MStep::Gradient => model.m_step_gradient(beta, cfg.eta),
    }
}

fn iterate(
    full: &ModelHandle,
    init: ArrayView1<'_, f64>,
    cfg: &EmConfig,
    mut surrogate_for: impl FnMut(usize) -> Result<ModelHandle>,
    shared: Option<&ModelHandle>,
) -> Result<EmTrace> {
    let start = trunc(init, &supp_top(init, cfg.s_hat)?)?;
    let mut trace = EmTrace {
        iterates: Vec::with_capacity(cfg.iterations + 1),
        half_iterates: Vec::with_capacity(cfg.iterations),
        supports: Vec::with_capacity(cfg.iterations),
        logliks: Vec::new(),
    };
    if cfg.record_loglik {
        trace.logliks.push(full.loglik(start.view())?);
    }
    trace.iterates.push(start);
    for t in 0..cfg.iterations {
        let owned;
        let model = match shared {
            Some(m) => m,
            None => {
                owned = surrogate_for(t)?;
                &owned
            }
        };
        let current = trace.iterates.last().expect("nonempty");
        let half = m_step(model, current.view(), cfg)?;
        let support = supp_top(half.view(), cfg.s_hat)?;
        let next = trunc(half.view(), &support)?;
        let step = l2_dist(next.view(), current.view());
        if cfg.record_loglik {
            trace.logliks.push(full.loglik(next.view())?);
        }
        log::trace!("iteration {t}: step {step:e}, support {:?}", support.indices());
        trace.half_iterates.push(half);
        trace.supports.push(support);
        trace.iterates.push(next);
        if cfg.tol.is_some_and(|tol| step < tol) {
            break;
        }
    }
    Ok(trace)
}

/// Truncated EM on the full sample.
pub fn run_em(model: &ModelHandle, init: ArrayView1<'_, f64>, cfg: &EmConfig) -> Result<EmTrace> {
    if cfg.resample {
        return Err(Error::invalid("run_em expects resample = false; use run_em_resampled"));
    }
    cfg.validate(model, init)?;
    iterate(model, init, cfg, |_| unreachable!(), Some(model))
}

/// Truncated EM where iteration `t` only sees the `t`-th of `T` contiguous
/// blocks of `floor(n / T)` samples; trailing samples are dropped.
pub fn run_em_resampled(model: &ModelHandle, init: ArrayView1<'_, f64>, cfg: &EmConfig) -> Result<EmTrace> {
    if !cfg.resample {
        return Err(Error::invalid("run_em_resampled expects resample = true"));
    }
    if cfg.iterations == 0 {
        return Err(Error::invalid("resampled EM needs at least one iteration"));
    }
    cfg.validate(model, init)?;
    let block = model.n() / cfg.iterations;
    if block == 0 {
        return Err(Error::invalid(format!(
            "n = {} is too small for {} blocks",
            model.n(),
            cfg.iterations
        )));
    }
    iterate(model, init, cfg, |t| model.subset(t * block..(t + 1) * block), None)
}

/// Dispatches on `cfg.resample`.
pub fn run(model: &ModelHandle, init: ArrayView1<'_, f64>, cfg: &EmConfig) -> Result<EmTrace> {
    if cfg.resample {
        run_em_resampled(model, init, cfg)
    } else {
        run_em(model, init, cfg)
    }
}

/// Sample ranges used by [`run_em_resampled`].
pub fn resample_blocks(n: usize, iterations: usize) -> Result<Vec<std::ops::Range<usize>>> {
    let block = n.checked_div(iterations).unwrap_or(0);
    if block == 0 {
        return Err(Error::invalid(format!("n = {n} is too small for {iterations} blocks")));
    }
    Ok((0..iterations).map(|t| t * block..(t + 1) * block).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn blocks_follow_floor_rule() {
        assert_eq!(resample_blocks(10, 3).unwrap(), vec![0..3, 3..6, 6..9]);
        assert!(resample_blocks(2, 3).is_err());
        assert!(resample_blocks(5, 0).is_err());
    }

    #[test]
    fn sign_alignment() {
        let truth = array![1.0, 2.0];
        let est = array![-1.1, -1.9];
        assert_eq!(sign_align(est.view(), truth.view()), array![1.1, 1.9]);
        let err = aligned_error(est.view(), truth.view());
        assert!((err - (0.02f64).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn config_validation() {
        let model = ModelHandle::gmm(array![[1.0, 0.0], [0.0, 1.0]], 1.0).unwrap();
        let init = array![0.5, 0.1];
        assert!(run_em(&model, init.view(), &EmConfig::new(0, 1, MStep::Exact)).is_err());
        assert!(run_em(&model, init.view(), &EmConfig::new(3, 1, MStep::Exact)).is_err());
        let bad_eta = EmConfig::new(1, 1, MStep::Gradient).with_eta(0.0);
        assert!(run_em(&model, init.view(), &bad_eta).is_err());
        assert!(run_em(&model, array![1.0].view(), &EmConfig::new(1, 1, MStep::Exact)).is_err());
        let mut resampled = EmConfig::new(1, 1, MStep::Exact);
        resampled.resample = true;
        assert!(run_em(&model, init.view(), &resampled).is_err());
        assert!(run_em_resampled(&model, init.view(), &EmConfig::new(1, 1, MStep::Exact)).is_err());
    }
}
