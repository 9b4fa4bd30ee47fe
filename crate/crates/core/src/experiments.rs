//! Experiment drivers behind the `hdem` binary: convergence traces, error
//! scaling, Monte-Carlo type-I error, and single fit/infer runs.
//!
//! Every driver takes an [`ExperimentConfig`] whose unset fields are filled
//! with model-specific defaults by [`ExperimentConfig::resolve`]; the resolved
//! values are echoed into every JSON output.

use std::path::Path;

use ndarray::{Array1, ArrayView1};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::datagen::{gen_dataset, make_beta_star, make_init, read_dataset_csv, GenSpec};
use crate::em::{self, aligned_error, l2_dist, EmConfig, EmTrace, MStep};
use crate::error::{Error, Result};
use crate::inference::{score_test, wald_test, InferenceConfig, InferenceResult};
use crate::models::{Dataset, ModelHandle, ModelTag};

/// User-facing configuration; `None` means "use the default for this model".
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: Option<ModelTag>,
    pub d: Option<usize>,
    pub n: Option<usize>,
    pub s_star: Option<usize>,
    /// Nonzero values of `beta_star`, cycled to length `s_star`.
    pub beta_values: Option<Vec<f64>>,
    pub s_hat: Option<usize>,
    pub sigma: Option<f64>,
    pub p_m: Option<f64>,
    pub m_step: Option<MStep>,
    pub eta: Option<f64>,
    pub iterations: Option<usize>,
    pub resample: Option<bool>,
    /// `||init - beta_star|| / ||beta_star||`.
    pub init_rel_err: Option<f64>,
    pub lambda: Option<f64>,
    pub clime_lambda: Option<f64>,
    pub delta: Option<f64>,
    pub alpha_index: Option<usize>,
    pub null_value: Option<f64>,
    pub replicates: Option<usize>,
    pub seed: Option<u64>,
    pub s_star_grid: Option<Vec<usize>>,
    pub n_grid: Option<Vec<usize>>,
    /// External dataset for `fit` / `infer`.
    pub data_path: Option<String>,
}

/// Fully specified configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Resolved {
    pub model: ModelTag,
    pub d: usize,
    pub n: usize,
    pub s_star: usize,
    pub beta_values: Vec<f64>,
    pub s_hat: usize,
    pub sigma: f64,
    pub p_m: f64,
    pub m_step: MStep,
    pub eta: f64,
    pub iterations: usize,
    pub resample: bool,
    pub init_rel_err: f64,
    /// `None` selects the data-driven default at each evaluation point.
    pub lambda: Option<f64>,
    pub clime_lambda: Option<f64>,
    pub delta: f64,
    pub alpha_index: usize,
    pub null_value: f64,
    pub replicates: usize,
    pub seed: u64,
    pub s_star_grid: Vec<usize>,
    pub n_grid: Vec<usize>,
    pub data_path: Option<String>,
}

impl ExperimentConfig {
    pub fn from_json_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }

    /// Fields set in `other` win.
    pub fn merged(&self, other: &ExperimentConfig) -> ExperimentConfig {
        macro_rules! pick {
            ($($f:ident),*) => {
                ExperimentConfig { $($f: other.$f.clone().or_else(|| self.$f.clone()),)* }
            };
        }
        pick!(
            model, d, n, s_star, beta_values, s_hat, sigma, p_m, m_step, eta, iterations, resample,
            init_rel_err, lambda, clime_lambda, delta, alpha_index, null_value, replicates, seed,
            s_star_grid, n_grid, data_path
        )
    }

    pub fn resolve(&self) -> Result<Resolved> {
        let model = self.model.unwrap_or(ModelTag::Gmm);
        let (sigma, m_step, iterations, rel_err, values) = match model {
            ModelTag::Gmm => (1.0, MStep::Exact, 10, 1.0 / 8.0, vec![4.0, 4.0, 4.0, 6.0, 6.0]),
            ModelTag::Mr => (0.1, MStep::Gradient, 30, 1.0 / 64.0, vec![4.0, 4.0, 4.0, 6.0, 6.0]),
            ModelTag::Rmc => (1.0, MStep::Gradient, 30, 1.0 / 8.0, vec![0.8, 0.8, 0.8, 1.2, 1.2]),
        };
        let s_star = self.s_star.unwrap_or(5);
        let r = Resolved {
            model,
            d: self.d.unwrap_or(256),
            n: self.n.unwrap_or(100),
            s_star,
            beta_values: self.beta_values.clone().unwrap_or(values),
            s_hat: self.s_hat.unwrap_or(s_star),
            sigma: self.sigma.unwrap_or(sigma),
            p_m: self.p_m.unwrap_or(if model == ModelTag::Rmc { 0.1 } else { 0.0 }),
            m_step: self.m_step.unwrap_or(m_step),
            eta: self.eta.unwrap_or(1.0),
            iterations: self.iterations.unwrap_or(iterations),
            resample: self.resample.unwrap_or(false),
            init_rel_err: self.init_rel_err.unwrap_or(rel_err),
            lambda: self.lambda,
            clime_lambda: self.clime_lambda,
            delta: self.delta.unwrap_or(0.05),
            alpha_index: self.alpha_index.unwrap_or(9),
            null_value: self.null_value.unwrap_or(0.0),
            replicates: self.replicates.unwrap_or(1),
            seed: self.seed.unwrap_or(0),
            s_star_grid: self.s_star_grid.clone().unwrap_or_else(|| vec![2, 4, 6, 8]),
            n_grid: self.n_grid.clone().unwrap_or_else(|| vec![200, 400, 800]),
            data_path: self.data_path.clone(),
        };
        if r.replicates == 0 {
            return Err(Error::invalid("replicates must be >= 1"));
        }
        if r.beta_values.is_empty() && r.s_star > 0 {
            return Err(Error::invalid("beta_values must be nonempty"));
        }
        Ok(r)
    }
}

impl Resolved {
    pub fn beta_star_for(&self, d: usize, s_star: usize) -> Result<Array1<f64>> {
        let values: Vec<f64> = self.beta_values.iter().copied().cycle().take(s_star).collect();
        make_beta_star(d, &values)
    }

    pub fn beta_star(&self) -> Result<Array1<f64>> {
        self.beta_star_for(self.d, self.s_star)
    }

    pub fn gen_spec(&self, n: usize, beta_star: Array1<f64>, seed: u64) -> GenSpec {
        GenSpec {
            model: self.model,
            n,
            d: beta_star.len(),
            beta_star,
            sigma: self.sigma,
            p_m: self.p_m,
            seed,
        }
    }

    pub fn em_config(&self, s_hat: usize) -> EmConfig {
        EmConfig {
            s_hat,
            iterations: self.iterations,
            m_step: self.m_step,
            eta: self.eta,
            resample: self.resample,
            tol: None,
            record_loglik: true,
        }
    }

    pub fn inference_config(&self) -> InferenceConfig {
        InferenceConfig {
            alpha_index: self.alpha_index,
            lambda: self.lambda,
            delta: self.delta,
            null_value: self.null_value,
            score_at_beta_hat: false,
        }
    }

    pub fn handle(&self, data: Dataset) -> Result<ModelHandle> {
        let lambda = if data.tag() == ModelTag::Mr { self.clime_lambda } else { None };
        ModelHandle::new(data, lambda)
    }
}

/// Data, truth and initialization of replicate seed `seed`.
pub struct Instance {
    pub model: ModelHandle,
    pub beta_star: Array1<f64>,
    pub init: Array1<f64>,
}

pub fn make_instance(cfg: &Resolved, n: usize, beta_star: Array1<f64>, seed: u64) -> Result<Instance> {
    let data = gen_dataset(&cfg.gen_spec(n, beta_star.clone(), seed))?;
    let init = make_init(beta_star.view(), cfg.init_rel_err, seed)?;
    Ok(Instance {
        model: cfg.handle(data)?,
        beta_star,
        init,
    })
}

fn csv_writer(path: &Path) -> Result<csv::Writer<std::fs::File>> {
    csv::Writer::from_path(path).map_err(|e| Error::io(path, e))
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
}

// ---------------------------------------------------------------- trace

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub t: usize,
    pub opt_error: f64,
    pub est_error: f64,
    pub loglik: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct TraceOutput {
    pub config: Resolved,
    pub rows: Vec<TraceRow>,
}

pub fn trace_rows(trace: &EmTrace, beta_star: ArrayView1<'_, f64>) -> Vec<TraceRow> {
    trace
        .optimization_errors()
        .into_iter()
        .zip(&trace.iterates)
        .enumerate()
        .map(|(t, (opt_error, b))| TraceRow {
            t,
            opt_error,
            est_error: l2_dist(b.view(), beta_star),
            loglik: trace.logliks.get(t).copied().unwrap_or(f64::NAN),
        })
        .collect()
}

/// One EM run on replicate `seed`, reporting `||beta^(t) - beta^(T)||` and
/// `||beta^(t) - beta_star||` per iteration.
pub fn cmd_trace(cfg: &Resolved) -> Result<TraceOutput> {
    let inst = make_instance(cfg, cfg.n, cfg.beta_star()?, cfg.seed)?;
    let trace = em::run(&inst.model, inst.init.view(), &cfg.em_config(cfg.s_hat))?;
    Ok(TraceOutput {
        config: cfg.clone(),
        rows: trace_rows(&trace, inst.beta_star.view()),
    })
}

pub fn write_trace_csv(path: impl AsRef<Path>, rows: &[TraceRow]) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv_writer(path)?;
    for row in rows {
        w.serialize(row).map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

// ---------------------------------------------------------------- scaling

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingRow {
    /// `rep` for a single replicate, `mean` for a cell average.
    pub kind: String,
    pub s_star: usize,
    pub n: usize,
    pub replicate: Option<usize>,
    pub x: f64,
    pub err: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

/// Ordinary least squares of `y` on `x` with intercept.
pub fn fit_line(x: &[f64], y: &[f64]) -> LineFit {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let syy: f64 = y.iter().map(|b| (b - my) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    LineFit {
        slope,
        intercept,
        r2: 1.0 - sse / syy,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ScalingOutput {
    pub config: Resolved,
    pub rows: Vec<ScalingRow>,
    /// Fit of the cell means on `x`.
    pub fit: LineFit,
}

/// Final-iterate error over the `(s_star, n)` grid at fixed `d`. Replicate `r`
/// of every cell uses seed `seed + r`; `s_hat` follows `s_star`.
pub fn cmd_scaling(cfg: &Resolved) -> Result<ScalingOutput> {
    let cells: Vec<(usize, usize)> = cfg
        .s_star_grid
        .iter()
        .flat_map(|&s| cfg.n_grid.iter().map(move |&n| (s, n)))
        .collect();
    let jobs: Vec<(usize, usize, usize)> = cells
        .iter()
        .flat_map(|&(s, n)| (0..cfg.replicates).map(move |r| (s, n, r)))
        .collect();
    let log_d = (cfg.d as f64).ln();
    let errs: Vec<f64> = jobs
        .par_iter()
        .map(|&(s, n, r)| -> Result<f64> {
            let inst = make_instance(cfg, n, cfg.beta_star_for(cfg.d, s)?, cfg.seed + r as u64)?;
            let trace = em::run(&inst.model, inst.init.view(), &cfg.em_config(s))?;
            let est = trace.estimate().view();
            Ok(match cfg.model {
                ModelTag::Rmc => l2_dist(est, inst.beta_star.view()),
                _ => aligned_error(est, inst.beta_star.view()),
            })
        })
        .collect::<Result<_>>()?;
    let mut rows = Vec::with_capacity(jobs.len() + cells.len());
    for (&(s, n, r), &err) in jobs.iter().zip(&errs) {
        rows.push(ScalingRow {
            kind: "rep".into(),
            s_star: s,
            n,
            replicate: Some(r),
            x: (s as f64 * log_d / n as f64).sqrt(),
            err,
        });
    }
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for (c, &(s, n)) in cells.iter().enumerate() {
        let chunk = &errs[c * cfg.replicates..(c + 1) * cfg.replicates];
        let mean = chunk.iter().sum::<f64>() / chunk.len() as f64;
        let x = (s as f64 * log_d / n as f64).sqrt();
        xs.push(x);
        ys.push(mean);
        rows.push(ScalingRow {
            kind: "mean".into(),
            s_star: s,
            n,
            replicate: None,
            x,
            err: mean,
        });
    }
    Ok(ScalingOutput {
        config: cfg.clone(),
        fit: fit_line(&xs, &ys),
        rows,
    })
}

pub fn write_scaling_csv(path: impl AsRef<Path>, rows: &[ScalingRow]) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv_writer(path)?;
    for row in rows {
        w.serialize(row).map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

// ---------------------------------------------------------------- type-I

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TypeOneRow {
    pub replicate: usize,
    pub seed: u64,
    pub score_statistic: f64,
    pub score_p_value: f64,
    pub score_reject: bool,
    pub score_degenerate: bool,
    pub wald_statistic: f64,
    pub wald_p_value: f64,
    pub wald_reject: bool,
    pub wald_degenerate: bool,
    pub ci_lo: f64,
    pub ci_hi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestSummary {
    pub rejections: usize,
    /// Replicates with a well-defined statistic.
    pub valid: usize,
    pub degenerate: usize,
    /// `rejections / valid`.
    pub rate: f64,
}

impl TestSummary {
    pub fn from_flags(flags: impl Iterator<Item = (bool, bool)>) -> Self {
        let (mut rejections, mut valid, mut degenerate) = (0, 0, 0);
        for (reject, degen) in flags {
            if degen {
                degenerate += 1;
            } else {
                valid += 1;
                rejections += reject as usize;
            }
        }
        TestSummary {
            rejections,
            valid,
            degenerate,
            rate: if valid == 0 { f64::NAN } else { rejections as f64 / valid as f64 },
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TypeOneSummary {
    pub config: Resolved,
    pub beta_star_at_alpha: f64,
    pub score: TestSummary,
    pub wald: TestSummary,
    /// Fraction of replicates whose Wald interval covers `beta_star[alpha]`.
    pub wald_coverage: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct TypeOneOutput {
    pub rows: Vec<TypeOneRow>,
    pub summary: TypeOneSummary,
}

fn split_result(res: Result<InferenceResult>) -> Result<(Option<InferenceResult>, bool)> {
    match res {
        Ok(r) => Ok((Some(r), false)),
        Err(Error::DegenerateInformation(v)) => {
            log::warn!("degenerate information {v}");
            Ok((None, true))
        }
        Err(e) => Err(e),
    }
}

/// Fit and both tests on one seed; the record `cmd_typeone` stores for it.
pub fn typeone_replicate(cfg: &Resolved, beta_star: &Array1<f64>, replicate: usize) -> Result<TypeOneRow> {
    let seed = cfg.seed + replicate as u64;
    let inst = make_instance(cfg, cfg.n, beta_star.clone(), seed)?;
    let trace = em::run(&inst.model, inst.init.view(), &cfg.em_config(cfg.s_hat))?;
    let beta_hat = trace.estimate();
    infer_record(cfg, &inst.model, beta_hat.view(), replicate, seed)
}

fn infer_record(
    cfg: &Resolved,
    model: &ModelHandle,
    beta_hat: ArrayView1<'_, f64>,
    replicate: usize,
    seed: u64,
) -> Result<TypeOneRow> {
    let icfg = cfg.inference_config();
    let (score, score_degenerate) = split_result(score_test(model, beta_hat, &icfg))?;
    let (wald, wald_degenerate) = split_result(wald_test(model, beta_hat, &icfg))?;
    let nan = f64::NAN;
    Ok(TypeOneRow {
        replicate,
        seed,
        score_statistic: score.as_ref().map_or(nan, |r| r.statistic),
        score_p_value: score.as_ref().map_or(nan, |r| r.p_value),
        score_reject: score.as_ref().is_some_and(|r| r.reject),
        score_degenerate,
        wald_statistic: wald.as_ref().map_or(nan, |r| r.statistic),
        wald_p_value: wald.as_ref().map_or(nan, |r| r.p_value),
        wald_reject: wald.as_ref().is_some_and(|r| r.reject),
        wald_degenerate,
        ci_lo: wald.as_ref().map_or(nan, |r| r.ci_lo),
        ci_hi: wald.as_ref().map_or(nan, |r| r.ci_hi),
    })
}

pub fn summarize_typeone(cfg: &Resolved, beta_star_at_alpha: f64, rows: &[TypeOneRow]) -> TypeOneSummary {
    let covered = rows
        .iter()
        .filter(|r| !r.wald_degenerate && r.ci_lo <= beta_star_at_alpha && beta_star_at_alpha <= r.ci_hi)
        .count();
    let wald = TestSummary::from_flags(rows.iter().map(|r| (r.wald_reject, r.wald_degenerate)));
    TypeOneSummary {
        config: cfg.clone(),
        beta_star_at_alpha,
        score: TestSummary::from_flags(rows.iter().map(|r| (r.score_reject, r.score_degenerate))),
        wald_coverage: if wald.valid == 0 { f64::NAN } else { covered as f64 / wald.valid as f64 },
        wald,
    }
}

/// `replicates` independent generate, fit and test pipelines. Replicate `r`
/// uses seed `seed + r`, so the output does not depend on the thread count.
pub fn cmd_typeone(cfg: &Resolved) -> Result<TypeOneOutput> {
    let beta_star = cfg.beta_star()?;
    if cfg.alpha_index >= cfg.d {
        return Err(Error::invalid(format!("alpha_index {} out of range", cfg.alpha_index)));
    }
    let truth = beta_star[cfg.alpha_index];
    if truth != cfg.null_value {
        log::warn!("null hypothesis is false: beta_star[{}] = {truth}", cfg.alpha_index);
    }
    let rows: Vec<TypeOneRow> = (0..cfg.replicates)
        .into_par_iter()
        .map(|r| typeone_replicate(cfg, &beta_star, r))
        .collect::<Result<_>>()?;
    let summary = summarize_typeone(cfg, truth, &rows);
    Ok(TypeOneOutput { rows, summary })
}

pub fn write_typeone_csv(path: impl AsRef<Path>, rows: &[TypeOneRow]) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv_writer(path)?;
    for row in rows {
        w.serialize(row).map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_typeone_csv(path: impl AsRef<Path>) -> Result<Vec<TypeOneRow>> {
    let path = path.as_ref();
    let mut r = csv::Reader::from_path(path).map_err(|e| Error::io(path, e))?;
    r.deserialize()
        .enumerate()
        .map(|(k, rec)| {
            rec.map_err(|e| {
                let column = match e.kind() {
                    csv::ErrorKind::Deserialize { err, .. } => err.field().map_or(1, |f| f as usize + 1),
                    _ => 1,
                };
                Error::Parse {
                    row: k + 2,
                    column,
                    message: e.to_string(),
                }
            })
        })
        .collect()
}

// ---------------------------------------------------------------- fit / infer

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitOutput {
    pub config: Resolved,
    pub beta_hat: Vec<f64>,
    pub support: Vec<usize>,
    pub iterations: usize,
    pub final_loglik: f64,
    /// Distance to the generating `beta_star` (sign-aligned for mixtures);
    /// absent for external data.
    pub est_error: Option<f64>,
    pub trace: Vec<TraceRow>,
}

fn load_or_generate(cfg: &Resolved) -> Result<(ModelHandle, Array1<f64>, Option<Array1<f64>>)> {
    match &cfg.data_path {
        Some(path) => {
            let data = read_dataset_csv(path, cfg.model, cfg.sigma, cfg.p_m)?;
            let d = data.d();
            let model = cfg.handle(data)?;
            // external data has no truth; start from the perturbed default truth
            let init = make_init(cfg.beta_star_for(d, cfg.s_star.min(d))?.view(), cfg.init_rel_err, cfg.seed)?;
            Ok((model, init, None))
        }
        None => {
            let inst = make_instance(cfg, cfg.n, cfg.beta_star()?, cfg.seed)?;
            Ok((inst.model, inst.init, Some(inst.beta_star)))
        }
    }
}

pub fn cmd_fit(cfg: &Resolved) -> Result<FitOutput> {
    let (model, init, truth) = load_or_generate(cfg)?;
    let trace = em::run(&model, init.view(), &cfg.em_config(cfg.s_hat))?;
    let beta_hat = trace.estimate();
    let est_error = truth.as_ref().map(|t| match cfg.model {
        ModelTag::Rmc => l2_dist(beta_hat.view(), t.view()),
        _ => aligned_error(beta_hat.view(), t.view()),
    });
    let rows = match &truth {
        Some(t) => trace_rows(&trace, t.view()),
        None => trace_rows(&trace, Array1::<f64>::zeros(model.d()).view())
            .into_iter()
            .map(|r| TraceRow { est_error: f64::NAN, ..r })
            .collect(),
    };
    Ok(FitOutput {
        config: cfg.clone(),
        beta_hat: beta_hat.to_vec(),
        support: beta_hat
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != 0.0)
            .map(|(j, _)| j)
            .collect(),
        iterations: trace.num_iterations(),
        final_loglik: trace.logliks.last().copied().unwrap_or(f64::NAN),
        est_error,
        trace: rows,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct InferOutput {
    pub config: Resolved,
    pub beta_hat: Vec<f64>,
    pub score: Option<InferenceResult>,
    pub wald: Option<InferenceResult>,
    /// Same layout as one `cmd_typeone` row.
    pub record: TypeOneRow,
}

/// Score and Wald inference at `beta_hat` (or at a fresh fit when `None`).
pub fn cmd_infer(cfg: &Resolved, beta_hat: Option<Vec<f64>>) -> Result<InferOutput> {
    let (model, init, _) = load_or_generate(cfg)?;
    let beta_hat = match beta_hat {
        Some(b) => Array1::from(b),
        None => em::run(&model, init.view(), &cfg.em_config(cfg.s_hat))?.estimate().clone(),
    };
    if beta_hat.len() != model.d() {
        return Err(Error::invalid(format!(
            "beta_hat has length {}, expected {}",
            beta_hat.len(),
            model.d()
        )));
    }
    let icfg = cfg.inference_config();
    let (score, _) = split_result(score_test(&model, beta_hat.view(), &icfg))?;
    let (wald, _) = split_result(wald_test(&model, beta_hat.view(), &icfg))?;
    let record = infer_record(cfg, &model, beta_hat.view(), 0, cfg.seed)?;
    Ok(InferOutput {
        config: cfg.clone(),
        beta_hat: beta_hat.to_vec(),
        score,
        wald,
        record,
    })
}

pub fn write_json_file(path: impl AsRef<Path>, value: &impl Serialize) -> Result<()> {
    write_json(path.as_ref(), value)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_fit_exact() {
        let x = [1.0, 2.0, 3.0];
        let y = [3.0, 5.0, 7.0];
        let f = fit_line(&x, &y);
        assert!((f.slope - 2.0).abs() < 1e-12 && (f.intercept - 1.0).abs() < 1e-12);
        assert!((f.r2 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn merge_prefers_override() {
        let base = ExperimentConfig {
            d: Some(10),
            n: Some(20),
            ..Default::default()
        };
        let over = ExperimentConfig {
            n: Some(30),
            ..Default::default()
        };
        let m = base.merged(&over);
        assert_eq!((m.d, m.n), (Some(10), Some(30)));
    }

    #[test]
    fn defaults_by_model() {
        let gmm = ExperimentConfig::default().resolve().unwrap();
        assert_eq!((gmm.d, gmm.n, gmm.s_hat, gmm.sigma, gmm.alpha_index), (256, 100, 5, 1.0, 9));
        assert_eq!(gmm.m_step, MStep::Exact);
        let mr = ExperimentConfig {
            model: Some(ModelTag::Mr),
            ..Default::default()
        }
        .resolve()
        .unwrap();
        assert_eq!((mr.sigma, mr.m_step, mr.eta), (0.1, MStep::Gradient, 1.0));
        let bad = ExperimentConfig {
            replicates: Some(0),
            ..Default::default()
        };
        assert!(bad.resolve().is_err());
    }

    #[test]
    fn summary_excludes_degenerate() {
        let s = TestSummary::from_flags([(true, false), (false, false), (true, true)].into_iter());
        assert_eq!((s.rejections, s.valid, s.degenerate), (1, 2, 1));
        assert_eq!(s.rate, 0.5);
    }
}
