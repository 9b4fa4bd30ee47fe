//! `hdem` experiment driver. Flags override values read from `--config`.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use hdem::em::MStep;
use hdem::experiments::{
    cmd_fit, cmd_infer, cmd_scaling, cmd_trace, cmd_typeone, write_json_file, write_scaling_csv, write_trace_csv,
    write_typeone_csv, ExperimentConfig,
};
use hdem::ModelTag;

#[derive(Parser)]
#[command(name = "hdem", version, about = "Sparse EM estimation and inference experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Per-iteration optimization and estimation error of one run.
    Trace(Common),
    /// Final error over the (s_star, n) grid and a line fit against sqrt(s log d / n).
    Scaling(Common),
    /// Rejection rates of the score and Wald tests over replicates.
    Typeone(Common),
    /// Fit one dataset and report the estimate.
    Fit(Common),
    /// Score and Wald inference for one coordinate.
    Infer {
        #[command(flatten)]
        common: Common,
        /// Comma-separated estimate to test at; a fresh fit is used when absent.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        beta_hat: Option<Vec<f64>>,
    },
}

#[derive(Args)]
struct Common {
    /// JSON file with experiment settings.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output file.
    #[arg(long)]
    out: PathBuf,
    /// gmm, mr or rmc.
    #[arg(long)]
    model: Option<ModelTag>,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    s_star: Option<usize>,
    #[arg(long)]
    s_hat: Option<usize>,
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long)]
    p_m: Option<f64>,
    /// exact or gradient.
    #[arg(long)]
    m_step: Option<MStep>,
    #[arg(long)]
    eta: Option<f64>,
    /// Number of EM iterations.
    #[arg(long = "T")]
    iterations: Option<usize>,
    /// Use a fresh sample block per iteration.
    #[arg(long)]
    resample: bool,
    /// Tuning parameter of the Dantzig step.
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    alpha_index: Option<usize>,
    #[arg(long)]
    null_value: Option<f64>,
    #[arg(long)]
    replicates: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// CSV dataset for `fit` and `infer`.
    #[arg(long)]
    data: Option<String>,
}

impl Common {
    fn config(&self) -> Result<hdem::experiments::Resolved> {
        let base = match &self.config {
            Some(p) => ExperimentConfig::from_json_file(p).with_context(|| format!("reading {}", p.display()))?,
            None => ExperimentConfig::default(),
        };
        let flags = ExperimentConfig {
            model: self.model,
            d: self.d,
            n: self.n,
            s_star: self.s_star,
            s_hat: self.s_hat,
            sigma: self.sigma,
            p_m: self.p_m,
            m_step: self.m_step,
            eta: self.eta,
            iterations: self.iterations,
            resample: self.resample.then_some(true),
            lambda: self.lambda,
            delta: self.delta,
            alpha_index: self.alpha_index,
            null_value: self.null_value,
            replicates: self.replicates,
            seed: self.seed,
            data_path: self.data.clone(),
            ..Default::default()
        };
        Ok(base.merged(&flags).resolve()?)
    }
}

fn sidecar(out: &Path) -> PathBuf {
    out.with_extension("json")
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Trace(c) => {
            let out = cmd_trace(&c.config()?)?;
            write_trace_csv(&c.out, &out.rows)?;
            if let Some(last) = out.rows.last() {
                println!("{} iterations, final estimation error {:.6}", last.t, last.est_error);
            }
        }
        Command::Scaling(c) => {
            let out = cmd_scaling(&c.config()?)?;
            write_scaling_csv(&c.out, &out.rows)?;
            write_json_file(sidecar(&c.out), &out.fit)?;
            println!("slope {:.6}, intercept {:.6}, R^2 {:.4}", out.fit.slope, out.fit.intercept, out.fit.r2);
        }
        Command::Typeone(c) => {
            let out = cmd_typeone(&c.config()?)?;
            write_typeone_csv(&c.out, &out.rows)?;
            write_json_file(sidecar(&c.out), &out.summary)?;
            let s = &out.summary;
            println!(
                "score rate {:.4}, wald rate {:.4}, wald coverage {:.4}",
                s.score.rate, s.wald.rate, s.wald_coverage
            );
        }
        Command::Fit(c) => {
            let out = cmd_fit(&c.config()?)?;
            write_json_file(&c.out, &out)?;
            println!("support {:?}, final loglik {:.6}", out.support, out.final_loglik);
        }
        Command::Infer { common, beta_hat } => {
            let out = cmd_infer(&common.config()?, beta_hat)?;
            write_json_file(&common.out, &out)?;
            let r = &out.record;
            println!(
                "score {:.4} (p = {:.4}), wald {:.4} (p = {:.4}), interval [{:.4}, {:.4}]",
                r.score_statistic, r.score_p_value, r.wald_statistic, r.wald_p_value, r.ci_lo, r.ci_hi
            );
        }
    }
    Ok(())
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    run(cli)
}
