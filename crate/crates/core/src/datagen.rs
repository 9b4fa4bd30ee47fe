//! Seeded synthetic data, truth vectors and initializations, plus CSV
//! round-tripping of datasets.
//!
//! Randomness comes from ChaCha20 seeded with `seed_from_u64(seed)`; Gaussian
//! draws use `rand_distr::StandardNormal` (ziggurat) and Rademacher signs use
//! one `bool` draw each. Per sample, in this order:
//!
//! - gmm: `z`, then `d` noise draws
//! - mr: `d` covariates, `z`, one noise draw
//! - rmc: `d` covariates, one noise draw, `d` uniforms for the mask
//!   (coordinate observed iff `u >= p_m`)
//!
//! [`make_init`] draws from stream 1 of the same seed so that it never
//! overlaps the data stream.

use std::path::Path;

use ndarray::{Array1, Array2, ArrayView1};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{Dataset, GmmData, ModelTag, MrData, RmcData};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenSpec {
    pub model: ModelTag,
    pub n: usize,
    pub d: usize,
    pub beta_star: Array1<f64>,
    pub sigma: f64,
    /// Missing probability, rmc only.
    pub p_m: f64,
    pub seed: u64,
}

impl GenSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.d == 0 {
            return Err(Error::invalid("n and d must be positive"));
        }
        if self.beta_star.len() != self.d {
            return Err(Error::invalid(format!(
                "beta_star has length {}, expected {}",
                self.beta_star.len(),
                self.d
            )));
        }
        if self.beta_star.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("beta_star has non-finite entries"));
        }
        if self.model != ModelTag::Rmc && self.beta_star.iter().all(|&v| v == 0.0) {
            return Err(Error::invalid("beta_star must be nonzero for mixture models"));
        }
        // sigma = 0 is allowed here for noiseless data; models need sigma > 0
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return Err(Error::invalid(format!("sigma must be finite and >= 0, got {}", self.sigma)));
        }
        if self.model == ModelTag::Rmc && !(0.0..1.0).contains(&self.p_m) {
            return Err(Error::invalid(format!("p_m must lie in [0, 1), got {}", self.p_m)));
        }
        Ok(())
    }
}

/// `values` followed by `d - values.len()` zeros.
pub fn make_beta_star(d: usize, values: &[f64]) -> Result<Array1<f64>> {
    if values.len() > d {
        return Err(Error::invalid(format!("{} nonzeros do not fit in d = {d}", values.len())));
    }
    let mut beta = Array1::zeros(d);
    for (b, v) in beta.iter_mut().zip(values) {
        *b = *v;
    }
    Ok(beta)
}

fn rademacher(rng: &mut ChaCha20Rng) -> f64 {
    if rng.random::<bool>() {
        1.0
    } else {
        -1.0
    }
}

fn gaussian(rng: &mut ChaCha20Rng) -> f64 {
    rng.sample(StandardNormal)
}

pub fn gen_dataset(setup: &GenSpec) -> Result<Dataset> {
    setup.validate()?;
    let (n, d, sigma) = (setup.n, setup.d, setup.sigma);
    let beta = &setup.beta_star;
    let mut rng = ChaCha20Rng::seed_from_u64(setup.seed);
    Ok(match setup.model {
        ModelTag::Gmm => {
            let mut y = Array2::zeros((n, d));
            for mut row in y.rows_mut() {
                let z = rademacher(&mut rng);
                for (yj, bj) in row.iter_mut().zip(beta) {
                    *yj = z * bj + sigma * gaussian(&mut rng);
                }
            }
            Dataset::Gmm(GmmData { y, sigma })
        }
        ModelTag::Mr => {
            let mut x = Array2::zeros((n, d));
            let mut y = Array1::zeros(n);
            for (i, mut row) in x.rows_mut().into_iter().enumerate() {
                row.iter_mut().for_each(|v| *v = gaussian(&mut rng));
                let z = rademacher(&mut rng);
                y[i] = z * row.dot(beta) + sigma * gaussian(&mut rng);
            }
            Dataset::Mr(MrData { x, y, sigma })
        }
        ModelTag::Rmc => {
            let mut x = Array2::zeros((n, d));
            let mut y = Array1::zeros(n);
            let mut mask = Array2::from_elem((n, d), true);
            for i in 0..n {
                x.row_mut(i).iter_mut().for_each(|v| *v = gaussian(&mut rng));
                y[i] = x.row(i).dot(beta) + sigma * gaussian(&mut rng);
                for m in mask.row_mut(i).iter_mut() {
                    *m = rng.random::<f64>() >= setup.p_m;
                }
            }
            Dataset::Rmc(RmcData { x, mask, y, sigma, p_m: setup.p_m })
        }
    })
}

/// `beta_star + u` with `u` a seeded Gaussian direction rescaled so that
/// `||u||_2 = rel_err * ||beta_star||_2`.
pub fn make_init(beta_star: ArrayView1<'_, f64>, rel_err: f64, seed: u64) -> Result<Array1<f64>> {
    if !(rel_err >= 0.0 && rel_err.is_finite()) {
        return Err(Error::invalid(format!("rel_err must be finite and >= 0, got {rel_err}")));
    }
    let norm = beta_star.dot(&beta_star).sqrt();
    if rel_err == 0.0 {
        return Ok(beta_star.to_owned());
    }
    if norm == 0.0 {
        return Err(Error::invalid("cannot perturb relative to a zero beta_star"));
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(1);
    let mut u: Array1<f64> = Array1::from_iter((0..beta_star.len()).map(|_| gaussian(&mut rng)));
    let un = u.dot(&u).sqrt();
    u *= rel_err * norm / un;
    Ok(&beta_star + &u)
}

fn header(tag: ModelTag, d: usize) -> Vec<String> {
    let xs = (0..d).map(|j| format!("x{j}"));
    match tag {
        ModelTag::Gmm => (0..d).map(|j| format!("y{j}")).collect(),
        ModelTag::Mr => xs.chain(std::iter::once("y".to_string())).collect(),
        ModelTag::Rmc => xs
            .chain(std::iter::once("y".to_string()))
            .chain((0..d).map(|j| format!("m{j}")))
            .collect(),
    }
}

/// Writes one row per sample. The rmc mask follows `y` as a block of 0/1
/// columns `m0..m{d-1}`; unobserved covariates are written as empty fields.
pub fn write_dataset_csv(path: impl AsRef<Path>, data: &Dataset) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::io(path, e))?;
    let io = |e: csv::Error| Error::io(path, e);
    let d = data.d();
    w.write_record(header(data.tag(), d)).map_err(io)?;
    let mut record: Vec<String> = Vec::new();
    for i in 0..data.n() {
        record.clear();
        match data {
            Dataset::Gmm(g) => record.extend(g.y.row(i).iter().map(|v| v.to_string())),
            Dataset::Mr(m) => {
                record.extend(m.x.row(i).iter().map(|v| v.to_string()));
                record.push(m.y[i].to_string());
            }
            Dataset::Rmc(r) => {
                let mask = r.mask.row(i);
                record.extend(
                    r.x.row(i)
                        .iter()
                        .zip(mask.iter())
                        .map(|(v, &obs)| if obs { v.to_string() } else { String::new() }),
                );
                record.push(r.y[i].to_string());
                record.extend(mask.iter().map(|&obs| if obs { "1" } else { "0" }.to_string()));
            }
        }
        w.write_record(&record).map_err(io)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn parse_f64(field: &str, row: usize, column: usize) -> Result<f64> {
    field.trim().parse::<f64>().map_err(|e| Error::Parse {
        row,
        column,
        message: format!("`{field}`: {e}"),
    })
}

/// Reads a dataset written by [`write_dataset_csv`] (or any file with the same
/// header). Row and column numbers in errors are 1-based and count the header
/// as row 1.
pub fn read_dataset_csv(path: impl AsRef<Path>, tag: ModelTag, sigma: f64, p_m: f64) -> Result<Dataset> {
    let path = path.as_ref();
    let mut r = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| Error::io(path, e))?;
    let head = r.headers().map_err(|e| Error::io(path, e))?.clone();
    let width = head.len();
    let d = match tag {
        ModelTag::Gmm => width,
        ModelTag::Mr => width.saturating_sub(1),
        ModelTag::Rmc => width.saturating_sub(1) / 2,
    };
    if d == 0 || header(tag, d).iter().map(String::as_str).ne(head.iter()) {
        return Err(Error::Parse {
            row: 1,
            column: 1,
            message: format!("header does not match the {tag} layout"),
        });
    }
    let mut xs: Vec<f64> = Vec::new();
    let mut ys: Vec<f64> = Vec::new();
    let mut masks: Vec<bool> = Vec::new();
    for (k, rec) in r.records().enumerate() {
        let row = k + 2;
        let rec = rec.map_err(|e| Error::Parse {
            row,
            column: 1,
            message: e.to_string(),
        })?;
        if rec.len() != width {
            return Err(Error::Parse {
                row,
                column: rec.len().min(width) + 1,
                message: format!("expected {width} fields, found {}", rec.len()),
            });
        }
        match tag {
            ModelTag::Gmm => {
                for (j, f) in rec.iter().enumerate() {
                    ys.push(parse_f64(f, row, j + 1)?);
                }
            }
            ModelTag::Mr => {
                for (j, f) in rec.iter().take(d).enumerate() {
                    xs.push(parse_f64(f, row, j + 1)?);
                }
                ys.push(parse_f64(&rec[d], row, d + 1)?);
            }
            ModelTag::Rmc => {
                let start = masks.len();
                for j in 0..d {
                    let col = d + 2 + j;
                    masks.push(match rec[d + 1 + j].trim() {
                        "1" => true,
                        "0" => false,
                        other => {
                            return Err(Error::Parse {
                                row,
                                column: col,
                                message: format!("mask entry must be 0 or 1, got `{other}`"),
                            })
                        }
                    });
                }
                for j in 0..d {
                    let f = &rec[j];
                    xs.push(if masks[start + j] {
                        parse_f64(f, row, j + 1)?
                    } else if f.trim().is_empty() {
                        f64::NAN
                    } else {
                        parse_f64(f, row, j + 1)?
                    });
                }
                ys.push(parse_f64(&rec[d], row, d + 1)?);
            }
        }
    }
    let n = match tag {
        ModelTag::Gmm => ys.len() / d,
        _ => ys.len(),
    };
    let shape_err = |e: ndarray::ShapeError| Error::invalid(e.to_string());
    let data = match tag {
        ModelTag::Gmm => Dataset::Gmm(GmmData {
            y: Array2::from_shape_vec((n, d), ys).map_err(shape_err)?,
            sigma,
        }),
        ModelTag::Mr => Dataset::Mr(MrData {
            x: Array2::from_shape_vec((n, d), xs).map_err(shape_err)?,
            y: Array1::from(ys),
            sigma,
        }),
        ModelTag::Rmc => Dataset::Rmc(RmcData {
            x: Array2::from_shape_vec((n, d), xs).map_err(shape_err)?,
            mask: Array2::from_shape_vec((n, d), masks).map_err(shape_err)?,
            y: Array1::from(ys),
            sigma,
            p_m,
        }),
    };
    data.validate()?;
    Ok(data)
}
