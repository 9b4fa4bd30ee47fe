use std::ops::Range;

use ndarray::{s, Array1, Array2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelTag {
    /// Symmetric two-component Gaussian mixture `y = z * beta + v`.
    Gmm,
    /// Symmetric mixture of linear regressions `y = z * <x, beta> + v`.
    Mr,
    /// Linear regression with covariates missing completely at random.
    Rmc,
}

impl ModelTag {
    pub fn name(self) -> &'static str {
        match self {
            ModelTag::Gmm => "gmm",
            ModelTag::Mr => "mr",
            ModelTag::Rmc => "rmc",
        }
    }
}

impl std::fmt::Display for ModelTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for ModelTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "gmm" => Ok(ModelTag::Gmm),
            "mr" => Ok(ModelTag::Mr),
            "rmc" => Ok(ModelTag::Rmc),
            other => Err(Error::invalid(format!("unknown model `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GmmData {
    /// `n x d` observations.
    pub y: Array2<f64>,
    pub sigma: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MrData {
    /// `n x d` covariates.
    pub x: Array2<f64>,
    pub y: Array1<f64>,
    pub sigma: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RmcData {
    /// `n x d` covariates; entries where `mask` is false are ignored.
    pub x: Array2<f64>,
    /// `true` where the covariate was observed.
    pub mask: Array2<bool>,
    pub y: Array1<f64>,
    pub sigma: f64,
    /// Declared missingness probability. Metadata only.
    pub p_m: f64,
}

/// Model-tagged observations.
#[derive(Debug, Clone, PartialEq)]
pub enum Dataset {
    Gmm(GmmData),
    Mr(MrData),
    Rmc(RmcData),
}

impl Dataset {
    pub fn tag(&self) -> ModelTag {
        match self {
            Dataset::Gmm(_) => ModelTag::Gmm,
            Dataset::Mr(_) => ModelTag::Mr,
            Dataset::Rmc(_) => ModelTag::Rmc,
        }
    }

    pub fn n(&self) -> usize {
        match self {
            Dataset::Gmm(g) => g.y.nrows(),
            Dataset::Mr(m) => m.x.nrows(),
            Dataset::Rmc(r) => r.x.nrows(),
        }
    }

    pub fn d(&self) -> usize {
        match self {
            Dataset::Gmm(g) => g.y.ncols(),
            Dataset::Mr(m) => m.x.ncols(),
            Dataset::Rmc(r) => r.x.ncols(),
        }
    }

    pub fn sigma(&self) -> f64 {
        match self {
            Dataset::Gmm(g) => g.sigma,
            Dataset::Mr(m) => m.sigma,
            Dataset::Rmc(r) => r.sigma,
        }
    }

    /// Checks the invariants every model operation relies on.
    pub fn validate(&self) -> Result<()> {
        let (n, d) = (self.n(), self.d());
        if n == 0 || d == 0 {
            return Err(Error::invalid(format!("dataset must have n >= 1 and d >= 1, got n={n}, d={d}")));
        }
        let sigma = self.sigma();
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::invalid(format!("sigma must be positive and finite, got {sigma}")));
        }
        let finite = match self {
            Dataset::Gmm(g) => g.y.iter().all(|v| v.is_finite()),
            Dataset::Mr(m) => {
                if m.y.len() != n {
                    return Err(Error::invalid("x and y disagree on n"));
                }
                m.x.iter().chain(m.y.iter()).all(|v| v.is_finite())
            }
            Dataset::Rmc(r) => {
                if r.y.len() != n || r.mask.dim() != r.x.dim() {
                    return Err(Error::invalid("x, mask and y disagree on shape"));
                }
                if !(0.0..1.0).contains(&r.p_m) {
                    return Err(Error::invalid(format!("p_m must lie in [0, 1), got {}", r.p_m)));
                }
                r.y.iter().all(|v| v.is_finite())
                    && r.x.iter().zip(r.mask.iter()).all(|(v, &obs)| !obs || v.is_finite())
            }
        };
        if !finite {
            return Err(Error::invalid("dataset has non-finite entries"));
        }
        Ok(())
    }

    /// Samples `range` in their original order.
    pub fn subset(&self, range: Range<usize>) -> Dataset {
        let rows = s![range.clone(), ..];
        match self {
            Dataset::Gmm(g) => Dataset::Gmm(GmmData {
                y: g.y.slice(rows).to_owned(),
                sigma: g.sigma,
            }),
            Dataset::Mr(m) => Dataset::Mr(MrData {
                x: m.x.slice(rows).to_owned(),
                y: m.y.slice(s![range]).to_owned(),
                sigma: m.sigma,
            }),
            Dataset::Rmc(r) => Dataset::Rmc(RmcData {
                x: r.x.slice(rows).to_owned(),
                mask: r.mask.slice(rows).to_owned(),
                y: r.y.slice(s![range]).to_owned(),
                sigma: r.sigma,
                p_m: r.p_m,
            }),
        }
    }

    /// Reorders samples so that sample `i` of the result is sample `order[i]`.
    pub fn permuted(&self, order: &[usize]) -> Dataset {
        let pick = |a: &Array2<f64>| a.select(ndarray::Axis(0), order);
        match self {
            Dataset::Gmm(g) => Dataset::Gmm(GmmData { y: pick(&g.y), sigma: g.sigma }),
            Dataset::Mr(m) => Dataset::Mr(MrData {
                x: pick(&m.x),
                y: m.y.select(ndarray::Axis(0), order),
                sigma: m.sigma,
            }),
            Dataset::Rmc(r) => Dataset::Rmc(RmcData {
                x: pick(&r.x),
                mask: r.mask.select(ndarray::Axis(0), order),
                y: r.y.select(ndarray::Axis(0), order),
                sigma: r.sigma,
                p_m: r.p_m,
            }),
        }
    }
}
