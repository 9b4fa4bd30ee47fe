//! Linear regression `y = <x, beta> + v` with covariates missing at random.
//!
//! For sample `i` with observation mask `z`, let `u = (1 - z) * beta`,
//! `v = sigma^2 + ||u||^2` and `r = y - <beta, z * x>`. Given the observed
//! data, the missing block is Gaussian with mean `(r / v) u` and covariance
//! `I - u u' / v`, so
//!
//! - `m = z * x + (r / v) u`
//! - `K = m m' + diag(1 - z) - u u' / v`
//!
//! and `y | x_obs ~ N(<beta, z * x>, v)`.

use ndarray::{Array1, ArrayView1};

use super::RmcData;

struct Conditional {
    /// Conditional mean of the full covariate vector.
    m: Array1<f64>,
    /// `(1 - z) * beta`.
    u: Array1<f64>,
    /// `sigma^2 + ||u||^2`.
    var: f64,
    /// `y - <beta, z * x>`.
    resid: f64,
}

fn conditional(r: &RmcData, beta: ArrayView1<'_, f64>, i: usize) -> Conditional {
    let d = r.x.ncols();
    let x = r.x.row(i);
    let mask = r.mask.row(i);
    let mut observed_fit = 0.0;
    let mut u = Array1::zeros(d);
    let mut m = Array1::zeros(d);
    for j in 0..d {
        if mask[j] {
            observed_fit += beta[j] * x[j];
            m[j] = x[j];
        } else {
            u[j] = beta[j];
        }
    }
    let var = r.sigma * r.sigma + u.dot(&u);
    let resid = r.y[i] - observed_fit;
    m.scaled_add(resid / var, &u);
    Conditional { m, u, var, resid }
}

pub(super) fn q_value(r: &RmcData, beta_prime: ArrayView1<'_, f64>, beta: ArrayView1<'_, f64>) -> f64 {
    let n = r.x.nrows();
    let mut acc = 0.0;
    for i in 0..n {
        let c = conditional(r, beta, i);
        let mask = r.mask.row(i);
        let bm = beta_prime.dot(&c.m);
        let missing_sq: f64 = (0..beta_prime.len())
            .filter(|&j| !mask[j])
            .map(|j| beta_prime[j] * beta_prime[j])
            .sum();
        let bu = beta_prime.dot(&c.u);
        // b' K b' = <b', m>^2 + ||b'_mis||^2 - <b', u>^2 / v
        let quad = bm * bm + missing_sq - bu * bu / c.var;
        acc += r.y[i] * bm - 0.5 * quad;
    }
    acc / n as f64
}

pub(super) fn grad1_q(r: &RmcData, beta: ArrayView1<'_, f64>) -> Array1<f64> {
    let n = r.x.nrows();
    let sigma2 = r.sigma * r.sigma;
    let mut g = Array1::zeros(beta.len());
    for i in 0..n {
        let c = conditional(r, beta, i);
        // y m - K beta, with K beta = m <m, beta> + u * sigma^2 / v
        g.scaled_add(r.y[i] - c.m.dot(&beta), &c.m);
        g.scaled_add(-sigma2 / c.var, &c.u);
    }
    g / n as f64
}

pub(super) fn loglik(r: &RmcData, beta: ArrayView1<'_, f64>) -> f64 {
    let two_pi = 2.0 * std::f64::consts::PI;
    (0..r.x.nrows())
        .map(|i| {
            let c = conditional(r, beta, i);
            -0.5 * (two_pi * c.var).ln() - c.resid * c.resid / (2.0 * c.var)
        })
        .sum()
}
