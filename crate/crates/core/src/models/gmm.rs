//! Symmetric two-component Gaussian mixture `y = z * beta + v`, `v ~ N(0, sigma^2 I)`.

use ndarray::{Array1, Array2, ArrayView1, Axis};

use super::{log_cosh, nu, sigmoid, GmmData};

/// `<beta, y_i> / sigma^2` for every sample.
fn scores(g: &GmmData, beta: ArrayView1<'_, f64>) -> Array1<f64> {
    g.y.dot(&beta) / (g.sigma * g.sigma)
}

pub(super) fn omega(g: &GmmData, beta: ArrayView1<'_, f64>, i: usize) -> f64 {
    let t = g.y.row(i).dot(&beta) / (g.sigma * g.sigma);
    sigmoid(2.0 * t)
}

pub(super) fn q_value(g: &GmmData, beta_prime: ArrayView1<'_, f64>, beta: ArrayView1<'_, f64>) -> f64 {
    let n = g.y.nrows() as f64;
    let t = scores(g, beta);
    let bp2 = beta_prime.dot(&beta_prime);
    let mut acc = 0.0;
    for (row, &ti) in g.y.axis_iter(Axis(0)).zip(t.iter()) {
        let w = sigmoid(2.0 * ti);
        let y2 = row.dot(&row);
        let cross = row.dot(&beta_prime);
        // ||y - b'||^2 and ||y + b'||^2
        let minus = y2 - 2.0 * cross + bp2;
        let plus = y2 + 2.0 * cross + bp2;
        acc += w * minus + (1.0 - w) * plus;
    }
    -acc / (2.0 * n)
}

/// `(1/n) sum_i (2 w_i - 1) y_i`, with `2 w - 1 = tanh(<beta, y>/sigma^2)`.
fn signed_mean(g: &GmmData, beta: ArrayView1<'_, f64>) -> Array1<f64> {
    let n = g.y.nrows() as f64;
    let coef = scores(g, beta).mapv(f64::tanh);
    g.y.t().dot(&coef) / n
}

pub(super) fn grad1_q(g: &GmmData, beta: ArrayView1<'_, f64>) -> Array1<f64> {
    signed_mean(g, beta) - beta
}

pub(super) fn m_step_exact(g: &GmmData, beta: ArrayView1<'_, f64>) -> Array1<f64> {
    signed_mean(g, beta)
}

pub(super) fn t_matrix(g: &GmmData, beta: ArrayView1<'_, f64>) -> Array2<f64> {
    let n = g.y.nrows() as f64;
    let d = g.y.ncols();
    let sigma2 = g.sigma * g.sigma;
    let raw = g.y.dot(&beta);
    let root = raw.mapv(|t| nu(t, sigma2).sqrt());
    let scaled = &g.y * &root.insert_axis(Axis(1));
    let mut t = scaled.t().dot(&scaled) / n;
    for j in 0..d {
        t[[j, j]] -= 1.0;
    }
    symmetrize_exact(&mut t);
    t
}

/// Copies the upper triangle onto the lower one so symmetry is bitwise.
pub(super) fn symmetrize_exact(t: &mut Array2<f64>) {
    let d = t.nrows();
    for i in 0..d {
        for j in (i + 1)..d {
            t[[j, i]] = t[[i, j]];
        }
    }
}

pub(super) fn loglik(g: &GmmData, beta: ArrayView1<'_, f64>) -> f64 {
    let d = g.y.ncols() as f64;
    let sigma2 = g.sigma * g.sigma;
    let b2 = beta.dot(&beta);
    let norm_const = -0.5 * d * (2.0 * std::f64::consts::PI * sigma2).ln();
    g.y.axis_iter(Axis(0))
        .map(|row| {
            let y2 = row.dot(&row);
            let t = row.dot(&beta) / sigma2;
            norm_const - (y2 + b2) / (2.0 * sigma2) + log_cosh(t)
        })
        .sum()
}
