//! Symmetric mixture of linear regressions `y = z * <x, beta> + v`.

use ndarray::{Array1, Array2, ArrayView1, Axis};

use super::gmm::symmetrize_exact;
use super::{log_cosh, nu, sigmoid, MrData};

pub(super) fn omega(m: &MrData, beta: ArrayView1<'_, f64>, i: usize) -> f64 {
    let t = m.y[i] * m.x.row(i).dot(&beta) / (m.sigma * m.sigma);
    sigmoid(2.0 * t)
}

pub(super) fn q_value(m: &MrData, beta_prime: ArrayView1<'_, f64>, beta: ArrayView1<'_, f64>) -> f64 {
    let n = m.x.nrows() as f64;
    let sigma2 = m.sigma * m.sigma;
    let fit = m.x.dot(&beta);
    let fit_prime = m.x.dot(&beta_prime);
    let mut acc = 0.0;
    for i in 0..m.x.nrows() {
        let w = sigmoid(2.0 * m.y[i] * fit[i] / sigma2);
        let minus = (m.y[i] - fit_prime[i]).powi(2);
        let plus = (m.y[i] + fit_prime[i]).powi(2);
        acc += w * minus + (1.0 - w) * plus;
    }
    -acc / (2.0 * n)
}

/// `(1/n) sum_i (2 w_i - 1) y_i x_i`.
pub(super) fn weighted_moment(m: &MrData, beta: ArrayView1<'_, f64>) -> Array1<f64> {
    let n = m.x.nrows() as f64;
    let sigma2 = m.sigma * m.sigma;
    let fit = m.x.dot(&beta);
    let coef = Array1::from_iter(
        m.y.iter()
            .zip(fit.iter())
            .map(|(&y, &f)| (y * f / sigma2).tanh() * y),
    );
    m.x.t().dot(&coef) / n
}

pub(super) fn grad1_q(m: &MrData, beta: ArrayView1<'_, f64>) -> Array1<f64> {
    let n = m.x.nrows() as f64;
    let sigma2 = m.sigma * m.sigma;
    let fit = m.x.dot(&beta);
    let coef = Array1::from_iter(
        m.y.iter()
            .zip(fit.iter())
            .map(|(&y, &f)| (y * f / sigma2).tanh() * y - f),
    );
    m.x.t().dot(&coef) / n
}

pub(super) fn sigma_hat(m: &MrData) -> Array2<f64> {
    let n = m.x.nrows() as f64;
    let mut s = m.x.t().dot(&m.x) / n;
    symmetrize_exact(&mut s);
    s
}

pub(super) fn t_matrix(m: &MrData, beta: ArrayView1<'_, f64>) -> Array2<f64> {
    let n = m.x.nrows() as f64;
    let sigma2 = m.sigma * m.sigma;
    let fit = m.x.dot(&beta);
    // (1/n) sum_i (nu_i y_i^2 - 1) x_i x_i'
    let coef = Array1::from_iter(
        m.y.iter()
            .zip(fit.iter())
            .map(|(&y, &f)| nu(y * f, sigma2) * y * y - 1.0),
    );
    let weighted = &m.x * &coef.insert_axis(Axis(1));
    let mut t = m.x.t().dot(&weighted) / n;
    symmetrize_exact(&mut t);
    t
}

pub(super) fn loglik(m: &MrData, beta: ArrayView1<'_, f64>) -> f64 {
    let sigma2 = m.sigma * m.sigma;
    let norm_const = -0.5 * (2.0 * std::f64::consts::PI * sigma2).ln();
    let fit = m.x.dot(&beta);
    m.y.iter()
        .zip(fit.iter())
        .map(|(&y, &f)| norm_const - (y * y + f * f) / (2.0 * sigma2) + log_cosh(y * f / sigma2))
        .sum()
}
