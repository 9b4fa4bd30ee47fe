#![allow(dead_code)]

use hdem::models::ModelHandle;
use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

pub fn normal_vec(rng: &mut ChaCha20Rng, d: usize, scale: f64) -> Array1<f64> {
    Array1::from_iter((0..d).map(|_| scale * rng.sample::<f64, _>(StandardNormal)))
}

pub fn normal_mat(rng: &mut ChaCha20Rng, n: usize, d: usize) -> Array2<f64> {
    Array2::from_shape_fn((n, d), |_| rng.sample::<f64, _>(StandardNormal))
}

fn rademacher(rng: &mut ChaCha20Rng) -> f64 {
    if rng.random::<bool>() {
        1.0
    } else {
        -1.0
    }
}

pub fn random_gmm(rng: &mut ChaCha20Rng, n: usize, d: usize, sigma: f64) -> (ModelHandle, Array1<f64>) {
    let truth = normal_vec(rng, d, 1.0);
    let mut y = normal_mat(rng, n, d) * sigma;
    for mut row in y.rows_mut() {
        let z = rademacher(rng);
        row.scaled_add(z, &truth);
    }
    (ModelHandle::gmm(y, sigma).unwrap(), truth)
}

pub fn random_mr(rng: &mut ChaCha20Rng, n: usize, d: usize, sigma: f64) -> (ModelHandle, Array1<f64>) {
    let truth = normal_vec(rng, d, 1.0);
    let x = normal_mat(rng, n, d);
    let y = Array1::from_iter(x.rows().into_iter().map(|row| {
        rademacher(rng) * row.dot(&truth) + sigma * rng.sample::<f64, _>(StandardNormal)
    }));
    (ModelHandle::mr(x, y, sigma, None).unwrap(), truth)
}

pub fn random_rmc(rng: &mut ChaCha20Rng, n: usize, d: usize, sigma: f64, p_m: f64) -> (ModelHandle, Array1<f64>) {
    let truth = normal_vec(rng, d, 1.0);
    let x = normal_mat(rng, n, d);
    let y = Array1::from_iter(
        x.rows()
            .into_iter()
            .map(|row| row.dot(&truth) + sigma * rng.sample::<f64, _>(StandardNormal)),
    );
    let mask = Array2::from_shape_fn((n, d), |_| rng.random::<f64>() >= p_m);
    (ModelHandle::rmc(x, mask, y, sigma, p_m).unwrap(), truth)
}

/// Central finite-difference gradient.
pub fn fd_gradient(f: impl Fn(&Array1<f64>) -> f64, x: &Array1<f64>, h: f64) -> Array1<f64> {
    let mut g = Array1::zeros(x.len());
    for j in 0..x.len() {
        let mut plus = x.clone();
        let mut minus = x.clone();
        plus[j] += h;
        minus[j] -= h;
        g[j] = (f(&plus) - f(&minus)) / (2.0 * h);
    }
    g
}

pub fn max_abs(v: &Array1<f64>) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

/// `||a - b||_inf / max(||b||_inf, floor)`.
pub fn rel_err(a: &Array1<f64>, b: &Array1<f64>, floor: f64) -> f64 {
    max_abs(&(a - b)) / max_abs(b).max(floor)
}

pub mod lp_oracle;
