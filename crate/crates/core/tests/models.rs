mod common;

use common::*;
use hdem::models::{Dataset, ModelHandle};
use hdem::Error;
use ndarray::{array, Array1, Array2};
use rand::Rng;

/// Per-sample double loop for `Q_n`, written against the textbook forms.
fn naive_q(model: &ModelHandle, bp: &Array1<f64>, b: &Array1<f64>) -> f64 {
    let d = model.d();
    let s2 = model.sigma() * model.sigma();
    let mut total = 0.0;
    match model.data() {
        Dataset::Gmm(g) => {
            for i in 0..g.y.nrows() {
                let mut ip = 0.0;
                for j in 0..d {
                    ip += b[j] * g.y[[i, j]];
                }
                let w = 1.0 / (1.0 + (-2.0 * ip / s2).exp());
                let (mut minus, mut plus) = (0.0, 0.0);
                for j in 0..d {
                    minus += (g.y[[i, j]] - bp[j]).powi(2);
                    plus += (g.y[[i, j]] + bp[j]).powi(2);
                }
                total += -0.5 * (w * minus + (1.0 - w) * plus);
            }
        }
        Dataset::Mr(m) => {
            for i in 0..m.x.nrows() {
                let (mut f, mut fp) = (0.0, 0.0);
                for j in 0..d {
                    f += m.x[[i, j]] * b[j];
                    fp += m.x[[i, j]] * bp[j];
                }
                let w = 1.0 / (1.0 + (-2.0 * m.y[i] * f / s2).exp());
                total += -0.5 * (w * (m.y[i] - fp).powi(2) + (1.0 - w) * (m.y[i] + fp).powi(2));
            }
        }
        Dataset::Rmc(r) => {
            for i in 0..r.x.nrows() {
                let z: Vec<f64> = (0..d).map(|j| if r.mask[[i, j]] { 1.0 } else { 0.0 }).collect();
                let u: Vec<f64> = (0..d).map(|j| (1.0 - z[j]) * b[j]).collect();
                let v = s2 + u.iter().map(|x| x * x).sum::<f64>();
                let obs: f64 = (0..d).map(|j| b[j] * z[j] * r.x[[i, j]]).sum();
                let m: Vec<f64> = (0..d)
                    .map(|j| z[j] * r.x[[i, j]] + (r.y[i] - obs) / v * u[j])
                    .collect();
                let mut k = Array2::<f64>::zeros((d, d));
                for a in 0..d {
                    for c in 0..d {
                        k[[a, c]] = m[a] * m[c] - u[a] * u[c] / v;
                    }
                    k[[a, a]] += 1.0 - z[a];
                }
                let lin: f64 = (0..d).map(|j| bp[j] * m[j]).sum();
                let mut quad = 0.0;
                for a in 0..d {
                    for c in 0..d {
                        quad += bp[a] * k[[a, c]] * bp[c];
                    }
                }
                total += r.y[i] * lin - 0.5 * quad;
            }
        }
    }
    total / model.n() as f64
}

fn models_for(seed: u64, n: usize, d: usize, sigma: f64) -> Vec<ModelHandle> {
    let mut r = rng(seed);
    vec![
        random_gmm(&mut r, n, d, sigma).0,
        random_mr(&mut r, n, d, sigma).0,
        random_rmc(&mut r, n, d, sigma, 0.3).0,
    ]
}

#[test]
fn omega_examples() {
    let sigma = 1.7f64;
    let s2 = sigma * sigma;
    // <beta, y> = 0 and <beta, y> = sigma^2 ln 3 / 2
    let y = array![[1.0, -1.0], [s2 * 3f64.ln() / 2.0, 0.0]];
    let gmm = ModelHandle::gmm(y, sigma).unwrap();
    let beta = array![1.0, 1.0];
    assert_eq!(gmm.weight_omega(beta.view(), 0).unwrap(), 0.5);
    let beta = array![1.0, 0.0];
    assert!((gmm.weight_omega(beta.view(), 1).unwrap() - 0.75).abs() < 1e-15);

    let mr = ModelHandle::mr(array![[0.0, 2.0]], array![3.0], 1.0, None).unwrap();
    assert_eq!(mr.weight_omega(array![5.0, 0.0].view(), 0).unwrap(), 0.5);
    assert!(mr.weight_omega(array![5.0, 0.0].view(), 1).is_err());
}

#[test]
fn gmm_weight_sign_symmetry() {
    let mut r = rng(11);
    for _ in 0..20 {
        let (model, _) = random_gmm(&mut r, 4, 3, 0.8);
        let Dataset::Gmm(g) = model.data() else { unreachable!() };
        let flipped = ModelHandle::gmm(-&g.y, g.sigma).unwrap();
        let beta = normal_vec(&mut r, 3, 2.0);
        for i in 0..4 {
            let a = model.weight_omega(beta.view(), i).unwrap();
            let b = flipped.weight_omega(beta.view(), i).unwrap();
            assert!((a + b - 1.0).abs() < 1e-14);
        }
    }
}

#[test]
fn q_value_matches_naive_loop() {
    for seed in 0..5 {
        for model in models_for(100 + seed, 5, 3, 0.9) {
            let mut r = rng(seed);
            let b = normal_vec(&mut r, 3, 1.0);
            let bp = normal_vec(&mut r, 3, 1.0);
            let got = model.q_value(bp.view(), b.view()).unwrap();
            let want = naive_q(&model, &bp, &b);
            assert!((got - want).abs() <= 1e-12 * want.abs().max(1.0), "{:?}: {got} vs {want}", model.tag());
        }
    }
}

#[test]
fn q_value_gmm_at_zero() {
    let y = array![[1.0, 2.0], [-0.5, 0.5], [3.0, 0.0]];
    let model = ModelHandle::gmm(y.clone(), 1.3).unwrap();
    let zero = Array1::zeros(2);
    let expected = -y.iter().map(|v| v * v).sum::<f64>() / (2.0 * 3.0);
    assert!((model.q_value(zero.view(), zero.view()).unwrap() - expected).abs() < 1e-15);
    assert!(model.q_value(array![1.0].view(), zero.view()).is_err());
}

#[test]
fn rmc_full_mask_is_complete_data_regression() {
    let mut r = rng(5);
    let (n, d) = (8, 4);
    let x = normal_mat(&mut r, n, d);
    let y = normal_vec(&mut r, n, 1.0);
    let model = ModelHandle::rmc(x.clone(), Array2::from_elem((n, d), true), y.clone(), 0.7, 0.0).unwrap();
    for _ in 0..5 {
        let b = normal_vec(&mut r, d, 1.0);
        let bp = normal_vec(&mut r, d, 1.0);
        let fit_p = x.dot(&bp);
        let want: f64 = (0..n).map(|i| y[i] * fit_p[i] - 0.5 * fit_p[i] * fit_p[i]).sum::<f64>() / n as f64;
        assert!((model.q_value(bp.view(), b.view()).unwrap() - want).abs() < 1e-12);

        let fit = x.dot(&b);
        let ols = x.t().dot(&(&y - &fit)) / n as f64;
        let g = model.grad1_q(b.view()).unwrap();
        assert!(max_abs(&(&g - &ols)) < 1e-12);
    }
}

#[test]
fn grad1_q_matches_q_finite_differences() {
    for seed in 0..5 {
        for model in models_for(200 + seed, 6, 4, 0.8) {
            let mut r = rng(seed + 50);
            let b = normal_vec(&mut r, 4, 1.0);
            let g = model.grad1_q(b.view()).unwrap();
            let fd = fd_gradient(|bp| model.q_value(bp.view(), b.view()).unwrap(), &b, 1e-5);
            assert!(rel_err(&fd, &g, 1e-6) < 1e-5, "{:?}: {fd} vs {g}", model.tag());
        }
    }
}

#[test]
fn gmm_gradient_vanishes_at_zero() {
    let mut r = rng(3);
    let (model, _) = random_gmm(&mut r, 10, 5, 1.0);
    let zero = Array1::zeros(5);
    assert_eq!(model.grad1_q(zero.view()).unwrap(), Array1::<f64>::zeros(5));
    assert_eq!(model.m_step_exact(zero.view()).unwrap(), Array1::<f64>::zeros(5));
}

#[test]
fn score_identity_matches_loglik_gradient() {
    // literal at sigma = 1; for general sigma the surrogate carries a sigma^2 factor
    for (seed, sigma) in [(1u64, 1.0), (2, 1.0), (3, 0.6), (4, 1.9)] {
        for model in models_for(300 + seed, 30, 5, sigma) {
            let mut r = rng(seed + 7);
            let b = normal_vec(&mut r, 5, 1.0);
            let n = model.n() as f64;
            let fd = fd_gradient(|x| model.loglik(x.view()).unwrap() / n, &b, 1e-5);
            let g = model.grad1_q(b.view()).unwrap() * model.fisher_scale();
            assert!(rel_err(&g, &fd, 1e-6) < 1e-5, "{:?} sigma={sigma}: {g} vs {fd}", model.tag());
            if sigma == 1.0 {
                let raw = model.grad1_q(b.view()).unwrap();
                assert!(rel_err(&raw, &fd, 1e-6) < 1e-5);
            }
        }
    }
}

#[test]
fn jensen_lower_bound() {
    for (seed, sigma) in [(1u64, 1.0), (2, 0.5)] {
        for model in models_for(400 + seed, 20, 4, sigma) {
            let mut r = rng(seed);
            for _ in 0..100 {
                let b = normal_vec(&mut r, 4, 1.5);
                let bp = normal_vec(&mut r, 4, 1.5);
                let lhs = model.loglik(b.view()).unwrap() - model.loglik(bp.view()).unwrap();
                let rhs = model.n() as f64
                    * model.fisher_scale()
                    * (model.q_value(b.view(), bp.view()).unwrap() - model.q_value(bp.view(), bp.view()).unwrap());
                assert!(lhs - rhs >= -1e-9, "{:?}: {lhs} < {rhs}", model.tag());
            }
        }
    }
}

#[test]
fn loglik_single_sample_at_zero() {
    let sigma: f64 = 1.4;
    let y = array![[0.3, -1.2, 2.0]];
    let gmm = ModelHandle::gmm(y.clone(), sigma).unwrap();
    let d = 3.0;
    let want = -d / 2.0 * (2.0 * std::f64::consts::PI * sigma * sigma).ln()
        - y.iter().map(|v| v * v).sum::<f64>() / (2.0 * sigma * sigma);
    assert!((gmm.loglik(Array1::zeros(3).view()).unwrap() - want).abs() < 1e-12);

    let mr = ModelHandle::mr(array![[0.5, 1.0]], array![0.8], sigma, None).unwrap();
    let want = -0.5 * (2.0 * std::f64::consts::PI * sigma * sigma).ln() - 0.64 / (2.0 * sigma * sigma);
    assert!((mr.loglik(Array1::zeros(2).view()).unwrap() - want).abs() < 1e-12);
}

#[test]
fn exact_m_step_gmm() {
    let mut r = rng(21);
    let (model, truth) = random_gmm(&mut r, 40, 4, 1.0);
    let b = normal_vec(&mut r, 4, 1.0);
    let m = model.m_step_exact(b.view()).unwrap();
    // stationary point of the concave quadratic Q_n(.; b)
    let fd = fd_gradient(|bp| model.q_value(bp.view(), b.view()).unwrap(), &m, 1e-5);
    assert!(max_abs(&fd) <= 1e-6);
    for _ in 0..10 {
        let other = &m + &normal_vec(&mut r, 4, 0.1);
        assert!(model.q_value(other.view(), b.view()).unwrap() < model.q_value(m.view(), b.view()).unwrap());
    }

    // saturated weights: every <beta, y_i> / sigma^2 >= 40
    let Dataset::Gmm(g) = model.data() else { unreachable!() };
    let signs = g.y.dot(&truth).mapv(f64::signum);
    let y_pos = &g.y * &signs.clone().insert_axis(ndarray::Axis(1));
    let sat = ModelHandle::gmm(y_pos.clone(), 1.0).unwrap();
    let big = &truth * 1e3;
    assert!(y_pos.dot(&big).iter().all(|v| *v >= 40.0));
    let mean = y_pos.mean_axis(ndarray::Axis(0)).unwrap();
    assert!(max_abs(&(&sat.m_step_exact(big.view()).unwrap() - &mean)) < 1e-12);
}

#[test]
fn exact_m_step_mr_clime_feasibility() {
    let mut r = rng(33);
    let (model, _) = random_mr(&mut r, 50, 4, 0.5);
    let lambda = model.clime_lambda().unwrap();
    let b = normal_vec(&mut r, 4, 1.0);
    let m = model.m_step_exact(b.view()).unwrap();
    let sigma_hat = model.sigma_hat().unwrap();
    // (1/n) sum (2w - 1) y x  ==  grad1_q + Sigma_hat b
    let moment = model.grad1_q(b.view()).unwrap() + sigma_hat.dot(&b);
    let resid = max_abs(&(sigma_hat.dot(&m) - &moment));
    let l1 = moment.iter().map(|v| v.abs()).sum::<f64>();
    assert!(resid <= lambda * l1 + 1e-8, "{resid} > {}", lambda * l1);
}

#[test]
fn gradient_m_step_definitional() {
    for model in models_for(55, 10, 3, 1.0) {
        let mut r = rng(9);
        let b = normal_vec(&mut r, 3, 1.0);
        assert_eq!(model.m_step_gradient(b.view(), 0.0).unwrap(), b);
        let g = model.grad1_q(b.view()).unwrap();
        let step = model.m_step_gradient(b.view(), 0.37).unwrap();
        for j in 0..3 {
            assert_eq!(step[j], b[j] + 0.37 * g[j]);
        }
        assert!(model.m_step_gradient(b.view(), -1.0).is_err());
    }
    // a stationary point is a fixed point
    let y = array![[1.0, 0.0], [-1.0, 0.0]];
    let model = ModelHandle::gmm(y, 1.0).unwrap();
    let zero = Array1::zeros(2);
    assert_eq!(model.m_step_gradient(zero.view(), 1.0).unwrap(), zero);
}

#[test]
fn t_matrix_at_zero_and_symmetry() {
    let mut r = rng(44);
    let sigma = 1.3;
    let (model, _) = random_gmm(&mut r, 15, 4, sigma);
    let Dataset::Gmm(g) = model.data() else { unreachable!() };
    let t0 = model.t_matrix(Array1::zeros(4).view()).unwrap();
    let want = g.y.t().dot(&g.y) / (15.0 * sigma * sigma) - Array2::<f64>::eye(4);
    assert!(t0.iter().zip(want.iter()).all(|(a, b)| (a - b).abs() < 1e-12));

    for model in models_for(45, 12, 5, 0.7).into_iter().take(2) {
        let b = normal_vec(&mut r, 5, 2.0);
        let t = model.t_matrix(b.view()).unwrap();
        assert_eq!(t, t.t());
    }
}

#[test]
fn t_matrix_directional_derivative() {
    for seed in 0..10 {
        for model in models_for(500 + seed, 20, 5, 1.0).into_iter().take(2) {
            let mut r = rng(seed);
            let b = normal_vec(&mut r, 5, 0.5);
            let mut v = normal_vec(&mut r, 5, 1.0);
            v /= v.dot(&v).sqrt();
            let h = 1e-5;
            let plus = model.grad1_q((&b + &(&v * h)).view()).unwrap();
            let minus = model.grad1_q((&b - &(&v * h)).view()).unwrap();
            let fd = (plus - minus) / (2.0 * h);
            let tv = model.t_matrix(b.view()).unwrap().dot(&v);
            assert!(rel_err(&tv, &fd, 1e-6) < 1e-4, "{:?}: {tv} vs {fd}", model.tag());
        }
    }
}

#[test]
fn self_consistency_at_truth_small_noise() {
    let mut r = rng(77);
    let sigma = 1e-3;
    let truth = array![2.0, -1.0, 0.0, 0.5];
    let mut y = normal_mat(&mut r, 200, 4) * sigma;
    for mut row in y.rows_mut() {
        let z = if r.random::<bool>() { 1.0 } else { -1.0 };
        row.scaled_add(z, &truth);
    }
    let model = ModelHandle::gmm(y, sigma).unwrap();
    let g = model.grad1_q(truth.view()).unwrap();
    assert!(g.dot(&g).sqrt() <= 1e-2 * truth.dot(&truth).sqrt());
}

#[test]
fn outputs_invariant_to_sample_order() {
    for model in models_for(66, 9, 3, 0.9) {
        let order: Vec<usize> = vec![4, 0, 8, 2, 6, 1, 7, 3, 5];
        let shuffled = ModelHandle::new(model.data().permuted(&order), model.clime_lambda()).unwrap();
        let mut r = rng(1);
        let b = normal_vec(&mut r, 3, 1.0);
        let bp = normal_vec(&mut r, 3, 1.0);
        let close = |a: f64, c: f64| (a - c).abs() <= 1e-12 * (1.0 + a.abs());
        assert!(close(model.q_value(bp.view(), b.view()).unwrap(), shuffled.q_value(bp.view(), b.view()).unwrap()));
        assert!(close(model.loglik(b.view()).unwrap(), shuffled.loglik(b.view()).unwrap()));
        let g1 = model.grad1_q(b.view()).unwrap();
        let g2 = shuffled.grad1_q(b.view()).unwrap();
        assert!(max_abs(&(&g1 - &g2)) < 1e-12);
        if let (Ok(t1), Ok(t2)) = (model.t_matrix(b.view()), shuffled.t_matrix(b.view())) {
            assert!(t1.iter().zip(t2.iter()).all(|(a, c)| (a - c).abs() < 1e-12));
        }
    }
}

#[test]
fn mr_exact_m_step_rejects_infeasible_clime() {
    // a zero covariate column makes every CLIME column touching it infeasible at lambda < 1
    let x = array![[1.0, 0.0], [2.0, 0.0], [-1.0, 0.0]];
    let model = ModelHandle::mr(x, array![1.0, 2.0, 0.5], 1.0, Some(0.1)).unwrap();
    assert!(matches!(
        model.m_step_exact(array![0.1, 0.1].view()),
        Err(Error::ClimeColumnInfeasible { column: 1, .. })
    ));
}
