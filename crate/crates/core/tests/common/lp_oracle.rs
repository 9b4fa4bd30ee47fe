//! Exhaustive vertex-enumeration oracles for small linear programs.

use itertools::Itertools;
use ndarray::{Array1, Array2, ArrayView1, ArrayView2};

/// Solves the square system `a x = b` by Gaussian elimination with partial
/// pivoting; `None` when numerically singular.
pub fn solve_square(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-10 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in (col + 1)..n {
            let f = a[r][col] / a[col][col];
            if f != 0.0 {
                let pivot = a[col].clone();
                for (x, p) in a[r].iter_mut().zip(&pivot).skip(col) {
                    *x -= f * p;
                }
                b[r] -= f * b[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = ((r + 1)..n).map(|c| a[r][c] * x[c]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    Some(x)
}

/// Optimum of `min c'x s.t. Ax <= b, x >= 0` over all basic feasible points,
/// or `None` if no vertex is feasible. Assumes the LP is bounded.
pub fn lp_by_vertices(c: &[f64], a: &[Vec<f64>], b: &[f64]) -> Option<(f64, Vec<f64>)> {
    let m = c.len();
    let mut rows: Vec<(Vec<f64>, f64)> = a.iter().cloned().zip(b.iter().copied()).collect();
    for j in 0..m {
        let mut e = vec![0.0; m];
        e[j] = -1.0;
        rows.push((e, 0.0));
    }
    let mut best: Option<(f64, Vec<f64>)> = None;
    for active in (0..rows.len()).combinations(m) {
        let sys: Vec<Vec<f64>> = active.iter().map(|&i| rows[i].0.clone()).collect();
        let rhs: Vec<f64> = active.iter().map(|&i| rows[i].1).collect();
        let Some(x) = solve_square(sys, rhs) else { continue };
        let feasible = rows.iter().all(|(r, bi)| {
            let lhs: f64 = r.iter().zip(&x).map(|(p, q)| p * q).sum();
            lhs <= bi + 1e-9 * (1.0 + bi.abs())
        });
        if !feasible {
            continue;
        }
        let obj: f64 = c.iter().zip(&x).map(|(p, q)| p * q).sum();
        if best.as_ref().is_none_or(|(o, _)| obj < *o) {
            best = Some((obj, x));
        }
    }
    best
}

/// `min ||w||_1 s.t. ||target - design w||_inf <= lambda`, by enumerating the
/// vertices of the arrangement of constraint facets and coordinate planes.
/// Works in `w`-space directly, independent of any split-variable encoding.
pub fn l1_box_by_vertices(design: ArrayView2<'_, f64>, target: ArrayView1<'_, f64>, lambda: f64) -> Option<(f64, Array1<f64>)> {
    let p = design.ncols();
    let k = design.nrows();
    let mut planes: Vec<(Vec<f64>, f64)> = Vec::new();
    for i in 0..k {
        let row = design.row(i).to_vec();
        planes.push((row.clone(), target[i] + lambda));
        planes.push((row, target[i] - lambda));
    }
    for j in 0..p {
        let mut e = vec![0.0; p];
        e[j] = 1.0;
        planes.push((e, 0.0));
    }
    let mut best: Option<(f64, Array1<f64>)> = None;
    for active in (0..planes.len()).combinations(p) {
        let sys: Vec<Vec<f64>> = active.iter().map(|&i| planes[i].0.clone()).collect();
        let rhs: Vec<f64> = active.iter().map(|&i| planes[i].1).collect();
        let Some(w) = solve_square(sys, rhs) else { continue };
        let w = Array1::from(w);
        let resid = residual(design, target, w.view());
        if resid > lambda + 1e-9 {
            continue;
        }
        let obj = w.iter().map(|v| v.abs()).sum::<f64>();
        if best.as_ref().is_none_or(|(o, _)| obj < *o) {
            best = Some((obj, w));
        }
    }
    best
}

/// `||target - design w||_inf`.
pub fn residual(design: ArrayView2<'_, f64>, target: ArrayView1<'_, f64>, w: ArrayView1<'_, f64>) -> f64 {
    (&target - &design.dot(&w)).iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

/// The Dantzig blocks `(T[g,g], T[g,a])` with `g` = all indices but `alpha`.
pub fn dantzig_blocks(t: &Array2<f64>, alpha: usize) -> (Array2<f64>, Array1<f64>) {
    let d = t.nrows();
    let g: Vec<usize> = (0..d).filter(|&j| j != alpha).collect();
    let block = Array2::from_shape_fn((d - 1, d - 1), |(i, j)| t[[g[i], g[j]]]);
    let cross = Array1::from_shape_fn(d - 1, |i| t[[g[i], alpha]]);
    (block, cross)
}
