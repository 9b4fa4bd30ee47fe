//! Small exact linear programs: a generic simplex entry point, the Dantzig
//! selector used to estimate the decorrelation direction, and the CLIME
//! inverse-covariance estimator.

mod simplex;

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};
use rayon::prelude::*;

use crate::error::{Error, Result};

pub use simplex::PivotRule;

/// Dense `d x d` matrix (curvature `T_n`, covariance, precision).
pub type SquareMatrix = Array2<f64>;

/// `min objective'x  s.t.  constraints * x <= rhs,  x >= 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct LpProblem {
    pub objective: Vec<f64>,
    pub constraints: Vec<Vec<f64>>,
    pub rhs: Vec<f64>,
}

impl LpProblem {
    pub fn new(objective: Vec<f64>, constraints: Vec<Vec<f64>>, rhs: Vec<f64>) -> Result<Self> {
        if constraints.len() != rhs.len() {
            return Err(Error::invalid(format!(
                "{} constraint rows but {} right-hand sides",
                constraints.len(),
                rhs.len()
            )));
        }
        if let Some(i) = constraints
            .iter()
            .position(|row| row.len() != objective.len())
        {
            return Err(Error::invalid(format!(
                "constraint row {i} has {} coefficients, expected {}",
                constraints[i].len(),
                objective.len()
            )));
        }
        let finite = objective
            .iter()
            .chain(rhs.iter())
            .chain(constraints.iter().flatten())
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::invalid("LP data must be finite"));
        }
        Ok(LpProblem {
            objective,
            constraints,
            rhs,
        })
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }
}

/// Solves the LP with the default pivot rule.
///
/// Infeasible and unbounded problems are reported as [`Error::Infeasible`]
/// and [`Error::Unbounded`].
pub fn solve_lp(problem: &LpProblem) -> Result<Vec<f64>> {
    solve_lp_with(problem, PivotRule::DantzigWithBland)
}

pub fn solve_lp_with(problem: &LpProblem, rule: PivotRule) -> Result<Vec<f64>> {
    simplex::simplex(&problem.objective, &problem.constraints, &problem.rhs, rule)
}

/// `argmin ||w||_1  s.t.  ||target - design * w||_inf <= lambda`, encoded with
/// `w = w+ - w-`.
fn l1_min_box(design: ArrayView2<'_, f64>, target: ArrayView1<'_, f64>, lambda: f64) -> Result<Array1<f64>> {
    let p = design.ncols();
    let k = design.nrows();
    let mut constraints = Vec::with_capacity(2 * k);
    let mut rhs = Vec::with_capacity(2 * k);
    for (row, &t) in design.axis_iter(Axis(0)).zip(target.iter()) {
        // design*w - target <= lambda
        let mut upper = Vec::with_capacity(2 * p);
        upper.extend(row.iter().copied());
        upper.extend(row.iter().map(|v| -v));
        constraints.push(upper);
        rhs.push(lambda + t);
    }
    for (row, &t) in design.axis_iter(Axis(0)).zip(target.iter()) {
        // target - design*w <= lambda
        let mut lower = Vec::with_capacity(2 * p);
        lower.extend(row.iter().map(|v| -v));
        lower.extend(row.iter().copied());
        constraints.push(lower);
        rhs.push(lambda - t);
    }
    let x = simplex::simplex(&vec![1.0; 2 * p], &constraints, &rhs, PivotRule::DantzigWithBland)?;
    Ok(Array1::from_iter((0..p).map(|j| x[j] - x[p + j])))
}

fn check_square(m: ArrayView2<'_, f64>, what: &str) -> Result<usize> {
    let (r, c) = m.dim();
    if r != c {
        return Err(Error::invalid(format!("{what} must be square, got {r}x{c}")));
    }
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid(format!("{what} has non-finite entries")));
    }
    Ok(r)
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::invalid(format!("lambda must be finite and >= 0, got {lambda}")));
    }
    Ok(())
}

/// Indices `0..d` with `alpha` removed, in increasing order.
pub fn nuisance_indices(d: usize, alpha: usize) -> Vec<usize> {
    (0..d).filter(|&j| j != alpha).collect()
}

/// Decorrelation direction for coordinate `alpha_index`:
/// `argmin ||w||_1  s.t.  ||T[g,a] - T[g,g] w||_inf <= lambda`, where `g` is
/// every index except `alpha_index` in increasing order.
pub fn dantzig_direction(t: ArrayView2<'_, f64>, alpha_index: usize, lambda: f64) -> Result<Array1<f64>> {
    let d = check_square(t, "T")?;
    if d < 2 {
        return Err(Error::invalid("dantzig_direction needs d >= 2"));
    }
    if alpha_index >= d {
        return Err(Error::invalid(format!(
            "alpha_index {alpha_index} out of range for d = {d}"
        )));
    }
    check_lambda(lambda)?;
    let gamma = nuisance_indices(d, alpha_index);
    let block = t.select(Axis(0), &gamma).select(Axis(1), &gamma);
    let cross = t.column(alpha_index).select(Axis(0), &gamma);
    l1_min_box(block.view(), cross.view(), lambda)
}

/// CLIME estimate of `Sigma^{-1}`, solved column by column:
/// column `j` minimizes `||theta||_1` subject to `||Sigma theta - e_j||_inf <= lambda`.
///
/// With `symmetrize`, each pair `(i, j)` keeps whichever of `theta_ij`,
/// `theta_ji` has the smaller magnitude.
pub fn clime_inverse(sigma: ArrayView2<'_, f64>, lambda: f64, symmetrize: bool) -> Result<SquareMatrix> {
    let d = check_square(sigma, "Sigma")?;
    check_lambda(lambda)?;
    let columns: Vec<Result<Array1<f64>>> = (0..d)
        .into_par_iter()
        .map(|j| {
            let mut e = Array1::zeros(d);
            e[j] = 1.0;
            l1_min_box(sigma, e.view(), lambda).map_err(|err| match err {
                Error::Infeasible => Error::ClimeColumnInfeasible { column: j, lambda },
                other => other,
            })
        })
        .collect();
    let mut theta = Array2::zeros((d, d));
    for (j, col) in columns.into_iter().enumerate() {
        theta.column_mut(j).assign(&col?);
    }
    if symmetrize {
        for i in 0..d {
            for j in (i + 1)..d {
                let keep = if theta[[i, j]].abs() <= theta[[j, i]].abs() {
                    theta[[i, j]]
                } else {
                    theta[[j, i]]
                };
                theta[[i, j]] = keep;
                theta[[j, i]] = keep;
            }
        }
    }
    Ok(theta)
}
