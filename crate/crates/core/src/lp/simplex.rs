//! Dense-tableau two-phase primal simplex.
//!
//! Solves `min c'x  s.t.  Ax <= b, x >= 0`. Rows with a negative right-hand
//! side are negated and receive an artificial variable; phase one drives the
//! artificials to zero, phase two optimizes `c`. Entering columns follow the
//! most-negative reduced cost until a run of degenerate pivots is seen, after
//! which Bland's smallest-index rule takes over until the objective moves.

use crate::error::{Error, Result};

/// Reduced costs above `-OPT_TOL` count as nonnegative.
pub(crate) const OPT_TOL: f64 = 1e-9;
/// Phase-one objective above this (relative to the rhs scale) means infeasible.
pub(crate) const FEAS_TOL: f64 = 1e-8;
const PIVOT_TOL: f64 = 1e-11;
const DEGENERATE_RUN: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PivotRule {
    /// Dantzig's largest-coefficient rule, falling back to Bland on stalls.
    DantzigWithBland,
    /// Bland's smallest-index rule throughout.
    Bland,
}

struct Tableau {
    rows: usize,
    width: usize,
    /// `rows * (width + 1)` entries; the last column of each row is the rhs.
    body: Vec<f64>,
    /// Phase-two reduced costs; last entry holds `-objective`.
    cost: Vec<f64>,
    /// Phase-one reduced costs, same layout.
    aux: Vec<f64>,
    basis: Vec<usize>,
    n_struct: usize,
    first_artificial: usize,
    pivots: usize,
}

impl Tableau {
    fn stride(&self) -> usize {
        self.width + 1
    }

    fn at(&self, i: usize, j: usize) -> f64 {
        self.body[i * self.stride() + j]
    }

    fn rhs(&self, i: usize) -> f64 {
        self.body[i * self.stride() + self.width]
    }

    fn build(c: &[f64], a: &[Vec<f64>], b: &[f64]) -> Self {
        let m = c.len();
        let k = b.len();
        let n_art = b.iter().filter(|v| **v < 0.0).count();
        let width = m + k + n_art;
        let stride = width + 1;
        let mut body = vec![0.0; k * stride];
        let mut basis = Vec::with_capacity(k);
        let mut next_art = m + k;
        for i in 0..k {
            let row = &mut body[i * stride..(i + 1) * stride];
            let sign = if b[i] < 0.0 { -1.0 } else { 1.0 };
            for j in 0..m {
                row[j] = sign * a[i][j];
            }
            row[m + i] = sign;
            row[width] = sign * b[i];
            if sign < 0.0 {
                row[next_art] = 1.0;
                basis.push(next_art);
                next_art += 1;
            } else {
                basis.push(m + i);
            }
        }

        let mut cost = vec![0.0; stride];
        cost[..m].copy_from_slice(c);
        // phase one minimizes the artificial sum; price out the basic artificials
        let mut aux = vec![0.0; stride];
        for (i, &bv) in basis.iter().enumerate() {
            if bv >= m + k {
                let row = &body[i * stride..(i + 1) * stride];
                for j in 0..stride {
                    aux[j] -= row[j];
                }
                aux[bv] = 0.0;
            }
        }
        Tableau {
            rows: k,
            width,
            body,
            cost,
            aux,
            basis,
            n_struct: m,
            first_artificial: m + k,
            pivots: 0,
        }
    }

    fn pivot(&mut self, r: usize, e: usize) {
        let stride = self.stride();
        let piv = self.body[r * stride + e];
        let (before, rest) = self.body.split_at_mut(r * stride);
        let (prow, after) = rest.split_at_mut(stride);
        for v in prow.iter_mut() {
            *v /= piv;
        }
        prow[e] = 1.0;
        let eliminate = |row: &mut [f64]| {
            let f = row[e];
            if f != 0.0 {
                for (x, p) in row.iter_mut().zip(prow.iter()) {
                    *x -= f * p;
                }
                row[e] = 0.0;
            }
        };
        before.chunks_mut(stride).for_each(eliminate);
        after.chunks_mut(stride).for_each(eliminate);
        eliminate(&mut self.cost);
        eliminate(&mut self.aux);
        self.basis[r] = e;
        self.pivots += 1;
    }

    fn choose_entering(&self, phase_one: bool, bland: bool) -> Option<usize> {
        let costs = if phase_one { &self.aux } else { &self.cost };
        let limit = if phase_one {
            self.width
        } else {
            self.first_artificial
        };
        if bland {
            (0..limit).find(|&j| costs[j] < -OPT_TOL)
        } else {
            let mut best: Option<(usize, f64)> = None;
            for (j, &rc) in costs[..limit].iter().enumerate() {
                if rc < -OPT_TOL && best.is_none_or(|(_, b)| rc < b) {
                    best = Some((j, rc));
                }
            }
            best.map(|(j, _)| j)
        }
    }

    /// Minimum-ratio row for entering column `e`, or `None` when unbounded.
    fn choose_leaving(&self, e: usize, bland: bool) -> Option<usize> {
        let mut best: Option<(usize, f64, f64)> = None;
        for i in 0..self.rows {
            let t = self.at(i, e);
            if t <= PIVOT_TOL {
                continue;
            }
            let ratio = self.rhs(i).max(0.0) / t;
            best = match best {
                None => Some((i, ratio, t)),
                Some((bi, br, bt)) => {
                    let tie = (ratio - br).abs() <= 1e-12 * (1.0 + br.abs());
                    let better = if tie {
                        if bland {
                            self.basis[i] < self.basis[bi]
                        } else {
                            t > bt
                        }
                    } else {
                        ratio < br
                    };
                    if better {
                        Some((i, ratio, t))
                    } else {
                        Some((bi, br, bt))
                    }
                }
            };
        }
        best.map(|(i, _, _)| i)
    }

    fn run(&mut self, phase_one: bool, rule: PivotRule, max_pivots: usize) -> Result<()> {
        let mut degenerate = 0usize;
        loop {
            let bland = rule == PivotRule::Bland || degenerate >= DEGENERATE_RUN;
            let Some(e) = self.choose_entering(phase_one, bland) else {
                return Ok(());
            };
            let Some(r) = self.choose_leaving(e, bland) else {
                return Err(Error::Unbounded);
            };
            if self.pivots >= max_pivots {
                return Err(Error::IterationLimit(max_pivots));
            }
            let step = self.rhs(r) / self.at(r, e);
            if step.abs() <= 1e-14 {
                degenerate += 1;
            } else {
                degenerate = 0;
            }
            self.pivot(r, e);
        }
    }

    /// Pivots zero-level artificials out of the basis where possible.
    fn expel_artificials(&mut self) {
        for r in 0..self.rows {
            if self.basis[r] < self.first_artificial {
                continue;
            }
            let mut best: Option<(usize, f64)> = None;
            for j in 0..self.first_artificial {
                let t = self.at(r, j).abs();
                if t > PIVOT_TOL && best.is_none_or(|(_, b)| t > b) {
                    best = Some((j, t));
                }
            }
            if let Some((j, _)) = best {
                self.pivot(r, j);
            }
            // otherwise the row is redundant; its artificial stays basic at zero
            // and can never leave because artificial columns are barred in phase two
        }
    }
}

/// Solution of `min c'x s.t. Ax <= b, x >= 0`.
pub(crate) fn simplex(
    c: &[f64],
    a: &[Vec<f64>],
    b: &[f64],
    rule: PivotRule,
) -> Result<Vec<f64>> {
    let m = c.len();
    let k = b.len();
    let mut tab = Tableau::build(c, a, b);
    let max_pivots = 50 * (m + k).max(20);

    if tab.first_artificial < tab.width {
        match tab.run(true, rule, max_pivots) {
            Ok(()) => {}
            // phase one is bounded below by zero
            Err(Error::Unbounded) => unreachable!("phase one cannot be unbounded"),
            Err(err) => return Err(err),
        }
        let scale = 1.0 + b.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
        let infeasibility = -tab.aux[tab.width];
        if infeasibility > FEAS_TOL * scale {
            return Err(Error::Infeasible);
        }
        tab.expel_artificials();
    }
    tab.run(false, rule, max_pivots)?;

    let mut x = vec![0.0; tab.n_struct];
    for (i, &bv) in tab.basis.iter().enumerate() {
        if bv < tab.n_struct {
            x[bv] = tab.rhs(i).max(0.0);
        }
    }
    Ok(x)
}
