//! The functions `v_n(xi)` in `v(xi; delta) = sum_{n>=1} delta^n v_n(xi)` and
//! their endpoint values `c_n = v_n(1)`.
//!
//! `v` solves `xi v' + 2 v = delta xi^3 (p - v)^(3/2)` with `v(0) = 0`.
//! Expanding `(p - v)^(3/2) = p^(3/2) (1 + sum delta^n R_n)` gives
//!
//! ```text
//! v_n = W[p^(3/2) R_{n-1}],    R_0 = 1,
//! ```
//!
//! where `R_{n-1}` is read off the series engine's fractional power of
//! `1 - sum_k delta^k v_k / p`, so no per-order formulas are hand-coded.

use crate::error::{out_of_domain, Error, Result};
use crate::grid::{Grid, GridFunction, GridKind};
use crate::series::{Exponent, TruncatedSeries};
use crate::DEFAULT_DELTA_MAX;
use std::sync::Arc;

/// Default number of series terms.
pub const DEFAULT_ORDER: usize = 6;

/// `c_1 = B(1/4, 5/2) / 8 = Gamma(1/4) Gamma(5/2) / (8 Gamma(11/4))`.
pub const C1_EXACT: f64 = 0.374_579_650_613_159_97;

/// Quadrature metadata carried with a computed series.
#[derive(Debug, Clone, PartialEq)]
pub struct GridMeta {
    pub intervals: usize,
    pub kind: GridKind,
    /// `max_n |c_n(M) - c_n(2M)|` when a refinement check was run.
    pub quadrature_error: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct VSeries {
    v: Vec<GridFunction>,
    c: Vec<f64>,
    p: GridFunction,
    meta: GridMeta,
    delta_max: f64,
}

impl VSeries {
    /// Runs the recursion for `v_1, ..., v_order` on `grid`.
    pub fn compute(order: usize, grid: &Arc<Grid>) -> Result<Self> {
        if order == 0 {
            return Err(out_of_domain("order", 0.0, ">= 1"));
        }
        let p = GridFunction::p(grid);
        let p32 = p.powf(1.5)?;
        let three_halves = Exponent::new(3, 2)?;
        let one = GridFunction::constant(grid, 1.0);

        // base[k] = coefficient of delta^k in 1 - sum delta^k v_k / p
        let mut base = vec![one];
        let mut v: Vec<GridFunction> = Vec::with_capacity(order);
        for _ in 0..order {
            let r = TruncatedSeries::new("delta", base.clone())
                .pow_frac(three_halves)?
                .into_coeffs()
                .pop()
                .expect("series has order n - 1");
            let vn = p32.mul(&r)?.weighted_cumulative();
            base.push(vn.div(&p, 0.5)?.scale(-1.0));
            v.push(vn);
        }
        let c = v.iter().map(GridFunction::last).collect();
        Ok(Self {
            v,
            c,
            p,
            meta: GridMeta {
                intervals: grid.intervals(),
                kind: grid.kind(),
                quadrature_error: None,
            },
            delta_max: DEFAULT_DELTA_MAX,
        })
    }

    /// Computes on `intervals` and `2 * intervals`, records the change in the
    /// `c_n` and fails if it exceeds `tol`. Returns the finer series.
    pub fn compute_converged(
        order: usize,
        kind: GridKind,
        intervals: usize,
        tol: f64,
    ) -> Result<Self> {
        let coarse = Self::compute(order, &Grid::new(kind, intervals)?)?;
        let mut fine = Self::compute(order, &Grid::new(kind, 2 * intervals)?)?;
        let change = coarse
            .c
            .iter()
            .zip(&fine.c)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        if change > tol {
            return Err(Error::QuadratureNotConverged {
                achieved: change,
                wanted: tol,
            });
        }
        fine.meta.quadrature_error = Some(change);
        Ok(fine)
    }

    pub fn with_delta_max(mut self, delta_max: f64) -> Self {
        self.delta_max = delta_max;
        self
    }

    pub fn order(&self) -> usize {
        self.v.len()
    }

    pub fn grid(&self) -> &Arc<Grid> {
        self.p.grid()
    }

    pub fn meta(&self) -> &GridMeta {
        &self.meta
    }

    pub fn delta_max(&self) -> f64 {
        self.delta_max
    }

    /// `v_n`, 1-based.
    pub fn v(&self, n: usize) -> &GridFunction {
        &self.v[n - 1]
    }

    /// `c_n = v_n(1)`, 1-based.
    pub fn c(&self, n: usize) -> f64 {
        self.c[n - 1]
    }

    /// `[c_1, ..., c_N]`.
    pub fn cs(&self) -> &[f64] {
        &self.c
    }

    /// `V(delta) = sum_n c_n delta^n`, i.e. `v(1; delta)` as a scalar series.
    pub fn endpoint_series(&self) -> TruncatedSeries<f64> {
        let mut coeffs = Vec::with_capacity(self.c.len() + 1);
        coeffs.push(0.0);
        coeffs.extend_from_slice(&self.c);
        TruncatedSeries::new("delta", coeffs)
    }

    fn check_delta(&self, delta: f64) -> Result<()> {
        if !(delta.abs() < self.delta_max) {
            return Err(out_of_domain(
                "delta",
                delta,
                format!("|delta| < {}", self.delta_max),
            ));
        }
        Ok(())
    }

    /// Partial sum `sum_{n<=N} delta^n v_n(xi)`; cubic interpolation off-node.
    pub fn eval(&self, xi: f64, delta: f64) -> Result<f64> {
        self.check_delta(delta)?;
        if !(0.0..=1.0).contains(&xi) {
            return Err(out_of_domain("xi", xi, "[0, 1]"));
        }
        Ok(self
            .v
            .iter()
            .rev()
            .fold(0.0, |acc, vn| (acc + vn.eval(xi)) * delta))
    }

    /// `|delta^N v_N(xi)|`, the size of the last retained term.
    pub fn truncation_estimate(&self, xi: f64, delta: f64) -> f64 {
        (delta.powi(self.order() as i32) * self.v[self.order() - 1].eval(xi)).abs()
    }

    /// The partial sum as a grid function.
    pub fn partial_sum(&self, delta: f64) -> Result<GridFunction> {
        self.check_delta(delta)?;
        let mut acc = self.p.scale(0.0);
        for vn in self.v.iter().rev() {
            acc = acc.add(vn)?.scale(delta);
        }
        Ok(acc)
    }

    /// Sup over nodes `0 < xi < 1` of `|xi v' + 2 v - delta xi^3 (p - v)^(3/2)|`
    /// for the partial sum, with `v'` from finite differences.
    pub fn ode_residual(&self, delta: f64) -> Result<f64> {
        let v = self.partial_sum(delta)?;
        let grid = v.grid();
        let nodes = grid.nodes();
        let mut worst: f64 = 0.0;
        for (i, &xi) in nodes.iter().enumerate().take(nodes.len() - 1).skip(1) {
            let vi = v.values()[i];
            let dv = grid.derivative_at_node(v.values(), i);
            let rhs = delta * xi.powi(3) * (self.p.values()[i] - vi).powf(1.5);
            worst = worst.max((xi * dv + 2.0 * vi - rhs).abs());
        }
        Ok(worst)
    }
}
