//! Picard iteration for `v = J[v]` with
//!
//! ```text
//! J[v](xi) = delta xi^-2 int_0^xi t^4 (p(t) - v(t))^(3/2) dt
//! ```
//!
//! on the ball `sup |v| <= m`. Starts from `v = 0` and never looks at the
//! series coefficients, so it serves as an independent check on them.

use crate::error::{out_of_domain, Error, Result};
use crate::grid::{Grid, GridFunction};
use crate::{DEFAULT_BALL_RADIUS, DEFAULT_DELTA_MAX};
use std::sync::Arc;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedPointConfig {
    pub ball_radius: f64,
    pub delta_max: f64,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for FixedPointConfig {
    fn default() -> Self {
        Self {
            ball_radius: DEFAULT_BALL_RADIUS,
            delta_max: DEFAULT_DELTA_MAX,
            tol: 1e-12,
            max_iter: 500,
        }
    }
}

#[derive(Debug, Clone)]
pub struct FixedPointResult {
    pub solution: GridFunction,
    pub delta: f64,
    pub iterations: usize,
    pub final_step_norm: f64,
    /// Largest ratio of consecutive step norms from the third iteration on
    /// (all ratios when there are fewer steps; 0 with fewer than two).
    pub contraction_estimate: f64,
    /// `sup |v_{k+1} - v_k|` for every iteration.
    pub step_norms: Vec<f64>,
}

/// One application of `J`. Fails if `v` is outside the ball of radius
/// `ball_radius`.
pub fn apply_j(v: &GridFunction, delta: f64, ball_radius: f64) -> Result<GridFunction> {
    let norm = v.sup_norm();
    if norm > ball_radius {
        return Err(Error::OutOfBall {
            norm,
            radius: ball_radius,
        });
    }
    let base = GridFunction::p(v.grid()).sub(v)?;
    Ok(base.powf(1.5)?.weighted_cumulative().scale(delta))
}

fn contraction_estimate(steps: &[f64]) -> f64 {
    let ratios: Vec<f64> = steps
        .windows(2)
        .filter(|w| w[0] > 0.0)
        .map(|w| w[1] / w[0])
        .collect();
    let tail = if ratios.len() > 1 {
        &ratios[1..]
    } else {
        &ratios[..]
    };
    tail.iter().copied().fold(0.0, f64::max)
}

pub fn solve_fixed_point(
    grid: &Arc<Grid>,
    delta: f64,
    config: &FixedPointConfig,
) -> Result<FixedPointResult> {
    if !(delta.abs() < config.delta_max) {
        return Err(out_of_domain(
            "delta",
            delta,
            format!("|delta| < {}", config.delta_max),
        ));
    }
    if !(config.tol > 0.0) {
        return Err(out_of_domain("tol", config.tol, "(0, inf)"));
    }
    let mut v = GridFunction::constant(grid, 0.0);
    let mut steps = Vec::new();
    for k in 1..=config.max_iter {
        let next = apply_j(&v, delta, config.ball_radius)?;
        let step = next.sub(&v)?.sup_norm();
        steps.push(step);
        v = next;
        if step < config.tol {
            let contraction_estimate = contraction_estimate(&steps);
            return Ok(FixedPointResult {
                solution: v,
                delta,
                iterations: k,
                final_step_norm: step,
                contraction_estimate,
                step_norms: steps,
            });
        }
    }
    Err(Error::NotConverged {
        iterations: config.max_iter,
        last_step: steps.last().copied().unwrap_or(f64::NAN),
    })
}
