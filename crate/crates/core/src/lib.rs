//! Poincaré first-return map of the planar system
//!
//! ```text
//! X' = -Y,    Y' = X^3 - Y^3
//! ```
//!
//! around its nilpotent stable focus at the origin. The return to the
//! positive X-axis is a convergent power series
//! `eps + sum_n X_n eps^(3n+1)` whose coefficients are built from iterated
//! integrals `v_n(xi)` and their endpoint values `c_n = v_n(1)`.
//!
//! Module map:
//!
//! * [`series`]: truncated power series over an abstract coefficient space,
//!   with fractional powers, composition and order-by-order implicit solves.
//! * [`grid`]: grid functions on `[0, 1]` and the weighted cumulative
//!   integral `xi^-2 * int_0^xi t^4 f(t) dt`.
//! * [`vseries`]: the recursion producing `v_1, ..., v_N` and `c_n`.
//! * [`fixed_point`]: Picard iteration for `v = J[v]`, an independent check
//!   on the series.
//! * [`return_map`]: the level-curve solution `phi`, its four symmetry
//!   branches, half-turn matching, the full-turn series and the Melnikov
//!   integral.
//! * [`ode`]: DOP853 integration of the original and normalized systems with
//!   axis-crossing detection; ground truth for everything above.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod fixed_point;
pub mod grid;
pub mod ode;
pub mod return_map;
pub mod series;
pub mod vseries;

pub use error::{Error, Result};
pub use fixed_point::{apply_j, solve_fixed_point, FixedPointConfig, FixedPointResult};
pub use grid::{eval_p, Grid, GridFunction, GridKind};
pub use ode::{
    integrate_normalized, integrate_normalized_from, integrate_original, lyapunov_audit, Axis,
    CrossingEvent, LyapunovReport, NormalizedRun, OdeConfig, State,
};
pub use return_map::{
    full_turn_series, half_turn_series, match_half_turn, melnikov, melnikov_quadrature, phi,
    quadrant_solution, HalfTurnSeries, Quadrant, ReturnMapSeries,
};
pub use series::{Coefficient, Exponent, TruncatedSeries};
pub use vseries::{VSeries, C1_EXACT};

/// Ball radius for the fixed-point operator: iterates satisfy `sup |v| <= m`.
pub const DEFAULT_BALL_RADIUS: f64 = 0.9;

/// Largest `|delta|` accepted by the series and the fixed-point solver.
pub const DEFAULT_DELTA_MAX: f64 = 0.4;
