//! From `v(xi; delta)` to the first-return map.
//!
//! On `0 <= x <= eta` the positive solution of `d(y^2)/dx = -4x^3 + alpha y^3`
//! with `y(eta) = 0` is
//!
//! ```text
//! phi(x; alpha, eta) = [eta^4 - x^4 - eta^3 (eta - x) v(sqrt(1 - x/eta); 2 eta^3 alpha)]^(1/2)
//! ```
//!
//! and reflections of it cover the other three quadrants. Matching the
//! branches on the y-axis gives the half-turn map. Since
//! `phi(0; alpha, eta)^2 = eta^4 (1 - V(2 eta^3 alpha))` with
//! `V(delta) = sum c_n delta^n`, the half-turn map has the form
//! `eta~ = eta * g(beta)` with `beta = eta^3 alpha` and a single scalar series
//! `g` solving
//!
//! ```text
//! g^4 (1 - V(-2 g^3 beta)) = 1 - V(2 beta).
//! ```
//!
//! The second half-turn obeys the same equation, so the full turn is
//! `g(beta) * g(beta g(beta)^3)`.

use crate::error::{out_of_domain, Error, Result};
use crate::series::{solve_implicit, TruncatedSeries};
use crate::vseries::VSeries;
use serde::Serialize;
use std::f64::consts::SQRT_2;

/// Slack for a slightly negative radicand caused by roundoff near `x = eta`.
pub const RADICAND_CLAMP: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Quadrant {
    I,
    II,
    III,
    IV,
}

impl Quadrant {
    pub const ALL: [Quadrant; 4] = [Quadrant::I, Quadrant::II, Quadrant::III, Quadrant::IV];
}

fn check_eta(eta: f64) -> Result<()> {
    if !(0.5..=1.5).contains(&eta) {
        return Err(out_of_domain("eta", eta, "[0.5, 1.5]"));
    }
    Ok(())
}

/// `eta^4 - x^4 - y^2` on the first-quadrant solution, i.e.
/// `eta^3 (eta - x) v(xi; 2 eta^3 alpha)`.
pub fn level_deficit(x: f64, alpha: f64, eta: f64, vs: &VSeries) -> Result<f64> {
    check_eta(eta)?;
    if !(0.0..=eta).contains(&x) {
        return Err(out_of_domain("x", x, format!("[0, {eta}]")));
    }
    let xi = (1.0 - x / eta).max(0.0).sqrt();
    let v = vs.eval(xi, 2.0 * eta.powi(3) * alpha)?;
    Ok(eta.powi(3) * (eta - x) * v)
}

/// Positive first-quadrant solution with `phi(eta) = 0`.
pub fn phi(x: f64, alpha: f64, eta: f64, vs: &VSeries) -> Result<f64> {
    let deficit = level_deficit(x, alpha, eta, vs)?;
    if x == eta {
        return Ok(0.0);
    }
    let radicand = eta.powi(4) - x.powi(4) - deficit;
    if radicand < -RADICAND_CLAMP {
        return Err(Error::NegativeRadicand(radicand));
    }
    Ok(radicand.max(0.0).sqrt())
}

/// The four reflections of `phi`:
///
/// * I:   `phi(x; alpha, eta)`,   `x in [0, eta]`
/// * II:  `phi(-x; -alpha, eta)`, `x in [-eta, 0]`
/// * III: `-phi(-x; alpha, eta)`, `x in [-eta, 0]`
/// * IV:  `-phi(x; -alpha, eta)`, `x in [0, eta]`
pub fn quadrant_solution(
    quadrant: Quadrant,
    x: f64,
    alpha: f64,
    eta: f64,
    vs: &VSeries,
) -> Result<f64> {
    match quadrant {
        Quadrant::I => phi(x, alpha, eta, vs),
        Quadrant::II => phi(-x, -alpha, eta, vs),
        Quadrant::III => phi(-x, alpha, eta, vs).map(|y| -y),
        Quadrant::IV => phi(x, -alpha, eta, vs).map(|y| -y),
    }
}

/// `g` in `eta~ = eta * g(eta^3 alpha)`.
#[derive(Debug, Clone, PartialEq)]
pub struct HalfTurnSeries {
    pub g: TruncatedSeries<f64>,
}

impl HalfTurnSeries {
    pub fn coeff(&self, n: usize) -> f64 {
        self.g.coeffs()[n]
    }

    pub fn eval(&self, eta: f64, alpha: f64) -> f64 {
        eta * self.g.eval(eta.powi(3) * alpha)
    }

    /// Residual of `g^4 (1 - V(-2 g^3 beta)) - (1 - V(2 beta))` as a series.
    pub fn matching_residual(&self, vs: &VSeries) -> Result<TruncatedSeries<f64>> {
        matching_residual(&self.g, &vs.endpoint_series())
    }
}

fn matching_residual(
    g: &TruncatedSeries<f64>,
    endpoint: &TruncatedSeries<f64>,
) -> Result<TruncatedSeries<f64>> {
    let order = g.order();
    let beta = TruncatedSeries::variable("beta", order);
    let one = TruncatedSeries::constant("beta", 1.0, order);
    let rhs = one.sub(&endpoint.compose(&beta.scale(2.0))?)?;
    let inner = g.powi(3)?.mul(&beta)?.scale(-2.0);
    let lhs = g.powi(4)?.mul(&one.sub(&endpoint.compose(&inner)?)?)?;
    lhs.sub(&rhs)
}

/// Solves the matching equation order by order through `order`.
pub fn half_turn_series(vs: &VSeries, order: usize) -> Result<HalfTurnSeries> {
    if order == 0 || order > vs.order() {
        return Err(out_of_domain(
            "order",
            order as f64,
            format!("1..={}", vs.order()),
        ));
    }
    let endpoint = vs.endpoint_series().truncate(order);
    let g = solve_implicit("beta", order, 1.0, |g| matching_residual(g, &endpoint))?;
    Ok(HalfTurnSeries { g })
}

/// The composed map and its expansion in `epsilon`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReturnMapSeries {
    /// `eta~~ / eta` as a series in `beta = eta^3 alpha`.
    pub full_turn: TruncatedSeries<f64>,
    /// `x_coeffs[n]` multiplies `epsilon^(3n+1)`; `x_coeffs[0] = 1`.
    pub x_coeffs: Vec<f64>,
}

impl ReturnMapSeries {
    pub fn order(&self) -> usize {
        self.full_turn.order()
    }

    /// `X_n`, the coefficient of `epsilon^(3n+1)`.
    pub fn x(&self, n: usize) -> f64 {
        self.x_coeffs[n]
    }

    /// `eta~~` for the normalized system.
    pub fn eval_normalized(&self, eta: f64, alpha: f64) -> f64 {
        eta * self.full_turn.eval(eta.powi(3) * alpha)
    }

    /// `epsilon + sum_{n=1}^{through} X_n epsilon^(3n+1)`.
    pub fn partial_sum(&self, epsilon: f64, through: usize) -> f64 {
        let e3 = epsilon.powi(3);
        self.x_coeffs[..=through.min(self.order())]
            .iter()
            .rev()
            .fold(0.0, |acc, x| acc * e3 + x)
            * epsilon
    }
}

/// `g(beta) * g(beta g(beta)^3)`, then `eta = 1`, `alpha = sqrt(2) eps^3`.
pub fn full_turn_series(half: &HalfTurnSeries, order: usize) -> Result<ReturnMapSeries> {
    let g = half.g.truncate(order);
    let order = g.order();
    let beta = TruncatedSeries::variable("beta", order);
    let second = g.compose(&beta.mul(&g.powi(3)?)?)?;
    let full_turn = g.mul(&second)?;
    let x_coeffs = full_turn
        .coeffs()
        .iter()
        .enumerate()
        .map(|(n, f)| f * SQRT_2.powi(n as i32))
        .collect();
    Ok(ReturnMapSeries {
        full_turn,
        x_coeffs,
    })
}

/// Numerical solution of `phi(0; -alpha, eta~) = phi(0; alpha, eta)` for
/// `eta~` (Newton with a central-difference derivative).
pub fn match_half_turn(eta: f64, alpha: f64, vs: &VSeries) -> Result<f64> {
    check_eta(eta)?;
    let endpoint = |e: f64, a: f64| -> Result<f64> {
        Ok(e.powi(4) * (1.0 - vs.eval(1.0, 2.0 * e.powi(3) * a)?))
    };
    let target = endpoint(eta, alpha)?;
    let h = |e: f64| endpoint(e, -alpha).map(|v| v - target);
    let mut e = eta;
    for _ in 0..50 {
        let step = 1e-6;
        let d = (h(e + step)? - h(e - step)?) / (2.0 * step);
        if d.abs() < 1e-12 {
            return Err(Error::DegenerateImplicit {
                order: 0,
                linearization: d,
            });
        }
        let de = h(e)? / d;
        e -= de;
        if de.abs() <= 1e-15 * e.abs() {
            return Ok(e);
        }
    }
    Ok(e)
}

/// Closed form `M(T) = 8 c_1 T^(7/4)` of the Melnikov integral.
pub fn melnikov(t: f64, c1: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(out_of_domain("T", t, "(0, inf)"));
    }
    Ok(8.0 * c1 * t.powf(1.75))
}

/// `M(T) = 4 int_0^{T^(1/4)} (T - x^4)^(3/2) dx` by tanh-sinh quadrature,
/// independent of the grid machinery.
pub fn melnikov_quadrature(t: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(out_of_domain("T", t, "(0, inf)"));
    }
    // x = T^(1/4) s:  4 T^(7/4) int_0^1 (1 - s^4)^(3/2) ds
    let integral =
        tanh_sinh_unit(|s, one_minus_s| ((one_minus_s) * (1.0 + s) * (1.0 + s * s)).powf(1.5));
    Ok(4.0 * t.powf(1.75) * integral)
}

/// `int_0^1 f(s) ds` where `f` also receives `1 - s` computed without
/// cancellation.
fn tanh_sinh_unit(f: impl Fn(f64, f64) -> f64) -> f64 {
    use std::f64::consts::FRAC_PI_2;
    let term = |t: f64| {
        let u = FRAC_PI_2 * t.sinh();
        let s = 1.0 / (1.0 + (-2.0 * u).exp());
        let one_minus_s = 1.0 / (1.0 + (2.0 * u).exp());
        let w = FRAC_PI_2 * t.cosh() / (2.0 * u.cosh().powi(2));
        if w == 0.0 || s == 0.0 || one_minus_s == 0.0 {
            0.0
        } else {
            w * f(s, one_minus_s)
        }
    };
    let t_max = 4.0;
    let mut h = 0.5;
    let mut sum = term(0.0)
        + (1..=(t_max / h) as usize)
            .map(|k| term(k as f64 * h) + term(-(k as f64) * h))
            .sum::<f64>();
    let mut estimate = h * sum;
    for _ in 0..10 {
        h *= 0.5;
        let n = (t_max / h) as usize;
        sum += (1..=n)
            .step_by(2)
            .map(|k| term(k as f64 * h) + term(-(k as f64) * h))
            .sum::<f64>();
        let next = h * sum;
        let done = (next - estimate).abs() <= 1e-15 * next.abs();
        estimate = next;
        if done {
            break;
        }
    }
    estimate
}
