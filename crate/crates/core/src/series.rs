//! Truncated formal power series in one small parameter.
//!
//! Coefficients live in any [`Coefficient`] space; the two used here are
//! plain `f64` and [`GridFunction`](crate::grid::GridFunction). Every binary
//! operation truncates to the smaller of the two operand orders and never
//! reads past it.

use crate::error::{Error, Result};
use std::fmt;

/// Minimal algebra needed by the series engine.
///
/// `zero_like` and `one_like` take `&self` because grid functions need a grid
/// to build their identities.
pub trait Coefficient: Clone {
    fn zero_like(&self) -> Self;
    fn one_like(&self) -> Self;
    fn try_add(&self, other: &Self) -> Result<Self>;
    fn try_mul(&self, other: &Self) -> Result<Self>;
    fn scale(&self, k: f64) -> Self;
    /// Sup norm (absolute value for scalars).
    fn norm(&self) -> f64;
}

impl Coefficient for f64 {
    fn zero_like(&self) -> Self {
        0.0
    }
    fn one_like(&self) -> Self {
        1.0
    }
    fn try_add(&self, other: &Self) -> Result<Self> {
        Ok(self + other)
    }
    fn try_mul(&self, other: &Self) -> Result<Self> {
        Ok(self * other)
    }
    fn scale(&self, k: f64) -> Self {
        self * k
    }
    fn norm(&self) -> f64 {
        self.abs()
    }
}

/// Rational exponent `num / den` for [`TruncatedSeries::pow_frac`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Exponent {
    num: i64,
    den: i64,
}

impl Exponent {
    pub fn new(num: i64, den: i64) -> Result<Self> {
        if den == 0 {
            return Err(Error::ZeroDenominator);
        }
        Ok(Self { num, den })
    }

    pub fn value(self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

/// Default tolerance on `|a_0 - 1|` accepted by `pow_frac`.
pub const CONSTANT_TERM_TOL: f64 = 1e-12;

/// `sum_{n=0}^{order} coeffs[n] * param^n`, everything above `order` dropped.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedSeries<C> {
    coeffs: Vec<C>,
    param: String,
}

impl<C: Coefficient> TruncatedSeries<C> {
    /// Panics if `coeffs` is empty; a series always has a constant term.
    pub fn new(param: impl Into<String>, coeffs: Vec<C>) -> Self {
        assert!(
            !coeffs.is_empty(),
            "a truncated series needs at least one coefficient"
        );
        Self {
            coeffs,
            param: param.into(),
        }
    }

    /// The constant series `c + 0 param + ... + 0 param^order`.
    pub fn constant(param: impl Into<String>, c: C, order: usize) -> Self {
        let mut coeffs = vec![c.zero_like(); order + 1];
        coeffs[0] = c;
        Self::new(param, coeffs)
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn param(&self) -> &str {
        &self.param
    }

    pub fn coeffs(&self) -> &[C] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<C> {
        self.coeffs
    }

    /// Coefficient of `param^n`; `None` beyond the truncation order.
    pub fn coeff(&self, n: usize) -> Option<&C> {
        self.coeffs.get(n)
    }

    pub fn truncate(&self, order: usize) -> Self {
        let keep = order.min(self.order()) + 1;
        Self::new(self.param.clone(), self.coeffs[..keep].to_vec())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        let n = self.order().min(other.order());
        let coeffs = (0..=n)
            .map(|k| self.coeffs[k].try_add(&other.coeffs[k]))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::new(self.param.clone(), coeffs))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(-1.0))
    }

    pub fn scale(&self, k: f64) -> Self {
        Self::new(
            self.param.clone(),
            self.coeffs.iter().map(|c| c.scale(k)).collect(),
        )
    }

    /// Cauchy product truncated at the smaller order.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        let n = self.order().min(other.order());
        let mut coeffs = Vec::with_capacity(n + 1);
        for k in 0..=n {
            let mut acc = self.coeffs[0].try_mul(&other.coeffs[k])?;
            for j in 1..=k {
                acc = acc.try_add(&self.coeffs[j].try_mul(&other.coeffs[k - j])?)?;
            }
            coeffs.push(acc);
        }
        Ok(Self::new(self.param.clone(), coeffs))
    }

    pub fn powi(&self, n: u32) -> Result<Self> {
        let mut out = Self::constant(self.param.clone(), self.coeffs[0].one_like(), self.order());
        for _ in 0..n {
            out = out.mul(self)?;
        }
        Ok(out)
    }

    /// `self^exponent` for a series with constant term one.
    pub fn pow_frac(&self, exponent: Exponent) -> Result<Self> {
        self.pow_frac_tol(exponent, CONSTANT_TERM_TOL)
    }

    /// Multiplicative recurrence
    /// `n h_n = sum_{k=1}^{n} (k (e + 1) - n) a_k h_{n-k}`, valid when `a_0 = 1`.
    pub fn pow_frac_tol(&self, exponent: Exponent, tol: f64) -> Result<Self> {
        let one = self.coeffs[0].one_like();
        let deviation = self.coeffs[0].try_add(&one.scale(-1.0))?.norm();
        if !(deviation <= tol) {
            return Err(Error::ConstantTerm {
                expected: 1.0,
                deviation,
            });
        }
        let e = exponent.value();
        let order = self.order();
        let mut h: Vec<C> = Vec::with_capacity(order + 1);
        h.push(one);
        for n in 1..=order {
            let mut acc = self.coeffs[0].zero_like();
            for k in 1..=n {
                let w = k as f64 * (e + 1.0) - n as f64;
                if w != 0.0 {
                    acc = acc.try_add(&self.coeffs[k].try_mul(&h[n - k])?.scale(w))?;
                }
            }
            h.push(acc.scale(1.0 / n as f64));
        }
        Ok(Self::new(self.param.clone(), h))
    }

    /// `self(inner(x))` by Horner's scheme in the series ring. The inner
    /// series must have a zero constant term.
    pub fn compose(&self, inner: &Self) -> Result<Self> {
        let c0 = inner.coeffs[0].norm();
        if c0 != 0.0 {
            return Err(Error::ConstantTerm {
                expected: 0.0,
                deviation: c0,
            });
        }
        let order = self.order().min(inner.order());
        let inner = inner.truncate(order);
        let mut acc = Self::constant(inner.param.clone(), self.coeffs[order].clone(), order);
        for k in (0..order).rev() {
            acc = acc.mul(&inner)?;
            acc.coeffs[0] = acc.coeffs[0].try_add(&self.coeffs[k])?;
        }
        Ok(acc)
    }

    /// Largest coefficient norm, for residual checks.
    pub fn max_norm(&self) -> f64 {
        self.coeffs
            .iter()
            .map(Coefficient::norm)
            .fold(0.0, f64::max)
    }
}

impl TruncatedSeries<f64> {
    /// The series `param` itself: `0 + 1 param`, padded to `order`.
    pub fn variable(param: impl Into<String>, order: usize) -> Self {
        let mut coeffs = vec![0.0; order + 1];
        if order >= 1 {
            coeffs[1] = 1.0;
        }
        Self::new(param, coeffs)
    }

    /// Partial sum at a numeric value of the parameter.
    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
    }
}

/// Threshold below which a linearization coefficient counts as degenerate.
pub const DEGENERATE_TOL: f64 = 1e-12;

/// Solve `residual(g) = O(param^{order+1})` for a scalar series `g` with known
/// constant term `g0`, one order at a time.
///
/// The n-th residual coefficient depends affinely on `g_n` once the lower
/// coefficients are fixed, so the linearization is read off as the
/// difference of two residual evaluations (`g_n = 1` and `g_n = 0`).
pub fn solve_implicit<F>(
    param: &str,
    order: usize,
    g0: f64,
    residual: F,
) -> Result<TruncatedSeries<f64>>
where
    F: Fn(&TruncatedSeries<f64>) -> Result<TruncatedSeries<f64>>,
{
    let mut g = TruncatedSeries::constant(param, g0, order);
    let r0 = residual(&g)?.coeffs[0];
    if r0.abs() > 1e-10 {
        return Err(Error::ConstantTerm {
            expected: 0.0,
            deviation: r0,
        });
    }
    for n in 1..=order {
        g.coeffs[n] = 0.0;
        let base = residual(&g)?.coeffs[n];
        g.coeffs[n] = 1.0;
        let lin = residual(&g)?.coeffs[n] - base;
        if lin.abs() < DEGENERATE_TOL {
            return Err(Error::DegenerateImplicit {
                order: n,
                linearization: lin,
            });
        }
        g.coeffs[n] = -base / lin;
    }
    Ok(g)
}
