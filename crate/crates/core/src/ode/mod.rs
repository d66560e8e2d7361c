//! Direct integration of the original system `X' = -Y, Y' = X^3 - Y^3` and of
//! the normalized system
//!
//! ```text
//! dx/dtau = -2 y,    dy/dtau = 4 x^3 - alpha y^3
//! ```
//!
//! with detection of axis crossings over the first full turn. Crossings are
//! located on accepted steps by a sign change and then refined on the dense
//! output of that step only.

mod dop853;
mod tableau;

pub use dop853::{DenseSegment, Tolerances};

use crate::error::{out_of_domain, Error, Result};
use crate::return_map::Quadrant;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct State {
    pub x: f64,
    pub y: f64,
    pub t: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Axis {
    PositiveX,
    NegativeX,
    PositiveY,
    NegativeY,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CrossingEvent {
    pub axis: Axis,
    /// Magnitude of the coordinate along the crossed axis.
    pub value: f64,
    pub time: f64,
    /// 1-based crossing count.
    pub index: usize,
}

/// Integrator settings. `tol` is the relative tolerance; the absolute one is
/// `tol / 100`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeConfig {
    pub tol: f64,
    pub max_steps: usize,
}

pub const DEFAULT_TOL: f64 = 1e-12;

/// Accepted range of `OdeConfig::tol`.
pub const TOL_RANGE: (f64, f64) = (1e-13, 1e-6);

impl Default for OdeConfig {
    fn default() -> Self {
        Self {
            tol: DEFAULT_TOL,
            max_steps: 1_000_000,
        }
    }
}

impl OdeConfig {
    pub fn with_tol(tol: f64) -> Self {
        Self {
            tol,
            ..Self::default()
        }
    }

    fn tolerances(&self) -> Result<Tolerances> {
        let (lo, hi) = TOL_RANGE;
        if !(lo..=hi).contains(&self.tol) {
            return Err(out_of_domain("tol", self.tol, format!("[{lo:e}, {hi:e}]")));
        }
        Ok(Tolerances {
            rtol: self.tol,
            atol: self.tol * 1e-2,
            max_steps: self.max_steps,
        })
    }
}

/// Accepted steps of one integration, each with its dense output.
#[derive(Debug, Clone, Default)]
pub struct Trajectory {
    segments: Vec<DenseSegment<2>>,
}

impl Trajectory {
    pub fn segments(&self) -> &[DenseSegment<2>] {
        &self.segments
    }

    pub fn start_time(&self) -> f64 {
        self.segments.first().map_or(0.0, |s| s.t0)
    }

    pub fn end_time(&self) -> f64 {
        self.segments.last().map_or(0.0, DenseSegment::t1)
    }

    /// State at `t`, from the dense output of the step containing it.
    pub fn eval(&self, t: f64) -> Option<State> {
        let i = self.segments.partition_point(|s| s.t1() < t);
        let seg = self.segments.get(i)?;
        if t < seg.t0 {
            return None;
        }
        let [x, y] = seg.eval(t);
        Some(State { x, y, t })
    }

    /// `n + 1` states evenly spaced in time.
    pub fn sample(&self, n: usize) -> Vec<State> {
        let (a, b) = (self.start_time(), self.end_time());
        (0..=n)
            .filter_map(|i| self.eval(a + (b - a) * i as f64 / n.max(1) as f64))
            .collect()
    }

    /// First root in `[t_lo, t_hi]` of `g(state)`, located by a sign change
    /// on step endpoints (or window ends) and refined on the dense output.
    pub fn find_root(&self, g: impl Fn(&[f64; 2]) -> f64, t_lo: f64, t_hi: f64) -> Option<f64> {
        for seg in &self.segments {
            if seg.t1() < t_lo || seg.t0 > t_hi {
                continue;
            }
            let a = seg.t0.max(t_lo);
            let b = seg.t1().min(t_hi);
            let (ga, gb) = (g(&seg.eval(a)), g(&seg.eval(b)));
            if ga == 0.0 {
                return Some(a);
            }
            if ga * gb <= 0.0 {
                return Some(refine_root(|t| g(&seg.eval(t)), a, b, ga, gb));
            }
        }
        None
    }
}

/// Illinois false position, bracketing, run to full precision.
fn refine_root(g: impl Fn(f64) -> f64, mut a: f64, mut b: f64, mut ga: f64, mut gb: f64) -> f64 {
    if gb == 0.0 {
        return b;
    }
    let mut side = 0i8;
    for _ in 0..200 {
        let c = (a * gb - b * ga) / (gb - ga);
        let c = if c > a.min(b) && c < a.max(b) {
            c
        } else {
            0.5 * (a + b)
        };
        let gc = g(c);
        if gc == 0.0 || (b - a).abs() <= 4.0 * f64::EPSILON * c.abs().max(1e-300) {
            return c;
        }
        if gc * gb < 0.0 {
            a = b;
            ga = gb;
            side = 0;
        } else {
            if side == -1 {
                ga *= 0.5;
            }
            side = -1;
        }
        b = c;
        gb = gc;
    }
    if ga.abs() < gb.abs() {
        a
    } else {
        b
    }
}

/// Sign change of `g` across a step, with a zero at the step start not
/// counted (it was reported by the previous step or is the initial point).
fn crosses(ga: f64, gb: f64) -> bool {
    (ga < 0.0 && gb >= 0.0) || (ga > 0.0 && gb <= 0.0)
}

/// Integrates `field` from `(x0, y0)` until four axis crossings have been
/// seen.
fn first_turn<F>(
    field: F,
    x0: f64,
    y0: f64,
    cfg: &OdeConfig,
) -> Result<(Vec<CrossingEvent>, Trajectory)>
where
    F: Fn(f64, &[f64; 2]) -> [f64; 2],
{
    let tol = cfg.tolerances()?;
    let mut events: Vec<CrossingEvent> = Vec::with_capacity(4);
    let mut traj = Trajectory::default();
    dop853::integrate(field, 0.0, [x0, y0], &tol, |seg| {
        let mut found: Vec<(f64, Axis, f64)> = Vec::new();
        // y = 0: crossing of the x-axis
        if crosses(seg.y0[1], seg.y1[1]) {
            let t = refine_root(|t| seg.eval(t)[1], seg.t0, seg.t1(), seg.y0[1], seg.y1[1]);
            let x = seg.eval(t)[0];
            let axis = if x > 0.0 {
                Axis::PositiveX
            } else {
                Axis::NegativeX
            };
            found.push((t, axis, x.abs()));
        }
        // x = 0: crossing of the y-axis
        if crosses(seg.y0[0], seg.y1[0]) {
            let t = refine_root(|t| seg.eval(t)[0], seg.t0, seg.t1(), seg.y0[0], seg.y1[0]);
            let y = seg.eval(t)[1];
            let axis = if y > 0.0 {
                Axis::PositiveY
            } else {
                Axis::NegativeY
            };
            found.push((t, axis, y.abs()));
        }
        found.sort_by(|a, b| a.0.total_cmp(&b.0));
        for (time, axis, value) in found {
            if events.len() < 4 {
                events.push(CrossingEvent {
                    axis,
                    value,
                    time,
                    index: events.len() + 1,
                });
            }
        }
        traj.segments.push(seg);
        Ok(events.len() < 4)
    })?;
    Ok((events, traj))
}

/// Right-hand side of the normalized system.
pub fn normalized_field(alpha: f64) -> impl Fn(f64, &[f64; 2]) -> [f64; 2] {
    move |_t, s| [-2.0 * s[1], 4.0 * s[0].powi(3) - alpha * s[1].powi(3)]
}

/// Right-hand side of the original system.
pub fn original_field(_t: f64, s: &[f64; 2]) -> [f64; 2] {
    [-s[1], s[0].powi(3) - s[1].powi(3)]
}

/// First full turn of the normalized system from `(x0, 0)`.
#[derive(Debug, Clone)]
pub struct NormalizedRun {
    pub eta: f64,
    pub alpha: f64,
    pub events: Vec<CrossingEvent>,
    pub trajectory: Trajectory,
}

impl NormalizedRun {
    /// The half-turn value: magnitude of the second crossing.
    pub fn half_turn(&self) -> f64 {
        self.events[1].value
    }

    /// The first return to the starting half-axis.
    pub fn full_turn(&self) -> f64 {
        self.events[3].value
    }

    /// `y` where the trajectory passes `x` inside `quadrant` (for a run
    /// started on the positive x-axis).
    pub fn y_at_x(&self, quadrant: Quadrant, x: f64) -> Option<f64> {
        let bounds = [
            0.0,
            self.events[0].time,
            self.events[1].time,
            self.events[2].time,
            self.events[3].time,
        ];
        let q = match quadrant {
            Quadrant::I => 0,
            Quadrant::II => 1,
            Quadrant::III => 2,
            Quadrant::IV => 3,
        };
        let t = self
            .trajectory
            .find_root(|s| s[0] - x, bounds[q], bounds[q + 1])?;
        self.trajectory.eval(t).map(|s| s.y)
    }
}

fn check_start(name: &'static str, v: f64, lo: f64, hi: f64) -> Result<()> {
    if !(v >= lo && v <= hi) {
        return Err(out_of_domain(name, v, format!("[{lo}, {hi}]")));
    }
    Ok(())
}

/// Integrates the normalized system from `(eta, 0)` through four crossings:
/// positive y, negative x, negative y, positive x.
pub fn integrate_normalized(eta: f64, alpha: f64, cfg: &OdeConfig) -> Result<NormalizedRun> {
    check_start("eta", eta, 0.5, 1.5)?;
    if !alpha.is_finite() || alpha < 0.0 {
        return Err(out_of_domain("alpha", alpha, "[0, inf)"));
    }
    integrate_normalized_from(eta, 0.0, alpha, cfg)
}

/// Same as [`integrate_normalized`] from an arbitrary start `(x0, y0)`,
/// used for the point-reflection symmetry check.
pub fn integrate_normalized_from(
    x0: f64,
    y0: f64,
    alpha: f64,
    cfg: &OdeConfig,
) -> Result<NormalizedRun> {
    if x0 == 0.0 && y0 == 0.0 {
        return Err(out_of_domain(
            "start",
            0.0,
            "a point other than the equilibrium",
        ));
    }
    let (events, trajectory) = first_turn(normalized_field(alpha), x0, y0, cfg)?;
    Ok(NormalizedRun {
        eta: x0.abs(),
        alpha,
        events,
        trajectory,
    })
}

/// First return `X~~` to the positive X-axis of the original system started
/// at `(epsilon, 0)`.
pub fn integrate_original(epsilon: f64, cfg: &OdeConfig) -> Result<f64> {
    if !(epsilon > 0.0 && epsilon <= 0.5) {
        return Err(out_of_domain("epsilon", epsilon, "(0, 0.5]"));
    }
    let (events, _) = first_turn(original_field, epsilon, 0.0, cfg)?;
    match events.last() {
        Some(e) if e.axis == Axis::PositiveX => Ok(e.value),
        _ => Err(Error::Integration {
            t: events.last().map_or(0.0, |e| e.time),
            reason: "turn did not end on the positive X-axis".into(),
        }),
    }
}

/// Behaviour of `L = y^2 + x^4` along a run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LyapunovReport {
    pub start: f64,
    pub end: f64,
    /// Largest increase of `L` across one accepted step.
    pub max_increase: f64,
    /// Largest `|L - L(start)|` over accepted steps.
    pub max_drift: f64,
    pub strictly_decreased: bool,
}

impl LyapunovReport {
    pub fn non_increasing(&self, slack: f64) -> bool {
        self.max_increase <= slack
    }
}

pub fn lyapunov(s: &[f64; 2]) -> f64 {
    s[1] * s[1] + s[0].powi(4)
}

pub fn lyapunov_audit(run: &NormalizedRun) -> LyapunovReport {
    let segs = run.trajectory.segments();
    let start = segs.first().map_or(0.0, |s| lyapunov(&s.y0));
    let end = run
        .trajectory
        .eval(run.events.last().map_or(0.0, |e| e.time))
        .map_or(start, |s| lyapunov(&[s.x, s.y]));
    let mut max_increase: f64 = 0.0;
    let mut max_drift: f64 = 0.0;
    for seg in segs {
        let (a, b) = (lyapunov(&seg.y0), lyapunov(&seg.y1));
        max_increase = max_increase.max(b - a);
        max_drift = max_drift.max((b - start).abs());
    }
    LyapunovReport {
        start,
        end,
        max_increase,
        max_drift,
        strictly_decreased: end < start,
    }
}
