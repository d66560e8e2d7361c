//! The five commands. Each returns a [`Report`]; every emitted value has a
//! companion `*_error` estimate.

use crate::config::{ConfigError, Settings};
use crate::report::{Cell, Report, Table};
use anyhow::{Context, Result};
use nilreturn::{
    full_turn_series, half_turn_series, integrate_normalized, integrate_original, lyapunov_audit,
    melnikov, melnikov_quadrature, solve_fixed_point, FixedPointConfig, Grid, GridKind, OdeConfig,
    ReturnMapSeries, VSeries, C1_EXACT, DEFAULT_DELTA_MAX,
};
use rayon::prelude::*;
use serde_json::{json, Map, Value};

fn meta(command: &str, s: &Settings, fields: Value) -> Map<String, Value> {
    let mut m = Map::new();
    m.insert("tool".into(), json!("nilreturn"));
    m.insert("version".into(), json!(env!("CARGO_PKG_VERSION")));
    m.insert("command".into(), json!(command));
    m.insert(
        "format".into(),
        json!(format!("{:?}", s.format).to_lowercase()),
    );
    if let Value::Object(f) = fields {
        m.extend(f);
    }
    m
}

fn grid_kind_name(s: &Settings) -> &'static str {
    match GridKind::from(s.grid_kind) {
        GridKind::Uniform => "uniform",
        GridKind::ChebyshevLobatto => "chebyshev-lobatto",
    }
}

/// The series on `M` and on `2M` intervals. Values come from `M`; the
/// difference is the grid error estimate.
struct Pipeline {
    vs: VSeries,
    refined: VSeries,
    map: ReturnMapSeries,
    map_refined: ReturnMapSeries,
}

fn pipeline(s: &Settings) -> Result<Pipeline> {
    let kind = GridKind::from(s.grid_kind);
    let build = |m: usize| -> Result<(VSeries, ReturnMapSeries)> {
        let vs = VSeries::compute(s.order, &Grid::new(kind, m)?)?;
        let map = full_turn_series(&half_turn_series(&vs, s.order)?, s.order)?;
        Ok((vs, map))
    };
    let ((vs, map), (refined, map_refined)) = (build(s.grid)?, build(2 * s.grid)?);
    Ok(Pipeline {
        vs,
        refined,
        map,
        map_refined,
    })
}

/// Tighter tolerance used to estimate the integration error at `tol`.
fn reference_tol(tol: f64) -> f64 {
    let (lo, _) = nilreturn::ode::TOL_RANGE;
    let r = (tol / 10.0).max(lo);
    if r < tol {
        r
    } else {
        tol * 10.0
    }
}

pub fn coeffs(s: &Settings) -> Result<Report> {
    let p = pipeline(s).context("computing the series")?;
    let mut rows = Table::new(["n", "c_n", "c_n_error", "X_n", "X_n_error"]);
    for n in 1..=s.order {
        let (c, x) = (p.vs.c(n), p.map.x(n));
        rows.push(vec![
            n.into(),
            c.into(),
            (c - p.refined.c(n)).abs().into(),
            x.into(),
            (x - p.map_refined.x(n)).abs().into(),
        ]);
    }
    let mut extra = Map::new();
    extra.insert(
        "c1_oracle".into(),
        json!({
            "c1_exact": C1_EXACT,
            "difference": p.vs.c(1) - C1_EXACT,
        }),
    );
    Ok(Report {
        meta: meta(
            "coeffs",
            s,
            json!({"order": s.order, "grid": s.grid, "grid_kind": grid_kind_name(s), "error_estimate": "|value(M) - value(2M)|"}),
        ),
        rows,
        extra,
    })
}

/// Least-squares slope of `ln y` on `ln x` with its standard error.
fn loglog_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.abs().ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    let slope = lx
        .iter()
        .zip(&ly)
        .map(|(a, b)| (a - mx) * (b - my))
        .sum::<f64>()
        / sxx;
    let sse: f64 = lx
        .iter()
        .zip(&ly)
        .map(|(a, b)| (b - my - slope * (a - mx)).powi(2))
        .sum();
    let stderr = if lx.len() > 2 {
        (sse / (n - 2.0) / sxx).sqrt()
    } else {
        f64::NAN
    };
    (slope, stderr)
}

pub fn verify(s: &Settings) -> Result<Report> {
    s.require_ode_tol()?;
    Settings::require_in("epsilon", &s.epsilon, |e| e > 0.0 && e <= 0.5, "(0, 0.5]")?;
    let p = pipeline(s).context("computing the series")?;
    let (cfg, cfg_ref) = (
        OdeConfig::with_tol(s.tol),
        OdeConfig::with_tol(reference_tol(s.tol)),
    );

    let oracles: Vec<(f64, f64)> = s
        .epsilon
        .par_iter()
        .map(|&e| {
            let x = integrate_original(e, &cfg)
                .with_context(|| format!("integrating at epsilon = {e}"))?;
            let r = integrate_original(e, &cfg_ref)
                .with_context(|| format!("integrating at epsilon = {e}"))?;
            Ok((x, (x - r).abs()))
        })
        .collect::<Result<_>>()?;

    let mut columns = vec![
        "epsilon".to_string(),
        "alpha".into(),
        "oracle".into(),
        "oracle_error".into(),
    ];
    for k in 0..=s.order {
        for c in ["partial", "partial_error", "residual", "residual_error"] {
            columns.push(format!("{c}_{k}"));
        }
    }
    let mut rows = Table::new(columns);
    let mut residuals = vec![Vec::new(); s.order + 1];
    let mut resolved = vec![0usize; s.order + 1];
    for (&e, &(x, x_err)) in s.epsilon.iter().zip(&oracles) {
        let mut row: Vec<Cell> = vec![
            e.into(),
            (std::f64::consts::SQRT_2 * e.powi(3)).into(),
            x.into(),
            x_err.into(),
        ];
        for k in 0..=s.order {
            let partial = p.map.partial_sum(e, k);
            let partial_err = (partial - p.map_refined.partial_sum(e, k)).abs();
            let (res, res_err) = (x - partial, x_err + partial_err);
            residuals[k].push(res);
            if res.abs() > res_err {
                resolved[k] += 1;
            }
            row.extend([
                partial.into(),
                partial_err.into(),
                res.into(),
                res_err.into(),
            ]);
        }
        rows.push(row);
    }

    let fits: Vec<Value> = (0..=s.order)
        .map(|k| {
            let (slope, stderr) = if s.epsilon.len() >= 2 {
                loglog_fit(&s.epsilon, &residuals[k])
            } else {
                (f64::NAN, f64::NAN)
            };
            json!({
                "order": k,
                "expected_slope": 3 * k + 4,
                "slope": slope,
                "slope_error": stderr,
                "points_above_error": resolved[k],
            })
        })
        .collect();

    let control = integrate_normalized(1.0, 0.0, &cfg).context("alpha = 0 control run")?;
    let residual = control.full_turn() - 1.0;
    let mut extra = Map::new();
    extra.insert("fits".into(), Value::Array(fits));
    extra.insert(
        "control".into(),
        json!({
            "alpha": 0.0,
            "eta": 1.0,
            "return": control.full_turn(),
            "residual": residual,
            "residual_error": 10.0 * s.tol,
            "pass": residual.abs() <= 10.0 * s.tol,
        }),
    );
    Ok(Report {
        meta: meta(
            "verify",
            s,
            json!({"order": s.order, "grid": s.grid, "grid_kind": grid_kind_name(s), "tol": s.tol,
                   "reference_tol": reference_tol(s.tol), "epsilon": s.epsilon}),
        ),
        rows,
        extra,
    })
}

pub fn fixedpoint(s: &Settings) -> Result<Report> {
    Settings::require_in(
        "delta",
        &s.delta,
        |d| d.abs() < DEFAULT_DELTA_MAX,
        &format!("|delta| < {DEFAULT_DELTA_MAX}"),
    )?;
    let grid = Grid::new(GridKind::from(s.grid_kind), s.grid)?;
    let vs = VSeries::compute(s.order, &grid).context("computing the series")?;
    let cfg = FixedPointConfig {
        tol: s.tol,
        ..FixedPointConfig::default()
    };
    let runs = s
        .delta
        .par_iter()
        .map(|&d| {
            solve_fixed_point(&grid, d, &cfg).with_context(|| format!("fixed point at delta = {d}"))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut rows = Table::new([
        "delta",
        "iterations",
        "final_step_norm",
        "contraction_estimate",
        "contraction_bound",
        "v_at_1",
        "v_at_1_error",
        "series_sup_difference",
        "series_truncation_estimate",
    ]);
    let mut solutions = Vec::new();
    for r in &runs {
        let k = r.contraction_estimate;
        // a posteriori bound for a contraction with constant k
        let err = if k < 1.0 {
            r.final_step_norm * k / (1.0 - k)
        } else {
            f64::NAN
        };
        let series = vs.partial_sum(r.delta)?;
        rows.push(vec![
            r.delta.into(),
            r.iterations.into(),
            r.final_step_norm.into(),
            k.into(),
            (3.0 * 5f64.sqrt() * r.delta.abs() / 10.0).into(),
            r.solution.last().into(),
            err.into(),
            r.solution.sub(&series)?.sup_norm().into(),
            vs.truncation_estimate(1.0, r.delta).into(),
        ]);
        let samples: Vec<Value> = (0..s.samples)
            .map(|i| {
                let xi = i as f64 / (s.samples - 1) as f64;
                json!({"xi": xi, "v": r.solution.eval(xi), "v_error": err})
            })
            .collect();
        solutions.push(json!({"delta": r.delta, "samples": samples}));
    }
    let mut extra = Map::new();
    extra.insert("solutions".into(), Value::Array(solutions));
    Ok(Report {
        meta: meta(
            "fixedpoint",
            s,
            json!({"order": s.order, "grid": s.grid, "grid_kind": grid_kind_name(s), "tol": s.tol,
                   "ball_radius": cfg.ball_radius, "delta": s.delta}),
        ),
        rows,
        extra,
    })
}

pub fn melnikov_cmd(s: &Settings) -> Result<Report> {
    Settings::require_in("T", &s.t, |t| t > 0.0, "(0, inf)")?;
    let kind = GridKind::from(s.grid_kind);
    let c1 = |m: usize| -> Result<f64> { Ok(VSeries::compute(1, &Grid::new(kind, m)?)?.c(1)) };
    let (c1_m, c1_2m) = (c1(s.grid)?, c1(2 * s.grid)?);
    let mut rows = Table::new([
        "T",
        "closed_form",
        "closed_form_error",
        "quadrature",
        "quadrature_error",
        "relative_difference",
    ]);
    for &t in &s.t {
        let closed = melnikov(t, c1_m)?;
        let closed_err = (closed - melnikov(t, c1_2m)?).abs();
        let quad = melnikov_quadrature(t)?;
        let quad_err = (quad - melnikov(t, C1_EXACT)?).abs();
        rows.push(vec![
            t.into(),
            closed.into(),
            closed_err.into(),
            quad.into(),
            quad_err.into(),
            ((closed - quad).abs() / quad).into(),
        ]);
    }
    Ok(Report {
        meta: meta(
            "melnikov",
            s,
            json!({"grid": s.grid, "grid_kind": grid_kind_name(s), "c1": c1_m,
                   "closed_form": "8 c1 T^(7/4)", "quadrature_error": "|quadrature - 8 c1_exact T^(7/4)|"}),
        ),
        rows,
        extra: Map::new(),
    })
}

pub fn trace(s: &Settings) -> Result<Report> {
    s.require_ode_tol()?;
    let [alpha] = s.alpha.as_slice() else {
        return Err(ConfigError("trace takes a single alpha".into()).into());
    };
    let (alpha, eta) = (*alpha, s.eta);
    Settings::require_in("alpha", &[alpha], |a| a >= 0.0, "[0, inf)")?;
    Settings::require_in("eta", &[eta], |e| (0.5..=1.5).contains(&e), "[0.5, 1.5]")?;
    let run =
        integrate_normalized(eta, alpha, &OdeConfig::with_tol(s.tol)).context("integrating")?;
    let reference = integrate_normalized(eta, alpha, &OdeConfig::with_tol(reference_tol(s.tol)))
        .context("integrating at the reference tolerance")?;

    let events: Vec<Value> = run
        .events
        .iter()
        .zip(&reference.events)
        .map(|(e, r)| {
            json!({
                "index": e.index,
                "axis": e.axis,
                "value": e.value,
                "value_error": (e.value - r.value).abs(),
                "time": e.time,
                "time_error": (e.time - r.time).abs(),
            })
        })
        .collect();

    let mut rows = Table::new(["t", "x", "x_error", "y", "y_error", "lyapunov"]);
    for st in run.trajectory.sample(s.samples) {
        let (dx, dy) = reference
            .trajectory
            .eval(st.t)
            .map_or((f64::NAN, f64::NAN), |r| {
                ((st.x - r.x).abs(), (st.y - r.y).abs())
            });
        rows.push(vec![
            st.t.into(),
            st.x.into(),
            dx.into(),
            st.y.into(),
            dy.into(),
            nilreturn::ode::lyapunov(&[st.x, st.y]).into(),
        ]);
    }
    let mut extra = Map::new();
    extra.insert("events".into(), Value::Array(events));
    extra.insert(
        "lyapunov".into(),
        serde_json::to_value(lyapunov_audit(&run))?,
    );
    extra.insert(
        "return".into(),
        json!({
            "half_turn": run.half_turn(),
            "half_turn_error": (run.half_turn() - reference.half_turn()).abs(),
            "full_turn": run.full_turn(),
            "full_turn_error": (run.full_turn() - reference.full_turn()).abs(),
        }),
    );
    Ok(Report {
        meta: meta(
            "trace",
            s,
            json!({"eta": eta, "alpha": alpha, "tol": s.tol, "reference_tol": reference_tol(s.tol), "samples": s.samples}),
        ),
        rows,
        extra,
    })
}
