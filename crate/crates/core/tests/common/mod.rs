// Invariant checks shared by the `invariants` and `acceptance` targets. Each
// check returns Err with a message on the first violation.
#![allow(dead_code)]

use nilreturn::series::solve_implicit;
use nilreturn::{
    apply_j, eval_p, full_turn_series, half_turn_series, integrate_normalized,
    integrate_normalized_from, lyapunov_audit, solve_fixed_point, Axis, Exponent, FixedPointConfig,
    Grid, GridFunction, GridKind, OdeConfig, TruncatedSeries, VSeries,
};
use proptest::prelude::*;
use proptest::test_runner::{Config, TestCaseError, TestRunner};
use std::sync::{Arc, OnceLock};

pub type Check = fn() -> Result<(), String>;

pub fn grid() -> &'static Arc<Grid> {
    static G: OnceLock<Arc<Grid>> = OnceLock::new();
    G.get_or_init(|| Grid::uniform(2048).unwrap())
}

pub fn vseries6() -> &'static VSeries {
    static V: OnceLock<VSeries> = OnceLock::new();
    V.get_or_init(|| VSeries::compute(6, grid()).unwrap())
}

fn runner(cases: u32) -> TestRunner {
    TestRunner::new(Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    })
}

fn fail(msg: impl Into<String>) -> TestCaseError {
    TestCaseError::fail(msg.into())
}

fn report<T: std::fmt::Debug>(
    r: Result<(), proptest::test_runner::TestError<T>>,
) -> Result<(), String> {
    r.map_err(|e| e.to_string())
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn small_int_series(order: usize) -> impl Strategy<Value = TruncatedSeries<f64>> {
    prop::collection::vec(-9i32..=9, order + 1)
        .prop_map(|c| TruncatedSeries::new("x", c.into_iter().map(f64::from).collect()))
}

pub fn ring_axioms() -> Result<(), String> {
    let s = || small_int_series(6);
    report(runner(256).run(&(s(), s(), s()), |(a, b, c)| {
        let ab_c = a.mul(&b).unwrap().mul(&c).unwrap();
        let a_bc = a.mul(&b.mul(&c).unwrap()).unwrap();
        prop_assert_eq!(ab_c.coeffs(), a_bc.coeffs());
        let lhs = a.mul(&b.add(&c).unwrap()).unwrap();
        let rhs = a.mul(&b).unwrap().add(&a.mul(&c).unwrap()).unwrap();
        prop_assert_eq!(lhs.coeffs(), rhs.coeffs());
        let (ab, ba) = (a.mul(&b).unwrap(), b.mul(&a).unwrap());
        prop_assert_eq!(ab.coeffs(), ba.coeffs());
        let sum1 = a.add(&b).unwrap().add(&c).unwrap();
        let sum2 = a.add(&b.add(&c).unwrap()).unwrap();
        prop_assert_eq!(sum1.coeffs(), sum2.coeffs());
        Ok(())
    }))
}

pub fn pow_frac_round_trip() -> Result<(), String> {
    let strat = prop::collection::vec(-0.3f64..=0.3, 1..=8);
    report(runner(256).run(&strat, |tail| {
        let mut c = vec![1.0];
        c.extend(tail);
        let a = TruncatedSeries::new("x", c);
        let back = a
            .pow_frac(Exponent::new(3, 2).unwrap())
            .and_then(|s| s.pow_frac(Exponent::new(2, 3).unwrap()))
            .map_err(|e| fail(e.to_string()))?;
        for (x, y) in back.coeffs().iter().zip(a.coeffs()) {
            prop_assert!((x - y).abs() <= 1e-12, "{x} vs {y}");
        }
        Ok(())
    }))
}

pub fn binomial_agreement() -> Result<(), String> {
    let strat = (-7i64..=7, 1i64..=4, -0.5f64..=0.5);
    report(runner(256).run(&strat, |(num, den, a1)| {
        let e = num as f64 / den as f64;
        let s = TruncatedSeries::new("x", vec![1.0, a1, 0.0, 0.0, 0.0, 0.0, 0.0])
            .pow_frac(Exponent::new(num, den).unwrap())
            .map_err(|e| fail(e.to_string()))?;
        let mut binom = 1.0;
        for k in 0..=6 {
            let want = binom * a1.powi(k as i32);
            let got = s.coeffs()[k];
            prop_assert!((got - want).abs() <= 1e-14, "k={k}: {got} vs {want}");
            binom *= (e - k as f64) / (k as f64 + 1.0);
        }
        Ok(())
    }))
}

pub fn implicit_residual() -> Result<(), String> {
    // g^3 + a g x + b x^2 g^2 - (1 + c x) = 0 with g(0) = 1
    let strat = (-1.0f64..=1.0, -1.0f64..=1.0, -1.0f64..=1.0);
    report(runner(128).run(&strat, |(a, b, c)| {
        let order = 8;
        let x = TruncatedSeries::variable("x", order);
        let residual = |g: &TruncatedSeries<f64>| -> nilreturn::Result<TruncatedSeries<f64>> {
            let mut rhs = vec![0.0; order + 1];
            rhs[0] = 1.0;
            rhs[1] = c;
            let rhs = TruncatedSeries::new("x", rhs);
            g.powi(3)?
                .add(&g.mul(&x)?.scale(a))?
                .add(&g.powi(2)?.mul(&x.powi(2)?)?.scale(b))?
                .sub(&rhs)
        };
        let g = solve_implicit("x", order, 1.0, residual).map_err(|e| fail(e.to_string()))?;
        let r = residual(&g).map_err(|e| fail(e.to_string()))?;
        prop_assert!(r.max_norm() <= 1e-12, "residual {}", r.max_norm());
        Ok(())
    }))
}

pub fn weighted_cumulative_linear() -> Result<(), String> {
    let g = grid();
    let strat = (
        -2.0f64..=2.0,
        -2.0f64..=2.0,
        prop::collection::vec(-1.0f64..=1.0, 4),
    );
    report(runner(64).run(&strat, |(a, b, k)| {
        let f = GridFunction::from_fn(g, |t| k[0] + k[1] * t * t).unwrap();
        let h = GridFunction::from_fn(g, |t| (k[2] * t).cos() + k[3] * eval_p(t)).unwrap();
        let lhs = f.scale(a).add(&h.scale(b)).unwrap().weighted_cumulative();
        let rhs = f
            .weighted_cumulative()
            .scale(a)
            .add(&h.weighted_cumulative().scale(b))
            .unwrap();
        let d = lhs.sub(&rhs).unwrap().sup_norm();
        prop_assert!(d <= 1e-13, "W not linear: {d}");
        Ok(())
    }))
}

pub fn weighted_cumulative_near_origin() -> Result<(), String> {
    let g = grid();
    let strat = 0.5f64..=4.0;
    report(runner(32).run(&strat, |f0| {
        let f = GridFunction::from_fn(g, |t| f0 + t).unwrap();
        let w = f.weighted_cumulative();
        prop_assert_eq!(w.values()[0], 0.0);
        let x = g.nodes();
        // W[f] ~ f(0) xi^3 / 5, so the local log-log slope is 3
        let slope = (w.values()[2] / w.values()[1]).ln() / (x[2] / x[1]).ln();
        prop_assert!((slope - 3.0).abs() < 0.05, "slope {slope}");
        let ratio = w.values()[1] / x[1].powi(3);
        prop_assert!((ratio - f0 / 5.0).abs() < 1e-3, "ratio {ratio}");
        Ok(())
    }))
}

pub fn quadrature_converges() -> Result<(), String> {
    let change = nilreturn::grid::quadrature_self_check(
        GridKind::Uniform,
        2048,
        |t| eval_p(t).powf(1.5),
        1e-10,
    )
    .map_err(|e| e.to_string())?;
    ensure(change <= 1e-10, || format!("c_1 changed by {change}"))
}

pub fn v_vanish_at_origin() -> Result<(), String> {
    let vs = vseries6();
    let x1 = grid().nodes()[1];
    for n in 1..=6 {
        let v = vs.v(n);
        ensure(v.values()[0] == 0.0, || {
            format!("v_{n}(0) = {}", v.values()[0])
        })?;
        ensure(vs.c(n) == v.last(), || format!("c_{n} is not v_{n}(1)"))?;
        // O(xi^3): the first interior value is bounded by a modest multiple of xi^3
        let r = (v.values()[1] / x1.powi(3)).abs();
        ensure(r < 10.0, || {
            format!("v_{n}(xi)/xi^3 = {r} at the first node")
        })?;
    }
    Ok(())
}

pub fn sign_patterns() -> Result<(), String> {
    let vs = vseries6();
    ensure(vs.v(1).values().iter().all(|&v| v >= 0.0), || {
        "v_1 < 0 somewhere".into()
    })?;
    ensure(vs.v(2).values().iter().all(|&v| v <= 0.0), || {
        "v_2 > 0 somewhere".into()
    })
}

pub fn grid_convergence() -> Result<(), String> {
    let fine = VSeries::compute(6, &Grid::uniform(4096).unwrap()).map_err(|e| e.to_string())?;
    let coarse = vseries6();
    for n in 1..=6 {
        let d = (coarse.c(n) - fine.c(n)).abs();
        ensure(d <= 1e-10, || format!("|c_{n}(M) - c_{n}(2M)| = {d}"))?;
    }
    Ok(())
}

pub fn fixed_point_invariants() -> Result<(), String> {
    let cfg = FixedPointConfig::default();
    let g = grid();
    let vs = vseries6();
    let mut sup_diff = Vec::new();
    for delta in [0.05, 0.1, 0.2, 0.35, -0.3] {
        let r = solve_fixed_point(g, delta, &cfg).map_err(|e| e.to_string())?;
        ensure(r.solution.sup_norm() <= cfg.ball_radius, || {
            "left the ball".into()
        })?;
        let res = apply_j(&r.solution, delta, cfg.ball_radius)
            .map_err(|e| e.to_string())?
            .sub(&r.solution)
            .unwrap()
            .sup_norm();
        ensure(res <= 2.0 * cfg.tol, || {
            format!("delta {delta}: residual {res}")
        })?;
        for (k, w) in r.step_norms.windows(2).enumerate().skip(1) {
            let ratio = w[1] / w[0];
            ensure(ratio <= r.contraction_estimate + 0.02, || {
                format!("delta {delta}: step ratio {ratio} at iteration {}", k + 2)
            })?;
        }
        if [0.1, 0.2].contains(&delta) {
            sup_diff.push(
                r.solution
                    .sub(&vs.partial_sum(delta).unwrap())
                    .unwrap()
                    .sup_norm(),
            );
        }
    }
    let k = sup_diff[1] / 0.2f64.powi(7);
    let k_lo = sup_diff[0] / 0.1f64.powi(7);
    ensure(k.max(k_lo) < 100.0, || {
        format!("series agreement constant {k} / {k_lo}")
    })
}

pub fn return_map_contracts() -> Result<(), String> {
    let rm = full_turn_series(&half_turn_series(vseries6(), 6).unwrap(), 6).unwrap();
    report(runner(128).run(&(1e-6f64..=0.1), |beta| {
        let f = rm.full_turn.eval(beta);
        prop_assert!(f < 1.0, "full turn {f} at beta {beta}");
        Ok(())
    }))
}

pub fn half_turn_parity() -> Result<(), String> {
    let h = half_turn_series(vseries6(), 6).unwrap();
    let g = &h.g;
    let beta = TruncatedSeries::variable("beta", g.order());
    let back = g
        .mul(
            &g.compose(&beta.mul(&g.powi(3).unwrap()).unwrap().scale(-1.0))
                .unwrap(),
        )
        .unwrap();
    for (n, c) in back.coeffs().iter().enumerate() {
        let want = if n == 0 { 1.0 } else { 0.0 };
        ensure((c - want).abs() <= 1e-11, || format!("order {n}: {c}"))?;
    }
    Ok(())
}

pub fn homogeneity() -> Result<(), String> {
    let rm = full_turn_series(&half_turn_series(vseries6(), 6).unwrap(), 6).unwrap();
    for s in [0.8, 1.25] {
        for (eta, alpha) in [(1.0, 0.05), (0.9, 0.02)] {
            let base = rm.eval_normalized(eta, alpha);
            let scaled = rm.eval_normalized(eta * s, alpha / s.powi(3));
            ensure((scaled - s * base).abs() <= 1e-10, || {
                format!("s={s}: {scaled} vs {}", s * base)
            })?;
        }
    }
    Ok(())
}

pub fn matching_back_substitution() -> Result<(), String> {
    let vs = VSeries::compute(8, grid()).unwrap();
    let order = 6;
    let h = half_turn_series(&vs, order).unwrap();
    let r = h.matching_residual(&vs).unwrap();
    for (n, c) in r.coeffs().iter().enumerate().take(order + 1) {
        ensure(c.abs() <= 1e-12, || {
            format!("matching residual order {n}: {c}")
        })?;
    }
    // evaluated with the longer V, the remainder falls off like beta^(order+1)
    let v = vs.endpoint_series();
    let at = |b: f64| {
        let g = h.g.eval(b);
        (g.powi(4) * (1.0 - v.eval(-2.0 * g.powi(3) * b)) - (1.0 - v.eval(2.0 * b))).abs()
    };
    let slope = (at(0.04) / at(0.02)).log2();
    ensure((slope - (order + 1) as f64).abs() < 0.5, || {
        format!("residual order {slope}")
    })
}

pub fn crossing_order() -> Result<(), String> {
    let cfg = OdeConfig::with_tol(1e-10);
    report(
        runner(24).run(&(0.5f64..=1.5, 0.0f64..=0.2), |(eta, alpha)| {
            let run = integrate_normalized(eta, alpha, &cfg).map_err(|e| fail(e.to_string()))?;
            let axes: Vec<Axis> = run.events.iter().map(|e| e.axis).collect();
            prop_assert_eq!(
                axes,
                vec![
                    Axis::PositiveY,
                    Axis::NegativeX,
                    Axis::NegativeY,
                    Axis::PositiveX
                ]
            );
            prop_assert!(run.events.windows(2).all(|w| w[0].time < w[1].time));
            Ok(())
        }),
    )
}

pub fn lyapunov_monotone() -> Result<(), String> {
    let cfg = OdeConfig::with_tol(1e-11);
    report(
        runner(24).run(&(0.5f64..=1.5, 0.001f64..=0.2), |(eta, alpha)| {
            let run = integrate_normalized(eta, alpha, &cfg).map_err(|e| fail(e.to_string()))?;
            let rep = lyapunov_audit(&run);
            prop_assert!(
                rep.non_increasing(10.0 * cfg.tol),
                "increase {}",
                rep.max_increase
            );
            prop_assert!(rep.strictly_decreased);
            prop_assert!(run.full_turn() < eta);
            Ok(())
        }),
    )
}

pub fn lyapunov_conserved_without_damping() -> Result<(), String> {
    let mut drifts = Vec::new();
    for tol in [1e-8, 1e-9, 1e-10, 1e-11, 1e-12] {
        let run = integrate_normalized(1.0, 0.0, &OdeConfig::with_tol(tol)).unwrap();
        let drift = lyapunov_audit(&run).max_drift;
        ensure(drift <= 100.0 * tol, || format!("tol {tol}: drift {drift}"))?;
        drifts.push(drift);
    }
    // the violation tracks the tolerance: about 10x per decade
    for w in drifts.windows(2).take(3) {
        let ratio = w[0] / w[1];
        ensure((3.0..=30.0).contains(&ratio), || {
            format!("drift ratio {ratio}")
        })?;
    }
    Ok(())
}

pub fn self_convergence() -> Result<(), String> {
    for tol in [1e-8, 1e-10, 1e-12] {
        for alpha in [0.0, 0.05, 0.2] {
            let a = integrate_normalized(1.0, alpha, &OdeConfig::with_tol(tol)).unwrap();
            let b = integrate_normalized(1.0, alpha, &OdeConfig::with_tol(tol / 2.0)).unwrap();
            let d = (a.full_turn() - b.full_turn()).abs();
            ensure(d < tol, || format!("tol {tol}, alpha {alpha}: change {d}"))?;
        }
    }
    Ok(())
}

pub fn point_reflection() -> Result<(), String> {
    let cfg = OdeConfig::default();
    for (eta, alpha) in [(1.0, 0.05), (0.7, 0.1), (1.3, 0.0)] {
        let a = integrate_normalized(eta, alpha, &cfg).unwrap();
        let b = integrate_normalized_from(-eta, 0.0, alpha, &cfg).unwrap();
        for (ea, eb) in a.events.iter().zip(&b.events) {
            ensure((ea.value - eb.value).abs() <= 10.0 * cfg.tol, || {
                format!("eta {eta}: {} vs {}", ea.value, eb.value)
            })?;
        }
        let mirrored: Vec<Axis> = b.events.iter().map(|e| e.axis).collect();
        ensure(
            mirrored
                == [
                    Axis::NegativeY,
                    Axis::PositiveX,
                    Axis::PositiveY,
                    Axis::NegativeX,
                ],
            || format!("mirrored axes {mirrored:?}"),
        )?;
    }
    Ok(())
}

pub const ALL: &[(&str, Check)] = &[
    ("series ring axioms", ring_axioms),
    ("pow_frac 3/2 then 2/3 round trip", pow_frac_round_trip),
    ("pow_frac vs binomial expansion", binomial_agreement),
    ("implicit solve residual", implicit_residual),
    ("weighted_cumulative linearity", weighted_cumulative_linear),
    (
        "weighted_cumulative near 0",
        weighted_cumulative_near_origin,
    ),
    ("quadrature self-check", quadrature_converges),
    ("v_n(0) = 0 and O(xi^3)", v_vanish_at_origin),
    ("sign patterns of v_1, v_2", sign_patterns),
    ("c_n grid convergence", grid_convergence),
    ("fixed-point invariants", fixed_point_invariants),
    ("return map contracts", return_map_contracts),
    ("half-turn parity", half_turn_parity),
    ("homogeneity", homogeneity),
    ("matching back-substitution", matching_back_substitution),
    ("crossing order", crossing_order),
    ("Lyapunov monotonicity", lyapunov_monotone),
    (
        "Lyapunov conservation at alpha = 0",
        lyapunov_conserved_without_damping,
    ),
    ("ODE self-convergence", self_convergence),
    ("point-reflection symmetry", point_reflection),
];
