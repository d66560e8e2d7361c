//! Explicit Runge-Kutta 8(5,3) with step-size control and dense output of
//! order 7, after Hairer's DOP853.

use super::tableau::*;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

/// Continuous extension over one accepted step `[t0, t0 + h]`.
#[derive(Debug, Clone)]
pub struct DenseSegment<const N: usize> {
    pub t0: f64,
    pub h: f64,
    pub y0: [f64; N],
    pub y1: [f64; N],
    cont: [[f64; N]; 8],
}

impl<const N: usize> DenseSegment<N> {
    pub fn t1(&self) -> f64 {
        self.t0 + self.h
    }

    pub fn eval(&self, t: f64) -> [f64; N] {
        let s = (t - self.t0) / self.h;
        let s1 = 1.0 - s;
        let c = &self.cont;
        std::array::from_fn(|i| {
            let conpar = c[4][i] + s * (c[5][i] + s1 * (c[6][i] + s * c[7][i]));
            c[0][i] + s * (c[1][i] + s1 * (c[2][i] + s * (c[3][i] + s1 * conpar)))
        })
    }
}

/// `y + h * sum_j a_j k_j`
fn stage<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    std::array::from_fn(|i| y[i] + h * terms.iter().map(|(a, k)| a * k[i]).sum::<f64>())
}

fn combo<const N: usize>(terms: &[(f64, &[f64; N])]) -> [f64; N] {
    std::array::from_fn(|i| terms.iter().map(|(a, k)| a * k[i]).sum())
}

const SAFE: f64 = 0.9;
const FACC1: f64 = 1.0 / 0.333;
const FACC2: f64 = 1.0 / 6.0;

fn initial_step<const N: usize, F>(
    f: &F,
    t: f64,
    y: &[f64; N],
    f0: &[f64; N],
    tol: &Tolerances,
) -> f64
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    let sk = |i: usize| tol.atol + tol.rtol * y[i].abs();
    let rms =
        |v: &[f64; N]| ((0..N).map(|i| (v[i] / sk(i)).powi(2)).sum::<f64>() / N as f64).sqrt();
    let (dnf, dny) = (rms(f0), rms(y));
    let mut h = if dnf <= 1e-10 || dny <= 1e-10 {
        1e-6
    } else {
        0.01 * dny / dnf
    };
    let y1 = stage(y, h, &[(1.0, f0)]);
    let f1 = f(t + h, &y1);
    let diff: [f64; N] = std::array::from_fn(|i| f1[i] - f0[i]);
    let der2 = rms(&diff) / h;
    let der12 = der2.max(dnf);
    let h1 = if der12 <= 1e-15 {
        (h * 1e-3).max(1e-6)
    } else {
        (0.01 / der12).powf(1.0 / 8.0)
    };
    h = (100.0 * h).min(h1);
    h
}

/// Integrates from `(t0, y0)`, handing every accepted step to `observe`,
/// until `observe` returns `false`.
pub fn integrate<const N: usize, F, O>(
    f: F,
    t0: f64,
    y0: [f64; N],
    tol: &Tolerances,
    mut observe: O,
) -> Result<()>
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
    O: FnMut(DenseSegment<N>) -> Result<bool>,
{
    let mut t = t0;
    let mut y = y0;
    let mut k1 = f(t, &y);
    let mut h = initial_step(&f, t, &y, &k1, tol);
    let mut last_rejected = false;

    for _ in 0..tol.max_steps {
        if h.abs() <= 10.0 * f64::EPSILON * t.abs().max(1.0) {
            return Err(Error::Integration {
                t,
                reason: format!("step size underflow (h = {h:e})"),
            });
        }
        let k2 = f(t + C2 * h, &stage(&y, h, &[(A21, &k1)]));
        let k3 = f(t + C3 * h, &stage(&y, h, &[(A31, &k1), (A32, &k2)]));
        let k4 = f(t + C4 * h, &stage(&y, h, &[(A41, &k1), (A43, &k3)]));
        let k5 = f(
            t + C5 * h,
            &stage(&y, h, &[(A51, &k1), (A53, &k3), (A54, &k4)]),
        );
        let k6 = f(
            t + C6 * h,
            &stage(&y, h, &[(A61, &k1), (A64, &k4), (A65, &k5)]),
        );
        let k7 = f(
            t + C7 * h,
            &stage(&y, h, &[(A71, &k1), (A74, &k4), (A75, &k5), (A76, &k6)]),
        );
        let k8 = f(
            t + C8 * h,
            &stage(
                &y,
                h,
                &[(A81, &k1), (A84, &k4), (A85, &k5), (A86, &k6), (A87, &k7)],
            ),
        );
        let k9 = f(
            t + C9 * h,
            &stage(
                &y,
                h,
                &[
                    (A91, &k1),
                    (A94, &k4),
                    (A95, &k5),
                    (A96, &k6),
                    (A97, &k7),
                    (A98, &k8),
                ],
            ),
        );
        let k10 = f(
            t + C10 * h,
            &stage(
                &y,
                h,
                &[
                    (A101, &k1),
                    (A104, &k4),
                    (A105, &k5),
                    (A106, &k6),
                    (A107, &k7),
                    (A108, &k8),
                    (A109, &k9),
                ],
            ),
        );
        let k11 = f(
            t + C11 * h,
            &stage(
                &y,
                h,
                &[
                    (A111, &k1),
                    (A114, &k4),
                    (A115, &k5),
                    (A116, &k6),
                    (A117, &k7),
                    (A118, &k8),
                    (A119, &k9),
                    (A1110, &k10),
                ],
            ),
        );
        let t_new = t + h;
        let y12 = stage(
            &y,
            h,
            &[
                (A121, &k1),
                (A124, &k4),
                (A125, &k5),
                (A126, &k6),
                (A127, &k7),
                (A128, &k8),
                (A129, &k9),
                (A1210, &k10),
                (A1211, &k11),
            ],
        );
        let k12 = f(t_new, &y12);
        let incr = combo(&[
            (B1, &k1),
            (B6, &k6),
            (B7, &k7),
            (B8, &k8),
            (B9, &k9),
            (B10, &k10),
            (B11, &k11),
            (B12, &k12),
        ]);
        let y_new = stage(&y, h, &[(1.0, &incr)]);

        let mut err = 0.0;
        let mut err2 = 0.0;
        for i in 0..N {
            let sk = tol.atol + tol.rtol * y[i].abs().max(y_new[i].abs());
            let e2 = incr[i] - BHH1 * k1[i] - BHH2 * k9[i] - BHH3 * k12[i];
            err2 += (e2 / sk).powi(2);
            let e = ER1 * k1[i]
                + ER6 * k6[i]
                + ER7 * k7[i]
                + ER8 * k8[i]
                + ER9 * k9[i]
                + ER10 * k10[i]
                + ER11 * k11[i]
                + ER12 * k12[i];
            err += (e / sk).powi(2);
        }
        let mut deno = err + 0.01 * err2;
        if deno <= 0.0 {
            deno = 1.0;
        }
        let err = h.abs() * err * (1.0 / (deno * N as f64)).sqrt();
        if !err.is_finite() {
            return Err(Error::Integration {
                t,
                reason: "non-finite error estimate".into(),
            });
        }

        let fac11 = err.powf(1.0 / 8.0);
        let fac = FACC2.max(FACC1.min(fac11 / SAFE));
        let mut h_new = h / fac;

        if err <= 1.0 {
            let k13 = f(t_new, &y_new);

            let ydiff: [f64; N] = std::array::from_fn(|i| y_new[i] - y[i]);
            let bspl: [f64; N] = std::array::from_fn(|i| h * k1[i] - ydiff[i]);
            let c4: [f64; N] = std::array::from_fn(|i| ydiff[i] - h * k13[i] - bspl[i]);
            let d_rows = [
                [
                    D41, D46, D47, D48, D49, D410, D411, D412, D413, D414, D415, D416,
                ],
                [
                    D51, D56, D57, D58, D59, D510, D511, D512, D513, D514, D515, D516,
                ],
                [
                    D61, D66, D67, D68, D69, D610, D611, D612, D613, D614, D615, D616,
                ],
                [
                    D71, D76, D77, D78, D79, D710, D711, D712, D713, D714, D715, D716,
                ],
            ];
            let k14 = f(
                t + C14 * h,
                &stage(
                    &y,
                    h,
                    &[
                        (A141, &k1),
                        (A147, &k7),
                        (A148, &k8),
                        (A149, &k9),
                        (A1410, &k10),
                        (A1411, &k11),
                        (A1412, &k12),
                        (A1413, &k13),
                    ],
                ),
            );
            let k15 = f(
                t + C15 * h,
                &stage(
                    &y,
                    h,
                    &[
                        (A151, &k1),
                        (A156, &k6),
                        (A157, &k7),
                        (A158, &k8),
                        (A1511, &k11),
                        (A1512, &k12),
                        (A1513, &k13),
                        (A1514, &k14),
                    ],
                ),
            );
            let k16 = f(
                t + C16 * h,
                &stage(
                    &y,
                    h,
                    &[
                        (A161, &k1),
                        (A166, &k6),
                        (A167, &k7),
                        (A168, &k8),
                        (A169, &k9),
                        (A1613, &k13),
                        (A1614, &k14),
                        (A1615, &k15),
                    ],
                ),
            );
            let ks = [
                &k1, &k6, &k7, &k8, &k9, &k10, &k11, &k12, &k13, &k14, &k15, &k16,
            ];
            let mut cont = [[0.0; N]; 8];
            cont[0] = y;
            cont[1] = ydiff;
            cont[2] = bspl;
            cont[3] = c4;
            for (row, d) in d_rows.iter().enumerate() {
                cont[4 + row] = std::array::from_fn(|i| {
                    h * d.iter().zip(ks).map(|(dj, k)| dj * k[i]).sum::<f64>()
                });
            }

            let segment = DenseSegment {
                t0: t,
                h,
                y0: y,
                y1: y_new,
                cont,
            };
            k1 = k13;
            y = y_new;
            t = t_new;
            if y.iter().any(|v| !v.is_finite()) {
                return Err(Error::Integration {
                    t,
                    reason: "non-finite state".into(),
                });
            }
            if last_rejected {
                h_new = h_new.abs().min(h.abs()).copysign(h);
            }
            last_rejected = false;
            if !observe(segment)? {
                return Ok(());
            }
        } else {
            h_new = h / FACC1.min(fac11 / SAFE);
            last_rejected = true;
        }
        h = h_new;
    }
    Err(Error::Integration {
        t,
        reason: format!("more than {} steps", tol.max_steps),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tol(rtol: f64) -> Tolerances {
        Tolerances {
            rtol,
            atol: rtol * 1e-2,
            max_steps: 100_000,
        }
    }

    #[test]
    fn harmonic_oscillator() {
        // y'' = -y over one period
        let two_pi = 2.0 * std::f64::consts::PI;
        let mut last = None;
        let mut max_dense_err: f64 = 0.0;
        integrate(
            |_t, y: &[f64; 2]| [y[1], -y[0]],
            0.0,
            [1.0, 0.0],
            &tol(1e-12),
            |seg| {
                let tm = seg.t0 + 0.37 * seg.h;
                max_dense_err = max_dense_err.max((seg.eval(tm)[0] - tm.cos()).abs());
                let done = seg.t1() >= two_pi;
                last = Some(seg);
                Ok(!done)
            },
        )
        .unwrap();
        let seg = last.unwrap();
        let y = seg.eval(two_pi);
        assert!((y[0] - 1.0).abs() < 1e-11 && y[1].abs() < 1e-11, "{y:?}");
        assert!(max_dense_err < 1e-11, "{max_dense_err}");
    }

    #[test]
    fn dense_output_matches_endpoints() {
        integrate(
            |_t, y: &[f64; 1]| [-2.0 * y[0]],
            0.0,
            [1.0],
            &tol(1e-10),
            |seg| {
                assert!((seg.eval(seg.t0)[0] - seg.y0[0]).abs() < 1e-15);
                assert!((seg.eval(seg.t1())[0] - seg.y1[0]).abs() < 1e-14);
                Ok(seg.t1() < 1.0)
            },
        )
        .unwrap();
    }

    #[test]
    fn step_limit() {
        let t = Tolerances {
            max_steps: 3,
            ..tol(1e-12)
        };
        let err = integrate(|_t, y: &[f64; 1]| [y[0]], 0.0, [1.0], &t, |_| Ok(true)).unwrap_err();
        assert!(matches!(err, Error::Integration { .. }));
    }
}
