//! Dormand–Prince 5(4) integrator with continuous (dense) output.
//!
//! Steps are chosen only by the error controller; sampling reads the dense
//! interpolant, so the step sequence does not depend on the sampling grid.

use thiserror::Error;

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OdeError {
    #[error("step size underflow at t = {t} (h = {h:e})")]
    StepSizeUnderflow { t: f64, h: f64 },
    #[error("non-finite state at t = {t}")]
    NonFinite { t: f64 },
    #[error("step budget of {max_steps} exhausted at t = {t}")]
    TooManySteps { t: f64, max_steps: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-12,
            max_steps: 50_000_000,
        }
    }
}

/// Integrates `f` from `(t0, y0)` to `t_end`, calling `sample(t, y)` at
/// every `t0 + k dt <= t_end`.
///
/// On failure the samples already emitted stand; the error reports where the
/// controller gave up.
pub fn integrate_sampled<const N: usize, F, S>(
    mut f: F,
    t0: f64,
    y0: [f64; N],
    t_end: f64,
    dt: f64,
    tol: &Tolerances,
    mut sample: S,
) -> Result<[f64; N], OdeError>
where
    F: FnMut(f64, &[f64; N]) -> [f64; N],
    S: FnMut(f64, &[f64; N]),
{
    let mut t = t0;
    let mut y = y0;
    let mut k1 = f(t, &y);
    let mut h = initial_step(&mut f, t, &y, &k1, tol);
    let mut next_index: u64 = 0;
    let sample_time = |k: u64| t0 + k as f64 * dt;

    sample(t, &y);
    next_index += 1;

    let mut steps = 0usize;
    while t < t_end {
        if steps >= tol.max_steps {
            return Err(OdeError::TooManySteps {
                t,
                max_steps: tol.max_steps,
            });
        }
        let last = h >= t_end - t;
        if last {
            h = t_end - t;
            if h <= 1e-14 * t.abs().max(1.0) {
                break;
            }
        }
        if h <= 1e-14 * t.abs().max(1.0) {
            return Err(OdeError::StepSizeUnderflow { t, h });
        }
        let stage = |y: &[f64; N], ks: &[(&[f64; N], f64)]| -> [f64; N] {
            std::array::from_fn(|i| y[i] + h * ks.iter().map(|(k, a)| a * k[i]).sum::<f64>())
        };
        let k2 = f(t + C2 * h, &stage(&y, &[(&k1, A21)]));
        let k3 = f(t + C3 * h, &stage(&y, &[(&k1, A31), (&k2, A32)]));
        let k4 = f(
            t + C4 * h,
            &stage(&y, &[(&k1, A41), (&k2, A42), (&k3, A43)]),
        );
        let k5 = f(
            t + C5 * h,
            &stage(&y, &[(&k1, A51), (&k2, A52), (&k3, A53), (&k4, A54)]),
        );
        let k6 = f(
            t + h,
            &stage(
                &y,
                &[(&k1, A61), (&k2, A62), (&k3, A63), (&k4, A64), (&k5, A65)],
            ),
        );
        let y_new = stage(
            &y,
            &[(&k1, A71), (&k3, A73), (&k4, A74), (&k5, A75), (&k6, A76)],
        );
        let k7 = f(t + h, &y_new);
        steps += 1;

        let mut err = 0.0;
        for i in 0..N {
            let e =
                h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let sk = tol.atol + tol.rtol * y[i].abs().max(y_new[i].abs());
            err += (e / sk) * (e / sk);
        }
        let err = (err / N as f64).sqrt();
        if !err.is_finite() || y_new.iter().any(|v| !v.is_finite()) {
            if h <= 1e-14 * t.abs().max(1.0) {
                return Err(OdeError::NonFinite { t });
            }
            h *= 0.1;
            continue;
        }
        if err <= 1.0 {
            let t_new = if last { t_end } else { t + h };
            // dense output coefficients
            let rc: [[f64; N]; 5] = {
                let mut rc = [[0.0; N]; 5];
                for i in 0..N {
                    let ydiff = y_new[i] - y[i];
                    let bspl = h * k1[i] - ydiff;
                    rc[0][i] = y[i];
                    rc[1][i] = ydiff;
                    rc[2][i] = bspl;
                    rc[3][i] = ydiff - h * k7[i] - bspl;
                    rc[4][i] = h
                        * (D1 * k1[i]
                            + D3 * k3[i]
                            + D4 * k4[i]
                            + D5 * k5[i]
                            + D6 * k6[i]
                            + D7 * k7[i]);
                }
                rc
            };
            loop {
                let ts = sample_time(next_index);
                if ts > t_new || ts > t_end {
                    break;
                }
                let theta = (ts - t) / h;
                let theta1 = 1.0 - theta;
                let ys: [f64; N] = std::array::from_fn(|i| {
                    rc[0][i]
                        + theta
                            * (rc[1][i]
                                + theta1 * (rc[2][i] + theta * (rc[3][i] + theta1 * rc[4][i])))
                });
                sample(ts, &ys);
                next_index += 1;
            }
            t = t_new;
            y = y_new;
            k1 = k7;
            let fac = if err == 0.0 {
                5.0
            } else {
                (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
            };
            h *= fac;
        } else {
            h *= (0.9 * err.powf(-0.2)).clamp(0.2, 1.0);
        }
    }
    Ok(y)
}

fn initial_step<const N: usize, F>(
    f: &mut F,
    t: f64,
    y: &[f64; N],
    k1: &[f64; N],
    tol: &Tolerances,
) -> f64
where
    F: FnMut(f64, &[f64; N]) -> [f64; N],
{
    let norm = |v: &[f64; N]| {
        (v.iter()
            .zip(y)
            .map(|(a, b)| {
                let sk = tol.atol + tol.rtol * b.abs();
                (a / sk) * (a / sk)
            })
            .sum::<f64>()
            / N as f64)
            .sqrt()
    };
    let d0 = norm(y);
    let d1 = norm(k1);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 {
        1e-6
    } else {
        0.01 * d0 / d1
    };
    let y1: [f64; N] = std::array::from_fn(|i| y[i] + h0 * k1[i]);
    let k2 = f(t + h0, &y1);
    let diff: [f64; N] = std::array::from_fn(|i| k2[i] - k1[i]);
    let d2 = norm(&diff) / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(0.2)
    };
    (100.0 * h0).min(h1)
}
