//! Explicit adaptive Dormand–Prince 5(4) integrator for small real systems.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct StepControl {
    /// Relative and absolute error tolerance per component.
    pub tol: f64,
    /// Upper bound on the internal step.
    pub max_step: f64,
    /// Hard limit on accepted + rejected steps over one call.
    pub max_steps: usize,
}

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
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// fifth minus fourth order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Integrates `y' = f(t, y)` from `t0` through every time in `t_out`
/// (ascending, all ≥ `t0`) and returns the state at each of them.
///
/// `after_step` runs on every accepted step and may project the state
/// (e.g. re-symmetrize a covariance block).
pub fn dopri5<F, P>(
    mut f: F,
    mut after_step: P,
    t0: f64,
    y0: &[f64],
    t_out: &[f64],
    ctl: &StepControl,
) -> Result<Vec<Vec<f64>>>
where
    F: FnMut(f64, &[f64], &mut [f64]),
    P: FnMut(f64, &mut [f64]),
{
    let n = y0.len();
    let mut y = y0.to_vec();
    let mut t = t0;
    let mut k: Vec<Vec<f64>> = vec![vec![0.0; n]; 7];
    let mut ytmp = vec![0.0; n];
    let mut ynew = vec![0.0; n];
    let mut out = Vec::with_capacity(t_out.len());
    let mut h = ctl.max_step.min(1e-2);
    let mut steps = 0usize;

    f(t, &y, &mut k[0]);
    for &target in t_out {
        if target < t {
            return Err(Error::Integration {
                t,
                reason: format!("output time {target} precedes current time"),
            });
        }
        while t < target {
            steps += 1;
            if steps > ctl.max_steps {
                return Err(Error::Integration {
                    t,
                    reason: "step budget exhausted".into(),
                });
            }
            let remaining = target - t;
            let last = h >= remaining;
            let h_step = if last { remaining } else { h };
            stages(&mut f, t, &y, h_step, &mut k, &mut ytmp, &mut ynew);
            let mut acc = 0.0;
            for i in 0..n {
                let err = h_step
                    * (E1 * k[0][i]
                        + E3 * k[2][i]
                        + E4 * k[3][i]
                        + E5 * k[4][i]
                        + E6 * k[5][i]
                        + E7 * k[6][i]);
                let sc = ctl.tol + ctl.tol * y[i].abs().max(ynew[i].abs());
                acc += (err / sc) * (err / sc);
            }
            let err = (acc / n as f64).sqrt();
            if !err.is_finite() {
                return Err(Error::Integration {
                    t,
                    reason: "non-finite error estimate".into(),
                });
            }
            if err <= 1.0 {
                t = if last { target } else { t + h_step };
                std::mem::swap(&mut y, &mut ynew);
                after_step(t, &mut y);
                // re-evaluate: after_step may have projected the state
                f(t, &y, &mut k[0]);
                let fac = if err == 0.0 {
                    5.0
                } else {
                    (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
                };
                if !last {
                    h = (h * fac).min(ctl.max_step);
                }
            } else {
                h = h_step * (0.9 * err.powf(-0.2)).clamp(0.1, 1.0);
                if h < 1e-14 * t.abs().max(1.0) {
                    return Err(Error::Integration {
                        t,
                        reason: "step size underflow".into(),
                    });
                }
            }
        }
        out.push(y.clone());
    }
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn stages<F>(
    f: &mut F,
    t: f64,
    y: &[f64],
    h: f64,
    k: &mut [Vec<f64>],
    ytmp: &mut [f64],
    ynew: &mut [f64],
) where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    let n = y.len();
    for i in 0..n {
        ytmp[i] = y[i] + h * A21 * k[0][i];
    }
    f(t + C2 * h, ytmp, &mut k[1]);
    for i in 0..n {
        ytmp[i] = y[i] + h * (A31 * k[0][i] + A32 * k[1][i]);
    }
    f(t + C3 * h, ytmp, &mut k[2]);
    for i in 0..n {
        ytmp[i] = y[i] + h * (A41 * k[0][i] + A42 * k[1][i] + A43 * k[2][i]);
    }
    f(t + C4 * h, ytmp, &mut k[3]);
    for i in 0..n {
        ytmp[i] = y[i] + h * (A51 * k[0][i] + A52 * k[1][i] + A53 * k[2][i] + A54 * k[3][i]);
    }
    f(t + C5 * h, ytmp, &mut k[4]);
    for i in 0..n {
        ytmp[i] = y[i]
            + h * (A61 * k[0][i] + A62 * k[1][i] + A63 * k[2][i] + A64 * k[3][i] + A65 * k[4][i]);
    }
    f(t + h, ytmp, &mut k[5]);
    for i in 0..n {
        ynew[i] =
            y[i] + h * (B1 * k[0][i] + B3 * k[2][i] + B4 * k[3][i] + B5 * k[4][i] + B6 * k[5][i]);
    }
    f(t + h, ynew, &mut k[6]);
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator_phase() {
        let ctl = StepControl {
            tol: 1e-11,
            max_step: 0.1,
            max_steps: 1_000_000,
        };
        let times: Vec<f64> = (1..=10).map(|k| k as f64).collect();
        let ys = dopri5(
            |_, y, dy| {
                dy[0] = y[1];
                dy[1] = -y[0];
            },
            |_, _| {},
            0.0,
            &[1.0, 0.0],
            &times,
            &ctl,
        )
        .unwrap();
        for (t, y) in times.iter().zip(&ys) {
            assert!((y[0] - t.cos()).abs() < 1e-9);
            assert!((y[1] + t.sin()).abs() < 1e-9);
        }
    }

    #[test]
    fn exponential_decay_with_repeated_output_time() {
        let ctl = StepControl {
            tol: 1e-10,
            max_step: 1.0,
            max_steps: 100_000,
        };
        let ys = dopri5(
            |_, y, dy| dy[0] = -2.0 * y[0],
            |_, _| {},
            0.0,
            &[1.0],
            &[0.0, 1.0, 1.0],
            &ctl,
        )
        .unwrap();
        assert_eq!(ys[0][0], 1.0);
        assert!((ys[1][0] - (-2.0f64).exp()).abs() < 1e-9);
        assert_eq!(ys[1], ys[2]);
    }

    #[test]
    fn rejects_time_going_backwards() {
        let ctl = StepControl {
            tol: 1e-8,
            max_step: 1.0,
            max_steps: 100,
        };
        let r = dopri5(|_, _, dy| dy[0] = 0.0, |_, _| {}, 1.0, &[0.0], &[0.5], &ctl);
        assert!(r.is_err());
    }
}
