//! Adaptive Dormand-Prince 5(4) integrator for small non-stiff systems.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeTol {
    pub abs: f64,
    pub rel: f64,
}

impl Default for OdeTol {
    fn default() -> Self {
        OdeTol {
            abs: 1e-12,
            rel: 1e-10,
        }
    }
}

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
/// Fifth-order minus embedded fourth-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Integrates `y' = f(t, y)` from `(t0, y0)` and returns the state at each
/// of the non-decreasing `times`, all of which must be `>= t0`.
pub fn integrate<const N: usize, F>(
    f: F,
    t0: f64,
    y0: [f64; N],
    times: &[f64],
    tol: OdeTol,
) -> Result<Vec<[f64; N]>>
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    if times.iter().any(|&t| !t.is_finite() || t < t0) || times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidParams(
            "output times must be finite, non-decreasing and not before t0".into(),
        ));
    }
    let mut out = Vec::with_capacity(times.len());
    let mut t = t0;
    let mut y = y0;
    let mut k0 = f(t, &y);
    let span = times.last().map_or(0.0, |&e| e - t0);
    let mut h = (1e-3 * span).max(1e-6);
    for &target in times {
        while t < target {
            let remaining = target - t;
            let last = h >= remaining;
            let step = if last { remaining } else { h };
            if step < 1e-14 * t.abs().max(1.0) && !last {
                return Err(Error::IntegratorFailure(format!("step size underflow at t = {t}")));
            }
            let mut k = [[0.0; N]; 7];
            k[0] = k0;
            for s in 1..7 {
                let mut ys = y;
                for (i, v) in ys.iter_mut().enumerate() {
                    *v += step * (0..s).map(|j| A[s][j] * k[j][i]).sum::<f64>();
                }
                k[s] = f(t + C[s] * step, &ys);
            }
            // The last stage is evaluated at the fifth-order solution.
            let mut y_new = y;
            for (i, v) in y_new.iter_mut().enumerate() {
                *v += step * (0..6).map(|j| A[6][j] * k[j][i]).sum::<f64>();
            }
            let err = (0..N)
                .map(|i| {
                    let e = step * (0..7).map(|j| E[j] * k[j][i]).sum::<f64>();
                    e.abs() / (tol.abs + tol.rel * y[i].abs().max(y_new[i].abs()))
                })
                .fold(0.0, f64::max);
            if !err.is_finite() {
                return Err(Error::IntegratorFailure(format!("non-finite state at t = {t}")));
            }
            if err <= 1.0 {
                t = if last { target } else { t + step };
                y = y_new;
                k0 = k[6];
            }
            let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            if err <= 1.0 && last {
                // Keep the free-running step; the shortened one says nothing.
                h = h.max(step * factor);
            } else {
                h = step * factor;
            }
            if h < 1e-14 * t.abs().max(1.0) {
                return Err(Error::IntegratorFailure(format!("step size underflow at t = {t}")));
            }
        }
        out.push(y);
    }
    Ok(out)
}
