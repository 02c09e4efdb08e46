//! Adaptive Dormand–Prince 5(4) integration for small real systems.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions { rtol: 1e-12, atol: 1e-14, max_steps: 2_000_000 }
    }
}

const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Integrates y′ = f(t, y) from t0 to t1 (either direction).
pub fn integrate<const N: usize, F>(f: F, t0: f64, y0: [f64; N], t1: f64, opts: OdeOptions) -> Result<[f64; N]>
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    let span = t1 - t0;
    if span == 0.0 {
        return Ok(y0);
    }
    let dir = span.signum();
    let mut t = t0;
    let mut y = y0;
    let mut h = dir * span.abs().min(1.0) * 1e-3;
    let mut k = [[0.0; N]; 7];
    k[0] = f(t, &y);
    for _ in 0..opts.max_steps {
        if (t1 - t) * dir <= 0.0 {
            return Ok(y);
        }
        if (t + h - t1) * dir > 0.0 {
            h = t1 - t;
        }
        for s in 1..7 {
            let mut ys = y;
            for (i, v) in ys.iter_mut().enumerate() {
                let mut acc = 0.0;
                for (j, kj) in k.iter().enumerate().take(s) {
                    acc += A[s][j] * kj[i];
                }
                *v += h * acc;
            }
            k[s] = f(t + C[s] * h, &ys);
        }
        let mut ynew = y;
        for (i, v) in ynew.iter_mut().enumerate() {
            let mut acc = 0.0;
            for (j, kj) in k.iter().enumerate().take(6) {
                acc += A[6][j] * kj[i];
            }
            *v += h * acc;
        }
        let mut err = 0.0;
        for i in 0..N {
            let mut e = 0.0;
            for (j, kj) in k.iter().enumerate() {
                e += E[j] * kj[i];
            }
            let sc = opts.atol + opts.rtol * y[i].abs().max(ynew[i].abs());
            err += (h * e / sc).powi(2);
        }
        let err = (err / N as f64).sqrt();
        if !err.is_finite() {
            h *= 0.2;
            continue;
        }
        if err <= 1.0 {
            t += h;
            y = ynew;
            k[0] = k[6];
        }
        let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        h *= factor;
        if h.abs() < 1e-14 * t.abs().max(1.0) {
            return Err(Error::precision(format!("step size underflow at t = {t}"), err));
        }
    }
    Err(Error::precision(format!("step budget exhausted before t = {t1}"), f64::INFINITY))
}
