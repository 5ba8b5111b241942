//! Adaptive Dormand–Prince 5(4) integration of an autonomous scalar ODE with
//! a termination predicate.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub h_init: f64,
    pub h_max: f64,
    pub max_steps: usize,
}

const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Integrates `y' = f(y)` from `(t0, y0)` with step direction `sign(h_init)`
/// until `stop(t, y)` holds. Returns every accepted `(t, y)` including the
/// start point.
pub fn integrate<F, S>(f: F, t0: f64, y0: f64, opts: OdeOptions, mut stop: S) -> Result<Vec<(f64, f64)>>
where
    F: Fn(f64) -> f64,
    S: FnMut(f64, f64) -> bool,
{
    let dir = opts.h_init.signum();
    let mut h = opts.h_init.abs().min(opts.h_max);
    let mut t = t0;
    let mut y = y0;
    let mut out = vec![(t, y)];
    let mut k = [0.0f64; 7];
    k[0] = f(y);
    for _ in 0..opts.max_steps {
        if stop(t, y) {
            return Ok(out);
        }
        let hs = dir * h;
        for s in 1..7 {
            let mut acc = y;
            for (j, kj) in k.iter().enumerate().take(s) {
                acc += hs * A[s][j] * kj;
            }
            k[s] = f(acc);
        }
        let mut y5 = y;
        let mut y4 = y;
        for s in 0..7 {
            y5 += hs * B5[s] * k[s];
            y4 += hs * B4[s] * k[s];
        }
        let scale = opts.atol + opts.rtol * y.abs().max(y5.abs());
        let err = ((y5 - y4) / scale).abs();
        if !err.is_finite() {
            h *= 0.25;
            if h < 1e-14 {
                return Err(Error::Numeric("profile ODE produced a non-finite value".into()));
            }
            continue;
        }
        if err <= 1.0 {
            t += hs;
            y = y5;
            out.push((t, y));
            // FSAL: the last stage is f(y_{n+1}).
            k[0] = k[6];
        }
        let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        h = (h * factor).min(opts.h_max);
        if h < 1e-14 {
            return Err(Error::Numeric("profile ODE step size underflow".into()));
        }
    }
    Err(Error::Numeric(format!(
        "profile ODE did not terminate within {} steps",
        opts.max_steps
    )))
}
