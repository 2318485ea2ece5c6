//! Adaptive Dormand–Prince 5(4) integrator for a two-component complex state.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

pub type Spinor = [C64; 2];

#[derive(Clone, Copy, Debug)]
pub struct Tolerances {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            rtol: 1e-12,
            atol: 1e-14,
            max_steps: 2_000_000,
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct Solution {
    pub state: Spinor,
    pub steps: usize,
    pub rejected: usize,
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

/// Integrates dy/dt = f(t, y) from `t0` to `t1`.
pub fn integrate<F>(f: F, t0: f64, t1: f64, y0: Spinor, tol: &Tolerances) -> Result<Solution>
where
    F: Fn(f64, &Spinor) -> Spinor,
{
    let span = t1 - t0;
    if !(span.is_finite() && span > 0.0) {
        return Err(Error::Integrator {
            t: t0,
            step: 0.0,
            steps: 0,
            reason: format!("invalid interval [{t0}, {t1}]"),
        });
    }
    let mut t = t0;
    let mut y = y0;
    let mut h = span * 1e-3;
    let h_min = span * 1e-14;
    let mut steps = 0;
    let mut rejected = 0;
    let mut k = [[C64::new(0.0, 0.0); 2]; 7];
    k[0] = f(t, &y);
    while t < t1 {
        if steps + rejected >= tol.max_steps {
            return Err(Error::Integrator {
                t,
                step: h,
                steps,
                reason: format!("step budget of {} exhausted", tol.max_steps),
            });
        }
        let last = t + h >= t1;
        if last {
            h = t1 - t;
        }
        for s in 1..7 {
            let mut ys = y;
            for (j, kj) in k.iter().enumerate().take(s) {
                let a = A[s][j];
                if a != 0.0 {
                    ys[0] += kj[0] * (h * a);
                    ys[1] += kj[1] * (h * a);
                }
            }
            k[s] = f(t + C[s] * h, &ys);
        }
        let mut y5 = y;
        let mut err = [C64::new(0.0, 0.0); 2];
        for s in 0..7 {
            for c in 0..2 {
                y5[c] += k[s][c] * (h * B5[s]);
                err[c] += k[s][c] * (h * (B5[s] - B4[s]));
            }
        }
        let mut norm: f64 = 0.0;
        for c in 0..2 {
            let scale = tol.atol + tol.rtol * y[c].norm().max(y5[c].norm());
            norm = norm.max(err[c].norm() / scale);
        }
        if !norm.is_finite() {
            return Err(Error::Integrator {
                t,
                step: h,
                steps,
                reason: "non-finite error estimate".into(),
            });
        }
        if norm <= 1.0 {
            t = if last { t1 } else { t + h };
            y = y5;
            // first-same-as-last: stage 7 is f at the accepted point
            k[0] = k[6];
            steps += 1;
        } else {
            rejected += 1;
        }
        let factor = if norm == 0.0 { 5.0 } else { (0.9 * norm.powf(-0.2)).clamp(0.2, 5.0) };
        h *= factor;
        if h < h_min && t < t1 {
            return Err(Error::Integrator {
                t,
                step: h,
                steps,
                reason: "step size underflow".into(),
            });
        }
    }
    Ok(Solution { state: y, steps, rejected })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_rotation_matches_closed_form() {
        // i dy/dt = (Ω/2)σ_x y, resonant Rabi flop
        let omega = 3.0;
        let f = |_t: f64, y: &Spinor| {
            let mi = C64::new(0.0, -0.5 * omega);
            [mi * y[1], mi * y[0]]
        };
        let t1 = 1.7;
        let sol = integrate(f, 0.0, t1, [C64::new(1.0, 0.0), C64::new(0.0, 0.0)], &Tolerances::default())
            .unwrap();
        let p = sol.state[1].norm_sqr();
        assert!((p - (0.5 * omega * t1).sin().powi(2)).abs() < 1e-10);
    }

    #[test]
    fn bad_interval_is_reported() {
        let f = |_t: f64, y: &Spinor| *y;
        let e = integrate(f, 1.0, 0.0, [C64::new(1.0, 0.0); 2], &Tolerances::default());
        assert!(matches!(e, Err(Error::Integrator { .. })));
    }
}
