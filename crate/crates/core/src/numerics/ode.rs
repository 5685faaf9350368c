//! Dormand–Prince 5(4) integrator for small first-order systems.

use crate::error::{Error, Result};

/// Accepted steps of an integration: abscissae, states and derivatives.
#[derive(Debug, Clone, Default)]
pub struct Trajectory<const D: usize> {
    pub t: Vec<f64>,
    pub y: Vec<[f64; D]>,
    pub dy: Vec<[f64; D]>,
}

#[derive(Debug, Clone, Copy)]
pub struct StepControl {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step: f64,
    pub max_steps: usize,
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

/// Integrates `y' = f(t, y)` from `t0` to `t1`, appending accepted steps to `traj`.
/// The starting point is appended only when `traj` is empty.
pub fn dopri5<const D: usize, F>(
    f: &F,
    t0: f64,
    t1: f64,
    y0: [f64; D],
    ctl: StepControl,
    traj: &mut Trajectory<D>,
) -> Result<[f64; D]>
where
    F: Fn(f64, &[f64; D]) -> [f64; D],
{
    let mut t = t0;
    let mut y = y0;
    let mut k1 = f(t, &y);
    if traj.t.is_empty() {
        traj.t.push(t);
        traj.y.push(y);
        traj.dy.push(k1);
    }
    let span = t1 - t0;
    if span <= 0.0 {
        return Ok(y);
    }
    let mut h = (span / 100.0).min(ctl.max_step);
    let mut steps = 0usize;
    while t < t1 {
        if steps >= ctl.max_steps {
            return Err(Error::ToleranceNotMet {
                achieved: h,
                requested: ctl.rel_tol,
                context: format!("ODE step budget exhausted at t = {t:.6e}"),
            });
        }
        steps += 1;
        let last = t + h >= t1;
        if last {
            h = t1 - t;
        }
        let mut k = [[0.0; D]; 7];
        k[0] = k1;
        for s in 1..7 {
            let mut ys = y;
            for (j, kj) in k.iter().enumerate().take(s) {
                let a = A[s][j];
                if a != 0.0 {
                    for d in 0..D {
                        ys[d] += h * a * kj[d];
                    }
                }
            }
            k[s] = f(t + C[s] * h, &ys);
        }
        let mut y5 = y;
        let mut err = 0.0f64;
        for d in 0..D {
            let mut s5 = 0.0;
            let mut s4 = 0.0;
            for s in 0..7 {
                s5 += B5[s] * k[s][d];
                s4 += B4[s] * k[s][d];
            }
            y5[d] += h * s5;
            let scale = ctl.abs_tol + ctl.rel_tol * y[d].abs().max(y5[d].abs());
            err = err.max((h * (s5 - s4)).abs() / scale);
        }
        if err <= 1.0 || h < 1e-14 * t.abs().max(1.0) {
            t = if last { t1 } else { t + h };
            y = y5;
            k1 = k[6];
            traj.t.push(t);
            traj.y.push(y);
            traj.dy.push(k1);
        }
        let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        h = (h * factor).min(ctl.max_step);
    }
    Ok(y)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator() {
        let f = |_t: f64, y: &[f64; 2]| [y[1], -y[0]];
        let ctl = StepControl { rel_tol: 1e-11, abs_tol: 1e-13, max_step: 0.1, max_steps: 100_000 };
        let mut traj = Trajectory::default();
        let y = dopri5(&f, 0.0, 10.0, [0.0, 1.0], ctl, &mut traj).unwrap();
        assert!((y[0] - 10f64.sin()).abs() < 1e-9);
        assert!((y[1] - 10f64.cos()).abs() < 1e-9);
        assert_eq!(*traj.t.last().unwrap(), 10.0);
    }
}
