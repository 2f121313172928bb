//! Adaptive Dormand-Prince 5(4) integrator for second-order scalar ODEs
//! written as planar systems, with sign-change counting of the first
//! component.

use crate::error::{GapError, Result};

pub type State = [f64; 2];

/// Step-size controller settings.
#[derive(Debug, Clone, Copy)]
pub struct Dopri {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl Default for Dopri {
    fn default() -> Self {
        Self { rtol: 1e-12, atol: 1e-14, max_steps: 1_000_000 }
    }
}

/// Result of integrating through a list of output abscissae.
#[derive(Debug, Clone)]
pub struct Trajectory {
    /// State at each requested stop, in order.
    pub states: Vec<State>,
    /// Sign changes of the first component over the whole run.
    pub zeros: usize,
    pub steps: usize,
}

impl Trajectory {
    pub fn end(&self) -> State {
        *self.states.last().expect("trajectory has at least one stop")
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
// Fifth-order weights equal the last row of A (FSAL); these are the differences to the embedded fourth-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

impl Dopri {
    pub fn with_rtol(rtol: f64) -> Self {
        Self { rtol, atol: rtol * 1e-2, ..Self::default() }
    }

    /// Integrates `y' = rhs(s, y)` from `(s0, y0)` through the increasing
    /// abscissae `stops`, landing exactly on each of them.
    pub fn integrate<F>(&self, rhs: F, s0: f64, y0: State, stops: &[f64]) -> Result<Trajectory>
    where
        F: Fn(f64, &State) -> State,
    {
        let mut s = s0;
        let mut y = y0;
        let mut states = Vec::with_capacity(stops.len());
        let mut zeros = 0usize;
        let mut last_sign = sign(y[0]);
        let mut steps = 0usize;

        let target = *stops.last().unwrap_or(&s0);
        let mut k1 = rhs(s, &y);
        let mut h = initial_step(&rhs, s, &y, &k1, self, target - s0);
        let mut prev_err: f64 = 1e-4;

        for &stop in stops {
            if stop < s {
                return Err(GapError::Precondition(format!("stops must be increasing, got {stop} after {s}")));
            }
            while s < stop {
                if steps >= self.max_steps {
                    return Err(GapError::Convergence {
                        method: "Dormand-Prince",
                        detail: format!("step budget {} exhausted at s = {s}", self.max_steps),
                    });
                }
                let last = s + h >= stop;
                let hs = if last { stop - s } else { h };
                if hs <= 1e-14 * s.abs().max(1e-300) && !last {
                    return Err(GapError::StepUnderflow { at: s, target });
                }

                let mut k = [[0.0; 2]; 7];
                k[0] = k1;
                for i in 1..7 {
                    let mut yi = y;
                    for (j, kj) in k.iter().enumerate().take(i) {
                        let a = A[i][j];
                        if a != 0.0 {
                            yi[0] += hs * a * kj[0];
                            yi[1] += hs * a * kj[1];
                        }
                    }
                    let si = if i >= 5 { s + hs } else { s + C[i] * hs };
                    if i == 6 {
                        // The seventh stage is evaluated at the candidate solution.
                        k[6] = rhs(si, &yi);
                        let err = error_norm(&k, hs, &y, &yi, self);
                        if !err.is_finite() || err > 1.0 {
                            let fac = if err.is_finite() { (0.9 * err.powf(-0.2)).max(0.2) } else { 0.2 };
                            h = hs * fac;
                            if h <= 1e-14 * s.abs().max(1e-300) {
                                return Err(GapError::StepUnderflow { at: s, target });
                            }
                            break;
                        }
                        s = if last { stop } else { s + hs };
                        y = yi;
                        k1 = k[6];
                        steps += 1;
                        let sg = sign(y[0]);
                        if sg != 0 {
                            if last_sign != 0 && sg != last_sign {
                                zeros += 1;
                            }
                            last_sign = sg;
                        }
                        // PI controller (Gustafsson) on the accepted step.
                        let err = err.max(1e-10);
                        let fac = 0.9 * err.powf(-0.7 / 5.0) * prev_err.powf(0.4 / 5.0);
                        prev_err = err;
                        let grown = hs * fac.clamp(0.2, 5.0);
                        // Keep the untruncated step when we only shortened it to land on a stop.
                        h = if last { grown.max(h) } else { grown };
                    } else {
                        k[i] = rhs(si, &yi);
                    }
                }
            }
            states.push(y);
        }
        Ok(Trajectory { states, zeros, steps })
    }
}

fn sign(x: f64) -> i8 {
    if x > 0.0 {
        1
    } else if x < 0.0 {
        -1
    } else {
        0
    }
}

fn error_norm(k: &[[f64; 2]; 7], h: f64, y: &State, ynew: &State, c: &Dopri) -> f64 {
    let mut acc = 0.0;
    for comp in 0..2 {
        let e: f64 = (0..7).map(|i| E[i] * k[i][comp]).sum::<f64>() * h;
        let sc = c.atol + c.rtol * y[comp].abs().max(ynew[comp].abs());
        acc += (e / sc).powi(2);
    }
    (acc / 2.0).sqrt()
}

fn initial_step<F>(rhs: &F, s: f64, y: &State, f0: &State, c: &Dopri, span: f64) -> f64
where
    F: Fn(f64, &State) -> State,
{
    let scale = |i: usize| c.atol + c.rtol * y[i].abs();
    let d0 = ((y[0] / scale(0)).powi(2) + (y[1] / scale(1)).powi(2)).sqrt() / 2f64.sqrt();
    let d1 = ((f0[0] / scale(0)).powi(2) + (f0[1] / scale(1)).powi(2)).sqrt() / 2f64.sqrt();
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    let h0 = h0.min(span.abs().max(f64::MIN_POSITIVE));
    let y1 = [y[0] + h0 * f0[0], y[1] + h0 * f0[1]];
    let f1 = rhs(s + h0, &y1);
    let d2 = (((f1[0] - f0[0]) / scale(0)).powi(2) + ((f1[1] - f0[1]) / scale(1)).powi(2)).sqrt()
        / 2f64.sqrt()
        / h0;
    let h1 = if d1.max(d2) <= 1e-15 { (h0 * 1e-3).max(1e-6) } else { (0.01 / d1.max(d2)).powf(0.2) };
    (100.0 * h0).min(h1).min(span.abs().max(f64::MIN_POSITIVE))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator() {
        let w = 3.0;
        let rhs = |_s: f64, y: &State| [y[1], -w * w * y[0]];
        let stops: Vec<f64> = (1..=10).map(|i| i as f64 * 0.5).collect();
        let tr = Dopri::default().integrate(rhs, 0.0, [1.0, 0.0], &stops).unwrap();
        for (s, st) in stops.iter().zip(&tr.states) {
            assert!((st[0] - (w * s).cos()).abs() < 1e-10, "{s}");
            assert!((st[1] + w * (w * s).sin()).abs() < 1e-9);
        }
        // cos(3s) on (0, 5] changes sign at (2j+1) pi/6 < 5, i.e. j = 0..4.
        assert_eq!(tr.zeros, 5);
    }

    #[test]
    fn odd_start_counts_no_spurious_zero() {
        let rhs = |_s: f64, y: &State| [y[1], -y[0]];
        let tr = Dopri::default().integrate(rhs, 0.0, [0.0, 1.0], &[3.0]).unwrap();
        assert_eq!(tr.zeros, 0);
        let tr = Dopri::default().integrate(rhs, 0.0, [0.0, 1.0], &[3.3]).unwrap();
        assert_eq!(tr.zeros, 1);
    }

    #[test]
    fn stiff_growth_near_pole() {
        // y' = y / (1 - s) has solution 1/(1 - s); integrate close to the pole.
        let rhs = |s: f64, y: &State| [y[0] / (1.0 - s), 0.0];
        let end = 1.0 - 1e-6;
        let tr = Dopri::default().integrate(rhs, 0.0, [1.0, 0.0], &[end]).unwrap();
        assert!((tr.end()[0] * 1e-6 - 1.0).abs() < 1e-8);
    }
}
