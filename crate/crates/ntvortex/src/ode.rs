//! Adaptive Dormand–Prince 5(4) integration over fixed-size `f64` states.
//!
//! Kept deliberately small: step-size control with the classic PI stabilizer,
//! FSAL reuse, caller-imposed per-step limits (the radial driver caps steps
//! in ln r so the output grid stays dense enough for slope fits), and a
//! fixed-step RK4 companion used by independent verification runs.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum OdeError {
    #[error("step size underflow at t = {t} (h = {h})")]
    StepSizeUnderflow { t: f64, h: f64 },
    #[error("right-hand side produced a non-finite value at t = {t}")]
    NonFiniteRhs { t: f64 },
}

const A21: f64 = 0.2;
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
const C2: f64 = 0.2;
const C3: f64 = 0.3;
const C4: f64 = 0.8;
const C5: f64 = 8.0 / 9.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

#[derive(Debug, Clone, Copy, Default)]
pub struct OdeStats {
    pub accepted: usize,
    pub rejected: usize,
    pub rhs_evals: usize,
}

pub struct Dopri5<const N: usize, F: Fn(f64, &[f64; N]) -> [f64; N]> {
    rhs: F,
    pub t: f64,
    pub y: [f64; N],
    k1: [f64; N],
    h: f64,
    rtol: f64,
    atol: f64,
    facold: f64,
    pub stats: OdeStats,
}

impl<const N: usize, F: Fn(f64, &[f64; N]) -> [f64; N]> Dopri5<N, F> {
    pub fn new(rhs: F, t0: f64, y0: [f64; N], h0: f64, rtol: f64, atol: f64) -> Self {
        let k1 = rhs(t0, &y0);
        Self {
            rhs,
            t: t0,
            y: y0,
            k1,
            h: h0,
            rtol,
            atol,
            facold: 1e-4,
            stats: OdeStats {
                rhs_evals: 1,
                ..Default::default()
            },
        }
    }

    /// Advance by exactly one accepted step of size ≤ `h_limit`.
    pub fn advance(&mut self, h_limit: f64) -> Result<(), OdeError> {
        debug_assert!(h_limit > 0.0);
        let mut h = self.h.min(h_limit);
        loop {
            if h < 1e-14 * self.t.abs().max(1e-300) {
                return Err(OdeError::StepSizeUnderflow { t: self.t, h });
            }
            let (y_new, k_new, err) = self.attempt(h);
            self.stats.rhs_evals += 6;
            if !err.is_finite() {
                self.stats.rejected += 1;
                h *= 0.25;
                continue;
            }
            if err <= 1.0 {
                // PI controller, expo 1/5 with beta = 0.04 stabilization.
                let fac11 = err.powf(0.2 - 0.04 * 0.75);
                let fac = (fac11 / self.facold.powf(0.04) / 0.9).clamp(0.1, 5.0);
                self.facold = err.max(1e-4);
                self.t += h;
                self.y = y_new;
                self.k1 = k_new;
                self.stats.accepted += 1;
                self.h = h / fac;
                return Ok(());
            }
            self.stats.rejected += 1;
            h /= (err.powf(0.2) / 0.9).min(5.0);
        }
    }

    fn attempt(&self, h: f64) -> ([f64; N], [f64; N], f64) {
        let t = self.t;
        let y = &self.y;
        let k1 = &self.k1;

        let mut y2 = [0.0; N];
        for i in 0..N {
            y2[i] = y[i] + h * A21 * k1[i];
        }
        let k2 = (self.rhs)(t + C2 * h, &y2);

        let mut y3 = [0.0; N];
        for i in 0..N {
            y3[i] = y[i] + h * (A31 * k1[i] + A32 * k2[i]);
        }
        let k3 = (self.rhs)(t + C3 * h, &y3);

        let mut y4 = [0.0; N];
        for i in 0..N {
            y4[i] = y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
        }
        let k4 = (self.rhs)(t + C4 * h, &y4);

        let mut y5 = [0.0; N];
        for i in 0..N {
            y5[i] = y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
        }
        let k5 = (self.rhs)(t + C5 * h, &y5);

        let mut y6 = [0.0; N];
        for i in 0..N {
            y6[i] = y[i] + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
        }
        let k6 = (self.rhs)(t + h, &y6);

        let mut y_new = [0.0; N];
        for i in 0..N {
            y_new[i] = y[i] + h * (B1 * k1[i] + B3 * k3[i] + B4 * k4[i] + B5 * k5[i] + B6 * k6[i]);
        }
        let k7 = (self.rhs)(t + h, &y_new);

        let mut err = 0.0;
        for i in 0..N {
            let e = h
                * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let sk = self.atol + self.rtol * y[i].abs().max(y_new[i].abs());
            err += (e / sk) * (e / sk);
        }
        err = (err / N as f64).sqrt();
        (y_new, k7, err)
    }
}

/// Fixed-step classic RK4 with steps uniform in ln t, for independent
/// verification of adaptive runs (`t0 > 0`).
pub fn rk4_log_fixed<const N: usize, F: Fn(f64, &[f64; N]) -> [f64; N]>(
    rhs: F,
    t0: f64,
    y0: [f64; N],
    t1: f64,
    steps: usize,
) -> [f64; N] {
    assert!(t0 > 0.0 && t1 > t0 && steps > 0);
    // dy/dx = t f(t, y) with x = ln t.
    let g = |x: f64, y: &[f64; N]| {
        let t = x.exp();
        let f = rhs(t, y);
        let mut out = [0.0; N];
        for i in 0..N {
            out[i] = t * f[i];
        }
        out
    };
    let (x0, x1) = (t0.ln(), t1.ln());
    let h = (x1 - x0) / steps as f64;
    let mut x = x0;
    let mut y = y0;
    for _ in 0..steps {
        let k1 = g(x, &y);
        let mut ya = [0.0; N];
        for i in 0..N {
            ya[i] = y[i] + 0.5 * h * k1[i];
        }
        let k2 = g(x + 0.5 * h, &ya);
        let mut yb = [0.0; N];
        for i in 0..N {
            yb[i] = y[i] + 0.5 * h * k2[i];
        }
        let k3 = g(x + 0.5 * h, &yb);
        let mut yc = [0.0; N];
        for i in 0..N {
            yc[i] = y[i] + h * k3[i];
        }
        let k4 = g(x + h, &yc);
        for i in 0..N {
            y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        x += h;
    }
    y
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn exponential_decay() {
        let mut solver = Dopri5::new(|_t, y: &[f64; 1]| [-y[0]], 0.0, [1.0], 1e-4, 1e-10, 1e-12);
        while solver.t < 5.0 {
            solver.advance(5.0 - solver.t).unwrap();
        }
        assert_relative_eq!(solver.y[0], (-5.0_f64).exp(), max_relative = 1e-9);
    }

    #[test]
    fn harmonic_oscillator_energy() {
        let mut solver = Dopri5::new(
            |_t, y: &[f64; 2]| [y[1], -y[0]],
            0.0,
            [1.0, 0.0],
            1e-4,
            1e-11,
            1e-13,
        );
        while solver.t < 20.0 {
            solver.advance(20.0 - solver.t).unwrap();
        }
        let e = solver.y[0] * solver.y[0] + solver.y[1] * solver.y[1];
        assert_relative_eq!(e, 1.0, max_relative = 1e-9);
        assert_relative_eq!(solver.y[0], 20.0_f64.cos(), max_relative = 1e-7);
    }

    #[test]
    fn rk4_log_matches() {
        // dy/dt = -y from t=1 to t=e^2.
        let y = rk4_log_fixed(|_t, y: &[f64; 1]| [-y[0]], 1.0, [1.0], (2.0_f64).exp(), 4000);
        assert_relative_eq!(y[0], (1.0 - (2.0_f64).exp()).exp(), max_relative = 1e-10);
    }
}
