//! Closed-form Liouville baseline and the explicit inverse of its radial
//! linearized operator.
//!
//! With `m = N₁ + N₂ + 1`, the normalized baseline is
//!
//! ```text
//! u₀ = ln[ 2m r^{2N₁} / (1 + r^{2m}) ],   v₀ analogous with 2N₂,
//! ρ  = 2 e^{u₀+v₀} = 8m² r^{2(m-1)} / (1 + r^{2m})²,
//! ```
//!
//! the kernel function of `Lʳw ≡ w'' + w'/r + ρw` is
//! `φ₀ = (1 - r^{2m})/(1 + r^{2m}) = -tanh(m ln r)`, and
//! `Lʳw = f` is inverted by an explicit double quadrature (see
//! [`GreenOperator`]). Everything here is exact up to quadrature tolerance
//! and serves as an oracle for the perturbation profiles.

use crate::quad::{self, CumulativeQuad, QuadError};

/// Logarithmically spaced grid with `n` points from `a` to `b` (inclusive).
pub fn log_grid(a: f64, b: f64, n: usize) -> Vec<f64> {
    assert!(a > 0.0 && b > a && n >= 2);
    let (la, lb) = (a.ln(), b.ln());
    (0..n)
        .map(|i| (la + (lb - la) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

/// ln(1 + e^w), overflow-free.
fn softplus(w: f64) -> f64 {
    w.max(0.0) + (-w.abs()).exp().ln_1p()
}

/// Baseline values at one radius.
///
/// Logarithms at the vortex point are `-∞` sentinels; exponentiated
/// quantities are finite (0 for winding ≥ 1) so downstream arithmetic never
/// sees a NaN.
#[derive(Debug, Clone, Copy)]
pub struct BaselinePoint {
    pub r: f64,
    pub u0: f64,
    pub v0: f64,
    pub rho: f64,
}

fn m_of(n1: u32, n2: u32) -> f64 {
    (n1 + n2 + 1) as f64
}

/// u₀(r); `-∞` at r = 0.
pub fn u0(r: f64, n1: u32, n2: u32) -> f64 {
    let m = m_of(n1, n2);
    if r == 0.0 {
        return f64::NEG_INFINITY;
    }
    (2.0 * m).ln() + 2.0 * n1 as f64 * r.ln() - softplus(2.0 * m * r.ln())
}

/// v₀(r); `-∞` at r = 0.
pub fn v0(r: f64, n1: u32, n2: u32) -> f64 {
    u0(r, n2, n1)
}

/// e^{u₀(r)}, finite for all r ≥ 0.
pub fn exp_u0(r: f64, n1: u32, n2: u32) -> f64 {
    if r == 0.0 {
        return 0.0;
    }
    u0(r, n1, n2).exp()
}

/// e^{v₀(r)}.
pub fn exp_v0(r: f64, n1: u32, n2: u32) -> f64 {
    exp_u0(r, n2, n1)
}

/// ρ(r) = 2 e^{u₀+v₀}.
pub fn rho(r: f64, n1: u32, n2: u32) -> f64 {
    let m = m_of(n1, n2);
    if r == 0.0 {
        return 0.0;
    }
    8.0 * m * m * (2.0 * (m - 1.0) * r.ln() - 2.0 * softplus(2.0 * m * r.ln())).exp()
}

pub fn baseline(r: f64, n1: u32, n2: u32) -> BaselinePoint {
    BaselinePoint {
        r,
        u0: u0(r, n1, n2),
        v0: v0(r, n1, n2),
        rho: rho(r, n1, n2),
    }
}

/// Kernel function φ₀ of the radial linearized operator.
pub fn phi0(r: f64, n1: u32, n2: u32) -> f64 {
    if r == 0.0 {
        return 1.0;
    }
    -(m_of(n1, n2) * r.ln()).tanh()
}

/// Second kernel-adjacent function entering the inversion formula:
/// `ψ₀ = φ₀ ln r + 2 / (m (1 + r^{2m}))`; log-singular at the origin.
pub fn psi0(r: f64, n1: u32, n2: u32) -> f64 {
    let m = m_of(n1, n2);
    if r == 0.0 {
        return f64::NEG_INFINITY;
    }
    phi0(r, n1, n2) * r.ln() + 2.0 / m * (-softplus(2.0 * m * r.ln())).exp()
}

/// The explicit right inverse of `Lʳ`: for a given source `f`,
/// `w(r) = ψ₀(r) ∫₀^r φ₀ f t dt - φ₀(r) ∫₀^r ψ₀ f t dt` satisfies
/// `Lʳw = f`, and `w(r) = -c_f ln r + O(1)` with
/// `c_f = ∫₀^∞ φ₀ f t dt`.
///
/// The two inner cumulative integrals are cached, so dense evaluation at
/// many radii (as the perturbation profiles require) costs one short
/// adaptive panel per new radius.
pub struct GreenOperator {
    n1: u32,
    n2: u32,
    f: std::rc::Rc<dyn Fn(f64) -> f64>,
    i1: CumulativeQuad<Box<dyn Fn(f64) -> f64>>,
    i2: CumulativeQuad<Box<dyn Fn(f64) -> f64>>,
    atol: f64,
    rtol: f64,
}

impl GreenOperator {
    pub fn new<F: Fn(f64) -> f64 + 'static>(n1: u32, n2: u32, f: F, atol: f64, rtol: f64) -> Self {
        let f: std::rc::Rc<dyn Fn(f64) -> f64> = std::rc::Rc::new(f);
        let f1 = f.clone();
        let f2 = f.clone();
        let g1: Box<dyn Fn(f64) -> f64> = Box::new(move |t| {
            if t == 0.0 {
                0.0
            } else {
                phi0(t, n1, n2) * f1(t) * t
            }
        });
        let g2: Box<dyn Fn(f64) -> f64> = Box::new(move |t| {
            if t == 0.0 {
                0.0
            } else {
                psi0(t, n1, n2) * f2(t) * t
            }
        });
        Self {
            n1,
            n2,
            f,
            i1: CumulativeQuad::new(g1, atol, rtol),
            i2: CumulativeQuad::new(g2, atol, rtol),
            atol,
            rtol,
        }
    }

    /// w(r) with `Lʳw = f`.
    pub fn eval(&self, r: f64) -> Result<f64, QuadError> {
        if r == 0.0 {
            return Ok(0.0);
        }
        let i1 = self.i1.eval(r)?;
        let i2 = self.i2.eval(r)?;
        Ok(psi0(r, self.n1, self.n2) * i1 - phi0(r, self.n1, self.n2) * i2)
    }

    /// c_f = ∫₀^∞ φ₀ f t dt, the coefficient of the logarithmic growth.
    pub fn c_f(&self) -> Result<f64, QuadError> {
        let (n1, n2) = (self.n1, self.n2);
        let f = self.f.clone();
        let g = move |t: f64| if t == 0.0 { 0.0 } else { phi0(t, n1, n2) * f(t) * t };
        let head = quad::integrate(&g, 0.0, 1.0, self.atol, self.rtol)?;
        let tail = quad::integrate_to_inf(&g, 1.0, self.atol, self.rtol)?;
        Ok(head + tail)
    }
}

/// One-shot inversion `Lʳw = f` evaluated at a single radius.
pub fn green_solve<F: Fn(f64) -> f64 + 'static>(
    f: F,
    r: f64,
    n1: u32,
    n2: u32,
) -> Result<f64, QuadError> {
    GreenOperator::new(n1, n2, f, quad::DEFAULT_ATOL, quad::DEFAULT_RTOL).eval(r)
}

/// The finite integrals controlling the perturbation asymptotics:
/// `σ₁ = ∫₀^∞ φ₀ (e^{u₀} - e^{v₀}) t dt`, `σ₂ = ∫₀^∞ (e^{u₀} + e^{v₀}) t dt`.
pub fn sigma_integrals(n1: u32, n2: u32) -> Result<(f64, f64), QuadError> {
    let sigma1 = if n1 == n2 {
        // Integrand identically zero by the u₀ ↔ v₀ symmetry.
        0.0
    } else {
        let g = move |t: f64| phi0(t, n1, n2) * (exp_u0(t, n1, n2) - exp_v0(t, n1, n2)) * t;
        quad::integrate(&g, 0.0, 1.0, quad::DEFAULT_ATOL, quad::DEFAULT_RTOL)?
            + quad::integrate_to_inf(&g, 1.0, quad::DEFAULT_ATOL, quad::DEFAULT_RTOL)?
    };
    let g = move |t: f64| (exp_u0(t, n1, n2) + exp_v0(t, n1, n2)) * t;
    let sigma2 = quad::integrate(&g, 0.0, 1.0, quad::DEFAULT_ATOL, quad::DEFAULT_RTOL)?
        + quad::integrate_to_inf(&g, 1.0, quad::DEFAULT_ATOL, quad::DEFAULT_RTOL)?;
    Ok((sigma1, sigma2))
}

/// ∫₀^∞ r e^{u₀+v₀} dr, the baseline interaction mass (equals 2m by the
/// explicit formula; recomputed by quadrature for use as an oracle).
pub fn baseline_mass(n1: u32, n2: u32) -> Result<f64, QuadError> {
    let g = move |t: f64| t * 0.5 * rho(t, n1, n2);
    Ok(quad::integrate(&g, 0.0, 1.0, 1e-12, 1e-10)?
        + quad::integrate_to_inf(&g, 1.0, 1e-12, 1e-10)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    /// Five-point finite-difference residual of Lʳw at r.
    pub(crate) fn lr_residual<W: Fn(f64) -> f64>(w: &W, r: f64, h: f64, n1: u32, n2: u32) -> f64 {
        let (wm2, wm1, w0, wp1, wp2) = (w(r - 2.0 * h), w(r - h), w(r), w(r + h), w(r + 2.0 * h));
        let d2 = (-wp2 + 16.0 * wp1 - 30.0 * w0 + 16.0 * wm1 - wm2) / (12.0 * h * h);
        let d1 = (-wp2 + 8.0 * wp1 - 8.0 * wm1 + wm2) / (12.0 * h);
        d2 + d1 / r + rho(r, n1, n2) * w0
    }

    #[test]
    fn baseline_values_n11() {
        let b = baseline(1.0, 1, 1);
        assert_relative_eq!(b.u0, 3.0_f64.ln(), max_relative = 1e-14);
        assert_relative_eq!(b.v0, 3.0_f64.ln(), max_relative = 1e-14);
        assert_relative_eq!(b.rho, 18.0, max_relative = 1e-14);
    }

    #[test]
    fn baseline_at_origin() {
        let b = baseline(0.0, 1, 2);
        assert_eq!(b.u0, f64::NEG_INFINITY);
        assert_eq!(b.v0, f64::NEG_INFINITY);
        assert_eq!(b.rho, 0.0);
        assert_eq!(exp_u0(0.0, 1, 2), 0.0);
    }

    #[test]
    fn baseline_solves_liouville() {
        // FD Laplacian of u₀ must equal -e^{u₀+v₀} away from the origin.
        for &(n1, n2) in &[(1u32, 1u32), (2, 1), (3, 2)] {
            for &r in &[0.3, 0.7, 1.0, 2.0, 5.0] {
                let h = 1e-4 * r;
                let lap = {
                    let w = |x: f64| u0(x, n1, n2);
                    let d2 = (-w(r + 2.0 * h) + 16.0 * w(r + h) - 30.0 * w(r) + 16.0 * w(r - h)
                        - w(r - 2.0 * h))
                        / (12.0 * h * h);
                    let d1 = (-w(r + 2.0 * h) + 8.0 * w(r + h) - 8.0 * w(r - h) + w(r - 2.0 * h))
                        / (12.0 * h);
                    d2 + d1 / r
                };
                let rhs = -0.5 * rho(r, n1, n2);
                assert!(
                    (lap - rhs).abs() < 1e-5 * (1.0 + rhs.abs()),
                    "n=({n1},{n2}) r={r}: lap={lap} rhs={rhs}"
                );
            }
        }
    }

    #[test]
    fn mass_is_2m() {
        for &(n1, n2) in &[(1u32, 1u32), (2, 3), (3, 3)] {
            let m = (n1 + n2 + 1) as f64;
            assert_relative_eq!(baseline_mass(n1, n2).unwrap(), 2.0 * m, max_relative = 1e-9);
        }
    }

    #[test]
    fn rho_mass_is_4m() {
        let g = |t: f64| t * rho(t, 2, 1);
        let v = quad::integrate(&g, 0.0, 1.0, 1e-12, 1e-10).unwrap()
            + quad::integrate_to_inf(&g, 1.0, 1e-12, 1e-10).unwrap();
        assert_relative_eq!(v, 16.0, max_relative = 1e-9);
    }

    #[test]
    fn phi0_endpoints() {
        assert_eq!(phi0(0.0, 1, 1), 1.0);
        assert_eq!(phi0(1.0, 2, 3), 0.0);
        assert!((phi0(1e6, 1, 1) + 1.0).abs() < 1e-6);
    }

    #[test]
    fn phi0_in_kernel() {
        for &(n1, n2) in &[(1u32, 1u32), (2, 1)] {
            for &r in &[0.2, 0.5, 1.0, 1.9, 4.0] {
                let res = lr_residual(&|x| phi0(x, n1, n2), r, 1.2e-4 * r.max(0.5), n1, n2);
                assert!(res.abs() < 1e-6, "n=({n1},{n2}) r={r}: {res}");
            }
        }
    }

    #[test]
    fn green_zero_source() {
        let op = GreenOperator::new(1, 1, |_| 0.0, 1e-12, 1e-10);
        for &r in &[0.0, 0.5, 1.0, 10.0] {
            assert_eq!(op.eval(r).unwrap(), 0.0);
        }
    }

    #[test]
    fn green_residual_fd() {
        // |Lʳ(green_solve f) - f| small at sampled radii, f = e^{u₀}.
        let (n1, n2) = (1u32, 1u32);
        let op = GreenOperator::new(n1, n2, move |t| exp_u0(t, n1, n2), 1e-12, 1e-10);
        for &r in &[0.4, 0.9, 1.7, 3.0] {
            let w = |x: f64| op.eval(x).unwrap();
            let res = lr_residual(&w, r, 8e-3, n1, n2) - exp_u0(r, n1, n2);
            assert!(res.abs() < 1e-5, "r={r}: residual {res}");
        }
    }

    #[test]
    fn cf_vanishes_by_symmetry() {
        let (n1, n2) = (2u32, 2u32);
        let op = GreenOperator::new(n1, n2, move |t| exp_u0(t, n1, n2) - exp_v0(t, n1, n2), 1e-12, 1e-10);
        assert!(op.c_f().unwrap().abs() < 1e-12);
    }

    #[test]
    fn green_log_asymptote() {
        // w(r) + c_f ln r stays bounded (converges to a constant).
        let (n1, n2) = (2u32, 1u32);
        let op = GreenOperator::new(n1, n2, move |t| exp_u0(t, n1, n2) - exp_v0(t, n1, n2), 1e-12, 1e-10);
        let cf = op.c_f().unwrap();
        let g = |r: f64| op.eval(r).unwrap() + cf * r.ln();
        let (a, b) = (g(1e4), g(1e6));
        assert!((a - b).abs() < 1e-3, "asymptote drift {}", (a - b).abs());
        assert!(a.is_finite() && a.abs() < 10.0);
    }

    #[test]
    fn sigma_integrals_basic() {
        let (s1, s2) = sigma_integrals(1, 1).unwrap();
        assert_eq!(s1, 0.0);
        // Closed form via ∫₀^∞ x^{m-1}/(1+x^n) dx = π/(n sin(mπ/n)):
        // σ₂(N,N) = 2π / sin(2π/(2N+1)) / ... reduces to 4π/√3 at N=1.
        assert_relative_eq!(s2, 4.0 * std::f64::consts::PI / 3.0_f64.sqrt(), max_relative = 1e-9);
    }

    #[test]
    fn sigma_integrals_closed_form_general() {
        // σ₂ = π/sin(π(N₁+1)/m) + π/sin(π(N₂+1)/m) by the same substitution.
        for &(n1, n2) in &[(1u32, 2u32), (3, 1), (5, 5), (2, 4)] {
            let m = (n1 + n2 + 1) as f64;
            let pi = std::f64::consts::PI;
            let expected = pi / (pi * (n1 as f64 + 1.0) / m).sin() + pi / (pi * (n2 as f64 + 1.0) / m).sin();
            let (s1, s2) = sigma_integrals(n1, n2).unwrap();
            assert_relative_eq!(s2, expected, max_relative = 1e-9);
            assert!(s1.is_finite());
        }
    }

    proptest! {
        #[test]
        fn baseline_difference_identity(
            r in 1e-3..1e3f64,
            n1 in 1u32..5,
            n2 in 1u32..5,
        ) {
            // u₀ - v₀ = 2(N₁-N₂) ln r
            let b = baseline(r, n1, n2);
            let lhs = b.u0 - b.v0;
            let rhs = 2.0 * (n1 as f64 - n2 as f64) * r.ln();
            prop_assert!((lhs - rhs).abs() < 1e-10 * (1.0 + rhs.abs()));
            // ρ = 2 e^{u₀+v₀}
            prop_assert!((b.rho - 2.0 * (b.u0 + b.v0).exp()).abs() < 1e-10 * (1.0 + b.rho));
        }
    }
}
