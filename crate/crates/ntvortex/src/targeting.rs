//! The shooting layer: classify Cauchy data on the line
//! `(2N₂+1)α₁ - (2N₁+1)α₂ = L`, bracket a sign change, and bisect to hit a
//! prescribed flux `Φ₂/(2π)` or `Φ₁/(2π)` or a total energy.
//!
//! Existence of a root is guaranteed by continuity plus the endpoint
//! behavior (divergence for α below a data-dependent threshold, both flux
//! functionals approaching N₁+N₂+1 as α → ∞), but neither uniqueness nor
//! monotonicity of α ↦ F₂(∞) is: the solver takes the first sign-change
//! bracket found by outward expansion from α = 0, returns *a* root, and
//! reports any additional sign changes seen among its probe points.

use crate::functionals::{self, Decision, TailEstimate};
use crate::params::{self, VortexParams};
use crate::shoot::{self, InitialData, IntegrationControls, RadialProfile, ShootError};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Classification outcome for one shot.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ShotOutcome {
    /// Shooting parameter α = U(0).
    pub alpha: f64,
    pub init: InitialData,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Verdict {
    Integrable {
        f1_inf: f64,
        f2_inf: f64,
        beta1: f64,
        beta2: f64,
        flux1_over_2pi: f64,
        flux2_over_2pi: f64,
        energy: f64,
    },
    Divergent,
    Inconclusive {
        reason: String,
    },
}

impl Verdict {
    pub fn is_integrable(&self) -> bool {
        matches!(self, Verdict::Integrable { .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetKind {
    Flux2,
    Flux1,
    Energy,
}

/// A shooting target. Flux targets are in units of Φ/(2π); the admissible
/// open intervals are (N₂+1, N₁+N₂+1) for Φ₂/(2π), (N₁+N₂+1, ∞) for
/// Φ₁/(2π), and (0, ∞) for the energy.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct TargetSpec {
    pub kind: TargetKind,
    pub value: f64,
    pub line_offset: f64,
    /// Matching tolerance: |achieved - target| in Φ/(2π) units for flux
    /// targets, relative for energy.
    pub tol: f64,
}

impl TargetSpec {
    pub fn flux2(value: f64, line_offset: f64) -> Self {
        Self { kind: TargetKind::Flux2, value, line_offset, tol: 1e-4 }
    }

    pub fn flux1(value: f64, line_offset: f64) -> Self {
        Self { kind: TargetKind::Flux1, value, line_offset, tol: 1e-4 }
    }

    pub fn energy(value: f64, line_offset: f64) -> Self {
        Self { kind: TargetKind::Energy, value, line_offset, tol: 1e-4 }
    }

    /// Check the target sits strictly inside its admissible interval.
    pub fn validate(&self, p: &VortexParams) -> Result<(), TargetError> {
        let (n1, n2) = (p.n1 as f64, p.n2 as f64);
        let ok = match self.kind {
            TargetKind::Flux2 => self.value > n2 + 1.0 && self.value < n1 + n2 + 1.0,
            TargetKind::Flux1 => self.value > n1 + n2 + 1.0 && self.value.is_finite(),
            TargetKind::Energy => self.value > 0.0 && self.value.is_finite(),
        };
        if ok && self.tol > 0.0 {
            Ok(())
        } else {
            Err(TargetError::Inadmissible {
                kind: self.kind,
                value: self.value,
                lo: match self.kind {
                    TargetKind::Flux2 => n2 + 1.0,
                    TargetKind::Flux1 => n1 + n2 + 1.0,
                    TargetKind::Energy => 0.0,
                },
                hi: match self.kind {
                    TargetKind::Flux2 => n1 + n2 + 1.0,
                    _ => f64::INFINITY,
                },
            })
        }
    }
}

#[derive(Debug, Error)]
pub enum TargetError {
    #[error("target {value} for {kind:?} lies outside the admissible open interval ({lo}, {hi})")]
    Inadmissible {
        kind: TargetKind,
        value: f64,
        lo: f64,
        hi: f64,
    },
    #[error("no sign-change bracket found for α ∈ [{lo}, {hi}] ({evals} classifications)")]
    Unreachable { lo: f64, hi: f64, evals: usize },
    #[error("inconclusive classification at α = {alpha} persisted after a 10x tighter retry: {reason}")]
    Precision { alpha: f64, reason: String },
    #[error("bisection bracket collapsed at α = {alpha} with residual {residual} above tolerance {tol}")]
    BracketCollapse { alpha: f64, residual: f64, tol: f64 },
    #[error(transparent)]
    Shoot(#[from] ShootError),
}

fn outcome_from(alpha: f64, init: InitialData, est: &TailEstimate, p: &VortexParams) -> ShotOutcome {
    let verdict = match est.decided {
        Decision::Integrable => {
            let f1 = est.f1_inf.unwrap();
            let f2 = est.f2_inf.unwrap();
            Verdict::Integrable {
                f1_inf: f1,
                f2_inf: f2,
                beta1: est.beta1.unwrap(),
                beta2: est.beta2.unwrap(),
                flux1_over_2pi: params::flux_over_2pi(f1),
                flux2_over_2pi: params::flux_over_2pi(f2),
                energy: params::energy_from_integrals(p, est.int_eu.unwrap(), est.int_ev.unwrap()),
            }
        }
        Decision::NonIntegrable => Verdict::Divergent,
        Decision::Inconclusive => Verdict::Inconclusive {
            reason: est.note.clone().unwrap_or_else(|| "undecided".to_string()),
        },
    };
    ShotOutcome { alpha, init, verdict }
}

/// Classify one shot on the line; returns the outcome together with the
/// integrated profile.
pub fn classify_full(
    alpha: f64,
    line_offset: f64,
    p: &VortexParams,
    controls: &IntegrationControls,
    band: f64,
) -> Result<(ShotOutcome, RadialProfile), ShootError> {
    let init = InitialData::on_line(alpha, line_offset, p.n1, p.n2);
    let profile = shoot::integrate(&init, p.n1, p.n2, controls)?;
    let est = functionals::tail_extrapolate(&profile, band);
    Ok((outcome_from(alpha, init, &est, p), profile))
}

/// Classification only. Deterministic: repeated calls are bit-identical.
pub fn classify(alpha: f64, line_offset: f64, p: &VortexParams) -> Result<ShotOutcome, ShootError> {
    classify_full(
        alpha,
        line_offset,
        p,
        &IntegrationControls::default(),
        functionals::DEFAULT_BAND,
    )
    .map(|(o, _)| o)
}

/// Search metadata returned with a converged shot.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolveMeta {
    pub classifications: usize,
    pub bracket: (f64, f64),
    /// Additional sign-change brackets observed among probe points; the
    /// target map need not be monotone and multiplicity is reported, never
    /// assumed away.
    pub extra_sign_changes: Vec<(f64, f64)>,
    pub retried_tighter: bool,
    pub achieved: f64,
}

struct Eval {
    g: f64,
    outcome: ShotOutcome,
    profile: RadialProfile,
}

struct Search<'a> {
    spec: TargetSpec,
    p: &'a VortexParams,
    controls: IntegrationControls,
    band: f64,
    evals: usize,
    retried: bool,
}

impl<'a> Search<'a> {
    /// g(α) with the divergent side mapped to the correct sign: divergence
    /// means F₂(∞) ≤ 2(N₂+1) below every admissible flux2 target, while
    /// F₁(∞) = ∞ and E = ∞ sit above every flux1/energy target.
    fn eval(&mut self, alpha: f64) -> Result<Eval, TargetError> {
        let mut attempt = |controls: &IntegrationControls| -> Result<Option<Eval>, TargetError> {
            self.evals += 1;
            let (outcome, profile) =
                classify_full(alpha, self.spec.line_offset, self.p, controls, self.band)?;
            let g = match (&outcome.verdict, self.spec.kind) {
                (Verdict::Integrable { flux2_over_2pi, .. }, TargetKind::Flux2) => {
                    flux2_over_2pi - self.spec.value
                }
                (Verdict::Integrable { flux1_over_2pi, .. }, TargetKind::Flux1) => {
                    flux1_over_2pi - self.spec.value
                }
                (Verdict::Integrable { energy, .. }, TargetKind::Energy) => {
                    (energy / self.spec.value).ln()
                }
                (Verdict::Divergent, TargetKind::Flux2) => f64::NEG_INFINITY,
                (Verdict::Divergent, _) => f64::INFINITY,
                (Verdict::Inconclusive { .. }, _) => return Ok(None),
            };
            Ok(Some(Eval { g, outcome, profile }))
        };
        if let Some(e) = attempt(&self.controls.clone())? {
            return Ok(e);
        }
        // One retry at 10x tighter integrator tolerances.
        self.retried = true;
        let tighter = self.controls.tightened(10.0);
        if let Some(e) = attempt(&tighter)? {
            return Ok(e);
        }
        Err(TargetError::Precision {
            alpha,
            reason: "classification remained inconclusive".to_string(),
        })
    }
}

/// Find α on the line such that the achieved flux/energy matches
/// `spec.value` within `spec.tol`, by outward bracket expansion from α = 0
/// followed by bisection. Returns the converged shot, its profile, and
/// search metadata.
pub fn solve_target(
    spec: &TargetSpec,
    p: &VortexParams,
    controls: &IntegrationControls,
) -> Result<(ShotOutcome, RadialProfile, SolveMeta), TargetError> {
    spec.validate(p)?;
    let mut search = Search {
        spec: *spec,
        p,
        controls: *controls,
        band: functionals::DEFAULT_BAND,
        evals: 0,
        retried: false,
    };

    // Probe ladder, outward from 0, then widened in +10 blocks up to ±50.
    let mut probes: Vec<(f64, f64)> = Vec::new(); // sorted by alpha: (alpha, g)
    let mut bracket: Option<((f64, f64), (f64, f64))> = None;
    let base: Vec<f64> = [0.0, 1.0, 2.0, 4.0, 6.0, 8.0, 12.0, 16.0, 20.0]
        .iter()
        .flat_map(|&a| if a == 0.0 { vec![0.0] } else { vec![a, -a] })
        .collect();
    let extensions: Vec<f64> = vec![30.0, -30.0, 40.0, -40.0, 50.0, -50.0];

    'ladder: for stage in [base, extensions] {
        for alpha in stage {
            let e = search.eval(alpha)?;
            let pos = probes
                .binary_search_by(|x| x.0.partial_cmp(&alpha).unwrap())
                .unwrap_err();
            probes.insert(pos, (alpha, e.g));
            // Adjacent sign change among the sorted probes?
            for w in probes.windows(2) {
                if w[0].1.signum() != w[1].1.signum() {
                    bracket = Some((w[0], w[1]));
                    break 'ladder;
                }
            }
        }
    }

    let ((mut lo, mut g_lo), (mut hi, mut g_hi)) = bracket.ok_or(TargetError::Unreachable {
        lo: -50.0,
        hi: 50.0,
        evals: search.evals,
    })?;

    // Record any further sign changes among the probes (multiplicity flag).
    let extra: Vec<(f64, f64)> = probes
        .windows(2)
        .filter(|w| w[0].1.signum() != w[1].1.signum() && (w[0].0, w[1].0) != (lo, hi))
        .map(|w| (w[0].0, w[1].0))
        .collect();

    let mut best: Option<Eval> = None;
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        let e = search.eval(mid)?;
        let done = e.g.abs() <= spec.tol || (hi - lo) < 1e-12 * hi.abs().max(1.0);
        let g = e.g;
        if best.as_ref().map_or(true, |b| e.g.abs() < b.g.abs()) {
            best = Some(e);
        }
        if done {
            break;
        }
        if g.signum() == g_lo.signum() {
            lo = mid;
            g_lo = g;
        } else {
            hi = mid;
            g_hi = g;
        }
    }
    let _ = (g_lo, g_hi);

    let best = best.unwrap();
    if best.g.abs() > spec.tol {
        return Err(TargetError::BracketCollapse {
            alpha: best.outcome.alpha,
            residual: best.g.abs(),
            tol: spec.tol,
        });
    }
    let meta = SolveMeta {
        classifications: search.evals,
        bracket: (lo, hi),
        extra_sign_changes: extra,
        retried_tighter: search.retried,
        achieved: match spec.kind {
            TargetKind::Energy => {
                if let Verdict::Integrable { energy, .. } = best.outcome.verdict {
                    energy
                } else {
                    f64::NAN
                }
            }
            TargetKind::Flux2 => {
                if let Verdict::Integrable { flux2_over_2pi, .. } = best.outcome.verdict {
                    flux2_over_2pi
                } else {
                    f64::NAN
                }
            }
            TargetKind::Flux1 => {
                if let Verdict::Integrable { flux1_over_2pi, .. } = best.outcome.verdict {
                    flux1_over_2pi
                } else {
                    f64::NAN
                }
            }
        },
    };
    Ok((best.outcome, best.profile, meta))
}

/// Classify a grid of α values in parallel (deterministic ordered output;
/// per-point failures are recorded inline as inconclusive outcomes).
pub fn scan(
    alphas: &[f64],
    line_offset: f64,
    p: &VortexParams,
    controls: &IntegrationControls,
    band: f64,
) -> Vec<ShotOutcome> {
    alphas
        .par_iter()
        .map(|&alpha| {
            classify_full(alpha, line_offset, p, controls, band)
                .map(|(o, _)| o)
                .unwrap_or_else(|e| ShotOutcome {
                    alpha,
                    init: InitialData::on_line(alpha, line_offset, p.n1, p.n2),
                    verdict: Verdict::Inconclusive {
                        reason: format!("integration failed: {e}"),
                    },
                })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn params11() -> VortexParams {
        VortexParams::dimensionless(1, 1).unwrap()
    }

    #[test]
    fn rejects_targets_outside_interval() {
        let p = params11();
        assert!(TargetSpec::flux2(2.0, 0.0).validate(&p).is_err());
        assert!(TargetSpec::flux2(3.0, 0.0).validate(&p).is_err());
        assert!(TargetSpec::flux2(2.5, 0.0).validate(&p).is_ok());
        assert!(TargetSpec::flux1(3.0, 0.0).validate(&p).is_err());
        assert!(TargetSpec::flux1(3.5, 0.0).validate(&p).is_ok());
        assert!(TargetSpec::energy(0.0, 0.0).validate(&p).is_err());
        assert!(TargetSpec::energy(2.0, 0.0).validate(&p).is_ok());
    }

    #[test]
    fn classify_branches() {
        let p = params11();
        let low = classify(-12.0, 0.0, &p).unwrap();
        assert!(matches!(low.verdict, Verdict::Divergent));

        let high = classify(12.0, 0.0, &p).unwrap();
        match high.verdict {
            Verdict::Integrable { f2_inf, .. } => {
                assert!((f2_inf - 6.0).abs() < 0.2, "F2(inf) = {f2_inf}");
            }
            v => panic!("expected integrable, got {v:?}"),
        }
    }

    #[test]
    fn classify_deterministic() {
        let p = params11();
        let a = classify(1.5, 0.0, &p).unwrap();
        let b = classify(1.5, 0.0, &p).unwrap();
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
    }

    #[test]
    fn flux2_midpoint_target() {
        let p = params11();
        let spec = TargetSpec::flux2(2.5, 0.0);
        let (outcome, profile, meta) =
            solve_target(&spec, &p, &IntegrationControls::default()).unwrap();
        match outcome.verdict {
            Verdict::Integrable { flux2_over_2pi, .. } => {
                assert!((flux2_over_2pi - 2.5).abs() <= 1e-4, "achieved {flux2_over_2pi}");
            }
            v => panic!("{v:?}"),
        }
        assert!(meta.classifications <= 80);
        // Independent fixed-step verification of the returned trajectory.
        let verify = shoot::verify_against_rk4(&profile);
        assert!(
            verify.state_rel_err < 1e-7,
            "rk4 mismatch {}",
            verify.state_rel_err
        );
    }

    #[test]
    fn same_flux_two_lines_distinct_data() {
        let p = params11();
        let a = solve_target(&TargetSpec::flux2(2.5, -2.0), &p, &IntegrationControls::default())
            .unwrap()
            .0;
        let b = solve_target(&TargetSpec::flux2(2.5, 2.0), &p, &IntegrationControls::default())
            .unwrap()
            .0;
        assert!(
            (a.init.alpha1 - b.init.alpha1).abs() > 1e-6
                || (a.init.alpha2 - b.init.alpha2).abs() > 1e-6,
            "line parameter must produce distinct initial data"
        );
        for o in [&a, &b] {
            if let Verdict::Integrable { flux2_over_2pi, .. } = o.verdict {
                assert_relative_eq!(flux2_over_2pi, 2.5, epsilon = 1e-4);
            } else {
                panic!("not integrable");
            }
        }
    }

    #[test]
    fn energy_target() {
        let p = params11();
        let spec = TargetSpec::energy(3.0, 0.0);
        let (outcome, _, _) = solve_target(&spec, &p, &IntegrationControls::default()).unwrap();
        match outcome.verdict {
            Verdict::Integrable { energy, .. } => {
                assert!((energy / 3.0).ln().abs() <= 1e-4, "achieved E = {energy}");
            }
            v => panic!("{v:?}"),
        }
    }

    #[test]
    fn flux1_target() {
        let p = params11();
        let spec = TargetSpec::flux1(3.4, 0.0);
        let (outcome, _, _) = solve_target(&spec, &p, &IntegrationControls::default()).unwrap();
        match outcome.verdict {
            Verdict::Integrable { flux1_over_2pi, .. } => {
                assert!((flux1_over_2pi - 3.4).abs() <= 1e-4, "achieved {flux1_over_2pi}");
            }
            v => panic!("{v:?}"),
        }
    }

    #[test]
    fn scan_orders_and_classifies() {
        let p = params11();
        let alphas: Vec<f64> = (0..13).map(|i| -10.0 + 2.0 * i as f64).collect();
        let outcomes = scan(&alphas, 0.0, &p, &IntegrationControls::default(), 1e-3);
        assert_eq!(outcomes.len(), alphas.len());
        let mut last_flux2 = None;
        for (o, &a) in outcomes.iter().zip(&alphas) {
            assert_eq!(o.alpha, a);
            if let Verdict::Integrable { flux1_over_2pi, flux2_over_2pi, .. } = o.verdict {
                assert!(flux2_over_2pi > 2.0 && flux2_over_2pi < 3.0);
                assert!(flux1_over_2pi > 3.0);
                last_flux2 = Some(flux2_over_2pi);
            }
        }
        // The high-α end approaches the common limit N₁+N₂+1 = 3.
        assert!(last_flux2.unwrap() > 2.9);
    }
}
