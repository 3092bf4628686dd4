//! Solver library for non-topological self-dual vortices of the Abelian
//! reduction of the mass-deformed ABJM model.
//!
//! The governing object is the planar elliptic system
//!
//! ```text
//! -Δu = e^v (e^u + 1) - 4π N₁ δ₀
//! -Δv = e^u (e^v - 1) - 4π N₂ δ₀
//! ```
//!
//! under the integrability conditions `e^u, e^v, e^{u+v} ∈ L¹(ℝ²)`, posed in
//! dimensionless coordinates (the physical coupling `λ = 4σ²` is scaled out
//! and reinstated only when reporting fields, fluxes, and energy).
//!
//! Superimposed vortices at the origin reduce the problem to a radial Cauchy
//! problem for the regular parts `U = u - 2N₁ ln r`, `V = v - 2N₂ ln r`. The
//! crate integrates that Cauchy problem, classifies trajectories as
//! integrable (finite energy) or divergent, shoots over initial data on the
//! line `(2N₂+1)α₁ - (2N₁+1)α₂ = L` to hit a prescribed flux or energy, and
//! verifies every identity the classification rests on: Pohozaev-type
//! identities, a priori bounds, zero structure of `v`, decay exponents, the
//! explicit Liouville baseline, first-order perturbation profiles, and the
//! rescaled blow-up limit.
//!
//! Entry points:
//! - [`shoot::integrate`] — integrate one Cauchy problem to a [`shoot::RadialProfile`].
//! - [`targeting::solve_target`] — bisection shooting for a flux/energy target.
//! - [`targeting::scan`] — parallel sweep over initial data.
//! - [`diagnostics::evaluate`] — identity residuals and predicate checks.
//! - [`fields::reconstruct`] — physical field profiles from a solution.
//!
//! The `examples/` directory demonstrates each capability end to end; the
//! `ntvortex` binary exposes the same workflows as subcommands.

pub mod cli;
pub mod diagnostics;
pub mod fields;
pub mod functionals;
pub mod liouville;
pub mod ode;
pub mod params;
pub mod perturb;
pub mod quad;
pub mod report;
pub mod shoot;
pub mod targeting;

pub use params::VortexParams;
pub use shoot::{InitialData, IntegrationControls, RadialProfile, Termination};
