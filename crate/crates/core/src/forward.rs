//! Stabilized linear IMEX time stepping for the tumor/nutrient state system
//!
//! ```text
//! φ_t − Δμ = P(φ)(σ − μ),   μ = −Δφ + F′(φ),
//! σ_t − Δσ = −P(φ)(σ − μ) + u,
//! ```
//!
//! with homogeneous Neumann conditions on all three fields. One step from
//! level n reads, with μ̃ⁿ = −Δφⁿ + F′(φⁿ) and Rⁿ = P(φⁿ)(σⁿ − μ̃ⁿ),
//!
//! ```text
//! (I + τ(Δ² − SΔ)) φⁿ⁺¹ = φⁿ + τΔ(F′(φⁿ) − Sφⁿ) + τRⁿ
//! (I − τΔ)         σⁿ⁺¹ = σⁿ + τ(uⁿ − Rⁿ)
//! ```
//!
//! which is the implicit-diffusion / explicit-reaction discretization with
//! μⁿ⁺¹ = −Δφⁿ⁺¹ + F′(φⁿ) + S(φⁿ⁺¹ − φⁿ). Both systems are SPD and solved
//! with matrix-free CG. Adding the two updates cancels the reaction, so
//! ∫(φ + σ) changes by exactly τ∫uⁿ per step up to solver tolerance.

use crate::cg::ShiftedOperator;
use crate::error::{Error, Result};
use crate::grid::{grad_sq_integral, integrate, neumann_laplacian, norm_h, Field, Grid};
use crate::model::ModelParams;

/// Piecewise-constant-in-time control: `levels[n]` acts on [tₙ, tₙ₊₁).
#[derive(Debug, Clone, PartialEq)]
pub struct ControlSchedule {
    levels: Vec<Field>,
}

impl ControlSchedule {
    pub fn new(levels: Vec<Field>) -> Result<Self> {
        let first = levels
            .first()
            .ok_or_else(|| Error::usage("empty control schedule"))?;
        let grid = *first.grid();
        for f in &levels {
            grid.check_same(f.grid())?;
        }
        Ok(Self { levels })
    }

    /// The same field at every one of `n_steps` levels.
    pub fn repeat(field: Field, n_steps: usize) -> Self {
        Self {
            levels: vec![field; n_steps],
        }
    }

    pub fn constant(grid: Grid, n_steps: usize, value: f64) -> Self {
        Self::repeat(Field::constant(grid, value), n_steps)
    }

    pub fn levels(&self) -> &[Field] {
        &self.levels
    }

    pub fn level(&self, n: usize) -> &Field {
        &self.levels[n]
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn grid(&self) -> &Grid {
        self.levels[0].grid()
    }

    pub fn map_levels(&self, f: impl Fn(usize, &Field) -> Field) -> Self {
        Self {
            levels: self
                .levels
                .iter()
                .enumerate()
                .map(|(n, u)| f(n, u))
                .collect(),
        }
    }

    /// `self + a * other`
    pub fn axpy(&self, a: f64, other: &ControlSchedule) -> Self {
        self.map_levels(|n, u| u.axpy(a, &other.levels[n]))
    }

    pub fn sub(&self, other: &ControlSchedule) -> Self {
        self.axpy(-1.0, other)
    }

    pub fn scale(&self, a: f64) -> Self {
        self.map_levels(|_, u| u.scale(a))
    }

    /// Discrete L²(Q) inner product Σₙ τ·(aⁿ, bⁿ)_H.
    pub fn inner(&self, other: &ControlSchedule, tau: f64) -> f64 {
        self.levels
            .iter()
            .zip(&other.levels)
            .map(|(a, b)| tau * a.dot(b))
            .sum()
    }

    pub fn norm(&self, tau: f64) -> f64 {
        self.inner(self, tau).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.levels.iter().map(Field::max_abs).fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepDiagnostics {
    /// ∫(φⁿ⁺¹ + σⁿ⁺¹) − ∫(φⁿ + σⁿ) − τ∫uⁿ
    pub mass_residual: f64,
    /// Admissible size of `mass_residual` given the CG tolerance.
    pub mass_bound: f64,
    /// Energy at the new level.
    pub energy: f64,
}

/// Discrete (φ, μ, σ) at levels 0..=N.
#[derive(Debug, Clone)]
pub struct StateTrajectory {
    pub grid: Grid,
    pub tau: f64,
    pub phi: Vec<Field>,
    pub sigma: Vec<Field>,
    /// μ̃ⁿ = −Δφⁿ + F′(φⁿ) at each level.
    pub mu: Vec<Field>,
    /// One entry per step (length N).
    pub diagnostics: Vec<StepDiagnostics>,
    /// Energy at level 0.
    pub initial_energy: f64,
    /// Largest F″ seen along the trajectory; the scheme's stability assumes S ≥ this.
    pub max_curvature: f64,
}

impl StateTrajectory {
    pub fn n_steps(&self) -> usize {
        self.phi.len() - 1
    }

    pub fn time(&self, n: usize) -> f64 {
        n as f64 * self.tau
    }

    pub fn mass(&self, n: usize) -> f64 {
        integrate(&self.phi[n]) + integrate(&self.sigma[n])
    }

    pub fn energies(&self) -> Vec<f64> {
        std::iter::once(self.initial_energy)
            .chain(self.diagnostics.iter().map(|d| d.energy))
            .collect()
    }
}

/// μ = −Δφ + F′(φ)
pub fn chemical_potential(params: &ModelParams, phi: &Field) -> Field {
    let f = &params.potential;
    let lap = neumann_laplacian(phi);
    phi.zip_map(&lap, |p, l| -l + f.first(p))
}

/// E = ½∫|∇φ|² + ∫F(φ) + ½‖σ‖²
pub fn energy(params: &ModelParams, phi: &Field, sigma: &Field) -> f64 {
    let f = &params.potential;
    0.5 * grad_sq_integral(phi) + integrate(&phi.map(|p| f.value(p))) + 0.5 * norm_h(sigma).powi(2)
}

/// The two SPD operators of one step: M = I + τ(Δ² − SΔ) and N = I − τΔ.
#[derive(Debug, Clone, Copy)]
pub(crate) struct StepOperators {
    pub phi: ShiftedOperator,
    pub sigma: ShiftedOperator,
    pub tol: f64,
    pub max_iter: usize,
}

impl StepOperators {
    pub fn new(params: &ModelParams) -> Self {
        let tau = params.tau;
        Self {
            phi: ShiftedOperator {
                grid: params.grid,
                biharmonic: tau,
                neg_laplacian: tau * params.stabilization,
            },
            sigma: ShiftedOperator {
                grid: params.grid,
                biharmonic: 0.0,
                neg_laplacian: tau,
            },
            tol: params.solver.cg_tol,
            max_iter: params.solver.cg_max_iter,
        }
    }

    pub fn solve_phi(&self, rhs: &Field) -> Result<Field> {
        self.phi.solve(rhs, self.tol, self.max_iter)
    }

    pub fn solve_sigma(&self, rhs: &Field) -> Result<Field> {
        self.sigma.solve(rhs, self.tol, self.max_iter)
    }
}

struct StepOutput {
    phi: Field,
    sigma: Field,
    rhs_norm: f64,
}

fn step_with(
    params: &ModelParams,
    ops: &StepOperators,
    phi: &Field,
    sigma: &Field,
    u: &Field,
) -> Result<StepOutput> {
    let grid = params.grid;
    grid.check_same(phi.grid())?;
    grid.check_same(sigma.grid())?;
    grid.check_same(u.grid())?;
    let tau = params.tau;
    let s = params.stabilization;
    let f = &params.potential;
    let p = &params.proliferation;

    let mu = chemical_potential(params, phi);
    let reaction = phi.zip_map(&sigma.sub(&mu), |ph, gap| p.value(ph) * gap);
    let explicit = phi.map(|ph| f.first(ph) - s * ph);
    let rhs_phi = phi
        .axpy(tau, &neumann_laplacian(&explicit))
        .axpy(tau, &reaction);
    let rhs_sigma = sigma.axpy(tau, &u.sub(&reaction));

    let phi_next = ops.solve_phi(&rhs_phi)?;
    let sigma_next = ops.solve_sigma(&rhs_sigma)?;

    let guard = params.solver.overflow_guard;
    for out in [&phi_next, &sigma_next] {
        let m = out.max_abs();
        if !m.is_finite() || m > guard || !out.is_finite() {
            return Err(Error::Divergence { value: m, guard });
        }
    }
    Ok(StepOutput {
        phi: phi_next,
        sigma: sigma_next,
        rhs_norm: norm_h(&rhs_phi) + norm_h(&rhs_sigma),
    })
}

/// One IMEX step (φⁿ, σⁿ, uⁿ) ↦ (φⁿ⁺¹, σⁿ⁺¹).
pub fn step(params: &ModelParams, phi: &Field, sigma: &Field, u: &Field) -> Result<(Field, Field)> {
    let out = step_with(params, &StepOperators::new(params), phi, sigma, u)?;
    Ok((out.phi, out.sigma))
}

/// Runs `u.len()` steps from (φ₀, σ₀) and records every level.
pub fn simulate(
    params: &ModelParams,
    phi0: &Field,
    sigma0: &Field,
    u: &ControlSchedule,
) -> Result<StateTrajectory> {
    let ops = StepOperators::new(params);
    let n_steps = u.len();
    let tol = params.solver.cg_tol;
    let sqrt_measure = params.grid.measure().sqrt();
    let f = &params.potential;

    let mut phi = Vec::with_capacity(n_steps + 1);
    let mut sigma = Vec::with_capacity(n_steps + 1);
    let mut mu = Vec::with_capacity(n_steps + 1);
    let mut diagnostics = Vec::with_capacity(n_steps);
    phi.push(phi0.clone());
    sigma.push(sigma0.clone());
    mu.push(chemical_potential(params, phi0));
    let initial_energy = energy(params, phi0, sigma0);
    let curvature = |p: &Field| f.second(p.max()).max(f.second(p.min()));
    let mut max_curvature = curvature(phi0);

    for n in 0..n_steps {
        let un = u.level(n);
        let out = step_with(params, &ops, &phi[n], &sigma[n], un).map_err(|e| e.at_step(n))?;
        let mass_residual = integrate(&out.phi) + integrate(&out.sigma)
            - integrate(&phi[n])
            - integrate(&sigma[n])
            - params.tau * integrate(un);
        diagnostics.push(StepDiagnostics {
            mass_residual,
            mass_bound: 10.0 * tol * (1.0 + sqrt_measure * out.rhs_norm),
            energy: energy(params, &out.phi, &out.sigma),
        });
        max_curvature = max_curvature.max(curvature(&out.phi));
        mu.push(chemical_potential(params, &out.phi));
        phi.push(out.phi);
        sigma.push(out.sigma);
    }
    if max_curvature > params.stabilization {
        log::warn!(
            "stabilization S = {} is below max F'' = {} reached along the trajectory",
            params.stabilization,
            max_curvature
        );
    }
    Ok(StateTrajectory {
        grid: params.grid,
        tau: params.tau,
        phi,
        sigma,
        mu,
        diagnostics,
        initial_energy,
        max_curvature,
    })
}
