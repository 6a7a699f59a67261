//! Exact derivative of the discrete control-to-state map and its transpose.
//!
//! The linearized recursion is the Jacobian of [`crate::forward::step`]; the
//! adjoint recursion is its transpose with respect to the H inner product
//! (discretize-then-optimize). In the limit τ, h → 0 they become the
//! linearized system for (ξ, η, ρ) and the backward adjoint system for
//! (p, q, r):
//!
//! ```text
//! ∂tξ − Δη = P′(φ̄)(σ̄ − μ̄)ξ + P(φ̄)(ρ − η),   η = −Δξ + F″(φ̄)ξ,
//! ∂tρ − Δρ = −P′(φ̄)(σ̄ − μ̄)ξ − P(φ̄)(ρ − η) + h,
//!
//! −∂tp + Δq − F″(φ̄)q + P′(φ̄)(σ̄ − μ̄)(r − p) = β_Q(φ̄ − φ_Q),
//! q − Δp + P(φ̄)(p − r) = 0,
//! −∂tr − Δr + P(φ̄)(r − p) = 0,   r(T) = 0,  p(T) = β_Ω(φ̄(T) − φ_Ω).
//! ```
//!
//! Correspondence of discrete channels: `p` is the co-state of φ, `r` the
//! co-state of σ, and q (the co-state of μ) is eliminated algebraically, as is
//! η on the linearized side. The control sensitivity of step n is N⁻¹rⁿ⁺¹,
//! which tends to r(tₙ); it is stored per step as [`AdjointTrajectory::control`].

mod checks;

pub use checks::{
    cost_taylor_sweep, directional_derivative_check, dot_product_test, fitted_slope,
    full_horizon_pairings, observed_orders, state_remainder_sweep, DirectionalCheck,
    DotProductReport, SweepRow,
};

use crate::error::{Error, Result};
use crate::forward::{chemical_potential, ControlSchedule, StateTrajectory, StepOperators};
use crate::grid::{neumann_laplacian, Field};
use crate::model::ModelParams;

/// Frozen coefficients of the one-step Jacobian at a base level (φ̄ⁿ, σ̄ⁿ).
#[derive(Debug, Clone)]
pub struct StepJacobian {
    ops: StepOperators,
    tau: f64,
    stabilization: f64,
    /// F″(φ̄)
    curvature: Field,
    /// P(φ̄)
    rate: Field,
    /// P′(φ̄)(σ̄ − μ̃)
    rate_slope_gap: Field,
}

impl StepJacobian {
    pub fn new(params: &ModelParams, phi: &Field, sigma: &Field) -> Result<Self> {
        params.grid.check_same(phi.grid())?;
        params.grid.check_same(sigma.grid())?;
        let mu = chemical_potential(params, phi);
        Ok(Self::from_level(params, phi, sigma, &mu))
    }

    fn from_level(params: &ModelParams, phi: &Field, sigma: &Field, mu: &Field) -> Self {
        let f = &params.potential;
        let p = &params.proliferation;
        Self {
            ops: StepOperators::new(params),
            tau: params.tau,
            stabilization: params.stabilization,
            curvature: phi.map(|x| f.second(x)),
            rate: phi.map(|x| p.value(x)),
            rate_slope_gap: phi.zip_map(&sigma.sub(mu), |x, gap| p.slope(x) * gap),
        }
    }

    /// η = −Δξ + F″(φ̄)ξ
    pub fn eta(&self, xi: &Field) -> Field {
        self.curvature.mul(xi).sub(&neumann_laplacian(xi))
    }

    /// (ξⁿ, ρⁿ, hⁿ) ↦ (ξⁿ⁺¹, ρⁿ⁺¹)
    pub fn apply(&self, xi: &Field, rho: &Field, h: &Field) -> Result<(Field, Field)> {
        let tau = self.tau;
        let eta = self.eta(xi);
        let d_reaction = self
            .rate_slope_gap
            .mul(xi)
            .add(&self.rate.mul(&rho.sub(&eta)));
        let explicit = self.curvature.mul(xi).axpy(-self.stabilization, xi);
        let rhs_xi = xi
            .axpy(tau, &neumann_laplacian(&explicit))
            .axpy(tau, &d_reaction);
        let rhs_rho = rho.axpy(tau, &h.sub(&d_reaction));
        Ok((
            self.ops.solve_phi(&rhs_xi)?,
            self.ops.solve_sigma(&rhs_rho)?,
        ))
    }

    /// Transpose of [`Self::apply`]: (p, r) ↦ (ξ̄, ρ̄, h̄) with
    /// ⟨apply(ξ, ρ, h), (p, r)⟩ = ⟨ξ, ξ̄⟩ + ⟨ρ, ρ̄⟩ + ⟨h, h̄⟩.
    pub fn transpose(&self, p: &Field, r: &Field) -> Result<(Field, Field, Field)> {
        let tau = self.tau;
        let a = self.ops.solve_phi(p)?;
        let b = self.ops.solve_sigma(r)?;
        let w = a.sub(&b).scale(tau);
        let v = self.rate.mul(&w);
        let lap_a = neumann_laplacian(&a);
        let xi_bar = a
            .add(
                &self
                    .curvature
                    .mul(&lap_a)
                    .axpy(-self.stabilization, &lap_a)
                    .scale(tau),
            )
            .add(&self.rate_slope_gap.mul(&w))
            .add(&neumann_laplacian(&v))
            .sub(&self.curvature.mul(&v));
        let rho_bar = b.add(&v);
        let h_bar = b.scale(tau);
        Ok((xi_bar, rho_bar, h_bar))
    }
}

/// One step of the linearized recursion at base level (φ̄ⁿ, σ̄ⁿ).
pub fn linearized_step(
    params: &ModelParams,
    base: (&Field, &Field),
    direction: (&Field, &Field),
    h: &Field,
) -> Result<(Field, Field)> {
    StepJacobian::new(params, base.0, base.1)?.apply(direction.0, direction.1, h)
}

/// One backward step of the adjoint recursion.
///
/// `source` is added to the incoming p-channel before transposing (the
/// tracking term of level n+1). Returns (pⁿ, rⁿ, control sensitivity of step n).
pub fn adjoint_step(
    params: &ModelParams,
    base: (&Field, &Field),
    incoming: (&Field, &Field),
    source: Option<&Field>,
) -> Result<(Field, Field, Field)> {
    let jac = StepJacobian::new(params, base.0, base.1)?;
    let p_in = match source {
        Some(s) => incoming.0.add(s),
        None => incoming.0.clone(),
    };
    let (p, r, h_bar) = jac.transpose(&p_in, incoming.1)?;
    Ok((p, r, h_bar.scale(1.0 / params.tau)))
}

/// (ξⁿ, ρⁿ) for n = 0..=N; η is derived on demand.
#[derive(Debug, Clone)]
pub struct LinearizedTrajectory {
    pub xi: Vec<Field>,
    pub rho: Vec<Field>,
}

impl LinearizedTrajectory {
    /// ηⁿ = −Δξⁿ + F″(φ̄ⁿ)ξⁿ
    pub fn eta(&self, params: &ModelParams, base: &StateTrajectory, n: usize) -> Field {
        let f = &params.potential;
        base.phi[n]
            .map(|x| f.second(x))
            .mul(&self.xi[n])
            .sub(&neumann_laplacian(&self.xi[n]))
    }
}

fn check_horizon(base: &StateTrajectory, len: usize) -> Result<()> {
    if base.n_steps() != len {
        return Err(Error::usage(format!(
            "direction has {len} levels, trajectory has {} steps",
            base.n_steps()
        )));
    }
    Ok(())
}

/// Directional derivative of the control-to-state map at `base` along `h`,
/// from zero initial data.
pub fn solve_linearized(
    params: &ModelParams,
    base: &StateTrajectory,
    h: &ControlSchedule,
) -> Result<LinearizedTrajectory> {
    check_horizon(base, h.len())?;
    let grid = params.grid;
    let mut xi = vec![Field::zeros(grid)];
    let mut rho = vec![Field::zeros(grid)];
    for n in 0..h.len() {
        let jac = StepJacobian::from_level(params, &base.phi[n], &base.sigma[n], &base.mu[n]);
        let (x, r) = jac
            .apply(&xi[n], &rho[n], h.level(n))
            .map_err(|e| e.at_step(n))?;
        xi.push(x);
        rho.push(r);
    }
    Ok(LinearizedTrajectory { xi, rho })
}

/// (pⁿ, rⁿ) for n = 0..=N plus the per-step control sensitivity; q is derived.
#[derive(Debug, Clone)]
pub struct AdjointTrajectory {
    pub p: Vec<Field>,
    pub r: Vec<Field>,
    /// `control[n]` is the L²(Q) gradient of the state-dependent cost terms
    /// with respect to uⁿ.
    pub control: Vec<Field>,
}

impl AdjointTrajectory {
    /// qⁿ = Δpⁿ − P(φ̄ⁿ)(pⁿ − rⁿ)
    pub fn q(&self, params: &ModelParams, base: &StateTrajectory, n: usize) -> Field {
        let p = &params.proliferation;
        let gap = self.p[n].sub(&self.r[n]);
        neumann_laplacian(&self.p[n]).sub(&base.phi[n].zip_map(&gap, |x, g| p.value(x) * g))
    }

    pub fn n_steps(&self) -> usize {
        self.control.len()
    }
}

/// Backward sweep from terminal co-state data with p-channel sources.
///
/// `sources[n − 1]` is injected at level n (n = 1..=N); terminal data sits
/// at level N.
pub fn adjoint_sweep(
    params: &ModelParams,
    base: &StateTrajectory,
    terminal: (Field, Field),
    sources: &[Field],
) -> Result<AdjointTrajectory> {
    let n_steps = base.n_steps();
    if sources.len() != n_steps {
        return Err(Error::usage(format!(
            "need {n_steps} source levels, got {}",
            sources.len()
        )));
    }
    let mut p = vec![Field::zeros(params.grid); n_steps + 1];
    let mut r = p.clone();
    let mut control = vec![Field::zeros(params.grid); n_steps];
    p[n_steps] = terminal.0;
    r[n_steps] = terminal.1;
    for n in (0..n_steps).rev() {
        let jac = StepJacobian::from_level(params, &base.phi[n], &base.sigma[n], &base.mu[n]);
        let p_in = p[n + 1].add(&sources[n]);
        let (pn, rn, h_bar) = jac.transpose(&p_in, &r[n + 1]).map_err(|e| e.at_step(n))?;
        p[n] = pn;
        r[n] = rn;
        control[n] = h_bar.scale(1.0 / params.tau);
    }
    Ok(AdjointTrajectory { p, r, control })
}

/// Adjoint of the reduced cost: terminal data (β_Ω(φ̄ᴺ − φ_Ω), 0) and tracking
/// sources τ·β_Q(φ̄ⁿ − φ_Qⁿ) at every level n ≥ 1.
pub fn solve_adjoint(params: &ModelParams, base: &StateTrajectory) -> Result<AdjointTrajectory> {
    let w = &params.weights;
    let n_steps = base.n_steps();
    let terminal_p = base.phi[n_steps].sub(&params.phi_omega).scale(w.beta_omega);
    let sources: Vec<Field> = (1..=n_steps)
        .map(|n| {
            base.phi[n]
                .sub(params.phi_q.at(n))
                .scale(params.tau * w.beta_q)
        })
        .collect();
    adjoint_sweep(
        params,
        base,
        (terminal_p, Field::zeros(params.grid)),
        &sources,
    )
}

/// gⁿ = β_u·uⁿ + (control sensitivity)ⁿ, the L²(Q) gradient of the reduced cost.
pub fn reduced_gradient(
    params: &ModelParams,
    u: &ControlSchedule,
    adjoint: &AdjointTrajectory,
) -> Result<ControlSchedule> {
    if u.len() != adjoint.n_steps() {
        return Err(Error::usage(format!(
            "control has {} levels, adjoint has {}",
            u.len(),
            adjoint.n_steps()
        )));
    }
    let beta_u = params.weights.beta_u;
    Ok(u.map_levels(|n, un| adjoint.control[n].axpy(beta_u, un)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forward::{simulate, step};
    use crate::grid::{norm_h, Grid};
    use crate::model::CostWeights;
    use crate::presets::{preset_field, Preset};

    fn setup(n: usize) -> (ModelParams, Field, Field) {
        let g = Grid::new_1d(n, n as f64 * 0.5).unwrap();
        let p = ModelParams::new(g);
        let phi = preset_field(
            &Preset::FilteredNoise {
                seed: 3,
                amplitude: 0.8,
                mean: 0.1,
                kappa: 1.0,
                passes: 2,
            },
            g,
        )
        .unwrap();
        let sigma = preset_field(
            &Preset::FilteredNoise {
                seed: 4,
                amplitude: 0.5,
                mean: 0.4,
                kappa: 1.0,
                passes: 2,
            },
            g,
        )
        .unwrap();
        (p, phi, sigma)
    }

    fn noise(g: Grid, seed: u64) -> Field {
        preset_field(&Preset::noise(seed, 1.0), g).unwrap()
    }

    #[test]
    fn zero_direction_maps_to_zero() {
        let (p, phi, sigma) = setup(16);
        let z = Field::zeros(p.grid);
        let (a, b) = linearized_step(&p, (&phi, &sigma), (&z, &z), &z).unwrap();
        assert_eq!(a.max_abs(), 0.0);
        assert_eq!(b.max_abs(), 0.0);
    }

    #[test]
    fn linearized_step_is_homogeneous() {
        let (p, phi, sigma) = setup(16);
        let g = p.grid;
        let (x, r, h) = (noise(g, 10), noise(g, 11), noise(g, 12));
        let (a1, b1) = linearized_step(&p, (&phi, &sigma), (&x, &r), &h).unwrap();
        let (a2, b2) = linearized_step(
            &p,
            (&phi, &sigma),
            (&x.scale(2.0), &r.scale(2.0)),
            &h.scale(2.0),
        )
        .unwrap();
        assert!(norm_h(&a2.sub(&a1.scale(2.0))) <= 1e-11 * norm_h(&a1));
        assert!(norm_h(&b2.sub(&b1.scale(2.0))) <= 1e-11 * norm_h(&b1));
    }

    #[test]
    fn linearized_step_matches_central_differences() {
        let (mut p, phi, sigma) = setup(16);
        p.solver.cg_tol = 1e-14;
        let g = p.grid;
        let u = noise(g, 20);
        let (x, r, h) = (noise(g, 21), noise(g, 22), noise(g, 23));
        let eps = 1e-5;
        let (pp, sp) = step(
            &p,
            &phi.axpy(eps, &x),
            &sigma.axpy(eps, &r),
            &u.axpy(eps, &h),
        )
        .unwrap();
        let (pm, sm) = step(
            &p,
            &phi.axpy(-eps, &x),
            &sigma.axpy(-eps, &r),
            &u.axpy(-eps, &h),
        )
        .unwrap();
        let fd_phi = pp.sub(&pm).scale(0.5 / eps);
        let fd_sigma = sp.sub(&sm).scale(0.5 / eps);
        let (a, b) = linearized_step(&p, (&phi, &sigma), (&x, &r), &h).unwrap();
        assert!(norm_h(&a.sub(&fd_phi)) <= 1e-5 * norm_h(&a));
        assert!(norm_h(&b.sub(&fd_sigma)) <= 1e-5 * norm_h(&b));
    }

    #[test]
    fn adjoint_step_zero_in_zero_out() {
        let (p, phi, sigma) = setup(16);
        let z = Field::zeros(p.grid);
        let (a, b, c) = adjoint_step(&p, (&phi, &sigma), (&z, &z), None).unwrap();
        assert_eq!(a.max_abs() + b.max_abs() + c.max_abs(), 0.0);
    }

    #[test]
    fn single_step_transpose_identity() {
        let (p, phi, sigma) = setup(16);
        let g = p.grid;
        let jac = StepJacobian::new(&p, &phi, &sigma).unwrap();
        let (x, r, h) = (noise(g, 1), noise(g, 2), noise(g, 3));
        let (yp, yr) = (noise(g, 4), noise(g, 5));
        let (ax, ar) = jac.apply(&x, &r, &h).unwrap();
        let lhs = ax.dot(&yp) + ar.dot(&yr);
        let (tx, tr, th) = jac.transpose(&yp, &yr).unwrap();
        let rhs = x.dot(&tx) + r.dot(&tr) + h.dot(&th);
        assert!(
            (lhs - rhs).abs() <= 1e-11 * lhs.abs().max(rhs.abs()),
            "{lhs} vs {rhs}"
        );
    }

    #[test]
    fn zero_weights_give_zero_adjoint() {
        let (mut p, phi, sigma) = setup(8);
        p.weights = CostWeights::new(0.0, 0.0, 1.0);
        let u = ControlSchedule::repeat(noise(p.grid, 9), 5);
        let base = simulate(&p, &phi, &sigma, &u).unwrap();
        let adj = solve_adjoint(&p, &base).unwrap();
        assert!(adj
            .p
            .iter()
            .chain(&adj.r)
            .chain(&adj.control)
            .all(|f| f.max_abs() == 0.0));
        let g = reduced_gradient(&p, &u, &adj).unwrap();
        assert_eq!(g, u);
    }

    #[test]
    fn terminal_match_gives_zero_adjoint() {
        let (mut p, phi, sigma) = setup(8);
        p.weights = CostWeights::new(0.0, 1.0, 0.0);
        let u = ControlSchedule::constant(p.grid, 4, 0.2);
        let base = simulate(&p, &phi, &sigma, &u).unwrap();
        p.phi_omega = base.phi[4].clone();
        let adj = solve_adjoint(&p, &base).unwrap();
        assert!(adj.p.iter().chain(&adj.r).all(|f| f.max_abs() == 0.0));
        assert_eq!(adj.r[4].max_abs(), 0.0);
    }

    #[test]
    fn linearized_trajectory_starts_at_zero_and_is_linear() {
        let (p, phi, sigma) = setup(16);
        let g = p.grid;
        let u = ControlSchedule::repeat(noise(g, 30), 6);
        let base = simulate(&p, &phi, &sigma, &u).unwrap();
        let h1 = ControlSchedule::new((0..6).map(|k| noise(g, 40 + k)).collect()).unwrap();
        let h2 = ControlSchedule::new((0..6).map(|k| noise(g, 50 + k)).collect()).unwrap();
        let alpha = -1.3;
        let l1 = solve_linearized(&p, &base, &h1).unwrap();
        let l2 = solve_linearized(&p, &base, &h2).unwrap();
        let l12 = solve_linearized(&p, &base, &h1.scale(alpha).axpy(1.0, &h2)).unwrap();
        assert_eq!(l1.xi[0].max_abs() + l1.rho[0].max_abs(), 0.0);
        for n in 0..=6 {
            let want = l1.xi[n].scale(alpha).add(&l2.xi[n]);
            assert!(norm_h(&l12.xi[n].sub(&want)) <= 1e-11 * (1.0 + norm_h(&want)));
        }
        let zero = solve_linearized(&p, &base, &h1.scale(0.0)).unwrap();
        assert!(zero.xi.iter().all(|f| f.max_abs() == 0.0));
    }
}
