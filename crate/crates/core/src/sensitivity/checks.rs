//! Verification sweeps for the derivative and adjoint: dot-product
//! identities, Fréchet remainder decay, and Taylor tests on the reduced cost.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{adjoint_sweep, reduced_gradient, solve_adjoint, solve_linearized, StepJacobian};
use crate::error::Result;
use crate::forward::{simulate, ControlSchedule, StateTrajectory};
use crate::grid::{norm_h, Field, Grid};
use crate::model::ModelParams;
use crate::optimizer::{reduced_cost, trajectory_cost};
use crate::presets::{preset_field, Preset};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DotProductReport {
    /// Relative discrepancy of ⟨J x, y⟩ vs ⟨x, Jᵀ y⟩ for one step.
    pub single_step: f64,
    /// Same identity over the whole horizon.
    pub full_horizon: f64,
    /// (forward pairing, adjoint pairing) of the full-horizon test.
    pub pairings: (f64, f64),
}

impl DotProductReport {
    pub fn worst(&self) -> f64 {
        self.single_step.max(self.full_horizon)
    }
}

fn relative_gap(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

fn smooth_noise(grid: Grid, rng: &mut ChaCha8Rng, amplitude: f64, mean: f64) -> Result<Field> {
    let preset = Preset::FilteredNoise {
        seed: rng.gen(),
        amplitude,
        mean,
        kappa: 1.0,
        passes: 2,
    };
    preset_field(&preset, grid)
}

fn random_schedule(
    grid: Grid,
    n: usize,
    rng: &mut ChaCha8Rng,
    amplitude: f64,
) -> Result<ControlSchedule> {
    let levels = (0..n)
        .map(|_| smooth_noise(grid, rng, amplitude, 0.0))
        .collect::<Result<Vec<_>>>()?;
    ControlSchedule::new(levels)
}

/// Forward pairing Σₙ⟨ξⁿ, sⁿ⟩ + ⟨ξᴺ, p_T⟩ + ⟨ρᴺ, r_T⟩ and adjoint pairing
/// Σₙ τ⟨hⁿ, gⁿ⟩ for the given co-state data.
pub fn full_horizon_pairings(
    params: &ModelParams,
    base: &StateTrajectory,
    h: &ControlSchedule,
    terminal: (&Field, &Field),
    sources: &[Field],
) -> Result<(f64, f64)> {
    let lin = solve_linearized(params, base, h)?;
    let n = base.n_steps();
    let forward = (1..=n).map(|k| lin.xi[k].dot(&sources[k - 1])).sum::<f64>()
        + lin.xi[n].dot(terminal.0)
        + lin.rho[n].dot(terminal.1);
    let adj = adjoint_sweep(
        params,
        base,
        (terminal.0.clone(), terminal.1.clone()),
        sources,
    )?;
    let backward = (0..n)
        .map(|k| params.tau * h.level(k).dot(&adj.control[k]))
        .sum::<f64>();
    Ok((forward, backward))
}

/// Seeded single-step and full-horizon transpose identities on the grid of
/// `params` with `n_steps` steps.
pub fn dot_product_test(
    params: &ModelParams,
    n_steps: usize,
    seed: u64,
) -> Result<DotProductReport> {
    let grid = params.grid;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let phi0 = smooth_noise(grid, &mut rng, 0.8, 0.0)?;
    let sigma0 = smooth_noise(grid, &mut rng, 0.5, 0.5)?;
    let u = random_schedule(grid, n_steps, &mut rng, 0.5)?;
    let base = simulate(params, &phi0, &sigma0, &u)?;

    let jac = StepJacobian::new(params, &base.phi[0], &base.sigma[0])?;
    let x = smooth_noise(grid, &mut rng, 1.0, 0.0)?;
    let r = smooth_noise(grid, &mut rng, 1.0, 0.0)?;
    let h0 = smooth_noise(grid, &mut rng, 1.0, 0.0)?;
    let yp = smooth_noise(grid, &mut rng, 1.0, 0.0)?;
    let yr = smooth_noise(grid, &mut rng, 1.0, 0.0)?;
    let (ax, ar) = jac.apply(&x, &r, &h0)?;
    let (tx, tr, th) = jac.transpose(&yp, &yr)?;
    let single_step = relative_gap(
        ax.dot(&yp) + ar.dot(&yr),
        x.dot(&tx) + r.dot(&tr) + h0.dot(&th),
    );

    let h = random_schedule(grid, n_steps, &mut rng, 1.0)?;
    let terminal_p = smooth_noise(grid, &mut rng, 1.0, 0.0)?;
    let terminal_r = smooth_noise(grid, &mut rng, 1.0, 0.0)?;
    let sources = (0..n_steps)
        .map(|_| smooth_noise(grid, &mut rng, 1.0, 0.0))
        .collect::<Result<Vec<_>>>()?;
    let pairings = full_horizon_pairings(params, &base, &h, (&terminal_p, &terminal_r), &sources)?;
    Ok(DotProductReport {
        single_step,
        full_horizon: relative_gap(pairings.0, pairings.1),
        pairings,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub eps: f64,
    pub remainder: f64,
}

/// Local orders log(rᵢ/rᵢ₊₁)/log(εᵢ/εᵢ₊₁) between consecutive rows.
pub fn observed_orders(rows: &[SweepRow]) -> Vec<f64> {
    rows.windows(2)
        .map(|w| (w[0].remainder / w[1].remainder).ln() / (w[0].eps / w[1].eps).ln())
        .collect()
}

/// Least-squares slope of log(remainder) against log(ε).
pub fn fitted_slope(rows: &[SweepRow]) -> f64 {
    let n = rows.len() as f64;
    let xs: Vec<f64> = rows.iter().map(|r| r.eps.ln()).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.remainder.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// max over levels of ‖S(u + εh) − S(u) − ε·DS(u)h‖, with S = (φ, σ).
pub fn state_remainder_sweep(
    params: &ModelParams,
    phi0: &Field,
    sigma0: &Field,
    u: &ControlSchedule,
    h: &ControlSchedule,
    eps: &[f64],
) -> Result<Vec<SweepRow>> {
    let base = simulate(params, phi0, sigma0, u)?;
    let lin = solve_linearized(params, &base, h)?;
    eps.iter()
        .map(|&e| {
            let pert = simulate(params, phi0, sigma0, &u.axpy(e, h))?;
            let remainder = (0..=base.n_steps())
                .map(|n| {
                    let dphi = pert.phi[n].sub(&base.phi[n]).axpy(-e, &lin.xi[n]);
                    let dsig = pert.sigma[n].sub(&base.sigma[n]).axpy(-e, &lin.rho[n]);
                    (norm_h(&dphi).powi(2) + norm_h(&dsig).powi(2)).sqrt()
                })
                .fold(0.0, f64::max);
            Ok(SweepRow { eps: e, remainder })
        })
        .collect()
}

/// |J̃(u + εh) − J̃(u) − ε⟨g, h⟩_{L²(Q)}| with g from the adjoint.
pub fn cost_taylor_sweep(
    params: &ModelParams,
    phi0: &Field,
    sigma0: &Field,
    u: &ControlSchedule,
    h: &ControlSchedule,
    eps: &[f64],
) -> Result<Vec<SweepRow>> {
    let base = simulate(params, phi0, sigma0, u)?;
    let cost = trajectory_cost(params, &base, u);
    let adj = solve_adjoint(params, &base)?;
    let slope = reduced_gradient(params, u, &adj)?.inner(h, params.tau);
    eps.iter()
        .map(|&e| {
            let shifted = reduced_cost(params, phi0, sigma0, &u.axpy(e, h))?;
            Ok(SweepRow {
                eps: e,
                remainder: (shifted - cost - e * slope).abs(),
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DirectionalCheck {
    /// Central difference (J̃(u + εh) − J̃(u − εh)) / 2ε.
    pub finite_difference: f64,
    /// ⟨g, h⟩_{L²(Q)} from the adjoint gradient.
    pub adjoint: f64,
    pub relative_error: f64,
}

pub fn directional_derivative_check(
    params: &ModelParams,
    phi0: &Field,
    sigma0: &Field,
    u: &ControlSchedule,
    h: &ControlSchedule,
    eps: f64,
) -> Result<DirectionalCheck> {
    let base = simulate(params, phi0, sigma0, u)?;
    let adj = solve_adjoint(params, &base)?;
    let adjoint = reduced_gradient(params, u, &adj)?.inner(h, params.tau);
    let plus = reduced_cost(params, phi0, sigma0, &u.axpy(eps, h))?;
    let minus = reduced_cost(params, phi0, sigma0, &u.axpy(-eps, h))?;
    let finite_difference = (plus - minus) / (2.0 * eps);
    Ok(DirectionalCheck {
        finite_difference,
        adjoint,
        relative_error: (finite_difference - adjoint).abs() / adjoint.abs(),
    })
}
