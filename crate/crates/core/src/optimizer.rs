//! Reduced cost, box projection, projected-gradient descent with Armijo
//! backtracking, and first-order optimality reporting.

use std::fmt;

use crate::error::{Error, Result};
use crate::forward::{simulate, ControlSchedule, StateTrajectory};
use crate::grid::{norm_h, Field};
use crate::model::{ControlBounds, ModelParams};
use crate::sensitivity::{reduced_gradient, solve_adjoint, AdjointTrajectory};

/// J̃ evaluated on an already computed trajectory: right-endpoint quadrature
/// for the tracking term, left-endpoint for the control term.
pub fn trajectory_cost(params: &ModelParams, traj: &StateTrajectory, u: &ControlSchedule) -> f64 {
    let w = &params.weights;
    let tau = params.tau;
    let n = traj.n_steps();
    let tracking: f64 = (1..=n)
        .map(|k| norm_h(&traj.phi[k].sub(params.phi_q.at(k))).powi(2))
        .sum();
    let terminal = norm_h(&traj.phi[n].sub(&params.phi_omega)).powi(2);
    let control: f64 = u.levels().iter().map(|f| norm_h(f).powi(2)).sum();
    0.5 * w.beta_q * tau * tracking + 0.5 * w.beta_omega * terminal + 0.5 * w.beta_u * tau * control
}

/// J̃(u) = J(S(u), u). Inadmissible controls are accepted.
pub fn reduced_cost(
    params: &ModelParams,
    phi0: &Field,
    sigma0: &Field,
    u: &ControlSchedule,
) -> Result<f64> {
    let traj = simulate(params, phi0, sigma0, u)?;
    Ok(trajectory_cost(params, &traj, u))
}

/// Cellwise clamp of every level into the box.
pub fn project(u: &ControlSchedule, bounds: &ControlBounds) -> ControlSchedule {
    u.map_levels(|_, f| bounds.clamp(f))
}

pub fn is_admissible(u: &ControlSchedule, bounds: &ControlBounds) -> bool {
    u.levels().iter().all(|f| bounds.contains(f))
}

/// ‖u − P(u − g)‖_{L²(Q)}; zero exactly at stationary points.
pub fn stationarity(
    u: &ControlSchedule,
    gradient: &ControlSchedule,
    bounds: &ControlBounds,
    tau: f64,
) -> f64 {
    u.sub(&project(&u.axpy(-1.0, gradient), bounds)).norm(tau)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimOptions {
    pub max_iters: usize,
    pub tol: f64,
    pub armijo_c: f64,
    pub alpha0: f64,
    pub alpha_shrink: f64,
    pub max_halvings: usize,
}

impl Default for OptimOptions {
    fn default() -> Self {
        Self {
            max_iters: 200,
            tol: 1e-8,
            armijo_c: 1e-4,
            alpha0: 1.0,
            alpha_shrink: 0.5,
            max_halvings: 60,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    ToleranceMet,
    MaxIters,
    LineSearchFailed,
}

impl fmt::Display for Termination {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Termination::ToleranceMet => "tolerance_met",
            Termination::MaxIters => "max_iters",
            Termination::LineSearchFailed => "line_search_failed",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationRecord {
    pub iteration: usize,
    pub cost: f64,
    /// Step length accepted to reach this iterate (0 for the start).
    pub step: f64,
    pub stationarity: f64,
    pub gradient_norm: f64,
}

#[derive(Debug, Clone)]
pub struct OptimResult {
    pub control: ControlSchedule,
    pub trajectory: StateTrajectory,
    pub adjoint: AdjointTrajectory,
    /// One entry per accepted iterate, including the start.
    pub history: Vec<IterationRecord>,
    pub kkt_residual: f64,
    pub iterations: usize,
    pub termination: Termination,
}

impl OptimResult {
    pub fn cost_history(&self) -> Vec<f64> {
        self.history.iter().map(|r| r.cost).collect()
    }

    pub fn gradient_norm_history(&self) -> Vec<f64> {
        self.history.iter().map(|r| r.gradient_norm).collect()
    }

    pub fn final_cost(&self) -> f64 {
        self.history.last().map_or(f64::NAN, |r| r.cost)
    }
}

fn validate_options(opts: &OptimOptions) -> Result<()> {
    if !(opts.tol > 0.0) {
        return Err(Error::usage("optimizer tol must be positive"));
    }
    if !(opts.armijo_c > 0.0 && opts.armijo_c < 1.0) {
        return Err(Error::usage("armijo_c must lie in (0, 1)"));
    }
    if !(opts.alpha0 > 0.0) {
        return Err(Error::usage("alpha0 must be positive"));
    }
    if !(opts.alpha_shrink > 0.0 && opts.alpha_shrink < 1.0) {
        return Err(Error::usage("alpha_shrink must lie in (0, 1)"));
    }
    Ok(())
}

/// Projected gradient descent u⁺ = P(u − αg) with Armijo backtracking
/// J̃(u⁺) ≤ J̃(u) − (c/α)‖u⁺ − u‖², stopping when ‖u − P(u − g)‖ ≤ tol.
/// The step length is warm-started from the last accepted one. `observer`
/// sees every accepted iterate.
pub fn projected_gradient(
    params: &ModelParams,
    phi0: &Field,
    sigma0: &Field,
    u0: &ControlSchedule,
    opts: &OptimOptions,
    mut observer: impl FnMut(&IterationRecord, &ControlSchedule),
) -> Result<OptimResult> {
    validate_options(opts)?;
    let bounds = &params.bounds;
    let tau = params.tau;
    let mut u = project(u0, bounds);
    let mut traj = simulate(params, phi0, sigma0, &u)?;
    let mut cost = trajectory_cost(params, &traj, &u);
    let mut alpha = opts.alpha0;
    let mut step = 0.0;
    let mut history = Vec::new();
    let mut iteration = 0;

    loop {
        let adjoint = solve_adjoint(params, &traj)?;
        let gradient = reduced_gradient(params, &u, &adjoint)?;
        let stat = stationarity(&u, &gradient, bounds, tau);
        let record = IterationRecord {
            iteration,
            cost,
            step,
            stationarity: stat,
            gradient_norm: gradient.norm(tau),
        };
        observer(&record, &u);
        history.push(record);

        let termination = if stat <= opts.tol {
            Some(Termination::ToleranceMet)
        } else if iteration >= opts.max_iters {
            Some(Termination::MaxIters)
        } else {
            None
        };
        if let Some(termination) = termination {
            return Ok(OptimResult {
                control: u,
                trajectory: traj,
                adjoint,
                history,
                kkt_residual: stat,
                iterations: iteration,
                termination,
            });
        }

        let mut accepted = None;
        for _ in 0..=opts.max_halvings {
            let trial = project(&u.axpy(-alpha, &gradient), bounds);
            let moved = trial.sub(&u).norm(tau).powi(2);
            match simulate(params, phi0, sigma0, &trial) {
                Ok(trial_traj) => {
                    let trial_cost = trajectory_cost(params, &trial_traj, &trial);
                    if moved > 0.0 && trial_cost <= cost - opts.armijo_c / alpha * moved {
                        accepted = Some((trial, trial_traj, trial_cost));
                        break;
                    }
                }
                // Too long a step can blow up the state; shorter ones may not.
                Err(e) if e.is_numerical() => {}
                Err(e) => return Err(e),
            }
            alpha *= opts.alpha_shrink;
        }
        match accepted {
            Some((trial, trial_traj, trial_cost)) => {
                u = trial;
                traj = trial_traj;
                cost = trial_cost;
                step = alpha;
                iteration += 1;
            }
            None => {
                return Ok(OptimResult {
                    control: u,
                    trajectory: traj,
                    adjoint,
                    history,
                    kkt_residual: stat,
                    iterations: iteration,
                    termination: Termination::LineSearchFailed,
                })
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundClass {
    Interior,
    AtLower,
    AtUpper,
    /// u_min = u_max; any multiplier sign is admissible.
    Pinned,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KktViolation {
    pub level: usize,
    pub cell: usize,
    pub class: BoundClass,
    /// β_u·u + r at the offending point.
    pub multiplier: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KktReport {
    pub interior: usize,
    pub at_lower: usize,
    pub at_upper: usize,
    pub violations: Vec<KktViolation>,
    /// Largest amount by which a sign or zero condition is missed.
    pub worst: f64,
    /// max |u − P(−r/β_u)|, when β_u > 0.
    pub projection_residual: Option<f64>,
    /// ‖u − P(u − g)‖_{L²(Q)}
    pub stationarity: f64,
    pub note: Option<String>,
}

impl fmt::Display for KktReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "kkt interior={} at_lower={} at_upper={} violations={} worst={:e} stationarity={:e}",
            self.interior,
            self.at_lower,
            self.at_upper,
            self.violations.len(),
            self.worst,
            self.stationarity
        )?;
        match self.projection_residual {
            Some(p) => write!(f, " projection_residual={p:e}"),
            None => write!(
                f,
                " projection_residual=skipped note=\"{}\"",
                self.note.as_deref().unwrap_or("")
            ),
        }
    }
}

/// Pointwise first-order conditions: with m = β_u·u + r, interior points
/// need |m| ≤ tol, lower-bound points m ≥ −tol, upper-bound points m ≤ tol.
/// Points exactly on a bound count as on the bound.
pub fn kkt_report(
    params: &ModelParams,
    u: &ControlSchedule,
    adjoint: &AdjointTrajectory,
    tol: f64,
) -> Result<KktReport> {
    let gradient = reduced_gradient(params, u, adjoint)?;
    let bounds = &params.bounds;
    let beta_u = params.weights.beta_u;
    let lower = bounds.lower.values();
    let upper = bounds.upper.values();
    let mut report = KktReport {
        interior: 0,
        at_lower: 0,
        at_upper: 0,
        violations: Vec::new(),
        worst: 0.0,
        projection_residual: None,
        stationarity: stationarity(u, &gradient, bounds, params.tau),
        note: None,
    };
    let mut projection_residual: f64 = 0.0;
    for (level, (un, gn)) in u.levels().iter().zip(gradient.levels()).enumerate() {
        for (cell, (&x, &m)) in un.values().iter().zip(gn.values()).enumerate() {
            let (lo, hi) = (lower[cell], upper[cell]);
            let (class, miss) = if lo == hi {
                (BoundClass::Pinned, 0.0)
            } else if x <= lo {
                report.at_lower += 1;
                (BoundClass::AtLower, (-m).max(0.0))
            } else if x >= hi {
                report.at_upper += 1;
                (BoundClass::AtUpper, m.max(0.0))
            } else {
                report.interior += 1;
                (BoundClass::Interior, m.abs())
            };
            report.worst = report.worst.max(miss);
            if miss > tol {
                report.violations.push(KktViolation {
                    level,
                    cell,
                    class,
                    multiplier: m,
                });
            }
            if beta_u > 0.0 {
                let r = adjoint.control[level].values()[cell];
                let formula = lo.max((-r / beta_u).min(hi));
                projection_residual = projection_residual.max((x - formula).abs());
            }
        }
    }
    if beta_u > 0.0 {
        report.projection_residual = Some(projection_residual);
    } else {
        report.note = Some("beta_u = 0: projection formula needs beta_u > 0".into());
    }
    Ok(report)
}
