//! Empirical Lipschitz constants of the control-to-state map.

use crate::error::{Error, Result};
use crate::forward::{simulate, ControlSchedule, StateTrajectory};
use crate::grid::{norm_h, norm_v, Field};
use crate::model::ModelParams;

/// Difference norms of two trajectories and their ratios to ‖u₁ − u₂‖_{L²(Q)}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityReport {
    pub control_distance: f64,
    /// max over levels of ‖φ₁ⁿ − φ₂ⁿ‖_H
    pub phi_linf_h: f64,
    /// (Σₙ τ‖φ₁ⁿ − φ₂ⁿ‖²_V)^½ over n = 1..N
    pub phi_l2_v: f64,
    pub sigma_linf_h: f64,
    pub sigma_l2_v: f64,
}

impl StabilityReport {
    /// [φ L∞(H), φ L²(V), σ L∞(H), σ L²(V)] divided by the control distance;
    /// all zero when the controls coincide.
    pub fn ratios(&self) -> [f64; 4] {
        let d = self.control_distance;
        let r = |x: f64| if d == 0.0 { 0.0 } else { x / d };
        [
            r(self.phi_linf_h),
            r(self.phi_l2_v),
            r(self.sigma_linf_h),
            r(self.sigma_l2_v),
        ]
    }
}

fn linf_h(a: &[Field], b: &[Field]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| norm_h(&x.sub(y)))
        .fold(0.0, f64::max)
}

fn l2_v(a: &[Field], b: &[Field], tau: f64) -> f64 {
    a.iter()
        .zip(b)
        .skip(1)
        .map(|(x, y)| tau * norm_v(&x.sub(y)).powi(2))
        .sum::<f64>()
        .sqrt()
}

pub fn compare_trajectories(
    a: &StateTrajectory,
    b: &StateTrajectory,
    u1: &ControlSchedule,
    u2: &ControlSchedule,
) -> StabilityReport {
    let tau = a.tau;
    StabilityReport {
        control_distance: u1.sub(u2).norm(tau),
        phi_linf_h: linf_h(&a.phi, &b.phi),
        phi_l2_v: l2_v(&a.phi, &b.phi, tau),
        sigma_linf_h: linf_h(&a.sigma, &b.sigma),
        sigma_l2_v: l2_v(&a.sigma, &b.sigma, tau),
    }
}

/// Simulates both controls from the same initial data and compares.
pub fn lipschitz_probe(
    params: &ModelParams,
    phi0: &Field,
    sigma0: &Field,
    u1: &ControlSchedule,
    u2: &ControlSchedule,
) -> Result<StabilityReport> {
    if u1.len() != u2.len() {
        return Err(Error::usage(format!(
            "control schedules differ in length: {} vs {}",
            u1.len(),
            u2.len()
        )));
    }
    u1.grid().check_same(u2.grid())?;
    let a = simulate(params, phi0, sigma0, u1)?;
    let b = simulate(params, phi0, sigma0, u2)?;
    Ok(compare_trajectories(&a, &b, u1, u2))
}

/// Probes u₂ = u₁ + εh for each ε, reusing the base trajectory.
pub fn lipschitz_sweep(
    params: &ModelParams,
    phi0: &Field,
    sigma0: &Field,
    u1: &ControlSchedule,
    h: &ControlSchedule,
    eps: &[f64],
) -> Result<Vec<(f64, StabilityReport)>> {
    let base = simulate(params, phi0, sigma0, u1)?;
    eps.iter()
        .map(|&e| {
            let u2 = u1.axpy(e, h);
            let pert = simulate(params, phi0, sigma0, &u2)?;
            Ok((e, compare_trajectories(&base, &pert, u1, &u2)))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;

    #[test]
    fn identical_controls_give_zero() {
        let g = Grid::new_1d(16, 8.0).unwrap();
        let p = ModelParams::new(g);
        let u = ControlSchedule::constant(g, 5, 0.2);
        let phi0 = Field::from_fn(g, |x, _| (0.4 * x).cos());
        let r = lipschitz_probe(&p, &phi0, &Field::constant(g, 0.5), &u, &u).unwrap();
        assert_eq!(r.control_distance, 0.0);
        assert_eq!(r.ratios(), [0.0; 4]);
    }

    #[test]
    fn length_mismatch_is_error() {
        let g = Grid::new_1d(8, 4.0).unwrap();
        let p = ModelParams::new(g);
        let a = ControlSchedule::constant(g, 3, 0.0);
        let b = ControlSchedule::constant(g, 4, 0.0);
        let z = Field::zeros(g);
        assert!(lipschitz_probe(&p, &z, &z, &a, &b).is_err());
    }

    #[test]
    fn uniform_shift_on_sigma_only() {
        // With P ≡ 0 nothing couples back to φ and σ just accumulates τ·c per step.
        let g = Grid::new_1d(8, 4.0).unwrap();
        let mut p = ModelParams::new(g);
        p.proliferation = crate::model::ProliferationSpec::Quadratic { p0: 0.0 };
        let n = 4;
        let u1 = ControlSchedule::constant(g, n, 0.0);
        let u2 = ControlSchedule::constant(g, n, 1.0);
        let z = Field::zeros(g);
        let r = lipschitz_probe(&p, &z, &z, &u1, &u2).unwrap();
        assert_eq!(r.phi_linf_h, 0.0);
        let want = n as f64 * p.tau * g.measure().sqrt();
        assert!((r.sigma_linf_h - want).abs() < 1e-12);
    }
}
