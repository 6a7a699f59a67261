//! Scalar reduction of the state system for spatially constant data:
//!
//! ```text
//! φ' = P(φ)(σ − F′(φ)),   σ' = −P(φ)(σ − F′(φ)) + u
//! ```
//!
//! integrated with classical RK4 on a fine uniform substep.

use crate::error::{Error, Result};
use crate::forward::{simulate, ControlSchedule};
use crate::grid::Field;
use crate::model::ModelParams;

fn rhs(params: &ModelParams, phi: f64, sigma: f64, u: f64) -> (f64, f64) {
    let r = params.proliferation.value(phi) * (sigma - params.potential.first(phi));
    (r, u - r)
}

/// RK4 values at t = n·τ for n = 0..=N, holding `u[n]` on [tₙ, tₙ₊₁).
pub fn scalar_oracle(
    params: &ModelParams,
    phi0: f64,
    sigma0: f64,
    u: &[f64],
    substeps: usize,
) -> Result<(Vec<f64>, Vec<f64>)> {
    if substeps == 0 {
        return Err(Error::usage("oracle needs at least one substep"));
    }
    let dt = params.tau / substeps as f64;
    let mut phi = vec![phi0];
    let mut sigma = vec![sigma0];
    let (mut x, mut y) = (phi0, sigma0);
    for &un in u {
        for _ in 0..substeps {
            let (k1x, k1y) = rhs(params, x, y, un);
            let (k2x, k2y) = rhs(params, x + 0.5 * dt * k1x, y + 0.5 * dt * k1y, un);
            let (k3x, k3y) = rhs(params, x + 0.5 * dt * k2x, y + 0.5 * dt * k2y, un);
            let (k4x, k4y) = rhs(params, x + dt * k3x, y + dt * k3y, un);
            x += dt / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
            y += dt / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y);
        }
        if !(x.is_finite() && y.is_finite()) {
            return Err(Error::Divergence {
                value: x.abs().max(y.abs()),
                guard: f64::MAX,
            });
        }
        phi.push(x);
        sigma.push(y);
    }
    Ok((phi, sigma))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleRow {
    pub tau: f64,
    /// max over levels of |(φ, σ)ⁿ − (φ, σ)(tₙ)|, relative to max |(φ, σ)(t)|.
    pub error: f64,
    /// log₂ of the previous row's error over this one's (NaN in the first row).
    pub order: f64,
}

/// Runs the full scheme on spatially constant data with constant control
/// `u` for each time step in `taus` and compares against the scalar oracle.
/// Each τ must divide `params.t_final`.
pub fn oracle_study(
    params: &ModelParams,
    phi0: f64,
    sigma0: f64,
    u: f64,
    taus: &[f64],
    oracle_dt: f64,
) -> Result<Vec<OracleRow>> {
    let grid = params.grid;
    let mut rows: Vec<OracleRow> = Vec::with_capacity(taus.len());
    for &tau in taus {
        let mut p = params.clone();
        p.tau = tau;
        p.validate()?;
        let n = p.n_steps();
        let traj = simulate(
            &p,
            &Field::constant(grid, phi0),
            &Field::constant(grid, sigma0),
            &ControlSchedule::constant(grid, n, u),
        )?;
        let substeps = ((tau / oracle_dt).ceil() as usize).max(1);
        let (ophi, osigma) = scalar_oracle(&p, phi0, sigma0, &vec![u; n], substeps)?;
        let scale = ophi
            .iter()
            .zip(&osigma)
            .map(|(a, b)| a.hypot(*b))
            .fold(0.0, f64::max);
        let error = (0..=n)
            .map(|k| {
                // Spatially constant runs stay constant; sample one cell.
                let dp = traj.phi[k].values()[0] - ophi[k];
                let ds = traj.sigma[k].values()[0] - osigma[k];
                dp.hypot(ds)
            })
            .fold(0.0, f64::max)
            / scale;
        let order = match rows.last() {
            Some(prev) => (prev.error / error).ln() / (prev.tau / tau).ln(),
            None => f64::NAN,
        };
        rows.push(OracleRow { tau, error, order });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use crate::model::ProliferationSpec;

    #[test]
    fn no_proliferation_is_linear_in_sigma() {
        let mut p = ModelParams::new(Grid::new_1d(2, 1.0).unwrap());
        p.proliferation = ProliferationSpec::Quadratic { p0: 0.0 };
        let (phi, sigma) = scalar_oracle(&p, 0.3, 0.1, &[2.0; 10], 4).unwrap();
        assert!(phi.iter().all(|&v| v == 0.3));
        assert!((sigma[10] - (0.1 + 2.0 * 10.0 * p.tau)).abs() < 1e-14);
    }

    #[test]
    fn well_minimum_is_fixed() {
        let p = ModelParams::new(Grid::new_1d(2, 1.0).unwrap());
        let (phi, sigma) = scalar_oracle(&p, 1.0, 0.0, &[0.0; 5], 3).unwrap();
        assert!(phi.iter().all(|&v| v == 1.0));
        assert!(sigma.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn scheme_is_first_order() {
        let mut p = ModelParams::new(Grid::new_1d(2, 1.0).unwrap());
        p.t_final = 0.1;
        let rows = oracle_study(&p, 0.2, 0.8, 0.5, &[4e-3, 2e-3, 1e-3], 1e-5).unwrap();
        for r in &rows[1..] {
            assert!((0.9..=1.1).contains(&r.order), "{rows:?}");
        }
    }
}
