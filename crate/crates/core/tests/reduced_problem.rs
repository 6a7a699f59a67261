mod common;

use tumor_control::forward::ControlSchedule;
use tumor_control::grid::{Field, Grid};
use tumor_control::model::{CostWeights, ModelParams, TrackingTarget};
use tumor_control::optimizer::reduced_cost;
use tumor_control::sensitivity::dot_product_test;

#[test]
fn dot_product_discrepancy_does_not_grow_under_tighter_cg() {
    let g = Grid::new_1d(16, 8.0).unwrap();
    let mut p = ModelParams::new(g);
    p.weights = CostWeights::new(1.0, 1.0, 0.01);
    for seed in [1, 2, 3] {
        p.solver.cg_tol = 1e-12;
        let loose = dot_product_test(&p, 8, seed).unwrap().worst();
        p.solver.cg_tol = 1e-14;
        let tight = dot_product_test(&p, 8, seed).unwrap().worst();
        assert!(loose <= 1e-10 && tight <= 1e-10, "{loose} {tight}");
        // The identity is only as exact as the CG solves, so a looser
        // tolerance may leave a larger (still tiny) gap; tightening must
        // never make it worse.
        let floor = 4.0 * f64::EPSILON;
        assert!(tight <= 2.0 * loose.max(floor), "{loose} {tight}");
    }
}

#[test]
fn cost_vanishes_on_stationary_trajectory() {
    let g = Grid::new_2d(8, 8, 4.0, 4.0).unwrap();
    let mut p = ModelParams::new(g);
    p.weights = CostWeights::new(1.0, 1.0, 1.0);
    let phi0 = Field::constant(g, 1.0);
    p.phi_q = TrackingTarget::Constant(phi0.clone());
    p.phi_omega = phi0.clone();
    let u = ControlSchedule::constant(g, p.n_steps(), 0.0);
    assert_eq!(reduced_cost(&p, &phi0, &Field::zeros(g), &u).unwrap(), 0.0);
}

#[test]
fn constant_instance_cost_matches_ode_quadrature() {
    let g = Grid::new_1d(2, 1.0).unwrap();
    let mut p = ModelParams::new(g);
    p.weights = CostWeights::new(1.0, 0.5, 0.1);
    p.phi_q = TrackingTarget::Constant(Field::constant(g, 0.4));
    p.phi_omega = Field::constant(g, 0.6);
    let (phi0, sigma0, u) = (0.2, 0.8, 0.5);
    // J along the ODE solution with the same right-endpoint quadrature on a
    // very fine grid approximates the continuous cost.
    let exact_cost = {
        let tau = 1e-5;
        let n = (p.t_final / tau).round() as usize;
        let path = common::rk4_constant(&p, phi0, sigma0, u, tau, n, 1);
        let track: f64 = path[1..]
            .iter()
            .map(|(x, _)| (x - 0.4).powi(2))
            .sum::<f64>()
            * tau;
        0.5 * track + 0.25 * (path[n].0 - 0.6).powi(2) + 0.05 * u * u * p.t_final
    };
    let mut errs = Vec::new();
    for tau in [2e-3, 1e-3, 5e-4] {
        p.tau = tau;
        let j = reduced_cost(
            &p,
            &Field::constant(g, phi0),
            &Field::constant(g, sigma0),
            &ControlSchedule::constant(g, p.n_steps(), u),
        )
        .unwrap();
        errs.push((j - exact_cost).abs());
    }
    for w in errs.windows(2) {
        let order = (w[0] / w[1]).log2();
        assert!((0.8..=1.2).contains(&order), "{errs:?}");
    }
}
