mod common;

use proptest::prelude::*;
use tumor_control::config::parse_config;
use tumor_control::forward::ControlSchedule;
use tumor_control::grid::{inner_product, integrate, neumann_laplacian, Field, Grid};
use tumor_control::model::{ControlBounds, ModelParams};
use tumor_control::optimizer::project;
use tumor_control::sensitivity::solve_linearized;
use tumor_control::snapshot::{format_snapshot, parse_snapshot};

fn grid_strategy() -> impl Strategy<Value = Grid> {
    prop_oneof![
        (2usize..24, 0.5f64..20.0).prop_map(|(n, l)| Grid::new_1d(n, l).unwrap()),
        (2usize..10, 2usize..10, 0.5f64..10.0, 0.5f64..10.0)
            .prop_map(|(nx, ny, lx, ly)| Grid::new_2d(nx, ny, lx, ly).unwrap()),
    ]
}

fn field_on(grid: Grid) -> impl Strategy<Value = Field> {
    proptest::collection::vec(-10.0f64..10.0, grid.len())
        .prop_map(move |v| Field::new(grid, v).unwrap())
}

fn grid_and_two_fields() -> impl Strategy<Value = (Field, Field)> {
    grid_strategy().prop_flat_map(|g| (field_on(g), field_on(g)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn laplacian_conserves_and_is_symmetric((f, g) in grid_and_two_fields()) {
        let grid = *f.grid();
        let lf = neumann_laplacian(&f);
        let lg = neumann_laplacian(&g);
        let h2 = grid.hx().min(grid.hy()).powi(2);
        let scale = grid.measure() * f.max_abs().max(1.0) / h2;
        prop_assert!(integrate(&lf).abs() <= 1e-12 * scale);
        let a = inner_product(&lf, &g).unwrap();
        let b = inner_product(&f, &lg).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * scale * g.max_abs().max(1.0));
        // Negative semidefinite.
        prop_assert!(inner_product(&lf, &f).unwrap() <= 1e-12 * scale * f.max_abs().max(1.0));
    }

    #[test]
    fn projection_is_idempotent_and_admissible(
        (f, g) in grid_and_two_fields(), lo in -2.0f64..0.0, width in 0.0f64..3.0,
    ) {
        let grid = *f.grid();
        let bounds = ControlBounds::constant(grid, lo, lo + width).unwrap();
        let u = ControlSchedule::new(vec![f, g]).unwrap();
        let once = project(&u, &bounds);
        prop_assert!(once.levels().iter().all(|l| bounds.contains(l)));
        prop_assert_eq!(project(&once, &bounds), once);
    }

    #[test]
    fn snapshot_round_trip_is_bitwise(
        f in grid_strategy().prop_flat_map(|g| proptest::collection::vec(any::<f64>().prop_filter("finite", |x| x.is_finite()), g.len())
            .prop_map(move |v| Field::new(g, v).unwrap())),
        t in 0.0f64..10.0,
    ) {
        let text = format_snapshot(&f, t);
        let (back, tb) = parse_snapshot(&text, f.grid()).unwrap();
        prop_assert_eq!(back.values(), f.values());
        prop_assert_eq!(tb, t);
    }

    #[test]
    fn config_echo_is_closed(
        nx in 2usize..200, lx in 0.1f64..100.0, steps in 1usize..500, tau in 1e-5f64..1e-2,
        bq in 0.0f64..10.0, bo in 0.0f64..10.0, bu in 1e-6f64..10.0, seed in any::<u64>(),
    ) {
        let text = format!(
            "grid.dim = 1\ngrid.nx = {nx}\ngrid.lx = {lx:?}\ntime.t_final = {:?}\ntime.tau = {tau:?}\n\
             model.beta_q = {bq:?}\nmodel.beta_omega = {bo:?}\nmodel.beta_u = {bu:?}\n\
             init.phi0 = filtered_noise seed={seed} amplitude=0.5\n",
            steps as f64 * tau
        );
        let c = parse_config(&text).unwrap();
        let echo = c.echo();
        let again = parse_config(&echo).unwrap();
        prop_assert_eq!(&again, &c);
        prop_assert_eq!(again.echo(), echo);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn linearization_is_linear_in_direction(seed in 0u64..1000, alpha in -3.0f64..3.0) {
        let g = Grid::new_1d(12, 6.0).unwrap();
        let mut p = ModelParams::new(g);
        p.t_final = 0.005;
        p.solver.cg_tol = 1e-14;
        let n = p.n_steps();
        let phi0 = common::smooth(g, seed, 0.8, 0.0);
        let sigma0 = common::smooth(g, seed + 1, 0.3, 0.5);
        let u = ControlSchedule::repeat(common::smooth(g, seed + 2, 0.5, 0.0), n);
        let base = tumor_control::simulate(&p, &phi0, &sigma0, &u).unwrap();
        let h1 = ControlSchedule::repeat(common::smooth(g, seed + 3, 1.0, 0.0), n);
        let h2 = ControlSchedule::repeat(common::smooth(g, seed + 4, 1.0, 0.0), n);
        let a = solve_linearized(&p, &base, &h1.scale(alpha).axpy(1.0, &h2)).unwrap();
        let b1 = solve_linearized(&p, &base, &h1).unwrap();
        let b2 = solve_linearized(&p, &base, &h2).unwrap();
        for k in 0..=n {
            let want = b1.xi[k].scale(alpha).add(&b2.xi[k]);
            let scale = want.max_abs().max(1e-300);
            prop_assert!(a.xi[k].sub(&want).max_abs() <= 1e-12 * scale.max(b2.xi[k].max_abs()));
            let want = b1.rho[k].scale(alpha).add(&b2.rho[k]);
            prop_assert!(a.rho[k].sub(&want).max_abs() <= 1e-12 * want.max_abs().max(b2.rho[k].max_abs()).max(1e-300));
        }
    }
}
