#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use tumor_control::grid::{Field, Grid};
use tumor_control::model::ModelParams;
use tumor_control::presets::{preset_field, Preset};

/// Dense Neumann Laplacian assembled row by row from the stencil
/// definition: neighbours outside the box are replaced by the cell itself.
pub fn dense_laplacian(grid: &Grid) -> DMatrix<f64> {
    let (nx, ny) = (grid.nx(), grid.ny());
    let n = nx * ny;
    let mut a = DMatrix::zeros(n, n);
    let ix = 1.0 / (grid.hx() * grid.hx());
    let iy = 1.0 / (grid.hy() * grid.hy());
    for j in 0..ny {
        for i in 0..nx {
            let k = j * nx + i;
            let mut couple = |other: Option<usize>, w: f64| {
                if let Some(o) = other {
                    a[(k, o)] += w;
                    a[(k, k)] -= w;
                }
            };
            couple(if i > 0 { Some(k - 1) } else { None }, ix);
            couple(if i + 1 < nx { Some(k + 1) } else { None }, ix);
            if grid.dim() == 2 {
                couple(if j > 0 { Some(k - nx) } else { None }, iy);
                couple(if j + 1 < ny { Some(k + nx) } else { None }, iy);
            }
        }
    }
    a
}

pub fn vec_of(f: &Field) -> DVector<f64> {
    DVector::from_column_slice(f.values())
}

pub fn field_of(grid: Grid, v: &DVector<f64>) -> Field {
    Field::new(grid, v.iter().copied().collect()).unwrap()
}

pub fn diag(grid: &Grid, f: impl Fn(usize) -> f64) -> DMatrix<f64> {
    DMatrix::from_diagonal(&DVector::from_iterator(grid.len(), (0..grid.len()).map(f)))
}

pub fn solve(a: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    a.clone()
        .lu()
        .solve(b)
        .expect("dense system is nonsingular")
}

/// Dense M = I + τ(L² − S·L) and N = I − τL.
pub fn dense_step_matrices(params: &ModelParams) -> (DMatrix<f64>, DMatrix<f64>, DMatrix<f64>) {
    let l = dense_laplacian(&params.grid);
    let id = DMatrix::identity(params.grid.len(), params.grid.len());
    let tau = params.tau;
    let m = &id + (&l * &l - &l * params.stabilization) * tau;
    let n = &id - &l * tau;
    (l, m, n)
}

/// One scheme step computed with dense linear algebra.
pub fn dense_step(params: &ModelParams, phi: &Field, sigma: &Field, u: &Field) -> (Field, Field) {
    let g = params.grid;
    let (l, m, n) = dense_step_matrices(params);
    let tau = params.tau;
    let s = params.stabilization;
    let p = vec_of(phi);
    let sg = vec_of(sigma);
    let fp = p.map(|x| params.potential.first(x));
    let mu = -(&l * &p) + &fp;
    let r = DVector::from_iterator(
        g.len(),
        (0..g.len()).map(|k| params.proliferation.value(p[k]) * (sg[k] - mu[k])),
    );
    let rhs_phi = &p + &l * (&fp - &p * s) * tau + &r * tau;
    let rhs_sigma = &sg + (vec_of(u) - &r) * tau;
    (
        field_of(g, &solve(&m, &rhs_phi)),
        field_of(g, &solve(&n, &rhs_sigma)),
    )
}

/// Dense one-step Jacobian with respect to (ξ, ρ, h), a 2n × 3n matrix.
pub fn dense_jacobian(params: &ModelParams, phi: &Field, sigma: &Field) -> DMatrix<f64> {
    let g = params.grid;
    let n = g.len();
    let (l, m, nm) = dense_step_matrices(params);
    let tau = params.tau;
    let s = params.stabilization;
    let p = vec_of(phi);
    let sg = vec_of(sigma);
    let mu = -(&l * &p) + p.map(|x| params.potential.first(x));
    let f2 = diag(&g, |k| params.potential.second(p[k]));
    let pv = diag(&g, |k| params.proliferation.value(p[k]));
    let ps = diag(&g, |k| params.proliferation.slope(p[k]) * (sg[k] - mu[k]));
    let id = DMatrix::<f64>::identity(n, n);
    // δR = A ξ + P ρ with A = P′(σ̄ − μ̃) − P(−L + F″)
    let a = &ps - &pv * (-&l + &f2);
    let minv = m.clone().try_inverse().unwrap();
    let ninv = nm.clone().try_inverse().unwrap();
    let j_xx = &minv * (&id + &l * (&f2 - &id * s) * tau + &a * tau);
    let j_xr = &minv * &pv * tau;
    let j_rx = &ninv * (-&a * tau);
    let j_rr = &ninv * (&id - &pv * tau);
    let j_rh = &ninv * tau;
    let mut j = DMatrix::zeros(2 * n, 3 * n);
    j.view_mut((0, 0), (n, n)).copy_from(&j_xx);
    j.view_mut((0, n), (n, n)).copy_from(&j_xr);
    j.view_mut((n, 0), (n, n)).copy_from(&j_rx);
    j.view_mut((n, n), (n, n)).copy_from(&j_rr);
    j.view_mut((n, 2 * n), (n, n)).copy_from(&j_rh);
    j
}

pub fn smooth(grid: Grid, seed: u64, amplitude: f64, mean: f64) -> Field {
    preset_field(
        &Preset::FilteredNoise {
            seed,
            amplitude,
            mean,
            kappa: 1.0,
            passes: 2,
        },
        grid,
    )
    .unwrap()
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

pub fn rel_vec(a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    (a - b).norm() / b.norm().max(f64::MIN_POSITIVE)
}

/// Classical RK4 for the spatially constant reduction with `per_tau`
/// substeps per τ; returns (φ, σ) at t = 0, τ, …, nτ.
pub fn rk4_constant(
    params: &ModelParams,
    phi0: f64,
    sigma0: f64,
    u: f64,
    tau: f64,
    n: usize,
    per_tau: usize,
) -> Vec<(f64, f64)> {
    let f = |x: f64, y: f64| {
        let r = params.proliferation.value(x) * (y - params.potential.first(x));
        [r, u - r]
    };
    let dt = tau / per_tau as f64;
    let mut out = vec![(phi0, sigma0)];
    let (mut x, mut y) = (phi0, sigma0);
    for _ in 0..n {
        for _ in 0..per_tau {
            let k1 = f(x, y);
            let k2 = f(x + 0.5 * dt * k1[0], y + 0.5 * dt * k1[1]);
            let k3 = f(x + 0.5 * dt * k2[0], y + 0.5 * dt * k2[1]);
            let k4 = f(x + dt * k3[0], y + dt * k3[1]);
            x += dt * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]) / 6.0;
            y += dt * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]) / 6.0;
        }
        out.push((x, y));
    }
    out
}
