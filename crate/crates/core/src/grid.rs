//! Uniform cell-centred grids on 1D/2D boxes, grid functions, and the
//! homogeneous-Neumann finite-difference operators built on them.
//!
//! Boundary conditions are imposed with mirror ghost cells: the ghost value
//! outside each boundary face equals the adjacent interior value, so the flux
//! through every boundary face is exactly zero. This keeps the discrete
//! Laplacian symmetric with respect to [`inner_product`] and makes its
//! integral telescope to zero.

use crate::error::{Error, Result};

/// Smallest number of cells allowed along an active axis.
pub const MIN_CELLS: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    dim: usize,
    nx: usize,
    ny: usize,
    lx: f64,
    ly: f64,
}

impl Grid {
    pub fn new_1d(nx: usize, lx: f64) -> Result<Self> {
        Self::new(1, [nx, 1], [lx, 1.0])
    }

    pub fn new_2d(nx: usize, ny: usize, lx: f64, ly: f64) -> Result<Self> {
        Self::new(2, [nx, ny], [lx, ly])
    }

    /// Builds a grid from per-axis counts and extents. In 1D the second
    /// entries are ignored and the y-axis is a single unit-width cell.
    pub fn new(dim: usize, counts: [usize; 2], lengths: [f64; 2]) -> Result<Self> {
        let (ny, ly) = match dim {
            1 => (1, 1.0),
            2 => (counts[1], lengths[1]),
            _ => {
                return Err(Error::usage(format!(
                    "grid dimension must be 1 or 2, got {dim}"
                )))
            }
        };
        let nx = counts[0];
        let lx = lengths[0];
        let active = if dim == 1 {
            &[(nx, lx)][..]
        } else {
            &[(nx, lx), (ny, ly)][..]
        };
        for &(n, l) in active {
            if n < MIN_CELLS {
                return Err(Error::usage(format!(
                    "grid needs at least {MIN_CELLS} cells per axis, got {n}"
                )));
            }
            if !(l.is_finite() && l > 0.0) {
                return Err(Error::usage(format!(
                    "grid length must be positive, got {l}"
                )));
            }
        }
        Ok(Self {
            dim,
            nx,
            ny,
            lx,
            ly,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn lx(&self) -> f64 {
        self.lx
    }

    pub fn ly(&self) -> f64 {
        self.ly
    }

    pub fn hx(&self) -> f64 {
        self.lx / self.nx as f64
    }

    /// y-spacing; 1 in 1D, where the y-axis is inactive.
    pub fn hy(&self) -> f64 {
        self.ly / self.ny as f64
    }

    pub fn cell_volume(&self) -> f64 {
        if self.dim == 1 {
            self.hx()
        } else {
            self.hx() * self.hy()
        }
    }

    /// Total cell count.
    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Measure of the domain, |Ω|.
    pub fn measure(&self) -> f64 {
        self.cell_volume() * self.len() as f64
    }

    /// Cell-centre coordinates of the cell with flat (row-major) index `k`.
    pub fn center(&self, k: usize) -> [f64; 2] {
        let i = k % self.nx;
        let j = k / self.nx;
        let x = (i as f64 + 0.5) * self.hx();
        let y = if self.dim == 1 {
            0.0
        } else {
            (j as f64 + 0.5) * self.hy()
        };
        [x, y]
    }

    /// Same box with every active axis refined by a factor of two.
    pub fn refined(&self) -> Grid {
        let ny = if self.dim == 1 { 1 } else { 2 * self.ny };
        Grid {
            nx: 2 * self.nx,
            ny,
            ..*self
        }
    }

    pub(crate) fn check_same(&self, other: &Grid) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!("{self:?} vs {other:?}")))
        }
    }
}

/// One real value per cell, row-major with x varying fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    grid: Grid,
    values: Vec<f64>,
}

impl Field {
    /// Checked constructor: length must match the grid and all values must be finite.
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "field has {} values, grid has {} cells",
                values.len(),
                grid.len()
            )));
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::usage(format!(
                "non-finite value {} at cell {k}",
                values[k]
            )));
        }
        Ok(Self { grid, values })
    }

    pub(crate) fn from_vec(grid: Grid, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self { grid, values }
    }

    pub fn constant(grid: Grid, c: f64) -> Self {
        Self::from_vec(grid, vec![c; grid.len()])
    }

    pub fn zeros(grid: Grid) -> Self {
        Self::constant(grid, 0.0)
    }

    /// Samples `f` at cell centres.
    pub fn from_fn(grid: Grid, f: impl Fn(f64, f64) -> f64) -> Self {
        let values = (0..grid.len())
            .map(|k| {
                let [x, y] = grid.center(k);
                f(x, y)
            })
            .collect();
        Self::from_vec(grid, values)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Field {
        Self::from_vec(self.grid, self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn zip_map(&self, other: &Field, f: impl Fn(f64, f64) -> f64) -> Field {
        debug_assert_eq!(self.grid, other.grid);
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| f(a, b))
            .collect();
        Self::from_vec(self.grid, values)
    }

    pub fn add(&self, other: &Field) -> Field {
        self.zip_map(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Field) -> Field {
        self.zip_map(other, |a, b| a - b)
    }

    /// Cellwise product.
    pub fn mul(&self, other: &Field) -> Field {
        self.zip_map(other, |a, b| a * b)
    }

    pub fn scale(&self, a: f64) -> Field {
        self.map(|v| a * v)
    }

    /// `self + a * x`
    pub fn axpy(&self, a: f64, x: &Field) -> Field {
        self.zip_map(x, |s, v| s + a * v)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// Unchecked H inner product for fields known to share a grid.
    pub(crate) fn dot(&self, other: &Field) -> f64 {
        debug_assert_eq!(self.grid, other.grid);
        self.grid.cell_volume() * dot_slices(&self.values, &other.values)
    }
}

pub(crate) fn dot_slices(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Raw mirror-ghost Laplacian on a slice, writing into `out`.
pub(crate) fn laplacian_into(grid: &Grid, f: &[f64], out: &mut [f64]) {
    let nx = grid.nx;
    let ny = grid.ny;
    let ix2 = 1.0 / (grid.hx() * grid.hx());
    let iy2 = 1.0 / (grid.hy() * grid.hy());
    for j in 0..ny {
        let row = j * nx;
        for i in 0..nx {
            let k = row + i;
            let c = f[k];
            let w = if i > 0 { f[k - 1] } else { c };
            let e = if i + 1 < nx { f[k + 1] } else { c };
            let mut v = (w - 2.0 * c + e) * ix2;
            if grid.dim == 2 {
                let s = if j > 0 { f[k - nx] } else { c };
                let n = if j + 1 < ny { f[k + nx] } else { c };
                v += (s - 2.0 * c + n) * iy2;
            }
            out[k] = v;
        }
    }
}

/// Second-order 3-point (1D) / 5-point (2D) Laplacian with homogeneous
/// Neumann conditions via mirror ghosts.
pub fn neumann_laplacian(f: &Field) -> Field {
    let mut out = vec![0.0; f.len()];
    laplacian_into(&f.grid, &f.values, &mut out);
    Field::from_vec(f.grid, out)
}

/// The Laplacian applied twice; encodes both ∂ₙf = 0 and ∂ₙ(Δf) = 0.
pub fn neumann_biharmonic(f: &Field) -> Field {
    neumann_laplacian(&neumann_laplacian(f))
}

/// Face-based discrete Dirichlet energy ∫|∇f|². Boundary faces carry no flux.
pub fn grad_sq_integral(f: &Field) -> f64 {
    let g = &f.grid;
    let v = &f.values;
    let mut acc = 0.0;
    let ix = 1.0 / g.hx();
    for j in 0..g.ny {
        for i in 0..g.nx - 1 {
            let k = j * g.nx + i;
            let d = (v[k + 1] - v[k]) * ix;
            acc += d * d;
        }
    }
    if g.dim == 2 {
        let iy = 1.0 / g.hy();
        for j in 0..g.ny - 1 {
            for i in 0..g.nx {
                let k = j * g.nx + i;
                let d = (v[k + g.nx] - v[k]) * iy;
                acc += d * d;
            }
        }
    }
    g.cell_volume() * acc
}

pub fn inner_product(f: &Field, g: &Field) -> Result<f64> {
    f.grid.check_same(&g.grid)?;
    Ok(f.dot(g))
}

pub fn norm_h(f: &Field) -> f64 {
    f.dot(f).sqrt()
}

/// Discrete H¹ norm, sqrt(‖f‖² + ∫|∇f|²).
pub fn norm_v(f: &Field) -> f64 {
    (f.dot(f) + grad_sq_integral(f)).sqrt()
}

pub fn integrate(f: &Field) -> f64 {
    f.grid.cell_volume() * f.values.iter().sum::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn field_1d(h: f64, vals: &[f64]) -> Field {
        let g = Grid::new_1d(vals.len(), h * vals.len() as f64).unwrap();
        Field::new(g, vals.to_vec()).unwrap()
    }

    #[test]
    fn grid_rejects_degenerate_axes() {
        assert!(Grid::new_1d(1, 1.0).is_err());
        assert!(Grid::new_1d(4, 0.0).is_err());
        assert!(Grid::new_2d(4, 1, 1.0, 1.0).is_err());
        assert!(Grid::new(3, [4, 4], [1.0, 1.0]).is_err());
        let g = Grid::new_2d(4, 5, 2.0, 1.0).unwrap();
        assert_eq!(g.len(), 20);
        assert!((g.cell_volume() - 0.5 * 0.2).abs() < 1e-15);
    }

    #[test]
    fn field_rejects_nan_and_wrong_length() {
        let g = Grid::new_1d(4, 1.0).unwrap();
        assert!(Field::new(g, vec![0.0; 3]).is_err());
        assert!(Field::new(g, vec![0.0, f64::NAN, 0.0, 0.0]).is_err());
    }

    #[test]
    fn laplacian_of_constant_vanishes() {
        let g = Grid::new_2d(5, 7, 1.3, 0.4).unwrap();
        let lap = neumann_laplacian(&Field::constant(g, 2.5));
        assert!(lap.max_abs() < 1e-12);
    }

    #[test]
    fn laplacian_hand_stencil() {
        let lap = neumann_laplacian(&field_1d(1.0, &[1.0, 2.0, 4.0, 8.0]));
        assert_eq!(lap.values(), &[1.0, 1.0, 2.0, -4.0]);
        assert_eq!(integrate(&lap), 0.0);
    }

    #[test]
    fn biharmonic_hand_stencil() {
        // Laplacian of [1, 1, 2, -4] with mirror ghosts.
        let bi = neumann_biharmonic(&field_1d(1.0, &[1.0, 2.0, 4.0, 8.0]));
        assert_eq!(bi.values(), &[0.0, 1.0, -7.0, 6.0]);
        assert_eq!(integrate(&bi), 0.0);
    }

    #[test]
    fn laplacian_separable_2d() {
        let (nx, ny, lx, ly) = (6, 5, 1.5, 2.0);
        let g2 = Grid::new_2d(nx, ny, lx, ly).unwrap();
        let gx = |x: f64| (3.0 * x).sin() + x * x;
        let ky = |y: f64| (y - 0.3).powi(3);
        let f = Field::from_fn(g2, |x, y| gx(x) + ky(y));
        let lap = neumann_laplacian(&f);
        let lx1 = neumann_laplacian(&Field::from_fn(Grid::new_1d(nx, lx).unwrap(), |x, _| gx(x)));
        let ly1 = neumann_laplacian(&Field::from_fn(Grid::new_1d(ny, ly).unwrap(), |y, _| ky(y)));
        for j in 0..ny {
            for i in 0..nx {
                let want = lx1.values()[i] + ly1.values()[j];
                assert!((lap.values()[j * nx + i] - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn grad_sq_hand_values() {
        assert_eq!(grad_sq_integral(&field_1d(1.0, &[0.0, 1.0])), 1.0);
        let g = Grid::new_2d(4, 4, 1.0, 1.0).unwrap();
        assert_eq!(grad_sq_integral(&Field::constant(g, 3.0)), 0.0);
        let f = field_1d(0.3, &[0.1, -0.4, 0.9, 0.2]);
        let a = 2.5;
        let scaled = grad_sq_integral(&f.scale(a));
        assert!((scaled - a * a * grad_sq_integral(&f)).abs() < 1e-12 * scaled);
    }

    #[test]
    fn inner_products_by_hand() {
        let g = Grid::new_1d(4, 4.0).unwrap();
        let one = Field::constant(g, 1.0);
        assert_eq!(inner_product(&one, &one).unwrap(), 4.0);
        let unit = Grid::new_2d(2, 2, 1.0, 1.0).unwrap();
        let ones = Field::constant(unit, 1.0);
        assert_eq!(inner_product(&ones, &ones).unwrap(), 1.0);
        let a = Field::new(g, vec![1.0, 1.0, 0.0, 0.0]).unwrap();
        let b = Field::new(g, vec![0.0, 0.0, 1.0, 1.0]).unwrap();
        assert_eq!(inner_product(&a, &b).unwrap(), 0.0);
        let f = field_1d(0.5, &[1.0, 2.0]);
        let h = field_1d(0.5, &[3.0, 4.0]);
        assert_eq!(inner_product(&f, &h).unwrap(), 5.5);
        assert_eq!(integrate(&f), 1.5);
        assert!((norm_h(&f) - (0.5f64 * 5.0).sqrt()).abs() < 1e-15);
        let other = field_1d(0.25, &[1.0, 2.0]);
        assert!(matches!(
            inner_product(&f, &other),
            Err(Error::GridMismatch(_))
        ));
    }

    #[test]
    fn v_norm_adds_gradient_energy() {
        let f = field_1d(1.0, &[0.0, 1.0]);
        assert!((norm_v(&f) - (1.0f64 + 1.0).sqrt()).abs() < 1e-15);
    }
}
