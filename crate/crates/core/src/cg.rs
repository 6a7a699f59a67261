//! Matrix-free conjugate gradients for the SPD systems of the implicit steps.

use crate::error::{Error, Result};
use crate::grid::{dot_slices, laplacian_into, Field, Grid};

/// Solves `apply(x) = rhs` for a symmetric positive-definite `apply`.
///
/// Stops once `‖apply(x) − rhs‖ ≤ tol·‖rhs‖`, checked on the true residual.
/// Starts from zero; all reductions run in a fixed order, so repeated solves
/// are bitwise identical.
pub fn cg_solve(
    apply: impl Fn(&Field) -> Field,
    rhs: &Field,
    tol: f64,
    max_iter: usize,
) -> Result<Field> {
    let grid = *rhs.grid();
    let x = cg_raw(
        |src, dst| {
            let out = apply(&Field::from_vec(grid, src.to_vec()));
            dst.copy_from_slice(out.values());
        },
        rhs.values(),
        tol,
        max_iter,
    )?;
    Ok(Field::from_vec(grid, x))
}

pub(crate) fn cg_raw(
    mut apply: impl FnMut(&[f64], &mut [f64]),
    b: &[f64],
    tol: f64,
    max_iter: usize,
) -> Result<Vec<f64>> {
    if !(tol > 0.0) {
        return Err(Error::usage(format!(
            "CG tolerance must be positive, got {tol}"
        )));
    }
    let n = b.len();
    let mut x = vec![0.0; n];
    let b_norm = dot_slices(b, b).sqrt();
    if b_norm == 0.0 {
        return Ok(x);
    }
    let target = tol * b_norm;
    let mut r = b.to_vec();
    let mut p = r.clone();
    let mut ap = vec![0.0; n];
    let mut rr = dot_slices(&r, &r);
    let mut iterations = 0;
    loop {
        if rr.sqrt() <= target {
            // Confirm on the true residual; restart from x if recurrence drift fooled us.
            apply(&x, &mut ap);
            for k in 0..n {
                r[k] = b[k] - ap[k];
            }
            rr = dot_slices(&r, &r);
            if rr.sqrt() <= target {
                return Ok(x);
            }
            p.copy_from_slice(&r);
        }
        if iterations >= max_iter {
            return Err(Error::NotConverged {
                iterations,
                residual: rr.sqrt() / b_norm,
            });
        }
        apply(&p, &mut ap);
        let pap = dot_slices(&p, &ap);
        if !(pap > 0.0) {
            return Err(Error::NotConverged {
                iterations,
                residual: rr.sqrt() / b_norm,
            });
        }
        let alpha = rr / pap;
        for k in 0..n {
            x[k] += alpha * p[k];
            r[k] -= alpha * ap[k];
        }
        let rr_next = dot_slices(&r, &r);
        let beta = rr_next / rr;
        rr = rr_next;
        for k in 0..n {
            p[k] = r[k] + beta * p[k];
        }
        iterations += 1;
    }
}

/// Shifted operators `I + a·Δ² + b·(−Δ)` used by the implicit steps. Both
/// `a, b ≥ 0`, so the operator is SPD.
#[derive(Debug, Clone, Copy)]
pub(crate) struct ShiftedOperator {
    pub grid: Grid,
    pub biharmonic: f64,
    pub neg_laplacian: f64,
}

impl ShiftedOperator {
    pub fn apply_into(&self, src: &[f64], dst: &mut [f64], scratch: &mut [f64]) {
        laplacian_into(&self.grid, src, scratch);
        if self.biharmonic != 0.0 {
            laplacian_into(&self.grid, scratch, dst);
            for k in 0..src.len() {
                dst[k] = src[k] + self.biharmonic * dst[k] - self.neg_laplacian * scratch[k];
            }
        } else {
            for k in 0..src.len() {
                dst[k] = src[k] - self.neg_laplacian * scratch[k];
            }
        }
    }

    pub fn solve(&self, rhs: &Field, tol: f64, max_iter: usize) -> Result<Field> {
        let mut scratch = vec![0.0; rhs.len()];
        let x = cg_raw(
            |src, dst| self.apply_into(src, dst, &mut scratch),
            rhs.values(),
            tol,
            max_iter,
        )?;
        Ok(Field::from_vec(self.grid, x))
    }
}
