//! The stochastic convolution `u(t) = S(t) u_0 + int_0^t S(t-s) dL(s)`:
//! grid increments of the continuous part enter through the table matrices at
//! exact grid lags, jump atoms through linearly interpolated matrices at
//! their exact times.

use nalgebra::DVector;
use num_complex::Complex64;

use crate::error::{CoreError, Result};
use crate::linalg::to_complex_vector;
use crate::resolvent::OperatorResolventTable;
use crate::stochastic::{Jump, MartingalePath};
use crate::grid::TimeGrid;

/// Solution path: complex grid values plus the jump list inherited from the
/// driving martingale (`S(0) = I` transfers every jump with identical size).
#[derive(Debug, Clone)]
pub struct SolutionPath {
    pub grid: TimeGrid,
    pub values: Vec<DVector<Complex64>>,
    pub jumps: Vec<Jump>,
}

impl SolutionPath {
    pub fn dim(&self) -> usize {
        self.values[0].len()
    }

    pub fn sup_norm_sq(&self) -> f64 {
        self.values
            .iter()
            .map(|v| v.norm_squared())
            .fold(0.0, f64::max)
    }
}

/// Evaluate the convolution on the table's grid. The table must already be
/// rescaled (`w = 0`), i.e. hold the resolvent itself; use
/// [`OperatorResolventTable::rescaled`] first.
///
/// `u(t_k) = S(t_k) u0 + sum_{j<k} S(t_k - t_{j+1}) dL_j + sum_{tau_i <= t_k} S(t_k - tau_i) y_i`
pub fn stochastic_convolution(
    table: &OperatorResolventTable,
    path: &MartingalePath,
    u0: &DVector<Complex64>,
) -> Result<SolutionPath> {
    if table.w != 0.0 {
        return Err(CoreError::InvalidArgument(
            "table must be rescaled to w = 0 before convolution".into(),
        ));
    }
    if !table.grid.same_as(&path.grid) {
        return Err(CoreError::GridMismatch(
            "resolvent table and path grids differ".into(),
        ));
    }
    let dim = table.dim;
    if path.dim() != dim || u0.len() != dim {
        return Err(CoreError::DimensionMismatch {
            expected: dim,
            got: path.dim().min(u0.len()),
        });
    }
    let grid = table.grid;
    let n = grid.steps();

    // Complex increments of the continuous part.
    let increments: Vec<DVector<Complex64>> = (0..n)
        .map(|j| {
            let d = &path.continuous_part[j + 1] - &path.continuous_part[j];
            to_complex_vector(&d)
        })
        .collect();
    let jump_sizes: Vec<DVector<Complex64>> =
        path.jumps.iter().map(|j| to_complex_vector(&j.size)).collect();

    let one = Complex64::new(1.0, 0.0);
    let h = grid.spacing();
    // Column-major raw views for the O(n^2) driving sum.
    let mats: Vec<&[Complex64]> = table.matrices.iter().map(|m| m.as_slice()).collect();
    let incs: Vec<&[Complex64]> = increments.iter().map(|v| v.as_slice()).collect();
    let mut values = Vec::with_capacity(n + 1);
    for k in 0..=n {
        let t_k = grid.point(k);
        let mut u = DVector::<Complex64>::zeros(dim);
        u.gemv(one, &table.matrices[k], u0, one);
        {
            let acc = u.as_mut_slice();
            for j in 0..k {
                // lag t_k - t_{j+1} = t_{k-1-j} lands exactly on the grid
                let m = mats[k - 1 - j];
                let x = incs[j];
                for (col, &xv) in x.iter().enumerate() {
                    let base = col * dim;
                    for (i, a) in acc.iter_mut().enumerate() {
                        *a += m[base + i] * xv;
                    }
                }
            }
        }
        for (jump, size) in path.jumps.iter().zip(&jump_sizes) {
            if jump.time <= t_k {
                // S at the off-grid lag by linear interpolation, applied as
                // two in-place products.
                let lag = t_k - jump.time;
                let idx = ((lag / h).floor() as usize).min(n.saturating_sub(1));
                let frac = ((lag - idx as f64 * h) / h).clamp(0.0, 1.0);
                u.gemv(Complex64::new(1.0 - frac, 0.0), &table.matrices[idx], size, one);
                u.gemv(Complex64::new(frac, 0.0), &table.matrices[idx + 1], size, one);
            }
        }
        values.push(u);
    }
    Ok(SolutionPath {
        grid,
        values,
        jumps: path.jumps.clone(),
    })
}
