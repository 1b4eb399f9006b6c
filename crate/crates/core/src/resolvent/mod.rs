//! Resolvent construction for Volterra equations of scalar type: the damped
//! scalar family `s_{w,mu}`, operator tables built either by a direct matrix
//! Volterra solve or through an eigenbasis, the discrete resolvent-equation
//! defect, and a 1-D elliptic operator builder for test problems.

mod bounds;
mod elliptic;
mod export;
mod operator;

pub use bounds::{default_psi, laplace_bound_check, sector_mu_samples, BoundReport};
pub use elliptic::{
    build_discrete_elliptic, dirichlet_laplacian, BoundaryCondition, EllipticOperator,
};
pub use export::{read_table_binary, write_table_binary, write_table_csv};
pub use operator::{
    matrix_resolvent, resolvent_residual, spectral_resolvent, OperatorResolventTable,
    Spectralization,
};

use num_complex::Complex64;

use crate::error::{CoreError, Result};
use crate::grid::TimeGrid;
use crate::kernels::Kernel;
use crate::quad::ConvolutionWeights;

/// Samples of the damped scalar resolvent `s_{w,mu}` on a uniform grid:
/// the solution of `s(t) = e^{-wt} - mu (a_w * s)(t)` with `s(0) = 1`.
#[derive(Debug, Clone)]
pub struct ScalarResolventTable {
    pub mu: Complex64,
    pub w: f64,
    pub grid: TimeGrid,
    pub values: Vec<Complex64>,
}

impl ScalarResolventTable {
    /// Undo the damping: `e^{w t_k} s_{w,mu}(t_k)`, the `w`-independent family.
    pub fn rescaled_value(&self, k: usize) -> Complex64 {
        (self.w * self.grid.point(k)).exp() * self.values[k]
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

/// Solve the damped scalar resolvent equation by product-quadrature forward
/// substitution. The newest-sample weight is treated implicitly, so stepping
/// stays stable for stiff `mu` in the admissible sector.
pub fn scalar_resolvent(
    kernel: &Kernel,
    mu: Complex64,
    w: f64,
    grid: &TimeGrid,
) -> Result<ScalarResolventTable> {
    let damped = kernel.damped(w);
    let weights = ConvolutionWeights::build(&|t| damped.eval(t), grid, damped.graded_first_cell())?;
    let values = scalar_resolvent_with_weights(&weights, mu, w, grid)?;
    Ok(ScalarResolventTable {
        mu,
        w,
        grid: *grid,
        values,
    })
}

/// Inner stepping loop against prebuilt weights of the damped kernel; shared
/// by the per-eigenvalue solves of the spectral path so the weights are built
/// once.
pub(crate) fn scalar_resolvent_with_weights(
    weights: &ConvolutionWeights,
    mu: Complex64,
    w: f64,
    grid: &TimeGrid,
) -> Result<Vec<Complex64>> {
    let n = grid.steps();
    let pivot = Complex64::new(1.0, 0.0) + mu * weights.head();
    if pivot.norm() < 1e-14 * (1.0 + (mu * weights.head()).norm()) {
        return Err(CoreError::StepSingularity {
            step: 1,
            magnitude: pivot.norm(),
        });
    }
    let mut values = vec![Complex64::new(0.0, 0.0); n + 1];
    values[0] = Complex64::new(1.0, 0.0);
    for k in 1..=n {
        let mem = weights.memory_complex(&values, k);
        let rhs = Complex64::new((-w * grid.point(k)).exp(), 0.0) - mu * mem;
        values[k] = rhs / pivot;
    }
    Ok(values)
}
