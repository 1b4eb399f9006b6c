//! Operator resolvent tables: direct matrix Volterra stepping and the
//! eigen-decomposition route `S(t) = V diag(s_{w,-lambda_i}(t)) V^{-1}` for
//! diagonalizable matrices, plus the discrete resolvent-equation defect.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{CoreError, Result};
use crate::grid::TimeGrid;
use crate::kernels::Kernel;
use crate::linalg;
use crate::quad::ConvolutionWeights;
use crate::resolvent::scalar_resolvent_with_weights;

/// Condition-number cap beyond which the spectral route refuses to run.
pub const EIGENBASIS_CONDITION_CAP: f64 = 1e8;

/// Sampled operator family `S_{w,A}(t_k)` with `S(0) = I`. The stored
/// matrices are the damped family; the resolvent itself is
/// `e^{w t_k} * matrices[k]`.
#[derive(Debug, Clone)]
pub struct OperatorResolventTable {
    pub dim: usize,
    pub grid: TimeGrid,
    pub w: f64,
    /// Operator shift `rho` that was subtracted from `A` before solving.
    pub shift: f64,
    pub matrices: Vec<DMatrix<Complex64>>,
}

impl OperatorResolventTable {
    /// Wrap raw matrices (probe families in tests, imported tables).
    pub fn from_matrices(
        grid: TimeGrid,
        w: f64,
        shift: f64,
        matrices: Vec<DMatrix<Complex64>>,
    ) -> Result<Self> {
        if matrices.len() != grid.steps() + 1 {
            return Err(CoreError::DimensionMismatch {
                expected: grid.steps() + 1,
                got: matrices.len(),
            });
        }
        let dim = matrices[0].nrows();
        for m in &matrices {
            if m.nrows() != dim || m.ncols() != dim {
                return Err(CoreError::DimensionMismatch {
                    expected: dim,
                    got: m.nrows().max(m.ncols()),
                });
            }
        }
        Ok(Self {
            dim,
            grid,
            w,
            shift,
            matrices,
        })
    }

    /// The undamped resolvent at a grid index: `e^{w t_k} matrices[k]`.
    pub fn resolvent_at(&self, k: usize) -> DMatrix<Complex64> {
        &self.matrices[k] * Complex64::new((self.w * self.grid.point(k)).exp(), 0.0)
    }

    /// Fold the damping into the stored matrices, producing an equivalent
    /// table with `w = 0` (the form the stochastic convolution consumes).
    pub fn rescaled(&self) -> Self {
        let matrices = (0..self.matrices.len()).map(|k| self.resolvent_at(k)).collect();
        Self {
            dim: self.dim,
            grid: self.grid,
            w: 0.0,
            shift: self.shift,
            matrices,
        }
    }

    /// Linear interpolation between grid matrices at an off-grid time.
    pub fn interpolate(&self, t: f64) -> DMatrix<Complex64> {
        let n = self.grid.steps();
        let h = self.grid.spacing();
        if t <= 0.0 {
            return self.matrices[0].clone();
        }
        if t >= self.grid.horizon() {
            return self.matrices[n].clone();
        }
        let idx = ((t / h).floor() as usize).min(n - 1);
        let frac = (t - idx as f64 * h) / h;
        &self.matrices[idx] * Complex64::new(1.0 - frac, 0.0)
            + &self.matrices[idx + 1] * Complex64::new(frac, 0.0)
    }

    /// Largest entry-wise deviation from another table on the same grid.
    pub fn sup_diff(&self, other: &Self) -> Result<f64> {
        if !self.grid.same_as(&other.grid) || self.dim != other.dim {
            return Err(CoreError::GridMismatch(
                "tables live on different grids or dimensions".into(),
            ));
        }
        let mut worst = 0.0_f64;
        for (a, b) in self.matrices.iter().zip(&other.matrices) {
            worst = worst.max(linalg::max_abs_entry(&(a - b)));
        }
        Ok(worst)
    }
}

/// Eigendecomposition of a (real) matrix for the spectral resolvent route.
#[derive(Debug, Clone)]
pub struct Spectralization {
    eigenvalues: Vec<Complex64>,
    v: DMatrix<Complex64>,
    v_inv: DMatrix<Complex64>,
    condition_number: f64,
}

impl Spectralization {
    /// Decompose a general real matrix: eigenvalues from the real Schur form,
    /// eigenvectors by inverse iteration, validated against
    /// `||A V - V diag(lambda)|| <= 1e-8 ||A||`.
    pub fn from_real_matrix(a: &DMatrix<f64>) -> Result<Self> {
        let eigenvalues = linalg::eigenvalues_real_matrix(a)?;
        let ac = linalg::to_complex_matrix(a);
        let v = linalg::eigenvectors_by_inverse_iteration(&ac, &eigenvalues)?;
        Self::assemble(&ac, eigenvalues, v)
    }

    /// Decompose a complex matrix whose eigenvalues are supplied by the
    /// caller (used for Hermitian inputs where the values come from a
    /// symmetric solver).
    pub fn from_complex_matrix(a: &DMatrix<Complex64>, eigenvalues: Vec<Complex64>) -> Result<Self> {
        let v = linalg::eigenvectors_by_inverse_iteration(a, &eigenvalues)?;
        Self::assemble(a, eigenvalues, v)
    }

    fn assemble(
        ac: &DMatrix<Complex64>,
        eigenvalues: Vec<Complex64>,
        v: DMatrix<Complex64>,
    ) -> Result<Self> {
        let n = ac.nrows();
        let scale = linalg::frobenius_norm(ac).max(1e-300);
        let lambda = DMatrix::from_diagonal(&DVector::from_vec(eigenvalues.clone()));
        let defect = linalg::frobenius_norm(&(ac * &v - &v * &lambda));
        let tol = 1e-8 * scale;
        if !defect.is_finite() || defect > tol {
            return Err(CoreError::DefectiveMatrix {
                residual: defect,
                tol,
            });
        }
        let v_inv = v
            .clone()
            .lu()
            .try_inverse()
            .ok_or(CoreError::DefectiveMatrix {
                residual: f64::INFINITY,
                tol,
            })?;
        let condition_number = linalg::frobenius_norm(&v) * linalg::frobenius_norm(&v_inv)
            / n as f64;
        Ok(Self {
            eigenvalues,
            v,
            v_inv,
            condition_number,
        })
    }

    pub fn eigenvalues(&self) -> &[Complex64] {
        &self.eigenvalues
    }

    pub fn basis(&self) -> &DMatrix<Complex64> {
        &self.v
    }

    pub fn basis_inverse(&self) -> &DMatrix<Complex64> {
        &self.v_inv
    }

    pub fn condition_number(&self) -> f64 {
        self.condition_number
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }
}

/// Solve the damped operator resolvent equation
/// `S_k = e^{-w t_k} I + (a_w * (A - rho) S)_k` by blockwise forward
/// substitution with one LU solve per step (the step matrix is constant on a
/// uniform grid and factored once).
pub fn matrix_resolvent(
    a: &DMatrix<Complex64>,
    kernel: &Kernel,
    w: f64,
    rho: f64,
    grid: &TimeGrid,
) -> Result<OperatorResolventTable> {
    let dim = a.nrows();
    if dim != a.ncols() {
        return Err(CoreError::DimensionMismatch {
            expected: dim,
            got: a.ncols(),
        });
    }
    if a.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(CoreError::NonFinite("operator entries".into()));
    }
    let damped = kernel.damped(w);
    let weights = ConvolutionWeights::build(&|t| damped.eval(t), grid, damped.graded_first_cell())?;
    let n = grid.steps();
    let eye = DMatrix::<Complex64>::identity(dim, dim);
    let mut a_eff = a.clone();
    for d in 0..dim {
        a_eff[(d, d)] -= Complex64::new(rho, 0.0);
    }

    let step_matrix = &eye - &a_eff * Complex64::new(weights.head(), 0.0);
    let lu = step_matrix.lu();
    if !lu.is_invertible() {
        return Err(CoreError::SingularStepMatrix { step: 1 });
    }

    let mut matrices = Vec::with_capacity(n + 1);
    matrices.push(eye.clone());
    // Cache A_eff * S_j as the steps are produced.
    let mut a_s = Vec::with_capacity(n + 1);
    a_s.push(a_eff.clone());
    for k in 1..=n {
        let mut rhs = &eye * Complex64::new((-w * grid.point(k)).exp(), 0.0);
        rhs += &a_s[0] * Complex64::new(weights.tail(k), 0.0);
        for m in 1..k {
            rhs += &a_s[k - m] * Complex64::new(weights.full(m), 0.0);
        }
        let s_k = lu.solve(&rhs).ok_or(CoreError::SingularStepMatrix { step: k })?;
        a_s.push(&a_eff * &s_k);
        matrices.push(s_k);
    }
    Ok(OperatorResolventTable {
        dim,
        grid: *grid,
        w,
        shift: rho,
        matrices,
    })
}

/// Build the operator table through the eigenbasis: one scalar solve per
/// eigenvalue with `mu = -lambda_i`, recomposed as `V diag(s_i) V^{-1}`.
/// Refuses eigenbases with condition number above
/// [`EIGENBASIS_CONDITION_CAP`].
pub fn spectral_resolvent(
    spec: &Spectralization,
    kernel: &Kernel,
    w: f64,
    grid: &TimeGrid,
) -> Result<OperatorResolventTable> {
    if spec.condition_number > EIGENBASIS_CONDITION_CAP {
        return Err(CoreError::IllConditionedEigenbasis {
            cond: spec.condition_number,
            cap: EIGENBASIS_CONDITION_CAP,
        });
    }
    let dim = spec.dim();
    let damped = kernel.damped(w);
    let weights = ConvolutionWeights::build(&|t| damped.eval(t), grid, damped.graded_first_cell())?;
    let n = grid.steps();

    // Independent scalar solves per eigenvalue.
    let scalar_tables: Vec<Vec<Complex64>> = spec
        .eigenvalues
        .par_iter()
        .map(|&lambda| scalar_resolvent_with_weights(&weights, -lambda, w, grid))
        .collect::<Result<Vec<_>>>()?;

    // Rank-one projectors P_i = v_i (V^{-1})_i write the recomposition as
    // S_k = sum_i s_i(t_k) P_i.
    let projectors: Vec<DMatrix<Complex64>> = (0..dim)
        .map(|i| {
            let col = spec.v.column(i).clone_owned();
            let row = spec.v_inv.row(i).clone_owned();
            col * row
        })
        .collect();

    let matrices: Vec<DMatrix<Complex64>> = (0..=n)
        .into_par_iter()
        .map(|k| {
            let mut s = DMatrix::<Complex64>::zeros(dim, dim);
            for (i, proj) in projectors.iter().enumerate() {
                s += proj * scalar_tables[i][k];
            }
            s
        })
        .collect();
    Ok(OperatorResolventTable {
        dim,
        grid: *grid,
        w,
        shift: 0.0,
        matrices,
    })
}

/// Discrete defect of the resolvent equation: the largest, over grid times
/// and canonical basis vectors, of
/// `|| S_k x - e^{-w t_k} x - (a_w * (A - rho) S x)(t_k) ||` evaluated with
/// the same product quadrature the solvers use.
pub fn resolvent_residual(
    table: &OperatorResolventTable,
    a: &DMatrix<Complex64>,
    kernel: &Kernel,
    grid: &TimeGrid,
) -> Result<f64> {
    if !grid.same_as(&table.grid) {
        return Err(CoreError::GridMismatch(
            "residual must be evaluated on the table's grid".into(),
        ));
    }
    let dim = table.dim;
    if a.nrows() != dim || a.ncols() != dim {
        return Err(CoreError::DimensionMismatch {
            expected: dim,
            got: a.nrows(),
        });
    }
    let damped = kernel.damped(table.w);
    let weights = ConvolutionWeights::build(&|t| damped.eval(t), grid, damped.graded_first_cell())?;
    let mut a_eff = a.clone();
    for d in 0..dim {
        a_eff[(d, d)] -= Complex64::new(table.shift, 0.0);
    }
    let a_s: Vec<DMatrix<Complex64>> = table.matrices.iter().map(|s| &a_eff * s).collect();
    let n = grid.steps();
    let mut worst = 0.0_f64;
    for k in 0..=n {
        let mut defect = table.matrices[k].clone();
        let damp = Complex64::new((-table.w * grid.point(k)).exp(), 0.0);
        for d in 0..dim {
            defect[(d, d)] -= damp;
        }
        if k >= 1 {
            defect -= &a_s[k] * Complex64::new(weights.head(), 0.0);
            defect -= &a_s[0] * Complex64::new(weights.tail(k), 0.0);
            for m in 1..k {
                defect -= &a_s[k - m] * Complex64::new(weights.full(m), 0.0);
            }
        }
        for j in 0..dim {
            worst = worst.max(defect.column(j).norm());
        }
    }
    Ok(worst)
}
