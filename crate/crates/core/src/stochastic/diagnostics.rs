//! Pathwise verification: the weak-solution residual, exact jump-transfer
//! bookkeeping, and ensemble regularity statistics.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::kernels::Kernel;
use crate::linalg::to_complex_vector;
use crate::quad::ConvolutionWeights;
use crate::stochastic::{MartingalePath, SolutionPath};

/// Max defect, over grid times and test vectors, of the weak identity
/// `<u(t), x> = <u0, x> + (a * <u, A^* x>)(t) + <L(t), x>`, with the
/// convolution evaluated by the same product quadrature the solvers use.
/// Default test vectors are the canonical basis.
pub fn weak_solution_residual(
    u: &SolutionPath,
    l: &MartingalePath,
    u0: &DVector<Complex64>,
    kernel: &Kernel,
    a: &DMatrix<Complex64>,
    test_vectors: Option<&[DVector<Complex64>]>,
) -> Result<f64> {
    let dim = u.dim();
    if !u.grid.same_as(&l.grid) {
        return Err(CoreError::GridMismatch("solution and path grids differ".into()));
    }
    if a.nrows() != dim || a.ncols() != dim || u0.len() != dim || l.dim() != dim {
        return Err(CoreError::DimensionMismatch {
            expected: dim,
            got: a.nrows(),
        });
    }
    let grid = u.grid;
    let n = grid.steps();
    let weights = ConvolutionWeights::build(&|t| kernel.eval(t), &grid, kernel.graded_first_cell())?;
    let canonical: Vec<DVector<Complex64>>;
    let vectors: &[DVector<Complex64>] = match test_vectors {
        Some(v) => v,
        None => {
            canonical = (0..dim)
                .map(|i| {
                    DVector::from_fn(dim, |r, _| {
                        if r == i {
                            Complex64::new(1.0, 0.0)
                        } else {
                            Complex64::new(0.0, 0.0)
                        }
                    })
                })
                .collect();
            &canonical
        }
    };
    let a_star = a.adjoint();
    let mut worst = 0.0_f64;
    for x in vectors {
        if x.len() != dim {
            return Err(CoreError::DimensionMismatch {
                expected: dim,
                got: x.len(),
            });
        }
        let ax = &a_star * x;
        // g_k = <u(t_k), A^* x>
        let g: Vec<Complex64> = (0..=n).map(|k| ax.dotc(&u.values[k])).collect();
        let conv = weights.convolve_complex(&g);
        let u0_x = x.dotc(u0);
        for k in 0..=n {
            let l_k = to_complex_vector(&l.value_at_index(k));
            let defect = x.dotc(&u.values[k]) - u0_x - conv[k] - x.dotc(&l_k);
            worst = worst.max(defect.norm());
        }
    }
    Ok(worst)
}

/// Result of matching the solution's jump list against the driver's.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct JumpTransferReport {
    pub total_jumps: usize,
    pub matched: usize,
    pub mismatched_times: Vec<f64>,
    /// Largest grid increment of `u` after removing recorded jumps
    /// (diagnostic only).
    pub max_inter_jump_increment: f64,
    pub passed: bool,
}

/// Verify that every jump of `L` appears in `u` at the same time with the
/// identical size (exact comparison; the representation transfers atoms
/// through `S(0) = I` untouched).
pub fn jump_transfer_check(u: &SolutionPath, l: &MartingalePath) -> JumpTransferReport {
    let mut matched = 0usize;
    let mut mismatched_times = Vec::new();
    for jump in &l.jumps {
        let hit = u
            .jumps
            .iter()
            .any(|uj| uj.time == jump.time && uj.size == jump.size);
        if hit {
            matched += 1;
        } else {
            mismatched_times.push(jump.time);
        }
    }
    let max_inter_jump_increment = max_continuous_increment(u);
    JumpTransferReport {
        total_jumps: l.jumps.len(),
        matched,
        mismatched_times,
        max_inter_jump_increment,
        passed: matched == l.jumps.len() && u.jumps.len() == l.jumps.len(),
    }
}

/// Largest `||u(t_{k+1}) - u(t_k) - (jumps in (t_k, t_{k+1}])||` over the grid.
fn max_continuous_increment(u: &SolutionPath) -> f64 {
    let n = u.grid.steps();
    let mut worst = 0.0_f64;
    for k in 0..n {
        let (t0, t1) = (u.grid.point(k), u.grid.point(k + 1));
        let mut incr = &u.values[k + 1] - &u.values[k];
        for jump in &u.jumps {
            if jump.time > t0 && jump.time <= t1 {
                incr -= to_complex_vector(&jump.size);
            }
        }
        worst = worst.max(incr.norm());
    }
    worst
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PathMode {
    Continuous,
    Cadlag,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RegularityReport {
    pub mode: PathMode,
    pub n_paths: usize,
    /// Max over the ensemble of the largest jump-corrected grid increment.
    pub max_continuous_increment: f64,
    /// Grid increments too large to be explained by the recorded jumps plus
    /// the detection threshold (must be 0 in cadlag mode).
    pub excess_jump_count: usize,
    pub detection_threshold: f64,
    /// Empirical `E sup_t ||u(t)||^2` (no asserted constant).
    pub mean_sup_sq: f64,
}

/// Ensemble regularity diagnostics. Continuous mode reports the worst
/// jump-corrected increment (it must shrink under grid refinement to be
/// consistent with continuous paths); cadlag mode additionally counts
/// unexplained jumps. Requires at least 100 paths for the statistics to mean
/// anything.
pub fn path_regularity_diagnostics(
    ensemble: &[SolutionPath],
    mode: PathMode,
    detection_threshold: Option<f64>,
) -> Result<RegularityReport> {
    if ensemble.len() < 100 {
        return Err(CoreError::InvalidArgument(format!(
            "regularity diagnostics need >= 100 paths, got {}",
            ensemble.len()
        )));
    }
    let mut max_incr = 0.0_f64;
    let mut sup_sq_sum = 0.0_f64;
    let mut scale = 0.0_f64;
    for path in ensemble {
        max_incr = max_incr.max(max_continuous_increment(path));
        let sup_sq = path.sup_norm_sq();
        sup_sq_sum += sup_sq;
        scale = scale.max(sup_sq.sqrt());
    }
    // Threshold for "this increment cannot be continuous-part motion":
    // defaults to a multiple of the expected sqrt(dt)-scale fluctuation.
    let h = ensemble[0].grid.spacing();
    let threshold =
        detection_threshold.unwrap_or_else(|| 12.0 * scale.max(1e-12) * h.sqrt() + 1e-9);
    let mut excess = 0usize;
    if mode == PathMode::Cadlag {
        for path in ensemble {
            let n = path.grid.steps();
            for k in 0..n {
                let (t0, t1) = (path.grid.point(k), path.grid.point(k + 1));
                let mut incr = &path.values[k + 1] - &path.values[k];
                for jump in &path.jumps {
                    if jump.time > t0 && jump.time <= t1 {
                        incr -= to_complex_vector(&jump.size);
                    }
                }
                if incr.norm() > threshold {
                    excess += 1;
                }
            }
        }
    }
    Ok(RegularityReport {
        mode,
        n_paths: ensemble.len(),
        max_continuous_increment: max_incr,
        excess_jump_count: excess,
        detection_threshold: threshold,
        mean_sup_sq: sup_sq_sum / ensemble.len() as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::TimeGrid;
    use crate::kernels::{builtin_kernel, BuiltinKernel};
    use crate::linalg::to_complex_matrix;
    use crate::resolvent::{matrix_resolvent, resolvent_residual};
    use crate::stochastic::{
        simulate_compound_poisson, stochastic_convolution, JumpLaw, MartingalePath,
    };

    #[test]
    fn deterministic_solution_residual_tracks_resolvent_defect() {
        let k = builtin_kernel(BuiltinKernel::ConstantOne).unwrap();
        let grid = TimeGrid::new(1.0, 256).unwrap();
        let a = to_complex_matrix(&nalgebra::DMatrix::from_row_slice(1, 1, &[-1.0]));
        let table = matrix_resolvent(&a, &k, 0.0, 0.0, &grid).unwrap();
        let l = MartingalePath::zero(grid, 1, 0);
        let u0 = DVector::from_vec(vec![Complex64::new(1.0, 0.0)]);
        let u = stochastic_convolution(&table, &l, &u0).unwrap();
        let weak = weak_solution_residual(&u, &l, &u0, &k, &a, None).unwrap();
        let res = resolvent_residual(&table, &a, &k, &grid).unwrap();
        assert!(weak <= 10.0 * res.max(1e-13), "weak {weak} vs res {res}");
    }

    #[test]
    fn identity_family_gives_zero_residual_with_zero_operator() {
        let grid = TimeGrid::new(1.0, 64).unwrap();
        let a = to_complex_matrix(&nalgebra::DMatrix::from_row_slice(1, 1, &[0.0]));
        let mats = (0..=64)
            .map(|_| nalgebra::DMatrix::<Complex64>::identity(1, 1))
            .collect();
        let table =
            crate::resolvent::OperatorResolventTable::from_matrices(grid, 0.0, 0.0, mats).unwrap();
        let k = builtin_kernel(BuiltinKernel::ConstantOne).unwrap();
        let l =
            simulate_compound_poisson(3.0, &JumpLaw::Rademacher { scale: 1.0 }, 1, &grid, 17)
                .unwrap();
        let u0 = DVector::from_vec(vec![Complex64::new(0.3, 0.0)]);
        let u = stochastic_convolution(&table, &l, &u0).unwrap();
        let weak = weak_solution_residual(&u, &l, &u0, &k, &a, None).unwrap();
        assert!(weak < 1e-12, "residual {weak}");
    }

    #[test]
    fn jumps_transfer_exactly() {
        let k = builtin_kernel(BuiltinKernel::ConstantOne).unwrap();
        let grid = TimeGrid::new(1.0, 128).unwrap();
        let a = to_complex_matrix(&nalgebra::DMatrix::from_row_slice(1, 1, &[-1.0]));
        let table = matrix_resolvent(&a, &k, 0.0, 0.0, &grid).unwrap();
        let l =
            simulate_compound_poisson(6.0, &JumpLaw::Rademacher { scale: 0.5 }, 1, &grid, 23)
                .unwrap();
        let u0 = DVector::from_vec(vec![Complex64::new(0.0, 0.0)]);
        let u = stochastic_convolution(&table, &l, &u0).unwrap();
        let report = jump_transfer_check(&u, &l);
        assert!(report.passed);
        assert_eq!(report.matched, report.total_jumps);
    }

    #[test]
    fn vacuous_jump_check_passes() {
        let grid = TimeGrid::new(1.0, 16).unwrap();
        let mats = (0..=16)
            .map(|_| nalgebra::DMatrix::<Complex64>::identity(1, 1))
            .collect();
        let table =
            crate::resolvent::OperatorResolventTable::from_matrices(grid, 0.0, 0.0, mats).unwrap();
        let l = MartingalePath::zero(grid, 1, 0);
        let u = stochastic_convolution(
            &table,
            &l,
            &DVector::from_vec(vec![Complex64::new(1.0, 0.0)]),
        )
        .unwrap();
        let report = jump_transfer_check(&u, &l);
        assert!(report.passed);
        assert_eq!(report.total_jumps, 0);
    }

    #[test]
    fn regularity_needs_enough_paths() {
        let grid = TimeGrid::new(1.0, 8).unwrap();
        let mats = (0..=8)
            .map(|_| nalgebra::DMatrix::<Complex64>::identity(1, 1))
            .collect();
        let table =
            crate::resolvent::OperatorResolventTable::from_matrices(grid, 0.0, 0.0, mats).unwrap();
        let l = MartingalePath::zero(grid, 1, 0);
        let u = stochastic_convolution(
            &table,
            &l,
            &DVector::from_vec(vec![Complex64::new(1.0, 0.0)]),
        )
        .unwrap();
        let err = path_regularity_diagnostics(&[u], PathMode::Continuous, None);
        assert!(err.is_err());
    }

    #[test]
    fn poisson_ensemble_has_no_excess_jumps() {
        let k = builtin_kernel(BuiltinKernel::ConstantOne).unwrap();
        let grid = TimeGrid::new(1.0, 64).unwrap();
        let a = to_complex_matrix(&nalgebra::DMatrix::from_row_slice(1, 1, &[-1.0]));
        let table = matrix_resolvent(&a, &k, 0.0, 0.0, &grid).unwrap();
        let u0 = DVector::from_vec(vec![Complex64::new(0.0, 0.0)]);
        let ensemble: Vec<SolutionPath> = (0..128)
            .map(|i| {
                let l = simulate_compound_poisson(
                    5.0,
                    &JumpLaw::Rademacher { scale: 1.0 },
                    1,
                    &grid,
                    crate::stochastic::derive_path_seed(7, i),
                )
                .unwrap();
                stochastic_convolution(&table, &l, &u0).unwrap()
            })
            .collect();
        let report =
            path_regularity_diagnostics(&ensemble, PathMode::Cadlag, None).unwrap();
        assert_eq!(report.excess_jump_count, 0);
    }
}
