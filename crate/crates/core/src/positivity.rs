//! Positive-definiteness machinery: the Gram-matrix test for sampled operator
//! families (extended to negative times by `R(-t) = R(t)^*`) and the Fourier
//! nonnegativity test for the scalar symbol along the imaginary axis.

use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::kernels::{Kernel, SectorCertificate};
use crate::linalg;
use crate::resolvent::OperatorResolventTable;

/// Hard cap on the assembled Gram dimension (dense eigenvalue solve).
pub const GRAM_SIZE_CAP: usize = 4096;

/// Outcome of a Gram positivity check.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GramReport {
    pub min_eigenvalue: f64,
    pub norm: f64,
    pub tol: f64,
    pub time_samples: Vec<f64>,
    pub block_dim: usize,
    pub hermitian_defect: f64,
    pub passed: bool,
}

/// Assemble the Hermitian block Gram matrix
/// `G_{nm} = e^{-w |t_n - t_m|} R(t_n - t_m)` from a resolvent table
/// (`R(t) = e^{w_table t} * stored`, `R(-t) = R(t)^*`) and report its minimum
/// eigenvalue. `passed` iff `min >= -rel_tol * ||G||`, default
/// `rel_tol = 1e-8`; the resolved absolute tolerance lands in the report.
pub fn gram_positivity_check(
    table: &OperatorResolventTable,
    w: f64,
    sample_indices: &[usize],
    rel_tol: Option<f64>,
) -> Result<GramReport> {
    if sample_indices.is_empty() {
        return Err(CoreError::InvalidArgument("no time samples".into()));
    }
    let n_samples = sample_indices.len();
    let dim = table.dim;
    let size = n_samples * dim;
    if size > GRAM_SIZE_CAP {
        return Err(CoreError::SizeCapExceeded {
            size,
            cap: GRAM_SIZE_CAP,
        });
    }
    for &idx in sample_indices {
        if idx > table.grid.steps() {
            return Err(CoreError::InvalidArgument(format!(
                "sample index {idx} beyond grid ({} steps)",
                table.grid.steps()
            )));
        }
    }

    let mut gram = DMatrix::<Complex64>::zeros(size, size);
    for (bn, &in_) in sample_indices.iter().enumerate() {
        for (bm, &im_) in sample_indices.iter().enumerate() {
            // Block (bn, bm) holds e^{-w|dt|} R(t_n - t_m).
            let (lag, conjugate) = if in_ >= im_ {
                (in_ - im_, false)
            } else {
                (im_ - in_, true)
            };
            let dt = table.grid.point(lag);
            let damp = (-w * dt).exp();
            let r = table.resolvent_at(lag);
            for i in 0..dim {
                for j in 0..dim {
                    let v = if conjugate { r[(j, i)].conj() } else { r[(i, j)] };
                    gram[(bn * dim + i, bm * dim + j)] = v * damp;
                }
            }
        }
    }
    if gram.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(CoreError::NonFinite("Gram matrix entries".into()));
    }

    let adjoint = gram.adjoint();
    let hermitian_defect = linalg::max_abs_entry(&(&gram - &adjoint));
    let symmetrized = (&gram + &adjoint) * Complex64::new(0.5, 0.0);
    let (eigs, _) = linalg::hermitian_eigen(&symmetrized, false)?;
    let min_eigenvalue = eigs[0];
    let norm = eigs.iter().fold(0.0_f64, |acc, &x| acc.max(x.abs()));
    let tol = rel_tol.unwrap_or(1e-8) * norm;
    Ok(GramReport {
        min_eigenvalue,
        norm,
        tol,
        time_samples: sample_indices.iter().map(|&i| table.grid.point(i)).collect(),
        block_dim: dim,
        hermitian_defect,
        passed: min_eigenvalue >= -tol,
    })
}

/// Evenly spread `count` sample indices over the grid, endpoints included.
pub fn equispaced_indices(grid_steps: usize, count: usize) -> Vec<usize> {
    if count <= 1 {
        return vec![0];
    }
    (0..count)
        .map(|i| (i * grid_steps) / (count - 1))
        .collect()
}

/// Angle bookkeeping for the dilation exponent: `alpha = 2 beta / pi` with
/// `phi_A < beta` and `beta + sigma < pi/2`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct AngleBudget {
    pub beta: f64,
    pub alpha: f64,
    pub sigma: f64,
    pub phi_a_bound: f64,
}

impl AngleBudget {
    pub fn new(beta: f64, sigma: f64, phi_a_bound: f64) -> Result<Self> {
        if !(beta > phi_a_bound) {
            return Err(CoreError::NoAngleBudget {
                lo: phi_a_bound,
                hi: beta,
            });
        }
        if !(beta + sigma < FRAC_PI_2) {
            return Err(CoreError::NoAngleBudget {
                lo: phi_a_bound,
                hi: FRAC_PI_2 - sigma,
            });
        }
        let alpha = 2.0 * beta / PI;
        debug_assert!(alpha > 0.0 && alpha < 1.0);
        Ok(Self {
            beta,
            alpha,
            sigma,
            phi_a_bound,
        })
    }
}

/// Choose `beta` as the midpoint of `(phi_A, min(phi, pi/2 - sigma))`; errors
/// when that interval is empty (the kernel/operator pair is inadmissible).
pub fn angle_budget(phi_a_bound: f64, cert: &SectorCertificate) -> Result<AngleBudget> {
    if !cert.passed {
        return Err(CoreError::InvalidArgument(
            "angle budget requires a passing certificate".into(),
        ));
    }
    let upper = cert.phi.min(FRAC_PI_2 - cert.sigma);
    if upper <= phi_a_bound {
        return Err(CoreError::NoAngleBudget {
            lo: phi_a_bound,
            hi: upper,
        });
    }
    AngleBudget::new(0.5 * (phi_a_bound + upper), cert.sigma, phi_a_bound)
}

/// One offending grid point of the Fourier test.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BochnerViolation {
    pub tau: f64,
    pub xi: f64,
    pub value: f64,
    pub reason: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BochnerReport {
    pub min_value: f64,
    pub tol: f64,
    pub tau_count: usize,
    pub xi_count: usize,
    pub violations: Vec<BochnerViolation>,
    pub passed: bool,
}

/// Evaluate `Re[((1 + |tau|^alpha e^{+-i alpha pi/2} a^(w + i xi)) (w + i xi))^{-1}]`
/// over the sample grid (sign follows the sign of `tau`) and flag values
/// below `-tol`. Nonnegativity of this quantity is the scalar positivity
/// test for the dilated symbol.
pub fn bochner_check(
    kernel: &Kernel,
    budget: &AngleBudget,
    w: f64,
    tau_samples: &[f64],
    xi_samples: &[f64],
    tol: f64,
) -> Result<BochnerReport> {
    if tau_samples.is_empty() || xi_samples.is_empty() {
        return Err(CoreError::InvalidArgument("empty sample grid".into()));
    }
    if xi_samples.iter().any(|&xi| xi < 0.0) {
        return Err(CoreError::InvalidArgument(
            "xi samples must be nonnegative".into(),
        ));
    }
    let has_nonneg = tau_samples.iter().any(|&t| t >= 0.0);
    let has_nonpos = tau_samples.iter().any(|&t| t <= 0.0);
    if !(has_nonneg && has_nonpos) {
        return Err(CoreError::InvalidArgument(
            "tau samples must cover both signs".into(),
        ));
    }

    let half_turn = budget.alpha * FRAC_PI_2;
    let mut min_value = f64::INFINITY;
    let mut violations = Vec::new();
    for &tau in tau_samples {
        // +- follows the sign of tau; tau = 0 kills the kernel term entirely.
        let rot = Complex64::from_polar(1.0, half_turn * tau.signum());
        let magnitude = tau.abs().powf(budget.alpha);
        for &xi in xi_samples {
            let lambda = Complex64::new(w, xi);
            let denom = (Complex64::new(1.0, 0.0)
                + magnitude * rot * kernel.laplace(lambda))
                * lambda;
            if denom.norm() < 1e-14 {
                violations.push(BochnerViolation {
                    tau,
                    xi,
                    value: f64::NAN,
                    reason: "denominator vanished (sector condition failure)".into(),
                });
                continue;
            }
            let value = (1.0 / denom).re;
            if !value.is_finite() {
                violations.push(BochnerViolation {
                    tau,
                    xi,
                    value,
                    reason: "non-finite value".into(),
                });
                continue;
            }
            min_value = min_value.min(value);
            if value < -tol {
                violations.push(BochnerViolation {
                    tau,
                    xi,
                    value,
                    reason: "negative real part".into(),
                });
            }
        }
    }
    let passed = violations.is_empty();
    Ok(BochnerReport {
        min_value,
        tol,
        tau_count: tau_samples.len(),
        xi_count: xi_samples.len(),
        violations,
        passed,
    })
}

/// Default symmetric tau grid: `0` plus `+-` log-spaced magnitudes.
pub fn default_tau_samples(count: usize) -> Vec<f64> {
    let half = count / 2;
    let mut out = Vec::with_capacity(2 * half + 1);
    for i in (0..half).rev() {
        out.push(-log_sample(i, half));
    }
    out.push(0.0);
    for i in 0..half {
        out.push(log_sample(i, half));
    }
    out
}

/// Default xi grid: log-spaced positive frequencies.
pub fn default_xi_samples(count: usize) -> Vec<f64> {
    (0..count).map(|i| log_sample(i, count)).collect()
}

fn log_sample(i: usize, count: usize) -> f64 {
    let (lo, hi) = (1e-2_f64.ln(), 1e2_f64.ln());
    if count <= 1 {
        return 1.0;
    }
    (lo + (hi - lo) * i as f64 / (count - 1) as f64).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::TimeGrid;
    use crate::kernels::{builtin_kernel, verify_admissibility, BuiltinKernel, HalfPlaneSampling};
    use crate::linalg::to_complex_matrix;
    use crate::resolvent::matrix_resolvent;
    use nalgebra::DMatrix;

    const PI_4: f64 = std::f64::consts::FRAC_PI_4;

    #[test]
    fn single_sample_gram_is_identity() {
        let k = builtin_kernel(BuiltinKernel::ConstantOne).unwrap();
        let grid = TimeGrid::new(1.0, 16).unwrap();
        let a = to_complex_matrix(&DMatrix::from_row_slice(2, 2, &[-1.0, 0.0, 0.0, -4.0]));
        let table = matrix_resolvent(&a, &k, 0.0, 0.0, &grid).unwrap();
        let report = gram_positivity_check(&table, 0.0, &[0], None).unwrap();
        assert!(report.passed);
        assert!((report.min_eigenvalue - 1.0).abs() < 1e-12);
        assert!(report.hermitian_defect < 1e-14);
    }

    #[test]
    fn diagonal_negative_fractional_family_is_positive_definite() {
        let k = builtin_kernel(BuiltinKernel::Fractional { beta: 0.5 }).unwrap();
        let grid = TimeGrid::new(1.0, 512).unwrap();
        let a = to_complex_matrix(&DMatrix::from_row_slice(2, 2, &[-1.0, 0.0, 0.0, -4.0]));
        let table = matrix_resolvent(&a, &k, 0.0, 0.0, &grid).unwrap();
        let idx = equispaced_indices(512, 8);
        let report = gram_positivity_check(&table, 0.0, &idx, None).unwrap();
        assert!(
            report.passed,
            "min eig {} vs tol {}",
            report.min_eigenvalue, report.tol
        );
    }

    #[test]
    fn nilpotent_probe_family_fails() {
        // R(t) = I + t N with N nilpotent non-normal is not a positive
        // definite family; the assembled Gram has a clearly negative
        // eigenvalue.
        let grid = TimeGrid::new(1.0, 8).unwrap();
        let nil = DMatrix::from_row_slice(2, 2, &[0.0, 4.0, 0.0, 0.0]);
        let mats: Vec<DMatrix<Complex64>> = grid
            .points()
            .map(|t| {
                to_complex_matrix(&(DMatrix::<f64>::identity(2, 2) + &nil * t))
            })
            .collect();
        let table = OperatorResolventTable::from_matrices(grid, 0.0, 0.0, mats).unwrap();
        let idx = equispaced_indices(8, 5);
        let report = gram_positivity_check(&table, 0.0, &idx, None).unwrap();
        assert!(!report.passed);
        assert!(report.min_eigenvalue < -1e-3);
    }

    #[test]
    fn size_cap_is_enforced() {
        let k = builtin_kernel(BuiltinKernel::ConstantOne).unwrap();
        let grid = TimeGrid::new(1.0, 8192).unwrap();
        let a = to_complex_matrix(&DMatrix::from_row_slice(1, 1, &[-1.0]));
        let table = matrix_resolvent(&a, &k, 0.0, 0.0, &grid).unwrap();
        let idx: Vec<usize> = (0..5000).collect();
        assert!(matches!(
            gram_positivity_check(&table, 0.0, &idx, None),
            Err(CoreError::SizeCapExceeded { .. })
        ));
    }

    #[test]
    fn tolerance_monotonicity() {
        let k = builtin_kernel(BuiltinKernel::Fractional { beta: 0.5 }).unwrap();
        let grid = TimeGrid::new(1.0, 128).unwrap();
        let a = to_complex_matrix(&DMatrix::from_row_slice(1, 1, &[-2.0]));
        let table = matrix_resolvent(&a, &k, 0.0, 0.0, &grid).unwrap();
        let idx = equispaced_indices(128, 6);
        let tight = gram_positivity_check(&table, 0.0, &idx, Some(1e-12)).unwrap();
        if tight.passed {
            let loose = gram_positivity_check(&table, 0.0, &idx, Some(1e-6)).unwrap();
            assert!(loose.passed);
        }
    }

    #[test]
    fn budget_from_fractional_certificate() {
        let k = builtin_kernel(BuiltinKernel::Fractional { beta: 0.5 }).unwrap();
        let cert = verify_admissibility(&k, PI / 8.0, &HalfPlaneSampling::default()).unwrap();
        let budget = angle_budget(PI / 8.0, &cert).unwrap();
        // interval (pi/8, pi/4): midpoint 3 pi / 16, alpha = 3/8
        assert!((budget.beta - 3.0 * PI / 16.0).abs() < 1e-6);
        assert!((budget.alpha - 0.375).abs() < 1e-6);
    }

    #[test]
    fn budget_midpoint_for_constant_kernel() {
        let k = builtin_kernel(BuiltinKernel::ConstantOne).unwrap();
        let cert = verify_admissibility(&k, 1e-9, &HalfPlaneSampling::default()).unwrap();
        let budget = angle_budget(1e-9, &cert).unwrap();
        assert!((budget.beta - PI_4).abs() < 1e-6);
        assert!((budget.alpha - 0.5).abs() < 1e-6);
    }

    #[test]
    fn sigma_at_right_angle_has_no_budget() {
        // sigma = pi/2 leaves no admissible beta.
        let err = AngleBudget::new(0.3, FRAC_PI_2, 0.1);
        assert!(matches!(err, Err(CoreError::NoAngleBudget { .. })));
    }

    #[test]
    fn tau_zero_row_reduces_to_poisson_kernel() {
        let k = builtin_kernel(BuiltinKernel::Fractional { beta: 0.5 }).unwrap();
        let budget = AngleBudget::new(3.0 * PI / 16.0, PI_4, PI / 8.0).unwrap();
        let xi = [0.5, 1.0, 2.0];
        let w = 0.7;
        let report = bochner_check(&k, &budget, w, &[-1.0, 0.0, 1.0], &xi, 1e-10).unwrap();
        assert!(report.passed);
        // check the tau = 0 values directly: Re((w + i xi)^{-1}) = w / (w^2 + xi^2)
        for &x in &xi {
            let expect = w / (w * w + x * x);
            let lambda = Complex64::new(w, x);
            let got = (1.0 / lambda).re;
            assert!((got - expect).abs() < 1e-14);
        }
    }

    #[test]
    fn fractional_half_grid_is_nonnegative() {
        let k = builtin_kernel(BuiltinKernel::Fractional { beta: 0.5 }).unwrap();
        let budget = AngleBudget::new(3.0 * PI / 16.0, PI_4, PI / 8.0).unwrap();
        let report = bochner_check(
            &k,
            &budget,
            0.0,
            &default_tau_samples(33),
            &default_xi_samples(33),
            1e-10,
        )
        .unwrap();
        assert!(report.passed, "min value {}", report.min_value);
        assert!(report.min_value >= -1e-10);
    }

    #[test]
    fn xi_sign_and_tau_coverage_are_validated() {
        let k = builtin_kernel(BuiltinKernel::ConstantOne).unwrap();
        let budget = AngleBudget::new(0.5, 0.2, 0.1).unwrap();
        assert!(bochner_check(&k, &budget, 0.0, &[0.0, 1.0], &[-1.0], 1e-10).is_err());
        assert!(bochner_check(&k, &budget, 0.0, &[1.0, 2.0], &[1.0], 1e-10).is_err());
    }
}
