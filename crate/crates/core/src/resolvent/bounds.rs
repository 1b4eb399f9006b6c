//! Laplace-domain bound check for the damped scalar resolvent symbol
//! `s^_{w,mu}(lambda) = 1 / ((lambda + w)(1 + mu a^(lambda + w)))`:
//! measures `sup |lambda s^| + |lambda^2 (s^)'|` over sampled
//! `mu` in a sector and `lambda` in the right half-plane, against the
//! constant `2 M1 + M2` determined by the certified angles.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::kernels::{HalfPlaneSampling, Kernel, SectorCertificate};

/// Outcome of the bound check.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundReport {
    pub psi: f64,
    pub m1: f64,
    pub m2: f64,
    pub k_theory: f64,
    pub k_measured: f64,
    pub worst_mu: Complex64,
    pub worst_lambda: Complex64,
    pub violations: usize,
    pub passed: bool,
}

/// Log-modulus x angle samples of the open sector `Sigma_psi`.
pub fn sector_mu_samples(psi: f64, moduli: usize, angles: usize) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(moduli * angles);
    let (lo, hi) = (1e-3_f64.ln(), 1e3_f64.ln());
    for i in 0..moduli {
        let r = if moduli == 1 {
            1.0
        } else {
            (lo + (hi - lo) * i as f64 / (moduli - 1) as f64).exp()
        };
        for j in 0..angles {
            let theta = if angles == 1 {
                0.0
            } else {
                0.999 * psi * (2.0 * j as f64 / (angles - 1) as f64 - 1.0)
            };
            out.push(Complex64::from_polar(r, theta));
        }
    }
    out
}

/// Numeric supremum of `|c z / (1 + z)^2|` over the boundary rays of the
/// sector with half-opening `pi - theta`, refined on a dense log grid.
fn m2_on_boundary(c_reg: f64, theta: f64) -> f64 {
    let angle = PI - theta;
    let mut sup = 0.0_f64;
    let samples = 20_000;
    let (lo, hi) = (1e-8_f64.ln(), 1e8_f64.ln());
    for sgn in [-1.0, 1.0] {
        for i in 0..samples {
            let r = (lo + (hi - lo) * i as f64 / (samples - 1) as f64).exp();
            let z = Complex64::from_polar(r, sgn * angle);
            let denom = (Complex64::new(1.0, 0.0) + z).norm_sqr();
            if denom > 0.0 {
                sup = sup.max(c_reg * z.norm() / denom);
            }
        }
    }
    sup
}

/// Symbol and its closed-form derivative.
fn symbol_pair(
    kernel: &Kernel,
    mu: Complex64,
    w: f64,
    lambda: Complex64,
) -> Option<(Complex64, Complex64)> {
    let shifted = lambda + w;
    let a_hat = kernel.laplace(shifted);
    let a_hat_d = kernel.laplace_deriv(shifted);
    let denom = Complex64::new(1.0, 0.0) + mu * a_hat;
    if denom.norm() < 1e-12 {
        return None;
    }
    let s_hat = 1.0 / (shifted * denom);
    let s_hat_d = -1.0 / (shifted * shifted * denom)
        - mu * a_hat_d / (shifted * denom * denom);
    Some((s_hat, s_hat_d))
}

/// Measure `sup (|lambda s^| + |lambda^2 (s^)'|)` over the sampled grids and
/// compare against `K = 2 M1 + M2` with `M1 = 1 / sin(phi - psi)` and `M2`
/// the numeric boundary supremum of `|c z / (1+z)^2|`.
pub fn laplace_bound_check(
    kernel: &Kernel,
    cert: &SectorCertificate,
    psi: f64,
    mu_samples: &[Complex64],
    lambda_sampling: &HalfPlaneSampling,
) -> Result<BoundReport> {
    if !cert.passed {
        return Err(CoreError::InvalidArgument(
            "bound check requires a passing certificate".into(),
        ));
    }
    if !(psi > cert.phi_a_bound && psi < cert.phi) {
        return Err(CoreError::InvalidArgument(format!(
            "psi = {psi} outside (phi_A, phi) = ({}, {})",
            cert.phi_a_bound, cert.phi
        )));
    }
    lambda_sampling.validate()?;
    if mu_samples.is_empty() {
        return Err(CoreError::InvalidArgument("no mu samples".into()));
    }
    let theta = cert.phi - psi;
    let m1 = 1.0 / theta.sin();
    let m2 = m2_on_boundary(cert.c_reg, theta);
    let k_theory = 2.0 * m1 + m2;

    let lambdas = lambda_sampling.samples(0.0);
    let mut k_measured = 0.0_f64;
    let mut worst_mu = Complex64::new(0.0, 0.0);
    let mut worst_lambda = Complex64::new(0.0, 0.0);
    let mut violations = 0usize;
    for &mu in mu_samples {
        for &lambda in &lambdas {
            match symbol_pair(kernel, mu, cert.w, lambda) {
                Some((s_hat, s_hat_d)) => {
                    let value = (lambda * s_hat).norm() + (lambda * lambda * s_hat_d).norm();
                    if !value.is_finite() {
                        violations += 1;
                        continue;
                    }
                    if value > k_measured {
                        k_measured = value;
                        worst_mu = mu;
                        worst_lambda = lambda;
                    }
                }
                None => {
                    // 1 + mu a^ vanished: a sector-condition violation witness.
                    violations += 1;
                }
            }
        }
    }
    let passed = violations == 0 && k_measured <= k_theory + 1e-9;
    Ok(BoundReport {
        psi,
        m1,
        m2,
        k_theory,
        k_measured,
        worst_mu,
        worst_lambda,
        violations,
        passed,
    })
}

/// Default `psi`: midpoint of `(phi_A, phi)`.
pub fn default_psi(cert: &SectorCertificate) -> f64 {
    0.5 * (cert.phi_a_bound + cert.phi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{builtin_kernel, verify_admissibility, BuiltinKernel};

    #[test]
    fn m1_matches_distance_oracle_at_pi_over_six() {
        // For theta = pi/6 the distance from -1 to the sector of half-opening
        // pi - theta equals sin(theta) = 1/2, so M1 = 2. Cross-check the
        // closed form with a numeric minimization over the boundary rays.
        let theta = PI / 6.0;
        let m1_formula = 1.0 / theta.sin();
        let mut min_dist = f64::INFINITY;
        for sgn in [-1.0, 1.0] {
            for i in 0..200_000 {
                let r = 1e-4 * (1e8_f64).powf(i as f64 / 199_999.0);
                let z = Complex64::from_polar(r, sgn * (PI - theta));
                min_dist = min_dist.min((Complex64::new(1.0, 0.0) + z).norm());
            }
        }
        assert!((m1_formula - 2.0).abs() < 1e-12);
        assert!((1.0 / min_dist - 2.0).abs() < 1e-4, "numeric {min_dist}");
    }

    #[test]
    fn mu_zero_bound_is_two() {
        let k = builtin_kernel(BuiltinKernel::ConstantOne).unwrap();
        let sampling = HalfPlaneSampling::default();
        let mut sup = 0.0_f64;
        for lambda in sampling.samples(0.0) {
            let (s, sd) = symbol_pair(&k, Complex64::new(0.0, 0.0), 0.0, lambda).unwrap();
            sup = sup.max((lambda * s).norm() + (lambda * lambda * sd).norm());
        }
        assert!(sup <= 2.0 + 1e-12, "sup {sup}");
    }

    #[test]
    fn constant_kernel_real_mu_symbol_is_contractive() {
        let k = builtin_kernel(BuiltinKernel::ConstantOne).unwrap();
        let sampling = HalfPlaneSampling::default();
        for mu_r in [0.5, 1.0, 4.0] {
            let mu = Complex64::new(mu_r, 0.0);
            for lambda in sampling.samples(0.0) {
                let (s, _) = symbol_pair(&k, mu, 0.0, lambda).unwrap();
                assert!((lambda * s).norm() <= 1.0 + 1e-10);
            }
        }
    }

    #[test]
    fn fractional_certificate_bound_holds() {
        let k = builtin_kernel(BuiltinKernel::Fractional { beta: 0.5 }).unwrap();
        let cert = verify_admissibility(&k, PI / 8.0, &HalfPlaneSampling::default()).unwrap();
        let psi = default_psi(&cert);
        let mus = sector_mu_samples(psi, 10, 10);
        let sampling = HalfPlaneSampling {
            moduli: 32,
            angles: 33,
            ..Default::default()
        };
        let report = laplace_bound_check(&k, &cert, psi, &mus, &sampling).unwrap();
        assert_eq!(report.violations, 0);
        assert!(
            report.passed,
            "K_measured {} vs K_theory {}",
            report.k_measured, report.k_theory
        );
    }

    #[test]
    fn psi_outside_window_is_rejected() {
        let k = builtin_kernel(BuiltinKernel::Fractional { beta: 0.5 }).unwrap();
        let cert = verify_admissibility(&k, PI / 8.0, &HalfPlaneSampling::default()).unwrap();
        let mus = sector_mu_samples(0.3, 2, 2);
        let err = laplace_bound_check(&k, &cert, cert.phi + 0.1, &mus, &HalfPlaneSampling::default());
        assert!(matches!(err, Err(CoreError::InvalidArgument(_))));
    }
}
