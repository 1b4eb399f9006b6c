//! Sampled sector-condition certification.
//!
//! The certificate is explicitly a *sampled* one: it measures suprema of
//! `|arg(lambda a^(lambda))|`, `|arg a^(lambda)|` and the 1-regularity ratio
//! over a finite half-plane grid and records that grid. Enlarging the grid can
//! only tighten the measured constants toward the true suprema.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::kernels::Kernel;

/// Slack (radians) absorbed when comparing measured angles against strict
/// inequalities, to tolerate `arg()` jitter at tiny imaginary parts.
pub const SECTOR_SLACK: f64 = 1e-10;

/// Log-modulus x angle grid covering `{Re lambda > w}`: samples are
/// `lambda = w + r e^{i theta}` with `r` log-spaced and `theta` uniform in
/// `(-pi/2 + margin, pi/2 - margin)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HalfPlaneSampling {
    pub modulus_min: f64,
    pub modulus_max: f64,
    pub moduli: usize,
    pub angles: usize,
    pub angle_margin: f64,
    /// Shift candidates, searched in order; the first passing `w` is reported.
    pub w_ladder: Vec<f64>,
}

impl Default for HalfPlaneSampling {
    fn default() -> Self {
        Self {
            modulus_min: 1e-4,
            modulus_max: 1e4,
            moduli: 64,
            angles: 65,
            // Keeps the extreme rays within ~1e-7 of the imaginary axis so
            // measured angles resolve sector openings to better than 1e-6.
            angle_margin: 1e-7,
            w_ladder: Self::default_ladder(),
        }
    }
}

impl HalfPlaneSampling {
    /// `{0, 1, 2, 4, ..., 1024}`.
    pub fn default_ladder() -> Vec<f64> {
        let mut ladder = vec![0.0];
        let mut w = 1.0;
        while w <= 1024.0 {
            ladder.push(w);
            w *= 2.0;
        }
        ladder
    }

    pub fn validate(&self) -> Result<()> {
        if self.moduli == 0 || self.angles == 0 || self.w_ladder.is_empty() {
            return Err(CoreError::InvalidArgument(
                "sampling spec must contain at least one modulus, angle and shift".into(),
            ));
        }
        if !(self.modulus_min > 0.0 && self.modulus_max > self.modulus_min) {
            return Err(CoreError::InvalidArgument(format!(
                "modulus range [{}, {}] is empty or invalid",
                self.modulus_min, self.modulus_max
            )));
        }
        if !(self.angle_margin > 0.0 && self.angle_margin < FRAC_PI_2) {
            return Err(CoreError::InvalidArgument(format!(
                "angle margin {} outside (0, pi/2)",
                self.angle_margin
            )));
        }
        Ok(())
    }

    fn moduli_values(&self) -> Vec<f64> {
        if self.moduli == 1 {
            return vec![self.modulus_min];
        }
        let (lo, hi) = (self.modulus_min.ln(), self.modulus_max.ln());
        (0..self.moduli)
            .map(|i| (lo + (hi - lo) * i as f64 / (self.moduli - 1) as f64).exp())
            .collect()
    }

    fn angle_values(&self) -> Vec<f64> {
        let max = FRAC_PI_2 - self.angle_margin;
        if self.angles == 1 {
            return vec![0.0];
        }
        (0..self.angles)
            .map(|j| max * (2.0 * j as f64 / (self.angles - 1) as f64 - 1.0))
            .collect()
    }

    /// All samples for a given shift `w`.
    pub fn samples(&self, w: f64) -> Vec<Complex64> {
        let moduli = self.moduli_values();
        let angles = self.angle_values();
        let mut out = Vec::with_capacity(moduli.len() * angles.len());
        for &r in &moduli {
            for &theta in &angles {
                out.push(Complex64::new(w + r * theta.cos(), r * theta.sin()));
            }
        }
        out
    }
}

/// A single witnessed condition failure.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Violation {
    pub lambda: Complex64,
    pub condition: String,
    pub measured: f64,
}

/// Measured sector data for one kernel: tightest opening `sigma` of the
/// sector containing `lambda a^(lambda)`, tightest `phi` with
/// `a^(lambda)` in the sector of opening `pi - phi`, the 1-regularity
/// constant `c_reg`, the shift `w` it was measured at, and pass/fail
/// witnesses.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SectorCertificate {
    pub sigma: f64,
    pub phi: f64,
    #[serde(rename = "c")]
    pub c_reg: f64,
    pub w: f64,
    pub rho: f64,
    pub phi_a_bound: f64,
    pub passed: bool,
    pub violations: Vec<Violation>,
    pub kernel_name: String,
    pub sampling: HalfPlaneSampling,
}

impl SectorCertificate {
    /// Record the operator shift this certificate is meant to pair with.
    pub fn with_rho(mut self, rho: f64) -> Self {
        self.rho = rho;
        self
    }
}

struct Measurement {
    sigma: f64,
    sigma_witness: Complex64,
    arg_hat_sup: f64,
    phi_witness: Complex64,
    c_reg: f64,
    c_witness: Complex64,
    bad_samples: Vec<(Complex64, String)>,
}

fn measure(kernel: &Kernel, samples: &[Complex64]) -> Measurement {
    let mut m = Measurement {
        sigma: 0.0,
        sigma_witness: Complex64::new(0.0, 0.0),
        arg_hat_sup: 0.0,
        phi_witness: Complex64::new(0.0, 0.0),
        c_reg: 0.0,
        c_witness: Complex64::new(0.0, 0.0),
        bad_samples: Vec::new(),
    };
    for &lambda in samples {
        let hat = kernel.laplace(lambda);
        let hat_d = kernel.laplace_deriv(lambda);
        let finite = hat.re.is_finite() && hat.im.is_finite();
        let finite_d = hat_d.re.is_finite() && hat_d.im.is_finite();
        if !finite || !finite_d {
            if m.bad_samples.len() < 8 {
                m.bad_samples
                    .push((lambda, "transform evaluator returned NaN/Inf".into()));
            }
            continue;
        }
        if hat.norm() == 0.0 {
            if m.bad_samples.len() < 8 {
                m.bad_samples.push((lambda, "transform vanished".into()));
            }
            continue;
        }
        let arg_symbol = (lambda * hat).arg().abs();
        if arg_symbol > m.sigma {
            m.sigma = arg_symbol;
            m.sigma_witness = lambda;
        }
        let arg_hat = hat.arg().abs();
        if arg_hat > m.arg_hat_sup {
            m.arg_hat_sup = arg_hat;
            m.phi_witness = lambda;
        }
        let ratio = (lambda * hat_d).norm() / hat.norm();
        if ratio > m.c_reg {
            m.c_reg = ratio;
            m.c_witness = lambda;
        }
    }
    m
}

fn certificate_from(
    kernel: &Kernel,
    sampling: &HalfPlaneSampling,
    phi_a_bound: f64,
    w: f64,
    m: &Measurement,
) -> SectorCertificate {
    let phi = PI - m.arg_hat_sup;
    let mut violations = Vec::new();
    for (lambda, reason) in &m.bad_samples {
        violations.push(Violation {
            lambda: *lambda,
            condition: reason.clone(),
            measured: f64::NAN,
        });
    }
    if m.sigma + phi_a_bound >= FRAC_PI_2 + SECTOR_SLACK {
        violations.push(Violation {
            lambda: m.sigma_witness,
            condition: format!(
                "sector opening: measured sigma + phi_A = {:.9} >= pi/2",
                m.sigma + phi_a_bound
            ),
            measured: m.sigma,
        });
    }
    if phi <= phi_a_bound - SECTOR_SLACK {
        violations.push(Violation {
            lambda: m.phi_witness,
            condition: format!("transform sector: measured phi = {phi:.9} <= phi_A"),
            measured: phi,
        });
    }
    if !m.c_reg.is_finite() {
        violations.push(Violation {
            lambda: m.c_witness,
            condition: "1-regularity ratio diverged".into(),
            measured: m.c_reg,
        });
    }
    let passed = violations.is_empty();
    SectorCertificate {
        sigma: m.sigma,
        phi,
        c_reg: m.c_reg,
        w,
        rho: 0.0,
        phi_a_bound,
        passed,
        violations,
        kernel_name: kernel.name().to_string(),
        sampling: sampling.clone(),
    }
}

/// Measure sector constants of `kernel` over the sampled half-plane grid and
/// decide admissibility against the operator angle bound `phi_a_bound`.
///
/// The shift `w` is searched along `sampling.w_ladder`; the smallest passing
/// `w` is reported. If no ladder entry passes, the certificate of the final
/// (largest) shift is returned with its witnesses.
pub fn verify_admissibility(
    kernel: &Kernel,
    phi_a_bound: f64,
    sampling: &HalfPlaneSampling,
) -> Result<SectorCertificate> {
    sampling.validate()?;
    if !(0.0..FRAC_PI_2).contains(&phi_a_bound) {
        return Err(CoreError::InvalidArgument(format!(
            "phi_A bound must lie in [0, pi/2), got {phi_a_bound}"
        )));
    }
    let mut last = None;
    for &w in &sampling.w_ladder {
        let samples = sampling.samples(w);
        let m = measure(kernel, &samples);
        let cert = certificate_from(kernel, sampling, phi_a_bound, w, &m);
        if cert.passed {
            return Ok(cert);
        }
        last = Some(cert);
    }
    Ok(last.expect("ladder validated non-empty"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{builtin_kernel, BuiltinKernel};

    const PI_4: f64 = std::f64::consts::FRAC_PI_4;

    #[test]
    fn fractional_half_measures_reference_angles() {
        let k = builtin_kernel(BuiltinKernel::Fractional { beta: 0.5 }).unwrap();
        let cert = verify_admissibility(&k, PI / 8.0, &HalfPlaneSampling::default()).unwrap();
        assert!(cert.passed, "violations: {:?}", cert.violations);
        assert_eq!(cert.w, 0.0);
        assert!((cert.sigma - PI_4).abs() < 1e-6, "sigma {}", cert.sigma);
        assert!((cert.phi - 3.0 * PI_4).abs() < 1e-6, "phi {}", cert.phi);
        assert!((cert.c_reg - 0.5).abs() < 1e-6, "c {}", cert.c_reg);
    }

    #[test]
    fn linear_kernel_fails_for_any_operator_angle() {
        // lambda a^(lambda) = 1/lambda sweeps the full right half-plane, so
        // the measured sigma approaches pi/2 and no positive operator angle
        // fits next to it.
        let k = builtin_kernel(BuiltinKernel::LinearT).unwrap();
        for phi_a in [PI / 16.0, PI / 8.0, PI / 4.0] {
            let cert = verify_admissibility(&k, phi_a, &HalfPlaneSampling::default()).unwrap();
            assert!(!cert.passed, "phi_a = {phi_a} unexpectedly passed");
            assert!(!cert.violations.is_empty());
        }
    }

    #[test]
    fn kelvin_voigt_passes_after_shift() {
        let k = builtin_kernel(BuiltinKernel::KelvinVoigt { nu: 1.0, mu: 1.0 }).unwrap();
        let cert = verify_admissibility(&k, PI / 8.0, &HalfPlaneSampling::default()).unwrap();
        assert!(cert.passed, "violations: {:?}", cert.violations);
        assert!(cert.w > 0.0, "shift should be needed");
        assert!(cert.w <= 1024.0);
    }

    #[test]
    fn constant_kernel_constants() {
        let k = builtin_kernel(BuiltinKernel::Fractional { beta: 1.0 }).unwrap();
        let cert = verify_admissibility(&k, PI_4, &HalfPlaneSampling::default()).unwrap();
        assert!(cert.passed);
        assert_eq!(cert.w, 0.0);
        assert!(cert.sigma.abs() < 1e-9);
        assert!((cert.phi - FRAC_PI_2).abs() < 1e-6);
        assert!((cert.c_reg - 1.0).abs() < 1e-9);
    }

    #[test]
    fn empty_sampling_is_rejected() {
        let k = builtin_kernel(BuiltinKernel::ConstantOne).unwrap();
        let bad = HalfPlaneSampling {
            moduli: 0,
            ..Default::default()
        };
        assert!(matches!(
            verify_admissibility(&k, 0.1, &bad),
            Err(CoreError::InvalidArgument(_))
        ));
    }

    #[test]
    fn non_holomorphic_evaluator_fails_with_witness() {
        let k = Kernel::from_parts(
            "broken",
            |_| 1.0,
            |_| Complex64::new(f64::NAN, 0.0),
            |_| Complex64::new(0.0, 0.0),
            0.0,
            false,
            None,
        );
        let cert = verify_admissibility(&k, 0.1, &HalfPlaneSampling::default()).unwrap();
        assert!(!cert.passed);
        assert!(cert
            .violations
            .iter()
            .any(|v| v.condition.contains("NaN")));
    }

    #[test]
    fn refining_the_grid_is_monotone() {
        // Nested grids: doubled resolution contains every coarse sample, so
        // measured sigma and c cannot decrease and phi cannot increase.
        let k = builtin_kernel(BuiltinKernel::Fractional { beta: 0.7 }).unwrap();
        let coarse = HalfPlaneSampling {
            moduli: 17,
            angles: 17,
            ..Default::default()
        };
        let fine = HalfPlaneSampling {
            moduli: 33,
            angles: 33,
            ..Default::default()
        };
        let c0 = verify_admissibility(&k, PI / 8.0, &coarse).unwrap();
        let c1 = verify_admissibility(&k, PI / 8.0, &fine).unwrap();
        assert!(c1.sigma >= c0.sigma - 1e-15);
        assert!(c1.c_reg >= c0.c_reg - 1e-15);
        assert!(c1.phi <= c0.phi + 1e-15);
    }
}
