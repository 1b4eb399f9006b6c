//! Scalar convolution kernels with analytic Laplace data, admissibility
//! certification and the shifted-kernel solve.
//!
//! A kernel carries its time-domain evaluator together with closed-form
//! evaluators for the transform and its derivative on a right half-plane.
//! Everything downstream (sector measurement, resolvent stepping, positivity
//! checks) consumes kernels through this interface, so user-supplied kernels
//! plug in exactly like the builtins.

mod admissibility;
mod grid_kernel;

pub use admissibility::{
    verify_admissibility, HalfPlaneSampling, SectorCertificate, Violation, SECTOR_SLACK,
};
pub use grid_kernel::{
    check_laplace_identity, laplace_of_grid, shift_kernel, KernelGrid, LaplaceIdentityCheck,
};

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{CoreError, Result};
use crate::quad;

type TimeEval = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
type LaplaceEval = Arc<dyn Fn(Complex64) -> Complex64 + Send + Sync>;

/// A locally integrable scalar kernel `a` on `(0, infinity)` together with its
/// Laplace transform `a^(lambda)` and derivative on `{Re lambda > w0}`.
#[derive(Clone)]
pub struct Kernel {
    name: String,
    time_eval: TimeEval,
    laplace_eval: LaplaceEval,
    laplace_deriv_eval: LaplaceEval,
    exp_order_w0: f64,
    singular_at_zero: bool,
    /// Local power exponent gamma with `a(t) ~ C t^gamma` as `t -> 0+`, when
    /// known. Drives singular-aware quadrature near the origin.
    singularity_exponent: Option<f64>,
    /// Grade the first quadrature cell even when the kernel is bounded (set
    /// for kernels whose derivative blows up at 0).
    graded_first_cell: bool,
}

impl fmt::Debug for Kernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Kernel")
            .field("name", &self.name)
            .field("exp_order_w0", &self.exp_order_w0)
            .field("singular_at_zero", &self.singular_at_zero)
            .finish()
    }
}

impl Kernel {
    /// Assemble a kernel from user-supplied evaluators. The analytic Laplace
    /// data is trusted; [`Kernel::numeric_laplace`] exists to cross-check it.
    pub fn from_parts(
        name: impl Into<String>,
        time_eval: impl Fn(f64) -> f64 + Send + Sync + 'static,
        laplace_eval: impl Fn(Complex64) -> Complex64 + Send + Sync + 'static,
        laplace_deriv_eval: impl Fn(Complex64) -> Complex64 + Send + Sync + 'static,
        exp_order_w0: f64,
        singular_at_zero: bool,
        singularity_exponent: Option<f64>,
    ) -> Self {
        Self {
            name: name.into(),
            time_eval: Arc::new(time_eval),
            laplace_eval: Arc::new(laplace_eval),
            laplace_deriv_eval: Arc::new(laplace_deriv_eval),
            exp_order_w0,
            singular_at_zero,
            singularity_exponent,
            graded_first_cell: singular_at_zero,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn eval(&self, t: f64) -> f64 {
        (self.time_eval)(t)
    }

    pub fn laplace(&self, lambda: Complex64) -> Complex64 {
        (self.laplace_eval)(lambda)
    }

    pub fn laplace_deriv(&self, lambda: Complex64) -> Complex64 {
        (self.laplace_deriv_eval)(lambda)
    }

    pub fn exp_order_w0(&self) -> f64 {
        self.exp_order_w0
    }

    pub fn singular_at_zero(&self) -> bool {
        self.singular_at_zero
    }

    pub fn singularity_exponent(&self) -> Option<f64> {
        self.singularity_exponent
    }

    pub fn graded_first_cell(&self) -> bool {
        self.graded_first_cell
    }

    /// The exponentially damped kernel `a_w(t) = e^{-wt} a(t)`. Transform data
    /// shifts accordingly: `a_w^(lambda) = a^(lambda + w)`.
    pub fn damped(&self, w: f64) -> Kernel {
        if w == 0.0 {
            return self.clone();
        }
        let inner = self.time_eval.clone();
        let lap = self.laplace_eval.clone();
        let lap_d = self.laplace_deriv_eval.clone();
        Kernel {
            name: format!("{}@w={w}", self.name),
            time_eval: Arc::new(move |t| (-w * t).exp() * inner(t)),
            laplace_eval: Arc::new(move |lambda| lap(lambda + w)),
            laplace_deriv_eval: Arc::new(move |lambda| lap_d(lambda + w)),
            exp_order_w0: self.exp_order_w0 - w,
            singular_at_zero: self.singular_at_zero,
            singularity_exponent: self.singularity_exponent,
            graded_first_cell: self.graded_first_cell,
        }
    }

    /// Numeric Laplace transform `int_0^T e^{-lambda t} a(t) dt` with `T`
    /// chosen from the exponential order so the truncated tail is below
    /// roundoff scale. Slow; intended for cross-validation of the analytic
    /// evaluators and for kernels supplied without transform data.
    pub fn numeric_laplace(&self, lambda: Complex64) -> Result<Complex64> {
        let decay = lambda.re - self.exp_order_w0;
        if decay <= 0.1 {
            return Err(CoreError::InvalidArgument(format!(
                "numeric transform needs Re(lambda) > w0 + 0.1, got Re = {} with w0 = {}",
                lambda.re, self.exp_order_w0
            )));
        }
        let horizon = 60.0 / decay;
        // Cell width limited by the oscillation scale of e^{-i Im(lambda) t}.
        let width = (0.2 / (1.0 + lambda.im.abs() / 5.0)).min(horizon / 16.0);
        let f = |t: f64| (-lambda * t).exp() * self.eval(t);
        let mut acc = if self.graded_first_cell {
            quad::graded_from_zero_complex(&f, width)
        } else {
            quad::gl8_complex(&f, 0.0, width)
        };
        let mut left = width;
        while left < horizon {
            let right = (left + width).min(horizon);
            acc += quad::gl8_complex(&f, left, right);
            left = right;
        }
        if !acc.re.is_finite() || !acc.im.is_finite() {
            return Err(CoreError::NonFinite("numeric Laplace transform".into()));
        }
        Ok(acc)
    }
}

/// Builtin kernel families.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BuiltinKernel {
    /// `a(t) = t^{beta-1} / Gamma(beta)`, `beta` in (0, 2).
    Fractional { beta: f64 },
    /// `a(t) = nu + mu t` with `nu, mu > 0`.
    KelvinVoigt { nu: f64, mu: f64 },
    /// `a(t) = t`.
    LinearT,
    /// `a(t) = 1`.
    ConstantOne,
}

/// Construct a builtin kernel with exact analytic transform data.
pub fn builtin_kernel(spec: BuiltinKernel) -> Result<Kernel> {
    match spec {
        BuiltinKernel::Fractional { beta } => {
            if !(beta > 0.0 && beta < 2.0) {
                return Err(CoreError::InvalidArgument(format!(
                    "fractional exponent must lie in (0, 2), got {beta}"
                )));
            }
            let gamma_beta = gamma(beta);
            let mut k = Kernel::from_parts(
                format!("fractional(beta={beta})"),
                move |t: f64| t.powf(beta - 1.0) / gamma_beta,
                move |lambda: Complex64| lambda.powf(-beta),
                move |lambda: Complex64| -beta * lambda.powf(-beta - 1.0),
                0.0,
                beta < 1.0,
                if beta == 1.0 { None } else { Some(beta - 1.0) },
            );
            // t^{beta-1} is not smooth at the origin for any beta != 1, so the
            // first quadrature cell is always graded.
            k.graded_first_cell = beta != 1.0;
            Ok(k)
        }
        BuiltinKernel::KelvinVoigt { nu, mu } => {
            if !(nu > 0.0 && mu > 0.0) {
                return Err(CoreError::InvalidArgument(format!(
                    "Kelvin-Voigt parameters must be positive, got nu={nu}, mu={mu}"
                )));
            }
            Ok(Kernel::from_parts(
                format!("kelvin_voigt(nu={nu},mu={mu})"),
                move |t: f64| nu + mu * t,
                move |lambda: Complex64| nu / lambda + mu / (lambda * lambda),
                move |lambda: Complex64| {
                    -nu / (lambda * lambda) - 2.0 * mu / (lambda * lambda * lambda)
                },
                0.0,
                false,
                None,
            ))
        }
        BuiltinKernel::LinearT => Ok(Kernel::from_parts(
            "linear_t",
            |t: f64| t,
            |lambda: Complex64| 1.0 / (lambda * lambda),
            |lambda: Complex64| -2.0 / (lambda * lambda * lambda),
            0.0,
            false,
            None,
        )),
        BuiltinKernel::ConstantOne => Ok(Kernel::from_parts(
            "constant_one",
            |_t: f64| 1.0,
            |lambda: Complex64| 1.0 / lambda,
            |lambda: Complex64| -1.0 / (lambda * lambda),
            0.0,
            false,
            None,
        )),
    }
}

/// Lanczos approximation of the Gamma function (g = 7, n = 9), accurate to
/// ~1e-13 on the range used here.
pub fn gamma(x: f64) -> f64 {
    const COEFFS: [f64; 9] = [
        0.999_999_999_999_809_93,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_13,
        -176.615_029_162_140_59,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_571_6e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        std::f64::consts::PI / ((std::f64::consts::PI * x).sin() * gamma(1.0 - x))
    } else {
        let x = x - 1.0;
        let mut acc = COEFFS[0];
        for (i, &c) in COEFFS.iter().enumerate().skip(1) {
            acc += c / (x + i as f64);
        }
        let t = x + 7.5;
        (2.0 * std::f64::consts::PI).sqrt() * t.powf(x + 0.5) * (-t).exp() * acc
    }
}
