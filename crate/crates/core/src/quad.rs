//! Quadrature toolkit: Gauss–Legendre cells, geometrically graded meshes for
//! integrable endpoint singularities, and product-trapezoidal convolution
//! weights (the kernel is integrated exactly against piecewise-linear
//! interpolants of the unknown, so `t^(beta-1)`-type singularities are
//! absorbed into the weights instead of being sampled).

use num_complex::Complex64;

use crate::error::{CoreError, Result};
use crate::grid::TimeGrid;

/// 8-point Gauss–Legendre nodes on [-1, 1] (positive half; symmetric).
const GL8_NODES: [f64; 4] = [
    0.183_434_642_495_649_8,
    0.525_532_409_916_329_0,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_3,
];
const GL8_WEIGHTS: [f64; 4] = [
    0.362_683_783_378_362_0,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_5,
    0.101_228_536_290_376_3,
];

/// Gauss–Legendre on a single cell `[a, b]`; nodes are interior, so the
/// integrand is never evaluated at the endpoints.
pub fn gl8<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> f64 {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut acc = 0.0;
    for i in 0..4 {
        let dx = half * GL8_NODES[i];
        acc += GL8_WEIGHTS[i] * (f(mid + dx) + f(mid - dx));
    }
    acc * half
}

pub fn gl8_complex<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64) -> Complex64 {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..4 {
        let dx = half * GL8_NODES[i];
        acc += GL8_WEIGHTS[i] * (f(mid + dx) + f(mid - dx));
    }
    acc * half
}

/// Number of geometric refinement levels used toward a singular left endpoint.
/// With ratio 1/2 the innermost cell is `b * 2^-GRADED_LEVELS`; the dropped
/// remainder stays below 2^-64 relative even for a t^-0.9 singularity.
const GRADED_LEVELS: u32 = 640;

/// Integrate `f` over `[0, b]` where `f` may blow up (integrably) at 0:
/// geometric bisection toward the origin, Gauss–Legendre per cell.
pub fn graded_from_zero<F: Fn(f64) -> f64>(f: &F, b: f64) -> f64 {
    if b <= 0.0 {
        return 0.0;
    }
    let mut acc = 0.0;
    let mut right = b;
    for _ in 0..GRADED_LEVELS {
        let left = 0.5 * right;
        acc += gl8(f, left, right);
        right = left;
        if right < f64::MIN_POSITIVE * 1e18 {
            break;
        }
    }
    acc
}

pub fn graded_from_zero_complex<F: Fn(f64) -> Complex64>(f: &F, b: f64) -> Complex64 {
    if b <= 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let mut acc = Complex64::new(0.0, 0.0);
    let mut right = b;
    for _ in 0..GRADED_LEVELS {
        let left = 0.5 * right;
        acc += gl8_complex(f, left, right);
        right = left;
        if right < f64::MIN_POSITIVE * 1e18 {
            break;
        }
    }
    acc
}

/// Integrate `f` over `[a, b]`, optionally grading toward a singular left
/// endpoint at `a = 0`.
pub fn integrate<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, graded_at_zero: bool) -> f64 {
    if graded_at_zero && a == 0.0 {
        graded_from_zero(f, b)
    } else {
        gl8(f, a, b)
    }
}

/// Product-trapezoidal convolution weights for a fixed kernel on a uniform
/// grid.
///
/// For samples `x_0..x_n` of a continuous function, the discrete convolution
///
/// `(kernel * x)(t_k) ~= head * x_k + sum_{m=1}^{k-1} full[m] * x_{k-m} + tail[k] * x_0`
///
/// integrates the kernel exactly (to quadrature accuracy) against the
/// piecewise-linear interpolant of `x`. Weights depend only on the lag, so one
/// table serves the whole grid.
#[derive(Debug, Clone)]
pub struct ConvolutionWeights {
    grid: TimeGrid,
    head: f64,
    /// `full[m]`, valid for `m = 1..n-1` (index 0 unused).
    full: Vec<f64>,
    /// `tail[k]`, valid for `k = 1..=n` (index 0 unused).
    tail: Vec<f64>,
    /// Cell masses `m0[i] = int_{t_i}^{t_{i+1}} kernel`.
    cell_mass: Vec<f64>,
}

impl ConvolutionWeights {
    /// Build weights from a kernel evaluator. `graded_first_cell` requests the
    /// geometric mesh on `[0, h]` for kernels with a singular (or merely
    /// non-smooth) origin.
    pub fn build<F: Fn(f64) -> f64>(f: &F, grid: &TimeGrid, graded_first_cell: bool) -> Result<Self> {
        let n = grid.steps();
        let h = grid.spacing();
        let mut m0 = vec![0.0; n];
        let mut m1 = vec![0.0; n];
        for i in 0..n {
            let (a, b) = (grid.point(i), grid.point(i + 1));
            if i == 0 && graded_first_cell {
                m0[i] = graded_from_zero(f, b);
                m1[i] = graded_from_zero(&|u: f64| f(u) * (u / h), b);
            } else {
                m0[i] = gl8(f, a, b);
                m1[i] = gl8(&|u: f64| f(u) * ((u - a) / h), a, b);
            }
            if !(m0[i].is_finite() && m1[i].is_finite()) {
                return Err(CoreError::NonFinite(format!(
                    "kernel cell moment on [{a:.6e}, {b:.6e}]"
                )));
            }
        }
        let head = m0[0] - m1[0];
        let mut full = vec![0.0; n.max(1)];
        for m in 1..n {
            full[m] = m1[m - 1] + m0[m] - m1[m];
        }
        let mut tail = vec![0.0; n + 1];
        tail[1..=n].copy_from_slice(&m1[..n]);
        Ok(Self {
            grid: *grid,
            head,
            full,
            tail,
            cell_mass: m0,
        })
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    /// Weight multiplying the newest sample `x_k`.
    pub fn head(&self) -> f64 {
        self.head
    }

    pub fn full(&self, lag: usize) -> f64 {
        self.full[lag]
    }

    pub fn tail(&self, k: usize) -> f64 {
        self.tail[k]
    }

    /// `sum_j W_{k,j}` = quadrature of the kernel over `[0, t_k]`; exact
    /// telescoping of the cell masses.
    pub fn row_sum(&self, k: usize) -> f64 {
        self.cell_mass[..k].iter().sum()
    }

    /// Memory part of the convolution at step `k`: everything except the
    /// `head * x_k` term.
    pub fn memory_complex(&self, x: &[Complex64], k: usize) -> Complex64 {
        debug_assert!(k >= 1 && k < x.len());
        let mut acc = self.tail[k] * x[0];
        for m in 1..k {
            acc += self.full[m] * x[k - m];
        }
        acc
    }

    pub fn memory_real(&self, x: &[f64], k: usize) -> f64 {
        debug_assert!(k >= 1 && k < x.len());
        let mut acc = self.tail[k] * x[0];
        for m in 1..k {
            acc += self.full[m] * x[k - m];
        }
        acc
    }

    /// Full discrete convolution `(kernel * x)(t_k)` for all k.
    pub fn convolve_real(&self, x: &[f64]) -> Vec<f64> {
        let n = self.grid.steps();
        assert_eq!(x.len(), n + 1, "sample count must match the grid");
        let mut out = vec![0.0; n + 1];
        for k in 1..=n {
            out[k] = self.head * x[k] + self.memory_real(x, k);
        }
        out
    }

    pub fn convolve_complex(&self, x: &[Complex64]) -> Vec<Complex64> {
        let n = self.grid.steps();
        assert_eq!(x.len(), n + 1, "sample count must match the grid");
        let mut out = vec![Complex64::new(0.0, 0.0); n + 1];
        for k in 1..=n {
            out[k] = self.head * x[k] + self.memory_complex(x, k);
        }
        out
    }
}
