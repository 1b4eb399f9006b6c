//! Cadlag martingale paths, stochastic convolution against a resolvent table,
//! and pathwise diagnostics.
//!
//! Paths are stored as a continuous part sampled on the grid plus an explicit
//! jump list, so right-continuity, left limits and jump bookkeeping are
//! representation-exact rather than threshold-based.

mod convolution;
mod diagnostics;
mod export;
mod generate;

pub use convolution::{stochastic_convolution, SolutionPath};
pub use diagnostics::{
    jump_transfer_check, path_regularity_diagnostics, weak_solution_residual, JumpTransferReport,
    PathMode, RegularityReport,
};
pub use export::{write_martingale_csv, write_solution_csv};
pub use generate::{simulate_brownian, simulate_compound_poisson, JumpLaw};

use nalgebra::DVector;

use crate::error::{CoreError, Result};
use crate::grid::TimeGrid;

/// A single jump atom at `time` in `(0, T]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Jump {
    pub time: f64,
    pub size: DVector<f64>,
}

/// Cadlag local-martingale path: continuous part at the grid points plus a
/// time-sorted jump list. The path value is the interpolated continuous part
/// plus all jumps at times `<= t`; the value at 0 is 0.
#[derive(Debug, Clone, PartialEq)]
pub struct MartingalePath {
    pub grid: TimeGrid,
    pub continuous_part: Vec<DVector<f64>>,
    pub jumps: Vec<Jump>,
    pub seed: u64,
}

impl MartingalePath {
    pub fn zero(grid: TimeGrid, dim: usize, seed: u64) -> Self {
        Self {
            grid,
            continuous_part: vec![DVector::zeros(dim); grid.steps() + 1],
            jumps: Vec::new(),
            seed,
        }
    }

    /// Test hook: a deterministic single-jump path with zero continuous part.
    pub fn with_deterministic_jump(grid: TimeGrid, time: f64, size: DVector<f64>) -> Result<Self> {
        if !(time > 0.0 && time <= grid.horizon()) {
            return Err(CoreError::InvalidArgument(format!(
                "jump time {time} outside (0, {}]",
                grid.horizon()
            )));
        }
        let dim = size.len();
        let mut path = Self::zero(grid, dim, 0);
        path.jumps.push(Jump { time, size });
        Ok(path)
    }

    pub fn dim(&self) -> usize {
        self.continuous_part[0].len()
    }

    /// Path value at a grid index (right-continuous: includes jumps at `t_k`).
    pub fn value_at_index(&self, k: usize) -> DVector<f64> {
        let t = self.grid.point(k);
        let mut v = self.continuous_part[k].clone();
        for jump in &self.jumps {
            if jump.time <= t {
                v += &jump.size;
            } else {
                break;
            }
        }
        v
    }

    /// Right-continuous value at an arbitrary time (continuous part linearly
    /// interpolated).
    pub fn value(&self, t: f64) -> DVector<f64> {
        let mut v = self.interp_continuous(t);
        for jump in &self.jumps {
            if jump.time <= t {
                v += &jump.size;
            } else {
                break;
            }
        }
        v
    }

    /// Left limit at `t`: jumps strictly before `t`.
    pub fn left_limit(&self, t: f64) -> DVector<f64> {
        let mut v = self.interp_continuous(t);
        for jump in &self.jumps {
            if jump.time < t {
                v += &jump.size;
            } else {
                break;
            }
        }
        v
    }

    fn interp_continuous(&self, t: f64) -> DVector<f64> {
        let n = self.grid.steps();
        let h = self.grid.spacing();
        if t <= 0.0 {
            return self.continuous_part[0].clone();
        }
        if t >= self.grid.horizon() {
            return self.continuous_part[n].clone();
        }
        let idx = ((t / h).floor() as usize).min(n - 1);
        let frac = (t - idx as f64 * h) / h;
        &self.continuous_part[idx] * (1.0 - frac) + &self.continuous_part[idx + 1] * frac
    }

    /// Representation-level linear combination `alpha * self + other`:
    /// continuous parts combine pointwise, jump lists merge time-sorted.
    pub fn scale_add(&self, alpha: f64, other: &MartingalePath) -> Result<MartingalePath> {
        if !self.grid.same_as(&other.grid) {
            return Err(CoreError::GridMismatch(
                "paths live on different grids".into(),
            ));
        }
        if self.dim() != other.dim() {
            return Err(CoreError::DimensionMismatch {
                expected: self.dim(),
                got: other.dim(),
            });
        }
        let continuous_part = self
            .continuous_part
            .iter()
            .zip(&other.continuous_part)
            .map(|(a, b)| a * alpha + b)
            .collect();
        let mut jumps: Vec<Jump> = self
            .jumps
            .iter()
            .map(|j| Jump {
                time: j.time,
                size: &j.size * alpha,
            })
            .chain(other.jumps.iter().cloned())
            .collect();
        jumps.sort_by(|a, b| a.time.partial_cmp(&b.time).unwrap());
        Ok(MartingalePath {
            grid: self.grid,
            continuous_part,
            jumps,
            seed: self.seed,
        })
    }
}

/// SplitMix64-style per-path seed derivation from a master seed: statistically
/// independent streams, reproducible regardless of scheduling.
pub fn derive_path_seed(master: u64, path_index: u64) -> u64 {
    let mut z = master ^ path_index.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
