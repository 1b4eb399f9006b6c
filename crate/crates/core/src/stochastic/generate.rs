//! Noise generators: Q-Wiener increments and compensated compound Poisson,
//! both deterministic functions of their seed.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::grid::TimeGrid;
use crate::linalg;
use crate::stochastic::{Jump, MartingalePath};

/// Jump size law for the compound-Poisson generator. Non-centered laws are
/// compensated so the resulting path is a martingale.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum JumpLaw {
    /// Independent `+-scale` coordinates (mean zero).
    Rademacher { scale: f64 },
    /// Independent centered Gaussian coordinates.
    Gaussian { sigma: f64 },
    /// A fixed deterministic jump vector (compensated by its mean).
    Fixed { vector: Vec<f64> },
}

impl JumpLaw {
    pub fn mean(&self, dim: usize) -> Result<DVector<f64>> {
        match self {
            JumpLaw::Rademacher { .. } | JumpLaw::Gaussian { .. } => Ok(DVector::zeros(dim)),
            JumpLaw::Fixed { vector } => {
                if vector.len() != dim {
                    return Err(CoreError::DimensionMismatch {
                        expected: dim,
                        got: vector.len(),
                    });
                }
                Ok(DVector::from_column_slice(vector))
            }
        }
    }

    fn sample(&self, dim: usize, rng: &mut ChaCha12Rng) -> Result<DVector<f64>> {
        match self {
            JumpLaw::Rademacher { scale } => Ok(DVector::from_fn(dim, |_, _| {
                if rng.random::<bool>() {
                    *scale
                } else {
                    -*scale
                }
            })),
            JumpLaw::Gaussian { sigma } => Ok(DVector::from_fn(dim, |_, _| {
                let z: f64 = StandardNormal.sample(rng);
                sigma * z
            })),
            JumpLaw::Fixed { vector } => {
                if vector.len() != dim {
                    return Err(CoreError::DimensionMismatch {
                        expected: dim,
                        got: vector.len(),
                    });
                }
                Ok(DVector::from_column_slice(vector))
            }
        }
    }
}

/// Gaussian path with independent increments of covariance `Q * dt`, built
/// from a symmetric factor of `Q` (eigenvalue form, so rank-deficient `Q` is
/// fine). Jump list is empty; identical seeds give bit-identical paths.
pub fn simulate_brownian(q: &DMatrix<f64>, grid: &TimeGrid, seed: u64) -> Result<MartingalePath> {
    let dim = q.nrows();
    if dim != q.ncols() {
        return Err(CoreError::DimensionMismatch {
            expected: dim,
            got: q.ncols(),
        });
    }
    let scale = q.iter().fold(0.0_f64, |acc, &x| acc.max(x.abs()));
    let asym = (q - q.transpose()).iter().fold(0.0_f64, |acc, &x| acc.max(x.abs()));
    if asym > 1e-12 * scale.max(1.0) {
        return Err(CoreError::InvalidArgument(
            "covariance matrix must be symmetric".into(),
        ));
    }
    let qc = linalg::to_complex_matrix(q);
    let (eigs, vecs) = linalg::hermitian_eigen(&qc, true)?;
    let vecs = vecs.expect("vectors requested");
    if eigs[0] < -1e-12 * scale.max(1.0) {
        return Err(CoreError::InvalidArgument(format!(
            "covariance matrix not positive semidefinite (min eigenvalue {})",
            eigs[0]
        )));
    }
    // factor = U diag(sqrt(max(eig, 0))), real because Q is real symmetric
    let factor = DMatrix::<f64>::from_fn(dim, dim, |i, j| {
        vecs[(i, j)].re * eigs[j].max(0.0).sqrt()
    });

    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let sqrt_dt = grid.spacing().sqrt();
    let n = grid.steps();
    let mut continuous_part = Vec::with_capacity(n + 1);
    continuous_part.push(DVector::zeros(dim));
    for k in 1..=n {
        let z = DVector::from_fn(dim, |_, _| {
            let g: f64 = StandardNormal.sample(&mut rng);
            g
        });
        let incr = &factor * z * sqrt_dt;
        let prev = &continuous_part[k - 1];
        continuous_part.push(prev + incr);
    }
    Ok(MartingalePath {
        grid: *grid,
        continuous_part,
        jumps: Vec::new(),
        seed,
    })
}

/// Compound-Poisson martingale: jump count `~ Poisson(rate * T)`, jump times
/// uniform on `(0, T]`, sizes from `law`; the compensator `-t * rate * E[law]`
/// is folded into the continuous part so the path is mean-zero.
pub fn simulate_compound_poisson(
    rate: f64,
    law: &JumpLaw,
    dim: usize,
    grid: &TimeGrid,
    seed: u64,
) -> Result<MartingalePath> {
    if !(rate >= 0.0 && rate.is_finite()) {
        return Err(CoreError::InvalidArgument(format!(
            "jump rate must be finite and nonnegative, got {rate}"
        )));
    }
    let mean = law.mean(dim)?;
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut jumps: Vec<Jump> = Vec::new();
    if rate > 0.0 {
        let count_dist = Poisson::new(rate * grid.horizon()).map_err(|e| {
            CoreError::InvalidArgument(format!("Poisson parameter invalid: {e}"))
        })?;
        let count = count_dist.sample(&mut rng) as usize;
        let mut times: Vec<f64> = (0..count)
            .map(|_| grid.horizon() * (1.0 - rng.random::<f64>()))
            .collect();
        times.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for time in times {
            jumps.push(Jump {
                time,
                size: law.sample(dim, &mut rng)?,
            });
        }
    }
    let compensator_rate = &mean * rate;
    let continuous_part = grid
        .points()
        .map(|t| &compensator_rate * (-t))
        .collect();
    Ok(MartingalePath {
        grid: *grid,
        continuous_part,
        jumps,
        seed,
    })
}
