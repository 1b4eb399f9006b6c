use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};

/// Uniform time grid `t_k = k * T / n` on `[0, T]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    horizon: f64,
    steps: usize,
}

impl TimeGrid {
    pub fn new(horizon: f64, steps: usize) -> Result<Self> {
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(CoreError::InvalidArgument(format!(
                "horizon must be positive and finite, got {horizon}"
            )));
        }
        if steps < 2 {
            return Err(CoreError::InvalidArgument(format!(
                "grid needs at least 2 steps, got {steps}"
            )));
        }
        Ok(Self { horizon, steps })
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    /// Number of steps `n`; the grid has `n + 1` points.
    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn spacing(&self) -> f64 {
        self.horizon / self.steps as f64
    }

    pub fn point(&self, k: usize) -> f64 {
        k as f64 * self.horizon / self.steps as f64
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..=self.steps).map(move |k| self.point(k))
    }

    /// Index of the largest grid point `<= t`, clamped to the grid.
    pub fn floor_index(&self, t: f64) -> usize {
        let raw = (t / self.spacing()).floor();
        (raw.max(0.0) as usize).min(self.steps)
    }

    pub fn same_as(&self, other: &TimeGrid) -> bool {
        self.steps == other.steps && self.horizon == other.horizon
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn endpoints_are_exact() {
        let g = TimeGrid::new(2.5, 10).unwrap();
        assert_eq!(g.point(0), 0.0);
        assert_eq!(g.point(10), 2.5);
        assert_eq!(g.points().count(), 11);
    }

    #[test]
    fn rejects_degenerate_grids() {
        assert!(TimeGrid::new(0.0, 8).is_err());
        assert!(TimeGrid::new(1.0, 1).is_err());
        assert!(TimeGrid::new(f64::NAN, 8).is_err());
    }

    #[test]
    fn floor_index_clamps() {
        let g = TimeGrid::new(1.0, 4).unwrap();
        assert_eq!(g.floor_index(0.0), 0);
        assert_eq!(g.floor_index(0.26), 1);
        assert_eq!(g.floor_index(9.0), 4);
    }
}
