//! Uniform 1-D grids and trapezoidal sums over them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `n` equally spaced points from `min` to `max`, both ends included.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UniformGrid {
    pub min: f64,
    pub max: f64,
    pub n: usize,
}

impl UniformGrid {
    pub fn new(min: f64, max: f64, n: usize) -> Result<Self> {
        if !(min.is_finite() && max.is_finite()) {
            return Err(Error::invalid(format!("grid bounds must be finite: [{min}, {max}]")));
        }
        if max <= min {
            return Err(Error::invalid(format!("grid needs max > min, got [{min}, {max}]")));
        }
        if n < 2 {
            return Err(Error::invalid(format!("grid needs at least 2 points, got {n}")));
        }
        Ok(Self { min, max, n })
    }

    /// Symmetric grid `[-half_width, half_width]`.
    pub fn symmetric(half_width: f64, n: usize) -> Result<Self> {
        Self::new(-half_width, half_width, n)
    }

    /// Grid on `[min, max]` whose spacing is as close as possible to `step`
    /// without exceeding it.
    pub fn with_max_step(min: f64, max: f64, step: f64) -> Result<Self> {
        if !(step > 0.0) {
            return Err(Error::invalid(format!("grid step must be positive, got {step}")));
        }
        let n = ((max - min) / step).ceil() as usize + 1;
        Self::new(min, max, n.max(2))
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn step(&self) -> f64 {
        (self.max - self.min) / (self.n - 1) as f64
    }

    pub fn point(&self, i: usize) -> f64 {
        if i + 1 == self.n {
            self.max
        } else {
            self.min + i as f64 * self.step()
        }
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.point(i)).collect()
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.min && x <= self.max
    }

    /// Trapezoidal weight of node `i`.
    pub fn weight(&self, i: usize) -> f64 {
        let h = self.step();
        if i == 0 || i + 1 == self.n {
            0.5 * h
        } else {
            h
        }
    }

    /// Trapezoidal integral of samples taken on this grid.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        debug_assert_eq!(values.len(), self.n);
        values
            .iter()
            .enumerate()
            .map(|(i, v)| v * self.weight(i))
            .sum()
    }

    /// True when `other` has the same nodes up to `rel_tol` of the spacing.
    pub fn matches(&self, other: &UniformGrid, rel_tol: f64) -> bool {
        let h = self.step();
        self.n == other.n
            && (self.min - other.min).abs() <= rel_tol * h
            && (self.max - other.max).abs() <= rel_tol * h
    }

    /// Fractional index of `x`, i.e. `(x - min) / step`.
    pub fn fractional_index(&self, x: f64) -> f64 {
        (x - self.min) / self.step()
    }
}
