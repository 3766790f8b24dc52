//! Evaluation grids and axis-aligned rectangles on the unit square.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Equispaced grid with inclusive endpoints `{0, 1/(m-1), ..., 1}` on every axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridSpec {
    points: usize,
}

impl GridSpec {
    pub fn new(points: usize) -> Result<Self> {
        if points < 3 {
            return Err(Error::InvalidGrid(format!(
                "need at least 3 points per axis, got {points}"
            )));
        }
        Ok(Self { points })
    }

    pub fn points_per_axis(&self) -> usize {
        self.points
    }

    /// The `i`-th coordinate. The last one is exactly `1.0`.
    pub fn coord(&self, i: usize) -> f64 {
        if i + 1 >= self.points {
            1.0
        } else {
            i as f64 / (self.points - 1) as f64
        }
    }

    pub fn axis(&self) -> Vec<f64> {
        (0..self.points).map(|i| self.coord(i)).collect()
    }

    /// All grid points of the square, row-major (first coordinate slowest).
    pub fn points2(&self) -> impl Iterator<Item = [f64; 2]> + '_ {
        let m = self.points;
        (0..m * m).map(move |k| [self.coord(k / m), self.coord(k % m)])
    }

    /// All grid points of the cube, row-major (first coordinate slowest).
    pub fn points3(&self) -> impl Iterator<Item = [f64; 3]> + '_ {
        let m = self.points;
        (0..m * m * m).map(move |k| {
            [
                self.coord(k / (m * m)),
                self.coord((k / m) % m),
                self.coord(k % m),
            ]
        })
    }
}

/// Closed rectangle `[lower.0, upper.0] × [lower.1, upper.1]` inside `[0,1]²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect2 {
    pub lower: [f64; 2],
    pub upper: [f64; 2],
}

impl Rect2 {
    /// Builds a rectangle with coordinates clamped to `[0,1]`.
    pub fn new(lower: [f64; 2], upper: [f64; 2]) -> Result<Self> {
        let lower = lower.map(clamp_unit);
        let upper = upper.map(clamp_unit);
        if lower[0] > upper[0] || lower[1] > upper[1] {
            return Err(Error::InvalidGrid(format!(
                "rectangle corners out of order: {lower:?} > {upper:?}"
            )));
        }
        Ok(Self { lower, upper })
    }

    pub fn unit() -> Self {
        Self {
            lower: [0.0, 0.0],
            upper: [1.0, 1.0],
        }
    }
}

pub(crate) fn clamp_unit(x: f64) -> f64 {
    if x.is_nan() {
        x
    } else {
        x.clamp(0.0, 1.0)
    }
}
