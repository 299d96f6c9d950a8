//! Validity boxes, evaluation grids and deterministic parallel sweeps.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Axis-aligned box `[x0, x1] × [y0, y1]` in the base.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Box2 {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl Box2 {
    pub fn new(x0: f64, x1: f64, y0: f64, y1: f64) -> Result<Self> {
        let ok = [x0, x1, y0, y1].iter().all(|v| v.is_finite()) && x0 < x1 && y0 < y1;
        if !ok {
            return Err(Error::Parameter(format!(
                "degenerate domain [{x0}, {x1}] x [{y0}, {y1}]"
            )));
        }
        Ok(Box2 { x0, x1, y0, y1 })
    }

    /// Unbounded box, for metrics defined everywhere.
    pub fn everywhere() -> Self {
        Box2 {
            x0: f64::NEG_INFINITY,
            x1: f64::INFINITY,
            y0: f64::NEG_INFINITY,
            y1: f64::INFINITY,
        }
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        x >= self.x0 && x <= self.x1 && y >= self.y0 && y <= self.y1
    }

    pub fn center(&self) -> (f64, f64) {
        (0.5 * (self.x0 + self.x1), 0.5 * (self.y0 + self.y1))
    }

    pub fn contains_box(&self, other: &Box2) -> bool {
        self.contains(other.x0, other.y0) && self.contains(other.x1, other.y1)
    }
}

impl fmt::Display for Box2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}] x [{}, {}]", self.x0, self.x1, self.y0, self.y1)
    }
}

/// Tensor-product grid of `nx × ny` points spanning a box, edges included.
///
/// Points are enumerated row-major with `x` fastest; that order is the
/// reduction order of every sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub domain: Box2,
    pub nx: usize,
    pub ny: usize,
}

impl Grid {
    pub fn new(domain: Box2, nx: usize, ny: usize) -> Result<Self> {
        if nx < 2 || ny < 2 {
            return Err(Error::Parameter(format!(
                "grid must be at least 2x2, got {nx}x{ny}"
            )));
        }
        Ok(Grid { domain, nx, ny })
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn xs(&self) -> Vec<f64> {
        linspace(self.domain.x0, self.domain.x1, self.nx)
    }

    pub fn ys(&self) -> Vec<f64> {
        linspace(self.domain.y0, self.domain.y1, self.ny)
    }

    pub fn point(&self, index: usize) -> (f64, f64) {
        let (i, j) = (index % self.nx, index / self.nx);
        (
            lerp(self.domain.x0, self.domain.x1, i, self.nx),
            lerp(self.domain.y0, self.domain.y1, j, self.ny),
        )
    }

    pub fn points(&self) -> Vec<(f64, f64)> {
        (0..self.len()).map(|k| self.point(k)).collect()
    }

    /// Evaluates `f` at every grid point in parallel, returning results in
    /// point order. The first error in point order wins.
    pub fn sweep<T, F>(&self, f: F) -> Result<Vec<T>>
    where
        T: Send,
        F: Fn(f64, f64) -> Result<T> + Sync + Send,
    {
        (0..self.len())
            .into_par_iter()
            .map(|k| {
                let (x, y) = self.point(k);
                f(x, y)
            })
            .collect::<Vec<_>>()
            .into_iter()
            .collect()
    }
}

fn lerp(a: f64, b: f64, i: usize, n: usize) -> f64 {
    if i + 1 == n {
        b
    } else {
        a + (b - a) * (i as f64) / ((n - 1) as f64)
    }
}

pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lerp(a, b, i, n)).collect()
}

/// Max and mean of absolute values, accumulated in slice order.
pub fn max_mean(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (0.0, 0.0);
    }
    let mut max = 0.0f64;
    let mut sum = 0.0;
    for v in values {
        max = max.max(v.abs());
        sum += v.abs();
    }
    (max, sum / values.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_enumeration_hits_corners() {
        let g = Grid::new(Box2::new(0.5, 1.5, -1.0, 1.0).unwrap(), 3, 5).unwrap();
        assert_eq!(g.point(0), (0.5, -1.0));
        assert_eq!(g.point(2), (1.5, -1.0));
        assert_eq!(g.point(14), (1.5, 1.0));
        assert_eq!(g.point(7), (1.0, 0.0));
        assert_eq!(g.points().len(), 15);
    }

    #[test]
    fn invalid_shapes_rejected() {
        let d = Box2::new(0.0, 1.0, 0.0, 1.0).unwrap();
        assert!(Grid::new(d, 1, 5).is_err());
        assert!(Box2::new(1.0, 1.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn sweep_preserves_order_and_first_error() {
        let g = Grid::new(Box2::new(0.0, 1.0, 0.0, 1.0).unwrap(), 4, 4).unwrap();
        let v = g.sweep(|x, y| Ok(x + 10.0 * y)).unwrap();
        let expected: Vec<f64> = g.points().iter().map(|(x, y)| x + 10.0 * y).collect();
        assert_eq!(v, expected);
        let err = g
            .sweep(|x, y| {
                if x > 0.5 {
                    Err(Error::Parameter(format!("{x},{y}")))
                } else {
                    Ok(())
                }
            })
            .unwrap_err();
        assert_eq!(err.to_string(), format!("invalid parameter: {},0", 2.0 / 3.0));
    }
}
