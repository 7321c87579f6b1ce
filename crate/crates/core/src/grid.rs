//! Tensor-product sampling grids in lexicographic order.

use serde::{Deserialize, Serialize};

use crate::error::{GeomError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl Axis {
    pub fn new(min: f64, max: f64, count: usize) -> Axis {
        Axis { min, max, count }
    }

    pub fn samples(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.min];
        }
        let last = (self.count - 1) as f64;
        (0..self.count)
            .map(|k| {
                if k + 1 == self.count {
                    self.max
                } else {
                    self.min + (self.max - self.min) * k as f64 / last
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub axes: Vec<Axis>,
}

impl Grid {
    pub fn new(axes: Vec<Axis>) -> Result<Grid> {
        for (i, a) in axes.iter().enumerate() {
            if a.count < 2 {
                return Err(GeomError::Invalid(format!("grid axis {i} needs at least 2 points")));
            }
            if !(a.min.is_finite() && a.max.is_finite()) || a.min > a.max {
                return Err(GeomError::Invalid(format!(
                    "grid axis {i} has bad bounds [{}, {}]",
                    a.min, a.max
                )));
            }
        }
        Ok(Grid { axes })
    }

    /// `count` points per axis on `[min, max]` in every one of `dim` axes.
    pub fn cube(dim: usize, min: f64, max: f64, count: usize) -> Result<Grid> {
        Grid::new(vec![Axis::new(min, max, count); dim])
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(|a| a.count).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Points with the last axis varying fastest.
    pub fn points(&self) -> Vec<Vec<f64>> {
        let samples: Vec<Vec<f64>> = self.axes.iter().map(Axis::samples).collect();
        let mut out = vec![Vec::with_capacity(self.dim())];
        for axis in &samples {
            out = out
                .into_iter()
                .flat_map(|prefix| {
                    axis.iter().map(move |v| {
                        let mut p = prefix.clone();
                        p.push(*v);
                        p
                    })
                })
                .collect();
        }
        out
    }
}
