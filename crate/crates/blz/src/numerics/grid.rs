use super::C64;
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RapidityGrid {
    pub theta_min: f64,
    pub theta_max: f64,
    pub n_points: usize,
}

impl RapidityGrid {
    pub fn new(theta_min: f64, theta_max: f64, n_points: usize) -> Result<Self> {
        if !(theta_min < theta_max) || !theta_min.is_finite() || !theta_max.is_finite() {
            return Err(Error::Usage(format!(
                "grid needs theta_min < theta_max, got [{theta_min}, {theta_max}]"
            )));
        }
        if n_points < 16 {
            return Err(Error::Usage(format!("grid needs at least 16 points, got {n_points}")));
        }
        Ok(Self { theta_min, theta_max, n_points })
    }

    pub fn symmetric(theta_max: f64, n_points: usize) -> Result<Self> {
        Self::new(-theta_max, theta_max, n_points)
    }

    pub fn spacing(&self) -> f64 {
        (self.theta_max - self.theta_min) / (self.n_points - 1) as f64
    }

    /// Node i, computed from the endpoints so positions never drift.
    pub fn node(&self, i: usize) -> f64 {
        let t = i as f64 / (self.n_points - 1) as f64;
        (1.0 - t) * self.theta_min + t * self.theta_max
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n_points).map(|i| self.node(i)).collect()
    }

    /// Fractional index of a rapidity.
    pub fn position(&self, theta: f64) -> f64 {
        (theta - self.theta_min) / self.spacing()
    }

    pub fn contains(&self, theta: f64) -> bool {
        theta >= self.theta_min && theta <= self.theta_max
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledFunction {
    pub grid: RapidityGrid,
    pub values: Vec<C64>,
    /// Imaginary part of the line the samples live on.
    pub strip_offset: f64,
}

impl SampledFunction {
    pub fn new(grid: RapidityGrid, values: Vec<C64>, strip_offset: f64) -> Result<Self> {
        if values.len() != grid.n_points {
            return Err(Error::Usage(format!(
                "{} samples for a grid of {} points",
                values.len(),
                grid.n_points
            )));
        }
        Ok(Self { grid, values, strip_offset })
    }

    pub fn from_fn(grid: RapidityGrid, strip_offset: f64, f: impl Fn(f64) -> C64) -> Self {
        let values = (0..grid.n_points).map(|i| f(grid.node(i))).collect();
        Self { grid, values, strip_offset }
    }

    pub fn from_real(grid: RapidityGrid, f: impl Fn(f64) -> f64) -> Self {
        Self::from_fn(grid, 0.0, |t| C64::new(f(t), 0.0))
    }

    pub fn real_parts(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.re).collect()
    }

    pub fn max_imag(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.im.abs()))
    }

    /// True when samples are on the axis and their imaginary parts stay below `tol`.
    pub fn is_real(&self, tol: f64) -> bool {
        self.strip_offset == 0.0 && self.max_imag() < tol
    }
}
