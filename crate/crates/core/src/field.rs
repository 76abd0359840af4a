//! Samples u(t, r) on a rectangular grid.

use crate::error::{Error, Result};
use crate::profile::{Interp, RadialProfile};
use rayon::prelude::*;

#[derive(Debug, Clone, PartialEq)]
pub struct SpaceTimeField {
    t_grid: Vec<f64>,
    r_grid: Vec<f64>,
    /// Row-major: `values[i * nr + j] = u(t_i, r_j)`.
    values: Vec<f64>,
}

fn check_grid(name: &str, g: &[f64]) -> Result<()> {
    if g.is_empty() || g[0] < 0.0 || g.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::domain("SpaceTimeField", format!("{name} must be nonempty, nonnegative and increasing")));
    }
    Ok(())
}

/// `0, step, 2 step, ..., max`; `max` must be a multiple of `step`.
pub fn uniform_grid(max: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || !(max >= 0.0) {
        return Err(Error::Config(format!("grid needs step > 0 and max >= 0 (got max = {max}, step = {step})")));
    }
    let n = (max / step).round();
    if (n * step - max).abs() > 1e-9 * max.max(step) {
        return Err(Error::Config(format!("grid extent {max} is not a multiple of the spacing {step}")));
    }
    Ok((0..=n as usize).map(|i| i as f64 * step).collect())
}

impl SpaceTimeField {
    pub fn new(t_grid: Vec<f64>, r_grid: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        check_grid("t_grid", &t_grid)?;
        check_grid("r_grid", &r_grid)?;
        if values.len() != t_grid.len() * r_grid.len() {
            return Err(Error::domain("SpaceTimeField", "value matrix does not match the grids"));
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            let nr = r_grid.len();
            return Err(Error::domain(
                "SpaceTimeField",
                format!("non-finite value at t = {}, r = {}", t_grid[k / nr], r_grid[k % nr]),
            ));
        }
        Ok(Self { t_grid, r_grid, values })
    }

    /// Evaluates `f(t, r)` at every grid point in parallel.
    pub fn try_from_fn<F>(t_grid: Vec<f64>, r_grid: Vec<f64>, f: F) -> Result<Self>
    where
        F: Fn(f64, f64) -> Result<f64> + Sync,
    {
        let nr = r_grid.len();
        let values = (0..t_grid.len() * nr)
            .into_par_iter()
            .map(|k| f(t_grid[k / nr], r_grid[k % nr]))
            .collect::<Result<Vec<f64>>>()?;
        Self::new(t_grid, r_grid, values)
    }

    pub fn from_fn(t_grid: Vec<f64>, r_grid: Vec<f64>, f: impl Fn(f64, f64) -> f64 + Sync) -> Result<Self> {
        Self::try_from_fn(t_grid, r_grid, |t, r| Ok(f(t, r)))
    }

    pub fn t_grid(&self) -> &[f64] {
        &self.t_grid
    }

    pub fn r_grid(&self) -> &[f64] {
        &self.r_grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn nt(&self) -> usize {
        self.t_grid.len()
    }

    pub fn nr(&self) -> usize {
        self.r_grid.len()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.r_grid.len() + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let nr = self.r_grid.len();
        &self.values[i * nr..(i + 1) * nr]
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        let nr = self.r_grid.len();
        self.values.iter().enumerate().map(move |(k, &v)| (self.t_grid[k / nr], self.r_grid[k % nr], v))
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(self.t_grid.clone(), self.r_grid.clone(), self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Row `i` as a radial profile in r.
    pub fn row_profile(&self, i: usize, interp: Interp) -> Result<RadialProfile> {
        RadialProfile::sampled(self.r_grid.clone(), self.row(i).to_vec(), interp, None)
    }

    /// Index of the grid value equal to `x` up to a relative 1e-9.
    pub fn index_of(grid: &[f64], x: f64) -> Option<usize> {
        let tol = 1e-9 * x.abs().max(1.0);
        let k = grid.partition_point(|&g| g < x - tol);
        (k < grid.len() && (grid[k] - x).abs() <= tol).then_some(k)
    }
}
