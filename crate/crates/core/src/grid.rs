//! Periodic grids on the unit circle and nodal functions.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

pub const MIN_POINTS: usize = 8;

/// Uniform node-centred grid `x_i = i h`, `h = 1/n`, indices taken mod `n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TorusGrid {
    n: usize,
}

impl TorusGrid {
    pub fn new(n: usize) -> Result<Self> {
        if n < MIN_POINTS {
            return Err(Error::InvalidParameter(format!(
                "grid needs at least {MIN_POINTS} points, got {n}"
            )));
        }
        Ok(Self { n })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        1.0 / self.n as f64
    }

    pub fn node(&self, i: usize) -> f64 {
        (i % self.n) as f64 / self.n as f64
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(move |i| self.node(i))
    }

    #[inline]
    pub fn next(&self, i: usize) -> usize {
        if i + 1 == self.n {
            0
        } else {
            i + 1
        }
    }

    #[inline]
    pub fn prev(&self, i: usize) -> usize {
        if i == 0 {
            self.n - 1
        } else {
            i - 1
        }
    }

    /// Index of the node nearest to `x` (taken mod 1).
    pub fn nearest(&self, x: f64) -> usize {
        let t = x.rem_euclid(1.0) * self.n as f64;
        (t.round() as usize) % self.n
    }
}

/// Values attached to the nodes of a [`TorusGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    grid: TorusGrid,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(grid: TorusGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidParameter(format!(
                "expected {} values, got {}",
                grid.len(),
                values.len()
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn constant(grid: TorusGrid, c: f64) -> Self {
        Self { grid, values: vec![c; grid.len()] }
    }

    pub fn from_fn(grid: TorusGrid, f: impl Fn(f64) -> f64) -> Self {
        Self { grid, values: grid.nodes().map(f).collect() }
    }

    pub fn grid(&self) -> TorusGrid {
        self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn at(&self, i: usize) -> f64 {
        self.values[i % self.values.len()]
    }

    /// Linear interpolation at an arbitrary point of the circle.
    pub fn interpolate(&self, x: f64) -> f64 {
        let n = self.grid.len();
        let t = x.rem_euclid(1.0) * n as f64;
        let i = (t.floor() as usize).min(n - 1);
        let frac = t - i as f64;
        (1.0 - frac) * self.values[i] + frac * self.values[self.grid.next(i)]
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self { grid: self.grid, values: self.values.iter().map(|&v| f(v)).collect() }
    }

    pub fn shifted(&self, c: f64) -> Self {
        self.map(|v| v + c)
    }

    pub fn max_abs_diff(&self, other: &GridFunction) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Backward and forward difference quotients at node `i`.
#[inline]
pub fn one_sided_at(u: &[f64], i: usize, h: f64) -> (f64, f64) {
    let n = u.len();
    let prev = if i == 0 { n - 1 } else { i - 1 };
    let next = if i + 1 == n { 0 } else { i + 1 };
    ((u[i] - u[prev]) / h, (u[next] - u[i]) / h)
}

/// Backward and forward difference quotients at every node.
pub fn one_sided_gradients(u: &GridFunction) -> (Vec<f64>, Vec<f64>) {
    let h = u.grid.spacing();
    (0..u.grid.len()).map(|i| one_sided_at(&u.values, i, h)).unzip()
}

/// Largest one-sided difference quotient in absolute value.
pub fn lipschitz_estimate(u: &GridFunction) -> f64 {
    let h = u.grid.spacing();
    u.values
        .iter()
        .zip(u.values.iter().cycle().skip(1))
        .map(|(a, b)| ((b - a) / h).abs())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn rejects_tiny_grids() {
        assert!(TorusGrid::new(7).is_err());
        assert!(TorusGrid::new(8).is_ok());
    }

    #[test]
    fn wraps_indices() {
        let g = TorusGrid::new(8).unwrap();
        assert_eq!(g.next(7), 0);
        assert_eq!(g.prev(0), 7);
        assert_eq!(g.nearest(0.999), 0);
        assert_eq!(g.nearest(-0.125), 7);
    }

    #[test]
    fn differences_of_a_sawtooth() {
        // u(x) = x on [0, 1): forward difference at the last node wraps to -7 h^-1 * h = -7.
        let g = TorusGrid::new(8).unwrap();
        let u = GridFunction::from_fn(g, |x| x);
        let (dm, dp) = one_sided_gradients(&u);
        assert_abs_diff_eq!(dp[3], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(dm[0], -7.0, epsilon = 1e-12);
        assert_abs_diff_eq!(dp[7], -7.0, epsilon = 1e-12);
        assert_abs_diff_eq!(lipschitz_estimate(&u), 7.0, epsilon = 1e-12);
    }

    #[test]
    fn interpolation_is_periodic() {
        let g = TorusGrid::new(8).unwrap();
        let u = GridFunction::from_fn(g, |x| (2.0 * std::f64::consts::PI * x).sin());
        assert_abs_diff_eq!(u.interpolate(1.125), u.at(1), epsilon = 1e-12);
        assert_abs_diff_eq!(u.interpolate(0.0625), 0.5 * (u.at(0) + u.at(1)), epsilon = 1e-12);
    }
}
