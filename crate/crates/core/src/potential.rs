//! Periodic potentials on the unit circle.

use crate::error::{Error, Result};
use crate::grid::TorusGrid;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Potential {
    Zero,
    /// `x` on `[0,s]`, `2s - x` on `[s,2s]`, zero elsewhere.
    TriangularBump { s: f64 },
    /// Tent with apex `peak` at `half_width`, supported on `[0, 2 half_width]`.
    Tent { half_width: f64, peak: f64 },
    /// Nodal values on a uniform periodic grid, interpolated linearly.
    Sampled { values: Vec<f64> },
}

impl Potential {
    pub fn triangular_bump(s: f64) -> Result<Self> {
        if !(s > 0.0 && s < 0.25) {
            return Err(Error::InvalidParameter(format!("bump width {s} outside (0, 1/4)")));
        }
        Ok(Potential::TriangularBump { s })
    }

    pub fn tent(half_width: f64, peak: f64) -> Result<Self> {
        if !(half_width > 0.0 && half_width <= 0.5) || !(peak >= 0.0) || !peak.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "tent needs half width in (0, 1/2] and peak >= 0, got ({half_width}, {peak})"
            )));
        }
        Ok(Potential::Tent { half_width, peak })
    }

    pub fn sampled(values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 || values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(
                "sampled potential needs at least two finite values".into(),
            ));
        }
        Ok(Potential::Sampled { values })
    }

    pub fn eval(&self, x: f64) -> f64 {
        let x = x.rem_euclid(1.0);
        match self {
            Potential::Zero => 0.0,
            Potential::TriangularBump { s } => tent_value(x, *s, *s),
            Potential::Tent { half_width, peak } => tent_value(x, *half_width, *peak),
            Potential::Sampled { values } => {
                let n = values.len();
                let t = x * n as f64;
                let i = (t.floor() as usize).min(n - 1);
                let frac = t - i as f64;
                (1.0 - frac) * values[i] + frac * values[(i + 1) % n]
            }
        }
    }

    /// Points where the potential fails to be smooth.
    pub fn breakpoints(&self) -> Vec<f64> {
        match self {
            Potential::Zero => vec![],
            Potential::TriangularBump { s } => vec![0.0, *s, 2.0 * s],
            Potential::Tent { half_width, .. } => vec![0.0, *half_width, 2.0 * half_width],
            Potential::Sampled { values } => {
                let n = values.len();
                (0..n).map(|i| i as f64 / n as f64).collect()
            }
        }
    }

    pub fn max_value(&self) -> f64 {
        self.extremes(None).1
    }

    pub fn min_value(&self) -> f64 {
        self.extremes(None).0
    }

    fn extremes(&self, grid: Option<TorusGrid>) -> (f64, f64) {
        let mut pts = self.breakpoints();
        if let Some(g) = grid {
            pts.extend(g.nodes());
        }
        if pts.is_empty() {
            pts.push(0.0);
        }
        pts.iter().map(|&x| self.eval(x)).fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
            (lo.min(v), hi.max(v))
        })
    }

    /// `max V - min V`, sampled at breakpoints and optionally at grid nodes.
    pub fn oscillation_on(&self, grid: Option<TorusGrid>) -> f64 {
        let (lo, hi) = self.extremes(grid);
        hi - lo
    }
}

pub fn oscillation(v: &Potential) -> f64 {
    v.oscillation_on(None)
}

fn tent_value(x: f64, half_width: f64, peak: f64) -> f64 {
    let slope = peak / half_width;
    if x <= half_width {
        slope * x
    } else if x <= 2.0 * half_width {
        slope * (2.0 * half_width - x)
    } else {
        0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn bump_values() {
        let v = Potential::triangular_bump(0.1).unwrap();
        assert_abs_diff_eq!(v.eval(0.05), 0.05, epsilon = 1e-15);
        assert_abs_diff_eq!(v.eval(0.15), 0.05, epsilon = 1e-15);
        assert_eq!(v.eval(0.5), 0.0);
        assert_abs_diff_eq!(v.eval(1.05), 0.05, epsilon = 1e-15);
        assert_eq!(Potential::Zero.eval(0.37), 0.0);
    }

    #[test]
    fn bump_width_is_validated() {
        assert!(Potential::triangular_bump(0.0).is_err());
        assert!(Potential::triangular_bump(0.25).is_err());
    }

    #[test]
    fn oscillations() {
        assert_eq!(oscillation(&Potential::Zero), 0.0);
        assert_abs_diff_eq!(
            oscillation(&Potential::triangular_bump(0.1).unwrap()),
            0.1,
            epsilon = 1e-15
        );
        let s = Potential::sampled(vec![0.0, 0.3, 0.7, 0.2]).unwrap();
        assert_abs_diff_eq!(oscillation(&s), 0.7, epsilon = 1e-15);
        assert_abs_diff_eq!(oscillation(&Potential::tent(0.25, 0.5).unwrap()), 0.5, epsilon = 1e-15);
    }

    #[test]
    fn sampled_interpolates() {
        let s = Potential::sampled(vec![0.0, 0.3, 0.7, 0.2]).unwrap();
        assert_abs_diff_eq!(s.eval(0.125), 0.15, epsilon = 1e-15);
        assert_abs_diff_eq!(s.eval(0.875), 0.1, epsilon = 1e-15);
    }
}
