//! Hamiltonian families `H(x, p)` on the circle.

use crate::error::{Error, Result};
use crate::potential::Potential;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::sync::Arc;

/// Which one-sided derivative to take at a kink.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// Real polynomial with coefficients in ascending order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polynomial {
    coefficients: Vec<f64>,
}

impl Polynomial {
    pub fn new(mut coefficients: Vec<f64>) -> Result<Self> {
        while coefficients.len() > 1 && *coefficients.last().unwrap() == 0.0 {
            coefficients.pop();
        }
        if coefficients.is_empty() || coefficients.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidParameter("polynomial needs finite coefficients".into()));
        }
        Ok(Self { coefficients })
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn degree(&self) -> usize {
        self.coefficients.len() - 1
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.coefficients.iter().rev().fold(0.0, |acc, c| acc * t + c)
    }

    pub fn derivative(&self) -> Polynomial {
        if self.coefficients.len() == 1 {
            return Polynomial { coefficients: vec![0.0] };
        }
        Polynomial {
            coefficients: self
                .coefficients
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| k as f64 * c)
                .collect(),
        }
    }

    /// Real roots inside `[lo, hi]`, located by sign changes on a fine sample and bisection.
    /// Double roots are caught through a sign change of the derivative.
    pub fn roots_in(&self, lo: f64, hi: f64) -> Vec<f64> {
        const SAMPLES: usize = 4000;
        let step = (hi - lo) / SAMPLES as f64;
        let mut roots: Vec<f64> = Vec::new();
        let push = |r: f64, roots: &mut Vec<f64>| {
            if roots.last().is_none_or(|&last| (r - last).abs() > 1e-9) {
                roots.push(r);
            }
        };
        let slope = self.derivative();
        for k in 0..SAMPLES {
            let a = lo + k as f64 * step;
            let b = a + step;
            let (fa, fb) = (self.eval(a), self.eval(b));
            if fa == 0.0 {
                push(a, &mut roots);
            } else if fa * fb < 0.0 {
                push(bisect(|t| self.eval(t), a, b), &mut roots);
            } else if slope.eval(a) * slope.eval(b) < 0.0 {
                let m = bisect(|t| slope.eval(t), a, b);
                if self.eval(m).abs() < 1e-12 {
                    push(m, &mut roots);
                }
            }
        }
        if self.eval(hi) == 0.0 {
            push(hi, &mut roots);
        }
        roots
    }

    pub fn critical_points_in(&self, lo: f64, hi: f64) -> Vec<f64> {
        self.derivative().roots_in(lo, hi)
    }
}

/// Bisection for a sign change of `f` on `[a, b]`.
pub(crate) fn bisect(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let mut fa = f(a);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m == a || m == b {
            break;
        }
        let fm = f(m);
        if fm == 0.0 {
            return m;
        }
        if (fm < 0.0) == (fa < 0.0) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// Caller-supplied Hamiltonian `H(x, p)`.
#[derive(Clone)]
pub struct CustomHamiltonian {
    pub evaluator: Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>,
    /// Sorted momenta where `p -> H(x, p)` switches monotonicity, shared by all `x`.
    pub critical_momenta: Vec<f64>,
    pub momentum_shift: f64,
}

impl fmt::Debug for CustomHamiltonian {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomHamiltonian")
            .field("critical_momenta", &self.critical_momenta)
            .field("momentum_shift", &self.momentum_shift)
            .finish_non_exhaustive()
    }
}

/// Families of Hamiltonians. `eval` takes the full momentum; the solvers evaluate
/// `H(x, P + p)` with `P` the model's momentum shift.
#[derive(Debug, Clone)]
pub enum HamiltonianModel {
    /// `(p^2 - 1)^2 - V(x)`.
    DoubleWell { momentum: f64, potential: Potential },
    /// `F(|p|) - V(x)`; `F` has slope one except for a plateau at height one on `[1, 2]`.
    FlatQuasiConvex { momentum: f64, potential: Potential },
    /// `K(|p|) + V(x)` for a kinetic profile with `K'(0) = 0`, `K''(0) > 0`, `K' > 0` on `(0, inf)`.
    SmoothQuasiConvex { kinetic: Polynomial, potential: Potential, momentum: f64 },
    /// `F(p) - V(x)` with a coercive polynomial profile.
    Multiwell { profile: Polynomial, critical_momenta: Vec<f64>, potential: Potential, momentum: f64 },
    Custom(CustomHamiltonian),
}

pub const FLAT_DEFAULT_MOMENTUM: f64 = 1.5;

/// Plateau profile used by [`HamiltonianModel::FlatQuasiConvex`].
pub fn flat_profile(t: f64) -> f64 {
    if t <= 1.0 {
        t
    } else if t <= 2.0 {
        1.0
    } else {
        t - 1.0
    }
}

fn flat_profile_slope(t: f64, side: Side) -> f64 {
    let on_plateau = match side {
        Side::Right => (1.0..2.0).contains(&t),
        Side::Left => t > 1.0 && t <= 2.0,
    };
    if on_plateau {
        0.0
    } else {
        1.0
    }
}

impl HamiltonianModel {
    pub fn double_well(momentum: f64, potential: Potential) -> Self {
        HamiltonianModel::DoubleWell { momentum, potential }
    }

    pub fn flat(potential: Potential) -> Self {
        HamiltonianModel::FlatQuasiConvex { momentum: FLAT_DEFAULT_MOMENTUM, potential }
    }

    pub fn smooth_quasi_convex(kinetic: Polynomial, potential: Potential, momentum: f64) -> Result<Self> {
        let k1 = kinetic.derivative();
        let k2 = k1.derivative();
        let profile_ok = kinetic.degree() >= 2
            && k1.eval(0.0).abs() < 1e-14
            && k2.eval(0.0) > 0.0
            && (1..=400).all(|j| k1.eval(j as f64 * 0.05) > 0.0);
        if !profile_ok {
            return Err(Error::InvalidParameter(
                "kinetic profile needs K'(0)=0, K''(0)>0 and K'>0 on (0, inf)".into(),
            ));
        }
        Ok(HamiltonianModel::SmoothQuasiConvex { kinetic, potential, momentum })
    }

    pub fn multiwell(profile: Polynomial, potential: Potential, momentum: f64) -> Result<Self> {
        let d = profile.degree();
        let lead = *profile.coefficients().last().unwrap();
        if d < 2 || d % 2 == 1 || lead <= 0.0 {
            return Err(Error::InvalidParameter(
                "multiwell profile must have even degree and positive leading coefficient".into(),
            ));
        }
        let radius = cauchy_root_bound(&profile.derivative());
        let critical_momenta = profile.critical_points_in(-radius, radius);
        Ok(HamiltonianModel::Multiwell { profile, critical_momenta, potential, momentum })
    }

    pub fn momentum(&self) -> f64 {
        match self {
            HamiltonianModel::DoubleWell { momentum, .. }
            | HamiltonianModel::FlatQuasiConvex { momentum, .. }
            | HamiltonianModel::SmoothQuasiConvex { momentum, .. }
            | HamiltonianModel::Multiwell { momentum, .. } => *momentum,
            HamiltonianModel::Custom(c) => c.momentum_shift,
        }
    }

    pub fn with_momentum(&self, p: f64) -> Self {
        let mut out = self.clone();
        match &mut out {
            HamiltonianModel::DoubleWell { momentum, .. }
            | HamiltonianModel::FlatQuasiConvex { momentum, .. }
            | HamiltonianModel::SmoothQuasiConvex { momentum, .. }
            | HamiltonianModel::Multiwell { momentum, .. } => *momentum = p,
            HamiltonianModel::Custom(c) => c.momentum_shift = p,
        }
        out
    }

    pub fn potential(&self) -> Option<&Potential> {
        match self {
            HamiltonianModel::DoubleWell { potential, .. }
            | HamiltonianModel::FlatQuasiConvex { potential, .. }
            | HamiltonianModel::SmoothQuasiConvex { potential, .. }
            | HamiltonianModel::Multiwell { potential, .. } => Some(potential),
            HamiltonianModel::Custom(_) => None,
        }
    }

    /// `H(x, p)` at the full momentum `p`.
    pub fn eval(&self, x: f64, p: f64) -> f64 {
        match self {
            HamiltonianModel::DoubleWell { potential, .. } => {
                let w = p * p - 1.0;
                w * w - potential.eval(x)
            }
            HamiltonianModel::FlatQuasiConvex { potential, .. } => {
                flat_profile(p.abs()) - potential.eval(x)
            }
            HamiltonianModel::SmoothQuasiConvex { kinetic, potential, .. } => {
                kinetic.eval(p.abs()) + potential.eval(x)
            }
            HamiltonianModel::Multiwell { profile, potential, .. } => {
                profile.eval(p) - potential.eval(x)
            }
            HamiltonianModel::Custom(c) => (c.evaluator)(x, p),
        }
    }

    /// `H(x, P + q)`.
    pub fn eval_shifted(&self, x: f64, q: f64) -> f64 {
        self.eval(x, self.momentum() + q)
    }

    /// One-sided derivative in `p` at the full momentum `p`.
    pub fn slope(&self, x: f64, p: f64, side: Side) -> f64 {
        match self {
            HamiltonianModel::DoubleWell { .. } => 4.0 * p * (p * p - 1.0),
            HamiltonianModel::FlatQuasiConvex { .. } => {
                let t = p.abs();
                if p > 0.0 || (p == 0.0 && side == Side::Right) {
                    flat_profile_slope(t, side)
                } else {
                    let mirrored = match side {
                        Side::Left => Side::Right,
                        Side::Right => Side::Left,
                    };
                    -flat_profile_slope(t, mirrored)
                }
            }
            HamiltonianModel::SmoothQuasiConvex { kinetic, .. } => {
                kinetic.derivative().eval(p.abs()) * p.signum()
            }
            HamiltonianModel::Multiwell { profile, .. } => profile.derivative().eval(p),
            HamiltonianModel::Custom(c) => {
                let d = 1e-6 * p.abs().max(1.0);
                match side {
                    Side::Right => ((c.evaluator)(x, p + d) - (c.evaluator)(x, p)) / d,
                    Side::Left => ((c.evaluator)(x, p) - (c.evaluator)(x, p - d)) / d,
                }
            }
        }
    }

    /// Second derivative in `p` by central differences of the right slope.
    pub fn curvature(&self, x: f64, p: f64) -> f64 {
        let d = 1e-5 * p.abs().max(1.0);
        (self.slope(x, p + d, Side::Right) - self.slope(x, p - d, Side::Right)) / (2.0 * d)
    }

    /// Sorted full momenta where `p -> H(x, p)` changes monotonicity or has a plateau corner.
    pub fn critical_momenta(&self) -> Vec<f64> {
        match self {
            HamiltonianModel::DoubleWell { .. } => vec![-1.0, 0.0, 1.0],
            HamiltonianModel::FlatQuasiConvex { .. } => vec![-2.0, -1.0, 0.0, 1.0, 2.0],
            HamiltonianModel::SmoothQuasiConvex { .. } => vec![0.0],
            HamiltonianModel::Multiwell { critical_momenta, .. } => critical_momenta.clone(),
            HamiltonianModel::Custom(c) => c.critical_momenta.clone(),
        }
    }
}

fn cauchy_root_bound(p: &Polynomial) -> f64 {
    let c = p.coefficients();
    let lead = c.last().unwrap().abs();
    1.0 + c[..c.len() - 1].iter().map(|a| a.abs() / lead).fold(0.0, f64::max)
}

/// Coercivity probe: `H(x, P +- 10) > H(x, P) + 1` at the given points.
pub fn coercivity_probe(h: &HamiltonianModel, xs: impl IntoIterator<Item = f64>) -> bool {
    xs.into_iter().all(|x| {
        let base = h.eval_shifted(x, 0.0);
        h.eval_shifted(x, 10.0) > base + 1.0 && h.eval_shifted(x, -10.0) > base + 1.0
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn bump() -> Potential {
        Potential::triangular_bump(0.1).unwrap()
    }

    #[test]
    fn double_well_values() {
        let h = HamiltonianModel::double_well(0.0, Potential::Zero);
        assert_eq!(h.eval(0.3, 0.0), 1.0);
        assert_eq!(h.eval(0.3, 1.0), 0.0);
        assert_eq!(h.eval(0.3, -1.0), 0.0);
    }

    #[test]
    fn flat_value_on_plateau() {
        let h = HamiltonianModel::flat(bump());
        assert_eq!(h.eval(0.5, 1.5), 1.0);
        assert_abs_diff_eq!(h.eval(0.1, 2.5), 1.5 - 0.1, epsilon = 1e-15);
        assert_eq!(h.eval_shifted(0.5, 0.0), 1.0);
    }

    #[test]
    fn flat_one_sided_slopes() {
        let h = HamiltonianModel::flat(Potential::Zero);
        assert_eq!(h.slope(0.0, 1.0, Side::Left), 1.0);
        assert_eq!(h.slope(0.0, 1.0, Side::Right), 0.0);
        assert_eq!(h.slope(0.0, 2.0, Side::Left), 0.0);
        assert_eq!(h.slope(0.0, 2.0, Side::Right), 1.0);
        assert_eq!(h.slope(0.0, -1.0, Side::Left), 0.0);
        assert_eq!(h.slope(0.0, -1.0, Side::Right), -1.0);
        assert_eq!(h.slope(0.0, 0.0, Side::Left), -1.0);
        assert_eq!(h.slope(0.0, 0.0, Side::Right), 1.0);
    }

    #[test]
    fn polynomial_roots_and_critical_points() {
        let p = Polynomial::new(vec![1.0, 0.0, -2.0, 0.0, 1.0]).unwrap();
        let crit = p.critical_points_in(-3.0, 3.0);
        assert_eq!(crit.len(), 3);
        for (c, e) in crit.iter().zip([-1.0, 0.0, 1.0]) {
            assert_abs_diff_eq!(*c, e, epsilon = 1e-10);
        }
        assert_eq!(p.roots_in(-3.0, 3.0).len(), 2);
    }

    #[test]
    fn multiwell_matches_double_well() {
        let profile = Polynomial::new(vec![1.0, 0.0, -2.0, 0.0, 1.0]).unwrap();
        let m = HamiltonianModel::multiwell(profile, bump(), 0.3).unwrap();
        let d = HamiltonianModel::double_well(0.3, bump());
        for &(x, p) in &[(0.05, 0.2), (0.7, -1.3), (0.15, 2.0)] {
            assert_abs_diff_eq!(m.eval(x, p), d.eval(x, p), epsilon = 1e-12);
        }
        assert_eq!(m.critical_momenta().len(), 3);
    }

    #[test]
    fn smooth_profile_is_validated() {
        let good = Polynomial::new(vec![0.0, 0.0, 0.5, 0.0, 0.25]).unwrap();
        assert!(HamiltonianModel::smooth_quasi_convex(good, Potential::Zero, 0.0).is_ok());
        let bad = Polynomial::new(vec![0.0, 1.0, 1.0]).unwrap();
        assert!(HamiltonianModel::smooth_quasi_convex(bad, Potential::Zero, 0.0).is_err());
    }

    #[test]
    fn every_family_is_coercive() {
        let xs: Vec<f64> = (0..64).map(|i| i as f64 / 64.0).collect();
        let tent = Potential::tent(0.25, 0.5).unwrap();
        let well = Polynomial::new(vec![1.0, 0.0, -2.0, 0.0, 1.0]).unwrap();
        let models = vec![
            HamiltonianModel::double_well(0.0, tent.clone()),
            HamiltonianModel::flat(bump()),
            HamiltonianModel::smooth_quasi_convex(
                Polynomial::new(vec![0.0, 0.0, 0.5, 0.0, 0.25]).unwrap(),
                bump(),
                0.5,
            )
            .unwrap(),
            HamiltonianModel::multiwell(well, tent, 1.5).unwrap(),
            HamiltonianModel::Custom(CustomHamiltonian {
                evaluator: Arc::new(|x, p| p * p + (2.0 * std::f64::consts::PI * x).sin()),
                critical_momenta: vec![0.0],
                momentum_shift: 0.0,
            }),
        ];
        for h in &models {
            assert!(coercivity_probe(h, xs.iter().copied()), "{h:?}");
        }
    }
}
