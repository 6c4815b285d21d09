//! Monotone numerical Hamiltonians built from one-sided slopes.

use crate::discount::GeneralizedDiscount;
use crate::hamiltonian::{HamiltonianModel, Side};
use serde::{Deserialize, Serialize};

/// Numerical flux used to discretize `G(x, Dv)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub enum Scheme {
    /// Exact min/max of `G` between the one-sided slopes.
    #[default]
    Godunov,
    /// Central slope with artificial dissipation `sigma`.
    LaxFriedrichs { sigma: f64 },
}

/// Value of the numerical Hamiltonian at a node together with its partial derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodeFlux {
    pub value: f64,
    /// Slope at which `G` is effectively evaluated.
    pub momentum: f64,
    /// Derivative with respect to the backward difference, always `>= 0`.
    pub d_minus_coef: f64,
    /// Derivative with respect to the forward difference, always `<= 0`.
    pub d_plus_coef: f64,
}

impl NodeFlux {
    /// Transport speed `D_p G` seen by the linearized scheme.
    pub fn velocity(&self) -> f64 {
        self.d_minus_coef + self.d_plus_coef
    }
}

/// Lax-Friedrichs flux `H(x, (d- + d+)/2) - sigma (d+ - d-)/2` at the full momentum.
pub fn numerical_hamiltonian(h: &HamiltonianModel, x: f64, d_minus: f64, d_plus: f64, sigma: f64) -> f64 {
    h.eval(x, 0.5 * (d_minus + d_plus)) - 0.5 * sigma * (d_plus - d_minus)
}

/// Godunov flux at the full momentum: min of `H` over `[d-, d+]`, or max over `[d+, d-]`.
pub fn godunov_hamiltonian(h: &HamiltonianModel, x: f64, d_minus: f64, d_plus: f64) -> f64 {
    let crit = h.critical_momenta();
    godunov_select(|p| h.eval(x, p), &crit, d_minus, d_plus).0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Attained {
    Minus,
    Plus,
    Interior,
}

fn godunov_select(g: impl Fn(f64) -> f64, crit: &[f64], dm: f64, dp: f64) -> (f64, f64, Attained) {
    let minimize = dm <= dp;
    let better = |a: f64, b: f64| if minimize { a < b } else { a > b };
    let (lo, hi) = if minimize { (dm, dp) } else { (dp, dm) };
    let mut best = (g(dm), dm, Attained::Minus);
    let vp = g(dp);
    if better(vp, best.0) {
        best = (vp, dp, Attained::Plus);
    }
    for &c in crit {
        if c > lo && c < hi {
            let vc = g(c);
            if better(vc, best.0) {
                best = (vc, c, Attained::Interior);
            }
        }
    }
    best
}

/// Evaluates the chosen flux for `G(x, .)` of a generalized pair.
pub fn node_flux(gd: &GeneralizedDiscount, scheme: Scheme, x: f64, dm: f64, dp: f64) -> NodeFlux {
    match scheme {
        Scheme::Godunov => {
            let (value, momentum, at) = godunov_select(|p| gd.g(x, p), gd.critical_momenta(), dm, dp);
            let (am, ap) = if dm == dp {
                let s = gd.g_slope(x, dm, Side::Right);
                (s.max(0.0), s.min(0.0))
            } else {
                match (at, dm < dp) {
                    (Attained::Interior, _) => (0.0, 0.0),
                    (Attained::Minus, true) => (gd.g_slope(x, dm, Side::Right).max(0.0), 0.0),
                    (Attained::Plus, true) => (0.0, gd.g_slope(x, dp, Side::Left).min(0.0)),
                    (Attained::Minus, false) => (gd.g_slope(x, dm, Side::Left).max(0.0), 0.0),
                    (Attained::Plus, false) => (0.0, gd.g_slope(x, dp, Side::Right).min(0.0)),
                }
            };
            NodeFlux { value, momentum, d_minus_coef: am, d_plus_coef: ap }
        }
        Scheme::LaxFriedrichs { sigma } => {
            let mid = 0.5 * (dm + dp);
            let s = gd.g_slope(x, mid, Side::Right);
            NodeFlux {
                value: gd.g(x, mid) - 0.5 * sigma * (dp - dm),
                momentum: mid,
                d_minus_coef: 0.5 * (s + sigma),
                d_plus_coef: 0.5 * (s - sigma),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::{CustomHamiltonian, HamiltonianModel};
    use crate::potential::Potential;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::sync::Arc;

    fn square() -> HamiltonianModel {
        HamiltonianModel::Custom(CustomHamiltonian {
            evaluator: Arc::new(|_, p| p * p),
            critical_momenta: vec![0.0],
            momentum_shift: 0.0,
        })
    }

    #[test]
    fn lax_friedrichs_examples() {
        let h = square();
        assert_eq!(numerical_hamiltonian(&h, 0.0, 1.0, 1.0, 3.0), 1.0);
        assert_eq!(numerical_hamiltonian(&h, 0.0, 0.0, 2.0, 2.0), -1.0);
        let dw = HamiltonianModel::double_well(0.0, Potential::Zero);
        assert_eq!(numerical_hamiltonian(&dw, 0.2, 0.7, 0.7, 5.0), dw.eval(0.2, 0.7));
    }

    #[test]
    fn godunov_min_and_max() {
        let h = square();
        assert_eq!(godunov_hamiltonian(&h, 0.0, -1.0, 2.0), 0.0);
        assert_eq!(godunov_hamiltonian(&h, 0.0, 2.0, -1.0), 4.0);
        assert_eq!(godunov_hamiltonian(&h, 0.0, 0.5, 0.5), 0.25);
    }

    #[test]
    fn godunov_coefficients_have_monotone_signs() {
        let h = HamiltonianModel::double_well(0.0, Potential::Zero);
        let gd = GeneralizedDiscount::from_hamiltonian(&h, 0.0);
        let f = node_flux(&gd, Scheme::Godunov, 0.0, 1.2, 1.5);
        assert_abs_diff_eq!(f.value, h.eval(0.0, 1.2), epsilon = 1e-15);
        assert!(f.d_minus_coef > 0.0 && f.d_plus_coef == 0.0);
        let f = node_flux(&gd, Scheme::Godunov, 0.0, -0.5, -0.5);
        assert_abs_diff_eq!(f.velocity(), h.slope(0.0, -0.5, Side::Right), epsilon = 1e-15);
    }

    proptest! {
        #[test]
        fn godunov_is_monotone(dm in -3.0f64..3.0, dp in -3.0f64..3.0, bump in 0.0f64..0.5) {
            let h = HamiltonianModel::double_well(0.3, Potential::Zero);
            let gd = GeneralizedDiscount::from_hamiltonian(&h, 0.0);
            let base = node_flux(&gd, Scheme::Godunov, 0.0, dm, dp).value;
            // nondecreasing in d-, nonincreasing in d+
            prop_assert!(node_flux(&gd, Scheme::Godunov, 0.0, dm + bump, dp).value >= base - 1e-12);
            prop_assert!(node_flux(&gd, Scheme::Godunov, 0.0, dm, dp + bump).value <= base + 1e-12);
        }

        #[test]
        fn godunov_is_consistent(d in -3.0f64..3.0) {
            let h = HamiltonianModel::flat(Potential::Zero);
            let gd = GeneralizedDiscount::from_hamiltonian(&h, 0.0);
            let f = node_flux(&gd, Scheme::Godunov, 0.4, d, d);
            prop_assert!((f.value - h.eval_shifted(0.4, d)).abs() < 1e-15);
        }

        #[test]
        fn godunov_commutes_with_increasing_maps(dm in -2.0f64..1.5, dp in -2.0f64..1.5) {
            let h = HamiltonianModel::double_well(0.5, Potential::Zero);
            let direct = GeneralizedDiscount::from_hamiltonian(&h, 0.0);
            let exp = GeneralizedDiscount::exponential(&h, 1.0, 0.0).unwrap();
            let a = node_flux(&direct, Scheme::Godunov, 0.0, dm, dp).value;
            let b = node_flux(&exp, Scheme::Godunov, 0.0, dm, dp).value;
            prop_assert!((a.exp() - b).abs() <= 1e-12 * b.abs().max(1.0));
        }
    }
}
