//! Property-based checks of the solver, the adjoint and the subsolution tools.

use hjselect::adjoint::{solve_adjoint, AdjointProblem};
use hjselect::solver::{solve_discounted, solve_generalized};
use hjselect::subsolution::{admissible_slopes, viscosity_residuals};
use hjselect::{GeneralizedDiscount, GridFunction, HamiltonianModel, Potential, Scheme, SolverConfig, TorusGrid};
use proptest::prelude::*;

const N: usize = 32;

fn sampled() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0f64..0.6, N)
}

fn cfg() -> ProptestConfig {
    ProptestConfig { cases: 24, ..ProptestConfig::default() }
}

proptest! {
    #![proptest_config(cfg())]

    #[test]
    fn larger_potential_gives_larger_solution(base in sampled(), bump in sampled(), p in -2.0f64..2.0) {
        let g = TorusGrid::new(N).unwrap();
        let lo = HamiltonianModel::double_well(p, Potential::sampled(base.clone()).unwrap());
        let hi_values: Vec<f64> = base.iter().zip(&bump).map(|(a, b)| a + b).collect();
        let hi = HamiltonianModel::double_well(p, Potential::sampled(hi_values).unwrap());
        let c = SolverConfig::default();
        let u_lo = solve_discounted(&lo, 0.05, g, &c).unwrap().u;
        let u_hi = solve_discounted(&hi, 0.05, g, &c).unwrap().u;
        for i in 0..N {
            prop_assert!(u_hi.at(i) >= u_lo.at(i) - 1e-8);
        }
    }

    #[test]
    fn rotating_the_potential_rotates_the_solution(values in sampled(), k in 1usize..N, p in -2.0f64..2.0) {
        let g = TorusGrid::new(N).unwrap();
        let mut rolled = values.clone();
        rolled.rotate_right(k);
        let c = SolverConfig::default();
        let a = solve_discounted(&HamiltonianModel::double_well(p, Potential::sampled(values).unwrap()), 0.05, g, &c).unwrap().u;
        let b = solve_discounted(&HamiltonianModel::double_well(p, Potential::sampled(rolled).unwrap()), 0.05, g, &c).unwrap().u;
        for i in 0..N {
            prop_assert!((a.at(i) - b.at(i + k)).abs() < 1e-8);
        }
    }

    #[test]
    fn scaled_extremes_bracketed_by_the_hamiltonian(values in sampled(), p in -2.0f64..2.0, eps in 0.01f64..0.5) {
        let g = TorusGrid::new(N).unwrap();
        let h = HamiltonianModel::double_well(p, Potential::sampled(values).unwrap());
        let sol = solve_discounted(&h, eps, g, &SolverConfig::default()).unwrap();
        let at_p: Vec<f64> = g.nodes().map(|x| h.eval(x, p)).collect();
        let (lo, hi) = (at_p.iter().cloned().fold(f64::INFINITY, f64::min), at_p.iter().cloned().fold(f64::NEG_INFINITY, f64::max));
        prop_assert!(-eps * sol.u.max() >= lo - 1e-8);
        prop_assert!(-eps * sol.u.min() <= hi + 1e-8);
    }

    #[test]
    fn adjoint_is_a_normalized_nonnegative_density(
        values in sampled(), p in -2.0f64..2.0, eps in 0.01f64..0.5, x0 in 0usize..N, viscous in any::<bool>()
    ) {
        let g = TorusGrid::new(N).unwrap();
        let h = HamiltonianModel::double_well(p, Potential::sampled(values).unwrap());
        let gd = GeneralizedDiscount::from_hamiltonian(&h, 0.0);
        let c = SolverConfig::default().with_eta(if viscous { g.spacing() } else { 0.0 });
        let sol = solve_generalized(&gd, eps, g, &c).unwrap();
        let adj = solve_adjoint(&AdjointProblem::new(&gd, &sol, Scheme::Godunov, x0).unwrap()).unwrap();
        prop_assert!(adj.theta.min() >= 0.0);
        prop_assert!((adj.mass_weighted - 1.0).abs() < 1e-10);
    }

    #[test]
    fn admissible_slopes_lie_in_the_sublevel(x in 0.0f64..1.0, p in -2.0f64..2.0, level in 0.2f64..3.0) {
        let h = HamiltonianModel::double_well(p, Potential::tent(0.25, 0.1).unwrap());
        let iv = admissible_slopes(&h, x, p, level).unwrap();
        for &(a, b) in &iv.components {
            for k in 0..=8 {
                let q = a + (b - a) * k as f64 / 8.0;
                prop_assert!(h.eval(x, p + q) <= level + 1e-9);
            }
        }
        prop_assert!(h.eval(x, p + iv.lo - 1e-6) > level);
        prop_assert!(h.eval(x, p + iv.hi + 1e-6) > level);
    }

    #[test]
    fn constants_are_subsolutions_above_the_ergodic_bound(c in -3.0f64..3.0, p in -2.0f64..2.0) {
        let g = TorusGrid::new(N).unwrap();
        let v = Potential::tent(0.25, 0.5).unwrap();
        let h = HamiltonianModel::double_well(p, v);
        let level = g.nodes().map(|x| h.eval(x, p)).fold(f64::NEG_INFINITY, f64::max);
        let r = viscosity_residuals(&GridFunction::constant(g, c), &h, p, level);
        prop_assert!(r.max_sub() <= 1e-12);
    }
}
