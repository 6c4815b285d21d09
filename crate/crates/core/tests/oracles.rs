//! Closed-form and analytically derived values.

use approx::assert_abs_diff_eq;
use hjselect::ergodic::{estimate_ergodic_constant, estimate_ergodic_constant_at, vanishing_discount_limit};
use hjselect::solver::solve_discounted;
use hjselect::subsolution::{analytic_flat_limit, flat_discounted_construction};
use hjselect::{HamiltonianModel, Potential, Scheme, SolverConfig, TorusGrid};

const LADDER: [f64; 5] = [0.064, 0.032, 0.016, 0.008, 0.004];

fn grid(n: usize) -> TorusGrid {
    TorusGrid::new(n).unwrap()
}

#[test]
fn free_double_well_is_its_own_effective_hamiltonian() {
    let cfg = SolverConfig::default();
    for p in [0.0, 0.5, 1.0, 1.5, 2.0] {
        let h = HamiltonianModel::double_well(p, Potential::Zero);
        let est = estimate_ergodic_constant(&h, grid(64), &LADDER, &cfg).unwrap();
        assert_abs_diff_eq!(est.hbar, (p * p - 1.0f64).powi(2), epsilon = 1e-9);
        let sol = solve_discounted(&h, 1e-3, grid(64), &cfg).unwrap();
        assert!(sol.normalized(est.hbar).values().iter().all(|v| v.abs() < 1e-8));
    }
}

// Small |P|: slopes can switch between the two inner branches, so the constant is fixed
// by the peak of V alone: hbar = 1 - max V.
#[test]
fn tent_double_well_plateau_near_zero_momentum() {
    let v = Potential::tent(0.25, 0.5).unwrap();
    for p in [0.0, 0.3] {
        let h = HamiltonianModel::double_well(p, v.clone());
        let est = estimate_ergodic_constant(&h, grid(512), &LADDER, &SolverConfig::default()).unwrap();
        assert_abs_diff_eq!(est.hbar, 0.5, epsilon = 1e-6);
    }
}

#[test]
fn flat_example_constant_is_one() {
    let h = HamiltonianModel::flat(Potential::triangular_bump(0.1).unwrap());
    let est = estimate_ergodic_constant(&h, grid(256), &LADDER, &SolverConfig::default()).unwrap();
    assert_abs_diff_eq!(est.hbar, 1.0, epsilon = 1e-9);
}

#[test]
fn flat_example_limit_matches_closed_form() {
    // 0.2 and 0.42 are nodes of this grid
    let g = grid(1000);
    let (u0, b) = analytic_flat_limit(0.1, g).unwrap();
    assert_abs_diff_eq!(b, 0.42, epsilon = 1e-12);
    assert_abs_diff_eq!(u0.at(200), 0.11, epsilon = 1e-12);
    assert!(u0.values()[420..].iter().all(|v| v.abs() < 1e-12));
    let h = HamiltonianModel::flat(Potential::triangular_bump(0.1).unwrap());
    let ladder = [0.064, 0.032, 0.016, 0.008, 0.004, 0.002, 0.001];
    let study = vanishing_discount_limit(&h, 1.0, g, &ladder, &SolverConfig::default()).unwrap();
    assert!(study.u0.max_abs_diff(&u0) < 5e-3);
    let built = flat_discounted_construction(0.1, 1e-3, g).unwrap();
    assert!(built.v.max_abs_diff(&study.u0) < 5.0 * g.spacing());
    assert_abs_diff_eq!(built.v.at(0), 0.0, epsilon = 1e-12);
}

#[test]
fn constant_shift_moves_the_estimate() {
    let g = grid(64);
    let tent = Potential::tent(0.25, 0.5).unwrap();
    let shifted = Potential::sampled(g.nodes().map(|x| tent.eval(x) + 0.1).collect()).unwrap();
    let cfg = SolverConfig::default();
    let a = estimate_ergodic_constant(&HamiltonianModel::double_well(1.5, tent), g, &LADDER, &cfg).unwrap();
    let b = estimate_ergodic_constant(&HamiltonianModel::double_well(1.5, shifted), g, &LADDER, &cfg).unwrap();
    assert_abs_diff_eq!(a.hbar - 0.1, b.hbar, epsilon = 1e-10);
}

#[test]
fn anchors_agree_within_twice_the_gap() {
    let h = HamiltonianModel::double_well(0.5, Potential::tent(0.25, 0.5).unwrap());
    let cfg = SolverConfig::default();
    let a = estimate_ergodic_constant_at(&h, grid(256), &LADDER, &cfg, 0).unwrap();
    let b = estimate_ergodic_constant_at(&h, grid(256), &LADDER, &cfg, 100).unwrap();
    assert!((a.hbar - b.hbar).abs() <= 2.0 * a.extrapolation_gap.max(b.extrapolation_gap));
}

#[test]
fn lax_friedrichs_stays_close_on_the_flat_example() {
    let g = grid(256);
    let h = HamiltonianModel::flat(Potential::triangular_bump(0.1).unwrap());
    let gd = hjselect::GeneralizedDiscount::from_hamiltonian(&h, 0.0);
    let sigma = hjselect::solver::dissipation_bound(&gd, g, 8.0);
    let cfg = SolverConfig { scheme: Scheme::LaxFriedrichs { sigma }, ..SolverConfig::default() };
    let est = estimate_ergodic_constant(&h, g, &LADDER, &cfg).unwrap();
    assert!((est.hbar - 1.0).abs() < 1e-2, "hbar {}", est.hbar);
}
