//! Adjoint density from a point source and the identities its measure satisfies.
use hjselect::adjoint::{build_measure, check_identity_i, check_identity_ii, solve_adjoint, AdjointProblem};
use hjselect::solver::solve_generalized;
use hjselect::{GeneralizedDiscount, GridFunction, HamiltonianModel, Potential, SolverConfig, TorusGrid};

fn main() -> hjselect::Result<()> {
    let h = HamiltonianModel::flat(Potential::triangular_bump(0.1)?);
    let gd = GeneralizedDiscount::from_hamiltonian(&h, 1.0);
    for (eps, n) in [(1e-2, 512), (5e-3, 1024), (2.5e-3, 2048)] {
        let grid = TorusGrid::new(n)?;
        let cfg = SolverConfig::default().with_eta(eps);
        let sol = solve_generalized(&gd, eps, grid, &cfg)?;
        let ap = AdjointProblem::new(&gd, &sol, cfg.scheme, grid.nearest(0.5))?;
        let adj = solve_adjoint(&ap)?;
        let mu = build_measure(&ap, &adj);
        let phi = GridFunction::from_fn(grid, |x| (2.0 * std::f64::consts::PI * x).sin());
        println!(
            "eps {eps:<7} N {n:<5} mass-1 {:+.1e}  min theta {:.2e}  identities {:.3e} {:.3e}",
            adj.mass_weighted - 1.0,
            adj.theta.min(),
            check_identity_i(&mu, &gd),
            check_identity_ii(&mu, &phi)
        );
    }
    Ok(())
}
