//! Explicit discounted solution of the flat example against the solver and the limit.
use hjselect::subsolution::{analytic_flat_limit, flat_discounted_construction};
use hjselect::solver::solve_discounted;
use hjselect::{HamiltonianModel, Potential, SolverConfig, TorusGrid};

fn main() -> hjselect::Result<()> {
    let grid = TorusGrid::new(1024)?;
    let s = 0.1;
    let h = HamiltonianModel::flat(Potential::triangular_bump(s)?);
    let (u0, b) = analytic_flat_limit(s, grid)?;
    println!("limit: u0(2s) = {:.4}, zero set starts at {b:.4}", u0.interpolate(2.0 * s));
    for eps in [1e-2, 3e-3, 1e-3] {
        let built = flat_discounted_construction(s, eps, grid)?;
        let solved = solve_discounted(&h, eps, grid, &SolverConfig::default())?.normalized(1.0);
        println!(
            "eps {eps:<6} a {:.5} b {:.5}  |built - solver| {:.2e}  |built - limit| {:.2e}",
            built.a,
            built.b,
            built.v.max_abs_diff(&solved),
            built.v.max_abs_diff(&u0)
        );
    }
    Ok(())
}
