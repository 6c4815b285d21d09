//! Direct and exponentially transformed solves of a non-convex quasi-convex Hamiltonian agree.
use hjselect::ergodic::{default_lambda0, exp_transform};
use hjselect::solver::{solve_discounted, solve_generalized};
use hjselect::{HamiltonianModel, Polynomial, Potential, SolverConfig, TorusGrid};

fn main() -> hjselect::Result<()> {
    let grid = TorusGrid::new(256)?;
    let kinetic = Polynomial::new(vec![0.0, 0.0, 1.0, 0.0, -0.25, 0.0, 1.0 / 30.0])?;
    let h = HamiltonianModel::smooth_quasi_convex(kinetic, Potential::tent(0.25, 0.5)?, 0.7)?;
    let lambda0 = default_lambda0(&h, grid, 8.0)?;
    let gd = exp_transform(&h, lambda0)?;
    let cfg = SolverConfig::default();
    println!("lambda0 = {lambda0}");
    for eps in [1e-1, 1e-2] {
        let a = solve_discounted(&h, eps, grid, &cfg)?;
        let b = solve_generalized(&gd, eps, grid, &cfg)?;
        println!("eps {eps:<5} max difference {:.2e}", a.u.max_abs_diff(&b.u));
    }
    Ok(())
}
