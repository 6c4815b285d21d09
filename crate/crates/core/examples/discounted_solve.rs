//! One discounted solve of the double well with a tent potential.
use hjselect::solver::{residual_field, solve_discounted};
use hjselect::{HamiltonianModel, Potential, SolverConfig, TorusGrid};

fn main() -> hjselect::Result<()> {
    let grid = TorusGrid::new(512)?;
    let h = HamiltonianModel::double_well(0.5, Potential::tent(0.25, 0.5)?);
    let cfg = SolverConfig::default();
    let sol = solve_discounted(&h, 1e-2, grid, &cfg)?;
    let res = residual_field(&sol.u, &h, 1e-2, &cfg);
    println!("iterations {}  residual {:.2e}  Lipschitz {:.4}", sol.iterations, sol.residual, sol.lipschitz);
    println!("-eps u ranges over [{:.6}, {:.6}]", -1e-2 * sol.u.max(), -1e-2 * sol.u.min());
    println!("max |scheme residual| {:.2e}", res.max().max(-res.min()));
    Ok(())
}
