//! Normalized solutions of the flat example converge to the explicit limit.
use hjselect::ergodic::vanishing_discount_limit;
use hjselect::subsolution::analytic_flat_limit;
use hjselect::{HamiltonianModel, Potential, SolverConfig, TorusGrid};

fn main() -> hjselect::Result<()> {
    let grid = TorusGrid::new(1024)?;
    let h = HamiltonianModel::flat(Potential::triangular_bump(0.1)?);
    let ladder = [0.064, 0.032, 0.016, 0.008, 0.004, 0.002, 0.001];
    let study = vanishing_discount_limit(&h, 1.0, grid, &ladder, &SolverConfig::default())?;
    let (u0, b) = analytic_flat_limit(0.1, grid)?;
    for (k, gap) in study.cauchy_gaps.iter().enumerate() {
        println!("eps {:<6} -> {:<6} gap {:.3e}", ladder[k], ladder[k + 1], gap);
    }
    println!("distance to the explicit limit {:.3e}, zero set starts at b = {b:.4}", study.u0.max_abs_diff(&u0));
    Ok(())
}
