//! Case analysis of the double well: sign of hbar, gradient inclusions and branch rewrites.
use hjselect::ergodic::{classify_case, double_well_case_transform, estimate_ergodic_constant, gradient_inclusion_check};
use hjselect::solver::{solve_discounted, solve_generalized};
use hjselect::{HamiltonianModel, Potential, SolverConfig, TorusGrid};

fn main() -> hjselect::Result<()> {
    let grid = TorusGrid::new(1024)?;
    let v = Potential::tent(0.25, 0.5)?;
    let cfg = SolverConfig::default();
    let ladder = [0.064, 0.032, 0.016, 0.008, 0.004, 0.002, 0.001];
    for p in [0.0, 0.5, 1.5] {
        let h = HamiltonianModel::double_well(p, v.clone());
        let est = estimate_ergodic_constant(&h, grid, &ladder, &cfg)?;
        let Some(case) = classify_case(p, est.hbar, est.extrapolation_gap) else {
            println!("P {p}: hbar {:.6} fits no case", est.hbar);
            continue;
        };
        let sol = solve_discounted(&h, 1e-2, grid, &cfg)?;
        let margin = gradient_inclusion_check(&sol.u, p, est.hbar, case)?;
        let branch = double_well_case_transform(p, est.hbar, &v, case)?;
        let rewritten = solve_generalized(&branch, 1e-2, grid, &cfg)?;
        let shift = sol.normalized(est.hbar).max_abs_diff(&rewritten.u);
        println!("P {p}: hbar {:.6} case ({}) margin {margin:.4} branch vs direct {shift:.2e}", est.hbar, case.tag());
    }
    Ok(())
}
