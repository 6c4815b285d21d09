//! The selected limit satisfies the measure constraint; candidates that break it are rejected.
use hjselect::adjoint::{approximate_mather, MatherOptions};
use hjselect::ergodic::{selection_constraint_check, vanishing_discount_limit};
use hjselect::subsolution::explicit_w;
use hjselect::{GeneralizedDiscount, GridFunction, HamiltonianModel, Potential, SolverConfig, TorusGrid};

fn main() -> hjselect::Result<()> {
    let grid = TorusGrid::new(1024)?;
    let h = HamiltonianModel::flat(Potential::triangular_bump(0.1)?);
    let gd = GeneralizedDiscount::from_hamiltonian(&h, 1.0);
    let ladder = [0.064, 0.032, 0.016, 0.008, 0.004, 0.002, 0.001];
    let u0 = vanishing_discount_limit(&h, 1.0, grid, &ladder, &SolverConfig::default())?.u0;
    let mather_eps = [1.6e-2, 8e-3, 4e-3, 2e-3, 1e-3];
    let measures: Vec<_> = [0.05, 0.5, 0.8]
        .iter()
        .map(|&x0| approximate_mather(&gd, grid.nearest(x0), &mather_eps, grid, &MatherOptions::default()).map(|m| m.measure))
        .collect::<hjselect::Result<_>>()?;
    let candidates = [
        ("computed limit", u0.clone()),
        ("constant 0", GridFunction::constant(grid, 0.0)),
        ("constant 0.5", GridFunction::constant(grid, 0.5)),
        ("two-slope at 0.3", explicit_w(0.3, grid)),
    ];
    for (name, w) in candidates {
        let ok = selection_constraint_check(&w, &measures, &gd, 5e-2)?;
        let above = w.values().iter().zip(u0.values()).map(|(a, b)| a - b).fold(f64::MIN, f64::max);
        println!("{name:<18} admitted {ok:<5} max(w - u0) {above:+.4}");
    }
    Ok(())
}
