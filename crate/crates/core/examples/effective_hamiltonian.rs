//! Effective Hamiltonian of the double well along a momentum sweep.
use hjselect::ergodic::sweep_effective_hamiltonian;
use hjselect::{HamiltonianModel, Potential, SolverConfig, TorusGrid};

fn main() -> hjselect::Result<()> {
    let grid = TorusGrid::new(256)?;
    let v = Potential::tent(0.25, 0.5)?;
    let ladder = [0.064, 0.032, 0.016, 0.008, 0.004];
    let momenta: Vec<f64> = (0..=20).map(|k| k as f64 * 0.1).collect();
    let points = sweep_effective_hamiltonian(|p| HamiltonianModel::double_well(p, v.clone()), &momenta, grid, &ladder, &SolverConfig::default());
    println!("{:>6} {:>12} {:>12}", "P", "hbar", "(P^2-1)^2");
    for pt in points {
        let free = (pt.momentum * pt.momentum - 1.0f64).powi(2);
        match pt.hbar {
            Some(hb) => println!("{:>6.2} {:>12.6} {:>12.6}", pt.momentum, hb, free),
            None => println!("{:>6.2} failed: {}", pt.momentum, pt.error.unwrap_or_default()),
        }
    }
    Ok(())
}
