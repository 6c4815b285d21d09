//! Pairing table of approximate Mather measures along a discount ladder.
use hjselect::adjoint::{approximate_mather, test_function_dictionary, MatherOptions};
use hjselect::{GeneralizedDiscount, HamiltonianModel, Potential, TorusGrid};

fn main() -> hjselect::Result<()> {
    let grid = TorusGrid::new(1024)?;
    let h = HamiltonianModel::flat(Potential::triangular_bump(0.1)?);
    let gd = GeneralizedDiscount::from_hamiltonian(&h, 1.0);
    let m = approximate_mather(&gd, grid.nearest(0.5), &[1.6e-2, 8e-3, 4e-3, 2e-3, 1e-3], grid, &MatherOptions::default())?;
    let dict = test_function_dictionary();
    print!("{:>8} {:>9} {:>8}", "eps", "eta", "mass");
    for t in dict.iter().take(5) {
        print!(" {:>10}", t.label());
    }
    println!();
    for row in &m.table {
        print!("{:>8.1e} {:>9.2e} {:>8.5}", row.epsilon, row.eta, row.mass_weighted);
        for v in row.pairings.iter().take(5) {
            print!(" {v:>10.5}");
        }
        println!();
    }
    println!("relative Cauchy gap {:.3e}", m.cauchy_gap);
    Ok(())
}
