//! Maximal subsolutions of the flat cell problem solve off their vertex and fail at it.
use hjselect::subsolution::{maximal_subsolution, viscosity_residuals};
use hjselect::{HamiltonianModel, Potential, TorusGrid};

fn main() -> hjselect::Result<()> {
    let grid = TorusGrid::new(1024)?;
    let h = HamiltonianModel::flat(Potential::triangular_bump(0.1)?);
    for y in [0.0, 0.3, 0.55, 0.8] {
        let m = maximal_subsolution(&h, 1.5, 1.0, y, grid)?;
        let r = viscosity_residuals(&m.s, &h, 1.5, 1.0);
        let j = grid.nearest(y);
        println!(
            "y {y:<4}: sub {:.1e}  super off vertex {:.2}  super at vertex {:.4}  cut at {:.4}",
            r.max_sub(),
            r.max_sup_excluding(&[j]),
            r.sup.at(j),
            m.cut_point
        );
    }
    Ok(())
}
