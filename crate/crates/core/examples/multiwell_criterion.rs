//! Multiwell kinetic profiles: well depth against the oscillation of the potential.
use hjselect::ergodic::{multiwell_admissible, MultiwellSpec};
use hjselect::{Polynomial, Potential};

fn main() -> hjselect::Result<()> {
    // (t^2 - 1)^2: critical points -1, 0, 1 with depth 1
    let spec = MultiwellSpec::from_profile(&Polynomial::new(vec![1.0, 0.0, -2.0, 0.0, 1.0])?)?;
    println!("critical points {:?} depth {}", spec.critical_points, spec.depth);
    for peak in [0.25, 0.5, 0.99, 1.0, 1.5] {
        let (ok, m) = multiwell_admissible(&spec, &Potential::tent(0.25, peak)?);
        println!("osc(V) = {peak:<4} depth {m}: {}", if ok { "covered" } else { "not covered" });
    }
    Ok(())
}
