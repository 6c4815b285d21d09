//! Direct solve of a periodic tridiagonal system and its transpose.
use hjselect::cyclic::PeriodicTridiagonal;

fn main() -> hjselect::Result<()> {
    let n = 8;
    let op = PeriodicTridiagonal::new(vec![-1.0; n], vec![2.5; n], vec![-1.0; n])?;
    let rhs: Vec<f64> = (0..n).map(|i| i as f64).collect();
    let x = op.solve(&rhs)?;
    let back = op.matvec(&x);
    let err = back.iter().zip(&rhs).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    println!("solution {x:.4?}");
    println!("residual {err:.1e}; M-matrix signs {}", op.has_m_matrix_signs());
    let y = op.transpose().solve(&[1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0])?;
    println!("transpose solve with a unit source stays nonnegative: {}", y.iter().all(|&v| v >= 0.0));
    Ok(())
}
