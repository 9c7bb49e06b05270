//! Fourier coefficients, partial sums and variation of test functions.
//!
//!     cargo run --example fourier

use koksma_lab::periodic::PeriodicFunction;

fn main() -> koksma_lab::Result<()> {
    let f = PeriodicFunction::indicator(0.0, 0.5)?;
    let fe = f.fourier_coefficients(5)?;
    println!("I[0,1/2) centered, ||f|| = {}", f.l2_norm());
    for j in 1..=5 {
        println!("  j = {j}: a = {:+.12}  b = {:+.12}", fe.cos[j - 1], fe.sin[j - 1]);
    }
    for d in [1, 4, 16, 64, 256] {
        println!("  ||p_{d}|| = {:.6}", f.partial_sum(d)?.l2_norm());
    }

    let g = PeriodicFunction::trig(vec![0.15, 0.0, 0.05], vec![0.0, 0.1])?;
    println!("trig polynomial: variation {:.6}, admissible {}", g.variation(), g.is_admissible());
    Ok(())
}
