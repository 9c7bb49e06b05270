//! The three-interval partition around the stationary point of
//! xi (j x^n - k x^m), and the bound on random pieces.
//!
//!     cargo run --example partition

use koksma_lab::oscillatory::{lemma5_check, lemma5_partition, random_admissible_subintervals};

fn main() -> koksma_lab::Result<()> {
    let p = lemma5_partition(1, 6, 2, 3, 1.0, 0.05, 1.1, 4.0)?;
    println!("x1 = {:.12} (residual {:.1e}), x2 = {:.12}", p.x1, p.stationary_residual(), p.x2);
    println!("excluded band [{:.6}, {:.6}], measure {:.4} <= {:.4}", p.band.lo, p.band.hi, p.excluded_measure, p.measure_limit());
    for (i, s) in p.intervals.iter().enumerate() {
        match s {
            Some(s) => println!("  I{} = [{:.6}, {:.6}]", i + 1, s.lo, s.hi),
            None => println!("  I{} empty", i + 1),
        }
    }
    for (lo, hi) in random_admissible_subintervals(&p, 11, 0, 5) {
        let v = lemma5_check(&p, lo, hi, 1e-6)?;
        println!("  [{lo:.4}, {hi:.4}]  |int| = {:.3e} <= {:.3e}", v.integral_abs, v.bound);
    }
    Ok(())
}
