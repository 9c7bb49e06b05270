//! Oscillatory integrals of cos(2 pi xi (j x^n +- k x^m)) against their
//! closed-form bounds.
//!
//!     cargo run --example oscillatory_bounds

use koksma_lab::oscillatory::{
    lemma3_check, lemma4_check, osc_integral, vdc_check, PhaseSpec, Sign,
};

fn main() -> koksma_lab::Result<()> {
    let p = PhaseSpec::single(1, 2, 1.0, 1.1, 2.1)?;
    let i = osc_integral(&p, 1e-12)?;
    println!("int e(x^2) on [1.1, 2.1] = {:.12} + {:.12} i  (+- {:.1e}, {} evaluations)", i.re, i.im, i.error_bound, i.evaluations);

    let v = lemma3_check(&PhaseSpec::single(3, 5, 2.0, 1.5, 2.0)?, 1e-6)?;
    println!("single term: |int| = {:.3e} <= {:.3e}: {}", v.integral_abs, v.bound, v.pass);

    let v = lemma4_check(&PhaseSpec::pair(2, 3, 4, 2, Sign::Plus, 1.0, 1.2, 1.9)?, 1e-6)?;
    println!("two terms:   |int| = {:.3e} <= {:.3e}: {}", v.integral_abs, v.bound, v.pass);

    println!("minus sign, split where psi' or psi'' vanish:");
    for v in vdc_check(&PhaseSpec::pair(1, 4, 3, 2, Sign::Minus, 1.0, 1.1, 2.1)?, 1e-6)? {
        println!("  {}", v.csv_row());
    }
    Ok(())
}
