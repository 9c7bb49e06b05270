//! Dyadic-restricted discrepancies at each level R and the inequality
//! D*>= <= D* <= D <= D>= + 3 D<=.
//!
//!     cargo run --example dyadic_sandwich

use koksma_lab::discrepancy::sandwich_check;
use koksma_lab::seqgen::{generate_power_orbit, ExponentRule, Interval, OrbitSpec, DEFAULT_EPS};

fn main() -> koksma_lab::Result<()> {
    let spec = OrbitSpec::from_f64(1.0, 1.3, ExponentRule::Identity, Interval::new(1.1, 2.1)?)?;
    let orbit = generate_power_orbit(&spec, 2000, DEFAULT_EPS)?;
    println!(" R   D*>=      D*        D         D>=       D<=");
    for r in 1..=12 {
        let w = sandwich_check(&orbit, r)?;
        println!(
            "{r:2}  {:.6}  {:.6}  {:.6}  {:.6}  {:.6}",
            w.d_large_star, w.d_star, w.d_extremal, w.d_large, w.d_small
        );
    }
    Ok(())
}
