//! Certified points of frac(x^n) for x = 3/2, and of a sampled x.
//!
//!     cargo run --example certified_orbit

use koksma_lab::lilclt::draw_x;
use koksma_lab::seqgen::{generate_power_orbit, required_precision, ExponentRule, Interval, OrbitSpec, DEFAULT_EPS};

fn main() -> koksma_lab::Result<()> {
    let interval = Interval::new(1.1, 2.1)?;
    let spec = OrbitSpec::from_f64(1.0, 1.5, ExponentRule::Identity, interval)?;
    let orbit = generate_power_orbit(&spec, 1000, DEFAULT_EPS)?;
    println!("x = 1.5, N = 1000, working precision {} bits", orbit.precision_bits);
    for p in orbit.points.iter().take(8) {
        println!("  {:.16} +- {:.1e}", p.value, p.radius);
    }

    let x = draw_x(interval, 7, 0, 53)?;
    let spec = OrbitSpec::new(koksma_lab::dyadic::Dyadic::from_u64(1), x.clone(), ExponentRule::affine(1, 2)?, interval)?;
    println!("x = {x} (seed 7), odd exponents");
    println!("  needs {} bits for N = 5000", required_precision(&spec, 5000, DEFAULT_EPS)?);
    let orbit = generate_power_orbit(&spec, 5000, DEFAULT_EPS)?;
    println!("  last point {:.16}, max radius {:.1e}", orbit.points[4999].value, orbit.max_radius());
    Ok(())
}
