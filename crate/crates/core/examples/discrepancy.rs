//! Star and extremal discrepancy of a power orbit, checked against the
//! quadratic oracle, next to an i.i.d. sample of the same size.
//!
//!     cargo run --example discrepancy

use koksma_lab::discrepancy::{brute_force_discrepancy, discrepancy_report};
use koksma_lab::seqgen::{generate_iid, generate_power_orbit, ExponentRule, Interval, OrbitSpec, DEFAULT_EPS};

fn main() -> koksma_lab::Result<()> {
    let spec = OrbitSpec::from_f64(1.0, 1.75, ExponentRule::Identity, Interval::new(1.1, 2.1)?)?;
    for n in [16, 256, 4096] {
        let orbit = generate_power_orbit(&spec, n, DEFAULT_EPS)?;
        let r = discrepancy_report(&orbit)?;
        let bf = brute_force_discrepancy(&orbit)?;
        let iid = discrepancy_report(&generate_iid(3, n))?;
        println!(
            "N = {n:5}  D* = {:.6} (oracle {:.6})  D = {:.6}  slack {:.1e}  iid D* = {:.6}",
            r.d_star, bf.star, r.d_extremal, r.certified_slack, iid.d_star
        );
    }
    Ok(())
}
