//! The normalized star discrepancy sqrt(N) D*_N / sqrt(log log N) along a
//! power orbit and along an i.i.d. baseline.
//!
//!     cargo run --release --example lil_trajectory

use koksma_lab::lilclt::{lil_scan, lil_scan_source, Grid, PointSource, ReferenceConstants, Variant};
use koksma_lab::seqgen::{generate_iid, ExponentRule, Interval};

fn main() -> koksma_lab::Result<()> {
    let n_max = 50_000;
    let interval = Interval::new(1.1, 2.1)?;
    let source = PointSource::SampledPower { xi: 1.0, rule: ExponentRule::Identity, seed: 5, draw: 0 };
    let power = lil_scan_source(&source, interval, n_max, &Grid::Dyadic, Variant::Star)?;
    let iid = lil_scan(&generate_iid(5, n_max), &Grid::Dyadic, Variant::Star)?;
    println!("reference limsup {:.6}", ReferenceConstants::new().lil_power_orbit);
    println!("      N   power    iid");
    for (i, n) in power.n_grid.iter().enumerate() {
        println!("{n:7}  {:.4}  {:.4}", power.l_star[i], iid.l_star[i]);
    }
    Ok(())
}
