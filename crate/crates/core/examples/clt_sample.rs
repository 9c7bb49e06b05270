//! Normalized sums of I[0,1/2)(x^n) over random x, compared with the
//! standard normal.
//!
//!     cargo run --release --example clt_sample

use koksma_lab::lilclt::{clt_sample, CltParams};
use koksma_lab::periodic::PeriodicFunction;
use koksma_lab::seqgen::{ExponentRule, Interval};

fn main() -> koksma_lab::Result<()> {
    for n_terms in [64, 256, 1024] {
        let p = CltParams {
            f: PeriodicFunction::indicator(0.0, 0.5)?,
            rule: ExponentRule::Identity,
            xi: 1.0,
            interval: Interval::new(1.1, 2.1)?,
            n_terms,
            n_draws: 500,
            seed: 2,
        };
        let s = clt_sample(&p, None)?;
        println!("N = {n_terms:5}  KS = {:.4}  mean T = {:+.4}", s.ks_distance, s.mean());
    }
    Ok(())
}
