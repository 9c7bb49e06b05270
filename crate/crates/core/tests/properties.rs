//! Property tests against independent oracles.

use num_bigint::BigUint;
use proptest::prelude::*;

use koksma_lab::discrepancy::{
    brute_force_discrepancy, discrepancy_report, dyadic_report, sandwich_check,
};
use koksma_lab::lilclt::{ks_distance, normal_cdf};
use koksma_lab::oscillatory::{lemma5_partition, osc_integral, PhaseSpec};
use koksma_lab::periodic::PeriodicFunction;
use koksma_lab::seqgen::{
    generate_linear_orbit, generate_power_orbit, CertifiedPointList, ExponentRule, Interval, OrbitSpec,
};
use koksma_lab::dyadic::Dyadic;

fn unit_points() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0f64..1.0, 1..200)
}

fn pts(v: &[f64]) -> CertifiedPointList {
    CertifiedPointList::from_values(v).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn closed_forms_match_oracle(v in unit_points()) {
        let r = discrepancy_report(&pts(&v)).unwrap();
        let bf = brute_force_discrepancy(&pts(&v)).unwrap();
        prop_assert!((r.d_star - bf.star).abs() <= 1e-12);
        prop_assert!((r.d_extremal - bf.extremal).abs() <= 1e-12);
        prop_assert!(0.0 <= r.d_star && r.d_star <= r.d_extremal);
        prop_assert!(r.d_extremal <= (2.0 * r.d_star).min(1.0) + 1e-12);
        prop_assert!(r.d_star >= 0.5 / v.len() as f64 - 1e-12);
    }

    #[test]
    fn permutation_and_duplication_invariance(v in unit_points(), k in 1usize..4, rot in 0usize..200) {
        let base = discrepancy_report(&pts(&v)).unwrap();
        let mut p = v.clone();
        p.rotate_left(rot % v.len());
        p.reverse();
        let perm = discrepancy_report(&pts(&p)).unwrap();
        prop_assert_eq!(base.d_star, perm.d_star);
        prop_assert_eq!(base.d_extremal, perm.d_extremal);
        let dup: Vec<f64> = v.iter().flat_map(|&x| std::iter::repeat_n(x, k)).collect();
        let d = discrepancy_report(&pts(&dup)).unwrap();
        prop_assert!((base.d_star - d.d_star).abs() <= 1e-12);
        prop_assert!((base.d_extremal - d.d_extremal).abs() <= 1e-12);
    }

    #[test]
    fn sandwich_holds_at_every_level(v in unit_points(), r in 1u32..=10) {
        prop_assert!(sandwich_check(&pts(&v), r).is_ok());
    }

    #[test]
    fn dyadic_large_matches_interval_enumeration(v in unit_points(), r in 1u32..=6) {
        let rep = dyadic_report(&pts(&v), r).unwrap();
        let cells = 1u64 << r;
        let n = v.len() as f64;
        let mut best = 0.0f64;
        for a in 0..cells {
            for b in a + 1..=cells {
                let (lo, hi) = (a as f64 / cells as f64, b as f64 / cells as f64);
                let c = v.iter().filter(|&&x| lo <= x && x < hi).count() as f64;
                best = best.max((c / n - (hi - lo)).abs());
            }
        }
        prop_assert!((rep.d_large - best).abs() <= 1e-12);
    }

    #[test]
    fn affine_rules_increase(start in 1u64..1000, step in 1u64..1000, n in 1usize..500) {
        let e = ExponentRule::affine(start, step).unwrap().exponents(n).unwrap();
        prop_assert_eq!(e.len(), n);
        prop_assert!(e.windows(2).all(|w| w[0] < w[1]));
        prop_assert_eq!(e[0], start);
    }

    #[test]
    fn linear_orbit_is_exact(num in 1u64..1 << 20, n in 1usize..300) {
        let x = num as f64 / (1u64 << 20) as f64;
        let orbit = generate_linear_orbit(&Dyadic::from_f64(x).unwrap(), &ExponentRule::Identity, n).unwrap();
        for (i, p) in orbit.points.iter().enumerate() {
            let exact = (((i as u64 + 1) * num) % (1 << 20)) as f64 / (1u64 << 20) as f64;
            prop_assert_eq!(p.value, exact);
        }
    }

    #[test]
    fn indicator_coefficients_match_midpoint_rule(a in 0.0f64..0.9, len in 0.05f64..0.5, j in 1usize..8) {
        let b = (a + len).min(0.999);
        let f = PeriodicFunction::indicator(a, b).unwrap();
        let fe = f.fourier_coefficients(j).unwrap();
        let m = 200_000;
        let (mut c, mut s) = (0.0, 0.0);
        for i in 0..m {
            let t = (i as f64 + 0.5) / m as f64;
            let w = 2.0 * std::f64::consts::PI * j as f64 * t;
            c += f.eval(t) * w.cos();
            s += f.eval(t) * w.sin();
        }
        let (c, s) = (2.0 * c / m as f64, 2.0 * s / m as f64);
        prop_assert!((fe.cos[j - 1] - c).abs() < 1e-4, "cos {} vs {}", fe.cos[j - 1], c);
        prop_assert!((fe.sin[j - 1] - s).abs() < 1e-4, "sin {} vs {}", fe.sin[j - 1], s);
    }

    #[test]
    fn quadrature_matches_simpson(j in 1u32..3, n in 1u32..4, xi in 0.5f64..1.5, lo in 1.1f64..1.6, w in 0.1f64..0.5) {
        let phase = PhaseSpec::single(j, n, xi, lo, lo + w).unwrap();
        let q = osc_integral(&phase, 1e-10).unwrap();
        let m = 20_000;
        let h = w / m as f64;
        let (mut re, mut im) = (0.0, 0.0);
        for i in 0..=m {
            let x = lo + i as f64 * h;
            let wt = if i == 0 || i == m { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
            let p = 2.0 * std::f64::consts::PI * phase.psi(x);
            re += wt * p.cos();
            im += wt * p.sin();
        }
        prop_assert!((q.re - re * h / 3.0).abs() < 1e-8);
        prop_assert!((q.im - im * h / 3.0).abs() < 1e-8);
    }

    #[test]
    fn stationary_point_is_a_root(j in 1u32..5, k in 1u32..8, m in 1u32..4, dn in 1u32..3, eta in 0.01f64..0.2) {
        let n = m + dn;
        let p = lemma5_partition(j, k, m, n, 1.0, eta, 1.1, 2.1).unwrap();
        // bisection on j n x^(n-1) - k m x^(m-1)
        let g = |x: f64| j as f64 * n as f64 * x.powi(n as i32 - 1) - k as f64 * m as f64 * x.powi(m as i32 - 1);
        let (mut lo, mut hi) = (1e-9, 1e3);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if g(mid) < 0.0 { lo = mid } else { hi = mid }
        }
        prop_assert!((p.x1 - lo).abs() <= 1e-12 * lo.max(1.0));
        prop_assert!(p.is_disjoint());
        prop_assert!(p.excluded_measure <= p.measure_limit() + 1e-15);
    }

    #[test]
    fn ks_matches_grid_search(v in prop::collection::vec(-3.0f64..3.0, 5..50)) {
        let ks = ks_distance(&v).unwrap();
        let mut s = v.clone();
        s.sort_by(f64::total_cmp);
        let n = s.len() as f64;
        let mut best = 0.0f64;
        for i in 0..=120_000 {
            let t = -6.0 + 12.0 * i as f64 / 120_000.0;
            let f = s.iter().filter(|&&x| x <= t).count() as f64 / n;
            best = best.max((f - normal_cdf(t)).abs());
        }
        prop_assert!(best <= ks + 1e-12);
        prop_assert!(ks - best < 1e-3);
    }
}

/// `frac(3^n / 2^n) = (3^n mod 2^n) / 2^n`, exactly.
#[test]
fn power_orbit_matches_exact_rationals() {
    let spec = OrbitSpec::from_f64(1.0, 1.5, ExponentRule::Identity, Interval::new(1.1, 2.1).unwrap()).unwrap();
    let orbit = generate_power_orbit(&spec, 200, 2f64.powi(-40)).unwrap();
    for (i, p) in orbit.points.iter().enumerate() {
        let n = i as u32 + 1;
        let den = BigUint::from(1u8) << n;
        let rem = BigUint::from(3u8).pow(n) % &den;
        // top 60 bits of the remainder give the value to far better than 2^-53
        let shift = n.saturating_sub(60);
        let exact = (&rem >> shift).to_string().parse::<f64>().unwrap() / 2f64.powi((n - shift) as i32);
        assert!((p.value - exact).abs() <= p.radius + 2f64.powi(-52), "n = {n}: {} vs {exact}", p.value);
    }
}
