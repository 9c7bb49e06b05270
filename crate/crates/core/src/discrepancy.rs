//! Star, extremal and dyadic-restricted discrepancies of a finite point set.
//!
//! All intervals are left-closed and right-open. Closed forms work on the
//! sorted values; [`brute_force_discrepancy`] enumerates candidate interval
//! endpoints and serves as an independent oracle.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, LabError, Result};
use crate::seqgen::CertifiedPointList;

/// Size limit of the quadratic oracle.
pub const BRUTE_FORCE_LIMIT: usize = 4096;
/// Largest dyadic level accepted by the grid enumerations.
pub const MAX_DYADIC_LEVEL: u32 = 20;
/// Absolute slack added to every inequality check.
pub const CHECK_SLACK: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscrepancyReport {
    pub n_points: usize,
    pub d_star: f64,
    pub d_extremal: f64,
    pub certified_slack: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DyadicReport {
    pub r_level: u32,
    pub d_small: f64,
    pub d_large: f64,
    pub d_large_star: f64,
}

/// A count over `[a, b)` together with the range it could take when
/// uncertain points are moved within their radii.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MeasureCount {
    pub count: usize,
    pub min_count: usize,
    pub max_count: usize,
}

impl MeasureCount {
    pub fn is_ambiguous(&self) -> bool {
        self.min_count != self.max_count
    }
}

/// `#{n : a <= value_n < b}`.
pub fn empirical_measure(points: &CertifiedPointList, a: f64, b: f64) -> Result<MeasureCount> {
    if !(0.0 <= a && a < b && b <= 1.0) {
        return Err(invalid(format!("need 0 <= a < b <= 1, got [{a}, {b})")));
    }
    let mut count = 0;
    let mut min_count = 0;
    let mut max_count = 0;
    for p in &points.points {
        let (lo, hi) = (p.value - p.radius, p.value + p.radius);
        if a <= p.value && p.value < b {
            count += 1;
        }
        if a <= lo && hi < b {
            min_count += 1;
        }
        if hi >= a && lo < b {
            max_count += 1;
        }
    }
    Ok(MeasureCount { count, min_count, max_count })
}

/// Values sorted ascending; ties keep their original order.
fn sorted_values(points: &CertifiedPointList) -> Vec<f64> {
    let mut v = points.values();
    v.sort_by(|a, b| a.total_cmp(b));
    v
}

/// `(D+, D-)` of sorted values: `max(i/N - x_(i))` and `max(x_(i) - (i-1)/N)`.
pub(crate) fn one_sided(sorted: &[f64]) -> (f64, f64) {
    let n = sorted.len() as f64;
    let mut plus = 0.0f64;
    let mut minus = 0.0f64;
    for (i, &x) in sorted.iter().enumerate() {
        plus = plus.max((i + 1) as f64 / n - x);
        minus = minus.max(x - i as f64 / n);
    }
    (plus, minus)
}

pub(crate) fn star_sorted(sorted: &[f64]) -> f64 {
    let (p, m) = one_sided(sorted);
    p.max(m)
}

pub(crate) fn extremal_sorted(sorted: &[f64]) -> f64 {
    let (p, m) = one_sided(sorted);
    (p + m).min(1.0)
}

fn require_nonempty(points: &CertifiedPointList) -> Result<()> {
    if points.is_empty() {
        Err(invalid("at least one point is required"))
    } else {
        Ok(())
    }
}

pub fn star_discrepancy(points: &CertifiedPointList) -> Result<f64> {
    require_nonempty(points)?;
    Ok(star_sorted(&sorted_values(points)))
}

pub fn extremal_discrepancy(points: &CertifiedPointList) -> Result<f64> {
    require_nonempty(points)?;
    Ok(extremal_sorted(&sorted_values(points)))
}

/// Points whose certified interval overlaps a neighbour's.
fn ambiguous_points(points: &CertifiedPointList) -> usize {
    let mut iv: Vec<(f64, f64)> =
        points.points.iter().map(|p| (p.value - p.radius, p.value + p.radius)).collect();
    iv.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut flagged = vec![false; iv.len()];
    for i in 1..iv.len() {
        let (lo, hi) = (iv[i].0, iv[i - 1].1);
        let any_radius = iv[i].1 > iv[i].0 || iv[i - 1].1 > iv[i - 1].0;
        if any_radius && lo <= hi {
            flagged[i] = true;
            flagged[i - 1] = true;
        }
    }
    flagged.into_iter().filter(|&f| f).count()
}

/// Upper bound on how far the reported discrepancies can be from those of
/// the exact points: sorting is 1-Lipschitz in the sup norm, so `D*` moves
/// by at most the largest radius and `D` by twice that; order-ambiguous
/// points add `1/N` each.
pub fn certified_slack(points: &CertifiedPointList) -> f64 {
    if points.is_empty() {
        return 0.0;
    }
    2.0 * points.max_radius() + ambiguous_points(points) as f64 / points.n_points() as f64
}

pub fn discrepancy_report(points: &CertifiedPointList) -> Result<DiscrepancyReport> {
    require_nonempty(points)?;
    let sorted = sorted_values(points);
    Ok(DiscrepancyReport {
        n_points: sorted.len(),
        d_star: star_sorted(&sorted),
        d_extremal: extremal_sorted(&sorted),
        certified_slack: certified_slack(points),
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BruteForce {
    pub star: f64,
    pub extremal: f64,
}

/// Evaluates the defining suprema over every candidate endpoint: `0`, `1`,
/// each point value, and each point value approached from the right.
pub fn brute_force_discrepancy(points: &CertifiedPointList) -> Result<BruteForce> {
    require_nonempty(points)?;
    let n = points.n_points();
    if n > BRUTE_FORCE_LIMIT {
        return Err(LabError::SizeGuard { size: n, limit: BRUTE_FORCE_LIMIT });
    }
    let vals = sorted_values(points);
    let nf = n as f64;
    // Counting helpers: #{x < t} and #{x <= t}.
    let below = |t: f64| vals.partition_point(|&x| x < t);
    let at_most = |t: f64| vals.partition_point(|&x| x <= t);

    // An endpoint is a location plus whether it sits just right of it.
    let mut ends: Vec<(f64, bool)> = vec![(0.0, false), (1.0, false)];
    for &v in &vals {
        ends.push((v, false));
        ends.push((v, true));
    }
    // #{x < endpoint}
    let count_left_of = |(t, plus): (f64, bool)| if plus { at_most(t) } else { below(t) };

    let mut star = 0.0f64;
    for &e in &ends {
        if e.0 == 0.0 && !e.1 {
            continue;
        }
        star = star.max((count_left_of(e) as f64 / nf - e.0).abs());
    }

    let mut extremal = 0.0f64;
    for &a in &ends {
        let ca = count_left_of(a);
        for &b in &ends {
            let nonempty = a.0 < b.0 || (a.0 == b.0 && !a.1 && b.1);
            if !nonempty {
                continue;
            }
            let cb = count_left_of(b);
            extremal = extremal.max(((cb - ca) as f64 / nf - (b.0 - a.0)).abs());
        }
    }
    Ok(BruteForce { star, extremal })
}

fn check_level(r: u32) -> Result<()> {
    if !(1..=MAX_DYADIC_LEVEL).contains(&r) {
        return Err(invalid(format!("dyadic level R = {r} outside [1, {MAX_DYADIC_LEVEL}]")));
    }
    Ok(())
}

/// Sup over cells `[a 2^-R, (a+1) 2^-R)` and lengths `b <= 2^-R` of
/// `|#{z in [a 2^-R, a 2^-R + b)}/N - b|`.
pub fn dyadic_small_discrepancy(points: &CertifiedPointList, r: u32) -> Result<f64> {
    require_nonempty(points)?;
    check_level(r)?;
    let cells = 1usize << r;
    let width = 1.0 / cells as f64;
    let nf = points.n_points() as f64;
    let mut offsets: Vec<Vec<f64>> = vec![Vec::new(); cells];
    for v in sorted_values(points) {
        let cell = ((v * cells as f64) as usize).min(cells - 1);
        offsets[cell].push(v - cell as f64 * width);
    }
    let mut best = 0.0f64;
    for cell in &offsets {
        // Full cell, b = 2^-R.
        best = best.max((cell.len() as f64 / nf - width).abs());
        for &u in cell {
            let strictly_below = cell.partition_point(|&w| w < u);
            let up_to = cell.partition_point(|&w| w <= u);
            best = best.max((strictly_below as f64 / nf - u).abs());
            best = best.max((up_to as f64 / nf - u).abs());
        }
    }
    Ok(best)
}

/// `#{z < k 2^-R}` for `k = 0..=2^R`.
fn grid_counts(points: &CertifiedPointList, r: u32) -> Vec<usize> {
    let cells = 1usize << r;
    let mut hist = vec![0usize; cells];
    for p in &points.points {
        hist[((p.value * cells as f64) as usize).min(cells - 1)] += 1;
    }
    let mut cum = Vec::with_capacity(cells + 1);
    cum.push(0);
    let mut acc = 0;
    for h in hist {
        acc += h;
        cum.push(acc);
    }
    cum
}

/// `(D^(>=2^-R), D*^(>=2^-R))`: the maxima over grid intervals
/// `[a 2^-R, b 2^-R)` with `0 <= a < b <= 2^R`, and over `a = 0`.
pub fn dyadic_large_discrepancy(points: &CertifiedPointList, r: u32) -> Result<(f64, f64)> {
    require_nonempty(points)?;
    check_level(r)?;
    let cells = 1usize << r;
    let nf = points.n_points() as f64;
    let cum = grid_counts(points, r);
    // g(k) = #{z < k 2^-R}/N - k 2^-R; a pairwise max of |g(b) - g(a)| is max g - min g.
    let g: Vec<f64> = cum
        .iter()
        .enumerate()
        .map(|(k, &c)| c as f64 / nf - k as f64 / cells as f64)
        .collect();
    let hi = g.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lo = g.iter().cloned().fold(f64::INFINITY, f64::min);
    let star = g[1..].iter().map(|v| v.abs()).fold(0.0, f64::max);
    Ok((hi - lo, star))
}

pub fn dyadic_report(points: &CertifiedPointList, r: u32) -> Result<DyadicReport> {
    let d_small = dyadic_small_discrepancy(points, r)?;
    let (d_large, d_large_star) = dyadic_large_discrepancy(points, r)?;
    Ok(DyadicReport { r_level: r, d_small, d_large, d_large_star })
}

/// The five quantities of `D*^(>=) <= D* <= D <= D^(>=) + 3 D^(<=)` and the verdict.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SandwichWitness {
    pub r_level: u32,
    pub d_large_star: f64,
    pub d_star: f64,
    pub d_extremal: f64,
    pub d_large: f64,
    pub d_small: f64,
    pub slack: f64,
    pub holds: bool,
}

/// Evaluates the sandwich inequality; a violation beyond the certified
/// slack plus `1e-12` is an [`LabError::Invariant`] carrying the witness.
pub fn sandwich_check(points: &CertifiedPointList, r: u32) -> Result<SandwichWitness> {
    let w = sandwich_witness(points, r)?;
    if w.holds {
        Ok(w)
    } else {
        Err(LabError::Invariant(format!("sandwich inequality fails: {w:?}")))
    }
}

/// The five quantities and the verdict, without turning a violation into an error.
pub fn sandwich_witness(points: &CertifiedPointList, r: u32) -> Result<SandwichWitness> {
    let rep = discrepancy_report(points)?;
    let dy = dyadic_report(points, r)?;
    let slack = rep.certified_slack + CHECK_SLACK;
    let holds = dy.d_large_star <= rep.d_star + slack
        && rep.d_star <= rep.d_extremal + slack
        && rep.d_extremal <= dy.d_large + 3.0 * dy.d_small + slack;
    Ok(SandwichWitness {
        r_level: r,
        d_large_star: dy.d_large_star,
        d_star: rep.d_star,
        d_extremal: rep.d_extremal,
        d_large: dy.d_large,
        d_small: dy.d_small,
        slack,
        holds,
    })
}

/// The JSON report `{n, d_star, d_extremal, r, d_small, d_large, d_large_star, slack}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FullReport {
    pub n: usize,
    pub d_star: f64,
    pub d_extremal: f64,
    pub r: u32,
    pub d_small: f64,
    pub d_large: f64,
    pub d_large_star: f64,
    pub slack: f64,
}

pub fn full_report(points: &CertifiedPointList, r: u32) -> Result<FullReport> {
    let rep = discrepancy_report(points)?;
    let dy = dyadic_report(points, r)?;
    Ok(FullReport {
        n: rep.n_points,
        d_star: rep.d_star,
        d_extremal: rep.d_extremal,
        r,
        d_small: dy.d_small,
        d_large: dy.d_large,
        d_large_star: dy.d_large_star,
        slack: rep.certified_slack,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seqgen::{generate_iid, CertifiedPoint};

    fn pts(v: &[f64]) -> CertifiedPointList {
        CertifiedPointList::from_values(v).unwrap()
    }

    #[test]
    fn measure_counts() {
        let p = pts(&[0.1, 0.5, 0.9]);
        assert_eq!(empirical_measure(&p, 0.0, 0.5).unwrap().count, 1);
        assert_eq!(empirical_measure(&p, 0.0, 1.0).unwrap().count, 3);
        assert_eq!(empirical_measure(&pts(&[0.5]), 0.5, 0.6).unwrap().count, 1);
        assert!(empirical_measure(&p, 0.5, 0.5).is_err());
    }

    #[test]
    fn ambiguous_measure_is_flagged() {
        let p = CertifiedPointList {
            points: vec![CertifiedPoint { value: 0.5, radius: 1e-3 }],
            exponents: vec![1],
            precision_bits: 0,
        };
        let m = empirical_measure(&p, 0.0, 0.5005).unwrap();
        assert_eq!((m.count, m.min_count, m.max_count), (1, 0, 1));
        assert!(m.is_ambiguous());
    }

    #[test]
    fn closed_forms_on_small_sets() {
        assert_eq!(star_discrepancy(&pts(&[0.5])).unwrap(), 0.5);
        assert_eq!(star_discrepancy(&pts(&[0.0, 0.25, 0.5, 0.75])).unwrap(), 0.25);
        assert_eq!(extremal_discrepancy(&pts(&[0.125, 0.375, 0.625, 0.875])).unwrap(), 0.25);
        assert_eq!(extremal_discrepancy(&pts(&[0.5])).unwrap(), 1.0);
        for p in [0.0, 0.3, 0.999] {
            assert!((extremal_discrepancy(&pts(&[p])).unwrap() - 1.0).abs() < 1e-15);
        }
        assert!(star_discrepancy(&pts(&[])).is_err());
    }

    #[test]
    fn oracle_on_small_sets() {
        let bf = brute_force_discrepancy(&pts(&[0.5])).unwrap();
        assert_eq!((bf.star, bf.extremal), (0.5, 1.0));
        assert_eq!(brute_force_discrepancy(&pts(&[0.0, 0.25, 0.5, 0.75])).unwrap().star, 0.25);
        assert_eq!(brute_force_discrepancy(&pts(&[0.125, 0.375, 0.625, 0.875])).unwrap().extremal, 0.25);
        let big = generate_iid(1, BRUTE_FORCE_LIMIT + 1);
        assert!(matches!(brute_force_discrepancy(&big), Err(LabError::SizeGuard { .. })));
    }

    #[test]
    fn oracle_agrees_on_random_sets() {
        let p = generate_iid(3, 100);
        let bf = brute_force_discrepancy(&p).unwrap();
        assert!((bf.star - star_discrepancy(&p).unwrap()).abs() < 1e-12);
        assert!((bf.extremal - extremal_discrepancy(&p).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn small_dyadic() {
        assert!((dyadic_small_discrepancy(&pts(&[0.3]), 1).unwrap() - 0.7).abs() < 1e-15);
        // Equidistant points k/2^R: one point at offset 0 in every cell.
        for r in 1..6 {
            let n = 1usize << r;
            let v: Vec<f64> = (0..n).map(|k| k as f64 / n as f64).collect();
            assert_eq!(dyadic_small_discrepancy(&pts(&v), r).unwrap(), 1.0 / n as f64);
        }
    }

    #[test]
    fn empty_cell_contributes_half_width() {
        // Cell [0.5, 1) holds no point: |0 - b| peaks at b = 1/2.
        let p = pts(&[0.3, 0.3, 0.3, 0.3]);
        assert!((dyadic_small_discrepancy(&p, 1).unwrap() - 0.7).abs() < 1e-15);
        // R = 2: cell [0.75, 1) is empty and gives 1/4; the others give less.
        let p = pts(&[0.0, 0.25, 0.5]);
        assert_eq!(dyadic_small_discrepancy(&p, 2).unwrap(), 1.0 / 3.0);
        let p = pts(&[0.0, 0.0, 0.25, 0.25, 0.5, 0.5, 0.75]);
        assert!(dyadic_small_discrepancy(&p, 2).unwrap() >= 0.25 - 1.0 / 7.0);
    }

    #[test]
    fn large_dyadic() {
        let (dl, dls) = dyadic_large_discrepancy(&pts(&[0.5]), 1).unwrap();
        assert_eq!(dls, 0.5);
        assert_eq!(dl, 0.5);
        for r in 1..6 {
            let n = 1usize << r;
            let v: Vec<f64> = (0..n).map(|k| k as f64 / n as f64).collect();
            assert_eq!(dyadic_large_discrepancy(&pts(&v), r).unwrap(), (0.0, 0.0));
        }
        assert!(dyadic_large_discrepancy(&pts(&[0.5]), 21).is_err());
        assert!(dyadic_large_discrepancy(&pts(&[0.5]), 0).is_err());
    }

    #[test]
    fn large_dyadic_matches_pair_enumeration() {
        let p = generate_iid(11, 37);
        for r in 1..=6 {
            let cells = 1usize << r;
            let v = p.values();
            let mut best = 0.0f64;
            let mut best_star = 0.0f64;
            for a in 0..cells {
                for b in a + 1..=cells {
                    let (lo, hi) = (a as f64 / cells as f64, b as f64 / cells as f64);
                    let c = v.iter().filter(|&&z| lo <= z && z < hi).count() as f64;
                    let d = (c / v.len() as f64 - (hi - lo)).abs();
                    best = best.max(d);
                    if a == 0 {
                        best_star = best_star.max(d);
                    }
                }
            }
            let (dl, dls) = dyadic_large_discrepancy(&p, r).unwrap();
            assert!((dl - best).abs() < 1e-12 && (dls - best_star).abs() < 1e-12);
        }
    }

    #[test]
    fn sandwich_single_point_and_equidistant() {
        let w = sandwich_check(&pts(&[0.5]), 1).unwrap();
        assert!(w.holds);
        assert_eq!((w.d_large_star, w.d_star, w.d_extremal), (0.5, 0.5, 1.0));
        assert!(w.d_large + 3.0 * w.d_small >= 1.0);
        let v: Vec<f64> = (0..16).map(|k| k as f64 / 16.0).collect();
        let w = sandwich_check(&pts(&v), 4).unwrap();
        assert_eq!(w.d_large_star, 0.0);
        assert_eq!(w.d_star, 1.0 / 16.0);
    }

    #[test]
    fn report_json_shape() {
        let r = full_report(&pts(&[0.0, 0.25, 0.5, 0.75]), 2).unwrap();
        let json = serde_json::to_value(r).unwrap();
        for key in ["n", "d_star", "d_extremal", "r", "d_small", "d_large", "d_large_star", "slack"] {
            assert!(json.get(key).is_some(), "missing {key}");
        }
    }
}
