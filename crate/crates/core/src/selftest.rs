//! The acceptance criteria as runnable checks. Each criterion returns a
//! pass/fail line plus the data it was decided on; [`run_selftest`] writes
//! that data as artifacts so two runs can be compared byte for byte.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::time::Instant;

use rand::Rng;
use serde::Serialize;

use crate::discrepancy::{brute_force_discrepancy, discrepancy_report, sandwich_check, CHECK_SLACK};
use crate::error::Result;
use crate::lilclt::{
    clt_sample, lil_power_ensemble, lil_scan, median, CltParams, Grid, LilTrajectory, ReferenceConstants, Variant,
};
use crate::oscillatory::{
    lemma3_check, lemma4_check, lemma5_check, lemma5_partition, random_admissible_subintervals,
    random_lemma3_cases, random_lemma4_cases, random_lemma5_params, CaseVerdict, VERDICT_CSV_HEADER,
};
use crate::periodic::PeriodicFunction;
use crate::seqgen::{
    generate_iid, generate_power_orbit, generate_power_orbit_at, required_precision, sig17, stream_rng,
    ExponentRule, Interval, OrbitSpec,
};
use crate::lilclt::draw_x;

/// Tolerances and sizes, fixed before any run.
pub mod thresholds {
    pub const ORACLE_TOL: f64 = 1e-12;
    pub const ORACLE_INSTANCES: usize = 50;
    pub const ORACLE_MAX_N: usize = 256;
    pub const SANDWICH_INSTANCES: usize = 50;
    pub const SANDWICH_MAX_R: u32 = 8;
    pub const LEMMA_CASES: usize = 40;
    pub const LEMMA_TOL: f64 = 1e-6;
    pub const LEMMA5_SUBINTERVALS: usize = 10;
    pub const STATIONARY_TOL: f64 = 1e-10;
    pub const MONOTONE_SAMPLES: usize = 1000;
    pub const FOURIER_FUNCTIONS: usize = 100;
    pub const FOURIER_MAX_J: usize = 1000;
    pub const FOURIER_TOL: f64 = 1e-12;
    pub const PARSEVAL_DEGREE: usize = 64;
    pub const PARSEVAL_FRACTION: f64 = 0.99;
    pub const CLT_DRAWS: usize = 2000;
    pub const CLT_N_LARGE: usize = 1 << 12;
    pub const CLT_N_SMALL: usize = 1 << 8;
    pub const CLT_KS_MAX: f64 = 0.10;
    pub const CLT_TREND_SLACK: f64 = 0.02;
    pub const LIL_X_DRAWS: usize = 16;
    pub const LIL_N: usize = 100_000;
    pub const LIL_BAND: (f64, f64) = (0.45, 1.05);
    pub const LIL_LAST_DECADE_GROWTH: f64 = 0.25;
    pub const CERT_N: usize = 10_000;
    pub const CERT_X_DRAWS: usize = 4;
    pub const CERT_EPS: f64 = 9.094947017729282e-13; // 2^-40
    pub const INTERVAL: (f64, f64) = (1.1, 2.1);
}

use thresholds::*;

/// Stream offset keeping selftest draws apart from per-`x` Monte Carlo streams.
const STREAM_BASE: u64 = 1 << 40;

#[derive(Clone, Debug, Serialize)]
pub struct CriterionResult {
    pub id: u32,
    pub name: String,
    pub pass: bool,
    pub detail: String,
    /// Wall-clock seconds; never written to artifacts.
    #[serde(skip)]
    pub elapsed_s: f64,
    #[serde(skip)]
    pub limit_s: f64,
}

impl CriterionResult {
    pub fn line(&self) -> String {
        format!(
            "[{}] criterion {}: {} ({}; {:.2}s of {:.0}s)",
            if self.pass { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.detail,
            self.elapsed_s,
            self.limit_s
        )
    }
}

/// Files produced by a run, keyed by file name.
pub type Artifacts = BTreeMap<String, String>;

fn interval() -> Interval {
    Interval::new(INTERVAL.0, INTERVAL.1).expect("constant interval is valid")
}

fn timed<T>(f: impl FnOnce() -> Result<T>) -> Result<(T, f64)> {
    let start = Instant::now();
    let v = f()?;
    Ok((v, start.elapsed().as_secs_f64()))
}

fn finish(id: u32, name: &str, ok: bool, detail: String, elapsed: f64, limit: f64) -> CriterionResult {
    CriterionResult {
        id,
        name: name.to_string(),
        pass: ok && elapsed <= limit,
        detail,
        elapsed_s: elapsed,
        limit_s: limit,
    }
}

/// Criterion 1: closed forms equal the quadratic oracle.
pub fn oracle_equivalence(seed: u64, art: &mut Artifacts) -> Result<CriterionResult> {
    let ((ok, worst, csv), t) = timed(|| {
        let mut rng = stream_rng(seed, STREAM_BASE + 101);
        let mut worst = 0.0f64;
        let mut ok = true;
        let mut csv = String::from("instance,n,d_star,d_extremal,oracle_star,oracle_extremal\n");
        for i in 0..ORACLE_INSTANCES {
            let n = match i {
                0 => 1,
                1 => ORACLE_MAX_N,
                _ => rng.gen_range(1..=ORACLE_MAX_N),
            };
            let pts = generate_iid(rng.gen(), n);
            let rep = discrepancy_report(&pts)?;
            let bf = brute_force_discrepancy(&pts)?;
            let dev = (rep.d_star - bf.star).abs().max((rep.d_extremal - bf.extremal).abs());
            worst = worst.max(dev);
            ok &= dev <= ORACLE_TOL;
            ok &= 0.0 <= rep.d_star && rep.d_star <= rep.d_extremal && rep.d_extremal <= (2.0 * rep.d_star).min(1.0) + ORACLE_TOL;
            let _ = writeln!(
                csv,
                "{i},{n},{},{},{},{}",
                sig17(rep.d_star),
                sig17(rep.d_extremal),
                sig17(bf.star),
                sig17(bf.extremal)
            );
        }
        Ok((ok, worst, csv))
    })?;
    art.insert("c1_oracle.csv".into(), csv);
    Ok(finish(1, "discrepancy oracle equivalence", ok, format!("max deviation {worst:.3e} <= {ORACLE_TOL:e}"), t, 10.0))
}

/// Criterion 2: the sandwich inequality on random instances for every level.
pub fn sandwich(seed: u64, art: &mut Artifacts) -> Result<CriterionResult> {
    let ((violations, csv), t) = timed(|| {
        let mut rng = stream_rng(seed, STREAM_BASE + 102);
        let mut violations = 0usize;
        let mut csv = String::from("instance,r,d_large_star,d_star,d_extremal,d_large,d_small,holds\n");
        for i in 0..SANDWICH_INSTANCES {
            let n = rng.gen_range(1..=2048);
            let pts = generate_iid(rng.gen(), n);
            for r in 1..=SANDWICH_MAX_R {
                let (holds, w) = match sandwich_check(&pts, r) {
                    Ok(w) => (true, format!("{},{},{},{},{}", sig17(w.d_large_star), sig17(w.d_star), sig17(w.d_extremal), sig17(w.d_large), sig17(w.d_small))),
                    Err(e) => (false, format!("{e}")),
                };
                if !holds {
                    violations += 1;
                }
                let _ = writeln!(csv, "{i},{r},{w},{holds}");
            }
        }
        Ok((violations, csv))
    })?;
    art.insert("c2_sandwich.csv".into(), csv);
    Ok(finish(
        2,
        "sandwich inequality",
        violations == 0,
        format!("{violations} violations over {SANDWICH_INSTANCES} instances x R=1..{SANDWICH_MAX_R}, slack {CHECK_SLACK:e}"),
        t,
        30.0,
    ))
}

fn verdict_csv(rows: &[CaseVerdict]) -> String {
    let mut csv = format!("{VERDICT_CSV_HEADER}\n");
    for r in rows {
        let _ = writeln!(csv, "{}", r.csv_row());
    }
    csv
}

/// Randomized single-term and plus-sign two-term bound checks.
pub fn lemma34_rows(seed: u64, count: usize, tol: f64) -> Result<Vec<CaseVerdict>> {
    let (a, b) = INTERVAL;
    let mut rows = Vec::new();
    for (i, p) in random_lemma3_cases(seed, count, a, b).iter().enumerate() {
        rows.push(CaseVerdict { case_id: i, ..lemma3_check(p, tol)? });
    }
    for (i, p) in random_lemma4_cases(seed, count, a, b).iter().enumerate() {
        rows.push(CaseVerdict { case_id: count + i, ..lemma4_check(p, tol)? });
    }
    Ok(rows)
}

/// Criterion 3.
pub fn lemma34_bounds(seed: u64, art: &mut Artifacts) -> Result<CriterionResult> {
    let (rows, t) = timed(|| lemma34_rows(seed, LEMMA_CASES, LEMMA_TOL))?;
    let failed = rows.iter().filter(|r| !r.pass).count();
    let tightest = rows.iter().map(|r| r.integral_abs / r.bound).fold(0.0, f64::max);
    art.insert("c3_vdc.csv".into(), verdict_csv(&rows));
    Ok(finish(
        3,
        "single and two-term oscillatory bounds",
        failed == 0 && rows.len() == 2 * LEMMA_CASES,
        format!("{failed} of {} cases fail; largest |integral|/bound {tightest:.3}", rows.len()),
        t,
        60.0,
    ))
}

#[derive(Clone, Debug, Serialize)]
pub struct PartitionSummary {
    pub case_id: usize,
    pub j: u32,
    pub k: u32,
    pub m: u32,
    pub n: u32,
    pub xi: f64,
    pub eta: f64,
    pub x1: f64,
    pub x2: f64,
    pub excluded_measure: f64,
    pub measure_limit: f64,
    pub disjoint: bool,
    pub stationary_residual: Option<f64>,
    pub monotone: bool,
}

/// Partition construction plus subinterval checks for random parameters.
pub fn lemma5_rows(seed: u64, count: usize, subintervals: usize, tol: f64) -> Result<(Vec<PartitionSummary>, Vec<CaseVerdict>)> {
    let (a, b) = INTERVAL;
    let mut parts = Vec::new();
    let mut rows = Vec::new();
    for (i, &(j, k, m, n, xi, eta)) in random_lemma5_params(seed, count).iter().enumerate() {
        let p = lemma5_partition(j, k, m, n, xi, eta, a, b)?;
        let inside = a <= p.x1 && p.x1 <= b;
        parts.push(PartitionSummary {
            case_id: i,
            j,
            k,
            m,
            n,
            xi,
            eta,
            x1: p.x1,
            x2: p.x2,
            excluded_measure: p.excluded_measure,
            measure_limit: p.measure_limit(),
            disjoint: p.is_disjoint(),
            stationary_residual: inside.then(|| p.stationary_residual()),
            monotone: p.is_monotone_on_intervals(MONOTONE_SAMPLES),
        });
        for (s, (lo, hi)) in random_admissible_subintervals(&p, seed, STREAM_BASE + 1000 + i as u64, subintervals).into_iter().enumerate() {
            rows.push(CaseVerdict { case_id: i * subintervals + s, ..lemma5_check(&p, lo, hi, tol)? });
        }
    }
    Ok((parts, rows))
}

/// Criterion 4.
pub fn lemma5_construction(seed: u64, art: &mut Artifacts) -> Result<CriterionResult> {
    let ((parts, rows), t) = timed(|| lemma5_rows(seed, LEMMA_CASES, LEMMA5_SUBINTERVALS, LEMMA_TOL))?;
    let structural = parts.iter().all(|p| {
        p.disjoint
            && p.excluded_measure <= p.measure_limit
            && p.monotone
            && p.stationary_residual.is_none_or(|r| r <= STATIONARY_TOL)
    });
    let failed = rows.iter().filter(|r| !r.pass).count();
    let interior = parts.iter().filter(|p| p.stationary_residual.is_some()).count();
    art.insert("c4_lemma5.csv".into(), verdict_csv(&rows));
    art.insert("c4_partitions.json".into(), serde_json::to_string_pretty(&parts)?);
    Ok(finish(
        4,
        "three-interval partition",
        structural && failed == 0 && rows.len() == LEMMA_CASES * LEMMA5_SUBINTERVALS,
        format!(
            "structure {}, {interior} stationary points inside [A,B], {failed} of {} subinterval checks fail",
            if structural { "ok" } else { "BROKEN" },
            rows.len()
        ),
        t,
        60.0,
    ))
}

/// Criterion 5: coefficient bound and Parseval growth for random indicators.
pub fn fourier_bounds(seed: u64, art: &mut Artifacts) -> Result<CriterionResult> {
    let ((ok, csv, checked), t) = timed(|| {
        let mut rng = stream_rng(seed, STREAM_BASE + 105);
        let mut ok = true;
        let mut checked = 0;
        let mut csv = String::from("function,a,b,max_j_times_coef,norm,norm_p64\n");
        for i in 0..FOURIER_FUNCTIONS {
            let (u, v): (f64, f64) = (rng.gen(), rng.gen());
            let (a, b) = if u < v { (u, v) } else { (v, u) };
            let f = PeriodicFunction::indicator(a, b)?;
            let fe = f.fourier_coefficients(FOURIER_MAX_J)?;
            let mut worst = 0.0f64;
            for j in 1..=FOURIER_MAX_J {
                let bound = 1.0 / j as f64 + FOURIER_TOL;
                ok &= fe.cos[j - 1].abs() <= bound && fe.sin[j - 1].abs() <= bound;
                worst = worst.max(j as f64 * fe.cos[j - 1].abs().max(fe.sin[j - 1].abs()));
            }
            let norm = f.l2_norm();
            let mut last = 0.0;
            for d in 1..=PARSEVAL_DEGREE {
                let nd = f.partial_sum(d)?.l2_norm();
                ok &= nd >= last && nd <= norm + FOURIER_TOL;
                last = nd;
            }
            if (0.2..=0.8).contains(&(b - a)) {
                checked += 1;
                ok &= last >= PARSEVAL_FRACTION * norm;
            }
            let _ = writeln!(csv, "{i},{},{},{},{},{}", sig17(a), sig17(b), sig17(worst), sig17(norm), sig17(last));
        }
        Ok((ok, csv, checked))
    })?;
    art.insert("c5_fourier.csv".into(), csv);
    Ok(finish(
        5,
        "Fourier coefficient bound and Parseval growth",
        ok,
        format!("{FOURIER_FUNCTIONS} indicators, j <= {FOURIER_MAX_J}; {checked} with length in [0.2, 0.8] checked at degree {PARSEVAL_DEGREE}"),
        t,
        10.0,
    ))
}

pub fn clt_params(n_terms: usize, seed: u64) -> CltParams {
    CltParams {
        f: PeriodicFunction::indicator(0.0, 0.5).expect("valid indicator"),
        rule: ExponentRule::Identity,
        xi: 1.0,
        interval: interval(),
        n_terms,
        n_draws: CLT_DRAWS,
        seed,
    }
}

/// Criterion 6.
pub fn clt(seed: u64, threads: Option<usize>, art: &mut Artifacts) -> Result<CriterionResult> {
    let ((small, large), t) = timed(|| {
        let small = clt_sample(&clt_params(CLT_N_SMALL, seed), threads)?;
        let large = clt_sample(&clt_params(CLT_N_LARGE, seed), threads)?;
        Ok((small, large))
    })?;
    let ok = large.ks_distance <= CLT_KS_MAX && large.ks_distance <= small.ks_distance + CLT_TREND_SLACK;
    art.insert(format!("c6_clt_N{CLT_N_SMALL}.csv"), small.to_csv());
    art.insert(format!("c6_clt_N{CLT_N_LARGE}.csv"), large.to_csv());
    let summary = serde_json::json!({
        "ks_distance": { CLT_N_SMALL.to_string(): small.ks_distance, CLT_N_LARGE.to_string(): large.ks_distance },
        "ks_distance_unnormalized": { CLT_N_SMALL.to_string(): small.ks_distance_raw, CLT_N_LARGE.to_string(): large.ks_distance_raw },
        "mean_T": { CLT_N_SMALL.to_string(): small.mean(), CLT_N_LARGE.to_string(): large.mean() },
    });
    art.insert("c6_clt_summary.json".into(), serde_json::to_string_pretty(&summary)?);
    Ok(finish(
        6,
        "central limit theorem",
        ok,
        format!(
            "KS(N=2^12) = {:.4} <= {CLT_KS_MAX}, KS(N=2^8) = {:.4}",
            large.ks_distance, small.ks_distance
        ),
        t,
        900.0,
    ))
}

fn lil_grid() -> Grid {
    let mut values = Grid::Dyadic.points(LIL_N).expect("LIL_N >= 16");
    values.push(LIL_N / 10);
    Grid::Explicit { values }
}

/// Relative growth of the running maximum over the last decade of `N`.
fn last_decade_growth(t: &LilTrajectory) -> f64 {
    let before = t.running_max_at(LIL_N / 10).unwrap_or(0.0);
    let after = t.running_max_at(LIL_N).unwrap_or(0.0);
    if before > 0.0 {
        (after - before) / before
    } else {
        f64::INFINITY
    }
}

fn lil_csv(rows: &[(f64, LilTrajectory)]) -> String {
    let mut csv = String::from("draw,x,L_star_final,running_max_decade_start,running_max_final\n");
    for (i, (x, t)) in rows.iter().enumerate() {
        let _ = writeln!(
            csv,
            "{i},{},{},{},{}",
            sig17(*x),
            sig17(t.at(LIL_N).unwrap_or(f64::NAN)),
            sig17(t.running_max_at(LIL_N / 10).unwrap_or(f64::NAN)),
            sig17(t.running_max_at(LIL_N).unwrap_or(f64::NAN))
        );
    }
    csv
}

/// Criterion 7.
pub fn lil_envelope(seed: u64, threads: Option<usize>, art: &mut Artifacts) -> Result<CriterionResult> {
    let grid = lil_grid();
    let ((power, iid), t) = timed(|| {
        let power = lil_power_ensemble(1.0, &ExponentRule::Identity, interval(), LIL_N, &grid, Variant::Star, LIL_X_DRAWS, seed, threads)?;
        let iid = (0..LIL_X_DRAWS as u64)
            .map(|i| {
                let pts = generate_iid(stream_rng(seed, STREAM_BASE + 700 + i).gen(), LIL_N);
                Ok((f64::NAN, lil_scan(&pts, &grid, Variant::Star)?))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok((power, iid))
    })?;
    let finals = |v: &[(f64, LilTrajectory)]| v.iter().map(|(_, t)| t.at(LIL_N).unwrap_or(f64::NAN)).collect::<Vec<_>>();
    let growth = |v: &[(f64, LilTrajectory)]| median(&v.iter().map(|(_, t)| last_decade_growth(t)).collect::<Vec<_>>());
    let (mp, mi) = (median(&finals(&power)), median(&finals(&iid)));
    let (gp, gi) = (growth(&power), growth(&iid));
    let band = |m: f64| LIL_BAND.0 <= m && m <= LIL_BAND.1;
    let ok = band(mp) && band(mi) && gp <= LIL_LAST_DECADE_GROWTH && gi <= LIL_LAST_DECADE_GROWTH;
    art.insert("c7_lil_power.csv".into(), lil_csv(&power));
    art.insert("c7_lil_iid.csv".into(), lil_csv(&iid));
    if let Some((_, first)) = power.first() {
        art.insert("c7_lil_power_trajectory0.csv".into(), first.to_csv());
    }
    Ok(finish(
        7,
        "LIL envelope",
        ok,
        format!(
            "median L*(1e5): power {mp:.4}, iid {mi:.4} in [{}, {}]; median last-decade growth {:.1}% / {:.1}% (ref {:.5})",
            LIL_BAND.0,
            LIL_BAND.1,
            100.0 * gp,
            100.0 * gi,
            ReferenceConstants::new().lil_power_orbit
        ),
        t,
        1200.0,
    ))
}

/// Criterion 8: radii below `2^-40` and stability under doubled precision.
pub fn certified_generation(seed: u64, art: &mut Artifacts) -> Result<CriterionResult> {
    let ((ok, worst_radius, worst_shift, csv), t) = timed(|| {
        let mut ok = true;
        let mut worst_radius = 0.0f64;
        let mut worst_shift = 0.0f64;
        let mut csv = String::from("draw,x,precision_bits,max_radius,max_shift_over_radii\n");
        for i in 0..CERT_X_DRAWS as u64 {
            let x = draw_x(interval(), seed, STREAM_BASE + 800 + i, 53)?;
            let spec = OrbitSpec::new(crate::dyadic::Dyadic::from_u64(1), x.clone(), ExponentRule::Identity, interval())?;
            let base = generate_power_orbit(&spec, CERT_N, CERT_EPS)?;
            let prec = required_precision(&spec, CERT_N, CERT_EPS)?;
            let doubled = generate_power_orbit_at(&spec, CERT_N, CERT_EPS, 2 * prec)?;
            let mut ratio = 0.0f64;
            for (p, q) in base.points.iter().zip(&doubled.points) {
                ok &= (0.0..1.0).contains(&p.value) && p.radius < CERT_EPS && q.radius < CERT_EPS;
                let shift = (p.value - q.value).abs();
                ok &= shift <= p.radius + q.radius;
                if p.radius + q.radius > 0.0 {
                    ratio = ratio.max(shift / (p.radius + q.radius));
                } else if shift > 0.0 {
                    ratio = f64::INFINITY;
                }
            }
            worst_radius = worst_radius.max(base.max_radius());
            worst_shift = worst_shift.max(ratio);
            let _ = writeln!(csv, "{i},{},{prec},{},{}", sig17(x.to_f64()), sig17(base.max_radius()), sig17(ratio));
        }
        Ok((ok, worst_radius, worst_shift, csv))
    })?;
    art.insert("c8_certified.csv".into(), csv);
    Ok(finish(
        8,
        "certified generation",
        ok,
        format!("max radius {worst_radius:.3e} < 2^-40; max shift/summed radii {worst_shift:.3}"),
        t,
        120.0,
    ))
}

/// Runs criteria 1 to 8, returning their results and the artifacts.
pub fn run_selftest(seed: u64, threads: Option<usize>) -> Result<(Vec<CriterionResult>, Artifacts)> {
    run_selected(seed, threads, &[1, 2, 3, 4, 5, 6, 7, 8])
}

pub fn run_selected(seed: u64, threads: Option<usize>, ids: &[u32]) -> Result<(Vec<CriterionResult>, Artifacts)> {
    let mut art = Artifacts::new();
    let mut out = Vec::new();
    for &id in ids {
        let r = match id {
            1 => oracle_equivalence(seed, &mut art)?,
            2 => sandwich(seed, &mut art)?,
            3 => lemma34_bounds(seed, &mut art)?,
            4 => lemma5_construction(seed, &mut art)?,
            5 => fourier_bounds(seed, &mut art)?,
            6 => clt(seed, threads, &mut art)?,
            7 => lil_envelope(seed, threads, &mut art)?,
            8 => certified_generation(seed, &mut art)?,
            _ => continue,
        };
        out.push(r);
    }
    let summary: Vec<_> = out.iter().map(|r| serde_json::json!({"id": r.id, "name": r.name, "pass": r.pass})).collect();
    art.insert("selftest_summary.json".into(), serde_json::to_string_pretty(&summary)?);
    Ok((out, art))
}
