//! Statistical harness: LIL trajectories of the normalized discrepancy,
//! CLT samples of normalized sums over random `x`, Kolmogorov-Smirnov
//! distances to the standard normal, and the block-sum grid of admissible `N`.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::discrepancy::{extremal_sorted, star_sorted};
use crate::dyadic::Dyadic;
use crate::error::{invalid, LabError, Result};
use crate::periodic::PeriodicFunction;
use crate::seqgen::{
    generate_iid, generate_power_orbit, sample_x_with, sig17, stream_rng, CertifiedPointList, ExponentRule,
    Interval, OrbitSpec, DEFAULT_EPS,
};

/// Limits quoted for comparison; none of them is asserted at finite `N`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReferenceConstants {
    /// Limsup for `frac(xi x^s_n)` with a.e. `x`: `1/sqrt 2`.
    pub lil_power_orbit: f64,
    /// Limit in measure of `N D_N / (log N log log N)` for `frac(n x)`: `2/pi^2`.
    pub kesten: f64,
    /// Limsup for `frac(2^n x)`: `2 sqrt(21) / 9`.
    pub fukuyama_base2: f64,
    /// Limsup for i.i.d. uniforms: `1/sqrt 2`.
    pub chung_smirnov: f64,
    /// Limsup for `frac(beta^n x)` when no power of `beta` is rational: `1/sqrt 2`.
    pub fukuyama_irrational: f64,
}

impl ReferenceConstants {
    pub fn new() -> Self {
        let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
        ReferenceConstants {
            lil_power_orbit: inv_sqrt2,
            kesten: 2.0 / (std::f64::consts::PI * std::f64::consts::PI),
            fukuyama_base2: 2.0 * 21f64.sqrt() / 9.0,
            chung_smirnov: inv_sqrt2,
            fukuyama_irrational: inv_sqrt2,
        }
    }
}

impl Default for ReferenceConstants {
    fn default() -> Self {
        Self::new()
    }
}

/// Standard normal distribution function.
pub fn normal_cdf(t: f64) -> f64 {
    if t.is_nan() {
        return f64::NAN;
    }
    0.5 * libm::erfc(-t / std::f64::consts::SQRT_2)
}

/// `sup_t |F_M(t) - Phi(t)|` for the empirical distribution of `samples`.
pub fn ks_distance(samples: &[f64]) -> Result<f64> {
    if samples.is_empty() {
        return Err(invalid("ks_distance needs at least one sample"));
    }
    if samples.iter().any(|v| !v.is_finite()) {
        return Err(invalid("samples must be finite"));
    }
    let mut s = samples.to_vec();
    s.sort_by(f64::total_cmp);
    let m = s.len() as f64;
    let mut d = 0.0f64;
    for (i, &t) in s.iter().enumerate() {
        let phi = normal_cdf(t);
        d = d.max((i + 1) as f64 / m - phi).max(phi - i as f64 / m);
    }
    Ok(d.clamp(0.0, 1.0))
}

/// `N(M) = sum_{i <= M} (i^4 + i)` for `M = 1..=max_m`.
pub fn nform_values(max_m: u64) -> Result<Vec<u64>> {
    if max_m < 1 {
        return Err(invalid("max_m must be at least 1"));
    }
    let mut out = Vec::with_capacity(max_m as usize);
    let mut acc: u64 = 0;
    for i in 1..=max_m {
        let term = i
            .checked_pow(4)
            .and_then(|q| q.checked_add(i))
            .ok_or_else(|| invalid("block sum overflows u64"))?;
        acc = acc.checked_add(term).ok_or_else(|| invalid("block sum overflows u64"))?;
        out.push(acc);
    }
    Ok(out)
}

/// Largest `N(M) <= n`, with its `M`.
pub fn nform_floor_with_m(n: u64) -> Result<(u64, u64)> {
    if n < 2 {
        return Err(invalid(format!("N = {n} is below the smallest block sum 2")));
    }
    let (mut acc, mut m) = (0u64, 0u64);
    loop {
        let i = m + 1;
        let next = i.checked_pow(4).and_then(|q| q.checked_add(i)).and_then(|t| t.checked_add(acc));
        match next {
            Some(v) if v <= n => {
                acc = v;
                m = i;
            }
            _ => return Ok((acc, m)),
        }
    }
}

pub fn nform_floor(n: u64) -> Result<u64> {
    nform_floor_with_m(n).map(|(v, _)| v)
}

/// Which `N` the LIL scan evaluates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Grid {
    /// `16 * 2^k`, plus `n_max`.
    Dyadic,
    /// Block sums `N(M) >= 16`, plus `n_max`.
    Nform,
    Explicit { values: Vec<usize> },
}

pub const GRID_START: usize = 16;

impl Grid {
    pub fn points(&self, n_max: usize) -> Result<Vec<usize>> {
        if n_max < GRID_START {
            return Err(invalid(format!("n_max must be at least {GRID_START}")));
        }
        let mut v: Vec<usize> = match self {
            Grid::Dyadic => {
                let mut v = Vec::new();
                let mut n = GRID_START;
                while n <= n_max {
                    v.push(n);
                    n *= 2;
                }
                v.push(n_max);
                v
            }
            Grid::Nform => {
                let mut v: Vec<usize> = Vec::new();
                let mut m = 1u64;
                loop {
                    let n = *nform_values(m)?.last().unwrap() as usize;
                    if n > n_max {
                        break;
                    }
                    if n >= GRID_START {
                        v.push(n);
                    }
                    m += 1;
                }
                v.push(n_max);
                v
            }
            Grid::Explicit { values } => {
                if values.iter().any(|&n| n < GRID_START || n > n_max) {
                    return Err(invalid(format!("explicit grid values must lie in [{GRID_START}, {n_max}]")));
                }
                values.clone()
            }
        };
        v.sort_unstable();
        v.dedup();
        Ok(v)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    Extremal,
    Star,
}

/// `log(max{1, log N})`, never below its value at `N = 16`.
pub fn loglog(n: usize) -> f64 {
    let ll = |v: f64| v.ln().max(1.0).ln();
    ll(n as f64).max(ll(GRID_START as f64))
}

/// `sqrt(N) D / sqrt(loglog N)`.
pub fn lil_statistic(n: usize, d: f64) -> f64 {
    (n as f64).sqrt() * d / loglog(n).sqrt()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LilTrajectory {
    pub variant: Variant,
    pub n_grid: Vec<usize>,
    pub d_star: Vec<f64>,
    pub d_extremal: Vec<f64>,
    pub l_star: Vec<f64>,
    pub l_extremal: Vec<f64>,
    /// Prefix maxima of the statistic of `variant`.
    pub running_max: Vec<f64>,
    /// Certified slack of the discrepancies at each grid point.
    pub slack: Vec<f64>,
    /// All points coincide (for example `x = 2, xi = 1`): `D_N = 1` and the
    /// statistic grows without bound.
    pub non_generic: bool,
}

impl LilTrajectory {
    pub fn statistic(&self) -> &[f64] {
        match self.variant {
            Variant::Star => &self.l_star,
            Variant::Extremal => &self.l_extremal,
        }
    }

    /// Statistic at the grid point equal to `n`.
    pub fn at(&self, n: usize) -> Option<f64> {
        self.n_grid.iter().position(|&g| g == n).map(|i| self.statistic()[i])
    }

    /// Running maximum over grid points `<= n`.
    pub fn running_max_at(&self, n: usize) -> Option<f64> {
        let idx = self.n_grid.partition_point(|&g| g <= n);
        (idx > 0).then(|| self.running_max[idx - 1])
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("N,d_star,d_extremal,L_star,L_extremal,running_max\n");
        for i in 0..self.n_grid.len() {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                self.n_grid[i],
                sig17(self.d_star[i]),
                sig17(self.d_extremal[i]),
                sig17(self.l_star[i]),
                sig17(self.l_extremal[i]),
                sig17(self.running_max[i])
            );
        }
        out
    }
}

fn merge_sorted(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        if a[i].total_cmp(&b[j]).is_le() {
            out.push(a[i]);
            i += 1;
        } else {
            out.push(b[j]);
            j += 1;
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

/// Scans discrepancies of growing prefixes. New points are sorted and
/// merged into the running sorted prefix, so each grid point costs `O(N)`.
pub fn lil_scan(points: &CertifiedPointList, grid: &Grid, variant: Variant) -> Result<LilTrajectory> {
    let n_max = points.n_points();
    let n_grid = grid.points(n_max)?;
    let values = points.values();
    let mut sorted: Vec<f64> = Vec::new();
    let mut consumed = 0usize;
    let mut max_radius = 0.0f64;
    let mut t = LilTrajectory {
        variant,
        n_grid: n_grid.clone(),
        d_star: Vec::new(),
        d_extremal: Vec::new(),
        l_star: Vec::new(),
        l_extremal: Vec::new(),
        running_max: Vec::new(),
        slack: Vec::new(),
        non_generic: false,
    };
    let mut best = 0.0f64;
    for &n in &n_grid {
        let mut fresh = values[consumed..n].to_vec();
        fresh.sort_by(f64::total_cmp);
        sorted = merge_sorted(&sorted, &fresh);
        max_radius = points.points[consumed..n].iter().map(|p| p.radius).fold(max_radius, f64::max);
        consumed = n;
        let ds = star_sorted(&sorted);
        let de = extremal_sorted(&sorted);
        let (ls, le) = (lil_statistic(n, ds), lil_statistic(n, de));
        best = best.max(if variant == Variant::Star { ls } else { le });
        t.d_star.push(ds);
        t.d_extremal.push(de);
        t.l_star.push(ls);
        t.l_extremal.push(le);
        t.running_max.push(best);
        t.slack.push(2.0 * max_radius);
    }
    t.non_generic = values.windows(2).all(|w| w[0] == w[1]);
    Ok(t)
}

/// Where the scanned points come from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PointSource {
    /// `frac(xi x^s_n)` for a fixed `x`.
    Power { xi: f64, x: f64, rule: ExponentRule },
    /// `frac(xi x^s_n)` with `x` taken from draw `draw` of [`draw_x`] on the interval.
    SampledPower { xi: f64, rule: ExponentRule, seed: u64, draw: u64 },
    Iid { seed: u64 },
}

pub fn generate_source(source: &PointSource, n: usize, interval: Interval, eps: f64) -> Result<CertifiedPointList> {
    match source {
        PointSource::Power { xi, x, rule } => {
            let spec = OrbitSpec::from_f64(*xi, *x, rule.clone(), interval)?;
            generate_power_orbit(&spec, n, eps)
        }
        PointSource::SampledPower { xi, rule, seed, draw } => {
            let x = draw_x(interval, *seed, *draw, 53)?;
            let spec = OrbitSpec::new(Dyadic::from_f64(*xi)?, x, rule.clone(), interval)?;
            generate_power_orbit(&spec, n, eps)
        }
        PointSource::Iid { seed } => Ok(generate_iid(*seed, n)),
    }
}

pub fn lil_scan_source(
    source: &PointSource,
    interval: Interval,
    n_max: usize,
    grid: &Grid,
    variant: Variant,
) -> Result<LilTrajectory> {
    if n_max < GRID_START {
        return Err(invalid(format!("n_max must be at least {GRID_START}")));
    }
    let points = generate_source(source, n_max, interval, DEFAULT_EPS)?;
    lil_scan(&points, grid, variant)
}

fn pool(threads: Option<usize>) -> Result<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(t) = threads {
        b = b.num_threads(t.max(1));
    }
    b.build().map_err(|e| LabError::Config(e.to_string()))
}

/// Draw `index` of a Monte Carlo run: an `x` on the `mantissa_bits` grid,
/// independent of scheduling.
pub fn draw_x(interval: Interval, seed: u64, index: u64, mantissa_bits: u32) -> Result<Dyadic> {
    sample_x_with(interval.a, interval.b, &mut stream_rng(seed, index), mantissa_bits)
}

/// LIL trajectories of power orbits for `n_x` sampled values of `x`.
#[allow(clippy::too_many_arguments)]
pub fn lil_power_ensemble(
    xi: f64,
    rule: &ExponentRule,
    interval: Interval,
    n_max: usize,
    grid: &Grid,
    variant: Variant,
    n_x: usize,
    seed: u64,
    threads: Option<usize>,
) -> Result<Vec<(f64, LilTrajectory)>> {
    let xi_d = Dyadic::from_f64(xi)?;
    pool(threads)?.install(|| {
        (0..n_x as u64)
            .into_par_iter()
            .map(|i| {
                let x = draw_x(interval, seed, i, 53)?;
                let spec = OrbitSpec::new(xi_d.clone(), x.clone(), rule.clone(), interval)?;
                let pts = generate_power_orbit(&spec, n_max, DEFAULT_EPS)?;
                Ok((x.to_f64(), lil_scan(&pts, grid, variant)?))
            })
            .collect()
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CltSample {
    pub n_terms: usize,
    pub n_draws: usize,
    pub xs: Vec<f64>,
    /// `sum f(xi x^s_n) / (||f|| sqrt N)`.
    pub normalized_sums: Vec<f64>,
    /// `sum f(xi x^s_n) / sqrt N`.
    pub raw_sums: Vec<f64>,
    pub ks_distance: f64,
    pub ks_distance_raw: f64,
}

impl CltSample {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("draw,x,T\n");
        for (i, (x, t)) in self.xs.iter().zip(&self.normalized_sums).enumerate() {
            let _ = writeln!(out, "{},{},{}", i, sig17(*x), sig17(*t));
        }
        out
    }

    pub fn mean(&self) -> f64 {
        self.normalized_sums.iter().sum::<f64>() / self.normalized_sums.len() as f64
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CltParams {
    pub f: PeriodicFunction,
    pub rule: ExponentRule,
    pub xi: f64,
    pub interval: Interval,
    pub n_terms: usize,
    pub n_draws: usize,
    pub seed: u64,
}

pub const MIN_DRAWS: usize = 100;

/// Samples normalized sums over `n_draws` random `x`. Results are keyed by
/// draw index, so the output does not depend on `threads`.
pub fn clt_sample(p: &CltParams, threads: Option<usize>) -> Result<CltSample> {
    p.f.validate()?;
    if !p.f.is_admissible() {
        return Err(invalid("f must have total variation at most 2"));
    }
    let norm = p.f.l2_norm();
    if norm <= 0.0 {
        return Err(invalid("f has zero norm"));
    }
    if p.n_draws < MIN_DRAWS {
        return Err(invalid(format!("n_draws must be at least {MIN_DRAWS}")));
    }
    if p.n_terms < 1 {
        return Err(invalid("n_terms must be at least 1"));
    }
    Interval::new(p.interval.a, p.interval.b)?;
    p.rule.validate()?;
    let xi = Dyadic::from_f64(p.xi)?;
    if xi.is_zero() {
        return Err(invalid("xi must be positive"));
    }
    let sqrt_n = (p.n_terms as f64).sqrt();
    let draws: Vec<(f64, f64)> = pool(threads)?.install(|| {
        (0..p.n_draws as u64)
            .into_par_iter()
            .map(|i| -> Result<(f64, f64)> {
                let x = draw_x(p.interval, p.seed, i, 53)?;
                let spec = OrbitSpec::new(xi.clone(), x.clone(), p.rule.clone(), p.interval)?;
                let pts = generate_power_orbit(&spec, p.n_terms, DEFAULT_EPS)?;
                let sum: f64 = pts.points.iter().map(|q| p.f.eval(q.value)).sum();
                Ok((x.to_f64(), sum / sqrt_n))
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let xs: Vec<f64> = draws.iter().map(|d| d.0).collect();
    let raw_sums: Vec<f64> = draws.iter().map(|d| d.1).collect();
    let normalized_sums: Vec<f64> = raw_sums.iter().map(|r| r / norm).collect();
    Ok(CltSample {
        n_terms: p.n_terms,
        n_draws: p.n_draws,
        ks_distance: ks_distance(&normalized_sums)?,
        ks_distance_raw: ks_distance(&raw_sums)?,
        xs,
        normalized_sums,
        raw_sums,
    })
}

/// Median of a nonempty slice.
pub fn median(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len();
    if n % 2 == 1 {
        s[n / 2]
    } else {
        0.5 * (s[n / 2 - 1] + s[n / 2])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cdf_values() {
        assert_eq!(normal_cdf(0.0), 0.5);
        // 0.97500000090355759... from an independent 50-digit evaluation.
        assert!((normal_cdf(1.959964) - 0.975_000_000_903_557_6).abs() < 1e-12);
        assert!(normal_cdf(-8.0) < 1e-14);
        assert!(normal_cdf(8.0) > 1.0 - 1e-14);
    }

    #[test]
    fn ks_small_cases() {
        assert_eq!(ks_distance(&[0.0]).unwrap(), 0.5);
        assert!(ks_distance(&[]).is_err());
        let a = ks_distance(&[0.3, -1.0, 2.0, 0.1]).unwrap();
        let b = ks_distance(&[2.0, 0.1, 0.3, -1.0]).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn nform() {
        assert_eq!(nform_values(3).unwrap(), vec![2, 20, 104]);
        assert_eq!(nform_floor(100).unwrap(), 20);
        assert_eq!(nform_floor(104).unwrap(), 104);
        assert_eq!(nform_floor(2).unwrap(), 2);
        assert!(nform_floor(1).is_err());
        assert!(nform_values(0).is_err());
    }

    #[test]
    fn grids() {
        assert_eq!(Grid::Dyadic.points(100).unwrap(), vec![16, 32, 64, 100]);
        assert_eq!(Grid::Dyadic.points(64).unwrap(), vec![16, 32, 64]);
        assert_eq!(Grid::Nform.points(400).unwrap(), vec![20, 104, 364, 400]);
        assert!(Grid::Dyadic.points(15).is_err());
        assert!(Grid::Explicit { values: vec![10] }.points(100).is_err());
    }

    #[test]
    fn loglog_guard() {
        assert_eq!(loglog(2), loglog(16));
        assert!((loglog(16) - (16f64).ln().ln()).abs() < 1e-15);
        assert!(loglog(100_000) > loglog(16));
    }

    #[test]
    fn degenerate_orbit_is_flagged() {
        let pts = CertifiedPointList::from_values(&[0.0; 64]).unwrap();
        let t = lil_scan(&pts, &Grid::Dyadic, Variant::Extremal).unwrap();
        assert!(t.non_generic);
        assert!(t.d_extremal.iter().all(|&d| d == 1.0));
        assert_eq!(t.l_extremal[2], 8.0 / loglog(64).sqrt());
    }

    #[test]
    fn scan_matches_batch() {
        let pts = generate_iid(5, 3000);
        let t = lil_scan(&pts, &Grid::Nform, Variant::Star).unwrap();
        for (i, &n) in t.n_grid.iter().enumerate() {
            let mut s = pts.values()[..n].to_vec();
            s.sort_by(f64::total_cmp);
            assert_eq!(t.d_star[i], star_sorted(&s));
            assert_eq!(t.d_extremal[i], extremal_sorted(&s));
        }
        assert!(t.running_max.windows(2).all(|w| w[0] <= w[1]));
        assert!(!t.non_generic);
    }

    #[test]
    fn clt_rejects_bad_params() {
        let base = CltParams {
            f: PeriodicFunction::indicator(0.0, 0.5).unwrap(),
            rule: ExponentRule::Identity,
            xi: 1.0,
            interval: Interval::new(1.1, 2.1).unwrap(),
            n_terms: 16,
            n_draws: 99,
            seed: 1,
        };
        assert!(clt_sample(&base, Some(1)).is_err());
        let zero = CltParams { f: PeriodicFunction::trig(vec![], vec![]).unwrap(), n_draws: 100, ..base.clone() };
        assert!(clt_sample(&zero, Some(1)).is_err());
        let steep = CltParams { f: PeriodicFunction::trig(vec![1.0], vec![]).unwrap(), n_draws: 100, ..base };
        assert!(clt_sample(&steep, Some(1)).is_err());
    }

    #[test]
    fn clt_is_thread_independent() {
        let p = CltParams {
            f: PeriodicFunction::indicator(0.0, 0.5).unwrap(),
            rule: ExponentRule::Identity,
            xi: 1.0,
            interval: Interval::new(1.1, 2.1).unwrap(),
            n_terms: 64,
            n_draws: 100,
            seed: 9,
        };
        let a = clt_sample(&p, Some(1)).unwrap();
        let b = clt_sample(&p, Some(4)).unwrap();
        assert_eq!(a.to_csv(), b.to_csv());
        assert!((a.ks_distance_raw - a.ks_distance).abs() >= 0.0);
    }

    #[test]
    fn iid_running_max_near_envelope() {
        let t = lil_scan(&generate_iid(42, 100_000), &Grid::Dyadic, Variant::Star).unwrap();
        let m = t.running_max_at(100_000).unwrap();
        assert!((0.4..=1.4).contains(&m), "running max {m}");
    }

    #[test]
    fn constants() {
        let c = ReferenceConstants::new();
        assert!((c.lil_power_orbit - 0.707_106_781_186_547_5).abs() < 1e-12);
        assert!((c.kesten - 0.202_642_367_284_675_5).abs() < 1e-12);
        assert!((c.fukuyama_base2 - 1.018_350_154_434_631_1).abs() < 1e-12);
    }
}
