//! Point sequences in the unit interval: certified power orbits
//! `frac(xi * x^s_n)`, linear orbits `frac(s_n * x)` and seeded uniforms.

use std::fmt::Write as _;

use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dyadic::{Dyadic, Enclosure};
use crate::error::{invalid, LabError, Result};

/// Default per-point tolerance.
pub const DEFAULT_EPS: f64 = 9.094947017729282e-13; // 2^-40
/// Largest working precision accepted, in bits.
pub const PRECISION_CAP: u64 = 1 << 24;
/// Number of precision doublings tried for a point that straddles an integer.
pub const MAX_RETRIES: u32 = 8;
/// Points are reported as `f64`, which quantizes to `2^-53`; tolerances below
/// this floor cannot be certified.
pub const MIN_EPS: f64 = 8.881784197001252e-16; // 2^-50
/// Largest admissible tolerance.
pub const MAX_EPS: f64 = 1.0 / 1024.0;

/// Rule producing the exponents `s_1 < s_2 < ...`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ExponentRule {
    /// `s_n = n`
    Identity,
    /// `s_n = start + (n - 1) * step`
    Affine { start: u64, step: u64 },
    /// A finite strictly increasing list of positive integers.
    Explicit { values: Vec<u64> },
}

impl ExponentRule {
    pub fn affine(start: u64, step: u64) -> Result<Self> {
        let rule = ExponentRule::Affine { start, step };
        rule.validate()?;
        Ok(rule)
    }

    pub fn explicit(values: Vec<u64>) -> Result<Self> {
        let rule = ExponentRule::Explicit { values };
        rule.validate()?;
        Ok(rule)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ExponentRule::Identity => Ok(()),
            ExponentRule::Affine { start, step } => {
                if *start < 1 || *step < 1 {
                    Err(invalid("affine rule needs start >= 1 and step >= 1"))
                } else {
                    Ok(())
                }
            }
            ExponentRule::Explicit { values } => {
                if values.is_empty() {
                    return Err(invalid("explicit exponent list is empty"));
                }
                if values[0] < 1 {
                    return Err(invalid("exponents must be positive"));
                }
                if values.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(invalid("explicit exponents must be strictly increasing"));
                }
                Ok(())
            }
        }
    }

    /// The first `n` exponents.
    pub fn exponents(&self, n: usize) -> Result<Vec<u64>> {
        self.validate()?;
        match self {
            ExponentRule::Identity => Ok((1..=n as u64).collect()),
            ExponentRule::Affine { start, step } => (0..n as u64)
                .map(|i| {
                    i.checked_mul(*step)
                        .and_then(|v| v.checked_add(*start))
                        .ok_or_else(|| invalid("affine exponent overflows u64"))
                })
                .collect(),
            ExponentRule::Explicit { values } => {
                if values.len() < n {
                    return Err(invalid(format!(
                        "explicit rule has {} exponents, {} requested",
                        values.len(),
                        n
                    )));
                }
                Ok(values[..n].to_vec())
            }
        }
    }

    /// Largest exponent among the first `n`.
    pub fn last_exponent(&self, n: usize) -> Result<u64> {
        if n == 0 {
            return Err(invalid("n_points must be at least 1"));
        }
        self.validate()?;
        match self {
            ExponentRule::Identity => Ok(n as u64),
            ExponentRule::Affine { start, step } => ((n - 1) as u64)
                .checked_mul(*step)
                .and_then(|v| v.checked_add(*start))
                .ok_or_else(|| invalid("affine exponent overflows u64")),
            ExponentRule::Explicit { values } => values
                .get(n - 1)
                .copied()
                .ok_or_else(|| invalid("explicit rule is shorter than n_points")),
        }
    }
}

/// The sampling range `[A, B]` for `x`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub a: f64,
    pub b: f64,
}

impl Interval {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite()) || a <= 1.0 || b <= a {
            return Err(invalid(format!("need 1 < A < B, got [{a}, {b}]")));
        }
        Ok(Interval { a, b })
    }

    pub fn length(&self) -> f64 {
        self.b - self.a
    }
}

/// Everything needed to define the orbit `frac(xi * x^s_n)`.
#[derive(Clone, Debug)]
pub struct OrbitSpec {
    xi: Dyadic,
    x: Dyadic,
    rule: ExponentRule,
    interval: Interval,
}

impl OrbitSpec {
    pub fn new(xi: Dyadic, x: Dyadic, rule: ExponentRule, interval: Interval) -> Result<Self> {
        if xi.is_zero() {
            return Err(invalid("xi must be positive"));
        }
        if x <= Dyadic::from_u64(1) {
            return Err(invalid(format!("x must exceed 1, got {x}")));
        }
        rule.validate()?;
        Interval::new(interval.a, interval.b)?;
        Ok(OrbitSpec { xi, x, rule, interval })
    }

    /// Convenience constructor from `f64` values, which are exact dyadics.
    pub fn from_f64(xi: f64, x: f64, rule: ExponentRule, interval: Interval) -> Result<Self> {
        OrbitSpec::new(Dyadic::from_f64(xi)?, Dyadic::from_f64(x)?, rule, interval)
    }

    pub fn xi(&self) -> &Dyadic {
        &self.xi
    }

    pub fn x(&self) -> &Dyadic {
        &self.x
    }

    pub fn rule(&self) -> &ExponentRule {
        &self.rule
    }

    pub fn interval(&self) -> Interval {
        self.interval
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertifiedPoint {
    /// Value in `[0, 1)`.
    pub value: f64,
    /// Rigorous bound on `|value - exact|`.
    pub radius: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CertifiedPointList {
    pub points: Vec<CertifiedPoint>,
    /// Exponent (or index, for sequences without one) of each point.
    pub exponents: Vec<u64>,
    /// Working precision in bits, 0 for exact or pseudo-random inputs.
    pub precision_bits: u64,
}

impl CertifiedPointList {
    /// Exact points with zero radius.
    pub fn from_values(values: &[f64]) -> Result<Self> {
        if let Some(v) = values.iter().find(|v| !(0.0..1.0).contains(*v)) {
            return Err(invalid(format!("point {v} is outside [0, 1)")));
        }
        Ok(CertifiedPointList {
            points: values.iter().map(|&value| CertifiedPoint { value, radius: 0.0 }).collect(),
            exponents: (1..=values.len() as u64).collect(),
            precision_bits: 0,
        })
    }

    pub fn n_points(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn values(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.value).collect()
    }

    pub fn max_radius(&self) -> f64 {
        self.points.iter().map(|p| p.radius).fold(0.0, f64::max)
    }

    /// First `n` points.
    pub fn prefix(&self, n: usize) -> CertifiedPointList {
        let n = n.min(self.points.len());
        CertifiedPointList {
            points: self.points[..n].to_vec(),
            exponents: self.exponents[..n].to_vec(),
            precision_bits: self.precision_bits,
        }
    }

    /// Orbit dump: header `n,s_n,value,radius`, 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,s_n,value,radius\n");
        for (i, (p, s)) in self.points.iter().zip(&self.exponents).enumerate() {
            let _ = writeln!(out, "{},{},{},{}", i + 1, s, sig17(p.value), sig17(p.radius));
        }
        out
    }
}

/// Formats with 17 significant digits.
pub fn sig17(v: f64) -> String {
    format!("{v:.16e}")
}

fn check_eps(eps: f64) -> Result<()> {
    if !(MIN_EPS..=MAX_EPS).contains(&eps) {
        return Err(invalid(format!("tolerance {eps:e} outside [2^-50, 2^-10]")));
    }
    Ok(())
}

fn ceil_log2_dyadic(v: &Dyadic) -> u64 {
    v.to_f64().log2().ceil().max(0.0) as u64
}

/// Working precision for `n_points` points of `spec` at tolerance `eps`:
/// `ceil(s_N log2 x) + ceil(log2(xi + 2)) + ceil(log2(1/eps)) + 64`.
pub fn required_precision(spec: &OrbitSpec, n_points: usize, eps: f64) -> Result<u64> {
    required_precision_capped(spec, n_points, eps, PRECISION_CAP)
}

pub fn required_precision_capped(spec: &OrbitSpec, n_points: usize, eps: f64, cap: u64) -> Result<u64> {
    if !(eps > 0.0 && eps <= MAX_EPS) {
        return Err(invalid(format!("tolerance {eps:e} outside (0, 2^-10]")));
    }
    let s_n = spec.rule.last_exponent(n_points)?;
    let int_bits = (s_n as f64 * spec.x.to_f64().log2()).ceil();
    let xi_bits = ceil_log2_dyadic(&spec.xi.add(&Dyadic::from_u64(2)));
    let eps_bits = (1.0 / eps).log2().ceil() as u64;
    let total = int_bits + (xi_bits + eps_bits + 64) as f64;
    if !total.is_finite() || total > cap as f64 {
        return Err(LabError::PrecisionCap { required: total.min(u64::MAX as f64) as u64, cap });
    }
    Ok(total as u64)
}

/// Converts an enclosure of `y >= 0` into a certified point for `frac(y)`.
/// Returns `None` when the enclosure straddles an integer.
pub(crate) fn point_from_enclosure(enc: &Enclosure) -> Option<CertifiedPoint> {
    if enc.straddles_integer() {
        return None;
    }
    let lo = enc.lo.frac_fixed64(false);
    let hi = enc.hi.frac_fixed64(true);
    // hi may be a wrapped zero when the upper end is an exact integer.
    let hi = if hi < lo { 1u128 << 64 } else { hi };
    let top = (lo >> 11) as u64;
    let value = top as f64 * 2f64.powi(-53);
    let base = (top as u128) << 11;
    let spread = (hi - base) as f64 * 2f64.powi(-64);
    let radius = if spread == 0.0 { 0.0 } else { spread * (1.0 + 2f64.powi(-50)) };
    Some(CertifiedPoint { value, radius })
}

fn certify(enc: &Enclosure, eps: f64) -> Option<CertifiedPoint> {
    point_from_enclosure(enc).filter(|p| p.radius < eps)
}

/// Certified `frac(xi * x^s_n)` for the first `n_points` exponents.
pub fn generate_power_orbit(spec: &OrbitSpec, n_points: usize, eps: f64) -> Result<CertifiedPointList> {
    check_eps(eps)?;
    let prec = required_precision(spec, n_points, eps)?;
    generate_power_orbit_at(spec, n_points, eps, prec)
}

/// As [`generate_power_orbit`], at an explicit working precision.
pub fn generate_power_orbit_at(
    spec: &OrbitSpec,
    n_points: usize,
    eps: f64,
    prec: u64,
) -> Result<CertifiedPointList> {
    check_eps(eps)?;
    if prec > PRECISION_CAP {
        return Err(LabError::PrecisionCap { required: prec, cap: PRECISION_CAP });
    }
    let exponents = spec.rule.exponents(n_points)?;
    let mut points = Vec::with_capacity(n_points);
    let mut current = Enclosure::exact(spec.xi.clone());
    let mut prev = 0u64;
    let mut step: Option<(u64, Enclosure)> = None;
    for (index, &s) in exponents.iter().enumerate() {
        let gap = s - prev;
        let factor = match &step {
            Some((g, f)) if *g == gap => f.clone(),
            _ => {
                let f = Enclosure::pow(&spec.x, gap, prec);
                step = Some((gap, f.clone()));
                f
            }
        };
        current = current.mul(&factor, prec);
        prev = s;
        let point = match certify(&current, eps) {
            Some(p) => p,
            None => recompute_point(spec, s, eps, prec, index)?,
        };
        points.push(point);
    }
    Ok(CertifiedPointList { points, exponents, precision_bits: prec })
}

fn recompute_point(spec: &OrbitSpec, s: u64, eps: f64, prec: u64, index: usize) -> Result<CertifiedPoint> {
    let mut p = prec;
    for _ in 0..MAX_RETRIES {
        p = p.saturating_mul(2);
        if p > PRECISION_CAP {
            return Err(LabError::PrecisionCap { required: p, cap: PRECISION_CAP });
        }
        let enc = Enclosure::pow(&spec.x, s, p).mul(&Enclosure::exact(spec.xi.clone()), p);
        if let Some(point) = certify(&enc, eps) {
            return Ok(point);
        }
    }
    Err(LabError::Straddle { index, retries: MAX_RETRIES })
}

/// `frac(s_n * x)`; exact dyadic arithmetic, so the only error is the final
/// `f64` quantization (well below `2^-40`).
pub fn generate_linear_orbit(x: &Dyadic, rule: &ExponentRule, n_points: usize) -> Result<CertifiedPointList> {
    if x.is_zero() {
        return Err(invalid("x must be positive"));
    }
    if n_points == 0 {
        return Err(invalid("n_points must be at least 1"));
    }
    let exponents = rule.exponents(n_points)?;
    let points = exponents
        .iter()
        .map(|&s| {
            let y = x.mul_u64(s);
            point_from_enclosure(&Enclosure::exact(y)).expect("exact values never straddle")
        })
        .collect();
    Ok(CertifiedPointList { points, exponents, precision_bits: 0 })
}

/// Deterministic generator for a `(master seed, stream)` pair.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Seeded pseudo-uniform points in `[0, 1)` with radius 0.
pub fn generate_iid(seed: u64, n_points: usize) -> CertifiedPointList {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points = (0..n_points)
        .map(|_| CertifiedPoint { value: rng.gen::<f64>(), radius: 0.0 })
        .collect();
    CertifiedPointList { points, exponents: (1..=n_points as u64).collect(), precision_bits: 0 }
}

/// `A + (B - A) * k / 2^bits`, exactly.
pub fn x_from_index(a: f64, b: f64, k: u128, bits: u32) -> Result<Dyadic> {
    let da = Dyadic::from_f64(a)?;
    let width = Dyadic::from_f64(b)?
        .checked_sub(&da)
        .ok_or_else(|| invalid("interval end below start"))?;
    let step = Dyadic::from_parts(BigUint::from(k), -(bits as i64));
    Ok(da.add(&width.mul(&step)))
}

/// Draws `x` uniformly from a `2^mantissa_bits` grid on `[A, B)`, redrawing
/// any value `<= 1`.
pub fn sample_x(a: f64, b: f64, seed: u64, mantissa_bits: u32) -> Result<Dyadic> {
    sample_x_with(a, b, &mut ChaCha8Rng::seed_from_u64(seed), mantissa_bits)
}

pub fn sample_x_with(a: f64, b: f64, rng: &mut impl Rng, mantissa_bits: u32) -> Result<Dyadic> {
    if !(a.is_finite() && b.is_finite()) || a < 1.0 || b <= a {
        return Err(invalid(format!("need 1 <= A < B, got [{a}, {b}]")));
    }
    if !(16..=128).contains(&mantissa_bits) {
        return Err(invalid(format!("mantissa_bits {mantissa_bits} outside [16, 128]")));
    }
    let one = Dyadic::from_u64(1);
    loop {
        let raw: u128 = rng.gen();
        let k = if mantissa_bits == 128 { raw } else { raw & ((1u128 << mantissa_bits) - 1) };
        let x = x_from_index(a, b, k, mantissa_bits)?;
        if x > one {
            return Ok(x);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn iv() -> Interval {
        Interval::new(1.1, 2.1).unwrap()
    }

    fn orbit(xi: f64, x: f64, n: usize) -> Vec<f64> {
        let spec = OrbitSpec::from_f64(xi, x, ExponentRule::Identity, iv()).unwrap();
        generate_power_orbit(&spec, n, DEFAULT_EPS).unwrap().values()
    }

    #[test]
    fn precision_formula() {
        let spec = OrbitSpec::from_f64(1.0, 1.5, ExponentRule::Identity, iv()).unwrap();
        assert_eq!(required_precision(&spec, 1000, DEFAULT_EPS).unwrap(), 585 + 2 + 40 + 64);
        let spec = OrbitSpec::from_f64(1.0, 2.0, ExponentRule::Identity, iv()).unwrap();
        assert_eq!(required_precision(&spec, 100, DEFAULT_EPS).unwrap(), 100 + 2 + 40 + 64);
        // ceil(1e5 * log2 1.1) = 13751, computed independently in extended precision.
        let spec = OrbitSpec::from_f64(3.0, 1.1, ExponentRule::Identity, iv()).unwrap();
        assert_eq!(required_precision(&spec, 100_000, DEFAULT_EPS).unwrap(), 13751 + 3 + 40 + 64);
    }

    #[test]
    fn precision_cap_is_reported() {
        let spec = OrbitSpec::from_f64(1.0, 2.0, ExponentRule::affine(1, 1 << 30).unwrap(), iv()).unwrap();
        assert!(matches!(
            required_precision(&spec, 100, DEFAULT_EPS),
            Err(LabError::PrecisionCap { .. })
        ));
        assert!(required_precision(&spec, 1, 0.5).is_err());
    }

    #[test]
    fn small_dyadic_orbits() {
        assert_eq!(orbit(1.0, 1.5, 3), vec![0.5, 0.25, 0.375]);
        assert_eq!(orbit(1.0, 2.0, 5), vec![0.0; 5]);
        assert_eq!(orbit(1.0, 1.25, 2), vec![0.25, 0.5625]);
    }

    #[test]
    fn exact_points_have_zero_radius() {
        let spec = OrbitSpec::from_f64(1.0, 1.5, ExponentRule::Identity, iv()).unwrap();
        let list = generate_power_orbit(&spec, 3, DEFAULT_EPS).unwrap();
        assert!(list.points.iter().all(|p| p.radius == 0.0));
    }

    #[test]
    fn gapped_rule_matches_direct_powers() {
        let rule = ExponentRule::explicit(vec![3, 7, 8, 20]).unwrap();
        let spec = OrbitSpec::from_f64(0.75, 1.375, rule, iv()).unwrap();
        let list = generate_power_orbit(&spec, 4, DEFAULT_EPS).unwrap();
        for (p, &s) in list.points.iter().zip(&[3u64, 7, 8, 20]) {
            let mut y = Dyadic::from_f64(0.75).unwrap();
            for _ in 0..s {
                y = y.mul(&Dyadic::from_f64(1.375).unwrap());
            }
            let exact = point_from_enclosure(&Enclosure::exact(y)).unwrap();
            assert!((p.value - exact.value).abs() <= p.radius + exact.radius + 1e-16);
        }
    }

    #[test]
    fn linear_orbits() {
        let half = Dyadic::from_f64(0.5).unwrap();
        assert_eq!(
            generate_linear_orbit(&half, &ExponentRule::Identity, 4).unwrap().values(),
            vec![0.5, 0.0, 0.5, 0.0]
        );
        let quarter = Dyadic::from_f64(0.25).unwrap();
        let rule = ExponentRule::explicit(vec![2, 4, 8]).unwrap();
        assert_eq!(generate_linear_orbit(&quarter, &rule, 3).unwrap().values(), vec![0.5, 0.0, 0.0]);

        let third = Dyadic::from_ratio(1, 3, 128, true).unwrap();
        let list = generate_linear_orbit(&third, &ExponentRule::Identity, 3).unwrap();
        let tol = 2f64.powi(-40);
        assert!((list.points[0].value - 1.0 / 3.0).abs() < tol);
        assert!((list.points[1].value - 2.0 / 3.0).abs() < tol);
        assert!(list.points[2].value < tol);
        assert!(list.points.iter().all(|p| p.radius < tol));
    }

    #[test]
    fn iid_is_deterministic() {
        let a = generate_iid(42, 3);
        let b = generate_iid(42, 3);
        let bytes = |l: &CertifiedPointList| l.values().iter().map(|v| v.to_bits()).collect::<Vec<_>>();
        assert_eq!(bytes(&a), bytes(&b));
        let one = generate_iid(1, 1);
        assert!((0.0..1.0).contains(&one.points[0].value));
        let big = generate_iid(42, 10_000);
        let mean = big.values().iter().sum::<f64>() / 10_000.0;
        assert!((0.45..=0.55).contains(&mean), "mean {mean}");
    }

    #[test]
    fn sample_x_grid_and_rejection() {
        let x = x_from_index(1.5, 2.5, 1, 1).unwrap();
        assert_eq!(x.to_f64(), 2.0);
        assert_eq!(x_from_index(1.0, 2.0, 0, 20).unwrap().to_f64(), 1.0);
        // A = 1 is accepted, the k = 0 draw is rejected.
        for seed in 0..50 {
            assert!(sample_x(1.0, 1.0 + 2f64.powi(-10), seed, 16).unwrap().to_f64() > 1.0);
        }
        let a = sample_x(1.1, 2.1, 7, 53).unwrap();
        let b = sample_x(1.1, 2.1, 7, 53).unwrap();
        assert_eq!(a, b);
        assert!(sample_x(1.1, 2.1, 7, 8).is_err());
        assert!(sample_x(0.9, 2.1, 7, 16).is_err());
    }

    #[test]
    fn invalid_specs_rejected() {
        assert!(OrbitSpec::from_f64(0.0, 1.5, ExponentRule::Identity, iv()).is_err());
        assert!(OrbitSpec::from_f64(1.0, 1.0, ExponentRule::Identity, iv()).is_err());
        assert!(Interval::new(1.0, 2.0).is_err());
        assert!(Interval::new(1.5, 1.5).is_err());
        assert!(ExponentRule::explicit(vec![1, 1]).is_err());
        assert!(ExponentRule::explicit(vec![0, 1]).is_err());
        assert!(ExponentRule::affine(0, 1).is_err());
    }

    #[test]
    fn csv_dump_format() {
        let list = CertifiedPointList::from_values(&[0.5, 0.25]).unwrap();
        let csv = list.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("n,s_n,value,radius"));
        assert_eq!(lines.next(), Some("1,1,5.0000000000000000e-1,0.0000000000000000e0"));
    }
}
