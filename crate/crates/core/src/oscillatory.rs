//! Oscillatory integrals `int e^{2 pi i psi(x)} dx` for the polynomial phases
//! `psi = xi (j x^n + k x^m)` and `psi = xi (j x^n - k x^m)`, and numerical
//! checks of the van der Corput type bounds they satisfy.

use std::f64::consts::PI;
use std::sync::OnceLock;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, LabError, Result};
use crate::seqgen::stream_rng;

/// Evaluation budget per integral.
pub const NODE_BUDGET: usize = 1 << 20;
const GL_ORDER: usize = 16;
const MAX_DEPTH: u32 = 30;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sign {
    Plus,
    Minus,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PhaseKind {
    /// `xi j x^n`
    Single { j: u32, n: u32 },
    /// `xi (j x^n +- k x^m)`
    Pair { j: u32, k: u32, n: u32, m: u32, sign: Sign },
}

/// A phase together with its integration domain `[alpha, beta]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseSpec {
    pub kind: PhaseKind,
    pub xi: f64,
    pub alpha: f64,
    pub beta: f64,
}

impl PhaseSpec {
    pub fn new(kind: PhaseKind, xi: f64, alpha: f64, beta: f64) -> Result<Self> {
        let p = PhaseSpec { kind, xi, alpha, beta };
        p.validate()?;
        Ok(p)
    }

    pub fn single(j: u32, n: u32, xi: f64, alpha: f64, beta: f64) -> Result<Self> {
        PhaseSpec::new(PhaseKind::Single { j, n }, xi, alpha, beta)
    }

    #[allow(clippy::too_many_arguments)]
    pub fn pair(j: u32, k: u32, n: u32, m: u32, sign: Sign, xi: f64, alpha: f64, beta: f64) -> Result<Self> {
        PhaseSpec::new(PhaseKind::Pair { j, k, n, m, sign }, xi, alpha, beta)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.xi.is_finite() && self.xi > 0.0) {
            return Err(invalid("xi must be positive"));
        }
        if !(self.alpha.is_finite() && self.beta.is_finite() && 0.0 <= self.alpha && self.alpha < self.beta) {
            return Err(invalid(format!("need 0 <= alpha < beta, got [{}, {}]", self.alpha, self.beta)));
        }
        match self.kind {
            PhaseKind::Single { j, n } => {
                if j == 0 || n == 0 {
                    return Err(invalid("j and n must be positive"));
                }
            }
            PhaseKind::Pair { j, k, n, m, .. } => {
                if j == 0 || k == 0 || n == 0 || m == 0 {
                    return Err(invalid("j, k, n and m must be positive"));
                }
            }
        }
        Ok(())
    }

    /// Same phase on another domain.
    pub fn on(&self, alpha: f64, beta: f64) -> Result<Self> {
        PhaseSpec::new(self.kind, self.xi, alpha, beta)
    }

    /// `(coefficient, power)` pairs of the phase polynomial, without `xi`.
    fn terms(&self) -> [(f64, i32); 2] {
        match self.kind {
            PhaseKind::Single { j, n } => [(j as f64, n as i32), (0.0, 0)],
            PhaseKind::Pair { j, k, n, m, sign } => {
                let s = if sign == Sign::Plus { 1.0 } else { -1.0 };
                [(j as f64, n as i32), (s * k as f64, m as i32)]
            }
        }
    }

    /// `psi(x)`; the integrand is `e^{2 pi i psi}`.
    pub fn psi(&self, x: f64) -> f64 {
        self.xi * self.terms().iter().map(|&(c, p)| if c == 0.0 { 0.0 } else { c * x.powi(p) }).sum::<f64>()
    }

    pub fn psi_prime(&self, x: f64) -> f64 {
        self.xi
            * self
                .terms()
                .iter()
                .map(|&(c, p)| if c == 0.0 || p == 0 { 0.0 } else { c * p as f64 * x.powi(p - 1) })
                .sum::<f64>()
    }

    pub fn psi_second(&self, x: f64) -> f64 {
        self.xi
            * self
                .terms()
                .iter()
                .map(|&(c, p)| if c == 0.0 || p < 2 { 0.0 } else { c * (p * (p - 1)) as f64 * x.powi(p - 2) })
                .sum::<f64>()
    }

    /// Upper bound of `|psi'|` on `[0, x]`, nondecreasing in `x`.
    fn derivative_envelope(&self, x: f64) -> f64 {
        self.xi
            * self
                .terms()
                .iter()
                .map(|&(c, p)| if c == 0.0 || p == 0 { 0.0 } else { c.abs() * p as f64 * x.powi(p - 1) })
                .sum::<f64>()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertifiedIntegral {
    pub re: f64,
    pub im: f64,
    pub error_bound: f64,
    pub evaluations: usize,
}

impl CertifiedIntegral {
    pub fn abs(&self) -> f64 {
        self.re.hypot(self.im)
    }
}

fn gauss_legendre() -> &'static ([f64; GL_ORDER], [f64; GL_ORDER]) {
    static RULE: OnceLock<([f64; GL_ORDER], [f64; GL_ORDER])> = OnceLock::new();
    RULE.get_or_init(|| {
        let n = GL_ORDER;
        let mut nodes = [0.0; GL_ORDER];
        let mut weights = [0.0; GL_ORDER];
        for i in 0..n {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            nodes[i] = x;
            weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
        }
        (nodes, weights)
    })
}

struct Integrator<'a> {
    phase: &'a PhaseSpec,
    evaluations: usize,
}

impl Integrator<'_> {
    fn panel(&mut self, a: f64, b: f64) -> (f64, f64) {
        let (nodes, weights) = gauss_legendre();
        let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
        let (mut re, mut im) = (0.0, 0.0);
        for (t, w) in nodes.iter().zip(weights) {
            let (s, c) = (2.0 * PI * self.phase.psi(mid + half * t)).sin_cos();
            re += w * c;
            im += w * s;
        }
        self.evaluations += GL_ORDER;
        (re * half, im * half)
    }

    /// Adaptive bisection on one panel; returns `(re, im, err)`.
    fn adapt(&mut self, a: f64, b: f64, coarse: (f64, f64), tol: f64, depth: u32) -> Result<(f64, f64, f64)> {
        let m = 0.5 * (a + b);
        let left = self.panel(a, m);
        let right = self.panel(m, b);
        let fine = (left.0 + right.0, left.1 + right.1);
        let err = (fine.0 - coarse.0).hypot(fine.1 - coarse.1);
        if err <= tol || depth >= MAX_DEPTH {
            return Ok((fine.0, fine.1, err));
        }
        if self.evaluations > NODE_BUDGET {
            return Err(LabError::QuadratureBudget { budget: NODE_BUDGET, achieved: err });
        }
        let l = self.adapt(a, m, left, 0.5 * tol, depth + 1)?;
        let r = self.adapt(m, b, right, 0.5 * tol, depth + 1)?;
        Ok((l.0 + r.0, l.1 + r.1, l.2 + r.2))
    }
}

/// Adaptive Gauss-Legendre quadrature of `e^{2 pi i psi}` over the phase's
/// domain. Panels are no wider than a quarter period of the local phase
/// derivative; each is refined until the two-level difference meets its
/// share of `tol`.
pub fn osc_integral(phase: &PhaseSpec, tol: f64) -> Result<CertifiedIntegral> {
    phase.validate()?;
    if !(tol > 0.0 && tol <= 1e-3) {
        return Err(invalid(format!("tolerance {tol:e} outside (0, 1e-3]")));
    }
    let (alpha, beta) = (phase.alpha, phase.beta);
    let total = beta - alpha;
    let mut it = Integrator { phase, evaluations: 0 };
    let (mut re, mut im, mut err) = (0.0, 0.0, 0.0);
    let mut u = alpha;
    while u < beta {
        let mut w = beta - u;
        for _ in 0..50 {
            let env = phase.derivative_envelope((u + w).min(beta));
            let limit = if env > 0.0 { 0.25 / env } else { f64::INFINITY };
            if w <= limit {
                break;
            }
            w = limit;
        }
        let v = if u + w >= beta || (beta - (u + w)) < 1e-14 * total { beta } else { u + w };
        let coarse = it.panel(u, v);
        let (pr, pi, pe) = it.adapt(u, v, coarse, tol * (v - u) / total, 0)?;
        re += pr;
        im += pi;
        err += pe;
        if it.evaluations > NODE_BUDGET {
            return Err(LabError::QuadratureBudget { budget: NODE_BUDGET, achieved: err });
        }
        u = v;
    }
    // Floating-point accumulation allowance.
    let rounding = 64.0 * f64::EPSILON * total * (1.0 + it.evaluations as f64).sqrt();
    Ok(CertifiedIntegral { re, im, error_bound: err + rounding, evaluations: it.evaluations })
}

/// One row of the verifier output.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CaseVerdict {
    pub case_id: usize,
    pub kind: String,
    pub bound: f64,
    pub integral_abs: f64,
    pub error_bound: f64,
    pub pass: bool,
}

pub const VERDICT_CSV_HEADER: &str = "case_id,kind,bound,integral_abs,error_bound,pass";

impl CaseVerdict {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{:.16e},{:.16e},{:.16e},{}",
            self.case_id, self.kind, self.bound, self.integral_abs, self.error_bound, self.pass
        )
    }
}

/// Quadrature tolerance used by the bound checks, relative to their own tolerance.
fn quad_tol(tol: f64) -> f64 {
    (tol * 1e-3).clamp(1e-14, 1e-3)
}

fn cosine_verdict(phase: &PhaseSpec, bound: f64, tol: f64, kind: &str) -> Result<CaseVerdict> {
    let integral = osc_integral(phase, quad_tol(tol))?;
    let integral_abs = integral.re.abs();
    Ok(CaseVerdict {
        case_id: 0,
        kind: kind.to_string(),
        bound,
        integral_abs,
        error_bound: integral.error_bound,
        pass: integral_abs + integral.error_bound <= bound + tol,
    })
}

/// `1 / (j xi n alpha^(n-1))`.
pub fn lemma3_bound(j: u32, xi: f64, n: u32, alpha: f64) -> f64 {
    1.0 / (j as f64 * xi * n as f64 * alpha.powi(n as i32 - 1))
}

/// Checks `|int cos(2 pi j xi x^n)| <= lemma3_bound + tol` on the phase's domain.
pub fn lemma3_check(phase: &PhaseSpec, tol: f64) -> Result<CaseVerdict> {
    phase.validate()?;
    let PhaseKind::Single { j, n } = phase.kind else {
        return Err(LabError::Precondition("lemma3_check needs a single-term phase".into()));
    };
    if phase.alpha <= 1.0 {
        return Err(LabError::Precondition("lemma3_check needs alpha > 1".into()));
    }
    cosine_verdict(phase, lemma3_bound(j, phase.xi, n, phase.alpha), tol, "lemma3")
}

/// `1 / (xi max(m,n) alpha^(max(m,n)-1))`.
pub fn lemma4_bound(xi: f64, n: u32, m: u32, alpha: f64) -> f64 {
    let top = n.max(m);
    1.0 / (xi * top as f64 * alpha.powi(top as i32 - 1))
}

/// Checks the two-term bound for plus-sign phases with `m != n`.
pub fn lemma4_check(phase: &PhaseSpec, tol: f64) -> Result<CaseVerdict> {
    phase.validate()?;
    let PhaseKind::Pair { n, m, sign, .. } = phase.kind else {
        return Err(LabError::Precondition("lemma4_check needs a two-term phase".into()));
    };
    if sign != Sign::Plus {
        return Err(LabError::Precondition("lemma4_check only covers the plus sign".into()));
    }
    if m == n {
        return Err(LabError::Precondition("lemma4_check needs m != n".into()));
    }
    if phase.alpha <= 1.0 {
        return Err(LabError::Precondition("lemma4_check needs alpha > 1".into()));
    }
    cosine_verdict(phase, lemma4_bound(phase.xi, n, m, phase.alpha), tol, "lemma4")
}

/// Checks `|int e^{2 pi i psi}| <= 1/gamma` on every piece of the domain
/// where `psi'` is monotone and nonvanishing, with `gamma` the smaller
/// endpoint value of `|psi'|`.
pub fn vdc_check(phase: &PhaseSpec, tol: f64) -> Result<Vec<CaseVerdict>> {
    phase.validate()?;
    let mut cuts = vec![phase.alpha];
    for c in critical_points(phase) {
        if c > phase.alpha && c < phase.beta {
            cuts.push(c);
        }
    }
    cuts.push(phase.beta);
    cuts.sort_by(f64::total_cmp);
    let mut out = Vec::new();
    for w in cuts.windows(2) {
        let (a, b) = (w[0], w[1]);
        let gamma = phase.psi_prime(a).abs().min(phase.psi_prime(b).abs());
        if gamma <= 0.0 || b - a <= 0.0 {
            continue;
        }
        let integral = osc_integral(&phase.on(a, b)?, quad_tol(tol))?;
        let bound = 1.0 / gamma;
        out.push(CaseVerdict {
            case_id: 0,
            kind: "vdc".into(),
            bound,
            integral_abs: integral.abs(),
            error_bound: integral.error_bound,
            pass: integral.abs() <= bound + integral.error_bound + tol,
        });
    }
    Ok(out)
}

/// Zeros of `psi'` and `psi''` on `x > 0`, where they have closed forms.
fn critical_points(phase: &PhaseSpec) -> Vec<f64> {
    match phase.kind {
        PhaseKind::Pair { j, k, n, m, sign: Sign::Minus } if n != m => {
            let (hi_c, hi_p, lo_c, lo_p) =
                if n > m { (j as f64, n as f64, k as f64, m as f64) } else { (k as f64, m as f64, j as f64, n as f64) };
            let e = 1.0 / (hi_p - lo_p);
            let mut v = vec![(lo_c * lo_p / (hi_c * hi_p)).powf(e)];
            if lo_p > 1.0 {
                v.push((lo_c * lo_p * (lo_p - 1.0) / (hi_c * hi_p * (hi_p - 1.0))).powf(e));
            }
            v
        }
        _ => Vec::new(),
    }
}

/// Closed interval `[lo, hi]`; the partition treats them as half-open for disjointness.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Span {
    pub lo: f64,
    pub hi: f64,
}

impl Span {
    fn make(lo: f64, hi: f64) -> Option<Span> {
        (lo < hi).then_some(Span { lo, hi })
    }

    pub fn length(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, a: f64, b: f64) -> bool {
        self.lo <= a && b <= self.hi
    }
}

/// The constructive three-interval partition around the stationary point
/// `x1` of `xi (j x^n - k x^m)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartitionResult {
    pub j: u32,
    pub k: u32,
    pub m: u32,
    pub n: u32,
    pub xi: f64,
    pub eta: f64,
    pub a: f64,
    pub b: f64,
    /// Zero of the phase derivative.
    pub x1: f64,
    /// Zero of the second derivative; 0 when `m = 1`.
    pub x2: f64,
    /// Excluded band `[x1 (1 - eta), x1 (1 + eta)]`.
    pub band: Span,
    pub intervals: [Option<Span>; 3],
    pub excluded_measure: f64,
}

impl PartitionResult {
    /// `1 / (xi eta m alpha^(m-1))`.
    pub fn guaranteed_bound(&self, alpha: f64) -> f64 {
        1.0 / (self.xi * self.eta * self.m as f64 * alpha.powi(self.m as i32 - 1))
    }

    pub fn measure_limit(&self) -> f64 {
        2.0 * self.b * self.eta
    }

    /// Index of the interval containing `[alpha, beta]`.
    pub fn containing(&self, alpha: f64, beta: f64) -> Option<usize> {
        self.intervals.iter().position(|s| s.is_some_and(|s| s.contains(alpha, beta)))
    }

    /// Nonempty intervals are ordered and do not overlap (as half-open spans).
    pub fn is_disjoint(&self) -> bool {
        let spans: Vec<Span> = self.intervals.iter().flatten().copied().collect();
        spans.windows(2).all(|w| w[0].hi <= w[1].lo)
    }

    pub fn phase(&self, alpha: f64, beta: f64) -> Result<PhaseSpec> {
        PhaseSpec::pair(self.j, self.k, self.n, self.m, Sign::Minus, self.xi, alpha, beta)
    }

    /// `|psi'(x1)| / (2 pi xi j n x1^(n-1))`, the relative residual at the stationary point.
    pub fn stationary_residual(&self) -> f64 {
        let p = self.phase(self.a, self.b).expect("validated at construction");
        let scale = self.xi * self.j as f64 * self.n as f64 * self.x1.powi(self.n as i32 - 1);
        p.psi_prime(self.x1).abs() / scale
    }

    /// On every interval `psi'` and `psi''` keep one sign on a grid of
    /// `samples` interior points.
    pub fn is_monotone_on_intervals(&self, samples: usize) -> bool {
        let p = self.phase(self.a, self.b).expect("validated at construction");
        self.intervals.iter().flatten().all(|s| {
            let signs: Vec<(bool, bool)> = (0..samples)
                .map(|i| {
                    let t = s.lo + (i as f64 + 0.5) / samples as f64 * s.length();
                    (p.psi_prime(t) > 0.0, p.psi_second(t) > 0.0)
                })
                .collect();
            let nonzero = (0..samples).all(|i| {
                let t = s.lo + (i as f64 + 0.5) / samples as f64 * s.length();
                p.psi_prime(t) != 0.0
            });
            nonzero && signs.windows(2).all(|w| w[0] == w[1])
        })
    }
}

#[allow(clippy::too_many_arguments)]
pub fn lemma5_partition(j: u32, k: u32, m: u32, n: u32, xi: f64, eta: f64, a: f64, b: f64) -> Result<PartitionResult> {
    if j == 0 || k == 0 || m == 0 {
        return Err(invalid("j, k and m must be positive"));
    }
    if m >= n {
        return Err(invalid(format!("need m < n, got m = {m}, n = {n}")));
    }
    if !(eta.is_finite() && eta > 0.0) {
        return Err(invalid("eta must be positive"));
    }
    if !(xi.is_finite() && xi > 0.0) {
        return Err(invalid("xi must be positive"));
    }
    if !(a.is_finite() && b.is_finite() && 1.0 < a && a < b) {
        return Err(invalid(format!("need 1 < A < B, got [{a}, {b}]")));
    }
    let (jf, kf, mf, nf) = (j as f64, k as f64, m as f64, n as f64);
    let e = 1.0 / (nf - mf);
    let x1 = (kf * mf / (jf * nf)).powf(e);
    let x2 = if m == 1 { 0.0 } else { (kf * mf * (mf - 1.0) / (jf * nf * (nf - 1.0))).powf(e) };
    let band = Span { lo: x1 * (1.0 - eta), hi: x1 * (1.0 + eta) };
    let i1 = Span::make(a, b.min(x2).min(band.lo));
    let i2 = Span::make(a.max(x2), b.min(band.lo));
    let i3 = Span::make(a.max(band.hi), b);
    let intervals = [i1, i2, i3];
    let covered: f64 = intervals.iter().flatten().map(Span::length).sum();
    let excluded_measure = ((b - a) - covered).max(0.0);
    Ok(PartitionResult { j, k, m, n, xi, eta, a, b, x1, x2, band, intervals, excluded_measure })
}

/// Checks `|int_alpha^beta cos(2 pi xi (j x^n - k x^m))| <= 1/(xi eta m alpha^(m-1)) + tol`
/// for `[alpha, beta]` inside one of the partition intervals.
pub fn lemma5_check(partition: &PartitionResult, alpha: f64, beta: f64, tol: f64) -> Result<CaseVerdict> {
    if alpha >= beta || alpha.is_nan() || beta.is_nan() || partition.containing(alpha, beta).is_none() {
        return Err(LabError::Precondition(format!(
            "[{alpha}, {beta}] is not contained in any partition interval"
        )));
    }
    let phase = partition.phase(alpha, beta)?;
    cosine_verdict(&phase, partition.guaranteed_bound(alpha), tol, "lemma5")
}

/// Uniform draw in `[lo, hi)`.
fn uniform(rng: &mut impl Rng, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * rng.gen::<f64>()
}

fn random_subinterval(rng: &mut impl Rng, lo: f64, hi: f64) -> (f64, f64) {
    let s = uniform(rng, lo, hi);
    let t = uniform(rng, lo, hi);
    if s < t {
        (s, t)
    } else if t < s {
        (t, s)
    } else {
        (lo, hi)
    }
}

/// Randomized single-term phases on subintervals of `[a, b]`.
pub fn random_lemma3_cases(seed: u64, count: usize, a: f64, b: f64) -> Vec<PhaseSpec> {
    let mut rng = stream_rng(seed, 3);
    (0..count)
        .map(|_| {
            let j = rng.gen_range(1..=4);
            let n = rng.gen_range(1..=6);
            let xi = uniform(&mut rng, 0.5, 2.0);
            let (lo, hi) = random_subinterval(&mut rng, a, b);
            PhaseSpec::single(j, n, xi, lo, hi).expect("generated parameters are valid")
        })
        .collect()
}

/// Randomized plus-sign two-term phases with `m != n`.
pub fn random_lemma4_cases(seed: u64, count: usize, a: f64, b: f64) -> Vec<PhaseSpec> {
    let mut rng = stream_rng(seed, 4);
    (0..count)
        .map(|_| {
            let j = rng.gen_range(1..=4);
            let k = rng.gen_range(1..=4);
            let n = rng.gen_range(1..=6);
            let m = loop {
                let m = rng.gen_range(1..=6);
                if m != n {
                    break m;
                }
            };
            let xi = uniform(&mut rng, 0.5, 2.0);
            let (lo, hi) = random_subinterval(&mut rng, a, b);
            PhaseSpec::pair(j, k, n, m, Sign::Plus, xi, lo, hi).expect("generated parameters are valid")
        })
        .collect()
}

/// Randomized partition parameters `(j, k, m, n, xi, eta)`.
pub fn random_lemma5_params(seed: u64, count: usize) -> Vec<(u32, u32, u32, u32, f64, f64)> {
    let mut rng = stream_rng(seed, 5);
    (0..count)
        .map(|_| {
            let m = rng.gen_range(1..=4);
            let n = rng.gen_range(m + 1..=6);
            let j = rng.gen_range(1..=5);
            let k = rng.gen_range(1..=8);
            let xi = uniform(&mut rng, 0.5, 2.0);
            let eta = uniform(&mut rng, 0.01, 0.2);
            (j, k, m, n, xi, eta)
        })
        .collect()
}

/// Random `[alpha, beta]` inside a randomly chosen nonempty interval,
/// weighted by length.
pub fn random_admissible_subintervals(p: &PartitionResult, seed: u64, stream: u64, count: usize) -> Vec<(f64, f64)> {
    let spans: Vec<Span> = p.intervals.iter().flatten().copied().collect();
    if spans.is_empty() {
        return Vec::new();
    }
    let total: f64 = spans.iter().map(Span::length).sum();
    let mut rng = stream_rng(seed, stream);
    (0..count)
        .map(|_| {
            let mut pick = uniform(&mut rng, 0.0, total);
            let mut chosen = spans[spans.len() - 1];
            for s in &spans {
                if pick < s.length() {
                    chosen = *s;
                    break;
                }
                pick -= s.length();
            }
            random_subinterval(&mut rng, chosen.lo, chosen.hi)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_rule_integrates_polynomials() {
        let (x, w) = gauss_legendre();
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
        let m30: f64 = x.iter().zip(w).map(|(x, w)| w * x.powi(30)).sum();
        assert!((m30 - 2.0 / 31.0).abs() < 1e-14);
    }

    #[test]
    fn full_period_vanishes() {
        let p = PhaseSpec::single(1, 1, 1.0, 0.0, 1.0).unwrap();
        let r = osc_integral(&p, 1e-10).unwrap();
        assert!(r.abs() < 1e-10, "{r:?}");
        assert!(r.error_bound >= 0.0 && r.error_bound.is_finite());
    }

    #[test]
    fn quadratic_phase_against_fresnel_style_reference() {
        // psi = x^2 on [1.1, 2.1]; reference from a dense composite midpoint sum.
        let p = PhaseSpec::single(1, 2, 1.0, 1.1, 2.1).unwrap();
        let r = osc_integral(&p, 1e-10).unwrap();
        let n = 2_000_000;
        let h = 1.0 / n as f64;
        let (mut re, mut im) = (0.0, 0.0);
        for i in 0..n {
            let x = 1.1 + (i as f64 + 0.5) * h;
            let (s, c) = (2.0 * PI * x * x).sin_cos();
            re += c * h;
            im += s * h;
        }
        assert!((r.re - re).abs() < 1e-8 && (r.im - im).abs() < 1e-8);
        assert!(r.abs() <= 1.0 / 2.2 + 1e-10);
    }

    #[test]
    fn conjugate_symmetry() {
        // -psi for psi = x^3 - x^2 is x^2 - x^3: swap roles through the pair sign.
        let tol = 1e-9;
        let p = PhaseSpec::pair(1, 1, 3, 2, Sign::Minus, 1.0, 1.1, 2.1).unwrap();
        let q = PhaseSpec::pair(1, 1, 2, 3, Sign::Minus, 1.0, 1.1, 2.1).unwrap();
        let a = osc_integral(&p, tol).unwrap();
        let b = osc_integral(&q, tol).unwrap();
        assert!((a.re - b.re).abs() <= 2.0 * tol && (a.im + b.im).abs() <= 2.0 * tol);
    }

    #[test]
    fn budget_is_enforced() {
        let p = PhaseSpec::single(1000, 12, 2.0, 1.1, 2.1).unwrap();
        assert!(matches!(osc_integral(&p, 1e-6), Err(LabError::QuadratureBudget { .. })));
        assert!(osc_integral(&PhaseSpec::single(1, 1, 1.0, 0.0, 1.0).unwrap(), 0.1).is_err());
    }

    #[test]
    fn bound_formulas() {
        assert!((lemma3_bound(1, 1.0, 2, 1.1) - 0.454_545_454_545_454_5).abs() < 1e-15);
        assert!((lemma3_bound(3, 2.0, 5, 1.5) - 1.0 / 151.875).abs() < 1e-15);
        assert!((lemma4_bound(1.0, 3, 2, 1.1) - 0.275_482_093_663_911_8).abs() < 1e-15);
        assert!((lemma4_bound(1.0, 10, 1, 1.5) - 0.002_601_229_487_374_892).abs() < 1e-15);
    }

    #[test]
    fn lemma3_and_lemma4_examples() {
        let v = lemma3_check(&PhaseSpec::single(1, 2, 1.0, 1.1, 2.1).unwrap(), 1e-6).unwrap();
        assert!(v.pass, "{v:?}");
        let v = lemma4_check(&PhaseSpec::pair(1, 1, 3, 2, Sign::Plus, 1.0, 1.1, 2.1).unwrap(), 1e-6).unwrap();
        assert!(v.pass && v.integral_abs < v.bound, "{v:?}");
        let minus = PhaseSpec::pair(1, 1, 3, 2, Sign::Minus, 1.0, 1.1, 2.1).unwrap();
        assert!(matches!(lemma4_check(&minus, 1e-6), Err(LabError::Precondition(_))));
        let equal = PhaseSpec::pair(1, 1, 3, 3, Sign::Plus, 1.0, 1.1, 2.1).unwrap();
        assert!(lemma4_check(&equal, 1e-6).is_err());
    }

    #[test]
    fn partition_closed_forms() {
        let p = lemma5_partition(1, 3, 1, 2, 1.0, 0.05, 1.1, 2.1).unwrap();
        assert_eq!((p.x1, p.x2), (1.5, 0.0));
        assert!(p.intervals[0].is_none());

        let p = lemma5_partition(1, 1, 2, 3, 1.0, 0.05, 1.1, 2.1).unwrap();
        assert!((p.x1 - 2.0 / 3.0).abs() < 1e-15 && (p.x2 - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(p.intervals[2], Some(Span { lo: 1.1, hi: 2.1 }));
        assert!(p.intervals[0].is_none() && p.intervals[1].is_none());
        assert_eq!(p.excluded_measure, 0.0);

        let p = lemma5_partition(3, 7, 2, 5, 1.0, 0.01, 1.1, 2.1).unwrap();
        assert!((p.x1 - 0.977_264_805_918_825_1).abs() < 1e-14);
        let covered: f64 = p.intervals.iter().flatten().map(Span::length).sum();
        assert!(covered >= 1.0 - 2.0 * 2.1 * 0.01);
        assert!(p.is_disjoint());
    }

    #[test]
    fn partition_with_interior_stationary_point() {
        let p = lemma5_partition(1, 3, 1, 2, 1.0, 0.05, 1.1, 2.1).unwrap();
        assert!(p.is_disjoint());
        assert!(p.excluded_measure <= p.measure_limit());
        assert!((p.excluded_measure - 0.15).abs() < 1e-12);
        assert!(p.stationary_residual() < 1e-10);
        assert!(p.is_monotone_on_intervals(1000));
        let v = lemma5_check(&p, 1.6, 2.0, 1e-6).unwrap();
        assert_eq!(v.bound, 20.0);
        assert!(v.pass);
        assert!(matches!(lemma5_check(&p, 1.4, 1.6, 1e-6), Err(LabError::Precondition(_))));
    }

    #[test]
    fn tight_partition_bound() {
        // m = 4, eta = 0.1, alpha = 1.5 gives 1/(0.1 * 4 * 1.5^3).
        let p = lemma5_partition(1, 2, 4, 6, 1.0, 0.1, 1.1, 2.1).unwrap();
        assert!((p.guaranteed_bound(1.5) - 0.740_740_740_740_740_7).abs() < 1e-12);
        for (lo, hi) in random_admissible_subintervals(&p, 9, 0, 10) {
            assert!(lemma5_check(&p, lo, hi, 1e-6).unwrap().pass);
        }
    }

    #[test]
    fn vdc_pieces() {
        // x1 = 8/3 lies outside the domain, x2 = 4/3 splits it in two.
        let p = PhaseSpec::pair(1, 4, 3, 2, Sign::Minus, 1.0, 1.1, 2.1).unwrap();
        let v = vdc_check(&p, 1e-6).unwrap();
        assert_eq!(v.len(), 2);
        assert!(v.iter().all(|c| c.pass));
    }

    #[test]
    fn partition_rejects_bad_input() {
        assert!(lemma5_partition(1, 1, 3, 3, 1.0, 0.1, 1.1, 2.1).is_err());
        assert!(lemma5_partition(1, 1, 1, 3, 1.0, 0.0, 1.1, 2.1).is_err());
        assert!(lemma5_partition(1, 1, 1, 3, 1.0, 0.1, 1.0, 2.1).is_err());
    }
}
