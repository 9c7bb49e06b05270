//! Period-1, mean-zero functions of bounded variation: centered indicators
//! `1_[a,b)(t) - (b - a)` and trigonometric polynomials without constant term.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Largest total variation admitted.
pub const MAX_VARIATION: f64 = 2.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum PeriodicFunction {
    #[serde(rename = "indicator")]
    CenteredIndicator { a: f64, b: f64 },
    /// `sum_j cos[j-1] cos(2 pi j t) + sin[j-1] sin(2 pi j t)`
    #[serde(rename = "trig")]
    TrigPolynomial {
        #[serde(rename = "cos")]
        cos: Vec<f64>,
        #[serde(rename = "sin")]
        sin: Vec<f64>,
    },
}

/// Fourier coefficients `a_j, b_j` for `j = 1..=degree`.
#[derive(Clone, Debug, PartialEq)]
pub struct FourierExpansion {
    pub cos: Vec<f64>,
    pub sin: Vec<f64>,
}

impl FourierExpansion {
    pub fn degree(&self) -> usize {
        self.cos.len()
    }

    pub fn into_function(self) -> PeriodicFunction {
        PeriodicFunction::TrigPolynomial { cos: self.cos, sin: self.sin }
    }
}

fn frac(t: f64) -> f64 {
    let f = t - t.floor();
    if f >= 1.0 {
        0.0
    } else {
        f
    }
}

impl PeriodicFunction {
    pub fn indicator(a: f64, b: f64) -> Result<Self> {
        let f = PeriodicFunction::CenteredIndicator { a, b };
        f.validate()?;
        Ok(f)
    }

    pub fn trig(cos: Vec<f64>, sin: Vec<f64>) -> Result<Self> {
        let f = PeriodicFunction::TrigPolynomial { cos, sin };
        f.validate()?;
        Ok(f)
    }

    /// Checks the variant's own constraints; admissibility (variation at
    /// most 2) is a separate check, see [`PeriodicFunction::is_admissible`].
    pub fn validate(&self) -> Result<()> {
        match self {
            PeriodicFunction::CenteredIndicator { a, b } => {
                if !(0.0 <= *a && a < b && *b <= 1.0) {
                    return Err(invalid(format!("indicator needs 0 <= a < b <= 1, got [{a}, {b})")));
                }
            }
            PeriodicFunction::TrigPolynomial { cos, sin } => {
                if cos.iter().chain(sin).any(|c| !c.is_finite()) {
                    return Err(invalid("trigonometric coefficients must be finite"));
                }
            }
        }
        Ok(())
    }

    pub fn degree(&self) -> Option<usize> {
        match self {
            PeriodicFunction::CenteredIndicator { .. } => None,
            PeriodicFunction::TrigPolynomial { cos, sin } => Some(cos.len().max(sin.len())),
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        match self {
            PeriodicFunction::CenteredIndicator { a, b } => {
                let u = frac(t);
                let inside = if *a <= u && u < *b { 1.0 } else { 0.0 };
                inside - (b - a)
            }
            PeriodicFunction::TrigPolynomial { cos, sin } => {
                let u = frac(t);
                let deg = cos.len().max(sin.len());
                let mut s = 0.0;
                for j in 1..=deg {
                    let (sj, cj) = (2.0 * PI * j as f64 * u).sin_cos();
                    s += cos.get(j - 1).copied().unwrap_or(0.0) * cj + sin.get(j - 1).copied().unwrap_or(0.0) * sj;
                }
                s
            }
        }
    }

    fn derivative(&self, t: f64) -> f64 {
        match self {
            PeriodicFunction::CenteredIndicator { .. } => 0.0,
            PeriodicFunction::TrigPolynomial { cos, sin } => {
                let deg = cos.len().max(sin.len());
                let mut s = 0.0;
                for j in 1..=deg {
                    let w = 2.0 * PI * j as f64;
                    let (sj, cj) = (w * t).sin_cos();
                    s += w * (sin.get(j - 1).copied().unwrap_or(0.0) * cj - cos.get(j - 1).copied().unwrap_or(0.0) * sj);
                }
                s
            }
        }
    }

    /// Total variation over one period.
    pub fn variation(&self) -> f64 {
        match self {
            PeriodicFunction::CenteredIndicator { a, b } => {
                if *a == 0.0 && *b == 1.0 {
                    0.0
                } else {
                    2.0
                }
            }
            PeriodicFunction::TrigPolynomial { .. } => self.trig_variation(),
        }
    }

    /// Sum of `|f|` increments between consecutive critical points, located
    /// by sign changes of `f'` on a grid and refined by bisection.
    fn trig_variation(&self) -> f64 {
        let deg = self.degree().unwrap_or(0);
        if deg == 0 {
            return 0.0;
        }
        let nodes = 64 * deg + 64;
        let h = 1.0 / nodes as f64;
        let mut extrema = Vec::new();
        let mut prev = self.derivative(0.0);
        for i in 1..=nodes {
            let t = i as f64 * h;
            let cur = self.derivative(t);
            if prev == 0.0 {
                extrema.push(t - h);
            } else if prev * cur < 0.0 {
                let (mut lo, mut hi) = (t - h, t);
                for _ in 0..60 {
                    let mid = 0.5 * (lo + hi);
                    if self.derivative(mid) * prev > 0.0 {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                extrema.push(0.5 * (lo + hi));
            }
            prev = cur;
        }
        if extrema.is_empty() {
            return 0.0;
        }
        let mut total = 0.0;
        for w in extrema.windows(2) {
            total += (self.eval(w[1]) - self.eval(w[0])).abs();
        }
        total + (self.eval(extrema[0] + 1.0) - self.eval(*extrema.last().unwrap())).abs()
    }

    /// Mean zero holds by construction; admissible means variation `<= 2`.
    pub fn is_admissible(&self) -> bool {
        self.validate().is_ok() && self.variation() <= MAX_VARIATION + 1e-9
    }

    /// Coefficients up to degree `d`. Indicators use the closed forms
    /// `a_j = (sin 2 pi j b - sin 2 pi j a) / (pi j)` and
    /// `b_j = (cos 2 pi j a - cos 2 pi j b) / (pi j)`.
    pub fn fourier_coefficients(&self, d: usize) -> Result<FourierExpansion> {
        if d < 1 {
            return Err(invalid("degree must be at least 1"));
        }
        self.validate()?;
        Ok(match self {
            PeriodicFunction::CenteredIndicator { a, b } => {
                let mut cos = Vec::with_capacity(d);
                let mut sin = Vec::with_capacity(d);
                for j in 1..=d {
                    let w = 2.0 * PI * j as f64;
                    let (sa, ca) = (w * a).sin_cos();
                    let (sb, cb) = (w * b).sin_cos();
                    let pj = PI * j as f64;
                    cos.push((sb - sa) / pj);
                    sin.push((ca - cb) / pj);
                }
                FourierExpansion { cos, sin }
            }
            PeriodicFunction::TrigPolynomial { cos, sin } => {
                let pick = |v: &Vec<f64>, j: usize| v.get(j).copied().unwrap_or(0.0);
                FourierExpansion {
                    cos: (0..d).map(|j| pick(cos, j)).collect(),
                    sin: (0..d).map(|j| pick(sin, j)).collect(),
                }
            }
        })
    }

    /// Degree-`d` Fourier partial sum.
    pub fn partial_sum(&self, d: usize) -> Result<PeriodicFunction> {
        Ok(self.fourier_coefficients(d)?.into_function())
    }

    /// `f(t) - p_d(t)`.
    pub fn remainder_eval(&self, d: usize, t: f64) -> Result<f64> {
        Ok(self.eval(t) - self.partial_sum(d)?.eval(t))
    }

    /// L2 norm over one period.
    pub fn l2_norm(&self) -> f64 {
        match self {
            PeriodicFunction::CenteredIndicator { a, b } => {
                let len = b - a;
                (len * (1.0 - len)).max(0.0).sqrt()
            }
            PeriodicFunction::TrigPolynomial { cos, sin } => {
                (0.5 * cos.iter().chain(sin).map(|c| c * c).sum::<f64>()).sqrt()
            }
        }
    }
}
