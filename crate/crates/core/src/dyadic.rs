//! Exact non-negative dyadic rationals and outward-rounded enclosures.
//!
//! A [`Dyadic`] is `mantissa * 2^exponent` with an arbitrary-size mantissa.
//! Sums, differences and products of dyadics are exact. An [`Enclosure`]
//! holds a `[lo, hi]` pair whose products are rounded to a fixed number of
//! significant bits, `lo` toward zero and `hi` away from zero, so the exact
//! value always stays inside.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{invalid, Result};

#[derive(Clone, Debug)]
pub struct Dyadic {
    mantissa: BigUint,
    exponent: i64,
}

impl Dyadic {
    pub fn zero() -> Self {
        Dyadic { mantissa: BigUint::zero(), exponent: 0 }
    }

    pub fn from_parts(mantissa: BigUint, exponent: i64) -> Self {
        Dyadic { mantissa, exponent }.normalized()
    }

    pub fn from_u64(v: u64) -> Self {
        Dyadic::from_parts(BigUint::from(v), 0)
    }

    /// Exact conversion of a finite, non-negative `f64`.
    pub fn from_f64(v: f64) -> Result<Self> {
        if !v.is_finite() || v < 0.0 {
            return Err(invalid(format!("{v} is not a finite non-negative number")));
        }
        if v == 0.0 {
            return Ok(Dyadic::zero());
        }
        let bits = v.to_bits();
        let raw_exp = ((bits >> 52) & 0x7ff) as i64;
        let frac = bits & ((1u64 << 52) - 1);
        let (m, e) = if raw_exp == 0 {
            (frac, -1074)
        } else {
            (frac | (1u64 << 52), raw_exp - 1075)
        };
        Ok(Dyadic::from_parts(BigUint::from(m), e))
    }

    /// `num / den` rounded to `bits` fractional bits, upward when `round_up`.
    pub fn from_ratio(num: u64, den: u64, bits: u32, round_up: bool) -> Result<Self> {
        if den == 0 {
            return Err(invalid("zero denominator"));
        }
        let scaled = BigUint::from(num) << bits as usize;
        let (q, r) = scaled.div_rem(&BigUint::from(den));
        let q = if round_up && !r.is_zero() { q + 1u32 } else { q };
        Ok(Dyadic::from_parts(q, -(bits as i64)))
    }

    fn normalized(mut self) -> Self {
        if self.mantissa.is_zero() {
            self.exponent = 0;
            return self;
        }
        let tz = self.mantissa.trailing_zeros().unwrap_or(0);
        if tz > 0 {
            self.mantissa >>= tz as usize;
            self.exponent += tz as i64;
        }
        self
    }

    pub fn is_zero(&self) -> bool {
        self.mantissa.is_zero()
    }

    pub fn mantissa(&self) -> &BigUint {
        &self.mantissa
    }

    pub fn exponent(&self) -> i64 {
        self.exponent
    }

    /// Bit length of the mantissa.
    pub fn mantissa_bits(&self) -> u64 {
        self.mantissa.bits()
    }

    /// Position of the leading bit: the value lies in `[2^(m-1), 2^m)`.
    fn magnitude(&self) -> i64 {
        self.mantissa.bits() as i64 + self.exponent
    }

    pub fn to_f64(&self) -> f64 {
        if self.mantissa.is_zero() {
            return 0.0;
        }
        let bits = self.mantissa.bits() as i64;
        let shift = (bits - 64).max(0);
        let top = (&self.mantissa >> shift as usize).to_u64().unwrap_or(u64::MAX);
        // two factors so subnormal results do not underflow early
        let e = (self.exponent + shift).clamp(-2200, 2200) as i32;
        (top as f64) * 2f64.powi(e / 2) * 2f64.powi(e - e / 2)
    }

    pub fn add(&self, other: &Dyadic) -> Dyadic {
        let e = self.exponent.min(other.exponent);
        let a = &self.mantissa << (self.exponent - e) as usize;
        let b = &other.mantissa << (other.exponent - e) as usize;
        Dyadic::from_parts(a + b, e)
    }

    /// `self - other`; `None` when the result would be negative.
    pub fn checked_sub(&self, other: &Dyadic) -> Option<Dyadic> {
        let e = self.exponent.min(other.exponent);
        let a = &self.mantissa << (self.exponent - e) as usize;
        let b = &other.mantissa << (other.exponent - e) as usize;
        if a < b {
            None
        } else {
            Some(Dyadic::from_parts(a - b, e))
        }
    }

    pub fn mul(&self, other: &Dyadic) -> Dyadic {
        Dyadic::from_parts(&self.mantissa * &other.mantissa, self.exponent + other.exponent)
    }

    pub fn mul_u64(&self, k: u64) -> Dyadic {
        Dyadic::from_parts(&self.mantissa * BigUint::from(k), self.exponent)
    }

    pub fn mul_pow2(&self, k: i64) -> Dyadic {
        Dyadic { mantissa: self.mantissa.clone(), exponent: self.exponent + k }.normalized()
    }

    /// Integer part, `floor(self)`.
    pub fn floor(&self) -> BigUint {
        if self.exponent >= 0 {
            &self.mantissa << self.exponent as usize
        } else {
            &self.mantissa >> (-self.exponent) as usize
        }
    }

    /// Fractional part scaled to 64 fixed-point bits, rounded down or up.
    /// The rounded-up value may equal `2^64`.
    pub fn frac_fixed64(&self, round_up: bool) -> u128 {
        if self.exponent >= 0 || self.mantissa.is_zero() {
            return 0;
        }
        let fbits = (-self.exponent) as u64;
        let frac = if self.mantissa.bits() > fbits {
            &self.mantissa & ((BigUint::one() << fbits as usize) - 1u32)
        } else {
            self.mantissa.clone()
        };
        if fbits <= 64 {
            let v = frac.to_u128().unwrap_or(0);
            v << (64 - fbits)
        } else {
            let shift = (fbits - 64) as usize;
            let q = (&frac >> shift).to_u128().unwrap_or(0);
            if round_up && (frac.trailing_zeros().unwrap_or(u64::MAX) as usize) < shift {
                q + 1
            } else {
                q
            }
        }
    }

    /// Rounds to at most `prec` significant bits.
    pub fn round_to(&self, prec: u64, round_up: bool) -> Dyadic {
        let bits = self.mantissa.bits();
        if bits <= prec {
            return self.clone();
        }
        let shift = bits - prec;
        let mut m = &self.mantissa >> shift as usize;
        if round_up && self.mantissa.trailing_zeros().unwrap_or(u64::MAX) < shift {
            m += 1u32;
        }
        // Intentionally not normalized: keeps the hot loop free of extra shifts.
        Dyadic { mantissa: m, exponent: self.exponent + shift as i64 }
    }
}

impl PartialEq for Dyadic {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Dyadic {}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self.mantissa.is_zero(), other.mantissa.is_zero()) {
            (true, true) => return Ordering::Equal,
            (true, false) => return Ordering::Less,
            (false, true) => return Ordering::Greater,
            _ => {}
        }
        match self.magnitude().cmp(&other.magnitude()) {
            Ordering::Equal => {}
            ord => return ord,
        }
        let e = self.exponent.min(other.exponent);
        let a = &self.mantissa << (self.exponent - e) as usize;
        let b = &other.mantissa << (other.exponent - e) as usize;
        a.cmp(&b)
    }
}

impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_f64())
    }
}

/// A closed interval `[lo, hi]` of non-negative dyadics known to contain
/// an exact quantity.
#[derive(Clone, Debug)]
pub struct Enclosure {
    pub lo: Dyadic,
    pub hi: Dyadic,
}

impl Enclosure {
    pub fn exact(v: Dyadic) -> Self {
        Enclosure { lo: v.clone(), hi: v }
    }

    pub fn mul(&self, other: &Enclosure, prec: u64) -> Enclosure {
        Enclosure {
            lo: self.lo.mul(&other.lo).round_to(prec, false),
            hi: self.hi.mul(&other.hi).round_to(prec, true),
        }
    }

    /// `base^e` by binary exponentiation with outward rounding.
    pub fn pow(base: &Dyadic, e: u64, prec: u64) -> Enclosure {
        let mut result = Enclosure::exact(Dyadic::from_u64(1));
        let mut sq = Enclosure { lo: base.round_to(prec, false), hi: base.round_to(prec, true) };
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul(&sq, prec);
            }
            e >>= 1;
            if e > 0 {
                sq = sq.mul(&sq, prec);
            }
        }
        result
    }

    /// True when `lo` and `hi` have different integer parts.
    pub fn straddles_integer(&self) -> bool {
        self.lo.floor() != self.hi.floor()
    }

    pub fn width(&self) -> f64 {
        self.hi.checked_sub(&self.lo).map(|d| d.to_f64()).unwrap_or(f64::INFINITY)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(v: f64) -> Dyadic {
        Dyadic::from_f64(v).unwrap()
    }

    #[test]
    fn f64_roundtrip_is_exact() {
        for v in [0.0, 1.0, 1.5, 0.1, 2.1, 1e-300, 123456.789] {
            assert_eq!(d(v).to_f64(), v);
        }
        assert!(Dyadic::from_f64(-1.0).is_err());
        assert!(Dyadic::from_f64(f64::NAN).is_err());
    }

    #[test]
    fn arithmetic_is_exact() {
        assert_eq!(d(1.5).mul(&d(1.5)), d(2.25));
        assert_eq!(d(1.25).add(&d(0.125)), d(1.375));
        assert_eq!(d(2.5).checked_sub(&d(1.5)).unwrap(), d(1.0));
        assert!(d(1.0).checked_sub(&d(1.5)).is_none());
        assert_eq!(d(3.375).floor(), BigUint::from(3u32));
        assert_eq!(d(3.375).frac_fixed64(false), (0.375 * 2f64.powi(64)) as u128);
    }

    #[test]
    fn ordering_across_exponents() {
        assert!(d(0.5) < d(0.75));
        assert!(d(1024.0) > d(1023.5));
        assert_eq!(Dyadic::from_parts(BigUint::from(4u32), -2), d(1.0));
    }

    #[test]
    fn ratio_rounding_brackets_value() {
        let lo = Dyadic::from_ratio(1, 3, 60, false).unwrap();
        let hi = Dyadic::from_ratio(1, 3, 60, true).unwrap();
        assert!(lo < hi);
        assert!((lo.to_f64() - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(hi.checked_sub(&lo).unwrap(), Dyadic::from_parts(BigUint::one(), -60));
    }

    #[test]
    fn enclosure_contains_exact_power() {
        // 1.1 as a dyadic, raised to the 50th power exactly and in 80 bits.
        let x = d(1.1);
        let mut exact = Dyadic::from_u64(1);
        for _ in 0..50 {
            exact = exact.mul(&x);
        }
        let enc = Enclosure::pow(&x, 50, 80);
        assert!(enc.lo <= exact && exact <= enc.hi);
        assert!(enc.width() < 1e-18);
    }
}
