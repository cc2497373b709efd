//! Outward-rounded interval arithmetic.
//!
//! An [`Interval`] is a pair of binary64 bounds `[lo, hi]` standing for the
//! set of reals between them. Every operation returns a result that contains
//! the exact image of its operands (containment), implemented with the
//! directed-rounding kernels in [`round`]. Division by an interval that
//! contains zero and square roots of negative radicands are rejected rather
//! than extended: in this pipeline either one always means a broken
//! assumption upstream.
//!
//! Overflowed bounds saturate to `±inf` (still a valid enclosure); callers
//! that accept a result into a certificate check [`Interval::is_finite`].

mod round;
pub mod vector;

pub use vector::{IMatrix, IVector, PMatrix, PVector};

use crate::error::Error;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

pub(crate) use round::{
    add_down, add_up, div_down, div_up, mul_down, mul_up, pow_down_nonneg, pow_up_nonneg,
    sqrt_down, sqrt_up, sub_down, sub_up,
};

/// A closed real interval with binary64 endpoints.
#[derive(Copy, Clone, PartialEq)]
pub struct Interval {
    lo: f64,
    hi: f64,
}

impl Interval {
    pub const ZERO: Interval = Interval { lo: 0.0, hi: 0.0 };
    pub const ONE: Interval = Interval { lo: 1.0, hi: 1.0 };

    /// Interval `[lo, hi]`. Panics if `lo > hi` or either bound is NaN.
    pub fn new(lo: f64, hi: f64) -> Self {
        assert!(!lo.is_nan() && !hi.is_nan() && lo <= hi, "bad interval [{lo}, {hi}]");
        Interval { lo, hi }
    }

    /// Degenerate interval `[v, v]`.
    #[inline]
    pub fn point(v: f64) -> Self {
        debug_assert!(!v.is_nan());
        Interval { lo: v, hi: v }
    }

    /// Internal constructor that repairs NaN bounds (possible only after
    /// saturated overflow feeds a later operation) to the whole line.
    #[inline]
    fn raw(lo: f64, hi: f64) -> Self {
        if lo.is_nan() || hi.is_nan() {
            return Interval { lo: f64::NEG_INFINITY, hi: f64::INFINITY };
        }
        debug_assert!(lo <= hi, "inverted interval [{lo}, {hi}]");
        Interval { lo, hi }
    }

    #[inline]
    pub fn lo(&self) -> f64 {
        self.lo
    }

    #[inline]
    pub fn hi(&self) -> f64 {
        self.hi
    }

    #[inline]
    pub fn is_finite(&self) -> bool {
        self.lo.is_finite() && self.hi.is_finite()
    }

    /// Midpoint, rounded to nearest and clamped into the interval.
    #[inline]
    pub fn mid(&self) -> f64 {
        let m = 0.5 * self.lo + 0.5 * self.hi;
        m.clamp(self.lo, self.hi)
    }

    /// Width `hi - lo`, rounded up.
    #[inline]
    pub fn diam(&self) -> f64 {
        sub_up(self.hi, self.lo)
    }

    /// Magnitude: `max |x|` over the interval.
    #[inline]
    pub fn mag(&self) -> f64 {
        self.lo.abs().max(self.hi.abs())
    }

    /// Mignitude: `min |x|` over the interval (0 if it contains 0).
    #[inline]
    pub fn mig(&self) -> f64 {
        if self.contains(0.0) {
            0.0
        } else {
            self.lo.abs().min(self.hi.abs())
        }
    }

    #[inline]
    pub fn contains(&self, v: f64) -> bool {
        self.lo <= v && v <= self.hi
    }

    #[inline]
    pub fn contains_interval(&self, other: &Interval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    #[inline]
    pub fn subset_of(&self, other: &Interval) -> bool {
        other.contains_interval(self)
    }

    /// Subset with strict inequalities on both endpoints.
    #[inline]
    pub fn strict_subset_of(&self, other: &Interval) -> bool {
        other.lo < self.lo && self.hi < other.hi
    }

    /// Entrywise intersection; empty overlap is a hard error because it
    /// signals a violated enclosure somewhere upstream.
    pub fn intersect(&self, other: &Interval) -> Result<Interval, Error> {
        let lo = self.lo.max(other.lo);
        let hi = self.hi.min(other.hi);
        if lo > hi {
            return Err(Error::EmptyIntersection);
        }
        Ok(Interval { lo, hi })
    }

    /// Convex hull of the two intervals.
    #[inline]
    pub fn hull(&self, other: &Interval) -> Interval {
        Interval { lo: self.lo.min(other.lo), hi: self.hi.max(other.hi) }
    }

    /// Symmetric hull `[-m, m]` with `m = mag(self)`.
    #[inline]
    pub fn sym_hull(&self) -> Interval {
        let m = self.mag();
        Interval { lo: -m, hi: m }
    }

    /// Widen both endpoints outward by `eps >= 0`.
    pub fn inflate(&self, eps: f64) -> Interval {
        debug_assert!(eps >= 0.0);
        Interval::raw(sub_down(self.lo, eps), add_up(self.hi, eps))
    }

    /// Multiply by the exact scalar `c`.
    pub fn scale(&self, c: f64) -> Interval {
        if c >= 0.0 {
            Interval::raw(mul_down(self.lo, c), mul_up(self.hi, c))
        } else {
            Interval::raw(mul_down(self.hi, c), mul_up(self.lo, c))
        }
    }

    /// Division, rejecting divisors that contain zero.
    pub fn checked_div(&self, rhs: &Interval) -> Result<Interval, Error> {
        if rhs.contains(0.0) {
            return Err(Error::DivisionByZero);
        }
        let (a, b) = (self, rhs);
        let r = if b.lo > 0.0 {
            if a.lo >= 0.0 {
                Interval::raw(div_down(a.lo, b.hi), div_up(a.hi, b.lo))
            } else if a.hi <= 0.0 {
                Interval::raw(div_down(a.lo, b.lo), div_up(a.hi, b.hi))
            } else {
                Interval::raw(div_down(a.lo, b.lo), div_up(a.hi, b.lo))
            }
        } else {
            // b.hi < 0
            if a.lo >= 0.0 {
                Interval::raw(div_down(a.hi, b.hi), div_up(a.lo, b.lo))
            } else if a.hi <= 0.0 {
                Interval::raw(div_down(a.hi, b.lo), div_up(a.lo, b.hi))
            } else {
                Interval::raw(div_down(a.hi, b.hi), div_up(a.lo, b.hi))
            }
        };
        Ok(r)
    }

    /// Division by an exact natural number (used for Taylor normalization).
    pub fn div_nat(&self, n: u32) -> Interval {
        debug_assert!(n >= 1);
        let d = n as f64;
        Interval::raw(div_down(self.lo, d), div_up(self.hi, d))
    }

    /// Square root; the radicand must be nonnegative.
    pub fn sqrt(&self) -> Result<Interval, Error> {
        if self.lo < 0.0 {
            return Err(Error::NegativeRadicand { lo: self.lo });
        }
        Ok(Interval::raw(sqrt_down(self.lo), sqrt_up(self.hi)))
    }

    /// Integer power. Negative exponents require an interval clear of zero.
    pub fn powi(&self, k: i32) -> Result<Interval, Error> {
        if k == 0 {
            return Ok(Interval::ONE);
        }
        if k < 0 {
            let p = self.powi(-k)?;
            return Interval::ONE.checked_div(&p);
        }
        let k = k as u32;
        if k == 1 {
            return Ok(*self);
        }
        let r = if k % 2 == 0 {
            Interval::raw(pow_down_nonneg(self.mig(), k), pow_up_nonneg(self.mag(), k))
        } else {
            let f = |t: f64, down: bool| -> f64 {
                if t >= 0.0 {
                    if down { pow_down_nonneg(t, k) } else { pow_up_nonneg(t, k) }
                } else if down {
                    -pow_up_nonneg(-t, k)
                } else {
                    -pow_down_nonneg(-t, k)
                }
            };
            Interval::raw(f(self.lo, true), f(self.hi, false))
        };
        Ok(r)
    }

    /// `x^(num/den)` with `den` in {1, 2}. This covers every exponent the
    /// built-in vector fields need (integer powers and square roots).
    pub fn powr(&self, num: i32, den: u32) -> Result<Interval, Error> {
        match den {
            1 => self.powi(num),
            2 => self.sqrt()?.powi(num),
            _ => Err(Error::UnsupportedExponent { num, den }),
        }
    }

    /// Parse a decimal literal, rounding outward so the result encloses the
    /// exact decimal value.
    pub fn parse_outward(s: &str) -> Result<Interval, Error> {
        parse::decimal_enclosure(s)
    }
}

impl Add for Interval {
    type Output = Interval;
    #[inline]
    fn add(self, rhs: Interval) -> Interval {
        Interval::raw(add_down(self.lo, rhs.lo), add_up(self.hi, rhs.hi))
    }
}

impl Sub for Interval {
    type Output = Interval;
    #[inline]
    fn sub(self, rhs: Interval) -> Interval {
        Interval::raw(sub_down(self.lo, rhs.hi), sub_up(self.hi, rhs.lo))
    }
}

impl Neg for Interval {
    type Output = Interval;
    #[inline]
    fn neg(self) -> Interval {
        Interval { lo: -self.hi, hi: -self.lo }
    }
}

impl Mul for Interval {
    type Output = Interval;
    fn mul(self, rhs: Interval) -> Interval {
        let (a, b) = (self, rhs);
        // Sign case analysis; the mixed/mixed case needs two candidates per bound.
        if a.lo >= 0.0 {
            if b.lo >= 0.0 {
                Interval::raw(mul_down(a.lo, b.lo), mul_up(a.hi, b.hi))
            } else if b.hi <= 0.0 {
                Interval::raw(mul_down(a.hi, b.lo), mul_up(a.lo, b.hi))
            } else {
                Interval::raw(mul_down(a.hi, b.lo), mul_up(a.hi, b.hi))
            }
        } else if a.hi <= 0.0 {
            if b.lo >= 0.0 {
                Interval::raw(mul_down(a.lo, b.hi), mul_up(a.hi, b.lo))
            } else if b.hi <= 0.0 {
                Interval::raw(mul_down(a.hi, b.hi), mul_up(a.lo, b.lo))
            } else {
                Interval::raw(mul_down(a.lo, b.hi), mul_up(a.lo, b.lo))
            }
        } else if b.lo >= 0.0 {
            Interval::raw(mul_down(a.lo, b.hi), mul_up(a.hi, b.hi))
        } else if b.hi <= 0.0 {
            Interval::raw(mul_down(a.hi, b.lo), mul_up(a.lo, b.lo))
        } else {
            Interval::raw(
                mul_down(a.lo, b.hi).min(mul_down(a.hi, b.lo)),
                mul_up(a.lo, b.lo).max(mul_up(a.hi, b.hi)),
            )
        }
    }
}

impl fmt::Debug for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:?}, {:?}]", self.lo, self.hi)
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:.17e}, {:.17e}]", self.lo, self.hi)
    }
}

mod parse {
    use super::Interval;
    use crate::error::Error;
    use num::bigint::BigInt;
    use num::rational::BigRational;
    use num::traits::{One, Pow, Zero};

    /// Exact rational value of a decimal literal like `-2.14e-3`.
    fn decimal_to_rational(s: &str) -> Option<BigRational> {
        let s = s.trim();
        let (mant, exp) = match s.find(['e', 'E']) {
            Some(i) => (&s[..i], s[i + 1..].parse::<i32>().ok()?),
            None => (s, 0),
        };
        let (mant, neg) = match mant.strip_prefix('-') {
            Some(m) => (m, true),
            None => (mant.strip_prefix('+').unwrap_or(mant), false),
        };
        let (int_part, frac_part) = match mant.find('.') {
            Some(i) => (&mant[..i], &mant[i + 1..]),
            None => (mant, ""),
        };
        if int_part.is_empty() && frac_part.is_empty() {
            return None;
        }
        let digits: String = [int_part, frac_part].concat();
        if !digits.chars().all(|c| c.is_ascii_digit()) {
            return None;
        }
        let mut num: BigInt = digits.parse().ok()?;
        if neg {
            num = -num;
        }
        let scale = exp - frac_part.len() as i32;
        let ten = BigInt::from(10);
        let r = if scale >= 0 {
            BigRational::new(num * ten.pow(scale as u32), BigInt::one())
        } else {
            BigRational::new(num, ten.pow((-scale) as u32))
        };
        Some(r)
    }

    pub(super) fn decimal_enclosure(s: &str) -> Result<Interval, Error> {
        let v: f64 = s
            .trim()
            .parse()
            .map_err(|_| Error::ParseNumber { text: s.to_string() })?;
        if !v.is_finite() {
            return Err(Error::ParseNumber { text: s.to_string() });
        }
        let exact = decimal_to_rational(s).ok_or_else(|| Error::ParseNumber { text: s.to_string() })?;
        if exact.is_zero() && v == 0.0 {
            return Ok(Interval::point(0.0));
        }
        let vr = BigRational::from_float(v).expect("finite float");
        Ok(match vr.cmp(&exact) {
            std::cmp::Ordering::Equal => Interval::point(v),
            std::cmp::Ordering::Less => Interval::new(v, v.next_up()),
            std::cmp::Ordering::Greater => Interval::new(v.next_down(), v),
        })
    }
}
