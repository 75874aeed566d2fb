//! Closed intervals with exact rational endpoints.
//!
//! Every irrational quantity in the crate (α, θ_n, ‖q_nβ‖, ...) is carried
//! as an [`Enclosure`] that is guaranteed to contain the true value. All
//! arithmetic rounds outward, and strict comparisons against an enclosure
//! are three-valued ([`Tri`]).

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Three-valued outcome of a comparison against an enclosure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Tri {
    True,
    False,
    Unknown,
}

impl Tri {
    pub fn is_decided(self) -> bool {
        self != Tri::Unknown
    }

    pub fn from_bool(b: bool) -> Self {
        if b {
            Tri::True
        } else {
            Tri::False
        }
    }
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Enclosure {
    lo: BigRational,
    hi: BigRational,
}

impl fmt::Debug for Enclosure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{} , {}]",
            to_f64(&self.lo),
            to_f64(&self.hi)
        )
    }
}

impl fmt::Display for Enclosure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

impl Enclosure {
    pub fn new(lo: BigRational, hi: BigRational) -> Result<Self> {
        if lo > hi {
            return Err(Error::Precondition(format!(
                "enclosure endpoints out of order: {lo} > {hi}"
            )));
        }
        Ok(Enclosure { lo, hi })
    }

    /// Builds the hull of two values given in either order.
    pub fn hull(a: BigRational, b: BigRational) -> Self {
        if a <= b {
            Enclosure { lo: a, hi: b }
        } else {
            Enclosure { lo: b, hi: a }
        }
    }

    pub fn point(x: BigRational) -> Self {
        Enclosure {
            lo: x.clone(),
            hi: x,
        }
    }

    pub fn zero() -> Self {
        Enclosure::point(BigRational::zero())
    }

    /// Symmetric interval `[-r, r]`; `r` must be non-negative.
    pub fn symmetric(r: BigRational) -> Self {
        debug_assert!(!r.is_negative());
        Enclosure { lo: -r.clone(), hi: r }
    }

    pub fn lo(&self) -> &BigRational {
        &self.lo
    }

    pub fn hi(&self) -> &BigRational {
        &self.hi
    }

    pub fn into_bounds(self) -> (BigRational, BigRational) {
        (self.lo, self.hi)
    }

    pub fn width(&self) -> BigRational {
        &self.hi - &self.lo
    }

    pub fn midpoint(&self) -> BigRational {
        (&self.lo + &self.hi) / BigRational::from_integer(BigInt::from(2))
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    pub fn contains(&self, x: &BigRational) -> bool {
        &self.lo <= x && x <= &self.hi
    }

    pub fn contains_zero(&self) -> bool {
        !self.lo.is_positive() && !self.hi.is_negative()
    }

    pub fn contains_enclosure(&self, other: &Enclosure) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    pub fn intersects(&self, other: &Enclosure) -> bool {
        self.lo <= other.hi && other.lo <= self.hi
    }

    pub fn intersection(&self, other: &Enclosure) -> Option<Enclosure> {
        let lo = (&self.lo).max(&other.lo).clone();
        let hi = (&self.hi).min(&other.hi).clone();
        (lo <= hi).then_some(Enclosure { lo, hi })
    }

    /// Sign of the enclosed value, when the enclosure excludes zero or is
    /// exactly zero.
    pub fn sign(&self) -> Option<Ordering> {
        if self.lo.is_positive() {
            Some(Ordering::Greater)
        } else if self.hi.is_negative() {
            Some(Ordering::Less)
        } else if self.lo.is_zero() && self.hi.is_zero() {
            Some(Ordering::Equal)
        } else {
            None
        }
    }

    /// Is the enclosed value strictly below `x`?
    pub fn lt(&self, x: &BigRational) -> Tri {
        if &self.hi < x {
            Tri::True
        } else if &self.lo >= x {
            Tri::False
        } else {
            Tri::Unknown
        }
    }

    /// Is the enclosed value strictly above `x`?
    pub fn gt(&self, x: &BigRational) -> Tri {
        if &self.lo > x {
            Tri::True
        } else if &self.hi <= x {
            Tri::False
        } else {
            Tri::Unknown
        }
    }

    /// Is the enclosed value strictly below every value of `other`?
    pub fn lt_enclosure(&self, other: &Enclosure) -> Tri {
        if self.hi < other.lo {
            Tri::True
        } else if self.lo >= other.hi {
            Tri::False
        } else {
            Tri::Unknown
        }
    }

    pub fn abs(&self) -> Enclosure {
        if !self.lo.is_negative() {
            self.clone()
        } else if !self.hi.is_positive() {
            -self.clone()
        } else {
            let hi = (-self.lo.clone()).max(self.hi.clone());
            Enclosure {
                lo: BigRational::zero(),
                hi,
            }
        }
    }

    pub fn scale(&self, k: &BigInt) -> Enclosure {
        let k = BigRational::from_integer(k.clone());
        self.scale_rational(&k)
    }

    pub fn scale_rational(&self, k: &BigRational) -> Enclosure {
        Enclosure::hull(&self.lo * k, &self.hi * k)
    }

    pub fn shift(&self, d: &BigRational) -> Enclosure {
        Enclosure {
            lo: &self.lo + d,
            hi: &self.hi + d,
        }
    }

    /// Widens the enclosure by `r >= 0` on both sides.
    pub fn widen(&self, r: &BigRational) -> Enclosure {
        Enclosure {
            lo: &self.lo - r,
            hi: &self.hi + r,
        }
    }

    /// Reciprocal of an enclosure that excludes zero.
    pub fn recip(&self) -> Result<Enclosure> {
        match self.sign() {
            Some(Ordering::Greater) | Some(Ordering::Less) => {
                Ok(Enclosure::hull(self.hi.recip(), self.lo.recip()))
            }
            _ => Err(Error::Precondition(
                "reciprocal of an enclosure containing zero".into(),
            )),
        }
    }

    /// Rounds both endpoints outward to multiples of `2^-bits`.
    pub fn round_outward(&self, bits: u32) -> Enclosure {
        let scale = BigInt::one() << bits;
        let lo = floor_scaled(self.lo.numer(), self.lo.denom(), &scale);
        let hi = ceil_scaled(self.hi.numer(), self.hi.denom(), &scale);
        Enclosure {
            lo: BigRational::new(lo, scale.clone()),
            hi: BigRational::new(hi, scale),
        }
    }

    /// Floor of the lower endpoint; the enclosure shifted by it has its
    /// lower end in `[0, 1)`.
    pub fn reduce_mod_one(&self) -> (BigInt, Enclosure) {
        let k = self.lo.floor().to_integer();
        let d = BigRational::from_integer(-k.clone());
        (k, self.shift(&d))
    }

    /// Enclosure of the distance from the enclosed value to the nearest
    /// integer. The result always lies in `[0, 1/2]`.
    pub fn circle_norm(&self) -> Enclosure {
        let half = BigRational::new(BigInt::one(), BigInt::from(2));
        if self.width() >= BigRational::one() {
            return Enclosure {
                lo: BigRational::zero(),
                hi: half,
            };
        }
        let (_, y) = self.reduce_mod_one();
        // y.lo in [0,1), y.hi in [0,2)
        let one = BigRational::one();
        let three_halves = BigRational::new(BigInt::from(3), BigInt::from(2));
        let dist = |v: &BigRational| -> BigRational {
            let f = v - v.floor();
            let g = &one - &f;
            if f <= g {
                f
            } else {
                g
            }
        };
        let dl = dist(&y.lo);
        let dh = dist(&y.hi);
        let mut lo = (&dl).min(&dh).clone();
        let mut hi = (&dl).max(&dh).clone();
        if y.contains(&half) || y.contains(&three_halves) {
            hi = half.clone();
        }
        if y.contains(&one) {
            lo = BigRational::zero();
        }
        Enclosure { lo, hi }
    }
}

impl Add for &Enclosure {
    type Output = Enclosure;
    fn add(self, rhs: &Enclosure) -> Enclosure {
        Enclosure {
            lo: &self.lo + &rhs.lo,
            hi: &self.hi + &rhs.hi,
        }
    }
}

impl Add for Enclosure {
    type Output = Enclosure;
    fn add(self, rhs: Enclosure) -> Enclosure {
        &self + &rhs
    }
}

impl Sub for &Enclosure {
    type Output = Enclosure;
    fn sub(self, rhs: &Enclosure) -> Enclosure {
        Enclosure {
            lo: &self.lo - &rhs.hi,
            hi: &self.hi - &rhs.lo,
        }
    }
}

impl Sub for Enclosure {
    type Output = Enclosure;
    fn sub(self, rhs: Enclosure) -> Enclosure {
        &self - &rhs
    }
}

impl Neg for Enclosure {
    type Output = Enclosure;
    fn neg(self) -> Enclosure {
        Enclosure {
            lo: -self.hi,
            hi: -self.lo,
        }
    }
}

impl Mul for &Enclosure {
    type Output = Enclosure;
    fn mul(self, rhs: &Enclosure) -> Enclosure {
        let c = [
            &self.lo * &rhs.lo,
            &self.lo * &rhs.hi,
            &self.hi * &rhs.lo,
            &self.hi * &rhs.hi,
        ];
        let lo = c.iter().min().unwrap().clone();
        let hi = c.iter().max().unwrap().clone();
        Enclosure { lo, hi }
    }
}

impl Mul for Enclosure {
    type Output = Enclosure;
    fn mul(self, rhs: Enclosure) -> Enclosure {
        &self * &rhs
    }
}

/// `floor(num * scale / den)` for `den > 0`.
pub(crate) fn floor_scaled(num: &BigInt, den: &BigInt, scale: &BigInt) -> BigInt {
    (num * scale).div_floor(den)
}

/// `ceil(num * scale / den)` for `den > 0`.
pub(crate) fn ceil_scaled(num: &BigInt, den: &BigInt, scale: &BigInt) -> BigInt {
    -((-(num * scale)).div_floor(den))
}

pub fn to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        // Extremely large numerators and denominators: scale down first.
        let n = r.numer().bits() as i64;
        let d = r.denom().bits() as i64;
        let shift = (n.max(d) - 1000).max(0) as usize;
        let nn = (r.numer() >> shift).to_f64().unwrap_or(f64::NAN);
        let dd = (r.denom() >> shift).to_f64().unwrap_or(f64::NAN);
        nn / dd
    })
}

pub fn rational(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: impl Into<BigInt>) -> BigRational {
    BigRational::from_integer(n.into())
}

/// Parses `"3"`, `"-2/7"`, `"0.015"`, `"1e-3"` or `"2.5E+2"` into an exact
/// rational.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("not a rational number: {s:?}"));
    if s.is_empty() {
        return Err(bad());
    }
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(n, d));
    }
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(pos) => {
            let e: i64 = s[pos + 1..].parse().map_err(|_| bad())?;
            (&s[..pos], e)
        }
        None => (s, 0),
    };
    let (neg, mantissa) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits: BigInt = format!("{int_part}{frac_part}0").parse().map_err(|_| bad())?;
    let digits = digits / BigInt::from(10);
    let exp10 = exp - frac_part.len() as i64;
    let ten = BigInt::from(10);
    let mut value = if exp10 >= 0 {
        BigRational::from_integer(digits * num_traits::pow(ten, exp10 as usize))
    } else {
        BigRational::new(digits, num_traits::pow(ten, (-exp10) as usize))
    };
    if neg {
        value = -value;
    }
    Ok(value)
}

/// Exact text form used in JSON documents: `"n"` or `"n/d"`.
pub fn format_rational(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Serde helpers that write rationals as exact strings.
pub mod serde_rational {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &BigRational, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<BigRational, D::Error> {
        let s = String::deserialize(d)?;
        parse_rational(&s).map_err(serde::de::Error::custom)
    }
}

#[derive(Serialize, Deserialize)]
struct EnclosureDoc {
    #[serde(with = "serde_rational")]
    lo: BigRational,
    #[serde(with = "serde_rational")]
    hi: BigRational,
}

impl Serialize for Enclosure {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        EnclosureDoc {
            lo: self.lo.clone(),
            hi: self.hi.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Enclosure {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let doc = EnclosureDoc::deserialize(d)?;
        Enclosure::new(doc.lo, doc.hi).map_err(serde::de::Error::custom)
    }
}
