//! Exact nonnegative rational numbers.
//!
//! Every probability and CPT entry in this crate is a [`Rat`]: arbitrary
//! precision, stored in lowest terms, never negative. Decimal strings such
//! as `"0.99"` convert exactly to `99/100`, so equality of probabilities
//! and of whole distributions is decidable.

use num_bigint::BigInt;
use num_rational::Ratio;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RatError {
    #[error("malformed number `{0}`")]
    MalformedNumber(String),
    #[error("negative value `{0}`")]
    NegativeValue(String),
    #[error("division by zero")]
    DivisionByZero,
}

/// A nonnegative rational in lowest terms with a positive denominator.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Rat(Ratio<BigInt>);

impl Rat {
    pub fn zero() -> Self {
        Rat(Ratio::zero())
    }

    pub fn one() -> Self {
        Rat(Ratio::one())
    }

    /// `numer/denom` from machine integers. Panics if `denom == 0`.
    pub fn new(numer: u64, denom: u64) -> Self {
        assert!(denom != 0, "Rat::new: zero denominator");
        Rat(Ratio::new(BigInt::from(numer), BigInt::from(denom)))
    }

    pub fn from_int(n: u64) -> Self {
        Rat(Ratio::from_integer(BigInt::from(n)))
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.0.is_one()
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    /// `self - rhs`, or `None` if the result would be negative.
    pub fn checked_sub(&self, rhs: &Rat) -> Option<Rat> {
        if self.0 < rhs.0 {
            None
        } else {
            Some(Rat(&self.0 - &rhs.0))
        }
    }

    /// `self / rhs`, or an error on a zero divisor.
    pub fn checked_div(&self, rhs: &Rat) -> Result<Rat, RatError> {
        if rhs.is_zero() {
            Err(RatError::DivisionByZero)
        } else {
            Ok(Rat(&self.0 / &rhs.0))
        }
    }

    /// Decimal rendering with `sig` significant digits, trailing zeros
    /// trimmed. Exact when the value terminates within `sig` digits.
    pub fn to_decimal(&self, sig: u32) -> String {
        assert!(sig >= 1);
        if self.is_zero() {
            return "0".to_string();
        }
        let p = self.0.numer().clone();
        let q = self.0.denom().clone();
        // exponent e with 10^e <= p/q < 10^(e+1)
        let mut e: i64 = 0;
        let ten = BigInt::from(10u8);
        let mut lo = p.clone();
        let mut hi = q.clone();
        while lo < hi {
            lo *= &ten;
            e -= 1;
        }
        while lo >= &hi * &ten {
            hi *= &ten;
            e += 1;
        }
        // round p/q * 10^(sig-1-e) half-up to an integer with `sig` digits
        let shift = sig as i64 - 1 - e;
        let (num, den) = if shift >= 0 {
            (p * ten.pow(shift as u32), q)
        } else {
            (p, q * ten.pow((-shift) as u32))
        };
        let mut digits = (num * 2u8 + &den) / (den * 2u8);
        if digits >= ten.pow(sig) {
            digits /= &ten;
            e += 1;
        }
        let ds = digits.to_string();
        let mut out = if e < 0 {
            let mut s = String::from("0.");
            for _ in 0..(-e - 1) {
                s.push('0');
            }
            s.push_str(&ds);
            s
        } else if (e as usize) < ds.len() - 1 {
            let (int, frac) = ds.split_at(e as usize + 1);
            format!("{int}.{frac}")
        } else {
            let mut s = ds.clone();
            for _ in 0..(e as usize + 1 - ds.len()) {
                s.push('0');
            }
            s
        };
        if out.contains('.') {
            while out.ends_with('0') {
                out.pop();
            }
            if out.ends_with('.') {
                out.pop();
            }
        }
        out
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }
}

/// Parses `"p/q"`, an integer, or a finite decimal string into an exact
/// nonnegative rational. `"0.12375"` becomes `99/800`.
pub fn parse_rat(text: &str) -> Result<Rat, RatError> {
    let s = text.trim();
    if s.is_empty() {
        return Err(RatError::MalformedNumber(text.to_string()));
    }
    if s.starts_with('-') {
        return Err(RatError::NegativeValue(text.to_string()));
    }
    let malformed = || RatError::MalformedNumber(text.to_string());
    if let Some((num, den)) = s.split_once('/') {
        if num.is_empty()
            || den.is_empty()
            || !num.bytes().all(|b| b.is_ascii_digit())
            || !den.bytes().all(|b| b.is_ascii_digit())
        {
            return Err(malformed());
        }
        let n: BigInt = num.parse().map_err(|_| malformed())?;
        let d: BigInt = den.parse().map_err(|_| malformed())?;
        if d.is_zero() {
            return Err(malformed());
        }
        return Ok(Rat(Ratio::new(n, d)));
    }
    let (int_part, frac_part) = match s.split_once('.') {
        Some((i, f)) => (i, f),
        None => (s, ""),
    };
    if int_part.is_empty()
        || !int_part.bytes().all(|b| b.is_ascii_digit())
        || !frac_part.bytes().all(|b| b.is_ascii_digit())
    {
        return Err(malformed());
    }
    let mut digits = String::with_capacity(int_part.len() + frac_part.len());
    digits.push_str(int_part);
    digits.push_str(frac_part);
    let n: BigInt = digits.parse().map_err(|_| malformed())?;
    let d = BigInt::from(10u8).pow(frac_part.len() as u32);
    Ok(Rat(Ratio::new(n, d)))
}

impl fmt::Display for Rat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.denom().is_one() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl fmt::Debug for Rat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl Add for &Rat {
    type Output = Rat;
    fn add(self, rhs: &Rat) -> Rat {
        Rat(&self.0 + &rhs.0)
    }
}

impl Add for Rat {
    type Output = Rat;
    fn add(self, rhs: Rat) -> Rat {
        Rat(self.0 + rhs.0)
    }
}

impl AddAssign<&Rat> for Rat {
    fn add_assign(&mut self, rhs: &Rat) {
        self.0 += &rhs.0;
    }
}

impl Mul for &Rat {
    type Output = Rat;
    fn mul(self, rhs: &Rat) -> Rat {
        Rat(&self.0 * &rhs.0)
    }
}

impl Mul for Rat {
    type Output = Rat;
    fn mul(self, rhs: Rat) -> Rat {
        Rat(self.0 * rhs.0)
    }
}

impl MulAssign<&Rat> for Rat {
    fn mul_assign(&mut self, rhs: &Rat) {
        self.0 *= &rhs.0;
    }
}

impl Div for &Rat {
    type Output = Rat;
    fn div(self, rhs: &Rat) -> Rat {
        assert!(!rhs.is_zero(), "Rat division by zero");
        Rat(&self.0 / &rhs.0)
    }
}

impl From<u64> for Rat {
    fn from(n: u64) -> Self {
        Rat::from_int(n)
    }
}

// Invariant guard: every constructor above builds from nonnegative parts,
// and Ratio normalizes signs into the numerator, so `Rat` stays >= 0.
#[allow(dead_code)]
fn debug_invariant(r: &Rat) -> bool {
    !r.0.numer().is_negative() && r.0.denom().is_positive()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parse_decimal_exactly() {
        assert_eq!(parse_rat("0.12375").unwrap(), Rat::new(99, 800));
        assert_eq!(parse_rat("0.99").unwrap(), Rat::new(99, 100));
        assert_eq!(parse_rat("1/3").unwrap(), Rat::new(1, 3));
        assert_eq!(parse_rat("0").unwrap(), Rat::zero());
        assert_eq!(parse_rat("0.0625").unwrap(), Rat::new(1, 16));
        assert_eq!(parse_rat("2").unwrap(), Rat::from_int(2));
    }

    #[test]
    fn parse_rejects_bad_input() {
        assert!(matches!(parse_rat("-1/2"), Err(RatError::NegativeValue(_))));
        assert!(matches!(
            parse_rat("1/0"),
            Err(RatError::MalformedNumber(_))
        ));
        assert!(matches!(
            parse_rat("a/b"),
            Err(RatError::MalformedNumber(_))
        ));
        assert!(matches!(parse_rat(""), Err(RatError::MalformedNumber(_))));
        assert!(matches!(
            parse_rat("1.2.3"),
            Err(RatError::MalformedNumber(_))
        ));
        assert!(matches!(
            parse_rat("1e3"),
            Err(RatError::MalformedNumber(_))
        ));
    }

    #[test]
    fn display_round_trips() {
        for s in ["99/800", "1/3", "0", "1", "7/2"] {
            let r = parse_rat(s).unwrap();
            assert_eq!(r.to_string(), s);
            assert_eq!(parse_rat(&r.to_string()).unwrap(), r);
        }
    }

    #[test]
    fn decimal_column() {
        assert_eq!(Rat::new(1, 16).to_decimal(6), "0.0625");
        assert_eq!(Rat::new(99, 800).to_decimal(6), "0.12375");
        assert_eq!(Rat::new(1, 3).to_decimal(6), "0.333333");
        assert_eq!(Rat::new(2, 3).to_decimal(6), "0.666667");
        assert_eq!(Rat::new(199, 300).to_decimal(6), "0.663333");
        assert_eq!(Rat::zero().to_decimal(6), "0");
        assert_eq!(Rat::one().to_decimal(6), "1");
        assert_eq!(Rat::new(1, 800).to_decimal(6), "0.00125");
        assert_eq!(Rat::from_int(1234567).to_decimal(6), "1234570");
    }

    #[test]
    fn checked_ops() {
        let a = Rat::new(1, 2);
        let b = Rat::new(1, 3);
        assert_eq!(a.checked_sub(&b).unwrap(), Rat::new(1, 6));
        assert!(b.checked_sub(&a).is_none());
        assert_eq!(a.checked_div(&b).unwrap(), Rat::new(3, 2));
        assert!(matches!(
            a.checked_div(&Rat::zero()),
            Err(RatError::DivisionByZero)
        ));
    }

    fn arb_rat() -> impl Strategy<Value = Rat> {
        (0u64..10_000, 1u64..10_000).prop_map(|(n, d)| Rat::new(n, d))
    }

    proptest! {
        #[test]
        fn addition_associates(a in arb_rat(), b in arb_rat(), c in arb_rat()) {
            prop_assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
        }

        #[test]
        fn multiplication_distributes(a in arb_rat(), b in arb_rat(), c in arb_rat()) {
            prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        }

        #[test]
        fn parse_display_round_trip(a in arb_rat()) {
            prop_assert_eq!(parse_rat(&a.to_string()).unwrap(), a);
        }
    }
}
