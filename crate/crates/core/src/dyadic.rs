//! Exact dyadic rationals `p / 2^q`.
//!
//! Every metric value in the crate is a dyadic rational, so all bounds of the
//! form `2^-n` are compared exactly. Values are kept in lowest terms: the
//! numerator is odd unless the value is zero, in which case the exponent is 0.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use crate::error::{Error, Result};

/// An exact rational number whose denominator is a power of two.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Dyadic {
    num: i128,
    exp: u32,
}

impl Dyadic {
    pub const ZERO: Dyadic = Dyadic { num: 0, exp: 0 };
    pub const ONE: Dyadic = Dyadic { num: 1, exp: 0 };
    pub const HALF: Dyadic = Dyadic { num: 1, exp: 1 };

    /// Builds `num / 2^exp` and reduces it.
    pub fn new(num: i128, exp: u32) -> Self {
        if num == 0 {
            return Self::ZERO;
        }
        let shift = num.trailing_zeros().min(exp);
        Dyadic {
            num: num >> shift,
            exp: exp - shift,
        }
    }

    pub fn from_int(n: i64) -> Self {
        Self::new(n as i128, 0)
    }

    /// `2^-k`.
    pub fn pow2_neg(k: u32) -> Self {
        Dyadic { num: 1, exp: k }
    }

    /// `2^k` for small nonnegative `k`, `2^-(-k)` otherwise.
    pub fn pow2(k: i32) -> Self {
        if k >= 0 {
            Self::new(1i128 << k, 0)
        } else {
            Self::pow2_neg(k.unsigned_abs())
        }
    }

    pub fn numerator(&self) -> i128 {
        self.num
    }

    /// Exponent `q` of the reduced denominator `2^q`.
    pub fn log2_denominator(&self) -> u32 {
        self.exp
    }

    pub fn is_zero(&self) -> bool {
        self.num == 0
    }

    pub fn is_negative(&self) -> bool {
        self.num < 0
    }

    pub fn abs(self) -> Self {
        Dyadic {
            num: self.num.abs(),
            exp: self.exp,
        }
    }

    pub fn min(self, other: Self) -> Self {
        if self <= other {
            self
        } else {
            other
        }
    }

    pub fn max(self, other: Self) -> Self {
        if self >= other {
            self
        } else {
            other
        }
    }

    /// Halves the value exactly.
    pub fn half(self) -> Self {
        Self::new(self.num, self.exp + 1)
    }

    /// Numerators of `self` and `other` over the common denominator.
    fn aligned(self, other: Self) -> (i128, i128, u32) {
        let exp = self.exp.max(other.exp);
        (
            shl_exact(self.num, exp - self.exp),
            shl_exact(other.num, exp - other.exp),
            exp,
        )
    }

    pub fn to_f64(self) -> f64 {
        self.num as f64 / 2f64.powi(self.exp as i32)
    }
}

fn shl_exact(v: i128, by: u32) -> i128 {
    if v == 0 {
        return 0;
    }
    assert!(by < 126, "dyadic arithmetic overflow shifting by {by}");
    v.checked_mul(1i128 << by)
        .unwrap_or_else(|| panic!("dyadic arithmetic overflow shifting {v} by {by}"))
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> Ordering {
        let (a, b, _) = self.aligned(*other);
        a.cmp(&b)
    }
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Add for Dyadic {
    type Output = Dyadic;
    fn add(self, rhs: Self) -> Self {
        let (a, b, exp) = self.aligned(rhs);
        Dyadic::new(a.checked_add(b).expect("dyadic addition overflow"), exp)
    }
}

impl Sub for Dyadic {
    type Output = Dyadic;
    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl Neg for Dyadic {
    type Output = Dyadic;
    fn neg(self) -> Self {
        Dyadic {
            num: -self.num,
            exp: self.exp,
        }
    }
}

impl Mul for Dyadic {
    type Output = Dyadic;
    fn mul(self, rhs: Self) -> Self {
        Dyadic::new(
            self.num
                .checked_mul(rhs.num)
                .expect("dyadic multiplication overflow"),
            self.exp + rhs.exp,
        )
    }
}

impl std::iter::Sum for Dyadic {
    fn sum<I: Iterator<Item = Dyadic>>(iter: I) -> Self {
        iter.fold(Dyadic::ZERO, |a, b| a + b)
    }
}

/// Lossless `p/2^q` form, e.g. `3/2^2`, `-1/2^1`; integers print bare.
impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.exp == 0 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/2^{}", self.num, self.exp)
        }
    }
}

impl fmt::Debug for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Accepts `p/2^q`, integers, and finite decimals with a dyadic value (`0.75`).
impl FromStr for Dyadic {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::Parse(format!("invalid dyadic rational `{s}`"));
        if let Some((p, q)) = s.split_once("/2^") {
            let num: i128 = p.trim().parse().map_err(|_| bad())?;
            let exp: u32 = q.trim().parse().map_err(|_| bad())?;
            if exp > 120 {
                return Err(bad());
            }
            return Ok(Dyadic::new(num, exp));
        }
        if let Some((int_part, frac)) = s.split_once('.') {
            let negative = int_part.starts_with('-');
            let int_digits = int_part.trim_start_matches(['-', '+']);
            if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) || frac.len() > 30
            {
                return Err(bad());
            }
            let int_val: i128 = if int_digits.is_empty() {
                0
            } else {
                int_digits.parse().map_err(|_| bad())?
            };
            // value = (int * 10^k + frac) / 10^k = m / (2^k 5^k); dyadic iff 5^k | m
            let k = frac.len() as u32;
            let pow10 = 10i128.pow(k);
            let pow5 = 5i128.pow(k);
            let m = int_val * pow10 + frac.parse::<i128>().map_err(|_| bad())?;
            if m % pow5 != 0 {
                return Err(Error::Parse(format!("`{s}` is not a dyadic rational")));
            }
            let v = Dyadic::new(m / pow5, k);
            return Ok(if negative { -v } else { v });
        }
        let n: i128 = s.parse().map_err(|_| bad())?;
        Ok(Dyadic::new(n, 0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn normalizes() {
        assert_eq!(Dyadic::new(4, 3), Dyadic::new(1, 1));
        assert_eq!(Dyadic::new(0, 7), Dyadic::ZERO);
        assert_eq!(Dyadic::new(6, 0).log2_denominator(), 0);
    }

    #[test]
    fn display_and_parse() {
        assert_eq!(Dyadic::new(3, 2).to_string(), "3/2^2");
        assert_eq!(Dyadic::ZERO.to_string(), "0");
        assert_eq!("3/2^2".parse::<Dyadic>().unwrap(), Dyadic::new(3, 2));
        assert_eq!("0.75".parse::<Dyadic>().unwrap(), Dyadic::new(3, 2));
        assert_eq!("-0.5".parse::<Dyadic>().unwrap(), Dyadic::new(-1, 1));
        assert_eq!("3".parse::<Dyadic>().unwrap(), Dyadic::from_int(3));
        assert!("0.1".parse::<Dyadic>().is_err());
        assert!("abc".parse::<Dyadic>().is_err());
    }

    #[test]
    fn geometric_tail_stays_below_head() {
        let s: Dyadic = (3..=20).map(Dyadic::pow2_neg).sum();
        assert!(s < Dyadic::pow2_neg(2));
        assert_eq!(s + Dyadic::pow2_neg(20), Dyadic::pow2_neg(2));
    }

    fn small() -> impl Strategy<Value = Dyadic> {
        (-1000i128..1000, 0u32..20).prop_map(|(n, e)| Dyadic::new(n, e))
    }

    proptest! {
        #[test]
        fn field_laws(a in small(), b in small(), c in small()) {
            prop_assert_eq!(a + b, b + a);
            prop_assert_eq!((a + b) + c, a + (b + c));
            prop_assert_eq!(a * (b + c), a * b + a * c);
            prop_assert_eq!(a - a, Dyadic::ZERO);
            prop_assert_eq!(a.to_string().parse::<Dyadic>().unwrap(), a);
        }

        #[test]
        fn order_matches_f64(a in small(), b in small()) {
            prop_assert_eq!(a.cmp(&b), a.to_f64().partial_cmp(&b.to_f64()).unwrap());
        }
    }
}
