//! Exact scalar types used as weights.
//!
//! Every weight, LP coefficient and certificate entry in this crate is an
//! exact fraction. The algorithms are written against [`Scalar`], which is
//! implemented for arbitrary-precision [`BigRational`] (the default, see
//! [`crate::Rational`]) and for the fixed-width `Ratio<i64>` / `Ratio<i128>`.
//! The fixed-width types are faster but panic on overflow; use them only
//! when the magnitudes are known to be small.

use std::fmt::{Debug, Display};
use std::hash::Hash;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::{BigRational, Ratio};
use num_traits::{Num, One, Signed, ToPrimitive, Zero};

/// An exact ordered field element.
pub trait Scalar:
    Clone + Debug + Display + Ord + Hash + Num + Signed + Send + Sync + 'static
{
    fn from_i64(v: i64) -> Self;

    fn to_big_rational(&self) -> BigRational;

    /// `None` when the value does not fit the representation.
    fn from_big_rational(v: &BigRational) -> Option<Self>;

    fn from_frac(numer: i64, denom: i64) -> Self {
        Self::from_i64(numer) / Self::from_i64(denom)
    }

    /// Parses `p` or `p/q`.
    fn parse(s: &str) -> Option<Self> {
        let s = s.trim();
        if s.contains('/') {
            Self::from_str_radix(s, 10).ok()
        } else {
            Self::from_str_radix(&format!("{s}/1"), 10).ok()
        }
    }

    fn is_integer(&self) -> bool {
        self.to_big_rational().is_integer()
    }
}

impl Scalar for BigRational {
    fn from_i64(v: i64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }

    fn to_big_rational(&self) -> BigRational {
        self.clone()
    }

    fn from_big_rational(v: &BigRational) -> Option<Self> {
        Some(v.clone())
    }

    fn is_integer(&self) -> bool {
        Ratio::is_integer(self)
    }
}

macro_rules! fixed_width_scalar {
    ($int:ty, $to:ident) => {
        impl Scalar for Ratio<$int> {
            fn from_i64(v: i64) -> Self {
                Ratio::from_integer(v as $int)
            }

            fn to_big_rational(&self) -> BigRational {
                BigRational::new(BigInt::from(*self.numer()), BigInt::from(*self.denom()))
            }

            fn from_big_rational(v: &BigRational) -> Option<Self> {
                Some(Ratio::new(v.numer().$to()?, v.denom().$to()?))
            }

            fn is_integer(&self) -> bool {
                Ratio::is_integer(self)
            }
        }
    };
}

fixed_width_scalar!(i64, to_i64);
fixed_width_scalar!(i128, to_i128);

/// Scales a rational vector by the least common multiple of its
/// denominators, returning the resulting integers.
pub fn clear_denominators(values: &[BigRational]) -> Vec<BigInt> {
    let lcm = values
        .iter()
        .fold(BigInt::one(), |acc, v| acc.lcm(v.denom()));
    values
        .iter()
        .map(|v| (v * BigRational::from_integer(lcm.clone())).to_integer())
        .collect()
}

/// Divides an integer vector by the gcd of its entries (no-op for the zero
/// vector).
pub fn primitive_part(values: &[BigInt]) -> Vec<BigInt> {
    let g = values.iter().fold(BigInt::zero(), |acc, v| acc.gcd(v));
    if g.is_zero() || g.is_one() {
        return values.to_vec();
    }
    values.iter().map(|v| v / &g).collect()
}

/// Smallest integer not less than `v`, if it fits in `usize`.
pub fn ceil_usize<S: Scalar>(v: &S) -> Option<usize> {
    v.to_big_rational().ceil().to_integer().to_usize()
}

#[cfg(test)]
mod tests {
    use super::*;

    type R64 = Ratio<i64>;

    #[test]
    fn parses_integers_and_fractions() {
        let half = BigRational::parse("1/2").unwrap();
        assert_eq!(half, BigRational::from_frac(1, 2));
        assert_eq!(BigRational::parse("-3").unwrap(), BigRational::from_i64(-3));
        assert_eq!(
            BigRational::parse(" 4/6 ").unwrap(),
            BigRational::from_frac(2, 3)
        );
        assert!(BigRational::parse("x").is_none());
        assert_eq!(R64::parse("-7/14").unwrap(), R64::new(-1, 2));
    }

    #[test]
    fn display_is_canonical() {
        assert_eq!(BigRational::from_frac(6, 4).to_string(), "3/2");
        assert_eq!(BigRational::from_frac(4, 2).to_string(), "2");
        assert_eq!(BigRational::from_frac(1, -2).to_string(), "-1/2");
    }

    #[test]
    fn normalized_storage() {
        let r = BigRational::from_frac(-10, -4);
        assert_eq!(r.numer(), &BigInt::from(5));
        assert_eq!(r.denom(), &BigInt::from(2));
    }

    #[test]
    fn denominators_cleared() {
        let v = [BigRational::from_frac(1, 2), BigRational::from_frac(-1, 3)];
        assert_eq!(
            clear_denominators(&v),
            vec![BigInt::from(3), BigInt::from(-2)]
        );
        let p = primitive_part(&[BigInt::from(4), BigInt::from(-6), BigInt::from(0)]);
        assert_eq!(p, vec![BigInt::from(2), BigInt::from(-3), BigInt::from(0)]);
    }

    #[test]
    fn fixed_width_round_trip() {
        let r = R64::new(3, 7);
        assert_eq!(R64::from_big_rational(&r.to_big_rational()), Some(r));
        assert_eq!(ceil_usize(&BigRational::from_frac(5, 2)), Some(3));
        assert_eq!(ceil_usize(&BigRational::from_i64(2)), Some(2));
    }
}
