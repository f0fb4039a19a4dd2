//! Exact scalar types used by the simplex tableau.
//!
//! The tableau is first run over [`SmallRational`], a reduced `i64` fraction
//! whose operations report overflow instead of wrapping. If any operation
//! overflows, the caller restarts the whole solve over [`BigRational`].

use std::cmp::Ordering;
use std::fmt::Debug;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Arithmetic needed by the tableau. Fallible operations return `None` on overflow.
pub(crate) trait ExactField: Clone + Debug + PartialEq {
    fn zero() -> Self;
    fn from_i64(v: i64) -> Self;
    fn from_big(v: &BigRational) -> Option<Self>;
    fn to_big(&self) -> BigRational;
    fn is_zero(&self) -> bool;
    fn signum(&self) -> i32;
    fn neg(&self) -> Option<Self>;
    fn mul(&self, rhs: &Self) -> Option<Self>;
    fn div(&self, rhs: &Self) -> Option<Self>;
    fn recip(&self) -> Option<Self>;
    /// `self -= a * b`.
    fn sub_mul(&mut self, a: &Self, b: &Self) -> Option<()>;
    fn cmp_value(&self, rhs: &Self) -> Ordering;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) struct SmallRational {
    num: i64,
    den: i64,
}

#[inline]
fn gcd_u128(mut a: u128, mut b: u128) -> u128 {
    if a == 0 {
        return b;
    }
    if b == 0 {
        return a;
    }
    let shift = (a | b).trailing_zeros();
    a >>= a.trailing_zeros();
    loop {
        b >>= b.trailing_zeros();
        if a > b {
            std::mem::swap(&mut a, &mut b);
        }
        b -= a;
        if b == 0 {
            return a << shift;
        }
    }
}

impl SmallRational {
    #[inline]
    fn from_parts(num: i128, den: i128) -> Option<Self> {
        debug_assert!(den > 0);
        if den == 1 {
            return i64::try_from(num).ok().map(|num| SmallRational { num, den: 1 });
        }
        let g = gcd_u128(num.unsigned_abs(), den as u128) as i128;
        let (num, den) = if g > 1 { (num / g, den / g) } else { (num, den) };
        Some(SmallRational { num: i64::try_from(num).ok()?, den: i64::try_from(den).ok()? })
    }
}

impl ExactField for SmallRational {
    fn zero() -> Self {
        SmallRational { num: 0, den: 1 }
    }

    fn from_i64(v: i64) -> Self {
        SmallRational { num: v, den: 1 }
    }

    fn from_big(v: &BigRational) -> Option<Self> {
        Some(SmallRational { num: v.numer().to_i64()?, den: v.denom().to_i64()? })
    }

    fn to_big(&self) -> BigRational {
        BigRational::new(BigInt::from(self.num), BigInt::from(self.den))
    }

    #[inline]
    fn is_zero(&self) -> bool {
        self.num == 0
    }

    #[inline]
    fn signum(&self) -> i32 {
        self.num.signum() as i32
    }

    fn neg(&self) -> Option<Self> {
        Some(SmallRational { num: self.num.checked_neg()?, den: self.den })
    }

    #[inline]
    fn mul(&self, rhs: &Self) -> Option<Self> {
        if self.den == 1 && rhs.den == 1 {
            return Some(SmallRational { num: self.num.checked_mul(rhs.num)?, den: 1 });
        }
        Self::from_parts(self.num as i128 * rhs.num as i128, self.den as i128 * rhs.den as i128)
    }

    fn div(&self, rhs: &Self) -> Option<Self> {
        self.mul(&rhs.recip()?)
    }

    fn recip(&self) -> Option<Self> {
        if self.num == 0 {
            return None;
        }
        let (num, den) =
            if self.num < 0 { (self.den.checked_neg()?, self.num.checked_neg()?) } else { (self.den, self.num) };
        Some(SmallRational { num, den })
    }

    #[inline]
    fn sub_mul(&mut self, a: &Self, b: &Self) -> Option<()> {
        if self.den == 1 && a.den == 1 && b.den == 1 {
            let v = self.num as i128 - a.num as i128 * b.num as i128;
            self.num = i64::try_from(v).ok()?;
            return Some(());
        }
        let pn = a.num as i128 * b.num as i128;
        let pd = a.den as i128 * b.den as i128;
        // pn and pd fit comfortably in i128; combine with self over a common denominator.
        let sd = self.den as i128;
        let (num, den) = if sd == pd {
            (self.num as i128 - pn, sd)
        } else {
            let num = (self.num as i128).checked_mul(pd)?.checked_sub(pn.checked_mul(sd)?)?;
            (num, sd.checked_mul(pd)?)
        };
        *self = Self::from_parts(num, den)?;
        Some(())
    }

    fn cmp_value(&self, rhs: &Self) -> Ordering {
        (self.num as i128 * rhs.den as i128).cmp(&(rhs.num as i128 * self.den as i128))
    }
}

impl ExactField for BigRational {
    fn zero() -> Self {
        Zero::zero()
    }

    fn from_i64(v: i64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }

    fn from_big(v: &BigRational) -> Option<Self> {
        Some(v.clone())
    }

    fn to_big(&self) -> BigRational {
        self.clone()
    }

    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }

    fn signum(&self) -> i32 {
        if self.is_positive() {
            1
        } else if self.is_negative() {
            -1
        } else {
            0
        }
    }

    fn neg(&self) -> Option<Self> {
        Some(-self)
    }

    fn mul(&self, rhs: &Self) -> Option<Self> {
        Some(self * rhs)
    }

    fn div(&self, rhs: &Self) -> Option<Self> {
        if Zero::is_zero(rhs) {
            None
        } else {
            Some(self / rhs)
        }
    }

    fn recip(&self) -> Option<Self> {
        if Zero::is_zero(self) {
            None
        } else {
            Some(self.recip())
        }
    }

    fn sub_mul(&mut self, a: &Self, b: &Self) -> Option<()> {
        *self -= a * b;
        Some(())
    }

    fn cmp_value(&self, rhs: &Self) -> Ordering {
        self.cmp(rhs)
    }
}

/// Least common multiple of the denominators of `values`.
pub(crate) fn common_denominator(values: &[BigRational]) -> BigInt {
    values.iter().fold(BigInt::one(), |acc, v| acc.lcm(v.denom()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn small_sub_mul_matches_big() {
        let cases = [(3, 4, -5, 6, 7, 9), (1, 1, 2, 1, 3, 1), (-7, 3, 2, 5, 1, 2)];
        for (a, b, c, d, e, f) in cases {
            let mut s = SmallRational::from_big(&q(a, b)).unwrap();
            let x = SmallRational::from_big(&q(c, d)).unwrap();
            let y = SmallRational::from_big(&q(e, f)).unwrap();
            s.sub_mul(&x, &y).unwrap();
            assert_eq!(s.to_big(), q(a, b) - q(c, d) * q(e, f));
        }
    }

    #[test]
    fn overflow_is_reported() {
        let big = SmallRational::from_i64(i64::MAX / 2);
        assert!(big.mul(&SmallRational::from_i64(3)).is_none());
        let mut acc = SmallRational::from_i64(i64::MIN / 2);
        assert!(acc.sub_mul(&big, &SmallRational::from_i64(2)).is_none());
    }

    #[test]
    fn recip_keeps_denominator_positive() {
        let v = SmallRational::from_big(&q(-3, 5)).unwrap().recip().unwrap();
        assert_eq!(v.to_big(), q(-5, 3));
    }
}
