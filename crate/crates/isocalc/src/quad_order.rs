//! Exact arithmetic in the endomorphism ring of an elliptic curve: either
//! the rational integers or an order `Z[w]` in an imaginary quadratic field,
//! with `w^2 = t*w - q` and `t^2 - 4q < 0`.
//!
//! Absolute values are never materialized as floats: `norm(x)` is the exact
//! integer `|x|^2`, and all comparisons and bound formulas work with norms
//! (or certified integer square-root ceilings where a plain `|x|` is needed).

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Description of the coefficient ring: `Z`, or `Z[w]` with `w^2 = t*w - q`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum OrderDesc {
    Rational,
    Quadratic { t: i64, q: i64 },
}

impl OrderDesc {
    pub fn rational() -> Self {
        OrderDesc::Rational
    }

    /// An imaginary quadratic order requires a negative discriminant.
    pub fn quadratic(t: i64, q: i64) -> Result<Self> {
        let disc = (t as i128) * (t as i128) - 4 * (q as i128);
        if disc >= 0 {
            return Err(Error::InvalidParams(format!(
                "t^2 - 4q = {disc} is not negative; the order is not imaginary quadratic"
            )));
        }
        Ok(OrderDesc::Quadratic { t, q })
    }

    /// The Gaussian order Z[i].
    pub fn gaussian() -> Self {
        OrderDesc::Quadratic { t: 0, q: 1 }
    }

    /// The Eisenstein order, `w^2 = -w - 1`.
    pub fn eisenstein() -> Self {
        OrderDesc::Quadratic { t: -1, q: 1 }
    }

    pub fn is_rational(&self) -> bool {
        matches!(self, OrderDesc::Rational)
    }
}

impl fmt::Display for OrderDesc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OrderDesc::Rational => write!(f, "Z"),
            OrderDesc::Quadratic { t, q } => write!(f, "Z[w], w^2 = {t}w - {q}"),
        }
    }
}

/// An element `a + b*w` of the order.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct OrderElem {
    a: BigInt,
    b: BigInt,
    order: OrderDesc,
}

impl fmt::Debug for OrderElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for OrderElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.b.is_zero() {
            return write!(f, "{}", self.a);
        }
        if self.a.is_zero() {
            return write!(f, "{}w", self.b);
        }
        if self.b.is_negative() {
            write!(f, "{}{}w", self.a, self.b)
        } else {
            write!(f, "{}+{}w", self.a, self.b)
        }
    }
}

impl OrderElem {
    pub fn new(order: OrderDesc, a: BigInt, b: BigInt) -> Result<Self> {
        if order.is_rational() && !b.is_zero() {
            return Err(Error::NotInOrder);
        }
        Ok(OrderElem { a, b, order })
    }

    pub fn from_int(order: OrderDesc, a: impl Into<BigInt>) -> Self {
        OrderElem { a: a.into(), b: BigInt::zero(), order }
    }

    pub fn zero(order: OrderDesc) -> Self {
        Self::from_int(order, 0)
    }

    pub fn one(order: OrderDesc) -> Self {
        Self::from_int(order, 1)
    }

    /// `w` itself; only available in a quadratic order.
    pub fn omega(order: OrderDesc) -> Result<Self> {
        Self::new(order, BigInt::zero(), BigInt::one())
    }

    pub fn coeff_a(&self) -> &BigInt {
        &self.a
    }

    pub fn coeff_b(&self) -> &BigInt {
        &self.b
    }

    pub fn order(&self) -> OrderDesc {
        self.order
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.a.is_one() && self.b.is_zero()
    }

    /// True when the element is a rational integer (b = 0).
    pub fn is_rational_int(&self) -> bool {
        self.b.is_zero()
    }

    fn tq(&self) -> (BigInt, BigInt) {
        match self.order {
            OrderDesc::Rational => (BigInt::zero(), BigInt::zero()),
            OrderDesc::Quadratic { t, q } => (BigInt::from(t), BigInt::from(q)),
        }
    }

    fn check_same(&self, other: &Self) -> Result<()> {
        if self.order != other.order {
            return Err(Error::OrderMismatch);
        }
        Ok(())
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        Ok(OrderElem {
            a: &self.a + &other.a,
            b: &self.b + &other.b,
            order: self.order,
        })
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        Ok(OrderElem {
            a: &self.a - &other.a,
            b: &self.b - &other.b,
            order: self.order,
        })
    }

    /// Product reduced via `w^2 = t*w - q`:
    /// `(a+bw)(c+dw) = (ac - bdq) + (ad + bc + bdt)w`.
    pub fn checked_mul(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        let (t, q) = self.tq();
        let bd = &self.b * &other.b;
        let a = &self.a * &other.a - &bd * q;
        let b = &self.a * &other.b + &self.b * &other.a + &bd * t;
        Ok(OrderElem { a, b, order: self.order })
    }

    /// Conjugate `a + b*conj(w)` with `conj(w) = t - w`, i.e. `(a + bt) - bw`.
    pub fn conj(&self) -> Self {
        let (t, _) = self.tq();
        OrderElem {
            a: &self.a + &self.b * t,
            b: -&self.b,
            order: self.order,
        }
    }

    /// `|x|^2 = a^2 + abt + b^2 q`, a nonnegative rational integer.
    pub fn norm(&self) -> BigInt {
        let (t, q) = self.tq();
        &self.a * &self.a + &self.a * &self.b * t + &self.b * &self.b * q
    }

    /// Exact division in the order, via `x * conj(y) / norm(y)`.
    pub fn try_div(&self, divisor: &Self) -> Result<Self> {
        self.check_same(divisor)?;
        if divisor.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let num = self.checked_mul(&divisor.conj())?;
        let den = divisor.norm();
        let (qa, ra) = num.a.div_rem(&den);
        let (qb, rb) = num.b.div_rem(&den);
        if !ra.is_zero() || !rb.is_zero() {
            return Err(Error::NotDivisible);
        }
        Ok(OrderElem { a: qa, b: qb, order: self.order })
    }

    /// Divide both coefficients by a rational integer, exactly.
    pub fn div_int(&self, d: &BigInt) -> Result<Self> {
        if d.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let (qa, ra) = self.a.div_rem(d);
        let (qb, rb) = self.b.div_rem(d);
        if !ra.is_zero() || !rb.is_zero() {
            return Err(Error::NotDivisible);
        }
        Ok(OrderElem { a: qa, b: qb, order: self.order })
    }

    /// gcd of the two integer coefficients, used for content computations.
    pub fn coeff_gcd(&self) -> BigInt {
        self.a.gcd(&self.b)
    }
}

impl Add for &OrderElem {
    type Output = OrderElem;
    fn add(self, rhs: &OrderElem) -> OrderElem {
        self.checked_add(rhs).expect("order mismatch in +")
    }
}

impl Sub for &OrderElem {
    type Output = OrderElem;
    fn sub(self, rhs: &OrderElem) -> OrderElem {
        self.checked_sub(rhs).expect("order mismatch in -")
    }
}

impl Mul for &OrderElem {
    type Output = OrderElem;
    fn mul(self, rhs: &OrderElem) -> OrderElem {
        self.checked_mul(rhs).expect("order mismatch in *")
    }
}

impl Neg for &OrderElem {
    type Output = OrderElem;
    fn neg(self) -> OrderElem {
        OrderElem { a: -&self.a, b: -&self.b, order: self.order }
    }
}

/// Floor of the integer square root of a nonnegative integer.
pub fn isqrt_floor(x: &BigInt) -> BigInt {
    assert!(!x.is_negative(), "isqrt of negative value");
    x.sqrt()
}

/// Smallest integer `s` with `s^2 >= x`; certified ceiling of `sqrt(x)`.
pub fn isqrt_ceil(x: &BigInt) -> BigInt {
    let s = isqrt_floor(x);
    if &s * &s == *x {
        s
    } else {
        s + 1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gauss(a: i64, b: i64) -> OrderElem {
        OrderElem::new(OrderDesc::gaussian(), a.into(), b.into()).unwrap()
    }

    fn eis(a: i64, b: i64) -> OrderElem {
        OrderElem::new(OrderDesc::eisenstein(), a.into(), b.into()).unwrap()
    }

    fn zz(a: i64) -> OrderElem {
        OrderElem::from_int(OrderDesc::Rational, a)
    }

    #[test]
    fn descriptor_validation() {
        assert!(OrderDesc::quadratic(0, 1).is_ok());
        assert!(OrderDesc::quadratic(2, 1).is_err()); // disc 0
        assert!(OrderDesc::quadratic(3, 1).is_err()); // real quadratic
        assert!(OrderElem::new(OrderDesc::Rational, 1.into(), 1.into()).is_err());
    }

    #[test]
    fn add_examples() {
        // (1+w) + (2-w) = 3
        assert_eq!(gauss(1, 1).checked_add(&gauss(2, -1)).unwrap(), gauss(3, 0));
        // x + 0 = x
        let x = gauss(5, -7);
        assert_eq!(x.checked_add(&OrderElem::zero(OrderDesc::gaussian())).unwrap(), x);
        // componentwise
        assert_eq!(gauss(1, 2).checked_add(&gauss(3, 4)).unwrap(), gauss(4, 6));
        // mismatched descriptors
        assert!(matches!(
            gauss(1, 0).checked_add(&eis(1, 0)),
            Err(Error::OrderMismatch)
        ));
    }

    #[test]
    fn mul_examples() {
        // Z[i]: (1+w)(1-w) = 2
        assert_eq!(gauss(1, 1).checked_mul(&gauss(1, -1)).unwrap(), gauss(2, 0));
        // x * 1 = x
        let x = eis(4, -3);
        assert_eq!(x.checked_mul(&OrderElem::one(OrderDesc::eisenstein())).unwrap(), x);
        // Eisenstein: w*w = -1 - w
        assert_eq!(eis(0, 1).checked_mul(&eis(0, 1)).unwrap(), eis(-1, -1));
    }

    #[test]
    fn conj_examples() {
        assert_eq!(gauss(1, 1).conj(), gauss(1, -1));
        assert_eq!(zz(5).conj(), zz(5));
        assert_eq!(eis(0, 1).conj(), eis(-1, -1));
        // involution
        let x = eis(3, -4);
        assert_eq!(x.conj().conj(), x);
    }

    #[test]
    fn norm_examples() {
        assert_eq!(gauss(1, 1).norm(), BigInt::from(2));
        assert_eq!(OrderElem::zero(OrderDesc::gaussian()).norm(), BigInt::zero());
        assert_eq!(eis(2, 1).norm(), BigInt::from(3));
    }

    #[test]
    fn try_div_examples() {
        // Z[i]: 2 / (1+i) = 1-i
        assert_eq!(gauss(2, 0).try_div(&gauss(1, 1)).unwrap(), gauss(1, -1));
        // unit divisor
        let x = gauss(7, -2);
        assert_eq!(x.try_div(&OrderElem::one(OrderDesc::gaussian())).unwrap(), x);
        // 1 / 2 is not in the order
        assert!(matches!(zz(1).try_div(&zz(2)), Err(Error::NotDivisible)));
        assert!(matches!(zz(1).try_div(&zz(0)), Err(Error::DivisionByZero)));
    }

    #[test]
    fn x_times_conj_is_norm() {
        for x in [gauss(3, -2), eis(5, 4), zz(-7)] {
            let p = x.checked_mul(&x.conj()).unwrap();
            assert!(p.coeff_b().is_zero());
            assert_eq!(*p.coeff_a(), x.norm());
        }
    }

    #[test]
    fn isqrt_bounds() {
        for v in 0..200i64 {
            let x = BigInt::from(v);
            let f = isqrt_floor(&x);
            let c = isqrt_ceil(&x);
            assert!(&f * &f <= x && x <= &c * &c);
            assert!(&c - &f <= BigInt::one());
        }
    }
}
