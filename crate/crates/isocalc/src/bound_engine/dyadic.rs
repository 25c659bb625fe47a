//! Directed-rounded dyadic arithmetic on positive values.
//!
//! A `Dyadic` is `mant * 2^exp` with a nonnegative big mantissa. Every
//! operation takes a working precision and a rounding direction; `Down`
//! results never exceed the true value and `Up` results never fall below it.
//! Rounding is maximal at its scale and dyadic grids are nested, so widening
//! the precision can only move a `Down` result upward (and an `Up` result
//! downward) — the soundness property the certified bounds rely on.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Dir {
    Down,
    Up,
}

impl Dir {
    pub fn flip(self) -> Dir {
        match self {
            Dir::Down => Dir::Up,
            Dir::Up => Dir::Down,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dyadic {
    mant: BigUint,
    exp: i64,
}

impl Dyadic {
    pub fn zero() -> Self {
        Dyadic { mant: BigUint::zero(), exp: 0 }
    }

    pub fn one() -> Self {
        Dyadic { mant: BigUint::one(), exp: 0 }
    }

    pub fn from_biguint(v: BigUint) -> Self {
        Dyadic { mant: v, exp: 0 }
    }

    pub fn is_zero(&self) -> bool {
        self.mant.is_zero()
    }

    pub fn to_rational(&self) -> BigRational {
        let mant = BigInt::from(self.mant.clone());
        if self.exp >= 0 {
            BigRational::from_integer(mant << self.exp as u64)
        } else {
            BigRational::new(mant, BigInt::one() << (-self.exp) as u64)
        }
    }

    /// Keep at most `prec` significant bits, rounding in `dir`.
    pub fn round(mut self, prec: u32, dir: Dir) -> Self {
        let bits = self.mant.bits();
        if bits <= prec as u64 {
            return self;
        }
        let drop = bits - prec as u64;
        let dropped_nonzero = {
            let mask = (BigUint::one() << drop) - BigUint::one();
            !(&self.mant & mask).is_zero()
        };
        self.mant >>= drop;
        self.exp += drop as i64;
        if dir == Dir::Up && dropped_nonzero {
            self.mant += BigUint::one();
        }
        self
    }

    pub fn mul(&self, other: &Dyadic, prec: u32, dir: Dir) -> Dyadic {
        Dyadic {
            mant: &self.mant * &other.mant,
            exp: self.exp + other.exp,
        }
        .round(prec, dir)
    }

    /// `self / other`, with `other` nonzero.
    pub fn div(&self, other: &Dyadic, prec: u32, dir: Dir) -> Dyadic {
        assert!(!other.mant.is_zero(), "division by dyadic zero");
        if self.is_zero() {
            return Dyadic::zero();
        }
        let need = other.mant.bits() + prec as u64 + 2;
        let shift = need.saturating_sub(self.mant.bits());
        let scaled = &self.mant << shift;
        let (q, r) = scaled.div_rem(&other.mant);
        let mut q = q;
        if dir == Dir::Up && !r.is_zero() {
            q += BigUint::one();
        }
        Dyadic {
            mant: q,
            exp: self.exp - other.exp - shift as i64,
        }
        .round(prec, dir)
    }

    /// Integer power by squaring, rounded along the way.
    pub fn pow_uint(&self, e: &BigUint, prec: u32, dir: Dir) -> Dyadic {
        if e.is_zero() {
            return Dyadic::one();
        }
        let work = prec + 8;
        let mut result = Dyadic::one();
        let mut base = self.clone().round(work, dir);
        let bits = e.bits();
        for i in (0..bits).rev() {
            result = result.mul(&result, work, dir);
            if e.bit(i) {
                result = result.mul(&base, work, dir);
            }
            // base only participates once per bit; keep it rounded
            base = base.round(work, dir);
        }
        result.round(prec, dir)
    }

    /// q-th root with directed rounding. The shift is chosen so the scaled
    /// exponent is divisible by q and the scaled mantissa carries enough
    /// bits; grids for different precisions nest.
    pub fn nth_root(&self, q: u32, prec: u32, dir: Dir) -> Dyadic {
        assert!(q >= 1);
        if self.is_zero() {
            return Dyadic::zero();
        }
        if q == 1 {
            return self.clone().round(prec, dir);
        }
        let target_bits = (q as u64) * (prec as u64 + 2);
        let mut shift = target_bits.saturating_sub(self.mant.bits());
        while (self.exp - shift as i64).rem_euclid(q as i64) != 0 {
            shift += 1;
        }
        let scaled = &self.mant << shift;
        let root = scaled.nth_root(q);
        let mut root = root;
        if dir == Dir::Up && root.clone().pow(q) != scaled {
            root += BigUint::one();
        }
        Dyadic {
            mant: root,
            exp: (self.exp - shift as i64) / q as i64,
        }
        .round(prec, dir)
    }

    pub fn cmp_value(&self, other: &Dyadic) -> std::cmp::Ordering {
        // align exponents and compare mantissas
        let (a, b) = if self.exp >= other.exp {
            (&self.mant << (self.exp - other.exp) as u64, other.mant.clone())
        } else {
            (self.mant.clone(), &other.mant << (other.exp - self.exp) as u64)
        };
        a.cmp(&b)
    }
}

/// Directed conversion of a positive rational.
pub fn from_ratio(value: &BigRational, prec: u32, dir: Dir) -> Result<Dyadic> {
    if value.is_negative() {
        return Err(Error::InvalidParams("negative value in positive dyadic context".into()));
    }
    if value.is_zero() {
        return Ok(Dyadic::zero());
    }
    let num = value.numer().magnitude().clone();
    let den = value.denom().magnitude().clone();
    Ok(Dyadic::from_biguint(num).div(&Dyadic::from_biguint(den), prec, dir))
}

/// `base^(p/q)` for a positive rational base and rational exponent, with
/// directed rounding. Integer powers of the base are taken exactly before
/// the root, so the only rounding happens in the division and the root.
pub fn pow_rational(base: &BigRational, exp: &BigRational, prec: u32, dir: Dir) -> Result<Dyadic> {
    if !base.is_positive() {
        return Err(Error::InvalidParams(format!("base {base} must be positive")));
    }
    if exp.is_zero() {
        return Ok(Dyadic::one());
    }
    if exp.is_negative() {
        let inner = pow_rational(base, &-exp, prec + 8, dir.flip())?;
        return Ok(Dyadic::one().div(&inner, prec, dir));
    }
    let p = exp
        .numer()
        .to_u32()
        .ok_or_else(|| Error::InvalidParams("exponent numerator too large".into()))?;
    let q = exp
        .denom()
        .to_u32()
        .ok_or_else(|| Error::InvalidParams("exponent denominator too large".into()))?;
    let num = base.numer().magnitude().pow(p);
    let den = base.denom().magnitude().pow(p);
    let work = prec + 8;
    let powered = Dyadic::from_biguint(num).div(&Dyadic::from_biguint(den), work, dir);
    Ok(powered.nth_root(q, prec, dir))
}

/// Decimal rendering with directed rounding, for reports.
pub fn decimal_string(value: &BigRational, digits: usize, dir: Dir) -> String {
    let negative = value.is_negative();
    let v = value.abs();
    let scale = BigInt::from(10u32).pow(digits as u32);
    let scaled = v.numer() * &scale;
    let (mut q, r) = scaled.div_rem(v.denom());
    let round_up = match (dir, negative) {
        (Dir::Up, false) | (Dir::Down, true) => !r.is_zero(),
        _ => false,
    };
    if round_up {
        q += 1;
    }
    let digits_str = q.to_string();
    let (int_part, frac_part) = if digits_str.len() > digits {
        let split = digits_str.len() - digits;
        (digits_str[..split].to_string(), digits_str[split..].to_string())
    } else {
        ("0".to_string(), format!("{digits_str:0>digits$}"))
    };
    let sign = if negative { "-" } else { "" };
    format!("{sign}{int_part}.{frac_part}")
}
