//! Symbolic products of named positive rational bases with rational
//! exponents. These carry the constant chains: exact when all exponents are
//! integral, otherwise evaluated with directed rounding.

use num_bigint::BigInt;
use num_integer::Roots;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::Result;

use super::dyadic::{pow_rational, Dir};

#[derive(Clone, Debug)]
pub struct PowFactor {
    pub label: String,
    pub base: BigRational,
    pub exp: BigRational,
}

/// `prod_i base_i ^ exp_i`, kept in insertion order for rendering.
#[derive(Clone, Debug, Default)]
pub struct PowProduct {
    factors: Vec<PowFactor>,
}

impl PowProduct {
    pub fn new() -> Self {
        PowProduct { factors: Vec::new() }
    }

    pub fn push(&mut self, label: impl Into<String>, base: BigRational, exp: BigRational) {
        if exp.is_zero() || base.is_one() {
            return;
        }
        self.factors.push(PowFactor { label: label.into(), base, exp });
    }

    pub fn with(mut self, label: impl Into<String>, base: BigRational, exp: BigRational) -> Self {
        self.push(label, base, exp);
        self
    }

    pub fn extend(&mut self, other: &PowProduct) {
        self.factors.extend(other.factors.iter().cloned());
    }

    pub fn factors(&self) -> &[PowFactor] {
        &self.factors
    }

    /// Exponents merged by base value and sorted, for structural equality.
    /// Perfect-power bases reduce to their root first, so `27^(1/2)` and
    /// `3^(3/2)` normalize identically.
    pub fn normalized(&self) -> Vec<(BigRational, BigRational)> {
        let mut merged: Vec<(BigRational, BigRational)> = Vec::new();
        for f in &self.factors {
            let (base, k) = canonical_root(&f.base);
            let exp = &f.exp * BigRational::from_integer(k.into());
            if let Some(entry) = merged.iter_mut().find(|(b, _)| *b == base) {
                entry.1 += exp;
            } else {
                merged.push((base, exp));
            }
        }
        merged.retain(|(_, e)| !e.is_zero());
        merged.sort_by(|a, b| a.0.cmp(&b.0));
        merged
    }

    pub fn equivalent(&self, other: &PowProduct) -> bool {
        self.normalized() == other.normalized()
    }

    /// Exact rational value when every merged exponent is an integer.
    pub fn exact_rational(&self) -> Option<BigRational> {
        let mut acc = BigRational::one();
        for (base, exp) in self.normalized() {
            if !exp.is_integer() {
                return None;
            }
            let k = exp.to_integer();
            let p = u32::try_from(k.magnitude()).ok()?;
            let powered = BigRational::new(base.numer().pow(p), base.denom().pow(p));
            if k.is_negative() {
                acc /= powered;
            } else {
                acc *= powered;
            }
        }
        Some(acc)
    }

    /// Directed evaluation at the given precision; products that are exactly
    /// rational (all merged exponents integral) are returned exactly.
    pub fn eval(&self, prec: u32, dir: Dir) -> Result<BigRational> {
        if let Some(v) = self.exact_rational() {
            return Ok(v);
        }
        let work = prec + 8;
        let mut acc = super::dyadic::Dyadic::one();
        for f in &self.factors {
            let fv = pow_rational(&f.base, &f.exp, work, dir)?;
            acc = acc.mul(&fv, work, dir);
        }
        Ok(acc.round(prec, dir).to_rational())
    }

    /// Render as `label^(exp)` pieces joined by " * "; an exponent of one is
    /// dropped, an empty product renders as "1".
    pub fn render(&self) -> String {
        if self.factors.is_empty() {
            return "1".to_string();
        }
        self.factors
            .iter()
            .map(|f| {
                if f.exp.is_one() {
                    f.label.clone()
                } else {
                    format!("{}^({})", f.label, render_rational(&f.exp))
                }
            })
            .collect::<Vec<_>>()
            .join(" * ")
    }
}

pub fn render_rational(r: &BigRational) -> String {
    if r.is_integer() {
        r.to_integer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Write a positive rational as `root^k` with k maximal; returns `(r, 1)`
/// when the input is not a perfect power.
fn canonical_root(r: &BigRational) -> (BigRational, u32) {
    if !r.is_positive() {
        return (r.clone(), 1);
    }
    let num = r.numer().magnitude();
    let den = r.denom().magnitude();
    if num.is_one() && den.is_one() {
        return (r.clone(), 1);
    }
    let max_k = num.max(den).bits().max(2) as u32;
    for k in (2..=max_k).rev() {
        let rn = num.nth_root(k);
        let rd = den.nth_root(k);
        if rn.pow(k) == *num && rd.pow(k) == *den {
            return (
                BigRational::new(BigInt::from(rn), BigInt::from(rd)),
                k,
            );
        }
    }
    (r.clone(), 1)
}
