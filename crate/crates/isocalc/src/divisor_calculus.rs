//! Formal first-Chern-class calculus on `E^n`.
//!
//! A class is a multiset of kernel-row divisors `ker(c)` for nonzero rows
//! `c`, with boxplus as multiset sum. Degrees are intersection numbers: the
//! mixed intersection of n kernel rows is `norm(det)` of the stacked matrix,
//! zero when singular, and the degree of a class is `n!` times the sum over
//! all n-element row choices. In this convention `deg(E^n) = n!`; the cubic
//! projective embedding instead gives `3^n`, and reports surface both values
//! rather than reconciling them.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::morphism_matrix::{Isogeny, MorphMatrix};
use crate::quad_order::{OrderDesc, OrderElem};
use crate::util::{binom, subsets};

/// A nonzero row `c`, standing for the divisor class `ker(c : E^n -> E)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KernelRow {
    row: Vec<OrderElem>,
}

impl KernelRow {
    pub fn new(row: Vec<OrderElem>) -> Result<Self> {
        if row.is_empty() {
            return Err(Error::DimensionMismatch("kernel row must be nonempty".into()));
        }
        let order = row[0].order();
        if row.iter().any(|e| e.order() != order) {
            return Err(Error::OrderMismatch);
        }
        if row.iter().all(|e| e.is_zero()) {
            return Err(Error::InvalidParams("kernel row must be nonzero".into()));
        }
        Ok(KernelRow { row })
    }

    pub fn entries(&self) -> &[OrderElem] {
        &self.row
    }

    pub fn len(&self) -> usize {
        self.row.len()
    }

    pub fn is_empty(&self) -> bool {
        self.row.is_empty()
    }

    pub fn order(&self) -> OrderDesc {
        self.row[0].order()
    }
}

/// Multiset of kernel rows with positive multiplicities.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DivisorClass {
    n: usize,
    order: OrderDesc,
    parts: Vec<(KernelRow, BigUint)>,
}

impl DivisorClass {
    pub fn from_parts(
        order: OrderDesc,
        n: usize,
        parts: Vec<(KernelRow, BigUint)>,
    ) -> Result<Self> {
        let mut class = DivisorClass { n, order, parts: Vec::new() };
        for (row, mult) in parts {
            class.insert(row, mult)?;
        }
        Ok(class)
    }

    fn insert(&mut self, row: KernelRow, mult: BigUint) -> Result<()> {
        if row.len() != self.n {
            return Err(Error::DimensionMismatch(format!(
                "row length {} in a class on E^{}",
                row.len(),
                self.n
            )));
        }
        if row.order() != self.order {
            return Err(Error::OrderMismatch);
        }
        if mult.is_zero() {
            return Err(Error::InvalidParams("multiplicity must be positive".into()));
        }
        if let Some((_, m)) = self.parts.iter_mut().find(|(r, _)| *r == row) {
            *m += mult;
        } else {
            self.parts.push((row, mult));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn order(&self) -> OrderDesc {
        self.order
    }

    pub fn parts(&self) -> &[(KernelRow, BigUint)] {
        &self.parts
    }
}

/// `c1` of the standard bundle: the n unit rows, multiplicity 1 each.
pub fn c1_standard(order: OrderDesc, n: usize) -> DivisorClass {
    let mut parts = Vec::with_capacity(n);
    for i in 0..n {
        let mut row = vec![OrderElem::zero(order); n];
        row[i] = OrderElem::one(order);
        parts.push((KernelRow { row }, BigUint::one()));
    }
    DivisorClass { n, order, parts }
}

/// Pullback along an isogeny: each row `c` becomes `c * psi`.
pub fn pullback(class: &DivisorClass, psi: &Isogeny) -> Result<DivisorClass> {
    if psi.size() != class.n {
        return Err(Error::DimensionMismatch(format!(
            "isogeny on E^{} pulled back against a class on E^{}",
            psi.size(),
            class.n
        )));
    }
    if psi.order() != class.order {
        return Err(Error::OrderMismatch);
    }
    let mut out = DivisorClass { n: class.n, order: class.order, parts: Vec::new() };
    for (row, mult) in &class.parts {
        let as_mat = MorphMatrix::from_rows(class.order, vec![row.row.clone()])?;
        let image = as_mat.mul(psi.matrix())?;
        out.insert(KernelRow::new(image.row(0))?, mult.clone())?;
    }
    Ok(out)
}

/// Multiset union with multiplicity addition.
pub fn tensor(classes: &[DivisorClass]) -> Result<DivisorClass> {
    let Some(first) = classes.first() else {
        return Err(Error::InvalidParams("tensor of an empty list".into()));
    };
    let mut out = DivisorClass { n: first.n, order: first.order, parts: Vec::new() };
    for class in classes {
        if class.n != first.n {
            return Err(Error::DimensionMismatch("tensor across different dimensions".into()));
        }
        for (row, mult) in &class.parts {
            out.insert(row.clone(), mult.clone())?;
        }
    }
    Ok(out)
}

/// Tensor power: multiplicities scaled by m >= 1.
pub fn power(class: &DivisorClass, m: &BigUint) -> Result<DivisorClass> {
    if m.is_zero() {
        return Err(Error::InvalidParams("power must be >= 1".into()));
    }
    let parts = class
        .parts
        .iter()
        .map(|(r, mult)| (r.clone(), mult * m))
        .collect();
    Ok(DivisorClass { n: class.n, order: class.order, parts })
}

/// Intersection-number degree: `n! * sum over n-element row choices of
/// norm(det)`, with the product of multiplicities counting repetitions.
/// Choices with a repeated row vanish through the determinant.
pub fn degree_int(class: &DivisorClass) -> BigInt {
    let n = class.n;
    let mut total = BigInt::zero();
    for subset in subsets(class.parts.len(), n) {
        let rows: Vec<Vec<OrderElem>> = subset
            .iter()
            .map(|&k| class.parts[k].0.row.clone())
            .collect();
        let mat = MorphMatrix::from_rows(class.order, rows).expect("rows share the class order");
        let nrm = mat.det().expect("square").norm();
        if nrm.is_zero() {
            continue;
        }
        let mut mult = BigInt::one();
        for &k in &subset {
            mult *= BigInt::from(class.parts[k].1.clone());
        }
        total += mult * nrm;
    }
    let mut factorial = BigInt::one();
    for k in 2..=n {
        factorial *= BigInt::from(k as u64);
    }
    factorial * total
}

/// Both sides of the tensor-degree identity for a family of N rows on `E^n`.
#[derive(Clone, Debug)]
pub struct GaelCheck {
    pub lhs: BigInt,
    pub rhs: BigInt,
    pub equal: bool,
}

/// Compare the degree of the full tensor class (each row with multiplicity
/// `C(N-1, n-1)`) against `C(N-1, n-1)^n` times the sum of the per-index
/// pullback degrees `n! * norm(det of the stacked rows)`. Degenerate
/// families with vanishing stacked determinants are allowed; those terms
/// contribute zero on both sides.
pub fn gael_check(rows: &[Vec<OrderElem>], n: usize) -> Result<GaelCheck> {
    if rows.is_empty() {
        return Err(Error::InvalidParams("empty row family".into()));
    }
    if rows.iter().any(|r| r.len() != n) {
        return Err(Error::DimensionMismatch("all rows must have length n".into()));
    }
    let order = rows[0][0].order();
    let big_n = rows.len();
    let mult = binom(big_n as u64 - 1, n as u64 - 1)
        .to_biguint()
        .expect("binomial is nonnegative");

    let parts = rows
        .iter()
        .map(|r| Ok((KernelRow::new(r.clone())?, mult.clone())))
        .collect::<Result<Vec<_>>>()?;
    let lhs_class = DivisorClass::from_parts(order, n, parts)?;
    let lhs = degree_int(&lhs_class);

    let mut factorial = BigInt::one();
    for k in 2..=n {
        factorial *= BigInt::from(k as u64);
    }
    let mut sum = BigInt::zero();
    for subset in subsets(big_n, n) {
        let chosen: Vec<Vec<OrderElem>> = subset.iter().map(|&k| rows[k].clone()).collect();
        let mat = MorphMatrix::from_rows(order, chosen)?;
        sum += mat.det()?.norm();
    }
    let mult_int = BigInt::from(mult);
    let rhs = mult_int.pow(n as u32) * factorial * sum;

    Ok(GaelCheck { equal: lhs == rhs, lhs, rhs })
}

/// Degree transfer onto the ambient standard bundle: multiply by
/// `[alpha^2 * C(N-1, n-1)]^dim`. The essential-minimum variant is the
/// `dim = 1` case.
pub fn restriction_degree_transfer(
    alpha: &BigInt,
    big_n: u64,
    n: u64,
    dim: u32,
    value: &BigRational,
) -> BigRational {
    let factor = (alpha * alpha * binom(big_n - 1, n - 1)).pow(dim);
    value * BigRational::from_integer(factor)
}

/// Convention adapter: degree factor `p^dim` for an embedding by the p-th
/// power of the bundle (the customary choice is p = 3).
pub fn embedding_factor(p: u64, dim: u32) -> BigInt {
    BigInt::from(p).pow(dim)
}
