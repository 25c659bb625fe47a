//! Matrices over the endomorphism ring, viewed as morphisms `E^N -> E^n`.
//!
//! Determinants and ranks use fraction-free (Bareiss) elimination so that all
//! intermediate values stay in the order; the divisions performed are exact.
//! A square matrix with nonzero determinant is an isogeny; its dual with
//! minimal integer multiplier comes from the adjugate scaled by the conjugate
//! determinant, reduced by the content gcd.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::quad_order::{OrderDesc, OrderElem};

/// A rows x cols matrix of order elements; all entries share one descriptor.
#[derive(Clone, PartialEq, Eq)]
pub struct MorphMatrix {
    order: OrderDesc,
    rows: usize,
    cols: usize,
    data: Vec<OrderElem>,
}

impl fmt::Debug for MorphMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "MorphMatrix {}x{} over {}", self.rows, self.cols, self.order)?;
        for i in 0..self.rows {
            let row: Vec<String> = (0..self.cols).map(|j| self.at(i, j).to_string()).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}

impl MorphMatrix {
    pub fn from_rows(order: OrderDesc, rows: Vec<Vec<OrderElem>>) -> Result<Self> {
        if rows.is_empty() || rows[0].is_empty() {
            return Err(Error::DimensionMismatch("matrix must be at least 1x1".into()));
        }
        let cols = rows[0].len();
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::DimensionMismatch("ragged rows".into()));
        }
        let data: Vec<OrderElem> = rows.into_iter().flatten().collect();
        if data.iter().any(|e| e.order() != order) {
            return Err(Error::OrderMismatch);
        }
        Ok(MorphMatrix { order, rows: data.len() / cols, cols, data })
    }

    /// Convenience constructor from integer entries.
    pub fn from_int_rows(order: OrderDesc, rows: &[&[i64]]) -> Result<Self> {
        let rows = rows
            .iter()
            .map(|r| r.iter().map(|&v| OrderElem::from_int(order, v)).collect())
            .collect();
        Self::from_rows(order, rows)
    }

    pub fn zero(order: OrderDesc, rows: usize, cols: usize) -> Self {
        let data = vec![OrderElem::zero(order); rows * cols];
        MorphMatrix { order, rows, cols, data }
    }

    pub fn identity(order: OrderDesc, n: usize) -> Self {
        let mut m = Self::zero(order, n, n);
        for i in 0..n {
            m.set(i, i, OrderElem::one(order));
        }
        m
    }

    /// `a * Id_n` for a rational integer `a`.
    pub fn scalar(order: OrderDesc, n: usize, a: &BigInt) -> Self {
        let mut m = Self::zero(order, n, n);
        for i in 0..n {
            m.set(i, i, OrderElem::from_int(order, a.clone()));
        }
        m
    }

    pub fn order(&self) -> OrderDesc {
        self.order
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn at(&self, i: usize, j: usize) -> &OrderElem {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: OrderElem) {
        assert_eq!(v.order(), self.order, "entry order mismatch");
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> Vec<OrderElem> {
        (0..self.cols).map(|j| self.at(i, j).clone()).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut m = Self::zero(self.order, self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                m.set(j, i, self.at(i, j).clone());
            }
        }
        m
    }

    pub fn mul(&self, rhs: &Self) -> Result<Self> {
        if self.order != rhs.order {
            return Err(Error::OrderMismatch);
        }
        if self.cols != rhs.rows {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} * {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut out = Self::zero(self.order, self.rows, rhs.cols);
        for i in 0..self.rows {
            for j in 0..rhs.cols {
                let mut acc = OrderElem::zero(self.order);
                for k in 0..self.cols {
                    acc = &acc + &(self.at(i, k) * rhs.at(k, j));
                }
                out.set(i, j, acc);
            }
        }
        Ok(out)
    }

    pub fn scalar_mul(&self, c: &OrderElem) -> Self {
        let data = self.data.iter().map(|e| e * c).collect();
        MorphMatrix { order: self.order, rows: self.rows, cols: self.cols, data }
    }

    pub fn sub(&self, rhs: &Self) -> Result<Self> {
        if self.rows != rhs.rows || self.cols != rhs.cols {
            return Err(Error::DimensionMismatch("sub".into()));
        }
        let data = self
            .data
            .iter()
            .zip(rhs.data.iter())
            .map(|(x, y)| x.checked_sub(y))
            .collect::<Result<Vec<_>>>()?;
        Ok(MorphMatrix { order: self.order, rows: self.rows, cols: self.cols, data })
    }

    /// Rows `lo..hi` as a new matrix.
    pub fn row_slice(&self, lo: usize, hi: usize) -> Self {
        assert!(lo < hi && hi <= self.rows);
        let data = self.data[lo * self.cols..hi * self.cols].to_vec();
        MorphMatrix { order: self.order, rows: hi - lo, cols: self.cols, data }
    }

    /// Columns selected by 0-based indices, in the given sequence.
    pub fn select_cols(&self, cols: &[usize]) -> Self {
        let mut m = Self::zero(self.order, self.rows, cols.len());
        for i in 0..self.rows {
            for (k, &j) in cols.iter().enumerate() {
                m.set(i, k, self.at(i, j).clone());
            }
        }
        m
    }

    /// Permute columns: output column `k` is input column `perm[k]` (0-based).
    pub fn permute_cols(&self, perm: &[usize]) -> Self {
        self.select_cols(perm)
    }

    /// Determinant by fraction-free Bareiss elimination with row pivoting.
    pub fn det(&self) -> Result<OrderElem> {
        if !self.is_square() {
            return Err(Error::NotSquare);
        }
        Ok(bareiss_det(self))
    }

    /// Minor for a strictly increasing 1-based multi-index of column choices.
    pub fn minor(&self, index: &[usize]) -> Result<OrderElem> {
        if index.len() != self.rows {
            return Err(Error::MalformedIndex(format!(
                "expected {} columns, got {}",
                self.rows,
                index.len()
            )));
        }
        for w in index.windows(2) {
            if w[0] >= w[1] {
                return Err(Error::MalformedIndex("indices must be strictly increasing".into()));
            }
        }
        if index.iter().any(|&j| j < 1 || j > self.cols) {
            return Err(Error::MalformedIndex(format!("index out of 1..{}", self.cols)));
        }
        let cols: Vec<usize> = index.iter().map(|&j| j - 1).collect();
        Ok(bareiss_det(&self.select_cols(&cols)))
    }

    /// Determinant of the columns taken in the given 0-based sequence;
    /// unlike `minor`, the sequence need not be sorted, so the sign of the
    /// selection order is kept. Used by the saturation rounds where the
    /// last column of a multi-index is substituted in place.
    pub(crate) fn minor_ordered(&self, cols: &[usize]) -> OrderElem {
        debug_assert_eq!(cols.len(), self.rows);
        bareiss_det(&self.select_cols(cols))
    }

    /// Rank over the fraction field, by fraction-free elimination with full
    /// pivoting (no divisions leave the order).
    pub fn rank(&self) -> usize {
        let mut m = self.clone();
        let steps = m.rows.min(m.cols);
        let mut rank = 0;
        let mut prev = OrderElem::one(self.order);
        for k in 0..steps {
            // find any nonzero pivot in the trailing submatrix
            let mut pivot = None;
            'search: for i in k..m.rows {
                for j in k..m.cols {
                    if !m.at(i, j).is_zero() {
                        pivot = Some((i, j));
                        break 'search;
                    }
                }
            }
            let Some((pi, pj)) = pivot else { break };
            m.swap_rows(k, pi);
            m.swap_cols(k, pj);
            rank += 1;
            for i in k + 1..m.rows {
                for j in k + 1..m.cols {
                    let num = &(m.at(k, k) * m.at(i, j)) - &(m.at(i, k) * m.at(k, j));
                    let v = num.try_div(&prev).expect("bareiss division is exact");
                    m.set(i, j, v);
                }
                m.set(i, k, OrderElem::zero(self.order));
            }
            prev = m.at(k, k).clone();
        }
        rank
    }

    /// Adjugate: `M * adj(M) = adj(M) * M = det(M) * Id`.
    pub fn adjugate(&self) -> Result<Self> {
        if !self.is_square() {
            return Err(Error::NotSquare);
        }
        let n = self.rows;
        if n == 1 {
            return Ok(Self::identity(self.order, 1));
        }
        let mut adj = Self::zero(self.order, n, n);
        for i in 0..n {
            for j in 0..n {
                let sub = self.delete_row_col(i, j);
                let mut c = bareiss_det(&sub);
                if (i + j) % 2 == 1 {
                    c = -&c;
                }
                // adj[j][i] = cofactor(i, j)
                adj.set(j, i, c);
            }
        }
        Ok(adj)
    }

    fn delete_row_col(&self, row: usize, col: usize) -> Self {
        let mut m = Self::zero(self.order, self.rows - 1, self.cols - 1);
        let mut ii = 0;
        for i in 0..self.rows {
            if i == row {
                continue;
            }
            let mut jj = 0;
            for j in 0..self.cols {
                if j == col {
                    continue;
                }
                m.set(ii, jj, self.at(i, j).clone());
                jj += 1;
            }
            ii += 1;
        }
        m
    }

    /// Exact squared operator norm `max_ij |entry|^2`.
    pub fn op_norm_sq(&self) -> BigInt {
        self.data.iter().map(|e| e.norm()).max().unwrap_or_else(BigInt::zero)
    }

    /// True when the matrix equals `a * Id` for the given rational integer.
    pub fn is_int_scalar(&self, a: &BigInt) -> bool {
        if !self.is_square() {
            return false;
        }
        for i in 0..self.rows {
            for j in 0..self.cols {
                let e = self.at(i, j);
                if i == j {
                    if !e.coeff_b().is_zero() || e.coeff_a() != a {
                        return false;
                    }
                } else if !e.is_zero() {
                    return false;
                }
            }
        }
        true
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for i in 0..self.rows {
            self.data.swap(i * self.cols + a, i * self.cols + b);
        }
    }

    /// gcd of all integer coefficients appearing in the matrix.
    pub fn content(&self) -> BigInt {
        let mut g = BigInt::zero();
        for e in &self.data {
            g = g.gcd(&e.coeff_gcd());
        }
        g
    }

    pub fn div_int(&self, d: &BigInt) -> Result<Self> {
        let data = self.data.iter().map(|e| e.div_int(d)).collect::<Result<Vec<_>>>()?;
        Ok(MorphMatrix { order: self.order, rows: self.rows, cols: self.cols, data })
    }

    pub fn map_entries(&self, f: impl Fn(&OrderElem) -> OrderElem) -> Self {
        let data = self.data.iter().map(f).collect();
        MorphMatrix { order: self.order, rows: self.rows, cols: self.cols, data }
    }
}

fn bareiss_det(m: &MorphMatrix) -> OrderElem {
    debug_assert!(m.is_square());
    let n = m.rows;
    let order = m.order;
    if n == 1 {
        return m.at(0, 0).clone();
    }
    let mut m = m.clone();
    let mut sign_flip = false;
    let mut prev = OrderElem::one(order);
    for k in 0..n - 1 {
        if m.at(k, k).is_zero() {
            let Some(swap) = (k + 1..n).find(|&i| !m.at(i, k).is_zero()) else {
                return OrderElem::zero(order);
            };
            m.swap_rows(k, swap);
            sign_flip = !sign_flip;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let num = &(m.at(k, k) * m.at(i, j)) - &(m.at(i, k) * m.at(k, j));
                let v = num.try_div(&prev).expect("bareiss division is exact");
                m.set(i, j, v);
            }
            m.set(i, k, OrderElem::zero(order));
        }
        prev = m.at(k, k).clone();
    }
    let d = m.at(n - 1, n - 1).clone();
    if sign_flip {
        -&d
    } else {
        d
    }
}

/// A square matrix with nonzero determinant.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Isogeny {
    mat: MorphMatrix,
    det: OrderElem,
}

impl Isogeny {
    pub fn new(mat: MorphMatrix) -> Result<Self> {
        let det = mat.det()?;
        if det.is_zero() {
            return Err(Error::NotAnIsogeny);
        }
        Ok(Isogeny { mat, det })
    }

    pub fn matrix(&self) -> &MorphMatrix {
        &self.mat
    }

    pub fn det(&self) -> &OrderElem {
        &self.det
    }

    pub fn size(&self) -> usize {
        self.mat.rows()
    }

    pub fn order(&self) -> OrderDesc {
        self.mat.order()
    }

    /// Number of points killed by the isogeny: `norm(det)`.
    pub fn ker_cardinality(&self) -> BigInt {
        self.det.norm()
    }
}

/// Dual isogeny together with its minimal positive integer multiplier.
#[derive(Clone, Debug)]
pub struct DualResult {
    pub dual: Isogeny,
    pub alpha: BigInt,
}

/// Compute the dual `phi_hat` and the minimal positive integer `alpha` with
/// `phi * phi_hat = phi_hat * phi = [alpha]`.
///
/// With `D = det(phi)`, the matrix `M1 = adj(phi) * conj(D)` satisfies
/// `phi * M1 = norm(D) * Id`. Any integral `psi` with `phi * psi = [beta]`
/// equals `beta/norm(D) * M1`, so beta must clear the denominators of
/// `M1/norm(D)`: the minimal one is `alpha = norm(D)/g` for
/// `g = gcd(norm(D), content(M1))`, and every admissible beta is a multiple
/// of alpha.
pub fn dual_isogeny(phi: &Isogeny) -> DualResult {
    let d = phi.det();
    let adj = phi.matrix().adjugate().expect("isogeny matrices are square");
    let m1 = adj.scalar_mul(&d.conj());
    let norm_d = d.norm();
    let g = norm_d.gcd(&m1.content());
    let alpha = &norm_d / &g;
    let dual_mat = m1.div_int(&g).expect("content divides all coefficients");
    debug_assert!(phi
        .matrix()
        .mul(&dual_mat)
        .expect("square")
        .is_int_scalar(&alpha));
    let dual = Isogeny::new(dual_mat).expect("dual of an isogeny is an isogeny");
    DualResult { dual, alpha }
}

/// True when `beta * phi^{-1}` has all coefficients in the order, i.e. there
/// is an integral `psi` with `phi * psi = [beta]`. Used by the brute-force
/// minimality scan in tests.
pub fn admits_multiplier(phi: &Isogeny, beta: &BigInt) -> bool {
    if beta.is_zero() || beta.is_negative() {
        return false;
    }
    let d = phi.det();
    let adj = phi.matrix().adjugate().expect("square");
    let m1 = adj.scalar_mul(&d.conj());
    // beta * M1 / norm(D) integral  <=>  norm(D) | beta * coefficients
    let norm_d = d.norm();
    m1.scalar_mul(&OrderElem::from_int(phi.order(), beta.clone()))
        .div_int(&norm_d)
        .is_ok()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad_order::OrderDesc;

    fn gm(rows: &[&[(i64, i64)]]) -> MorphMatrix {
        let order = OrderDesc::gaussian();
        let rows: Vec<Vec<OrderElem>> = rows
            .iter()
            .map(|r| {
                r.iter()
                    .map(|&(a, b)| OrderElem::new(order, a.into(), b.into()).unwrap())
                    .collect()
            })
            .collect();
        MorphMatrix::from_rows(order, rows).unwrap()
    }

    #[test]
    fn det_examples() {
        let z = OrderDesc::Rational;
        assert!(MorphMatrix::identity(z, 4).det().unwrap().is_one());
        let diag = MorphMatrix::from_int_rows(z, &[&[2, 0], &[0, 3]]).unwrap();
        assert_eq!(diag.det().unwrap(), OrderElem::from_int(z, 6));
        // Z[i]: det [[1+i, 1], [1, 1-i]] = 2 - 1 = 1
        let m = gm(&[&[(1, 1), (1, 0)], &[(1, 0), (1, -1)]]);
        assert!(m.det().unwrap().is_one());
    }

    #[test]
    fn det_needs_pivoting() {
        let z = OrderDesc::Rational;
        let m = MorphMatrix::from_int_rows(z, &[&[0, 1], &[1, 0]]).unwrap();
        assert_eq!(m.det().unwrap(), OrderElem::from_int(z, -1));
        let m3 = MorphMatrix::from_int_rows(z, &[&[0, 0, 1], &[0, 2, 0], &[3, 0, 0]]).unwrap();
        assert_eq!(m3.det().unwrap(), OrderElem::from_int(z, -6));
    }

    #[test]
    fn minor_examples() {
        let z = OrderDesc::Rational;
        let psi = MorphMatrix::from_int_rows(z, &[&[1, 0]]).unwrap();
        assert!(psi.minor(&[1]).unwrap().is_one());
        assert!(psi.minor(&[2]).unwrap().is_zero());
        let m = MorphMatrix::from_int_rows(z, &[&[1, 0, 1], &[0, 1, 1]]).unwrap();
        assert!(m.minor(&[1, 3]).unwrap().is_one());
        assert!(m.minor(&[1, 1]).is_err());
        assert!(m.minor(&[0, 2]).is_err());
        assert!(m.minor(&[1, 2, 3]).is_err());
    }

    #[test]
    fn rank_examples() {
        let z = OrderDesc::Rational;
        assert_eq!(MorphMatrix::zero(z, 2, 3).rank(), 0);
        assert_eq!(MorphMatrix::identity(z, 3).rank(), 3);
        let m = MorphMatrix::from_int_rows(z, &[&[1, 2], &[2, 4]]).unwrap();
        assert_eq!(m.rank(), 1);
    }

    #[test]
    fn adjugate_examples() {
        let z = OrderDesc::Rational;
        let id = MorphMatrix::identity(z, 3);
        assert_eq!(id.adjugate().unwrap(), id);
        let diag = MorphMatrix::from_int_rows(z, &[&[2, 0], &[0, 3]]).unwrap();
        let adj = diag.adjugate().unwrap();
        assert_eq!(adj, MorphMatrix::from_int_rows(z, &[&[3, 0], &[0, 2]]).unwrap());
        // M * adj(M) = det * Id, including a singular case
        let m = MorphMatrix::from_int_rows(z, &[&[1, 2, 3], &[4, 5, 6], &[7, 8, 10]]).unwrap();
        let det = m.det().unwrap();
        let prod = m.mul(&m.adjugate().unwrap()).unwrap();
        assert!(prod.is_int_scalar(det.coeff_a()));
    }

    #[test]
    fn dual_isogeny_examples() {
        let z = OrderDesc::Rational;
        // identity
        let id = Isogeny::new(MorphMatrix::identity(z, 3)).unwrap();
        let d = dual_isogeny(&id);
        assert_eq!(d.alpha, BigInt::from(1));
        assert_eq!(d.dual.matrix(), id.matrix());

        // diag(2,3): alpha = 6, dual = diag(3,2)
        let phi = Isogeny::new(MorphMatrix::from_int_rows(z, &[&[2, 0], &[0, 3]]).unwrap()).unwrap();
        let d = dual_isogeny(&phi);
        assert_eq!(d.alpha, BigInt::from(6));
        assert_eq!(
            d.dual.matrix(),
            &MorphMatrix::from_int_rows(z, &[&[3, 0], &[0, 2]]).unwrap()
        );

        // Z[i], 1x1: phi = (1+i) -> dual (1-i), alpha = 2
        let g = OrderDesc::gaussian();
        let phi = Isogeny::new(
            MorphMatrix::from_rows(g, vec![vec![OrderElem::new(g, 1.into(), 1.into()).unwrap()]])
                .unwrap(),
        )
        .unwrap();
        let d = dual_isogeny(&phi);
        assert_eq!(d.alpha, BigInt::from(2));
        assert_eq!(
            d.dual.matrix().at(0, 0),
            &OrderElem::new(g, 1.into(), (-1).into()).unwrap()
        );
    }

    #[test]
    fn dual_identity_and_norm_product() {
        let phi = Isogeny::new(gm(&[&[(1, 1), (0, 1)], &[(2, 0), (1, -1)]])).unwrap();
        let DualResult { dual, alpha } = dual_isogeny(&phi);
        let left = phi.matrix().mul(dual.matrix()).unwrap();
        let right = dual.matrix().mul(phi.matrix()).unwrap();
        assert!(left.is_int_scalar(&alpha));
        assert!(right.is_int_scalar(&alpha));
        // norm(det dual) * norm(det phi) = alpha^(2N)
        let prod = dual.det().norm() * phi.det().norm();
        assert_eq!(prod, alpha.pow(4));
        // minimality: every divisor beta < alpha of norm(det) fails
        let norm_d = phi.det().norm();
        let mut beta = BigInt::from(1);
        while &beta < &norm_d {
            if (&norm_d % &beta).is_zero() && beta < alpha {
                assert!(!admits_multiplier(&phi, &beta), "beta={beta} should fail");
            }
            beta += 1;
        }
        assert!(admits_multiplier(&phi, &alpha));
    }

    #[test]
    fn ker_cardinality_examples() {
        let z = OrderDesc::Rational;
        let two = Isogeny::new(MorphMatrix::from_int_rows(z, &[&[2]]).unwrap()).unwrap();
        assert_eq!(two.ker_cardinality(), BigInt::from(4));
        let id = Isogeny::new(MorphMatrix::identity(z, 2)).unwrap();
        assert_eq!(id.ker_cardinality(), BigInt::from(1));
        let g = OrderDesc::gaussian();
        let phi = Isogeny::new(
            MorphMatrix::from_rows(g, vec![vec![OrderElem::new(g, 1.into(), 1.into()).unwrap()]])
                .unwrap(),
        )
        .unwrap();
        assert_eq!(phi.ker_cardinality(), BigInt::from(2));
    }

    #[test]
    fn op_norm_sq_examples() {
        let z = OrderDesc::Rational;
        assert_eq!(MorphMatrix::identity(z, 2).op_norm_sq(), BigInt::from(1));
        let m = MorphMatrix::from_int_rows(z, &[&[3, -5], &[0, 2]]).unwrap();
        assert_eq!(m.op_norm_sq(), BigInt::from(25));
        let g = gm(&[&[(1, 1)]]);
        assert_eq!(g.op_norm_sq(), BigInt::from(2));
    }
}
