//! Brute-force ground truth on finite torsion grids.
//!
//! `E[m]^N` is modeled as `((Z/m)^2)^N`; an order element `a + b*w` acts on a
//! pair by `a*Id + b*W` where `W` is the companion matrix of `w^2 = t*w - q`
//! reduced mod m. No curve equations enter: this is exactly the module
//! structure the kernel and stabilizer identities use, and it lets every
//! identity be checked by exhaustive enumeration at desk scale.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::morphism_matrix::{dual_isogeny, Isogeny, MorphMatrix};
use crate::quad_order::{OrderDesc, OrderElem};

pub const DEFAULT_BUDGET: u128 = 10_000_000;

/// Finite model of `E[m]` with the companion-matrix action of the order.
#[derive(Clone, Copy, Debug)]
pub struct TorsionModel {
    m: u64,
    order: OrderDesc,
}

/// A point of `E[m]^N`: N pairs, components reduced mod m.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct TorsionPoint {
    coords: Vec<[u64; 2]>,
}

impl TorsionPoint {
    pub fn zero(n: usize) -> Self {
        TorsionPoint { coords: vec![[0, 0]; n] }
    }

    pub fn coords(&self) -> &[[u64; 2]] {
        &self.coords
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|c| c[0] == 0 && c[1] == 0)
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }
}

pub type PointSet = BTreeSet<TorsionPoint>;

impl TorsionModel {
    pub fn new(m: u64, order: OrderDesc) -> Result<Self> {
        if m < 2 {
            return Err(Error::InvalidParams("torsion modulus must be >= 2".into()));
        }
        Ok(TorsionModel { m, order })
    }

    pub fn modulus(&self) -> u64 {
        self.m
    }

    pub fn order(&self) -> OrderDesc {
        self.order
    }

    /// Companion matrix of `w` mod m; the identity action never uses it in
    /// the rational case.
    fn omega_action(&self) -> [[u64; 2]; 2] {
        match self.order {
            OrderDesc::Rational => [[0, 0], [0, 0]],
            OrderDesc::Quadratic { t, q } => {
                let m = self.m as i128;
                let mq = (-(q as i128)).rem_euclid(m) as u64;
                let mt = (t as i128).rem_euclid(m) as u64;
                [[0, mq], [1, mt]]
            }
        }
    }

    /// The 2x2 action of an order element on `(Z/m)^2`.
    pub fn elem_action(&self, e: &OrderElem) -> [[u64; 2]; 2] {
        let m_big = BigInt::from(self.m);
        let red = |v: &BigInt| -> u64 {
            let r = v.mod_floor(&m_big);
            u64::try_from(&r).expect("reduced residue fits u64")
        };
        let a = red(e.coeff_a());
        let b = red(e.coeff_b());
        let w = self.omega_action();
        let m = self.m as u128;
        let mut out = [[0u64; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                let id = if i == j { a as u128 } else { 0 };
                let v = (id + (b as u128) * (w[i][j] as u128)) % m;
                out[i][j] = v as u64;
            }
        }
        out
    }

    pub fn point(&self, coords: Vec<[u64; 2]>) -> TorsionPoint {
        TorsionPoint {
            coords: coords.iter().map(|c| [c[0] % self.m, c[1] % self.m]).collect(),
        }
    }

    pub fn add(&self, x: &TorsionPoint, y: &TorsionPoint) -> TorsionPoint {
        debug_assert_eq!(x.len(), y.len());
        TorsionPoint {
            coords: x
                .coords
                .iter()
                .zip(&y.coords)
                .map(|(a, b)| [(a[0] + b[0]) % self.m, (a[1] + b[1]) % self.m])
                .collect(),
        }
    }

    pub fn neg(&self, x: &TorsionPoint) -> TorsionPoint {
        TorsionPoint {
            coords: x
                .coords
                .iter()
                .map(|c| [(self.m - c[0]) % self.m, (self.m - c[1]) % self.m])
                .collect(),
        }
    }

    /// Scalar multiple by a plain integer.
    pub fn int_mul(&self, k: u64, x: &TorsionPoint) -> TorsionPoint {
        let k = (k as u128) % (self.m as u128);
        TorsionPoint {
            coords: x
                .coords
                .iter()
                .map(|c| {
                    [
                        ((c[0] as u128 * k) % self.m as u128) as u64,
                        ((c[1] as u128 * k) % self.m as u128) as u64,
                    ]
                })
                .collect(),
        }
    }

    /// Evaluate a matrix morphism on a point of `E[m]^cols`.
    pub fn eval(&self, mat: &MorphMatrix, x: &TorsionPoint) -> Result<TorsionPoint> {
        if mat.order() != self.order {
            return Err(Error::OrderMismatch);
        }
        if mat.cols() != x.len() {
            return Err(Error::DimensionMismatch(format!(
                "matrix has {} columns, point has {} components",
                mat.cols(),
                x.len()
            )));
        }
        let m = self.m as u128;
        let mut out = Vec::with_capacity(mat.rows());
        for i in 0..mat.rows() {
            let mut acc = [0u128; 2];
            for j in 0..mat.cols() {
                let act = self.elem_action(mat.at(i, j));
                let xj = &x.coords[j];
                acc[0] += act[0][0] as u128 * xj[0] as u128 + act[0][1] as u128 * xj[1] as u128;
                acc[1] += act[1][0] as u128 * xj[0] as u128 + act[1][1] as u128 * xj[1] as u128;
            }
            out.push([(acc[0] % m) as u64, (acc[1] % m) as u64]);
        }
        Ok(TorsionPoint { coords: out })
    }

    /// Number of points of `E[m]^n`, for budget checks.
    pub fn grid_size(&self, n: usize) -> u128 {
        let mut total: u128 = 1;
        for _ in 0..2 * n {
            total = total.saturating_mul(self.m as u128);
        }
        total
    }

    fn check_budget(&self, n: usize, budget: u128) -> Result<()> {
        let needed = self.grid_size(n);
        if needed > budget {
            return Err(Error::EnumerationBudget { needed, budget });
        }
        Ok(())
    }

    /// Iterate over every point of `E[m]^n`.
    pub fn points(&self, n: usize) -> PointIter {
        PointIter { m: self.m, digits: vec![0; 2 * n], done: n == 0 }
    }

    /// All points, as a set.
    pub fn all_points(&self, n: usize, budget: u128) -> Result<PointSet> {
        self.check_budget(n, budget)?;
        Ok(self.points(n).collect())
    }

    /// Preimage of a set under a matrix morphism, within the model grid.
    pub fn preimage(&self, mat: &MorphMatrix, target: &PointSet, budget: u128) -> Result<PointSet> {
        self.check_budget(mat.cols(), budget)?;
        let mut out = PointSet::new();
        for x in self.points(mat.cols()) {
            if target.contains(&self.eval(mat, &x)?) {
                out.insert(x);
            }
        }
        Ok(out)
    }

    /// Image of the whole grid under a matrix morphism.
    pub fn image(&self, mat: &MorphMatrix, budget: u128) -> Result<PointSet> {
        self.check_budget(mat.cols(), budget)?;
        let mut out = PointSet::new();
        for x in self.points(mat.cols()) {
            out.insert(self.eval(mat, &x)?);
        }
        Ok(out)
    }

    /// `Stab(S) = { t : S + t <= S }`. Candidates are differences with a
    /// fixed base point, so the cost is `O(|S|^2)`; the empty set stabilizes
    /// to the full grid by convention and is rejected here.
    pub fn stabilizer(&self, s: &PointSet) -> Result<PointSet> {
        let Some(base) = s.iter().next() else {
            return Err(Error::PreconditionViolated("stabilizer of the empty set".into()));
        };
        let nb = self.neg(base);
        let mut out = PointSet::new();
        for x in s {
            let t = self.add(x, &nb);
            if s.iter().all(|y| s.contains(&self.add(y, &t))) {
                out.insert(t);
            }
        }
        Ok(out)
    }

    /// Closure of a generating set under addition (and negation).
    pub fn subgroup_closure(&self, gens: &[TorsionPoint], n: usize) -> PointSet {
        let mut set = PointSet::new();
        set.insert(TorsionPoint::zero(n));
        let mut frontier: Vec<TorsionPoint> = vec![TorsionPoint::zero(n)];
        while let Some(x) = frontier.pop() {
            for g in gens {
                for cand in [self.add(&x, g), self.add(&x, &self.neg(g))] {
                    if set.insert(cand.clone()) {
                        frontier.push(cand);
                    }
                }
            }
        }
        set
    }

    pub fn is_subgroup(&self, s: &PointSet) -> bool {
        let Some(first) = s.iter().next() else { return false };
        if !s.contains(&TorsionPoint::zero(first.len())) {
            return false;
        }
        for x in s {
            if !s.contains(&self.neg(x)) {
                return false;
            }
            for y in s {
                if !s.contains(&self.add(x, y)) {
                    return false;
                }
            }
        }
        true
    }

    /// Kernel of `[k]` within the grid.
    pub fn scalar_kernel(&self, k: u64, n: usize, budget: u128) -> Result<PointSet> {
        self.check_budget(n, budget)?;
        let mut out = PointSet::new();
        for x in self.points(n) {
            if self.int_mul(k, &x).is_zero() {
                out.insert(x);
            }
        }
        Ok(out)
    }
}

pub struct PointIter {
    m: u64,
    digits: Vec<u64>,
    done: bool,
}

impl Iterator for PointIter {
    type Item = TorsionPoint;

    fn next(&mut self) -> Option<TorsionPoint> {
        if self.done {
            return None;
        }
        let coords = self
            .digits
            .chunks(2)
            .map(|c| [c[0], c[1]])
            .collect::<Vec<_>>();
        // odometer increment
        let mut i = 0;
        loop {
            if i == self.digits.len() {
                self.done = true;
                break;
            }
            self.digits[i] += 1;
            if self.digits[i] < self.m {
                break;
            }
            self.digits[i] = 0;
            i += 1;
        }
        Some(TorsionPoint { coords })
    }
}

/// Exact count of `x` in `E[m]^N` with `phi(x) = 0`. With `m = alpha` from
/// the dual computation this must equal `norm(det phi)`.
pub fn count_kernel(phi: &Isogeny, m: u64, budget: u128) -> Result<BigInt> {
    let model = TorsionModel::new(m, phi.order())?;
    let n = phi.size();
    let needed = model.grid_size(n);
    if needed > budget {
        return Err(Error::EnumerationBudget { needed, budget });
    }
    let mut count = BigInt::zero();
    for x in model.points(n) {
        if model.eval(phi.matrix(), &x)?.is_zero() {
            count += 1;
        }
    }
    Ok(count)
}

/// Kernel points of an arbitrary matrix within `E[m]^cols`.
pub fn kernel_set(model: &TorsionModel, mat: &MorphMatrix, budget: u128) -> Result<PointSet> {
    let needed = model.grid_size(mat.cols());
    if needed > budget {
        return Err(Error::EnumerationBudget { needed, budget });
    }
    let mut out = PointSet::new();
    for x in model.points(mat.cols()) {
        if model.eval(mat, &x)?.is_zero() {
            out.insert(x);
        }
    }
    Ok(out)
}

/// Kernel relation `psi^{-1} ker(psi') = ker(psi' psi)`: evaluating the
/// composed matrix agrees pointwise with evaluating the two factors.
pub fn verify_relker(
    psi: &MorphMatrix,
    psi_prime: &MorphMatrix,
    m: u64,
    budget: u128,
) -> Result<bool> {
    if psi_prime.cols() != psi.rows() {
        return Err(Error::DimensionMismatch("psi' columns must match psi rows".into()));
    }
    let model = TorsionModel::new(m, psi.order())?;
    let needed = model.grid_size(psi.cols());
    if needed > budget {
        return Err(Error::EnumerationBudget { needed, budget });
    }
    let composed = psi_prime.mul(psi)?;
    for y in model.points(psi.cols()) {
        let via_matrix = model.eval(&composed, &y)?.is_zero();
        let via_steps = model.eval(psi_prime, &model.eval(psi, &y)?)?.is_zero();
        if via_matrix != via_steps {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Gauss-reduction kernel identity:
/// `ker (Id 0; a b) = ker (Id 0; 0 b)` as subsets of `E[m]^N`.
pub fn verify_relker_gauss(
    a: &[OrderElem],
    b: &[OrderElem],
    m: u64,
    budget: u128,
) -> Result<bool> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::DimensionMismatch("a and b must be nonempty rows".into()));
    }
    let order = a[0].order();
    let big_n = a.len() + b.len();
    let stack = |with_a: bool| -> Result<MorphMatrix> {
        let mut rows = Vec::new();
        for i in 0..a.len() {
            let mut row = vec![OrderElem::zero(order); big_n];
            row[i] = OrderElem::one(order);
            rows.push(row);
        }
        let mut last = Vec::with_capacity(big_n);
        for x in a {
            last.push(if with_a { x.clone() } else { OrderElem::zero(order) });
        }
        last.extend(b.iter().cloned());
        rows.push(last);
        MorphMatrix::from_rows(order, rows)
    };
    let with_a = stack(true)?;
    let without_a = stack(false)?;
    let model = TorsionModel::new(m, order)?;
    let k1 = kernel_set(&model, &with_a, budget)?;
    let k2 = kernel_set(&model, &without_a, budget)?;
    Ok(k1 == k2)
}

/// Outcome of the stabilizer checks.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StabVerdict {
    /// `Stab(phi^{-1} S) = phi^{-1}(Stab S)`.
    pub preimage_identity: bool,
    /// `|Stab(dual^{-1} S) ∩ ker[alpha]| = |ker dual| * |Stab S ∩ ker phi|`,
    /// checked only on subgroup inputs with `alpha | m`.
    pub cardinality_identity: Option<bool>,
}

impl StabVerdict {
    pub fn holds(&self) -> bool {
        self.preimage_identity && self.cardinality_identity.unwrap_or(true)
    }
}

/// Check the stabilizer identities on a finite set `S ⊆ E[m]^N`.
///
/// The preimage identity requires `S` to lie in the image of the restricted
/// action (the ambient statement is for surjective isogenies); callers build
/// `S` from image points, e.g. via `[alpha]` multiples.
pub fn verify_stab(s: &PointSet, phi: &Isogeny, m: u64, budget: u128) -> Result<StabVerdict> {
    let model = TorsionModel::new(m, phi.order())?;
    let pre = model.preimage(phi.matrix(), s, budget)?;
    let lhs = model.stabilizer(&pre)?;
    let rhs = model.preimage(phi.matrix(), &model.stabilizer(s)?, budget)?;
    let preimage_identity = lhs == rhs;

    let mut cardinality_identity = None;
    if model.is_subgroup(s) {
        let dual = dual_isogeny(phi);
        let alpha_fits = u64::try_from(&dual.alpha).ok();
        if let Some(alpha) = alpha_fits {
            if alpha > 0 && m % alpha == 0 {
                let n = phi.size();
                let dual_pre = model.preimage(dual.dual.matrix(), s, budget)?;
                let stab_dual_pre = model.stabilizer(&dual_pre)?;
                let ker_alpha = model.scalar_kernel(alpha, n, budget)?;
                let lhs_count = stab_dual_pre.intersection(&ker_alpha).count() as u128;

                let ker_dual = kernel_set(&model, dual.dual.matrix(), budget)?;
                let ker_phi = kernel_set(&model, phi.matrix(), budget)?;
                let stab_s = model.stabilizer(s)?;
                let rhs_count =
                    ker_dual.len() as u128 * stab_s.intersection(&ker_phi).count() as u128;
                cardinality_identity = Some(lhs_count == rhs_count);
            }
        }
    }

    Ok(StabVerdict { preimage_identity, cardinality_identity })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::morphism_matrix::MorphMatrix;

    #[test]
    fn eval_examples() {
        let z = OrderDesc::Rational;
        let model = TorsionModel::new(3, z).unwrap();
        let id = MorphMatrix::identity(z, 2);
        let x = model.point(vec![[1, 2], [0, 1]]);
        assert_eq!(model.eval(&id, &x).unwrap(), x);

        // [2] kills E[2]
        let model2 = TorsionModel::new(2, z).unwrap();
        let two = MorphMatrix::from_int_rows(z, &[&[2]]).unwrap();
        for x in model2.points(1) {
            assert!(model2.eval(&two, &x).unwrap().is_zero());
        }

        // Z[i], m = 2: (1+w) * (1,0) = (1,1)
        let g = OrderDesc::gaussian();
        let mg = TorsionModel::new(2, g).unwrap();
        let phi = MorphMatrix::from_rows(
            g,
            vec![vec![OrderElem::new(g, 1.into(), 1.into()).unwrap()]],
        )
        .unwrap();
        let x = mg.point(vec![[1, 0]]);
        assert_eq!(mg.eval(&phi, &x).unwrap(), mg.point(vec![[1, 1]]));
    }

    #[test]
    fn count_kernel_examples() {
        let z = OrderDesc::Rational;
        let two = Isogeny::new(MorphMatrix::from_int_rows(z, &[&[2]]).unwrap()).unwrap();
        assert_eq!(count_kernel(&two, 2, DEFAULT_BUDGET).unwrap(), BigInt::from(4));

        let id = Isogeny::new(MorphMatrix::identity(z, 2)).unwrap();
        assert_eq!(count_kernel(&id, 5, DEFAULT_BUDGET).unwrap(), BigInt::from(1));

        let g = OrderDesc::gaussian();
        let phi = Isogeny::new(
            MorphMatrix::from_rows(g, vec![vec![OrderElem::new(g, 1.into(), 1.into()).unwrap()]])
                .unwrap(),
        )
        .unwrap();
        assert_eq!(count_kernel(&phi, 2, DEFAULT_BUDGET).unwrap(), BigInt::from(2));
    }

    #[test]
    fn budget_guard_refuses() {
        let z = OrderDesc::Rational;
        let id = Isogeny::new(MorphMatrix::identity(z, 2)).unwrap();
        let err = count_kernel(&id, 100, 1000).unwrap_err();
        assert!(matches!(err, Error::EnumerationBudget { .. }));
    }

    #[test]
    fn relker_examples() {
        let z = OrderDesc::Rational;
        // psi = Id: trivially true
        let id = MorphMatrix::identity(z, 2);
        assert!(verify_relker(&id, &id, 3, DEFAULT_BUDGET).unwrap());

        // gauss identity with a = (1), b = (1), m = 3
        let one = OrderElem::one(z);
        assert!(verify_relker_gauss(&[one.clone()], &[one.clone()], 3, DEFAULT_BUDGET).unwrap());

        // small Z[i] instance, m = 2
        let g = OrderDesc::gaussian();
        let w = OrderElem::omega(g).unwrap();
        let one_g = OrderElem::one(g);
        let psi = MorphMatrix::from_rows(
            g,
            vec![vec![one_g.clone(), w.clone()], vec![w.clone(), one_g.clone()]],
        )
        .unwrap();
        let psi_prime =
            MorphMatrix::from_rows(g, vec![vec![w.clone(), one_g.clone()]]).unwrap();
        assert!(verify_relker(&psi, &psi_prime, 2, DEFAULT_BUDGET).unwrap());
        assert!(verify_relker_gauss(&[w], &[one_g], 2, DEFAULT_BUDGET).unwrap());
    }

    #[test]
    fn stab_examples() {
        let z = OrderDesc::Rational;
        // S = {0}, phi = [2] on E[2]^1
        let phi = Isogeny::new(MorphMatrix::from_int_rows(z, &[&[2]]).unwrap()).unwrap();
        let mut s = PointSet::new();
        s.insert(TorsionPoint::zero(1));
        let v = verify_stab(&s, &phi, 2, DEFAULT_BUDGET).unwrap();
        assert!(v.preimage_identity);
        assert_eq!(v.cardinality_identity, Some(true));

        // subgroup generated by one point, phi = Id
        let model = TorsionModel::new(4, z).unwrap();
        let s = model.subgroup_closure(&[model.point(vec![[1, 2], [0, 1]])], 2);
        let id = Isogeny::new(MorphMatrix::identity(z, 2)).unwrap();
        let v = verify_stab(&s, &id, 4, DEFAULT_BUDGET).unwrap();
        assert!(v.holds());

        // S = E[2] x {0} inside E[4]^2, phi = diag(2,1)
        let model4 = TorsionModel::new(4, z).unwrap();
        let mut s = PointSet::new();
        for a in [0u64, 2] {
            for b in [0u64, 2] {
                s.insert(model4.point(vec![[a, b], [0, 0]]));
            }
        }
        let phi = Isogeny::new(MorphMatrix::from_int_rows(z, &[&[2, 0], &[0, 1]]).unwrap()).unwrap();
        let v = verify_stab(&s, &phi, 4, DEFAULT_BUDGET).unwrap();
        assert!(v.preimage_identity);
        assert_eq!(v.cardinality_identity, Some(true));
    }

    #[test]
    fn kernel_count_matches_norm_det_on_gaussian() {
        let g = OrderDesc::gaussian();
        let phi = Isogeny::new(
            MorphMatrix::from_rows(
                g,
                vec![
                    vec![
                        OrderElem::new(g, 1.into(), 1.into()).unwrap(),
                        OrderElem::one(g),
                    ],
                    vec![OrderElem::zero(g), OrderElem::new(g, 2.into(), 0.into()).unwrap()],
                ],
            )
            .unwrap(),
        )
        .unwrap();
        let dual = dual_isogeny(&phi);
        let alpha = u64::try_from(&dual.alpha).unwrap();
        let count = count_kernel(&phi, alpha, DEFAULT_BUDGET).unwrap();
        assert_eq!(count, phi.det().norm());
    }
}
