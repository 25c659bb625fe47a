//! Saturating the maximal minors of a full-rank matrix.
//!
//! Given a rank-n matrix `psi` (n x N), produce a column permutation `J` and
//! a unimodular upper-triangular integer matrix `T = (Id_n X; 0 Id_{N-n})`
//! with bounded entries such that every n x n minor of `psi J T` is nonzero.
//! The construction appends one column at a time; for each new column it runs
//! up to n rounds, each adding a small integer multiple of one of the first n
//! columns to the new column. The multiple must avoid a finite set of exact
//! minor ratios, so a bounded integer choice always exists.

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::morphism_matrix::{Isogeny, MorphMatrix};
use crate::quad_order::{OrderDesc, OrderElem};
use crate::util::{binom, binom_over_n_ceil, subsets};

/// A quotient of two order elements, compared by cross-multiplication.
#[derive(Clone, Debug)]
pub struct OrderFraction {
    num: OrderElem,
    den: OrderElem,
}

impl OrderFraction {
    pub fn new(num: OrderElem, den: OrderElem) -> Result<Self> {
        if num.order() != den.order() {
            return Err(Error::OrderMismatch);
        }
        if den.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(OrderFraction { num, den })
    }

    pub fn from_int(order: OrderDesc, k: i64) -> Self {
        OrderFraction {
            num: OrderElem::from_int(order, k),
            den: OrderElem::one(order),
        }
    }

    pub fn eq_fraction(&self, other: &Self) -> bool {
        let lhs = &self.num * &other.den;
        let rhs = &other.num * &self.den;
        lhs == rhs
    }

    /// Does the fraction equal the rational integer `k`?
    pub fn eq_integer(&self, k: &BigInt) -> bool {
        let scaled = self
            .den
            .checked_mul(&OrderElem::from_int(self.den.order(), k.clone()))
            .expect("same order");
        scaled == self.num
    }
}

/// Smallest-in-absolute-value integer with `|lambda| <= bound` avoiding every
/// forbidden value; ties break toward the positive candidate.
pub fn choose_lambda(forbidden: &[OrderFraction], bound: &BigInt) -> Result<BigInt> {
    let mut k = BigInt::zero();
    loop {
        let candidates: &[BigInt] = &[k.clone(), -k.clone()];
        for cand in candidates {
            if forbidden.iter().all(|f| !f.eq_integer(cand)) {
                return Ok(cand.clone());
            }
            if k.is_zero() {
                break;
            }
        }
        k += 1;
        if &k > bound {
            return Err(Error::BoundTooSmall(bound.to_string()));
        }
    }
}

/// One recorded saturation round.
#[derive(Clone, Debug)]
pub struct TraceRound {
    /// 0-based column that received the update (the last active column).
    pub column: usize,
    /// Round number within the column's pass, 1-based.
    pub round: usize,
    /// 0-based index of the source column (among the first n).
    pub index: usize,
    pub lambda: BigInt,
    /// Cardinality of the forbidden set as a set of exact fraction values.
    pub forbidden_values: usize,
    /// Number of multi-indices enumerated to build the forbidden set.
    pub forbidden_indices: usize,
    /// The enforcement bound `ceil(C(k, n)/k)` for the active column count k.
    pub bound: BigInt,
}

/// Output of a single saturation pass over the last column.
#[derive(Clone, Debug)]
pub struct CasinoPass {
    /// Product of the elementary column operations, as an N x N matrix.
    pub lambda_matrix: MorphMatrix,
    /// The transformed matrix with all minors nonzero.
    pub transformed: MorphMatrix,
    pub rounds: Vec<TraceRound>,
}

/// Run the per-column rounds on columns `0..k` of `cur`, updating only
/// column `k-1`. Requires every minor of the first `k-1` columns nonzero.
fn casino_rounds(
    cur: &mut MorphMatrix,
    k: usize,
    trace: &mut Vec<TraceRound>,
) -> Result<Vec<(usize, BigInt)>> {
    let n = cur.rows();
    if n >= k {
        return Err(Error::PreconditionViolated(format!(
            "pass needs strictly fewer rows than active columns ({n} >= {k})"
        )));
    }
    for idx in subsets(k - 1, n) {
        if cur.minor_ordered(&idx).is_zero() {
            return Err(Error::PreconditionViolated(format!(
                "minor {idx:?} of the leading columns vanishes"
            )));
        }
    }
    let last = k - 1;
    let bound = binom_over_n_ceil(k as u64, n as u64);
    let mut rho: Vec<usize> = vec![last];
    let mut ops: Vec<(usize, BigInt)> = Vec::new();

    for round in 1..=n {
        let all = subsets(k, n);
        let vanishing = all.iter().find(|idx| cur.minor_ordered(idx).is_zero());

        let (source, lambda, forbidden_values, forbidden_indices) = match vanishing {
            None => {
                let source = (0..n).find(|c| !rho.contains(c)).expect("rho misses a column");
                (source, BigInt::zero(), 0usize, 0usize)
            }
            Some(idx) => {
                debug_assert!(idx.contains(&last), "vanishing minor must use the new column");
                let head: Vec<usize> = idx.iter().copied().filter(|&c| c != last).collect();
                let source = (0..n)
                    .find(|c| !head.contains(c))
                    .expect("head has n-1 entries among n candidates");
                debug_assert!(!rho.contains(&source));

                let mut values: Vec<OrderFraction> = Vec::new();
                let mut indices = 0usize;
                for head_idx in subsets(k - 1, n - 1) {
                    if head_idx.contains(&source) {
                        continue;
                    }
                    indices += 1;
                    let mut with_last = head_idx.clone();
                    with_last.push(last);
                    let num = cur.minor_ordered(&with_last);
                    let mut with_source = head_idx.clone();
                    with_source.push(source);
                    // the source column replaces the last slot in place, so
                    // the selection order (and its sign) matters
                    let den = cur.minor_ordered(&with_source);
                    let value = OrderFraction::new(-&num, den)?;
                    if !values.iter().any(|v| v.eq_fraction(&value)) {
                        values.push(value);
                    }
                }
                let lambda = choose_lambda(&values, &bound)?;
                debug_assert!(!lambda.is_zero());
                (source, lambda, values.len(), indices)
            }
        };

        rho.push(source);
        if !lambda.is_zero() {
            let scale = OrderElem::from_int(cur.order(), lambda.clone());
            for i in 0..n {
                let add = cur.at(i, source).checked_mul(&scale)?;
                let v = cur.at(i, last).checked_add(&add)?;
                cur.set(i, last, v);
            }
            ops.push((source, lambda.clone()));
        }
        trace.push(TraceRound {
            column: last,
            round,
            index: source,
            lambda,
            forbidden_values,
            forbidden_indices,
            bound: bound.clone(),
        });
    }

    // all minors are nonzero now; the rounds above protect every index
    for idx in subsets(k, n) {
        if cur.minor_ordered(&idx).is_zero() {
            return Err(Error::MinorVanished(format!("{idx:?} after saturation pass")));
        }
    }
    Ok(ops)
}

/// Single pass over the last column of an n x N matrix whose minors avoiding
/// the last column are all nonzero.
pub fn casino_pass(phi: &MorphMatrix) -> Result<CasinoPass> {
    let n = phi.rows();
    let big_n = phi.cols();
    let mut cur = phi.clone();
    let mut trace = Vec::new();
    let ops = casino_rounds(&mut cur, big_n, &mut trace)?;
    let mut lambda_matrix = MorphMatrix::identity(phi.order(), big_n);
    for (source, lambda) in &ops {
        let prev = lambda_matrix.at(*source, big_n - 1).clone();
        lambda_matrix.set(
            *source,
            big_n - 1,
            prev.checked_add(&OrderElem::from_int(phi.order(), lambda.clone()))?,
        );
    }
    debug_assert_eq!(phi.mul(&lambda_matrix)?, cur);
    let _ = n;
    Ok(CasinoPass { lambda_matrix, transformed: cur, rounds: trace })
}

/// Result of full minor saturation: `psi . J . T` has all minors nonzero.
#[derive(Clone, Debug)]
pub struct SaturationResult {
    /// Row count n of the saturated matrix.
    pub n: usize,
    /// Column permutation: position k of `psi J` holds column `j_perm[k]`
    /// of `psi` (0-based).
    pub j_perm: Vec<usize>,
    /// Unimodular upper-triangular `(Id_n X; 0 Id_{N-n})` over the order.
    pub t_mat: MorphMatrix,
    pub trace: Vec<TraceRound>,
}

impl SaturationResult {
    pub fn big_n(&self) -> usize {
        self.j_perm.len()
    }

    /// The permutation as a matrix: `(psi J)_k = psi_{j_perm[k]}`.
    pub fn permutation_matrix(&self, order: OrderDesc) -> MorphMatrix {
        let big_n = self.big_n();
        let mut j = MorphMatrix::zero(order, big_n, big_n);
        for (k, &src) in self.j_perm.iter().enumerate() {
            j.set(src, k, OrderElem::one(order));
        }
        j
    }

    /// `T^{-1} = (Id -X; 0 Id)`, exact.
    pub fn t_inverse(&self) -> MorphMatrix {
        let big_n = self.big_n();
        let mut inv = self.t_mat.clone();
        for i in 0..self.n {
            for j in self.n..big_n {
                inv.set(i, j, -self.t_mat.at(i, j));
            }
        }
        inv
    }

    /// Check the defining invariants against the original matrix.
    pub fn verify(&self, psi: &MorphMatrix) -> Result<()> {
        let n = self.n;
        let big_n = self.big_n();
        // T shape and unimodularity
        for i in 0..big_n {
            for j in 0..big_n {
                let e = self.t_mat.at(i, j);
                let ok = if i == j {
                    e.is_one()
                } else if i < n && j >= n {
                    e.is_rational_int()
                } else {
                    e.is_zero()
                };
                if !ok {
                    return Err(Error::PreconditionViolated(format!(
                        "T has unexpected entry at ({i},{j})"
                    )));
                }
            }
        }
        if !self.t_mat.det()?.is_one() {
            return Err(Error::PreconditionViolated("det(T) != 1".into()));
        }
        // entry bound on recorded rounds
        let final_bound = binom_over_n_ceil(big_n as u64, n as u64);
        for r in &self.trace {
            if r.lambda.abs() > final_bound {
                return Err(Error::PreconditionViolated(format!(
                    "lambda {} exceeds bound {}",
                    r.lambda, final_bound
                )));
            }
        }
        // the defining postcondition
        let transformed = psi.permute_cols(&self.j_perm).mul(&self.t_mat)?;
        for idx in subsets(big_n, n) {
            if transformed.minor_ordered(&idx).is_zero() {
                return Err(Error::MinorVanished(format!("{idx:?}")));
            }
        }
        Ok(())
    }
}

/// Saturate all maximal minors of a rank-n matrix.
pub fn saturate_minors(psi: &MorphMatrix) -> Result<SaturationResult> {
    let n = psi.rows();
    let big_n = psi.cols();
    if n > big_n || psi.rank() != n {
        return Err(Error::RankDeficient);
    }
    // lexicographically first full-rank column subset, completed by the
    // remaining columns in their original order
    let lead = subsets(big_n, n)
        .into_iter()
        .find(|idx| !psi.select_cols(idx).det().expect("square").is_zero())
        .ok_or(Error::RankDeficient)?;
    let mut j_perm = lead.clone();
    j_perm.extend((0..big_n).filter(|c| !lead.contains(c)));

    let mut cur = psi.permute_cols(&j_perm);
    let mut t_mat = MorphMatrix::identity(psi.order(), big_n);
    let mut trace = Vec::new();
    for k in n + 1..=big_n {
        let ops = casino_rounds(&mut cur, k, &mut trace)?;
        for (source, lambda) in ops {
            let prev = t_mat.at(source, k - 1).clone();
            t_mat.set(
                source,
                k - 1,
                prev.checked_add(&OrderElem::from_int(psi.order(), lambda))?,
            );
        }
    }
    let result = SaturationResult { n, j_perm, t_mat, trace };
    result.verify(psi)?;
    Ok(result)
}

/// Transform produced for an isogeny so that all n x n minors of the last n
/// columns of `(phi T)^{-1}` are nonzero.
#[derive(Clone, Debug)]
pub struct TrasResult {
    pub t: MorphMatrix,
    pub saturation: SaturationResult,
}

/// Build the bounded isomorphism `T` for an N x N isogeny and target block
/// size n. Works denominator-free: the last n rows of `(phi^{-1})^t` are
/// realized as the last n columns of `adj(phi) * conj(det phi)`, transposed;
/// minor nonvanishing is invariant under the nonzero integer scaling.
pub fn transform_for_h(phi: &Isogeny, n: usize) -> Result<TrasResult> {
    let big_n = phi.size();
    if n < 1 || n > big_n {
        return Err(Error::DimensionMismatch(format!("n = {n} out of 1..={big_n}")));
    }
    let order = phi.order();
    let adj = phi.matrix().adjugate()?;
    let m1 = adj.scalar_mul(&phi.det().conj());
    let cols: Vec<usize> = (big_n - n..big_n).collect();
    let psi = m1.select_cols(&cols).transpose();
    let saturation = saturate_minors(&psi)?;
    let j = saturation.permutation_matrix(order);
    // T = (J^{-1})^t (T0^{-1})^t = J (T0^{-1})^t
    let t = j.mul(&saturation.t_inverse().transpose())?;

    // norm bound ||T||^2 * N^2 <= C(N,n)^2, meaningful only for n < N
    if n < big_n {
        let c = binom(big_n as u64, n as u64);
        let n2 = BigInt::from((big_n * big_n) as u64);
        let bound_sq = &c * &c;
        let t_inv = saturation
            .t_mat
            .transpose()
            .mul(&j.transpose())?;
        for (name, m) in [("T", &t), ("T^-1", &t_inv)] {
            if m.op_norm_sq() * &n2 > bound_sq {
                return Err(Error::PreconditionViolated(format!(
                    "norm bound violated for {name}"
                )));
            }
        }
    }

    // verify via the adjugate of phi*T: minors of its last n columns,
    // transposed, must all be nonzero
    let phi_t = phi.matrix().mul(&t)?;
    let adj_t = phi_t.adjugate()?;
    let check = adj_t.select_cols(&cols).transpose();
    for idx in subsets(big_n, n) {
        if check.minor_ordered(&idx).is_zero() {
            return Err(Error::MinorVanished(format!("{idx:?} in (phi T)^-1")));
        }
    }
    Ok(TrasResult { t, saturation })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::morphism_matrix::MorphMatrix;
    use crate::quad_order::OrderDesc;

    #[test]
    fn choose_lambda_examples() {
        let z = OrderDesc::Rational;
        let zero = OrderFraction::from_int(z, 0);
        let one = OrderFraction::from_int(z, 1);
        let neg_one = OrderFraction::from_int(z, -1);
        assert_eq!(
            choose_lambda(&[zero.clone()], &BigInt::from(1)).unwrap(),
            BigInt::from(1)
        );
        assert_eq!(choose_lambda(&[], &BigInt::from(1)).unwrap(), BigInt::zero());
        assert_eq!(
            choose_lambda(&[zero.clone(), one, neg_one], &BigInt::from(2)).unwrap(),
            BigInt::from(2)
        );
        assert!(matches!(
            choose_lambda(&[zero], &BigInt::zero()),
            Err(Error::BoundTooSmall(_))
        ));
    }

    #[test]
    fn fraction_equality_is_exact() {
        let z = OrderDesc::Rational;
        let half = OrderFraction::new(OrderElem::from_int(z, 1), OrderElem::from_int(z, 2)).unwrap();
        let two_quarters =
            OrderFraction::new(OrderElem::from_int(z, 2), OrderElem::from_int(z, 4)).unwrap();
        assert!(half.eq_fraction(&two_quarters));
        assert!(!half.eq_integer(&BigInt::from(1)));
        let three = OrderFraction::new(OrderElem::from_int(z, 6), OrderElem::from_int(z, 2)).unwrap();
        assert!(three.eq_integer(&BigInt::from(3)));
    }

    #[test]
    fn casino_pass_examples() {
        let z = OrderDesc::Rational;
        // (1, 1): all minors already nonzero, lambda = 0 branch
        let psi = MorphMatrix::from_int_rows(z, &[&[1, 1]]).unwrap();
        let pass = casino_pass(&psi).unwrap();
        assert_eq!(pass.lambda_matrix, MorphMatrix::identity(z, 2));
        assert_eq!(pass.transformed, psi);
        assert!(pass.rounds.iter().all(|r| r.lambda.is_zero()));

        // (1, 0): S = {0}, lambda = 1, result (1, 1)
        let psi = MorphMatrix::from_int_rows(z, &[&[1, 0]]).unwrap();
        let pass = casino_pass(&psi).unwrap();
        assert_eq!(
            pass.lambda_matrix,
            MorphMatrix::from_int_rows(z, &[&[1, 1], &[0, 1]]).unwrap()
        );
        assert_eq!(pass.transformed, MorphMatrix::from_int_rows(z, &[&[1, 1]]).unwrap());
        assert_eq!(pass.rounds[0].lambda, BigInt::from(1));
        assert_eq!(pass.rounds[0].forbidden_values, 1);

        // [[1,0,0],[0,1,0]]: two rounds, both lambdas in {1,-1}
        let psi = MorphMatrix::from_int_rows(z, &[&[1, 0, 0], &[0, 1, 0]]).unwrap();
        let pass = casino_pass(&psi).unwrap();
        for r in &pass.rounds {
            assert_eq!(r.lambda.abs(), BigInt::from(1));
        }
        for idx in subsets(3, 2) {
            assert!(!pass.transformed.minor_ordered(&idx).is_zero());
        }
        // precondition violation is reported
        let bad = MorphMatrix::from_int_rows(z, &[&[0, 1]]).unwrap();
        assert!(matches!(casino_pass(&bad), Err(Error::PreconditionViolated(_))));
    }

    #[test]
    fn saturate_examples() {
        let z = OrderDesc::Rational;
        // N = n: identity transform
        let psi = MorphMatrix::identity(z, 3);
        let sat = saturate_minors(&psi).unwrap();
        assert_eq!(sat.j_perm, vec![0, 1, 2]);
        assert_eq!(sat.t_mat, MorphMatrix::identity(z, 3));

        // (1, 0): J = Id, T = [[1,1],[0,1]]
        let psi = MorphMatrix::from_int_rows(z, &[&[1, 0]]).unwrap();
        let sat = saturate_minors(&psi).unwrap();
        assert_eq!(sat.j_perm, vec![0, 1]);
        assert_eq!(sat.t_mat, MorphMatrix::from_int_rows(z, &[&[1, 1], &[0, 1]]).unwrap());

        // (0, 1): the swap comes first
        let psi = MorphMatrix::from_int_rows(z, &[&[0, 1]]).unwrap();
        let sat = saturate_minors(&psi).unwrap();
        assert_eq!(sat.j_perm, vec![1, 0]);
        sat.verify(&psi).unwrap();

        // rank-deficient input is rejected
        let bad = MorphMatrix::from_int_rows(z, &[&[1, 2], &[2, 4]]).unwrap();
        assert!(matches!(saturate_minors(&bad), Err(Error::RankDeficient)));
    }

    #[test]
    fn saturation_is_idempotent_in_goal() {
        let z = OrderDesc::Rational;
        let psi = MorphMatrix::from_int_rows(z, &[&[1, 0, 0, 0], &[0, 1, 0, 0]]).unwrap();
        let sat = saturate_minors(&psi).unwrap();
        let done = psi.permute_cols(&sat.j_perm).mul(&sat.t_mat).unwrap();
        let again = saturate_minors(&done).unwrap();
        assert_eq!(again.j_perm, (0..4).collect::<Vec<_>>());
        assert_eq!(again.t_mat, MorphMatrix::identity(z, 4));
        assert!(again.trace.iter().all(|r| r.lambda.is_zero()));
    }

    #[test]
    fn transform_for_h_examples() {
        let z = OrderDesc::Rational;
        // n = N: T = Id
        let phi = Isogeny::new(MorphMatrix::identity(z, 2)).unwrap();
        let tras = transform_for_h(&phi, 2).unwrap();
        assert_eq!(tras.t, MorphMatrix::identity(z, 2));

        // [[1,-1],[1,1]], n = 1: last column of phi^{-1} already has
        // nonzero entries, so T needs no saturation rounds with lambda != 0
        let phi =
            Isogeny::new(MorphMatrix::from_int_rows(z, &[&[1, -1], &[1, 1]]).unwrap()).unwrap();
        let tras = transform_for_h(&phi, 1).unwrap();
        assert!(tras.saturation.trace.iter().all(|r| r.lambda.is_zero()));

        // identity with n = 1: saturation must kick in
        let phi = Isogeny::new(MorphMatrix::identity(z, 2)).unwrap();
        let tras = transform_for_h(&phi, 1).unwrap();
        let phi_t = Isogeny::new(phi.matrix().mul(&tras.t).unwrap()).unwrap();
        let adj = phi_t.matrix().adjugate().unwrap();
        let last = adj.select_cols(&[1]).transpose();
        for idx in subsets(2, 1) {
            assert!(!last.minor_ordered(&idx).is_zero());
        }
    }
}
