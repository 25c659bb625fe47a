//! Randomized and exhaustive verification: kernel counts against the
//! determinant norm, dual-isogeny identities, kernel/stabilizer lemmas on
//! torsion grids, saturation invariants, the tensor-degree identity, and
//! rounding soundness. Deterministic for a fixed seed.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::bound_engine::{thm2_bound, BoundParams, DegreeConvention};
use crate::divisor_calculus::gael_check;
use crate::error::Result;
use crate::io::SCHEMA_VERSION;
use crate::minor_saturation::{saturate_minors, SaturationResult};
use crate::morphism_matrix::{admits_multiplier, dual_isogeny, Isogeny, MorphMatrix};
use crate::pipeline::{run_pipeline, PipelineInput};
use crate::quad_order::{OrderDesc, OrderElem};
use crate::torsion_oracle::{
    count_kernel, verify_relker, verify_relker_gauss, verify_stab, PointSet, TorsionModel,
};

#[derive(Clone, Copy, Debug)]
pub struct SuiteConfig {
    pub seed: u64,
    pub budget: u128,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig { seed: 0, budget: crate::torsion_oracle::DEFAULT_BUDGET }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckReport {
    pub name: String,
    pub instances: u64,
    pub failures: u64,
    pub detail: String,
}

impl CheckReport {
    fn new(name: &str) -> Self {
        CheckReport { name: name.into(), instances: 0, failures: 0, detail: String::new() }
    }

    fn pass(&mut self) {
        self.instances += 1;
    }

    fn fail(&mut self, detail: String) {
        self.instances += 1;
        self.failures += 1;
        if self.detail.is_empty() {
            self.detail = detail;
        }
    }

    fn record(&mut self, ok: bool, detail: impl FnOnce() -> String) {
        if ok {
            self.pass()
        } else {
            self.fail(detail())
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub schema_version: u32,
    pub seed: u64,
    pub budget: String,
    pub checks: Vec<CheckReport>,
    pub all_passed: bool,
}

pub fn test_orders() -> Vec<OrderDesc> {
    vec![OrderDesc::Rational, OrderDesc::gaussian(), OrderDesc::eisenstein()]
}

/// Random element with `norm <= max_norm`, by rejection.
pub fn rand_elem(rng: &mut ChaCha8Rng, order: OrderDesc, max_norm: i64) -> OrderElem {
    let span = (max_norm as f64).sqrt() as i64 + 1;
    loop {
        let a = rng.gen_range(-span..=span);
        let b = if order.is_rational() { 0 } else { rng.gen_range(-span..=span) };
        let e = OrderElem::new(order, a.into(), b.into()).expect("b = 0 for rational");
        if e.norm() <= BigInt::from(max_norm) {
            return e;
        }
    }
}

pub fn rand_matrix(
    rng: &mut ChaCha8Rng,
    order: OrderDesc,
    rows: usize,
    cols: usize,
    max_norm: i64,
) -> MorphMatrix {
    let grid = (0..rows)
        .map(|_| (0..cols).map(|_| rand_elem(rng, order, max_norm)).collect())
        .collect();
    MorphMatrix::from_rows(order, grid).expect("consistent order")
}

pub fn rand_isogeny(
    rng: &mut ChaCha8Rng,
    order: OrderDesc,
    size: usize,
    max_norm: i64,
) -> Isogeny {
    loop {
        if let Ok(iso) = Isogeny::new(rand_matrix(rng, order, size, size, max_norm)) {
            return iso;
        }
    }
}

/// Random n x N matrix of rank n.
pub fn rand_rank_matrix(
    rng: &mut ChaCha8Rng,
    order: OrderDesc,
    n: usize,
    cols: usize,
    max_norm: i64,
) -> MorphMatrix {
    loop {
        let m = rand_matrix(rng, order, n, cols, max_norm);
        if m.rank() == n {
            return m;
        }
    }
}

/// Random pipeline input with the required rank split.
pub fn rand_pipeline_input(
    rng: &mut ChaCha8Rng,
    order: OrderDesc,
    big_n: usize,
    max_norm: i64,
) -> PipelineInput {
    loop {
        let phi = rand_isogeny(rng, order, big_n, max_norm);
        let n = rng.gen_range(1..=big_n.max(2) - 1).min(big_n);
        let top_ok =
            n == big_n || phi.matrix().row_slice(0, big_n - n).rank() == big_n - n;
        let bottom_ok = phi.matrix().row_slice(big_n - n, big_n).rank() == n;
        if !(top_ok && bottom_ok) {
            continue;
        }
        let (d, deg_v) = if n >= 2 {
            (
                Some(rng.gen_range(1..n as u32)),
                Some(BigRational::from_integer(BigInt::from(rng.gen_range(1..=50i64)))),
            )
        } else {
            (None, None)
        };
        return PipelineInput {
            phi,
            n,
            d,
            deg_v,
            eta: BigRational::new(BigInt::one(), BigInt::from(100)),
            c0: BigRational::one(),
            convention: DegreeConvention::Norm,
            h_is_translate: false,
        };
    }
}

/// Kernel counts against `norm(det)` on both order kinds.
pub fn check_kernel_counts(seed: u64, budget: u128, per_kind: usize) -> CheckReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x6b65726e);
    let mut report = CheckReport::new("kernel_count_vs_norm_det");
    for order in [OrderDesc::Rational, OrderDesc::gaussian()] {
        let mut done = 0;
        while done < per_kind {
            let size = rng.gen_range(1..=2usize);
            let phi = rand_isogeny(&mut rng, order, size, 9);
            let dual = dual_isogeny(&phi);
            let Ok(alpha) = u64::try_from(&dual.alpha) else { continue };
            let mut points: u128 = 1;
            for _ in 0..2 * size {
                points = points.saturating_mul(alpha as u128);
            }
            if alpha < 2 || points > budget.min(10_000_000) {
                continue;
            }
            done += 1;
            match count_kernel(&phi, alpha, budget) {
                Ok(count) => report.record(count == phi.det().norm(), || {
                    format!("count {count} != norm(det) {} for size {size}", phi.det().norm())
                }),
                Err(e) => report.fail(format!("oracle refused: {e}")),
            }
        }
    }
    report
}

/// Kernel multiplicativity through the oracle on composable pairs.
pub fn check_kernel_multiplicativity(seed: u64, budget: u128, pairs: usize) -> CheckReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x6d756c74);
    let mut report = CheckReport::new("kernel_multiplicativity");
    let mut done = 0;
    while done < pairs {
        let order = if rng.gen_bool(0.5) { OrderDesc::Rational } else { OrderDesc::gaussian() };
        let size = rng.gen_range(1..=2usize);
        let phi = rand_isogeny(&mut rng, order, size, 4);
        let psi = rand_isogeny(&mut rng, order, size, 4);
        let composed = match phi.matrix().mul(psi.matrix()).and_then(Isogeny::new) {
            Ok(c) => c,
            Err(_) => continue,
        };
        let dual = dual_isogeny(&composed);
        let Ok(alpha) = u64::try_from(&dual.alpha) else { continue };
        let mut points: u128 = 1;
        for _ in 0..2 * size {
            points = points.saturating_mul(alpha.max(1) as u128);
        }
        if points > budget.min(1_000_000) {
            continue;
        }
        done += 1;
        let a_phi = u64::try_from(&dual_isogeny(&phi).alpha).unwrap_or(1).max(1);
        let a_psi = u64::try_from(&dual_isogeny(&psi).alpha).unwrap_or(1).max(1);
        let c_composed = count_kernel(&composed, alpha.max(1), budget);
        let c_phi = count_kernel(&phi, a_phi, budget);
        let c_psi = count_kernel(&psi, a_psi, budget);
        match (c_composed, c_phi, c_psi) {
            (Ok(c), Ok(a), Ok(b)) => report.record(c == &a * &b, || {
                format!("|ker(phi psi)| = {c} but |ker phi||ker psi| = {}", &a * &b)
            }),
            _ => report.fail("oracle refused a feasible instance".into()),
        }
    }
    report
}

/// Dual identities with the brute-force minimality scan on small norms.
pub fn check_dual_identities(seed: u64, count: usize) -> CheckReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x6475616c);
    let mut report = CheckReport::new("dual_identity_and_minimality");
    let orders = test_orders();
    for k in 0..count {
        let order = orders[k % orders.len()];
        let size = rng.gen_range(1..=4usize);
        let max_norm = if size <= 2 { 9 } else { 4 };
        let phi = rand_isogeny(&mut rng, order, size, max_norm);
        let dual = dual_isogeny(&phi);
        let alpha = &dual.alpha;
        let left = phi.matrix().mul(dual.dual.matrix()).expect("square");
        let right = dual.dual.matrix().mul(phi.matrix()).expect("square");
        let norm_det = phi.det().norm();
        let identity = left.is_int_scalar(alpha) && right.is_int_scalar(alpha);
        let divides = (&norm_det % alpha).is_zero();
        let norm_product = dual.dual.det().norm() * &norm_det
            == alpha.clone().pow(2 * size as u32);
        let mut minimal = true;
        if norm_det <= BigInt::from(200) {
            let mut beta = BigInt::one();
            while &beta < alpha {
                if (&norm_det % &beta).is_zero() && admits_multiplier(&phi, &beta) {
                    minimal = false;
                    break;
                }
                beta += 1;
            }
        }
        report.record(identity && divides && norm_product && minimal, || {
            format!(
                "size {size}: identity={identity} divides={divides} \
                 norm_product={norm_product} minimal={minimal}"
            )
        });
    }
    report
}

/// Kernel-relation lemma, exhaustively over the (N, m, kind) grid.
pub fn check_relker(seed: u64, budget: u128) -> CheckReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x72656c6b);
    let mut report = CheckReport::new("relker_compose_and_gauss");
    for order in [OrderDesc::Rational, OrderDesc::gaussian()] {
        for big_n in 1..=3usize {
            for m in 2..=6u64 {
                // composition identity on a couple of random shapes
                for _ in 0..2 {
                    let k = rng.gen_range(1..=2usize);
                    let m_out = rng.gen_range(1..=2usize);
                    let psi = rand_matrix(&mut rng, order, big_n, k, 4);
                    let psi_prime = rand_matrix(&mut rng, order, m_out, big_n, 4);
                    match verify_relker(&psi, &psi_prime, m, budget) {
                        Ok(ok) => report.record(ok, || {
                            format!("compose failed: N={big_n} m={m} {order}")
                        }),
                        Err(e) => report.fail(format!("refused: {e}")),
                    }
                }
                // gauss identity for every split N = (N - n) + n
                for n in 1..big_n.max(2) {
                    if n >= big_n {
                        continue;
                    }
                    let a: Vec<OrderElem> =
                        (0..big_n - n).map(|_| rand_elem(&mut rng, order, 4)).collect();
                    let b: Vec<OrderElem> = (0..n)
                        .map(|_| loop {
                            let e = rand_elem(&mut rng, order, 4);
                            if !e.is_zero() {
                                break e;
                            }
                        })
                        .collect();
                    match verify_relker_gauss(&a, &b, m, budget) {
                        Ok(ok) => report.record(ok, || {
                            format!("gauss failed: N={big_n} n={n} m={m} {order}")
                        }),
                        Err(e) => report.fail(format!("refused: {e}")),
                    }
                }
            }
        }
    }
    report
}

/// Stabilizer lemma over the (N, m, kind) grid. Sets are generated inside
/// the image of the scalar `[alpha]`, matching the ambient surjectivity the
/// statement assumes.
pub fn check_stab(seed: u64, budget: u128) -> CheckReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x73746162);
    let mut report = CheckReport::new("stab_preimage_and_cardinality");
    for order in [OrderDesc::Rational, OrderDesc::gaussian()] {
        for big_n in 1..=3usize {
            for m in 2..=6u64 {
                let model = match TorsionModel::new(m, order) {
                    Ok(m) => m,
                    Err(_) => continue,
                };
                for _ in 0..2 {
                    let phi = rand_isogeny(&mut rng, order, big_n, 4);
                    let dual = dual_isogeny(&phi);
                    let Ok(alpha) = u64::try_from(&dual.alpha) else { continue };
                    // a small subgroup pushed into the image of [alpha]
                    let gens: Vec<_> = (0..rng.gen_range(1..=2usize))
                        .map(|_| {
                            let coords = (0..big_n)
                                .map(|_| [rng.gen_range(0..m), rng.gen_range(0..m)])
                                .collect();
                            model.int_mul(alpha, &model.point(coords))
                        })
                        .collect();
                    let s: PointSet = model.subgroup_closure(&gens, big_n);
                    if s.len() > 1024 {
                        continue;
                    }
                    match verify_stab(&s, &phi, m, budget) {
                        Ok(v) => {
                            report.record(v.preimage_identity, || {
                                format!("preimage identity failed: N={big_n} m={m} {order}")
                            });
                            if let Some(card) = v.cardinality_identity {
                                report.record(card, || {
                                    format!("cardinality identity failed: N={big_n} m={m} {order}")
                                });
                            }
                        }
                        Err(_) => continue, // budget refusal on a large instance
                    }
                }
            }
        }
    }
    report
}

/// Saturation invariants on random rank-n matrices.
pub fn check_saturation(seed: u64, count: usize) -> CheckReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x73617475);
    let mut report = CheckReport::new("saturation_invariants");
    for (psi, outcome) in saturation_sample(&mut rng, count) {
        match outcome {
            Ok(sat) => report.record(sat.verify(&psi).is_ok(), || {
                "saturation invariants failed".to_string()
            }),
            Err(e) => report.fail(format!("saturation refused: {e}")),
        }
    }
    report
}

/// Shared generator for the saturation checks: random rank-n matrices with
/// entry norms <= 100, n in 1..=4, N <= 8, over the rational and Gaussian
/// orders, with occasional zero-heavy rows to force nontrivial rounds.
pub fn saturation_sample(
    rng: &mut ChaCha8Rng,
    count: usize,
) -> Vec<(MorphMatrix, Result<SaturationResult>)> {
    let mut out = Vec::with_capacity(count);
    for k in 0..count {
        let order = if k % 2 == 0 { OrderDesc::Rational } else { OrderDesc::gaussian() };
        let n = rng.gen_range(1..=4usize);
        let cols = rng.gen_range(n..=8usize);
        let mut psi = rand_rank_matrix(rng, order, n, cols, 100);
        // sprinkle zeros so vanishing minors actually occur
        if rng.gen_bool(0.5) {
            for _ in 0..rng.gen_range(1..=cols) {
                let i = rng.gen_range(0..n);
                let j = rng.gen_range(0..cols);
                psi.set(i, j, OrderElem::zero(order));
            }
            if psi.rank() != n {
                psi = rand_rank_matrix(rng, order, n, cols, 100);
            }
        }
        let sat = saturate_minors(&psi);
        out.push((psi, sat));
    }
    out
}

/// Tensor-degree identity on random families, degenerate ones included.
pub fn check_gael(seed: u64, count: usize) -> CheckReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x6761656c);
    let mut report = CheckReport::new("gael_identity");
    let orders = test_orders();
    for k in 0..count {
        let order = orders[k % orders.len()];
        let n = rng.gen_range(1..=3usize);
        let big_n = rng.gen_range(n..=6usize);
        let mut rows: Vec<Vec<OrderElem>> = (0..big_n)
            .map(|_| {
                (0..n)
                    .map(|_| rand_elem(&mut rng, order, 16))
                    .collect::<Vec<_>>()
            })
            .collect();
        for row in rows.iter_mut() {
            if row.iter().all(|e| e.is_zero()) {
                row[0] = OrderElem::one(order);
            }
        }
        // force degeneracy in a third of the instances
        if big_n >= 2 && k % 3 == 0 {
            let src = rng.gen_range(0..big_n);
            let dst = rng.gen_range(0..big_n);
            rows[dst] = rows[src].clone();
        }
        match gael_check(&rows, n) {
            Ok(check) => report.record(check.equal, || {
                format!("lhs {} != rhs {} (n={n}, N={big_n}, {order})", check.lhs, check.rhs)
            }),
            Err(e) => report.fail(format!("refused: {e}")),
        }
    }
    report
}

/// Widening the precision can only raise a certified lower bound.
pub fn check_rounding_soundness(seed: u64, count: usize) -> CheckReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x726f756e);
    let mut report = CheckReport::new("rounding_soundness");
    let parse = |s: &str| -> BigRational {
        if let Some((n, d)) = s.split_once('/') {
            BigRational::new(n.parse().unwrap(), d.parse().unwrap())
        } else {
            BigRational::from_integer(s.parse().unwrap())
        }
    };
    for _ in 0..count {
        let big_n = rng.gen_range(2..=6u32);
        let n = rng.gen_range(2..=big_n);
        let d = rng.gen_range(1..n);
        let eta = BigRational::new(BigInt::from(rng.gen_range(1..=20i64)), BigInt::from(400));
        let c0 = BigRational::new(
            BigInt::from(rng.gen_range(1..=9i64)),
            BigInt::from(rng.gen_range(1..=9i64)),
        );
        let params = match BoundParams::new(big_n, n, d, eta, c0, DegreeConvention::Norm) {
            Ok(p) => p,
            Err(_) => continue,
        };
        let deg_h = BigRational::from_integer(BigInt::from(rng.gen_range(1..=1000i64)));
        let deg_v = BigRational::from_integer(BigInt::from(rng.gen_range(1..=1000i64)));
        let lo = thm2_bound(&deg_h, &deg_v, &params, false, 128);
        let hi = thm2_bound(&deg_h, &deg_v, &params, false, 512);
        match (lo, hi) {
            (Ok(lo), Ok(hi)) => {
                report.record(parse(&lo.value) <= parse(&hi.value), || {
                    format!("128-bit {} exceeds 512-bit {}", lo.value, hi.value)
                });
            }
            _ => report.fail("bound evaluation refused".into()),
        }
    }
    report
}

/// Pipeline identity bundle and byte-level determinism.
pub fn check_pipeline(seed: u64, count: usize) -> CheckReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x70697065);
    let mut report = CheckReport::new("pipeline_postconditions");
    let orders = test_orders();
    for k in 0..count {
        let order = orders[k % orders.len()];
        let big_n = rng.gen_range(2..=4usize);
        let input = rand_pipeline_input(&mut rng, order, big_n, 4);
        match run_pipeline(&input, 128) {
            Ok(report1) => {
                let ok_ids = report1.identities.all();
                let json1 = serde_json::to_string(&report1).expect("serializable");
                let json2 = serde_json::to_string(&run_pipeline(&input, 128).expect("rerun"))
                    .expect("serializable");
                report.record(ok_ids && json1 == json2, || {
                    format!("identities={ok_ids} deterministic={}", json1 == json2)
                });
            }
            Err(e) => report.fail(format!("pipeline failed: {e}")),
        }
    }
    report
}

/// Run the full suite.
pub fn run_suite(config: SuiteConfig) -> SuiteReport {
    let checks = vec![
        check_kernel_counts(config.seed, config.budget, 15),
        check_kernel_multiplicativity(config.seed, config.budget, 60),
        check_dual_identities(config.seed, 200),
        check_relker(config.seed, config.budget),
        check_stab(config.seed, config.budget),
        check_saturation(config.seed, 60),
        check_gael(config.seed, 150),
        check_rounding_soundness(config.seed, 40),
        check_pipeline(config.seed, 12),
    ];
    let all_passed = checks.iter().all(|c| c.failures == 0);
    SuiteReport {
        schema_version: SCHEMA_VERSION,
        seed: config.seed,
        budget: config.budget.to_string(),
        checks,
        all_passed,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quick_suite_passes() {
        let checks = [
            check_kernel_counts(7, 1_000_000, 4),
            check_dual_identities(7, 30),
            check_saturation(7, 10),
            check_gael(7, 20),
            check_rounding_soundness(7, 5),
            check_pipeline(7, 3),
        ];
        for c in checks {
            assert_eq!(c.failures, 0, "{}: {}", c.name, c.detail);
        }
    }

    #[test]
    fn suite_is_deterministic() {
        let a = check_gael(42, 10);
        let b = check_gael(42, 10);
        assert_eq!(a.instances, b.instances);
        assert_eq!(a.failures, b.failures);
    }
}
