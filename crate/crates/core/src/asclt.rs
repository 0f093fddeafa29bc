//! Almost-sure CLT laboratory: nested trace paths, logarithmic means,
//! the Ibragimov-Lifshits statistic and its L^2 criterion, and the
//! exact Step-1 correlation decay between J_n and J_p.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;
use std::collections::HashMap;

use crate::combinatorics::{cyclic_pairs, for_each_d};
use crate::ensemble::{EntryDistribution, MatrixArray};
use crate::oracle::{exact_chaos_variance, expected_trace_numerator, MomentPolynomial};
use crate::trace::chaos_component;
use crate::{child_seed, Error, Result};

/// Largest horizon for path construction with orders up to 3.
pub const PATH_BUDGET_N: usize = 512;
/// Largest horizon when order 4 is requested.
pub const PATH_BUDGET_N_K4: usize = 128;

/// A nested path of centered trace fluctuation vectors: record n is the
/// centered (Tr(A_n^{k_1}), ..., Tr(A_n^{k_m})) of the top-left n-by-n
/// block of one entry array.
#[derive(Debug, Clone, PartialEq)]
pub struct TracePath {
    orders: Vec<usize>,
    records: Vec<Vec<f64>>,
}

impl TracePath {
    pub fn orders(&self) -> &[usize] {
        &self.orders
    }

    pub fn horizon(&self) -> usize {
        self.records.len()
    }

    /// Centered fluctuation vector at size n (1-based).
    pub fn record(&self, n: usize) -> &[f64] {
        &self.records[n - 1]
    }

    /// Build a path directly from records (control experiments, tests).
    pub fn from_records(orders: Vec<usize>, records: Vec<Vec<f64>>) -> Result<Self> {
        for r in &records {
            if r.len() != orders.len() {
                return Err(Error::InvalidArgument(
                    "record length must match the number of orders".into(),
                ));
            }
        }
        Ok(TracePath { orders, records })
    }

    /// The same path stopped at a smaller horizon.
    pub fn truncate(&self, n: usize) -> TracePath {
        TracePath {
            orders: self.orders.clone(),
            records: self.records[..n].to_vec(),
        }
    }
}

/// Build the nested path from one entry array, with exact centerings.
///
/// Traces are accumulated incrementally while the block grows: order 1
/// and 2 cost O(n) per step, orders 3 and 4 maintain the squared block
/// and cost O(n^2) per step.
pub fn build_path(array: &MatrixArray, orders: &[usize], n_max: usize) -> Result<TracePath> {
    if orders.is_empty() || n_max == 0 {
        return Err(Error::InvalidArgument(
            "need at least one order and a positive horizon".into(),
        ));
    }
    let kmax = *orders.iter().max().unwrap();
    let kmin = *orders.iter().min().unwrap();
    if kmin < 1 || kmax > 4 {
        return Err(Error::InvalidArgument(
            "path orders must lie in 1..=4".into(),
        ));
    }
    let budget = if kmax >= 4 { PATH_BUDGET_N_K4 } else { PATH_BUDGET_N };
    if n_max > budget {
        return Err(Error::BudgetExceeded {
            what: "path horizon",
            needed: n_max as u128,
            budget: budget as u128,
        });
    }
    let dist = array.dist();
    // numerator polynomials of the exact centerings, one per order
    let centers: Vec<MomentPolynomial> = orders
        .iter()
        .map(|&k| expected_trace_numerator(k, dist))
        .collect::<Result<_>>()?;
    let a = array.raw_block(n_max);
    let at = |i: usize, j: usize| a[(i - 1) * n_max + (j - 1)];
    let need_b = kmax >= 3;
    // b holds the growing principal block of A^2 (raw), stride n_max
    let mut b = if need_b { vec![0.0f64; n_max * n_max] } else { Vec::new() };
    let mut s1 = 0.0f64; // Tr(A_n)
    let mut s2 = 0.0f64; // Tr(A_n^2)
    let mut records = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        s1 += at(n, n);
        for i in 1..n {
            s2 += 2.0 * at(i, n) * at(n, i);
        }
        s2 += at(n, n) * at(n, n);
        if need_b {
            // rank-one update for the existing block, then the new row/col
            for i in 1..n {
                for j in 1..n {
                    b[(i - 1) * n_max + (j - 1)] += at(i, n) * at(n, j);
                }
            }
            for i in 1..=n {
                let mut acc_in = 0.0;
                let mut acc_ni = 0.0;
                for l in 1..=n {
                    acc_in += at(i, l) * at(l, n);
                    acc_ni += at(n, l) * at(l, i);
                }
                b[(i - 1) * n_max + (n - 1)] = acc_in;
                if i < n {
                    b[(n - 1) * n_max + (i - 1)] = acc_ni;
                }
            }
        }
        let mut s3 = 0.0f64;
        let mut s4 = 0.0f64;
        if need_b {
            for i in 1..=n {
                for j in 1..=n {
                    let bij = b[(i - 1) * n_max + (j - 1)];
                    s3 += bij * at(j, i);
                    if kmax >= 4 {
                        s4 += bij * b[(j - 1) * n_max + (i - 1)];
                    }
                }
            }
        }
        let sums = [0.0, s1, s2, s3, s4];
        let record: Vec<f64> = orders
            .iter()
            .zip(&centers)
            .map(|(&k, poly)| {
                let scale = (n as f64).powf(-(k as f64) / 2.0);
                let center = poly.eval(n).to_f64().unwrap() * scale;
                sums[k] * scale - center
            })
            .collect();
        records.push(record);
    }
    Ok(TracePath {
        orders: orders.to_vec(),
        records,
    })
}

/// (1/log N) sum_{n=1}^N (1/n) phi(record_n).
pub fn log_mean(path: &TracePath, phi: impl Fn(&[f64]) -> f64) -> Result<f64> {
    let n_max = path.horizon();
    if n_max < 2 {
        return Err(Error::InvalidArgument(
            "log-mean needs horizon N >= 2 (log 1 = 0)".into(),
        ));
    }
    let mut acc = 0.0;
    for n in 1..=n_max {
        acc += phi(path.record(n)) / n as f64;
    }
    Ok(acc / (n_max as f64).ln())
}

/// The Gaussian target characteristic function on the limit scale
/// (E[Z_k^2] = k): E[e^{i<t,Z>}] = exp(-sum_j k_j t_j^2 / 2).
pub fn target_characteristic(orders: &[usize], t: &[f64]) -> f64 {
    let s: f64 = orders
        .iter()
        .zip(t)
        .map(|(&k, tj)| k as f64 * tj * tj)
        .sum();
    (-s / 2.0).exp()
}

/// Result of the Ibragimov-Lifshits evaluation on a set of replications.
#[derive(Debug, Clone)]
pub struct ILStatistic {
    pub t: Vec<f64>,
    pub n: usize,
    /// Delta_N per replication.
    pub per_replication: Vec<Complex64>,
    /// empirical E|Delta_N|^2
    pub mean_abs2: f64,
}

/// Delta_N(G, t) for each path, plus the empirical mean of |Delta_N|^2.
///
/// Delta_N = (1/log N) sum_{n<=N} (1/n)(e^{i<t,G_n>} - E e^{i<t,Z>}),
/// with the Gaussian target on the limit scale (Var = k per order).
pub fn il_statistic(paths: &[TracePath], t: &[f64]) -> Result<ILStatistic> {
    if paths.len() < 8 {
        return Err(Error::InvalidArgument(format!(
            "need at least 8 replications, got {}",
            paths.len()
        )));
    }
    let orders = paths[0].orders().to_vec();
    let n = paths[0].horizon();
    if n < 2 {
        return Err(Error::InvalidArgument("need horizon N >= 2".into()));
    }
    for p in paths {
        if p.orders() != orders || p.horizon() != n {
            return Err(Error::InvalidArgument(
                "all replications must share orders and horizon".into(),
            ));
        }
    }
    if t.len() != orders.len() {
        return Err(Error::InvalidArgument(
            "t must have one coordinate per order".into(),
        ));
    }
    let target = target_characteristic(&orders, t);
    let log_n = (n as f64).ln();
    let per_replication: Vec<Complex64> = paths
        .iter()
        .map(|path| {
            let mut acc = Complex64::new(0.0, 0.0);
            for nn in 1..=n {
                let g = path.record(nn);
                let phase: f64 = t.iter().zip(g).map(|(tj, gj)| tj * gj).sum();
                let e = Complex64::new(phase.cos() - target, phase.sin());
                acc += e / nn as f64;
            }
            acc / log_n
        })
        .collect();
    let mean_abs2 =
        per_replication.iter().map(|d| d.norm_sqr()).sum::<f64>() / paths.len() as f64;
    Ok(ILStatistic {
        t: t.to_vec(),
        n,
        per_replication,
        mean_abs2,
    })
}

/// Build R replicated paths from child seeds of one master seed, in
/// parallel.
pub fn replicated_paths(
    master_seed: u64,
    dist: &EntryDistribution,
    orders: &[usize],
    n_max: usize,
    replications: u64,
) -> Result<Vec<TracePath>> {
    (0..replications)
        .into_par_iter()
        .map(|rep| {
            let array = MatrixArray::new(child_seed(master_seed, rep), dist.clone());
            build_path(&array, orders, n_max)
        })
        .collect()
}

/// Control paths whose records are independent draws from the exact
/// limit law (limit scale), for criterion calibration.
pub fn gaussian_control_paths(
    master_seed: u64,
    orders: &[usize],
    n_max: usize,
    replications: u64,
) -> Vec<TracePath> {
    let normal = EntryDistribution::standard_normal();
    (0..replications)
        .map(|rep| {
            let array = MatrixArray::new(child_seed(master_seed, rep), normal.clone());
            let records: Vec<Vec<f64>> = (1..=n_max)
                .map(|n| {
                    orders
                        .iter()
                        .enumerate()
                        .map(|(j, &k)| (k as f64).sqrt() * array.entry(n, j + 1))
                        .collect()
                })
                .collect();
            TracePath {
                orders: orders.to_vec(),
                records,
            }
        })
        .collect()
}

/// Exact Step-1 correlation data for the coupled chaos statistics J_n(k)
/// and J_p(k), p >= n.
#[derive(Debug, Clone)]
pub struct CorrelationDecay {
    pub n: usize,
    pub p: usize,
    pub k: usize,
    /// matched cross-pairings between D_n and D_p
    pub matched: BigInt,
    /// matched pairings within D_n (= N^k E[J_n^2] numerator)
    pub self_matched: BigInt,
    /// E[J_n J_p]
    pub cross: f64,
    /// (n/p)^{k/2} E[J_n^2], the Step-1 identity's right side
    pub identity_rhs: f64,
    /// E[L_n L_p] = cross / sqrt(E[J_n^2] E[J_p^2])
    pub normalized: f64,
}

impl CorrelationDecay {
    /// The identity E[J_n J_p] = (n/p)^{k/2} E[J_n^2], as an exact
    /// integer statement.
    pub fn identity_holds_exactly(&self) -> bool {
        self.matched == self.self_matched
    }
}

/// Exact E[J_n(k) J_p(k)] by matching cyclic-pair multisets between
/// D_n^{(k)} and D_p^{(k)}.
pub fn correlation_decay(n: usize, p: usize, k: usize) -> Result<CorrelationDecay> {
    if n > p {
        return Err(Error::InvalidArgument("need n <= p".into()));
    }
    let mut small: HashMap<Vec<(usize, usize)>, u64> = HashMap::new();
    for_each_d(n, k, |v| {
        let mut pairs = cyclic_pairs(v);
        pairs.sort_unstable();
        *small.entry(pairs).or_insert(0) += 1;
    })?;
    let mut large: HashMap<Vec<(usize, usize)>, u64> = HashMap::new();
    for_each_d(p, k, |v| {
        let mut pairs = cyclic_pairs(v);
        pairs.sort_unstable();
        *large.entry(pairs).or_insert(0) += 1;
    })?;
    let mut matched = BigInt::zero();
    let mut self_matched = BigInt::zero();
    for (key, cn) in &small {
        self_matched += BigInt::from(*cn) * BigInt::from(*cn);
        if let Some(cp) = large.get(key) {
            matched += BigInt::from(*cn) * BigInt::from(*cp);
        }
    }
    let var_n = exact_chaos_variance(n, k)?;
    let var_p = exact_chaos_variance(p, k)?;
    let cross = matched.to_f64().unwrap() / ((n * p) as f64).powf(k as f64 / 2.0);
    let identity_rhs =
        (n as f64 / p as f64).powf(k as f64 / 2.0) * var_n.to_f64().unwrap();
    let denom = (var_n.to_f64().unwrap() * var_p.to_f64().unwrap()).sqrt();
    let normalized = if denom > 0.0 { cross / denom } else { 0.0 };
    Ok(CorrelationDecay {
        n,
        p,
        k,
        matched,
        self_matched,
        cross,
        identity_rhs,
        normalized,
    })
}

/// Monte-Carlo estimate of E[J_n(k) J_p(k)] from coupled nested arrays,
/// with its standard error.
pub fn correlation_decay_mc(
    n: usize,
    p: usize,
    k: usize,
    dist: &EntryDistribution,
    replications: u64,
    master_seed: u64,
) -> Result<(f64, f64)> {
    if replications < 2 {
        return Err(Error::InvalidArgument("need at least 2 replications".into()));
    }
    let products: Vec<f64> = (0..replications)
        .into_par_iter()
        .map(|rep| {
            let array = MatrixArray::new(child_seed(master_seed, rep), dist.clone());
            let jn = chaos_component(&array, n, k)?;
            let jp = chaos_component(&array, p, k)?;
            Ok(jn * jp)
        })
        .collect::<Result<_>>()?;
    let r = replications as f64;
    let mean = products.iter().sum::<f64>() / r;
    let var = products.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (r - 1.0);
    Ok((mean, (var / r).sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::exact_expected_trace;
    use crate::trace::trace_power;
    use num_rational::BigRational;
    use num_traits::One;

    #[test]
    fn path_n1_order1_is_first_entry() {
        let array = MatrixArray::new(17, EntryDistribution::standard_normal());
        let path = build_path(&array, &[1], 1).unwrap();
        assert_eq!(path.horizon(), 1);
        assert!((path.record(1)[0] - array.entry(1, 1)).abs() < 1e-15);
    }

    #[test]
    fn path_order2_centering_is_one() {
        let dist = EntryDistribution::rademacher();
        let array = MatrixArray::new(23, dist.clone());
        let path = build_path(&array, &[2], 8).unwrap();
        for n in 1..=8usize {
            let direct =
                trace_power(&array.sample_matrix(n).unwrap(), 2).unwrap() - 1.0;
            assert!(
                (path.record(n)[0] - direct).abs() < 1e-12,
                "n={n}: {} vs {direct}",
                path.record(n)[0]
            );
            // centering sanity: oracle says E[Tr(X_n^2)] = 1
            assert_eq!(
                exact_expected_trace(n, 2, &dist).unwrap().exact_rational().unwrap(),
                BigRational::one()
            );
        }
    }

    #[test]
    fn path_matches_decompose_at_sampled_n() {
        let dist = EntryDistribution::standard_normal();
        let array = MatrixArray::new(5, dist);
        let path = build_path(&array, &[1, 2, 3, 4], 10).unwrap();
        for n in [2usize, 5, 10] {
            for (j, &k) in [1usize, 2, 3, 4].iter().enumerate() {
                let d = crate::trace::decompose(&array, n, k).unwrap();
                assert!(
                    (path.record(n)[j] - d.total).abs() < 1e-9 * (1.0 + d.total.abs()),
                    "n={n} k={k}: {} vs {}",
                    path.record(n)[j],
                    d.total
                );
            }
        }
    }

    #[test]
    fn paths_are_deterministic_and_nest() {
        let dist = EntryDistribution::rademacher();
        let a1 = MatrixArray::new(77, dist.clone());
        let a2 = MatrixArray::new(77, dist.clone());
        let p1 = build_path(&a1, &[2, 3], 12).unwrap();
        let p2 = build_path(&a2, &[2, 3], 12).unwrap();
        assert_eq!(p1, p2);
        let direct = build_path(&a1, &[2, 3], 7).unwrap();
        assert_eq!(p1.truncate(7), direct);
    }

    #[test]
    fn path_budget_and_orders() {
        let array = MatrixArray::new(1, EntryDistribution::rademacher());
        assert!(build_path(&array, &[5], 4).is_err());
        assert!(build_path(&array, &[2], PATH_BUDGET_N + 1).is_err());
        assert!(build_path(&array, &[4], PATH_BUDGET_N_K4 + 1).is_err());
    }

    #[test]
    fn log_mean_constant_is_harmonic_ratio() {
        let records = vec![vec![0.0]; 10];
        let path = TracePath::from_records(vec![2], records).unwrap();
        let lm = log_mean(&path, |_| 3.0).unwrap();
        let h10: f64 = (1..=10).map(|n| 1.0 / n as f64).sum();
        assert!((lm - 3.0 * h10 / 10f64.ln()).abs() < 1e-14);
        assert!((h10 / 10f64.ln() - 1.2720484) < 1e-6);
    }

    #[test]
    fn log_mean_rejects_horizon_one() {
        let path = TracePath::from_records(vec![2], vec![vec![0.0]]).unwrap();
        assert!(log_mean(&path, |_| 1.0).is_err());
    }

    #[test]
    fn target_scale_sanity() {
        // m = 1, order k: e^{-k t^2 / 2}
        let t = 0.7f64;
        for k in [1usize, 2, 3] {
            let got = target_characteristic(&[k], &[t]);
            assert!((got - (-(k as f64) * t * t / 2.0).exp()).abs() < 1e-15);
        }
    }

    #[test]
    fn il_zero_t_is_exactly_zero() {
        let dist = EntryDistribution::rademacher();
        let paths = replicated_paths(9, &dist, &[2], 16, 8).unwrap();
        let stat = il_statistic(&paths, &[0.0]).unwrap();
        assert_eq!(stat.mean_abs2, 0.0);
        for d in &stat.per_replication {
            assert_eq!(d.norm_sqr(), 0.0);
        }
    }

    #[test]
    fn il_rejects_small_r() {
        let dist = EntryDistribution::rademacher();
        let paths = replicated_paths(9, &dist, &[2], 8, 7).unwrap();
        assert!(il_statistic(&paths, &[1.0]).is_err());
    }

    #[test]
    fn il_gaussian_control_is_log_bounded() {
        // with exact limit draws, E|Delta_N|^2 * log N stays bounded
        let mut scaled = Vec::new();
        for n in [32usize, 64, 128] {
            let paths = gaussian_control_paths(31, &[2], n, 64);
            let stat = il_statistic(&paths, &[1.0]).unwrap();
            scaled.push(stat.mean_abs2 * (n as f64).ln());
        }
        let max = scaled.iter().cloned().fold(0.0, f64::max);
        assert!(max < 5.0, "scaled values {scaled:?}");
    }

    #[test]
    fn perturbation_transfer_bound() {
        // adding R_n with E|R_n|^2 = c^2/n changes E|Delta|^2 by at most
        // 2 E|Delta(G)|^2 + const |t|^2 (1/log N) sum (1/n) E|R_n|^2
        let n_max = 64usize;
        let reps = 64u64;
        let t = [1.0f64];
        let g_paths = gaussian_control_paths(101, &[2], n_max, reps);
        let c = 0.5f64;
        let noise = EntryDistribution::standard_normal();
        let perturbed: Vec<TracePath> = (0..reps)
            .map(|rep| {
                let base = &g_paths[rep as usize];
                let narr = MatrixArray::new(child_seed(505, rep), noise.clone());
                let records: Vec<Vec<f64>> = (1..=n_max)
                    .map(|n| {
                        vec![base.record(n)[0] + c / (n as f64).sqrt() * narr.entry(n, 1)]
                    })
                    .collect();
                TracePath::from_records(vec![2], records).unwrap()
            })
            .collect();
        let base_stat = il_statistic(&g_paths, &t).unwrap();
        let pert_stat = il_statistic(&perturbed, &t).unwrap();
        let log_n = (n_max as f64).ln();
        let r_term: f64 = (1..=n_max).map(|n| c * c / (n * n) as f64).sum::<f64>();
        let budget = 2.0 * base_stat.mean_abs2 + 4.0 * t[0] * t[0] * r_term / log_n;
        assert!(
            pert_stat.mean_abs2 <= budget,
            "{} > {budget}",
            pert_stat.mean_abs2
        );
    }

    #[test]
    fn correlation_identity_exact_cases() {
        for (n, p, k) in [(3usize, 5usize, 2usize), (4, 6, 2), (3, 5, 3)] {
            let cd = correlation_decay(n, p, k).unwrap();
            assert!(cd.identity_holds_exactly(), "(n,p,k)=({n},{p},{k})");
            assert!((cd.cross - cd.identity_rhs).abs() < 1e-12);
        }
    }

    #[test]
    fn correlation_diagonal_is_one() {
        let cd = correlation_decay(4, 4, 2).unwrap();
        assert!((cd.normalized - 1.0).abs() < 1e-14);
    }

    #[test]
    fn correlation_closed_form_k2() {
        // E[L_3 L_5] = (3/5) E[J_3^2] / sqrt(E[J_3^2] E[J_5^2]),
        // E[J_n^2] = 2 - 2/n
        let cd = correlation_decay(3, 5, 2).unwrap();
        let v3: f64 = 2.0 - 2.0 / 3.0;
        let v5: f64 = 2.0 - 2.0 / 5.0;
        let expected = (3.0 / 5.0) * v3 / (v3 * v5).sqrt();
        assert!((cd.normalized - expected).abs() < 1e-14);
        // bound C_k sqrt(n/p) with C_k modest
        assert!(cd.normalized <= 2.0 * (3.0f64 / 5.0).sqrt());
    }

    #[test]
    fn correlation_mc_matches_exact() {
        let dist = EntryDistribution::rademacher();
        let exact = correlation_decay(4, 8, 2).unwrap().cross;
        let (mc, se) = correlation_decay_mc(4, 8, 2, &dist, 20_000, 606).unwrap();
        assert!(
            (mc - exact).abs() <= 4.0 * se,
            "mc={mc} exact={exact} se={se}"
        );
    }
}
