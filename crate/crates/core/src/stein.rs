//! Explicit smooth-function bounds for vectors of homogeneous sums:
//! the Delta_ij terms, the full universal bound, the fourth-moment
//! diagnostic, and the finite-N Berry-type rate experiment.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::child_seed;
use crate::ensemble::{EntryDistribution, MatrixArray};
use crate::kernels::DenseKernel;
use crate::oracle::{exact_expected_trace, exact_fluct_covariance};
use crate::{Error, Result};

fn factorial(k: usize) -> f64 {
    (1..=k).map(|x| x as f64).product()
}

fn binom(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc
}

/// The Delta_ij term of the universal bound, for kernels of orders
/// k_i <= k_j:
///
/// (k_j/sqrt2) * sum_{r=1}^{k_j-1} (r-1)! C(k_i-1,r-1) C(k_j-1,r-1)
///   sqrt((k_i+k_j-2r)!) (||f_i *_{k_i-r} f_i|| + ||f_j *_{k_j-r} f_j||)
/// + 1{k_i<k_j} sqrt(k_j! C(k_j,k_i) ||f_j *_{k_j-k_i} f_j||).
pub fn delta_ij(f_i: &DenseKernel, f_j: &DenseKernel) -> Result<f64> {
    let ki = f_i.order();
    let kj = f_j.order();
    if ki > kj {
        return Err(Error::InvalidArgument(format!(
            "delta_ij needs orders k_i <= k_j, got {ki} > {kj}"
        )));
    }
    let mut total = 0.0;
    for r in 1..kj {
        let c1 = binom(ki - 1, r - 1);
        if c1 == 0.0 {
            continue; // r > k_i: the binomial kills the term
        }
        let c2 = binom(kj - 1, r - 1);
        let coeff = factorial(r - 1) * c1 * c2 * factorial(ki + kj - 2 * r).sqrt();
        let ni = crate::kernels::contract(f_i, f_i, ki - r)?.norm();
        let nj = crate::kernels::contract(f_j, f_j, kj - r)?.norm();
        total += coeff * (ni + nj);
    }
    total *= kj as f64 / 2.0f64.sqrt();
    if ki < kj {
        let njj = crate::kernels::contract(f_j, f_j, kj - ki)?.norm();
        total += (factorial(kj) * binom(kj, ki) * njj).sqrt();
    }
    Ok(total)
}

/// Whether the target covariance is the limit law's E[Z_k^2] = k or the
/// identity used by the universal bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GaussianScale {
    /// diag(k_1, ..., k_m)
    LimitScale,
    /// identity covariance
    Normalized,
}

/// The limiting Gaussian vector for a set of trace orders.
#[derive(Debug, Clone)]
pub struct GaussianTarget {
    pub orders: Vec<usize>,
    pub scale: GaussianScale,
}

impl GaussianTarget {
    pub fn variance(&self, j: usize) -> f64 {
        match self.scale {
            GaussianScale::LimitScale => self.orders[j] as f64,
            GaussianScale::Normalized => 1.0,
        }
    }

    /// E[e^{i<t,Z>}] for this target.
    pub fn characteristic(&self, t: &[f64]) -> f64 {
        let s: f64 = t
            .iter()
            .enumerate()
            .map(|(j, tj)| self.variance(j) * tj * tj)
            .sum();
        (-s / 2.0).exp()
    }
}

/// Inputs to the universal bound: unit-variance kernels of strictly
/// increasing orders plus the scalar constants of the statement.
#[derive(Debug, Clone)]
pub struct BoundInput {
    pub kernels: Vec<DenseKernel>,
    /// sup_a E|X_a|^3
    pub beta: f64,
    /// ||phi''||
    pub phi_d2: f64,
    /// ||phi'''||
    pub phi_d3: f64,
    /// influence budget; None takes the exact sum_a max_j Inf_a
    pub influence_budget: Option<f64>,
}

impl BoundInput {
    pub fn new(
        kernels: Vec<DenseKernel>,
        beta: f64,
        phi_d2: f64,
        phi_d3: f64,
        influence_budget: Option<f64>,
    ) -> Result<Self> {
        if kernels.is_empty() {
            return Err(Error::InvalidArgument("need at least one kernel".into()));
        }
        for w in kernels.windows(2) {
            if w[0].order() >= w[1].order() {
                return Err(Error::InvalidArgument(
                    "kernel orders must be strictly increasing".into(),
                ));
            }
        }
        for f in &kernels {
            let v = f.kernel_variance();
            // empty kernels (variance 0) are legal degenerate inputs
            if v != 0.0 && (v - 1.0).abs() > 1e-10 {
                return Err(Error::InvalidArgument(format!(
                    "kernel of order {} has variance {v}, expected 1",
                    f.order()
                )));
            }
        }
        let input = BoundInput {
            kernels,
            beta,
            phi_d2,
            phi_d3,
            influence_budget,
        };
        if let Some(k) = input.influence_budget {
            if k < input.exact_influence_sum() - 1e-12 {
                return Err(Error::InvalidArgument(
                    "influence budget below the exact sum_a max_j Inf_a".into(),
                ));
            }
        }
        Ok(input)
    }

    /// sum over sites of max_j Inf_a(f^{(j)}), computed exactly.
    pub fn exact_influence_sum(&self) -> f64 {
        let mut per_site: std::collections::HashMap<crate::kernels::Site, f64> =
            std::collections::HashMap::new();
        for f in &self.kernels {
            for (site, inf) in f.influence_table() {
                let slot = per_site.entry(site).or_insert(0.0);
                if inf > *slot {
                    *slot = inf;
                }
            }
        }
        per_site.values().sum()
    }

    fn max_influence(&self) -> f64 {
        self.kernels
            .iter()
            .map(|f| f.max_influence())
            .fold(0.0, f64::max)
    }
}

/// The two halves of the universal bound.
#[derive(Debug, Clone, Copy)]
pub struct BoundBreakdown {
    /// ||phi''|| (sum Delta_ii + 2 sum_{i<j} Delta_ij)
    pub contraction_part: f64,
    /// the third-derivative influence term
    pub influence_part: f64,
}

impl BoundBreakdown {
    pub fn total(&self) -> f64 {
        self.contraction_part + self.influence_part
    }
}

/// Evaluate the universal smooth-function bound, split into its two
/// displayed summands.
pub fn universal_bound(input: &BoundInput) -> Result<BoundBreakdown> {
    let m = input.kernels.len();
    let mut delta_sum = 0.0;
    for i in 0..m {
        for j in i..m {
            let d = delta_ij(&input.kernels[i], &input.kernels[j])?;
            delta_sum += if i == j { d } else { 2.0 * d };
        }
    }
    let contraction_part = input.phi_d2 * delta_sum;
    let k_budget = input
        .influence_budget
        .unwrap_or_else(|| input.exact_influence_sum());
    let bracket: f64 = input
        .kernels
        .iter()
        .map(|f| {
            let kj = f.order();
            (16.0 * 2.0f64.sqrt() * input.beta).powf((kj as f64 - 1.0) / 3.0) * factorial(kj)
        })
        .sum();
    let influence_part = k_budget
        * input.phi_d3
        * (input.beta + (8.0 / PI).sqrt())
        * bracket.powi(3)
        * input.max_influence().sqrt();
    Ok(BoundBreakdown {
        contraction_part,
        influence_part,
    })
}

/// Empirical second/fourth moments and the fourth-moment gap |m4 - 3 m2^2|.
#[derive(Debug, Clone, Copy)]
pub struct FourthMoment {
    pub m2: f64,
    pub m4: f64,
    pub gap: f64,
    /// standard error of the gap estimate (delta method)
    pub gap_se: f64,
}

pub fn fourth_moment_gap(samples: &[f64]) -> Result<FourthMoment> {
    if samples.len() < 1000 {
        return Err(Error::InvalidArgument(format!(
            "need at least 1000 samples, got {}",
            samples.len()
        )));
    }
    let r = samples.len() as f64;
    let mut m2 = 0.0;
    let mut m4 = 0.0;
    let mut m6 = 0.0;
    let mut m8 = 0.0;
    for &x in samples {
        let x2 = x * x;
        m2 += x2;
        m4 += x2 * x2;
        m6 += x2 * x2 * x2;
        m8 += x2 * x2 * x2 * x2;
    }
    m2 /= r;
    m4 /= r;
    m6 /= r;
    m8 /= r;
    let gap = (m4 - 3.0 * m2 * m2).abs();
    // Var(m4_hat - 3 m2_hat^2) to first order:
    // grad = (d/dm4, d/dm2) = (1, -6 m2); covariances of sample moments
    let var_m4 = (m8 - m4 * m4) / r;
    let var_m2 = (m4 - m2 * m2) / r;
    let cov = (m6 - m4 * m2) / r;
    let var_gap = var_m4 - 12.0 * m2 * cov + 36.0 * m2 * m2 * var_m2;
    Ok(FourthMoment {
        m2,
        m4,
        gap,
        gap_se: var_gap.max(0.0).sqrt(),
    })
}

/// Built-in thrice-differentiable test functions with analytically known
/// Gaussian expectations and derivative sup-norms.
#[derive(Debug, Clone, PartialEq)]
pub enum Phi {
    /// constant 1
    One,
    /// prod_j cos(t_j x_j)
    CosProduct { t: Vec<f64> },
}

impl Phi {
    pub fn id(&self) -> String {
        match self {
            Phi::One => "one".into(),
            Phi::CosProduct { t } => {
                let parts: Vec<String> = t.iter().map(|x| format!("{x}")).collect();
                format!("cos:{}", parts.join(","))
            }
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            Phi::One => 1.0,
            Phi::CosProduct { t } => t
                .iter()
                .zip(x)
                .map(|(tj, xj)| (tj * xj).cos())
                .product(),
        }
    }

    /// E[phi(Z)] for Z standard Gaussian on R^m, in closed form.
    pub fn gaussian_expectation(&self) -> f64 {
        match self {
            Phi::One => 1.0,
            Phi::CosProduct { t } => t.iter().map(|tj| (-tj * tj / 2.0).exp()).product(),
        }
    }

    /// E[phi(Z)] by tensorized 64-point Gauss-Hermite quadrature; agrees
    /// with the closed form to ~1e-12 and guards against formula slips.
    pub fn gaussian_expectation_quadrature(&self) -> f64 {
        match self {
            Phi::One => 1.0,
            Phi::CosProduct { t } => {
                let (nodes, weights) = gauss_hermite(64);
                t.iter()
                    .map(|tj| {
                        let mut acc = 0.0;
                        for (x, w) in nodes.iter().zip(&weights) {
                            // E[f(Z)] = pi^{-1/2} sum w_i f(sqrt2 x_i)
                            acc += w * (tj * 2.0f64.sqrt() * x).cos();
                        }
                        acc / PI.sqrt()
                    })
                    .product()
            }
        }
    }

    /// ||phi^(d)|| in the statement's normalization:
    /// max_{|alpha|=d} (1/alpha!) sup |partial^alpha phi|.
    pub fn derivative_norm(&self, d: usize) -> f64 {
        match self {
            Phi::One => 0.0,
            Phi::CosProduct { t } => {
                // sup |partial^alpha| = prod |t_j|^{alpha_j}
                let m = t.len();
                let mut best: f64 = 0.0;
                let mut alpha = vec![0usize; m];
                fn rec(
                    t: &[f64],
                    alpha: &mut Vec<usize>,
                    pos: usize,
                    left: usize,
                    best: &mut f64,
                ) {
                    if pos == alpha.len() - 1 {
                        alpha[pos] = left;
                        let mut v = 1.0;
                        for (a, tj) in alpha.iter().zip(t) {
                            v *= tj.abs().powi(*a as i32) / factorial(*a);
                        }
                        if v > *best {
                            *best = v;
                        }
                        return;
                    }
                    for a in 0..=left {
                        alpha[pos] = a;
                        rec(t, alpha, pos + 1, left - a, best);
                    }
                }
                if m == 0 {
                    return 0.0;
                }
                rec(t, &mut alpha, 0, d, &mut best);
                best
            }
        }
    }
}

/// Nodes and weights of n-point Gauss-Hermite quadrature
/// (weight e^{-x^2}), by Newton iteration on the Hermite recurrence.
fn gauss_hermite(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0f64; n];
    let mut weights = vec![0.0f64; n];
    let m = (n + 1) / 2;
    let mut z = 0.0f64;
    for i in 0..m {
        // standard initial guesses (Numerical Recipes style)
        z = match i {
            0 => (2.0 * n as f64 + 1.0).sqrt() - 1.85575 * (2.0 * n as f64 + 1.0).powf(-1.0 / 6.0),
            1 => z - 1.14 * (n as f64).powf(0.426) / z,
            2 => 1.86 * z - 0.86 * nodes[0],
            3 => 1.91 * z - 0.91 * nodes[1],
            _ => 2.0 * z - nodes[i - 2],
        };
        let mut pp = 0.0;
        for _ in 0..200 {
            // evaluate H~_n (orthonormal) at z via recurrence
            let mut p1 = PI.powf(-0.25);
            let mut p2 = 0.0;
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                p1 = z * (2.0 / (j as f64 + 1.0)).sqrt() * p2
                    - (j as f64 / (j as f64 + 1.0)).sqrt() * p3;
            }
            pp = (2.0 * n as f64).sqrt() * p2;
            let dz = p1 / pp;
            z -= dz;
            if dz.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = z;
        nodes[n - 1 - i] = -z;
        weights[i] = 2.0 / (pp * pp);
        weights[n - 1 - i] = weights[i];
    }
    (nodes, weights)
}

/// One row of the Berry-type rate table.
#[derive(Debug, Clone)]
pub struct RateRow {
    pub n: usize,
    pub discrepancy: f64,
    /// N^{1/4} * discrepancy
    pub scaled_discrepancy: f64,
    /// MC standard error of the phi average
    pub se: f64,
    pub replications: u64,
}

/// Centered traces of the scaled matrix at all requested orders, computed
/// from one realized raw block via incremental power diagonals.
fn centered_traces(
    block: &[f64],
    n: usize,
    orders: &[usize],
    centers: &[f64],
) -> Vec<f64> {
    let kmax = *orders.iter().max().unwrap();
    let at = |i: usize, j: usize| block[(i - 1) * n + (j - 1)];
    // raw power sums S_k = sum over closed index paths of length k
    let mut sums = vec![0.0f64; kmax + 1];
    sums[1] = (1..=n).map(|i| at(i, i)).sum();
    if kmax >= 2 {
        // P = raw block; iteratively P <- P*A keeping Tr of the implied power
        let mut p: Vec<f64> = block.to_vec();
        let mut scratch = vec![0.0f64; n * n];
        for k in 2..=kmax {
            // Tr(A^k) = sum_ij P_ij A_ji with P = A^{k-1}
            let mut tr = 0.0;
            for i in 0..n {
                for j in 0..n {
                    tr += p[i * n + j] * block[j * n + i];
                }
            }
            sums[k] = tr;
            if k < kmax {
                for i in 0..n {
                    for j in 0..n {
                        let mut acc = 0.0;
                        for l in 0..n {
                            acc += p[i * n + l] * block[l * n + j];
                        }
                        scratch[i * n + j] = acc;
                    }
                }
                std::mem::swap(&mut p, &mut scratch);
            }
        }
    }
    orders
        .iter()
        .zip(centers)
        .map(|(&k, &c)| sums[k] * (n as f64).powf(-(k as f64) / 2.0) - c)
        .collect()
}

/// Per-N discrepancy |E phi(normalized trace vector) - E phi(Z)| with
/// variance normalizers from the exact oracle.
pub fn berry_rate_experiment(
    dist: &EntryDistribution,
    orders: &[usize],
    n_list: &[usize],
    replications: u64,
    phi: &Phi,
    seed: u64,
) -> Result<Vec<RateRow>> {
    if orders.is_empty() || replications == 0 {
        return Err(Error::InvalidArgument(
            "need at least one order and one replication".into(),
        ));
    }
    let target = phi.gaussian_expectation();
    let mut rows = Vec::new();
    for &n in n_list {
        let centers: Vec<f64> = orders
            .iter()
            .map(|&k| Ok(exact_expected_trace(n, k, dist)?.value_f64()))
            .collect::<Result<_>>()?;
        let scales: Vec<f64> = orders
            .iter()
            .map(|&k| Ok(exact_fluct_covariance(n, k, k, dist)?.value_f64().sqrt()))
            .collect::<Result<_>>()?;
        let stats: Vec<f64> = (0..replications)
            .into_par_iter()
            .map(|rep| {
                let array = MatrixArray::new(child_seed(seed, rep), dist.clone());
                let block = array.raw_block(n);
                let mut v = centered_traces(&block, n, orders, &centers);
                for (x, s) in v.iter_mut().zip(&scales) {
                    *x /= s;
                }
                phi.eval(&v)
            })
            .collect();
        let r = replications as f64;
        let mean: f64 = stats.iter().sum::<f64>() / r;
        let var: f64 = stats.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (r - 1.0);
        let discrepancy = (mean - target).abs();
        rows.push(RateRow {
            n,
            discrepancy,
            scaled_discrepancy: (n as f64).powf(0.25) * discrepancy,
            se: (var / r).sqrt(),
            replications,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::normalized_kernel;

    #[test]
    fn delta_equal_orders_closed_form() {
        // k_i = k_j = 2, both norms s -> Delta = 4s
        let g = normalized_kernel(2, 4).unwrap();
        let s = crate::kernels::contract(&g, &g, 1).unwrap().norm();
        let d = delta_ij(&g, &g).unwrap();
        assert!((d - 4.0 * s).abs() < 1e-12, "d={d} s={s}");
    }

    #[test]
    fn delta_empty_is_zero() {
        let f = DenseKernel::empty(2);
        assert_eq!(delta_ij(&f, &f).unwrap(), 0.0);
    }

    #[test]
    fn delta_rejects_descending_orders() {
        let f2 = normalized_kernel(2, 4).unwrap();
        let f3 = normalized_kernel(3, 4).unwrap();
        assert!(delta_ij(&f3, &f2).is_err());
        assert!(delta_ij(&f2, &f3).is_ok());
    }

    #[test]
    fn delta_mixed_orders_matches_term_by_term() {
        // independent recomputation of the display for (k_i, k_j) = (2, 3)
        let f2 = normalized_kernel(2, 4).unwrap();
        let f3 = normalized_kernel(3, 4).unwrap();
        let n = |f: &DenseKernel, c: usize| crate::kernels::contract(f, f, c).unwrap().norm();
        // r = 1: 0!*C(1,0)*C(2,0)*sqrt(3!)*(||f2 *_1 f2|| + ||f3 *_2 f3||)
        let t1 = 6.0f64.sqrt() * (n(&f2, 1) + n(&f3, 2));
        // r = 2: 1!*C(1,1)*C(2,1)*sqrt(1!)*(||f2 *_0 f2|| + ||f3 *_1 f3||)
        let t2 = 2.0 * (n(&f2, 0) + n(&f3, 1));
        let expected = 3.0 / 2.0f64.sqrt() * (t1 + t2) + (6.0 * 3.0 * n(&f3, 1)).sqrt();
        let got = delta_ij(&f2, &f3).unwrap();
        assert!((got - expected).abs() < 1e-12, "{got} vs {expected}");
    }

    #[test]
    fn universal_bound_empty_kernels() {
        let input = BoundInput::new(
            vec![DenseKernel::empty(2)],
            1.0,
            1.0,
            1.0,
            None,
        )
        .unwrap();
        assert_eq!(universal_bound(&input).unwrap().total(), 0.0);
    }

    #[test]
    fn universal_bound_shrinks_with_n() {
        let mut last = f64::INFINITY;
        for n in [4usize, 8, 16, 32] {
            let g = normalized_kernel(2, n).unwrap();
            let input = BoundInput::new(vec![g], 1.0, 1.0, 1.0, None).unwrap();
            let b = universal_bound(&input).unwrap();
            assert!(b.total() < last, "n={n}: {} !< {last}", b.total());
            // sqrt(N) * contraction part stays bounded
            assert!((n as f64).sqrt() * b.contraction_part < 10.0);
            last = b.total();
        }
    }

    #[test]
    fn bound_constant_beta_term() {
        assert!(((1.0 + (8.0 / PI).sqrt()) - 2.5957691216057308).abs() < 1e-12);
    }

    #[test]
    fn bound_monotone_in_scalars() {
        let g = normalized_kernel(2, 8).unwrap();
        let base = universal_bound(&BoundInput::new(vec![g.clone()], 1.0, 1.0, 1.0, None).unwrap())
            .unwrap()
            .total();
        let more_beta =
            universal_bound(&BoundInput::new(vec![g.clone()], 2.0, 1.0, 1.0, None).unwrap())
                .unwrap()
                .total();
        let more_phi =
            universal_bound(&BoundInput::new(vec![g.clone()], 1.0, 2.0, 3.0, None).unwrap())
                .unwrap()
                .total();
        let more_k = universal_bound(
            &BoundInput::new(vec![g.clone()], 1.0, 1.0, 1.0, Some(1000.0)).unwrap(),
        )
        .unwrap()
        .total();
        assert!(more_beta > base && more_phi > base && more_k > base);
    }

    #[test]
    fn bound_input_validation() {
        let f = crate::kernels::trace_kernel(2, 4).unwrap(); // variance 3/2, not 1
        assert!(BoundInput::new(vec![f], 1.0, 1.0, 1.0, None).is_err());
        let g = normalized_kernel(2, 4).unwrap();
        // budget below the exact influence sum is rejected
        assert!(BoundInput::new(vec![g], 1.0, 1.0, 1.0, Some(1e-9)).is_err());
    }

    #[test]
    fn fourth_moment_constant_samples() {
        let c = 1.5f64;
        let samples = vec![c; 2000];
        let fm = fourth_moment_gap(&samples).unwrap();
        assert!((fm.gap - 2.0 * c.powi(4)).abs() < 1e-9);
        assert!(fourth_moment_gap(&samples[..999]).is_err());
    }

    #[test]
    fn fourth_moment_gaussian_control() {
        let dist = EntryDistribution::standard_normal();
        let array = MatrixArray::new(4242, dist);
        let samples: Vec<f64> = (1..=100_000u64)
            .map(|i| array.entry(i as usize, 1))
            .collect();
        let fm = fourth_moment_gap(&samples).unwrap();
        assert!(fm.gap <= 5.0 * fm.gap_se, "gap={} se={}", fm.gap, fm.gap_se);
        assert!((fm.m2 - 1.0).abs() < 0.02);
    }

    #[test]
    fn phi_family_basics() {
        let phi = Phi::CosProduct { t: vec![1.0] };
        assert!((phi.gaussian_expectation() - (-0.5f64).exp()).abs() < 1e-15);
        assert!(
            (phi.gaussian_expectation() - phi.gaussian_expectation_quadrature()).abs() < 1e-12
        );
        let phi2 = Phi::CosProduct { t: vec![0.7, 1.3] };
        assert!(
            (phi2.gaussian_expectation() - phi2.gaussian_expectation_quadrature()).abs() < 1e-12
        );
        assert_eq!(Phi::One.eval(&[3.0]), 1.0);
        assert!((phi.eval(&[PI]) - PI.cos()).abs() < 1e-15);
    }

    #[test]
    fn phi_derivative_norms() {
        // phi = cos(x): ||phi''|| = 1/2!, ||phi'''|| = 1/3!
        let phi = Phi::CosProduct { t: vec![1.0] };
        assert!((phi.derivative_norm(2) - 0.5).abs() < 1e-15);
        assert!((phi.derivative_norm(3) - 1.0 / 6.0).abs() < 1e-15);
        // phi = cos(x1)cos(x2): best |alpha|=2 split is (1,1) with 1/1!1! = 1
        let phi2 = Phi::CosProduct { t: vec![1.0, 1.0] };
        assert!((phi2.derivative_norm(2) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rate_experiment_phi_one_is_exact() {
        let dist = EntryDistribution::rademacher();
        let rows =
            berry_rate_experiment(&dist, &[2], &[4, 8], 50, &Phi::One, 1).unwrap();
        for row in rows {
            assert_eq!(row.discrepancy, 0.0);
        }
    }

    #[test]
    fn rate_experiment_small_smoke() {
        let phi = Phi::CosProduct { t: vec![1.0] };
        let dist = EntryDistribution::standard_normal();
        let rows = berry_rate_experiment(&dist, &[2], &[16, 32], 2000, &phi, 9).unwrap();
        // discrepancy should already be small at these sizes
        for row in &rows {
            assert!(row.discrepancy < 0.1, "{row:?}");
            assert!(row.se > 0.0);
        }
    }
}
