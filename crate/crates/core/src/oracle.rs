//! Exact moment oracle: pattern counts |A_N(pi)|, their polynomial
//! extension in N, and exact expectations / covariances / chaos variances
//! of trace statistics, all in rational arithmetic.
//!
//! Every value here is independent of the Monte-Carlo machinery, so the
//! two sides can be played against each other in tests.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::combinatorics::{
    self, covariance_bracket, cyclic_pairs, for_each_d, for_each_tuple, partitions, pattern_of,
    Partition, TUPLE_BUDGET,
};
use crate::ensemble::EntryDistribution;
use crate::{Error, Result};

/// Largest k for which pattern polynomials are interpolated.
pub const MAX_PATTERN_POLY_K: usize = 5;

fn big(n: usize) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// A polynomial in N with exact rational coefficients, produced by
/// Lagrange interpolation of a brute-force count.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MomentPolynomial {
    /// coefficients[d] multiplies N^d.
    pub coefficients: Vec<BigRational>,
    /// What the polynomial counts.
    pub provenance: String,
}

impl MomentPolynomial {
    pub fn degree(&self) -> usize {
        self.coefficients
            .iter()
            .rposition(|c| !c.is_zero())
            .unwrap_or(0)
    }

    pub fn eval(&self, n: usize) -> BigRational {
        let x = big(n);
        let mut acc = BigRational::zero();
        for c in self.coefficients.iter().rev() {
            acc = acc * &x + c;
        }
        acc
    }
}

/// Exact Lagrange interpolation through (x_i, y_i); returns coefficients
/// in ascending powers.
fn lagrange(points: &[(usize, BigRational)]) -> Vec<BigRational> {
    let m = points.len();
    let mut coeffs = vec![BigRational::zero(); m];
    for (i, (xi, yi)) in points.iter().enumerate() {
        // basis_i(x) = prod_{j != i} (x - x_j) / (x_i - x_j)
        let mut basis = vec![BigRational::zero(); m];
        basis[0] = BigRational::one();
        let mut deg = 0usize;
        let mut denom = BigRational::one();
        for (j, (xj, _)) in points.iter().enumerate() {
            if j == i {
                continue;
            }
            denom *= big(*xi) - big(*xj);
            // multiply basis by (x - x_j)
            for d in (0..=deg).rev() {
                let c = basis[d].clone();
                basis[d + 1] += &c;
                basis[d] = -c * big(*xj);
            }
            deg += 1;
        }
        let scale = yi / denom;
        for d in 0..=deg {
            coeffs[d] += &basis[d] * &scale;
        }
    }
    coeffs
}

/// |A_N(pi)| by exhaustive enumeration.
pub fn brute_pattern_count(pi: &Partition, n: usize) -> Result<BigInt> {
    Ok(BigInt::from(combinatorics::count_pattern_class(pi, n)?))
}

/// Interpolate |A_N(pi)| at N = 1..k+1 and verify the polynomial at the
/// extra node N = k+2 against brute force.
pub fn pattern_polynomial(pi: &Partition) -> Result<MomentPolynomial> {
    let k = pi.k();
    if k > MAX_PATTERN_POLY_K {
        return Err(Error::BudgetExceeded {
            what: "pattern polynomial interpolation",
            needed: k as u128,
            budget: MAX_PATTERN_POLY_K as u128,
        });
    }
    let points: Vec<(usize, BigRational)> = (1..=k + 1)
        .map(|n| Ok((n, BigRational::from_integer(brute_pattern_count(pi, n)?))))
        .collect::<Result<_>>()?;
    let poly = MomentPolynomial {
        coefficients: lagrange(&points),
        provenance: format!("|A_N(pi)| for pi = {pi}"),
    };
    let check = BigRational::from_integer(brute_pattern_count(pi, k + 2)?);
    if poly.eval(k + 2) != check {
        return Err(Error::NotPolynomial((k + 2) as i64));
    }
    Ok(poly)
}

/// An exact rational numerator together with a deferred half-integer
/// power-of-N scale: value = numerator / N^{scale_halves/2}.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactScaled {
    pub numerator: BigRational,
    pub n: usize,
    /// The scale exponent in halves: the true value divides by
    /// N^{scale_halves/2}.
    pub scale_halves: u32,
}

impl ExactScaled {
    /// The exact value, available whenever the scale is an integer power
    /// (or the numerator vanishes).
    pub fn exact_rational(&self) -> Option<BigRational> {
        if self.numerator.is_zero() {
            return Some(BigRational::zero());
        }
        if self.scale_halves % 2 != 0 {
            return None;
        }
        let pow = BigInt::from(self.n).pow(self.scale_halves / 2);
        Some(&self.numerator / BigRational::from_integer(pow))
    }

    pub fn value_f64(&self) -> f64 {
        let num = self.numerator.to_f64().unwrap_or_else(|| {
            // fall back through a quotient of leading digits
            self.numerator.numer().to_f64().unwrap() / self.numerator.denom().to_f64().unwrap()
        });
        num / (self.n as f64).powf(self.scale_halves as f64 / 2.0)
    }
}

/// Weight of a partition under the entry law: product of mu_{|B|}.
fn block_weight(pi: &Partition, dist: &EntryDistribution) -> Result<BigRational> {
    let mut w = BigRational::one();
    for b in pi.blocks() {
        let mu = dist.moment(b.len())?;
        if mu.is_zero() {
            return Ok(BigRational::zero());
        }
        w *= mu;
    }
    Ok(w)
}

/// The numerator polynomial of E[Tr(X_N^k)]:
/// sum over partitions of |A_N(pi)| times the block-moment product, as a
/// polynomial in N. Reusable across many N (path centerings).
pub fn expected_trace_numerator(k: usize, dist: &EntryDistribution) -> Result<MomentPolynomial> {
    assert!(k >= 1);
    let mut coefficients = vec![BigRational::zero(); k + 1];
    for pi in partitions(k)? {
        let w = block_weight(&pi, dist)?;
        if w.is_zero() {
            continue;
        }
        let poly = pattern_polynomial(&pi)?;
        for (d, c) in poly.coefficients.iter().enumerate() {
            coefficients[d] += c * &w;
        }
    }
    Ok(MomentPolynomial {
        coefficients,
        provenance: format!("E[Tr(X_N^{k})] numerator for {}", dist.name()),
    })
}

/// E[Tr(X_N^k)], exact, as (rational numerator, scale N^{-k/2}).
pub fn exact_expected_trace(
    n: usize,
    k: usize,
    dist: &EntryDistribution,
) -> Result<ExactScaled> {
    assert!(k >= 1 && n >= 1);
    let numerator = if k <= MAX_PATTERN_POLY_K {
        expected_trace_numerator(k, dist)?.eval(n)
    } else {
        let mut acc = BigRational::zero();
        for pi in partitions(k)? {
            let w = block_weight(&pi, dist)?;
            if w.is_zero() {
                continue;
            }
            acc += BigRational::from_integer(brute_pattern_count(&pi, n)?) * w;
        }
        acc
    };
    Ok(ExactScaled {
        numerator,
        n,
        scale_halves: k as u32,
    })
}

/// Joint coincidence pattern of the k1 + k2 cyclic pairs of two index
/// vectors: a partition of [k1 + k2] with slots 1..k1 for the first
/// vector.
fn joint_pattern(i: &[usize], j: &[usize]) -> Partition {
    let k1 = i.len();
    let m = k1 + j.len();
    let mut groups: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
    for (a, p) in cyclic_pairs(i).into_iter().enumerate() {
        groups.entry(p).or_default().push(a + 1);
    }
    for (a, p) in cyclic_pairs(j).into_iter().enumerate() {
        groups.entry(p).or_default().push(k1 + a + 1);
    }
    Partition::new(m, groups.into_values().collect())
}

/// Covariance weight of a joint pattern: joint block moments minus the
/// product of the two marginal block-moment products.
fn joint_weight(pi: &Partition, k1: usize, dist: &EntryDistribution) -> Result<BigRational> {
    let mut joint = BigRational::one();
    let mut upper = BigRational::one();
    let mut lower = BigRational::one();
    for b in pi.blocks() {
        let cu = b.iter().filter(|&&x| x <= k1).count();
        let cl = b.len() - cu;
        joint *= dist.moment(b.len())?;
        if cu > 0 {
            upper *= dist.moment(cu)?;
        }
        if cl > 0 {
            lower *= dist.moment(cl)?;
        }
    }
    Ok(joint - upper * lower)
}

/// Brute-force covariance numerator at a single N: the sum of covariance
/// brackets over all (i, j) in [N]^{k1} x [N]^{k2}, grouped by joint
/// pattern.
fn covariance_numerator_brute(
    n: usize,
    k1: usize,
    k2: usize,
    dist: &EntryDistribution,
) -> Result<BigRational> {
    let m = k1 + k2;
    let needed = (n as u128).pow(m as u32);
    if needed > TUPLE_BUDGET {
        return Err(Error::BudgetExceeded {
            what: "joint pattern enumeration",
            needed,
            budget: TUPLE_BUDGET,
        });
    }
    let mut counts: HashMap<Partition, u128> = HashMap::new();
    for_each_tuple(n, m, |w| {
        let pat = joint_pattern(&w[..k1], &w[k1..]);
        *counts.entry(pat).or_insert(0) += 1;
    });
    let mut total = BigRational::zero();
    for (pat, c) in counts {
        let w = joint_weight(&pat, k1, dist)?;
        if !w.is_zero() {
            total += BigRational::from_integer(BigInt::from(c)) * w;
        }
    }
    Ok(total)
}

/// Cov(Tr(X_N^{k1}), Tr(X_N^{k2})), exact, scale N^{-(k1+k2)/2}.
///
/// For k1 + k2 <= 7 the numerator is interpolated as a polynomial in N
/// (nodes 1..k1+k2+1, verification node k1+k2+2), so any N is exact;
/// larger orders fall back to direct enumeration at the requested N.
pub fn exact_fluct_covariance(
    n: usize,
    k1: usize,
    k2: usize,
    dist: &EntryDistribution,
) -> Result<ExactScaled> {
    assert!(k1 >= 1 && k2 >= 1 && n >= 1);
    let m = k1 + k2;
    let numerator = if m <= 7 {
        let points: Vec<(usize, BigRational)> = (1..=m + 1)
            .map(|x| Ok((x, covariance_numerator_brute(x, k1, k2, dist)?)))
            .collect::<Result<_>>()?;
        let poly = MomentPolynomial {
            coefficients: lagrange(&points),
            provenance: format!("covariance numerator for orders ({k1}, {k2})"),
        };
        let check = covariance_numerator_brute(m + 2, k1, k2, dist)?;
        if poly.eval(m + 2) != check {
            return Err(Error::NotPolynomial((m + 2) as i64));
        }
        poly.eval(n)
    } else {
        covariance_numerator_brute(n, k1, k2, dist)?
    };
    Ok(ExactScaled {
        numerator,
        n,
        scale_halves: m as u32,
    })
}

/// E[J_N(k)^2]: the chaos-part variance, distribution-free across
/// unit-variance mean-zero laws.
///
/// Over D_N^{(k)} x D_N^{(k)} every cyclic pair appears once or twice;
/// a once-appearing pair kills the joint moment (mu_1 = 0) and the
/// marginal products always vanish, so only perfectly matched pairs
/// survive, each contributing mu_2^k = 1.
pub fn exact_chaos_variance(n: usize, k: usize) -> Result<BigRational> {
    assert!(k >= 2 && n >= 1);
    let mut buckets: HashMap<Vec<(usize, usize)>, u128> = HashMap::new();
    for_each_d(n, k, |v| {
        let mut pairs = cyclic_pairs(v);
        pairs.sort_unstable();
        *buckets.entry(pairs).or_insert(0) += 1;
    })?;
    let mut matched: BigInt = BigInt::zero();
    for (_, c) in buckets {
        matched += BigInt::from(c) * BigInt::from(c);
    }
    let nk = BigInt::from(n).pow(k as u32);
    Ok(BigRational::new(matched, nk))
}

/// E[J_N(k1) J_N(k2)] for k1 != k2: always exactly 0 (pair multisets of
/// different cardinality cannot match perfectly). Computed by
/// enumeration rather than asserted, so it can serve as a test oracle.
pub fn exact_chaos_cross(n: usize, k1: usize, k2: usize, dist: &EntryDistribution) -> Result<BigRational> {
    assert!(k1 >= 2 && k2 >= 2 && n >= 1);
    let d1 = combinatorics::enumerate_d(n, k1)?;
    let d2 = combinatorics::enumerate_d(n, k2)?;
    let pairs = (d1.len() as u128) * (d2.len() as u128);
    if pairs > TUPLE_BUDGET {
        return Err(Error::BudgetExceeded {
            what: "chaos cross-covariance enumeration",
            needed: pairs,
            budget: TUPLE_BUDGET,
        });
    }
    let mut total = BigRational::zero();
    for a in &d1 {
        for b in &d2 {
            total += covariance_bracket(a, b, dist)?;
        }
    }
    let scale = BigInt::from(n).pow(((k1 + k2) / 2) as u32);
    // k1 + k2 odd cannot happen with a non-zero total: every surviving
    // bracket needs matched pairs, impossible across different orders.
    Ok(total / BigRational::from_integer(scale))
}

/// E[J_N(k) R_N(k)]: exact cross term between the chaos part and the
/// remainder, for the variance decomposition identity.
pub fn exact_cross_term(n: usize, k: usize, dist: &EntryDistribution) -> Result<BigRational> {
    assert!(k >= 2 && n >= 1);
    let needed = (n as u128).pow(2 * k as u32);
    if needed > TUPLE_BUDGET {
        return Err(Error::BudgetExceeded {
            what: "cross-term enumeration",
            needed,
            budget: TUPLE_BUDGET,
        });
    }
    let d = combinatorics::enumerate_d(n, k)?;
    let singles = Partition::singletons(k);
    let mut non_d: Vec<Vec<usize>> = Vec::new();
    for_each_tuple(n, k, |v| {
        if pattern_of(v) != singles {
            non_d.push(v.to_vec());
        }
    });
    let mut total = BigRational::zero();
    for a in &d {
        for b in &non_d {
            total += covariance_bracket(a, b, dist)?;
        }
    }
    let nk = BigInt::from(n).pow(k as u32);
    Ok(total / BigRational::from_integer(nk))
}
