//! Set partitions of [k], 2k-pair chains, the pattern classes A_N(pi),
//! the chain classes C_pi(2k, N) and their pinned/mapped refinements,
//! degrees-of-freedom certificates, and the exact remainder variance.
//!
//! The cyclic convention i_{k+1} = i_1 lives in [`cyclic_pairs`]; every
//! other module iterates pairs through it.

use std::collections::HashMap;
use std::fmt;

use num_rational::BigRational;
use num_traits::Zero;

use crate::ensemble::EntryDistribution;
use crate::{Error, Result};

/// Largest k for which full partition enumeration is allowed (Bell-number
/// budget; Bell(9) = 21147).
pub const PARTITION_BUDGET_K: usize = 9;

/// Budget on N^k for tuple enumerations (and N^{2k} for chain pairs).
pub const TUPLE_BUDGET: u128 = 100_000_000;

/// A set partition of [k] = {1, ..., k}, canonicalized by ascending
/// minimum element; block elements are sorted.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Partition {
    k: usize,
    blocks: Vec<Vec<usize>>,
}

impl Partition {
    pub fn new(k: usize, mut blocks: Vec<Vec<usize>>) -> Self {
        let mut seen = vec![false; k + 1];
        for b in &mut blocks {
            assert!(!b.is_empty(), "empty block");
            b.sort_unstable();
            for &x in b.iter() {
                assert!(x >= 1 && x <= k && !seen[x], "blocks must partition [k]");
                seen[x] = true;
            }
        }
        assert!(seen[1..=k].iter().all(|&s| s), "blocks must cover [k]");
        blocks.sort_by_key(|b| b[0]);
        Partition { k, blocks }
    }

    /// The one-block partition of [k].
    pub fn one_block(k: usize) -> Self {
        Partition::new(k, vec![(1..=k).collect()])
    }

    /// The all-singletons partition of [k].
    pub fn singletons(k: usize) -> Self {
        Partition::new(k, (1..=k).map(|x| vec![x]).collect())
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn block_count(&self) -> usize {
        self.blocks.len()
    }

    pub fn has_singleton(&self) -> bool {
        self.blocks.iter().any(|b| b.len() == 1)
    }

    /// True if some block has cardinality >= 2 (membership in Q(k)).
    pub fn has_nontrivial_block(&self) -> bool {
        self.blocks.iter().any(|b| b.len() >= 2)
    }

    /// Index (0-based) of the block containing element x.
    pub fn block_of(&self, x: usize) -> usize {
        self.blocks.iter().position(|b| b.contains(&x)).unwrap()
    }
}

impl fmt::Display for Partition {
    /// Canonical string form, e.g. `{1,4,5}|{2}|{3}`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .blocks
            .iter()
            .map(|b| {
                format!(
                    "{{{}}}",
                    b.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
                )
            })
            .collect();
        write!(f, "{}", parts.join("|"))
    }
}

/// All set partitions of [k], in canonical order (restricted growth
/// string enumeration).
pub fn partitions(k: usize) -> Result<Vec<Partition>> {
    if k == 0 || k > PARTITION_BUDGET_K {
        return Err(Error::BudgetExceeded {
            what: "set partitions",
            needed: k as u128,
            budget: PARTITION_BUDGET_K as u128,
        });
    }
    let mut out = Vec::new();
    // rgs[i] = block label of element i+1; rgs[i] <= max(rgs[..i]) + 1.
    let mut rgs = vec![0usize; k];
    loop {
        let nblocks = rgs.iter().copied().max().unwrap() + 1;
        let mut blocks = vec![Vec::new(); nblocks];
        for (i, &b) in rgs.iter().enumerate() {
            blocks[b].push(i + 1);
        }
        out.push(Partition::new(k, blocks));
        // next RGS
        let mut i = k;
        loop {
            if i == 1 {
                out.sort();
                return Ok(out);
            }
            i -= 1;
            let cap = rgs[..i].iter().copied().max().unwrap() + 1;
            if rgs[i] < cap {
                rgs[i] += 1;
                for v in rgs[i + 1..].iter_mut() {
                    *v = 0;
                }
                break;
            }
        }
    }
}

/// The partitions of [k] with at least one block of cardinality >= 2.
pub fn q_subset(k: usize) -> Result<Vec<Partition>> {
    Ok(partitions(k)?
        .into_iter()
        .filter(|p| p.has_nontrivial_block())
        .collect())
}

/// The k cyclic pairs (v_a, v_{a+1}) of an index vector, with v_{k+1} = v_1.
pub fn cyclic_pairs(v: &[usize]) -> Vec<(usize, usize)> {
    let k = v.len();
    (0..k).map(|a| (v[a], v[(a + 1) % k])).collect()
}

/// The partition of [k] induced by equality of the cyclic pairs of `v`.
pub fn pattern_of(v: &[usize]) -> Partition {
    let pairs = cyclic_pairs(v);
    let k = v.len();
    let mut groups: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
    for (a, p) in pairs.into_iter().enumerate() {
        groups.entry(p).or_default().push(a + 1);
    }
    Partition::new(k, groups.into_values().collect())
}

/// Visit every tuple in [n]^k (values 1..=n).
pub(crate) fn for_each_tuple(n: usize, k: usize, mut f: impl FnMut(&[usize])) {
    let mut v = vec![1usize; k];
    loop {
        f(&v);
        let mut pos = k;
        loop {
            if pos == 0 {
                return;
            }
            pos -= 1;
            if v[pos] < n {
                v[pos] += 1;
                for x in v[pos + 1..].iter_mut() {
                    *x = 1;
                }
                break;
            }
        }
    }
}

fn tuple_budget(n: usize, k: usize, what: &'static str) -> Result<()> {
    let needed = (n as u128).pow(k as u32);
    if needed > TUPLE_BUDGET {
        return Err(Error::BudgetExceeded {
            what,
            needed,
            budget: TUPLE_BUDGET,
        });
    }
    Ok(())
}

/// Visit every vector of D_N^{(k)} (all cyclic pairs distinct), pruning a
/// branch as soon as a pair repeats.
pub fn for_each_d(n: usize, k: usize, mut f: impl FnMut(&[usize])) -> Result<()> {
    assert!(k >= 2, "D_N^{{(k)}} is defined for k >= 2");
    tuple_budget(n, k, "D_N^{(k)} enumeration")?;
    if n == 0 {
        return Ok(());
    }
    let mut v = vec![0usize; k];
    // depth-first over positions; at depth d the pairs (v_0,v_1)..(v_{d-2},v_{d-1})
    // are known distinct, and placing v_d checks the new pair.
    fn rec(v: &mut Vec<usize>, d: usize, n: usize, k: usize, f: &mut impl FnMut(&[usize])) {
        if d == k {
            // closing pairs (v_{k-2}, v_{k-1}) and (v_{k-1}, v_0) were checked
            // at placement time; emit.
            f(v);
            return;
        }
        for cand in 1..=n {
            v[d] = cand;
            if d >= 1 {
                let new_pair = (v[d - 1], v[d]);
                let mut clash = false;
                for a in 0..d.saturating_sub(1) {
                    if (v[a], v[a + 1]) == new_pair {
                        clash = true;
                        break;
                    }
                }
                if clash {
                    continue;
                }
            }
            if d == k - 1 {
                // check the two wrap-around constraints
                let last = (v[k - 1], v[0]);
                let mut ok = true;
                for a in 0..k - 1 {
                    if (v[a], v[a + 1]) == last {
                        ok = false;
                        break;
                    }
                }
                if !ok {
                    continue;
                }
            }
            rec(v, d + 1, n, k, f);
        }
    }
    rec(&mut v, 0, n, k, &mut f);
    Ok(())
}

/// The full list D_N^{(k)}.
pub fn enumerate_d(n: usize, k: usize) -> Result<Vec<Vec<usize>>> {
    let mut out = Vec::new();
    for_each_d(n, k, |v| out.push(v.to_vec()))?;
    Ok(out)
}

/// |A_N(pi)| without materializing the class.
pub fn count_pattern_class(pi: &Partition, n: usize) -> Result<u128> {
    let k = pi.k();
    tuple_budget(n, k, "A_N(pi) count")?;
    let mut c: u128 = 0;
    for_each_tuple(n, k, |v| {
        if &pattern_of(v) == pi {
            c += 1;
        }
    });
    Ok(c)
}

/// All vectors in [N]^k whose coincidence pattern is exactly `pi`.
pub fn enumerate_pattern_class(pi: &Partition, n: usize) -> Result<Vec<Vec<usize>>> {
    let k = pi.k();
    tuple_budget(n, k, "A_N(pi) enumeration")?;
    let mut out = Vec::new();
    for_each_tuple(n, k, |v| {
        if &pattern_of(v) == pi {
            out.push(v.to_vec());
        }
    });
    Ok(out)
}

/// A chain of length 2k: upper left-indices i, lower left-indices j.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Chain {
    pub upper: Vec<usize>,
    pub lower: Vec<usize>,
}

impl Chain {
    pub fn k(&self) -> usize {
        self.upper.len()
    }

    pub fn upper_pairs(&self) -> Vec<(usize, usize)> {
        cyclic_pairs(&self.upper)
    }

    pub fn lower_pairs(&self) -> Vec<(usize, usize)> {
        cyclic_pairs(&self.lower)
    }

    /// True if both sub-chains induce exactly the partition `pi`.
    pub fn has_partition(&self, pi: &Partition) -> bool {
        pattern_of(&self.upper) == *pi && pattern_of(&self.lower) == *pi
    }

    /// Pair value shared by block `b` (0-based index into pi.blocks()) of
    /// the upper sub-chain; requires the chain to have partition pi.
    fn upper_block_pair(&self, pi: &Partition, b: usize) -> (usize, usize) {
        let a = pi.blocks()[b][0];
        let pairs = self.upper_pairs();
        pairs[a - 1]
    }

    fn lower_block_pair(&self, pi: &Partition, b: usize) -> (usize, usize) {
        let a = pi.blocks()[b][0];
        let pairs = self.lower_pairs();
        pairs[a - 1]
    }
}

/// Which refinement of C_pi(2k, N) to enumerate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ClassVariant {
    /// C_pi(2k, N) itself.
    Plain,
    /// C_pi^{u,v}: block u (upper) corresponds to block v (lower);
    /// block indices are 1-based positions in the canonical block order.
    Pinned { u: usize, v: usize },
    /// C_pi^R: each listed (u, v) pair must correspond.
    Mapped { pairs: Vec<(usize, usize)> },
}

/// Membership predicate for a chain in the given class.
pub fn chain_in_class(chain: &Chain, pi: &Partition, variant: &ClassVariant) -> bool {
    if !chain.has_partition(pi) {
        return false;
    }
    let r = pi.block_count();
    let corresponds = |u: usize, v: usize| -> bool {
        chain.upper_block_pair(pi, u) == chain.lower_block_pair(pi, v)
    };
    let base = if pi.has_singleton() {
        // every singleton (in either sub-chain) corresponds to a block of
        // the opposite sub-chain
        pi.blocks().iter().enumerate().all(|(u, b)| {
            b.len() > 1
                || ((0..r).any(|v| corresponds(u, v)) && (0..r).any(|v| corresponds(v, u)))
        })
    } else {
        // at least one upper block corresponds to a lower block
        (0..r).any(|u| (0..r).any(|v| corresponds(u, v)))
    };
    if !base {
        return false;
    }
    match variant {
        ClassVariant::Plain => true,
        ClassVariant::Pinned { u, v } => corresponds(u - 1, v - 1),
        ClassVariant::Mapped { pairs } => pairs.iter().all(|&(u, v)| corresponds(u - 1, v - 1)),
    }
}

/// Enumerate the class by pairing vectors of A_N(pi) and filtering on the
/// membership predicate.
pub fn enumerate_class(pi: &Partition, n: usize, variant: &ClassVariant) -> Result<Vec<Chain>> {
    let members = enumerate_pattern_class(pi, n)?;
    let pair_count = (members.len() as u128).pow(2);
    if pair_count > TUPLE_BUDGET {
        return Err(Error::BudgetExceeded {
            what: "chain class enumeration",
            needed: pair_count,
            budget: TUPLE_BUDGET,
        });
    }
    let mut out = Vec::new();
    for upper in &members {
        for lower in &members {
            let chain = Chain {
                upper: upper.clone(),
                lower: lower.clone(),
            };
            if chain_in_class(&chain, pi, variant) {
                out.push(chain);
            }
        }
    }
    Ok(out)
}

/// A degrees-of-freedom certificate: fixing the upper indices listed in
/// `upper` and the lower indices listed in `lower` pins down at most one
/// chain of the certified class.
#[derive(Debug, Clone)]
pub struct FreedomCertificate {
    pub upper: Vec<usize>,
    pub lower: Vec<usize>,
}

impl FreedomCertificate {
    pub fn budget(&self) -> usize {
        self.upper.len() + self.lower.len()
    }
}

/// Check a freedom certificate against exhaustive enumeration at each N:
/// every assignment of the certified indices matches at most one chain,
/// and |class| <= N^q.
pub fn check_freedom(
    pi: &Partition,
    variant: &ClassVariant,
    cert: &FreedomCertificate,
    n_list: &[usize],
) -> Result<bool> {
    if cert.upper.is_empty() {
        return Ok(false);
    }
    let q = cert.budget() as u32;
    for &n in n_list {
        let class = enumerate_class(pi, n, variant)?;
        if class.len() as u128 > (n as u128).pow(q) {
            return Ok(false);
        }
        let mut seen: HashMap<Vec<usize>, usize> = HashMap::new();
        for c in &class {
            let mut key = Vec::with_capacity(cert.budget());
            for &a in &cert.upper {
                key.push(c.upper[a - 1]);
            }
            for &b in &cert.lower {
                key.push(c.lower[b - 1]);
            }
            let slot = seen.entry(key).or_insert(0);
            *slot += 1;
            if *slot > 1 {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// One row of the Proposition-4.3 cardinality table.
#[derive(Debug, Clone)]
pub struct CardinalityRow {
    pub partition: Partition,
    pub n: usize,
    pub cardinality: usize,
    /// |C_pi(2k, N)| / N^{k-1}.
    pub ratio: f64,
}

/// Tabulate |C_pi(2k, N)| and the ratio to N^{k-1} over all pi in Q(k).
pub fn cardinality_bound_check(k: usize, n_list: &[usize]) -> Result<Vec<CardinalityRow>> {
    let mut rows = Vec::new();
    for pi in q_subset(k)? {
        for &n in n_list {
            let card = enumerate_class(&pi, n, &ClassVariant::Plain)?.len();
            let ratio = card as f64 / (n as f64).powi(k as i32 - 1);
            rows.push(CardinalityRow {
                partition: pi.clone(),
                n,
                cardinality: card,
                ratio,
            });
        }
    }
    Ok(rows)
}

/// Exact E[prod over cyclic pairs of X_pair] for one or two index vectors,
/// as a product of block moments of the entry law.
pub fn product_moment(vecs: &[&[usize]], dist: &EntryDistribution) -> Result<BigRational> {
    let mut mult: HashMap<(usize, usize), usize> = HashMap::new();
    for v in vecs {
        for p in cyclic_pairs(v) {
            *mult.entry(p).or_insert(0) += 1;
        }
    }
    let mut out = BigRational::from_integer(1.into());
    for (_, m) in mult {
        let mu = dist.moment(m)?;
        if mu.is_zero() {
            return Ok(BigRational::zero());
        }
        out *= mu;
    }
    Ok(out)
}

/// The covariance bracket E[XY] - E[X]E[Y] for the trace monomials of two
/// index vectors.
pub fn covariance_bracket(
    i: &[usize],
    j: &[usize],
    dist: &EntryDistribution,
) -> Result<BigRational> {
    let joint = product_moment(&[i, j], dist)?;
    let sep = product_moment(&[i], dist)? * product_moment(&[j], dist)?;
    Ok(joint - sep)
}

/// G_N(pi): pairs of A_N(pi) vectors with non-vanishing covariance bracket.
pub fn g_set(
    pi: &Partition,
    n: usize,
    dist: &EntryDistribution,
) -> Result<Vec<(Vec<usize>, Vec<usize>)>> {
    let members = enumerate_pattern_class(pi, n)?;
    let mut out = Vec::new();
    for a in &members {
        for b in &members {
            if !covariance_bracket(a, b, dist)?.is_zero() {
                out.push((a.clone(), b.clone()));
            }
        }
    }
    Ok(out)
}

/// Exact E[R_N(k)^2]: the variance of the off-D_N part of the trace
/// fluctuation, as a sum of covariance brackets over pairs of non-D
/// vectors, divided by N^k.
pub fn remainder_variance_exact(
    n: usize,
    k: usize,
    dist: &EntryDistribution,
) -> Result<BigRational> {
    if k == 1 {
        // [N]^1 \ D has no meaning at k = 1; the remainder is identically 0.
        return Ok(BigRational::zero());
    }
    tuple_budget(n, 2 * k, "remainder variance enumeration")?;
    let mut non_d: Vec<Vec<usize>> = Vec::new();
    for_each_tuple(n, k, |v| {
        if pattern_of(v) != Partition::singletons(k) {
            non_d.push(v.to_vec());
        }
    });
    let mut total = BigRational::zero();
    for a in &non_d {
        for b in &non_d {
            total += covariance_bracket(a, b, dist)?;
        }
    }
    let nk = BigRational::from_integer(num_bigint::BigInt::from(n).pow(k as u32));
    Ok(total / nk)
}
