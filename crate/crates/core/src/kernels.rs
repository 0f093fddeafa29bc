//! Discrete Wiener-chaos toolkit: symmetric kernels over matrix sites,
//! homogeneous sums, contractions, influences, and the trace kernels
//! f_{k,N} / g_{k,N}.
//!
//! Symmetric kernels are stored canonically: one coefficient per sorted
//! tuple of distinct sites, standing for all k! orderings. Contractions
//! are a separate type because they are generally neither symmetric nor
//! diagonal-free.

use std::collections::HashMap;

use num_traits::ToPrimitive;

use crate::combinatorics::for_each_d;
use crate::oracle::exact_chaos_variance;
use crate::{Error, Result};

/// A matrix position (row, column), 1-based.
pub type Site = (usize, usize);

fn factorial(k: usize) -> f64 {
    (1..=k).map(|x| x as f64).product()
}

/// A finitely supported symmetric kernel of order k over sites,
/// vanishing on diagonals.
///
/// Keys are strictly increasing site tuples; the stored coefficient is
/// the common value of all k! orderings.
#[derive(Debug, Clone)]
pub struct DenseKernel {
    k: usize,
    support: HashMap<Vec<Site>, f64>,
}

impl DenseKernel {
    /// Build from canonical entries. Tuples must be strictly increasing
    /// (distinct sorted sites) of length k; zero coefficients are dropped.
    pub fn from_canonical(k: usize, entries: HashMap<Vec<Site>, f64>) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidArgument("kernel order must be >= 1".into()));
        }
        for t in entries.keys() {
            if t.len() != k {
                return Err(Error::InvalidArgument(format!(
                    "tuple length {} != order {k}",
                    t.len()
                )));
            }
            if !t.windows(2).all(|w| w[0] < w[1]) {
                return Err(Error::InvalidArgument(format!(
                    "tuple {t:?} is not strictly increasing"
                )));
            }
            if t.iter().any(|&(i, j)| i < 1 || j < 1) {
                return Err(Error::InvalidArgument("sites must be positive".into()));
            }
        }
        let support = entries.into_iter().filter(|(_, c)| *c != 0.0).collect();
        Ok(DenseKernel { k, support })
    }

    /// Symmetrize an ordered-tuple map into a canonical kernel. Rejects
    /// tuples with repeated sites carrying a non-zero coefficient.
    pub fn symmetrized_from_ordered(k: usize, ordered: &HashMap<Vec<Site>, f64>) -> Result<Self> {
        let mut canonical: HashMap<Vec<Site>, f64> = HashMap::new();
        let kfact = factorial(k);
        for (t, c) in ordered {
            if t.len() != k {
                return Err(Error::InvalidArgument(format!(
                    "tuple length {} != order {k}",
                    t.len()
                )));
            }
            let mut s = t.clone();
            s.sort_unstable();
            if s.windows(2).any(|w| w[0] == w[1]) {
                if *c != 0.0 {
                    return Err(Error::InvalidArgument(format!(
                        "non-zero coefficient on diagonal tuple {t:?}"
                    )));
                }
                continue;
            }
            *canonical.entry(s).or_insert(0.0) += c / kfact;
        }
        DenseKernel::from_canonical(k, canonical)
    }

    pub fn empty(k: usize) -> Self {
        DenseKernel {
            k,
            support: HashMap::new(),
        }
    }

    pub fn order(&self) -> usize {
        self.k
    }

    /// Number of canonical support tuples (ordered support is k! times).
    pub fn support_len(&self) -> usize {
        self.support.len()
    }

    pub fn canonical_support(&self) -> impl Iterator<Item = (&Vec<Site>, f64)> {
        self.support.iter().map(|(t, &c)| (t, c))
    }

    /// Coefficient at an arbitrary ordered tuple (0 on diagonals and off
    /// support).
    pub fn coefficient(&self, tuple: &[Site]) -> f64 {
        assert_eq!(tuple.len(), self.k);
        let mut s = tuple.to_vec();
        s.sort_unstable();
        if s.windows(2).any(|w| w[0] == w[1]) {
            return 0.0;
        }
        self.support.get(&s).copied().unwrap_or(0.0)
    }

    /// ||f||_k^2 = sum of squared coefficients over ordered tuples.
    pub fn norm_sq(&self) -> f64 {
        factorial(self.k) * self.support.values().map(|c| c * c).sum::<f64>()
    }

    /// E[Q_k(f, Y)^2] = k! ||f||_k^2 for i.i.d. unit-variance Y.
    pub fn kernel_variance(&self) -> f64 {
        factorial(self.k) * self.norm_sq()
    }

    /// <f, g> over ordered tuples.
    pub fn inner(&self, other: &DenseKernel) -> Result<f64> {
        if self.k != other.k {
            return Err(Error::InvalidArgument("kernel order mismatch".into()));
        }
        let (small, large) = if self.support.len() <= other.support.len() {
            (self, other)
        } else {
            (other, self)
        };
        let mut acc = 0.0;
        for (t, c) in &small.support {
            if let Some(d) = large.support.get(t) {
                acc += c * d;
            }
        }
        Ok(factorial(self.k) * acc)
    }

    /// a*f + b*g as a kernel of the common order.
    pub fn linear_combination(a: f64, f: &DenseKernel, b: f64, g: &DenseKernel) -> Result<Self> {
        if f.k != g.k {
            return Err(Error::InvalidArgument("kernel order mismatch".into()));
        }
        let mut support = HashMap::new();
        for (t, c) in &f.support {
            *support.entry(t.clone()).or_insert(0.0) += a * c;
        }
        for (t, c) in &g.support {
            *support.entry(t.clone()).or_insert(0.0) += b * c;
        }
        support.retain(|_, c| *c != 0.0);
        Ok(DenseKernel { k: f.k, support })
    }

    pub fn scale(&self, factor: f64) -> Self {
        let support = self
            .support
            .iter()
            .filter(|(_, &c)| factor * c != 0.0)
            .map(|(t, &c)| (t.clone(), factor * c))
            .collect();
        DenseKernel { k: self.k, support }
    }

    /// Q_k(f, Y) = sum over ordered tuples of f * product of Y values.
    pub fn q_sum(&self, values: &HashMap<Site, f64>) -> Result<f64> {
        let mut acc = crate::util::Kahan::default();
        for (t, c) in &self.support {
            let mut prod = *c;
            for s in t {
                let y = values.get(s).ok_or_else(|| {
                    Error::InvalidArgument(format!("missing value for site {s:?}"))
                })?;
                prod *= y;
            }
            acc.add(prod);
        }
        Ok(factorial(self.k) * acc.total())
    }

    /// Q_k(f, Y) with Y read from an unscaled entry array.
    pub fn q_sum_entries(&self, array: &crate::ensemble::MatrixArray) -> f64 {
        let mut acc = crate::util::Kahan::default();
        for (t, c) in &self.support {
            let mut prod = *c;
            for &(i, j) in t {
                prod *= array.entry(i, j);
            }
            acc.add(prod);
        }
        factorial(self.k) * acc.total()
    }

    /// Inf_a(f) = (1/(k-1)!) sum over (a_2..a_k) of f(a, a_2..a_k)^2,
    /// which collapses to the sum of squared canonical coefficients of
    /// tuples containing a.
    pub fn influence(&self, a: Site) -> f64 {
        self.support
            .iter()
            .filter(|(t, _)| t.contains(&a))
            .map(|(_, c)| c * c)
            .sum()
    }

    /// Influence of every site appearing in the support.
    pub fn influence_table(&self) -> HashMap<Site, f64> {
        let mut per_site: HashMap<Site, f64> = HashMap::new();
        for (t, c) in &self.support {
            for s in t {
                *per_site.entry(*s).or_insert(0.0) += c * c;
            }
        }
        per_site
    }

    pub fn max_influence(&self) -> f64 {
        self.influence_table().values().cloned().fold(0.0, f64::max)
    }

    /// Text dump, one line per canonical tuple: `(i,j)(i,j)... coefficient`.
    pub fn dump(&self) -> String {
        let mut lines: Vec<(Vec<Site>, f64)> = self
            .support
            .iter()
            .map(|(t, &c)| (t.clone(), c))
            .collect();
        lines.sort_by(|a, b| a.0.cmp(&b.0));
        let mut out = String::new();
        for (t, c) in lines {
            for (i, j) in &t {
                out.push_str(&format!("({i},{j})"));
            }
            out.push_str(&format!(" {c:.16e}\n"));
        }
        out
    }
}

/// The (generally asymmetric) contraction f *_r g, stored as values on
/// canonical pairs (L, M) of sorted (k-r)-site sets: the function value
/// at any ordered tuple whose first half has site set L and second half
/// has site set M.
#[derive(Debug, Clone)]
pub struct ContractionKernel {
    /// half-order k - r
    h: usize,
    values: HashMap<(Vec<Site>, Vec<Site>), f64>,
}

impl ContractionKernel {
    /// Order of the contraction as a kernel: 2(k - r).
    pub fn order(&self) -> usize {
        2 * self.h
    }

    pub fn value(&self, left: &[Site], right: &[Site]) -> f64 {
        let mut l = left.to_vec();
        let mut m = right.to_vec();
        l.sort_unstable();
        m.sort_unstable();
        if l.windows(2).any(|w| w[0] == w[1]) || m.windows(2).any(|w| w[0] == w[1]) {
            return 0.0;
        }
        self.values.get(&(l, m)).copied().unwrap_or(0.0)
    }

    pub fn support_len(&self) -> usize {
        self.values.len()
    }

    /// ||f *_r g||_{2k-2r}: L2 norm over ordered tuples.
    pub fn norm(&self) -> f64 {
        let hf = factorial(self.h);
        let sq: f64 = self.values.values().map(|v| v * v).sum();
        hf * sq.sqrt()
    }

    /// <u, v> over ordered tuples; both must have the same half-order.
    pub fn inner(&self, other: &ContractionKernel) -> Result<f64> {
        if self.h != other.h {
            return Err(Error::InvalidArgument(
                "contraction half-order mismatch".into(),
            ));
        }
        let (small, large) = if self.values.len() <= other.values.len() {
            (self, other)
        } else {
            (other, self)
        };
        let mut acc = 0.0;
        for (key, v) in &small.values {
            if let Some(w) = large.values.get(key) {
                acc += v * w;
            }
        }
        let hf = factorial(self.h);
        Ok(hf * hf * acc)
    }
}

fn subsets_of(set: &[Site], size: usize, out: &mut Vec<(Vec<Site>, Vec<Site>)>) {
    // all (subset, complement) splits with |subset| = size
    let n = set.len();
    let mut idx: Vec<usize> = (0..size).collect();
    if size > n {
        return;
    }
    loop {
        let sub: Vec<Site> = idx.iter().map(|&i| set[i]).collect();
        let mut comp = Vec::with_capacity(n - size);
        let mut p = 0;
        for (i, &s) in set.iter().enumerate() {
            if p < size && idx[p] == i {
                p += 1;
            } else {
                comp.push(s);
            }
        }
        out.push((sub, comp));
        // next combination
        let mut i = size;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if idx[i] < n - size + i {
                idx[i] += 1;
                for j in i + 1..size {
                    idx[j] = idx[j - 1] + 1;
                }
                break;
            }
        }
    }
}

/// (f *_r g) via a hash join on the shared r-site projection.
pub fn contract(f: &DenseKernel, g: &DenseKernel, r: usize) -> Result<ContractionKernel> {
    if f.k != g.k {
        return Err(Error::InvalidArgument("kernel order mismatch".into()));
    }
    let k = f.k;
    if r > k {
        return Err(Error::InvalidArgument(format!(
            "contraction index {r} out of range 0..={k}"
        )));
    }
    let h = k - r;
    let bucket = |kern: &DenseKernel| -> HashMap<Vec<Site>, Vec<(Vec<Site>, f64)>> {
        let mut buckets: HashMap<Vec<Site>, Vec<(Vec<Site>, f64)>> = HashMap::new();
        let mut splits = Vec::new();
        for (t, c) in &kern.support {
            splits.clear();
            subsets_of(t, r, &mut splits);
            for (x, l) in splits.drain(..) {
                buckets.entry(x).or_default().push((l, *c));
            }
        }
        buckets
    };
    let fb = bucket(f);
    let gb = bucket(g);
    let rfact = factorial(r);
    let mut values: HashMap<(Vec<Site>, Vec<Site>), f64> = HashMap::new();
    for (x, fl) in &fb {
        if let Some(gl) = gb.get(x) {
            for (l, cf) in fl {
                for (m, cg) in gl {
                    *values.entry((l.clone(), m.clone())).or_insert(0.0) += rfact * cf * cg;
                }
            }
        }
    }
    values.retain(|_, v| *v != 0.0);
    Ok(ContractionKernel { h, values })
}

/// Quadratic-time contraction, kept as an independent oracle for tests:
/// pairs every support set of f with every support set of g and checks
/// whether their overlap can serve as the contracted block.
pub fn contract_quadratic(f: &DenseKernel, g: &DenseKernel, r: usize) -> Result<ContractionKernel> {
    if f.k != g.k {
        return Err(Error::InvalidArgument("kernel order mismatch".into()));
    }
    let k = f.k;
    if r > k {
        return Err(Error::InvalidArgument(format!(
            "contraction index {r} out of range 0..={k}"
        )));
    }
    let h = k - r;
    let rfact = factorial(r);
    let mut values: HashMap<(Vec<Site>, Vec<Site>), f64> = HashMap::new();
    let mut fsplits = Vec::new();
    let mut gsplits = Vec::new();
    for (s, cf) in &f.support {
        fsplits.clear();
        subsets_of(s, r, &mut fsplits);
        for (t, cg) in &g.support {
            gsplits.clear();
            subsets_of(t, r, &mut gsplits);
            for (x, l) in &fsplits {
                for (y, m) in &gsplits {
                    if x == y {
                        *values.entry((l.clone(), m.clone())).or_insert(0.0) +=
                            rfact * cf * cg;
                    }
                }
            }
        }
    }
    values.retain(|_, v| *v != 0.0);
    Ok(ContractionKernel { h, values })
}

/// The trace kernel f_{k,N}: the symmetrization of the indicator sum over
/// D_N^{(k)} with weight N^{-k/2}, so Q_k(f_{k,N}, X) = J_N(k).
pub fn trace_kernel(k: usize, n: usize) -> Result<DenseKernel> {
    if k < 2 {
        return Err(Error::InvalidArgument(
            "trace kernel needs order k >= 2".into(),
        ));
    }
    let weight = (n as f64).powf(-(k as f64) / 2.0) / factorial(k);
    let mut support: HashMap<Vec<Site>, f64> = HashMap::new();
    for_each_d(n, k, |v| {
        let mut sites: Vec<Site> = (0..k).map(|a| (v[a], v[(a + 1) % k])).collect();
        sites.sort_unstable();
        *support.entry(sites).or_insert(0.0) += weight;
    })?;
    DenseKernel::from_canonical(k, support)
}

/// One row of the contraction-norm scaling table.
#[derive(Debug, Clone)]
pub struct ScalingRow {
    pub n: usize,
    pub r: usize,
    pub norm: f64,
    /// sqrt(N) * norm, the quantity that stays bounded.
    pub scaled_norm: f64,
}

/// Tabulate ||f_{k,N} *_r f_{k,N}|| for r = 1..k-1 over a list of sizes.
pub fn contraction_scaling(k: usize, n_list: &[usize]) -> Result<Vec<ScalingRow>> {
    let mut rows = Vec::new();
    for &n in n_list {
        let f = trace_kernel(k, n)?;
        for r in 1..k {
            let norm = contract(&f, &f, r)?.norm();
            rows.push(ScalingRow {
                n,
                r,
                norm,
                scaled_norm: (n as f64).sqrt() * norm,
            });
        }
    }
    Ok(rows)
}

/// g_{k,N} = f_{k,N} / sqrt(E[J_N(k)^2]), the unit-variance trace kernel.
pub fn normalized_kernel(k: usize, n: usize) -> Result<DenseKernel> {
    let var = exact_chaos_variance(n, k)?
        .to_f64()
        .expect("chaos variance fits in f64");
    if var <= 0.0 {
        return Err(Error::ZeroVariance);
    }
    Ok(trace_kernel(k, n)?.scale(1.0 / var.sqrt()))
}
