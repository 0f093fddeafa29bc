//! Entry laws with exact moment metadata, and the seeded infinite entry
//! array that all matrices are cut from.
//!
//! The array is a pure function of (seed, i, j), so the n-by-n raw block is
//! always the top-left corner of the m-by-m block for n <= m. This nesting
//! is what makes one fixed array usable for almost-sure statements along
//! the whole path N = 1, 2, 3, ...

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::rng::{uniform_at, word_at};
use crate::{Error, Result};

/// Highest moment order stored by default; covers powers k <= 8 (which need
/// moments up to order 2k in the covariance oracle).
pub const DEFAULT_MAX_MOMENT: usize = 16;

/// How the entries of a law are drawn.
#[derive(Debug, Clone, PartialEq)]
pub enum SamplerSpec {
    Rademacher,
    StandardNormal,
    Discrete {
        values: Vec<BigRational>,
        probs: Vec<BigRational>,
    },
}

/// A centered, unit-variance entry law with exact rational moments.
#[derive(Debug, Clone)]
pub struct EntryDistribution {
    name: String,
    /// moments[j] = E[X^j], j = 0..=max_order (moments[0] = 1).
    moments: Vec<BigRational>,
    /// beta = E|X|^3.
    abs_third: f64,
    sampler: SamplerSpec,
    /// Precomputed f64 tables for the discrete inverse-CDF sampler.
    discrete_table: Vec<(f64, f64)>,
}

fn big(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

impl EntryDistribution {
    /// Symmetric +/-1 law.
    pub fn rademacher() -> Self {
        let mut moments = Vec::with_capacity(DEFAULT_MAX_MOMENT + 1);
        for j in 0..=DEFAULT_MAX_MOMENT {
            moments.push(if j % 2 == 0 { big(1) } else { big(0) });
        }
        EntryDistribution {
            name: "rademacher".into(),
            moments,
            abs_third: 1.0,
            sampler: SamplerSpec::Rademacher,
            discrete_table: Vec::new(),
        }
    }

    /// Standard Gaussian; even moments are the double factorials (2m-1)!!.
    pub fn standard_normal() -> Self {
        let mut moments = Vec::with_capacity(DEFAULT_MAX_MOMENT + 1);
        moments.push(big(1));
        for j in 1..=DEFAULT_MAX_MOMENT {
            if j % 2 == 1 {
                moments.push(big(0));
            } else {
                let mut df = BigInt::one();
                let mut t = j as i64 - 1;
                while t > 1 {
                    df *= BigInt::from(t);
                    t -= 2;
                }
                moments.push(BigRational::from_integer(df));
            }
        }
        EntryDistribution {
            name: "normal".into(),
            moments,
            // E|Z|^3 = 2 sqrt(2/pi)
            abs_third: 2.0 * (2.0 / std::f64::consts::PI).sqrt(),
            sampler: SamplerSpec::StandardNormal,
            discrete_table: Vec::new(),
        }
    }

    /// Finite discrete law; moments are computed exactly from the atoms.
    ///
    /// Rejects laws that are not centered with unit variance, or whose
    /// probabilities are not a positive distribution summing to one.
    pub fn discrete(values: Vec<BigRational>, probs: Vec<BigRational>) -> Result<Self> {
        if values.is_empty() || values.len() != probs.len() {
            return Err(Error::InvalidDistribution(
                "discrete law needs matching, non-empty value/probability lists".into(),
            ));
        }
        for p in &probs {
            if !p.is_positive() {
                return Err(Error::InvalidDistribution(format!(
                    "probability {p} is not positive"
                )));
            }
        }
        let total: BigRational = probs.iter().cloned().sum();
        if !total.is_one() {
            return Err(Error::InvalidDistribution(format!(
                "probabilities sum to {total}, not 1"
            )));
        }
        let mut moments = Vec::with_capacity(DEFAULT_MAX_MOMENT + 1);
        for j in 0..=DEFAULT_MAX_MOMENT {
            let mut m = BigRational::zero();
            for (v, p) in values.iter().zip(&probs) {
                let mut pw = BigRational::one();
                for _ in 0..j {
                    pw *= v;
                }
                m += p * pw;
            }
            moments.push(m);
        }
        if !moments[1].is_zero() {
            return Err(Error::InvalidDistribution(format!(
                "mean is {}, must be 0",
                moments[1]
            )));
        }
        if !moments[2].is_one() {
            return Err(Error::InvalidDistribution(format!(
                "variance is {}, must be 1",
                moments[2]
            )));
        }
        let abs_third = values
            .iter()
            .zip(&probs)
            .map(|(v, p)| {
                let a = v.abs();
                (p * &a * &a * &a).to_f64().unwrap()
            })
            .sum();
        // Inverse-CDF table in f64, built once so sampling is bit-stable.
        let mut table = Vec::with_capacity(values.len());
        let mut cum = BigRational::zero();
        for (v, p) in values.iter().zip(&probs) {
            cum += p;
            table.push((cum.to_f64().unwrap(), v.to_f64().unwrap()));
        }
        table.last_mut().unwrap().0 = 1.0;
        Ok(EntryDistribution {
            name: format!(
                "discrete:{}",
                values
                    .iter()
                    .zip(&probs)
                    .map(|(v, p)| format!("{v},{p}"))
                    .collect::<Vec<_>>()
                    .join(";")
            ),
            moments,
            abs_third,
            sampler: SamplerSpec::Discrete { values, probs },
            discrete_table: table,
        })
    }

    /// Parse the textual spec grammar: `rademacher`, `normal`, or
    /// `discrete:v1,p1;v2,p2;...` with rational components `num/den`.
    pub fn parse(spec: &str) -> Result<Self> {
        match spec.trim() {
            "rademacher" => Ok(Self::rademacher()),
            "normal" | "standard_normal" => Ok(Self::standard_normal()),
            s if s.starts_with("discrete:") => {
                let body = &s["discrete:".len()..];
                let mut values = Vec::new();
                let mut probs = Vec::new();
                for atom in body.split(';') {
                    let mut parts = atom.split(',');
                    let (v, p) = match (parts.next(), parts.next(), parts.next()) {
                        (Some(v), Some(p), None) => (v, p),
                        _ => {
                            return Err(Error::InvalidDistribution(format!(
                                "bad discrete atom `{atom}`, expected `value,prob`"
                            )))
                        }
                    };
                    values.push(parse_rational(v)?);
                    probs.push(parse_rational(p)?);
                }
                Self::discrete(values, probs)
            }
            other => Err(Error::InvalidDistribution(format!(
                "unknown distribution spec `{other}`"
            ))),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Exact moment E[X^j].
    pub fn moment(&self, j: usize) -> Result<&BigRational> {
        self.moments.get(j).ok_or(Error::MissingMoment(j))
    }

    pub fn max_moment_order(&self) -> usize {
        self.moments.len() - 1
    }

    /// beta = E|X|^3 (always >= 1 for a unit-variance law).
    pub fn abs_third(&self) -> f64 {
        self.abs_third
    }

    pub fn sampler(&self) -> &SamplerSpec {
        &self.sampler
    }

    fn sample(&self, seed: u64, i: u64, j: u64) -> f64 {
        match &self.sampler {
            SamplerSpec::Rademacher => {
                if word_at(seed, i, j, 0) & 1 == 0 {
                    1.0
                } else {
                    -1.0
                }
            }
            SamplerSpec::StandardNormal => {
                // Box-Muller on two counter-indexed uniforms.
                let u1 = uniform_at(seed, i, j, 0);
                let u2 = uniform_at(seed, i, j, 1);
                (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
            }
            SamplerSpec::Discrete { .. } => {
                let u = uniform_at(seed, i, j, 0);
                for &(cum, v) in &self.discrete_table {
                    if u <= cum {
                        return v;
                    }
                }
                self.discrete_table.last().unwrap().1
            }
        }
    }
}

fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let parse_int = |t: &str| -> Result<BigInt> {
        t.parse::<BigInt>()
            .map_err(|_| Error::InvalidDistribution(format!("bad integer `{t}`")))
    };
    if let Some((num, den)) = s.split_once('/') {
        let d = parse_int(den)?;
        if d.is_zero() {
            return Err(Error::InvalidDistribution(format!("zero denominator in `{s}`")));
        }
        Ok(BigRational::new(parse_int(num)?, d))
    } else {
        Ok(BigRational::from_integer(parse_int(s)?))
    }
}

/// A seeded, lazily realized infinite array of i.i.d. entries.
#[derive(Debug, Clone)]
pub struct MatrixArray {
    seed: u64,
    dist: EntryDistribution,
}

impl MatrixArray {
    pub fn new(seed: u64, dist: EntryDistribution) -> Self {
        MatrixArray { seed, dist }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn dist(&self) -> &EntryDistribution {
        &self.dist
    }

    /// Raw (unscaled) entry X_ij, 1-based indices.
    pub fn entry(&self, i: usize, j: usize) -> f64 {
        assert!(i >= 1 && j >= 1, "matrix positions are 1-based");
        self.dist.sample(self.seed, i as u64, j as u64)
    }

    /// Realize the raw top-left n-by-n block, row major.
    pub fn raw_block(&self, n: usize) -> Vec<f64> {
        let mut out = Vec::with_capacity(n * n);
        for i in 1..=n {
            for j in 1..=n {
                out.push(self.entry(i, j));
            }
        }
        out
    }

    /// The scaled matrix X_N with entries X_ij / sqrt(N).
    pub fn sample_matrix(&self, n: usize) -> Result<ScaledMatrix> {
        if n == 0 {
            return Err(Error::InvalidArgument("matrix size N must be >= 1".into()));
        }
        let scale = 1.0 / (n as f64).sqrt();
        let values = self.raw_block(n).iter().map(|x| x * scale).collect();
        Ok(ScaledMatrix { n, values })
    }
}

/// An N-by-N realization of the scaled ensemble.
#[derive(Debug, Clone)]
pub struct ScaledMatrix {
    n: usize,
    /// Row major, values[(i-1)*n + (j-1)] = X_ij / sqrt(N).
    values: Vec<f64>,
}

impl ScaledMatrix {
    pub fn size(&self) -> usize {
        self.n
    }

    /// Scaled entry, 1-based indices.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[(i - 1) * self.n + (j - 1)]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Build directly from raw entries (test hook for engineered matrices).
    pub fn from_raw(n: usize, raw: Vec<f64>) -> Self {
        assert_eq!(raw.len(), n * n);
        let scale = 1.0 / (n as f64).sqrt();
        ScaledMatrix {
            n,
            values: raw.iter().map(|x| x * scale).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rademacher_moments() {
        let d = EntryDistribution::rademacher();
        assert!(d.moment(3).unwrap().is_zero());
        assert!(d.moment(4).unwrap().is_one());
        assert_eq!(d.abs_third(), 1.0);
    }

    #[test]
    fn normal_moments_are_double_factorials() {
        let d = EntryDistribution::standard_normal();
        assert_eq!(d.moment(4).unwrap(), &big(3));
        assert_eq!(d.moment(6).unwrap(), &big(15));
        assert_eq!(d.moment(8).unwrap(), &big(105));
    }

    #[test]
    fn non_centered_discrete_is_rejected() {
        // values (-2, 1) with probs (1/5, 4/5): mean = 2/5 != 0.
        let err = EntryDistribution::parse("discrete:-2,1/5;1,4/5").unwrap_err();
        match err {
            Error::InvalidDistribution(msg) => assert!(msg.contains("mean")),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn discrete_spec_roundtrip_and_moments() {
        // Symmetric two-point law at +/-1 with probs 1/2 is rademacher in disguise.
        let d = EntryDistribution::parse("discrete:-1,1/2;1,1/2").unwrap();
        assert!(d.moment(1).unwrap().is_zero());
        assert!(d.moment(2).unwrap().is_one());
        assert!(d.moment(4).unwrap().is_one());
    }

    #[test]
    fn bad_probability_rejected() {
        assert!(EntryDistribution::parse("discrete:-1,1/2;1,1/3").is_err());
        assert!(EntryDistribution::parse("discrete:-1,-1/2;1,3/2").is_err());
    }

    #[test]
    fn entries_are_deterministic_and_supported() {
        let a = MatrixArray::new(7, EntryDistribution::rademacher());
        assert_eq!(a.entry(3, 4), a.entry(3, 4));
        for i in 1..10 {
            for j in 1..10 {
                let v = a.entry(i, j);
                assert!(v == 1.0 || v == -1.0);
            }
        }
    }

    #[test]
    fn empirical_mean_is_small() {
        let a = MatrixArray::new(12345, EntryDistribution::standard_normal());
        let n = 100_000usize;
        let mut s = 0.0;
        for t in 0..n {
            s += a.entry(t / 300 + 1, t % 300 + 1);
        }
        let mean = s / n as f64;
        assert!(mean.abs() < 4.0 / (n as f64).sqrt(), "mean = {mean}");
    }

    #[test]
    fn nesting_holds() {
        let a = MatrixArray::new(9, EntryDistribution::standard_normal());
        let small = a.sample_matrix(3).unwrap();
        let large = a.sample_matrix(5).unwrap();
        let rescale = (5.0f64).sqrt() / (3.0f64).sqrt();
        for i in 1..=3 {
            for j in 1..=3 {
                let lhs = large.get(i, j) * rescale;
                assert!((lhs - small.get(i, j)).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn scaled_entries_at_n4() {
        let a = MatrixArray::new(1, EntryDistribution::rademacher());
        let m = a.sample_matrix(4).unwrap();
        for v in m.values() {
            assert!((v.abs() - 0.5).abs() < 1e-15);
        }
    }

    #[test]
    fn n_zero_rejected() {
        let a = MatrixArray::new(1, EntryDistribution::rademacher());
        assert!(a.sample_matrix(0).is_err());
    }
}
