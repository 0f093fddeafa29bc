//! Counter-based pseudo-random generation.
//!
//! Every variate is a pure function of (seed, i, j, counter), so the
//! infinite entry array is stateless: nested blocks across N and parallel
//! replications read the same values without any stream bookkeeping.

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 output function (Steele, Lea, Flood 2014).
fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Raw 64-bit word for matrix position (i, j) at the given counter.
pub(crate) fn word_at(seed: u64, i: u64, j: u64, counter: u64) -> u64 {
    let mut z = mix(seed ^ GOLDEN_GAMMA);
    z = mix(z ^ i.wrapping_mul(GOLDEN_GAMMA));
    z = mix(z ^ j.wrapping_mul(GOLDEN_GAMMA));
    mix(z ^ counter.wrapping_mul(GOLDEN_GAMMA))
}

/// Uniform variate in the open interval (0, 1), 53-bit resolution.
pub(crate) fn uniform_at(seed: u64, i: u64, j: u64, counter: u64) -> f64 {
    ((word_at(seed, i, j, counter) >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
}

/// Derive an independent child seed for a replication index.
///
/// Published tables are replayable from (master seed, replication index)
/// alone; this is the documented derivation.
pub fn child_seed(master: u64, replication: u64) -> u64 {
    mix(mix(master ^ GOLDEN_GAMMA) ^ replication.wrapping_mul(GOLDEN_GAMMA))
}
