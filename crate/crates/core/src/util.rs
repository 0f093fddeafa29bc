//! Small numeric helpers.

/// Kahan compensated accumulator, used on index-sum paths where N^k terms
/// of mixed sign are added.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct Kahan {
    sum: f64,
    comp: f64,
}

impl Kahan {
    pub fn add(&mut self, x: f64) {
        let y = x - self.comp;
        let t = self.sum + y;
        self.comp = (t - self.sum) - y;
        self.sum = t;
    }

    pub fn total(&self) -> f64 {
        self.sum
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kahan_beats_naive_on_small_terms() {
        let mut k = Kahan::default();
        k.add(1.0);
        for _ in 0..10_000_000 {
            k.add(1e-16);
        }
        let expected = 1.0 + 1e-16 * 1e7;
        assert!((k.total() - expected).abs() < 1e-12);
    }
}
