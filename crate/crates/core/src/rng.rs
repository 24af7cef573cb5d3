//! Deterministic, splittable random streams.
//!
//! xoshiro256++ generators seeded through SplitMix64. A root seed and a
//! batch index map to an independent child stream by pure arithmetic, so
//! any worker layout draws exactly the same numbers: results cannot
//! depend on thread count or scheduling.

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(GOLDEN);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Clone, Debug)]
pub struct RandomStream {
    s: [u64; 4],
}

impl RandomStream {
    pub fn from_seed(seed: u64) -> Self {
        let mut sm = seed;
        let mut s = [0_u64; 4];
        for word in &mut s {
            *word = splitmix64(&mut sm);
        }
        if s == [0, 0, 0, 0] {
            s[0] = GOLDEN; // xoshiro state must not be all-zero
        }
        RandomStream { s }
    }

    /// Child stream `index` of a root seed. The mapping is pure, so batch
    /// `index` sees the same stream no matter which worker runs it.
    pub fn child(root_seed: u64, index: u64) -> Self {
        let mixed = root_seed ^ index.wrapping_add(1).wrapping_mul(GOLDEN);
        Self::from_seed(mixed)
    }

    pub fn next_u64(&mut self) -> u64 {
        let result = self.s[0]
            .wrapping_add(self.s[3])
            .rotate_left(23)
            .wrapping_add(self.s[0]);
        let t = self.s[1] << 17;
        self.s[2] ^= self.s[0];
        self.s[3] ^= self.s[1];
        self.s[1] ^= self.s[2];
        self.s[0] ^= self.s[3];
        self.s[2] ^= t;
        self.s[3] = self.s[3].rotate_left(45);
        result
    }

    /// Uniform on [0, 1), 53-bit resolution.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform on [lo, hi).
    pub fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    /// Uniform on [-1, 1) (direction cosine of an isotropic emission).
    pub fn symmetric_unit(&mut self) -> f64 {
        2.0 * self.uniform() - 1.0
    }

    /// Standard exponential via inversion.
    pub fn exponential(&mut self) -> f64 {
        -(1.0 - self.uniform()).ln()
    }

    /// Poisson draw by Knuth's product method, with mean-halving so the
    /// inner product never underflows (Poisson(a+b) = Poisson(a)+Poisson(b)).
    pub fn poisson(&mut self, mean: f64) -> u64 {
        assert!(mean >= 0.0 && mean.is_finite(), "poisson mean {mean}");
        let mut total = 0_u64;
        let mut remaining = mean;
        while remaining > 30.0 {
            total += self.poisson_knuth(30.0);
            remaining -= 30.0;
        }
        total + self.poisson_knuth(remaining)
    }

    fn poisson_knuth(&mut self, mean: f64) -> u64 {
        if mean == 0.0 {
            return 0;
        }
        let limit = (-mean).exp();
        let mut k = 0_u64;
        let mut p = 1.0;
        loop {
            p *= self.uniform();
            if p <= limit {
                return k;
            }
            k += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_reproducible() {
        let mut a = RandomStream::from_seed(42);
        let mut b = RandomStream::from_seed(42);
        for _ in 0..100 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
    }

    #[test]
    fn children_differ_from_each_other_and_root() {
        let mut root = RandomStream::from_seed(7);
        let mut c0 = RandomStream::child(7, 0);
        let mut c1 = RandomStream::child(7, 1);
        let (r, a, b) = (root.next_u64(), c0.next_u64(), c1.next_u64());
        assert_ne!(a, b);
        assert_ne!(r, a);
    }

    #[test]
    fn uniform_moments() {
        let mut s = RandomStream::from_seed(123);
        let n = 200_000;
        let mut sum = 0.0;
        let mut sum2 = 0.0;
        for _ in 0..n {
            let u = s.uniform();
            assert!((0.0..1.0).contains(&u));
            sum += u;
            sum2 += u * u;
        }
        let mean = sum / n as f64;
        let var = sum2 / n as f64 - mean * mean;
        assert!((mean - 0.5).abs() < 0.005);
        assert!((var - 1.0 / 12.0).abs() < 0.005);
    }

    #[test]
    fn poisson_mean_and_halving() {
        let mut s = RandomStream::from_seed(99);
        for &mu in &[0.0, 0.5, 4.0, 75.0] {
            let n = 20_000;
            let total: u64 = (0..n).map(|_| s.poisson(mu)).sum();
            let mean = total as f64 / n as f64;
            let se = (mu / n as f64).sqrt().max(1e-12);
            assert!(
                (mean - mu).abs() <= 4.0 * se + 1e-12,
                "mu={mu} mean={mean}"
            );
        }
    }

    #[test]
    fn exponential_mean() {
        let mut s = RandomStream::from_seed(5);
        let n = 100_000;
        let sum: f64 = (0..n).map(|_| s.exponential()).sum();
        assert!((sum / n as f64 - 1.0).abs() < 0.02);
    }
}
