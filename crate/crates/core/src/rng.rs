//! Seeded, splittable random streams.
//!
//! The generator is ChaCha8 from `rand_chacha` 0.9.0 (pinned exactly), keyed
//! with `seed_from_u64(seed)`. Substreams share the key and select a
//! different 64-bit ChaCha stream id, so they never overlap. Conversion to
//! floats and bounded integers is done here rather than through `rand`'s
//! distributions, so draws depend only on the ChaCha keystream.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use rayon::prelude::*;

/// Identifies the generator in report metadata.
pub const ALGORITHM: &str =
    "chacha8 (rand_chacha 0.9.0, seed_from_u64, splitmix64 stream ids, 53-bit floats, Lemire bounded ints)";

/// Number of Monte Carlo trials per substream in [`parallel_count`].
pub const MC_CHUNK: u64 = 1 << 16;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// A deterministic stream of random draws. Single owner; use
/// [`RandomStream::substream`] to hand independent streams to workers.
#[derive(Debug)]
pub struct RandomStream {
    seed: u64,
    stream: u64,
    rng: ChaCha8Rng,
}

impl RandomStream {
    pub fn new(seed: u64) -> Self {
        Self::with_stream(seed, 0)
    }

    fn with_stream(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self { seed, stream, rng }
    }

    /// The `index`-th child stream. Depends only on the seed, this stream's
    /// position in the tree and `index`, never on how much has been drawn.
    pub fn substream(&self, index: u64) -> RandomStream {
        let id = splitmix64(self.stream ^ splitmix64(index.wrapping_add(1)));
        Self::with_stream(self.seed, id)
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    /// Uniform on `[0, 1)` with 53 random bits.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform on `{0, .., bound - 1}` without modulo bias.
    ///
    /// # Panics
    /// If `bound == 0`.
    pub fn below(&mut self, bound: u64) -> u64 {
        assert!(bound > 0, "empty range");
        let mut m = self.next_u64() as u128 * bound as u128;
        if (m as u64) < bound {
            let threshold = bound.wrapping_neg() % bound;
            while (m as u64) < threshold {
                m = self.next_u64() as u128 * bound as u128;
            }
        }
        (m >> 64) as u64
    }
}

/// Runs `trials` independent Bernoulli trials and counts successes.
///
/// Trials are grouped in chunks of [`MC_CHUNK`]; chunk `i` draws from
/// `rng.substream(i)`. The count is therefore the same for any number of
/// threads.
pub fn parallel_count<F>(trials: u64, rng: &RandomStream, trial: F) -> u64
where
    F: Fn(&mut RandomStream) -> bool + Sync,
{
    let chunks = trials.div_ceil(MC_CHUNK);
    (0..chunks)
        .into_par_iter()
        .map(|i| {
            let mut stream = rng.substream(i);
            let len = MC_CHUNK.min(trials - i * MC_CHUNK);
            (0..len).filter(|_| trial(&mut stream)).count() as u64
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_draws() {
        let mut a = RandomStream::new(99);
        let mut b = RandomStream::new(99);
        for _ in 0..100 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
    }

    #[test]
    fn substreams_differ_and_ignore_parent_position() {
        let mut parent = RandomStream::new(1);
        let before = parent.substream(3).next_u64();
        parent.next_u64();
        let after = parent.substream(3).next_u64();
        assert_eq!(before, after);
        assert_ne!(
            parent.substream(3).next_u64(),
            parent.substream(4).next_u64()
        );
        assert_ne!(
            RandomStream::new(1).next_u64(),
            parent.substream(0).next_u64()
        );
    }

    #[test]
    fn below_stays_in_range() {
        let mut r = RandomStream::new(3);
        for bound in [1u64, 2, 3, 7, 1000, u64::MAX] {
            for _ in 0..200 {
                assert!(r.below(bound) < bound);
            }
        }
    }

    #[test]
    fn floats_in_unit_interval() {
        let mut r = RandomStream::new(4);
        for _ in 0..10_000 {
            let x = r.next_f64();
            assert!((0.0..1.0).contains(&x));
        }
    }

    #[test]
    fn parallel_count_is_partition_invariant() {
        let rng = RandomStream::new(11);
        let trials = 3 * MC_CHUNK + 17;
        let par = parallel_count(trials, &rng, |r| r.next_f64() < 0.3);
        let serial: u64 = (0..trials.div_ceil(MC_CHUNK))
            .map(|i| {
                let mut s = rng.substream(i);
                let len = MC_CHUNK.min(trials - i * MC_CHUNK);
                (0..len).filter(|_| s.next_f64() < 0.3).count() as u64
            })
            .sum();
        assert_eq!(par, serial);
    }
}
