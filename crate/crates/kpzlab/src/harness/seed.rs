//! Deterministic seeding.
//!
//! Every random stream in the crate is a [`Rng64`] (xoshiro256++), seeded from
//! a 64-bit value through SplitMix64 as `rand_xoshiro` documents for
//! `seed_from_u64`. Replica `i` of a run with master seed `s` uses
//!
//! ```text
//! seed_i = mix(s + (i + 1) * 0x9E3779B97F4A7C15)      (wrapping u64 arithmetic)
//! mix(z):  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
//!          z = (z ^ (z >> 27)) * 0x94D049BB133111EB
//!          z ^ (z >> 31)
//! ```
//!
//! which is the `i`-th output of a SplitMix64 stream started at `s`. The
//! increment is odd and `mix` is a bijection of `u64`, so `i -> seed_i` is
//! injective for a fixed master seed.

use rand::SeedableRng;
use rayon::prelude::*;

/// The crate-wide 64-bit generator. Its state serializes with serde.
pub type Rng64 = rand_xoshiro::Xoshiro256PlusPlus;

/// SplitMix64 stream increment (the 64-bit golden ratio).
pub const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// The SplitMix64 output finalizer. A bijection of `u64`.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of replica `replica_index` under `master_seed`.
#[inline]
pub fn derive_replica_seed(master_seed: u64, replica_index: u64) -> u64 {
    mix64(master_seed.wrapping_add(replica_index.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA)))
}

/// A generator seeded from a 64-bit value.
pub fn rng_from_seed(seed: u64) -> Rng64 {
    Rng64::seed_from_u64(seed)
}

/// Runs `job(replica_index, rng)` for every replica and returns the results
/// in replica order. The output does not depend on `workers`.
pub fn run_replicas<T, F>(master_seed: u64, replicas: usize, workers: usize, job: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize, &mut Rng64) -> T + Sync + Send,
{
    let one = |i: usize| {
        let mut rng = rng_from_seed(derive_replica_seed(master_seed, i as u64));
        job(i, &mut rng)
    };
    if workers <= 1 {
        return (0..replicas).map(one).collect();
    }
    match rayon::ThreadPoolBuilder::new().num_threads(workers).build() {
        Ok(pool) => pool.install(|| (0..replicas).into_par_iter().map(one).collect()),
        Err(_) => (0..replicas).map(one).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn replica_seeds_match_splitmix_stream() {
        let mut state = 12345u64;
        for i in 0..10 {
            state = state.wrapping_add(GOLDEN_GAMMA);
            assert_eq!(derive_replica_seed(12345, i), mix64(state));
        }
    }

    #[test]
    fn run_replicas_is_worker_independent() {
        let f = |i: usize, rng: &mut Rng64| (i, rng.random::<u64>());
        let a = run_replicas(7, 50, 1, f);
        let b = run_replicas(7, 50, 4, f);
        assert_eq!(a, b);
        assert!(a.iter().enumerate().all(|(i, (j, _))| i == *j));
    }

    #[test]
    fn master_zero_is_allowed() {
        assert_ne!(derive_replica_seed(0, 0), derive_replica_seed(0, 1));
    }
}
