//! Counter-based randomness: every draw is a pure function of (seed, index).

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finalizer.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// 64 random bits for position `n` of stream `seed`.
#[inline]
pub fn bits(seed: u64, n: u64) -> u64 {
    mix64(mix64(seed ^ 0x6A09_E667_F3BC_C909).wrapping_add(n.wrapping_mul(GOLDEN)))
}

/// Uniform in [0, 1) with 53 bits of resolution.
#[inline]
pub fn uniform(seed: u64, n: u64) -> f64 {
    (bits(seed, n) >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Bernoulli(alpha) membership of n in the sample for `seed`.
#[inline]
pub fn member(seed: u64, n: u64, alpha: f64) -> bool {
    uniform(seed, n) < alpha
}

/// The i-th child seed of `master`.
pub fn derive_seed(master: u64, i: u64) -> u64 {
    mix64(
        master
            .wrapping_add(GOLDEN)
            .wrapping_mul(0xD1B5_4A32_D192_ED03)
            ^ mix64(i.wrapping_add(1)),
    )
}

/// Child seeds 0..count of `master`.
pub fn derive_seeds(master: u64, count: usize) -> Vec<u64> {
    (0..count as u64).map(|i| derive_seed(master, i)).collect()
}
