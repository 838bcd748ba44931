//! Seed derivation for reproducible, scheduling-independent randomness.

/// SplitMix64 finaliser.
#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives the seed of child stream `index` from `master`.
///
/// Stable across platforms and releases; used for per-covariate tie seeds and
/// per-replication seeds.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    mix64(
        mix64(master ^ 0x9e37_79b9_7f4a_7c15)
            .wrapping_add(index.wrapping_mul(0xd1b5_4a32_d192_ed03)),
    )
}
