//! Deterministic seed derivation.
//!
//! Every random stream in the crate is keyed by a base seed plus a short path
//! of integers (job index, circuit role, term index, ...). Sub-seeds are
//! produced by folding the path through SplitMix64, so adding a new consumer
//! never shifts the samples drawn by existing ones.

/// One SplitMix64 finalization round.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// `derive_seed(s, [a, b])` = `mix(mix(mix(s) ^ mix(a)) ^ mix(b))`.
pub fn derive_seed(base: u64, path: &[u64]) -> u64 {
    path.iter()
        .fold(splitmix64(base), |h, &p| splitmix64(h ^ splitmix64(p)))
}
