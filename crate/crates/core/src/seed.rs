//! Seed derivation shared by every randomized stage.
//!
//! All randomness flows from one master seed. Sub-streams are keyed by a
//! stable 64-bit FNV-1a hash of a string tag, so the derivation does not
//! depend on the standard library's randomized hasher or on platform.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

/// FNV-1a over the UTF-8 bytes of `s`.
pub fn stable_hash(s: &str) -> u64 {
    s.as_bytes()
        .iter()
        .fold(FNV_OFFSET, |h, &b| (h ^ u64::from(b)).wrapping_mul(FNV_PRIME))
}

/// `master ⊕ stable_hash(tag)`.
pub fn sub_seed(master: u64, tag: &str) -> u64 {
    master ^ stable_hash(tag)
}

pub fn rng_for(master: u64, tag: &str) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(sub_seed(master, tag))
}
