//! Deterministic substream derivation.
//!
//! All randomness in the crate flows from a single 64-bit seed through named
//! substreams. A substream is addressed by a domain tag plus indices (trial,
//! run, ...), so batches can be split across workers while every worker
//! derives exactly the same per-run stream.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Domain separation tags for the substreams used by the crate.
pub mod tag {
    pub const INSTANCE: u64 = 0x01;
    pub const GOOD_RUN: u64 = 0x02;
    pub const BAD_RUN: u64 = 0x03;
    pub const SHUFFLE: u64 = 0x04;
    pub const TRIAL: u64 = 0x05;
    pub const FACTOR_BASES: u64 = 0x06;
    pub const TASK: u64 = 0x07;
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives a ChaCha stream from `seed` and a list of tags/indices.
///
/// The derivation is a SplitMix64 chain over the tag list, expanded to a
/// 32-byte ChaCha key. Identical `(seed, tags)` always yield identical
/// streams, independent of call order or worker count.
pub fn substream(seed: u64, tags: &[u64]) -> ChaCha8Rng {
    let mut state = seed ^ 0xD6E8_FEB8_6659_FD93;
    let mut acc = splitmix64(&mut state);
    for &t in tags {
        state ^= t.wrapping_mul(0x9E37_79B9_7F4A_7C15);
        acc ^= splitmix64(&mut state);
    }
    state ^= acc;
    let mut key = [0u8; 32];
    for chunk in key.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::RngCore;

    #[test]
    fn substreams_are_deterministic() {
        let mut a = substream(7, &[tag::GOOD_RUN, 3, 9]);
        let mut b = substream(7, &[tag::GOOD_RUN, 3, 9]);
        for _ in 0..16 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
    }

    #[test]
    fn substreams_differ_by_tag_and_index() {
        let mut base = substream(7, &[tag::GOOD_RUN, 3, 9]);
        let mut other_idx = substream(7, &[tag::GOOD_RUN, 3, 10]);
        let mut other_tag = substream(7, &[tag::BAD_RUN, 3, 9]);
        let x = base.next_u64();
        assert_ne!(x, other_idx.next_u64());
        assert_ne!(x, other_tag.next_u64());
    }

    #[test]
    fn tag_order_matters() {
        let mut a = substream(1, &[2, 3]);
        let mut b = substream(1, &[3, 2]);
        assert_ne!(a.next_u64(), b.next_u64());
    }
}
