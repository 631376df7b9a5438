//! Seeded random sources.
//!
//! Every random draw in the crate goes through a `ChaCha8Rng` built here, so
//! a conversation is a pure function of its seed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

/// Independent streams derived from one conversation seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    Agents = 1,
    Policy = 2,
    Metrics = 3,
}

pub fn seeded(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn stream(seed: u64, stream: Stream) -> SimRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream as u64);
    rng
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Stable seed mixing: the same parts always give the same seed, on every
/// platform and toolchain.
pub fn mix_seed(parts: &[u64]) -> u64 {
    parts
        .iter()
        .fold(0x243F_6A88_85A3_08D3, |acc, &p| splitmix64(acc ^ splitmix64(p)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a: u64 = stream(7, Stream::Agents).random();
        let b: u64 = stream(7, Stream::Agents).random();
        let c: u64 = stream(7, Stream::Policy).random();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn mix_seed_depends_on_order() {
        assert_eq!(mix_seed(&[1, 2, 3]), mix_seed(&[1, 2, 3]));
        assert_ne!(mix_seed(&[1, 2, 3]), mix_seed(&[3, 2, 1]));
        assert_ne!(mix_seed(&[0]), mix_seed(&[0, 0]));
    }
}
