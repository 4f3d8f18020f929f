//! Seed derivation for reproducible, independent random streams.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The generator every randomized routine in this crate is driven by.
pub type StreamRng = ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mixes a master seed with a path of stream coordinates into a child seed.
///
/// Distinct paths give unrelated seeds, so consumers keyed by different
/// coordinates never share random draws.
pub fn derive_seed(master: u64, path: &[u64]) -> u64 {
    path.iter()
        .fold(splitmix64(master), |acc, &part| splitmix64(acc ^ splitmix64(part)))
}

pub fn stream(master: u64, path: &[u64]) -> StreamRng {
    StreamRng::seed_from_u64(derive_seed(master, path))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn streams_are_reproducible() {
        let a: Vec<u32> = stream(7, &[1, 2]).random_iter().take(4).collect();
        let b: Vec<u32> = stream(7, &[1, 2]).random_iter().take(4).collect();
        assert_eq!(a, b);
    }

    #[test]
    fn path_order_matters() {
        assert_ne!(derive_seed(7, &[1, 2]), derive_seed(7, &[2, 1]));
        assert_ne!(derive_seed(7, &[]), derive_seed(7, &[0]));
        assert_ne!(derive_seed(7, &[0]), derive_seed(8, &[0]));
    }
}
