//! Counter-based substream derivation.
//!
//! Every random quantity in the crate is drawn from a stream addressed by
//! (master seed, domain, path of indices). Streams for distinct addresses are
//! statistically independent ChaCha streams, so results do not depend on
//! thread count or evaluation order, and growing a population or adding
//! trials never perturbs existing draws.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Draw domains. Each gets its own branch of the substream tree.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Domain {
    /// Large-scale user quantities: distance, shadowing, power. Path: [user].
    Profile,
    /// Fast fading per Monte-Carlo trial. Path: [trial, user].
    Channel,
    /// Independent repetitions inside a diagnostic sweep. Path: [point, draw].
    Diagnostic,
}

impl Domain {
    fn tag(self) -> u64 {
        match self {
            Domain::Profile => 0x50524f46,
            Domain::Channel => 0x4348414e,
            Domain::Diagnostic => 0x44494147,
        }
    }
}

/// splitmix64 finalizer: the mixing step of the address hash.
fn mix(h: u64) -> u64 {
    let mut z = h.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn address_hash(master_seed: u64, domain: Domain, path: &[u64]) -> u64 {
    let mut h = mix(master_seed ^ 0x6d6d_6163_0000_0001);
    h = mix(h ^ domain.tag());
    for &p in path {
        h = mix(h ^ p);
    }
    h
}

/// The RNG for one substream address.
pub fn substream(master_seed: u64, domain: Domain, path: &[u64]) -> ChaCha8Rng {
    let mut seed = [0u8; 32];
    let mut s = address_hash(master_seed, domain, path);
    for chunk in seed.chunks_exact_mut(8) {
        s = mix(s);
        chunk.copy_from_slice(&s.to_le_bytes());
    }
    ChaCha8Rng::from_seed(seed)
}

/// A derived master seed for a child address, for code that resamples whole
/// populations: the child seed opens an independent substream tree.
pub fn derive_seed(master_seed: u64, domain: Domain, path: &[u64]) -> u64 {
    address_hash(master_seed, domain, path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn first(master: u64, domain: Domain, path: &[u64]) -> u64 {
        substream(master, domain, path).random()
    }

    #[test]
    fn same_address_gives_identical_streams() {
        let a: Vec<u64> = (0..8).map(|_| 0).scan(substream(7, Domain::Profile, &[3]), |r, _| Some(r.random())).collect();
        let b: Vec<u64> = (0..8).map(|_| 0).scan(substream(7, Domain::Profile, &[3]), |r, _| Some(r.random())).collect();
        assert_eq!(a, b);
    }

    #[test]
    fn distinct_addresses_give_distinct_streams() {
        let base = first(7, Domain::Profile, &[3]);
        assert_ne!(base, first(8, Domain::Profile, &[3]));
        assert_ne!(base, first(7, Domain::Channel, &[3]));
        assert_ne!(base, first(7, Domain::Profile, &[4]));
        assert_ne!(base, first(7, Domain::Profile, &[3, 0]));
        assert_ne!(base, first(7, Domain::Profile, &[]));
    }

    #[test]
    fn path_extension_does_not_alias_zero_index() {
        // [..., 0] must differ from its parent: mix(h ^ 0) = mix(h) ≠ h.
        assert_ne!(
            first(1, Domain::Channel, &[5]),
            first(1, Domain::Channel, &[5, 0])
        );
    }

    #[test]
    fn derived_seeds_follow_the_same_address_tree() {
        assert_eq!(
            derive_seed(7, Domain::Diagnostic, &[2, 9]),
            derive_seed(7, Domain::Diagnostic, &[2, 9])
        );
        assert_ne!(
            derive_seed(7, Domain::Diagnostic, &[2, 9]),
            derive_seed(7, Domain::Diagnostic, &[2, 10])
        );
        // The derived seed is the parent address, not the stream itself:
        // opening a tree under it must not replay the parent stream.
        let child = derive_seed(7, Domain::Profile, &[0]);
        assert_ne!(first(child, Domain::Profile, &[0]), first(7, Domain::Profile, &[0, 0]));
    }

    #[test]
    fn substream_outputs_are_roughly_uniform() {
        // Cheap sanity check on the hash: bit balance over many addresses.
        let mut ones = 0u32;
        for k in 0..256u64 {
            ones += first(99, Domain::Profile, &[k]).count_ones();
        }
        let mean = f64::from(ones) / 256.0;
        assert!((mean - 32.0).abs() < 2.0, "mean popcount {mean}");
    }
}
