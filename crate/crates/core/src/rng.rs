//! Named random substreams.
//!
//! Every consumer of randomness draws from its own ChaCha8 stream, seeded
//! from `(master seed, replica index, purpose)` through the SplitMix64
//! finaliser:
//!
//! ```text
//! seed = mix(mix(master ^ 0x9E3779B97F4A7C15) ^ replica.rotl(17) ^ purpose_tag)
//! mix(z) = z ^= z >> 30; z *= 0xBF58476D1CE4E5B9;
//!          z ^= z >> 27; z *= 0x94D049BB133111EB; z ^ (z >> 31)
//! ```
//!
//! Streams for different purposes never share state, so two simulations
//! that consume the same purposes in the same order see identical draws.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Purpose {
    Init,
    Arrival,
    Particle,
    Partner,
    AngleZ,
    ThinningU,
    RealShock,
    Mollify,
    Bootstrap,
    Synthetic,
}

impl Purpose {
    /// Fixed 64-bit tag; part of the reproducibility contract.
    pub const fn tag(self) -> u64 {
        match self {
            Purpose::Init => 0x1001,
            Purpose::Arrival => 0x2002,
            Purpose::Particle => 0x3003,
            Purpose::Partner => 0x4004,
            Purpose::AngleZ => 0x5005,
            Purpose::ThinningU => 0x6006,
            Purpose::RealShock => 0x7007,
            Purpose::Mollify => 0x8008,
            Purpose::Bootstrap => 0x9009,
            Purpose::Synthetic => 0xA00A,
        }
    }
}

#[inline]
pub fn splitmix64(mut z: u64) -> u64 {
    z ^= z >> 30;
    z = z.wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z ^= z >> 27;
    z = z.wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn substream_seed(master: u64, replica: u64, purpose: Purpose) -> u64 {
    let base = splitmix64(master ^ 0x9E37_79B9_7F4A_7C15);
    splitmix64(base ^ replica.rotate_left(17) ^ purpose.tag())
}

pub fn substream(master: u64, replica: u64, purpose: Purpose) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(substream_seed(master, replica, purpose))
}

/// Where an ensemble's randomness comes from, and how much of it has been
/// consumed by the event loop.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedLineage {
    pub master_seed: u64,
    pub replica: u64,
    pub events: u64,
}

impl SeedLineage {
    pub fn new(master_seed: u64, replica: u64) -> Self {
        SeedLineage {
            master_seed,
            replica,
            events: 0,
        }
    }

    pub fn stream(&self, purpose: Purpose) -> ChaCha8Rng {
        substream(self.master_seed, self.replica, purpose)
    }
}
