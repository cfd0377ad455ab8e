//! Seed splitting.
//!
//! Every random choice in the crate is drawn from a ChaCha12 generator seeded
//! with the user's master seed via `seed_from_u64`, on a stream selected by a
//! 64-bit tag. Two derivations with the same `(seed, tag)` produce the same
//! sequence; different tags give independent streams. The tags used are:
//!
//! | purpose                          | tag                                   |
//! |----------------------------------|---------------------------------------|
//! | random start of restart `r`      | `INIT_BASE + r`                       |
//! | block sizes in the simulator     | `MEMBERSHIP`                          |
//! | block pair `(k, l)`, `k ≤ l`     | `BLOCK_BASE + k * K + l`              |
//! | node relabeling permutation      | `RELABEL`                             |
//! | bootstrap replicate `r`          | `REPLICATE_BASE + r` (yields a seed)  |

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;

pub type Rng = ChaCha12Rng;

pub const INIT_BASE: u64 = 0x1000_0000;
pub const MEMBERSHIP: u64 = 1;
pub const RELABEL: u64 = 2;
pub const BLOCK_BASE: u64 = 0x100;
pub const REPLICATE_BASE: u64 = 0x2000_0000;

pub fn derive(seed: u64, tag: u64) -> Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(tag);
    rng
}

/// A child master seed drawn from stream `tag` of `seed`.
pub fn derive_seed(seed: u64, tag: u64) -> u64 {
    derive(seed, tag).next_u64()
}
