//! Counter-based random streams.
//!
//! Every ensemble member draws from its own ChaCha stream keyed by
//! `(seed, member index)`, so results do not depend on how members are
//! scheduled across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn member_rng(seed: u64, member: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(member);
    rng
}
