//! Counter-based random streams.
//!
//! Every random draw in the crate is addressed by `(master seed, domain, index)`.
//! The ChaCha8 key comes from the master seed, the stream id from the domain and
//! the word position from the index, so round `i` of a run sees the same bits
//! no matter how rounds are scheduled across workers.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Words reserved per index; no consumer in this crate draws more than a few.
const WORDS_PER_INDEX: u128 = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Domain {
    Source = 1,
    Device = 2,
    Seed = 3,
    Optimizer = 4,
    Trial = 5,
    Family = 6,
}

#[derive(Debug, Clone)]
pub struct Streams {
    base: ChaCha8Rng,
}

impl Streams {
    pub fn new(master_seed: u64) -> Self {
        Self {
            base: ChaCha8Rng::seed_from_u64(master_seed),
        }
    }

    /// Generator positioned at the start of block `index` of `domain`.
    pub fn at(&self, domain: Domain, index: u64) -> ChaCha8Rng {
        let mut rng = self.base.clone();
        rng.set_stream(domain as u64);
        rng.set_word_pos(index as u128 * WORDS_PER_INDEX);
        rng
    }

    /// Independent child family, e.g. one per Monte-Carlo trial.
    pub fn child(&self, domain: Domain, index: u64) -> Streams {
        let mut rng = self.at(domain, index);
        let mut key = [0u8; 32];
        rng.fill_bytes(&mut key);
        Streams {
            base: ChaCha8Rng::from_seed(key),
        }
    }
}
