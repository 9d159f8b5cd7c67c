//! Deterministic RNG streams.
//!
//! Every Monte Carlo phase draws from a ChaCha8 generator keyed by the master
//! seed, with the stream id built from a phase tag and a counter:
//! `stream = (phase << 40) | (replicate << 20) | index`. Two runs with the
//! same master seed therefore see identical draws in every phase regardless
//! of scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Phase {
    Mcmle = 1,
    Moments = 2,
    PathSampling = 3,
    Chib = 4,
    PowerPosterior = 5,
    Tuning = 6,
    Data = 7,
    Posterior = 8,
}

pub fn stream(master: u64, phase: Phase, replicate: u64, index: u64) -> Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(((phase as u64) << 40) | ((replicate & 0xF_FFFF) << 20) | (index & 0xF_FFFF));
    rng
}
