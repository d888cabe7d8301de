//! Counter-based seed splitting.
//!
//! Every randomized unit (agent init, an episode, an evaluation lap) gets its
//! own ChaCha stream addressed by `(purpose, index)`, so results never depend
//! on scheduling or on how many units ran before it.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Purpose {
    AgentInit = 1,
    Exploration = 2,
    Learning = 3,
    TrainEpisode = 4,
    EvalEpisode = 5,
}

/// Independent stream `index` of purpose `purpose` under `seed`.
pub fn stream_rng(seed: u64, purpose: Purpose, index: u64) -> ChaCha8Rng {
    assert!(index < 1 << 56, "stream index overflow");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((purpose as u64) << 56) | index);
    rng
}
