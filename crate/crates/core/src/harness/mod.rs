//! Training runs, evaluations, mismatch sweeps and result export.

pub mod assets;
pub mod config;
pub mod eval;
pub mod events;
pub mod export;
pub mod seeds;
pub mod sweep;
pub mod train;

pub use config::{EvalSpec, RunConfig};
pub use eval::{evaluate, evaluate_episode, Aggregates, EpisodeRecord, EvalReport};
pub use export::{Format, Results};
pub use sweep::{run_sweep, SweepKind, SweepResults, SweepRow, SweepSpec};
pub use train::{crash_free_fraction, train, EpisodeLog, TrainOutcome};
