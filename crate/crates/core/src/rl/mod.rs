//! Networks, TD3 and the training-side data structures.

pub mod adam;
pub mod checkpoint;
pub mod mlp;
pub mod replay;
pub mod reward;
pub mod td3;

pub use adam::Adam;
pub use checkpoint::Checkpoint;
pub use mlp::{Activation, ForwardCache, Mlp};
pub use replay::{Batch, ReplayBuffer, Transition};
pub use reward::{compute_reward, RewardConfig};
pub use td3::{select_action, Td3Agent, Td3Config, UpdateLosses};
