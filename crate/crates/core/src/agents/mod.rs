//! The two DQN agents: a pixel-Q-map primitive selector over the rotated
//! observation stack, and a 12-action flip controller over the
//! pose-invariant low-level state. Both use replay buffers, hard target
//! copies, and epsilon-greedy policies.

mod actions;
mod high;
mod low;
mod replay;

pub use actions::{HighLevelAction, LowActionParams, LowLevelAction, Primitive};
pub use high::{
    fcn_spec, select_high_action, td_target_high, AgentError, HighAgent, HighAgentConfig,
    HighReplayEntry, HighTransition, QMapSet,
};
pub use low::{
    mlp_spec, project_low_state, td_target_low, update_target, LowAgent, LowAgentConfig,
    LowState, LowTransition,
};
pub use replay::ReplayBuffer;
