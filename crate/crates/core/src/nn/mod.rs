//! Self-contained differentiable function-approximator kernel: dense and 2D
//! convolutional layers, relu, nearest upsampling, Adam, masked Huber
//! regression, finite-difference gradient verification, and binary
//! checkpoints. No external ML dependency; f32 for training, f64 for
//! verification.

pub mod checkpoint;
mod gradcheck;
#[doc(hidden)]
pub use layers::bench_hooks;
mod layers;
mod network;
mod optim;
mod scalar;
mod tensor;

pub use checkpoint::CheckpointError;
pub use gradcheck::{grad_check, grad_check_parts, max_rel_error};
pub use layers::LayerSpec;
pub use network::{ForwardCache, Network, NetworkSpec};
pub use optim::{huber, huber_grad, train_step, Adam, MaskedSample};
pub use scalar::Real;
pub use tensor::Tensor;

#[derive(Debug, thiserror::Error)]
pub enum NnError {
    #[error("shape mismatch: expected {expected:?}, found {found:?}")]
    ShapeMismatch {
        expected: Vec<usize>,
        found: Vec<usize>,
    },
    #[error("invalid network spec at layer {layer}: {detail}")]
    InvalidSpec { layer: usize, detail: String },
    #[error("diverged: non-finite gradient or target")]
    Diverged,
}
