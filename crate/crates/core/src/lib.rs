//! Desk-scale occluded-grasping stack.
//!
//! A flat box on a walled table top cannot be grasped from above: the gripper
//! does not open wide enough. The way out is extrinsic dexterity — push the
//! box to a wall, pivot it upright against the wall, then grasp the now
//! narrow face from the top.
//!
//! This crate contains everything needed to learn that behavior end to end in
//! simulation:
//!
//! - [`sim`]: deterministic 2.5D quasi-static physics of a box in a walled
//!   workspace, manipulated by a two-finger end effector.
//! - [`perception`]: orthographic height maps, observation noise, the
//!   K-rotation stack, pixel-to-pose mapping, and primitive admissibility
//!   masks.
//! - [`nn`]: the minimal differentiable kernel (conv/dense/relu/upsample,
//!   Adam, Huber, gradient checking, checkpoints).
//! - [`agents`]: the high-level pixel-Q-map primitive selector and the
//!   low-level flip controller, with replay buffers and target networks.
//! - [`primitives`]: executable push / grasp / flip behaviors, the manually
//!   designed flip baseline, and both reward functions.
//! - [`training`]: curriculum stages, domain randomization, the episode loop,
//!   and the evaluation harness.

pub mod agents;
pub mod config;
pub mod io;
pub mod nn;
pub mod perception;
pub mod primitives;
pub mod rng;
pub mod sim;
pub mod training;
