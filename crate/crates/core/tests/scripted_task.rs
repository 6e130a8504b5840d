//! The full task solved by scripted controllers: push the object to a wall,
//! flip it upright, grasp it from the top. Three primitives, no learning.
//! This pins down that the simulator affords the intended solution before
//! any agent is asked to find it.

use flipgrasp::agents::{mlp_spec, LowAgent, LowAgentConfig, LowLevelAction};
use flipgrasp::nn::Network;
use flipgrasp::perception::StartPose;
use flipgrasp::primitives::{
    exec_flip_learned, exec_grasp, exec_push, high_reward, OutcomeResult, PrimitiveCtx,
};
use flipgrasp::rng::{rng_for, stream};
use flipgrasp::sim::test_support::flat_box_at;
use flipgrasp::sim::{check_grasp_success, PhysicsParams, Simulator, WALL_SIDE};

/// Zeroed net biased toward press-and-rise: a deterministic scripted flip
/// policy expressed through the agent interface.
fn scripted_low_agent() -> LowAgent {
    let mut agent = LowAgent::new(LowAgentConfig::default(), 0);
    agent.net = Network::zeroed(mlp_spec()).unwrap();
    let diag = LowLevelAction::encode(true, true, 0).0;
    let n = agent.net.params().len();
    agent.net.params_mut()[n - 1][1].data_mut()[diag] = 1.0;
    agent
}

#[test]
fn push_flip_grasp_completes_in_three_primitives() {
    let ctx = PrimitiveCtx::default();
    // Box 6 cm from the east wall, long axis along the wall.
    let half_w = 0.091 / 2.0;
    let x0 = WALL_SIDE - 0.06 - half_w;
    let state = flat_box_at(x0, 0.224, std::f64::consts::FRAC_PI_2);
    let mut sim = Simulator::new(PhysicsParams::default(), state);
    let mut rewards = Vec::new();

    // 1: push east into the wall.
    let push = exec_push(
        &mut sim,
        &StartPose {
            x: x0 - half_w - 0.012,
            y: 0.224,
            z: 0.02,
            yaw: 0.0,
        },
        &ctx,
    );
    assert_eq!(push.result, OutcomeResult::AtWall);
    rewards.push(high_reward(push.result, &ctx.reward));

    // 2: flip against the wall.
    let agent = scripted_low_agent();
    let mut rng = rng_for(0, stream::LOW_POLICY, 0);
    let obj = sim.state.object;
    let flip = exec_flip_learned(
        &mut sim,
        &StartPose {
            x: obj.pose.x - obj.footprint().extent_along(flipgrasp::sim::Vec2::new(1.0, 0.0)) / 2.0
                - 0.004,
            y: obj.pose.y,
            z: 0.02,
            yaw: 0.0,
        },
        &agent,
        0.0,
        &mut rng,
        &ctx,
    );
    assert_eq!(flip.result, OutcomeResult::FlipSuccess);
    rewards.push(high_reward(flip.result, &ctx.reward));

    // 3: grasp the standing box across its narrow face.
    let obj = sim.state.object;
    let grasp = exec_grasp(
        &mut sim,
        &StartPose {
            x: obj.pose.x,
            y: obj.pose.y,
            z: obj.dims.height,
            yaw: 0.0,
        },
        &ctx,
    );
    assert_eq!(grasp.result, OutcomeResult::GraspSuccess);
    rewards.push(high_reward(grasp.result, &ctx.reward));

    assert!(check_grasp_success(
        &sim.state,
        &ctx.check,
        sim.params.ee_finger_len
    ));
    assert_eq!(rewards, vec![0.2, 1.0, 1.0]);
}
