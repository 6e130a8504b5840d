//! Metamorphic property: the low-level state trace depends only on the
//! scene relative to the start pose, not on where in the workspace the
//! primitive begins.

use flipgrasp::agents::{mlp_spec, LowAgent, LowAgentConfig, LowLevelAction};
use flipgrasp::nn::Network;
use flipgrasp::perception::StartPose;
use flipgrasp::primitives::{exec_flip_learned, PrimitiveCtx};
use flipgrasp::rng::{rng_for, stream};
use flipgrasp::sim::test_support::wall_flush_box;
use flipgrasp::sim::{PhysicsParams, Simulator, WallId};

fn scripted_agent() -> LowAgent {
    let mut agent = LowAgent::new(LowAgentConfig::default(), 0);
    agent.net = Network::zeroed(mlp_spec()).unwrap();
    let diag = LowLevelAction::encode(true, true, 0).0;
    let n = agent.net.params().len();
    agent.net.params_mut()[n - 1][1].data_mut()[diag] = 1.0;
    agent
}

#[test]
fn identical_relative_scenes_produce_identical_low_state_traces() {
    // The same box flush against two different walls, started from the
    // analogous pose: the action sequence is identical (greedy scripted
    // policy), and so must be every projected state.
    let agent = scripted_agent();
    let ctx = PrimitiveCtx::default();
    let mut traces = Vec::new();
    for wall in [WallId::East, WallId::North, WallId::West, WallId::South] {
        let state = wall_flush_box(wall);
        let n = wall.normal_out();
        let obj = state.object;
        let half = obj.footprint().extent_along(n) / 2.0;
        let start_xy = obj.center() - n.scaled(half + 0.002);
        let start = StartPose {
            x: start_xy.x,
            y: start_xy.y,
            z: 0.015,
            yaw: n.y.atan2(n.x),
        };
        let mut sim = Simulator::new(PhysicsParams::default(), state);
        let mut rng = rng_for(0, stream::LOW_POLICY, 0);
        let outcome = exec_flip_learned(&mut sim, &start, &agent, 0.0, &mut rng, &ctx);
        traces.push(
            outcome
                .low_transitions
                .iter()
                .map(|t| (t.state, t.action, t.reward))
                .collect::<Vec<_>>(),
        );
    }
    let reference = &traces[0];
    for (k, trace) in traces.iter().enumerate().skip(1) {
        assert_eq!(trace.len(), reference.len(), "trace {k} length");
        for (i, ((s, a, r), (s0, a0, r0))) in trace.iter().zip(reference).enumerate() {
            assert_eq!(a, a0, "action diverged at step {i} of trace {k}");
            assert!((s.d - s0.d).abs() < 1e-9, "d at step {i} of trace {k}");
            assert!((s.z - s0.z).abs() < 1e-9, "z at step {i} of trace {k}");
            assert!(
                (s.f_d - s0.f_d).abs() < 1e-6,
                "f_d at step {i} of trace {k}: {} vs {}",
                s.f_d,
                s0.f_d
            );
            assert!((r - r0).abs() < 1e-9, "reward at step {i} of trace {k}");
        }
    }
}
