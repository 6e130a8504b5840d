//! Simulator-wide invariants under randomized action sequences.

use flipgrasp::sim::{
    min_wall_gap, reset, settle, EeDisplacement, EePose, ObjectRanges, PhysicsParams, Placement,
    Simulator,
};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(60))]

    /// Objects never end up penetrating a wall, whatever the end effector
    /// does to them.
    #[test]
    fn walls_are_never_penetrated(
        seed in 0u64..5_000,
        approaches in prop::collection::vec((0.0f64..0.448, 0.0f64..0.448, 0.0f64..6.28), 1..4),
    ) {
        let params = PhysicsParams::default();
        let state = reset(&params, &ObjectRanges::default(), Placement::Random, 0.08, seed).unwrap();
        let mut sim = Simulator::new(params, state);
        for (x, y, yaw) in approaches {
            sim.teleport_ee(EePose { x, y, z: 0.02, yaw, pitch_y: 0.0 });
            sim.set_forward_axis(yaw);
            for _ in 0..20 {
                sim.step_ee(EeDisplacement {
                    dx: 0.005 * yaw.cos(),
                    dy: 0.005 * yaw.sin(),
                    dz: 0.002,
                    ..Default::default()
                });
                if sim.state.object.is_settled() {
                    prop_assert!(
                        min_wall_gap(&sim.state) >= -1e-9,
                        "wall penetration {} after push",
                        min_wall_gap(&sim.state)
                    );
                }
            }
            settle(&params, &mut sim.state);
            prop_assert!(min_wall_gap(&sim.state) >= -1e-9);
            prop_assert!(sim.state.object.validate().is_ok());
        }
    }

    /// Contact readings obey the force law bounds.
    #[test]
    fn forces_stay_capped_and_non_negative(seed in 0u64..5_000) {
        let params = PhysicsParams::default();
        let state = reset(&params, &ObjectRanges::default(), Placement::CloseToWall, 0.08, seed).unwrap();
        let obj = sim_center(&state);
        let mut sim = Simulator::new(params, state);
        sim.teleport_ee(EePose { x: obj.0, y: obj.1, z: 0.02, yaw: obj.2, pitch_y: 0.0 });
        sim.set_forward_axis(obj.2);
        for _ in 0..30 {
            let r = sim.step_ee(EeDisplacement {
                dx: 0.005 * obj.2.cos(),
                dy: 0.005 * obj.2.sin(),
                ..Default::default()
            });
            prop_assert!(r.f_d >= 0.0 && r.f_max >= 0.0 && r.f_current >= 0.0);
            prop_assert!(r.f_current <= params.contact_force_cap + 1e-9);
            prop_assert!(r.f_max <= params.contact_force_cap + 1e-9);
            prop_assert!(r.f_d <= r.f_max + 1e-9);
        }
    }
}

/// Start just behind the object aimed at its center.
fn sim_center(state: &flipgrasp::sim::WorkspaceState) -> (f64, f64, f64) {
    let c = state.object.center();
    let from = flipgrasp::sim::Vec2::new(0.224, 0.224);
    let dir = flipgrasp::sim::Vec2::new(c.x - from.x, c.y - from.y);
    let yaw = dir.y.atan2(dir.x);
    let half = state.object.footprint().extent_along(flipgrasp::sim::Vec2::from_angle(yaw)) / 2.0;
    (
        c.x - (half + 0.01) * yaw.cos(),
        c.y - (half + 0.01) * yaw.sin(),
        yaw,
    )
}
