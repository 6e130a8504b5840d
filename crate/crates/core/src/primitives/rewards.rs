//! Both reward functions.

use super::{OutcomeResult, RewardParams};

/// Per-step reward of the low-level flip controller.
///
/// The force-limit penalty dominates every other branch; otherwise contact
/// is rewarded in proportion to the end-effector height, capped at sigma,
/// and a flip completed this step adds the high-level flip reward on top.
pub fn low_reward(f_c: f64, z_tau: f64, flip_success_now: bool, p: &RewardParams) -> f64 {
    let shaped = if f_c > p.f_limit {
        -1.0
    } else if f_c > 0.0 {
        p.sigma.min(z_tau * p.sigma / p.w)
    } else {
        0.0
    };
    let base = if flip_success_now { p.r_flip } else { 0.0 };
    base + shaped
}

/// Sparse high-level reward over primitive outcomes. Push rewards are kept
/// below flip and grasp so the agent cannot farm the episode by shoving the
/// object around.
pub fn high_reward(result: OutcomeResult, p: &RewardParams) -> f64 {
    match result {
        OutcomeResult::FlipSuccess => p.r_flip,
        OutcomeResult::GraspSuccess => p.r_grasp,
        OutcomeResult::AtWall => p.r_push_wall,
        OutcomeResult::Changed => p.r_push_change,
        OutcomeResult::NoChange
        | OutcomeResult::FlipFail
        | OutcomeResult::GraspFail
        | OutcomeResult::ForceAbort => 0.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shaped_contact_reward_scales_with_height_up_to_sigma() {
        let p = RewardParams::default();
        // f_c = 5 N, z = 5 cm: min(0.2, 0.05 * 0.2 / 0.1) = 0.1
        assert!((low_reward(5.0, 0.05, false, &p) - 0.1).abs() < 1e-12);
        // Saturates at sigma once z reaches w.
        assert!((low_reward(5.0, 0.2, false, &p) - 0.2).abs() < 1e-12);
    }

    #[test]
    fn no_contact_means_no_shaped_reward() {
        let p = RewardParams::default();
        assert_eq!(low_reward(0.0, 0.5, false, &p), 0.0);
    }

    #[test]
    fn force_limit_penalty_dominates() {
        let p = RewardParams::default();
        assert_eq!(low_reward(35.0, 0.2, false, &p), -1.0);
    }

    #[test]
    fn flip_success_adds_the_high_level_reward() {
        let p = RewardParams::default();
        // 1 + min(0.2, 0.4) = 1.2
        assert!((low_reward(5.0, 0.2, true, &p) - 1.2).abs() < 1e-12);
    }

    #[test]
    fn low_reward_stays_within_bounds_on_the_branch_grid() {
        let p = RewardParams::default();
        for &f in &[0.0, 1.0, p.f_limit, p.f_limit + 1.0] {
            for &z in &[0.0, p.w / 2.0, p.w, 2.0 * p.w] {
                for &flip in &[false, true] {
                    let r = low_reward(f, z, flip, &p);
                    assert!((-1.0..=1.0 + p.sigma).contains(&r), "r={r} at f={f} z={z}");
                    if f > 0.0 && f <= p.f_limit && !flip {
                        assert!(r <= p.sigma);
                        if z >= p.w {
                            assert!((r - p.sigma).abs() < 1e-12);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn high_reward_table() {
        let p = RewardParams::default();
        assert_eq!(high_reward(OutcomeResult::FlipSuccess, &p), 1.0);
        assert_eq!(high_reward(OutcomeResult::GraspSuccess, &p), 1.0);
        assert_eq!(high_reward(OutcomeResult::AtWall, &p), 0.2);
        assert_eq!(high_reward(OutcomeResult::Changed, &p), 0.1);
        assert_eq!(high_reward(OutcomeResult::NoChange, &p), 0.0);
        assert_eq!(high_reward(OutcomeResult::FlipFail, &p), 0.0);
        assert_eq!(high_reward(OutcomeResult::GraspFail, &p), 0.0);
        assert_eq!(high_reward(OutcomeResult::ForceAbort, &p), 0.0);
    }
}
