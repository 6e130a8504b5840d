//! End-effector stepping with penalty contact and quasi-static response.
//!
//! The fingertip is a point contact. Penetration into the object raises a
//! spring force (capped). The object responds by planar sliding when the
//! push beats floor friction, by yawing flush when a wall blocks the slide,
//! or by pivoting up the wall when it is wedged and the combination of
//! normal force and fingertip friction can lift it against gravity.

use super::geometry::{wrap_angle, Vec2};
use super::settle::{complete_standing, fall_back_flat, PivotPlane};
use super::types::{
    ContactReading, EeDisplacement, EePose, PhysicsParams, Pivot, RestingFace, WallId,
    WorkspaceState, REACH_CEILING, REACH_MARGIN, WALL_SIDE,
};

/// Pitch resolution of the inner pivot relaxation loop, rad.
const PIVOT_DTHETA: f64 = 2e-3;

/// Pitch budget per substep; bounds the inner loop.
const PIVOT_MAX_ADVANCE: f64 = 0.45;

pub struct Simulator {
    pub params: PhysicsParams,
    pub state: WorkspaceState,
    forward_axis: Vec2,
    f_max_accum: f64,
    f_current: f64,
}

impl Simulator {
    pub fn new(params: PhysicsParams, state: WorkspaceState) -> Self {
        Self {
            params,
            state,
            forward_axis: Vec2::new(1.0, 0.0),
            f_max_accum: 0.0,
            f_current: 0.0,
        }
    }

    /// Direction used for the f_d component of contact readings. Primitives
    /// set it to their start yaw.
    pub fn set_forward_axis(&mut self, yaw: f64) {
        self.forward_axis = Vec2::from_angle(yaw);
    }

    /// Place the end effector without simulating the path. Used by
    /// primitives to move to a start pose; the real robot approaches from
    /// above, outside the contact-relevant volume.
    pub fn teleport_ee(&mut self, pose: EePose) {
        self.state.ee.pose = clamp_reach(pose);
        self.f_current = 0.0;
    }

    /// Move the end effector along a straight interpolated path, resolving
    /// contact every substep. Motions beyond the reach envelope are
    /// truncated, never an error.
    pub fn step_ee(&mut self, disp: EeDisplacement) -> ContactReading {
        let start = self.state.ee.pose;
        let linear = Vec2::new(disp.dx, disp.dy).norm().max(disp.dz.abs());
        let n_sub = (linear / self.params.substep_len).ceil().max(1.0) as usize;
        self.f_max_accum = 0.0;
        let mut f_d = 0.0;
        for k in 1..=n_sub {
            let t = k as f64 / n_sub as f64;
            let target = EePose {
                x: start.x + disp.dx * t,
                y: start.y + disp.dy * t,
                z: start.z + disp.dz * t,
                yaw: start.yaw + disp.dyaw * t,
                pitch_y: start.pitch_y + disp.dpitch_y * t,
            };
            self.state.ee.pose = clamp_reach(target);
            if self.state.held {
                // Attached object rides along; no contact to resolve.
                self.state.object.pose.x = self.state.ee.pose.x;
                self.state.object.pose.y = self.state.ee.pose.y;
                continue;
            }
            let sub = Vec2::new(disp.dx / n_sub as f64, disp.dy / n_sub as f64);
            let sub_dz = disp.dz / n_sub as f64;
            f_d = self.resolve_contact(sub, sub_dz);
        }
        // Unsupported mid-pivot object drops immediately (quasi-static).
        if !self.state.held && self.state.object.pitch > 0.0 && self.f_current == 0.0 {
            if let Some(pivot) = self.state.object.pivot {
                let plane = PivotPlane::from_pivot(&self.state.object, &pivot);
                if self.state.object.pitch > plane.balance_angle() {
                    complete_standing(&mut self.state.object, &pivot);
                } else {
                    fall_back_flat(&mut self.state.object, &pivot);
                }
            }
        }
        ContactReading {
            f_d,
            f_max: self.f_max_accum,
            f_current: self.f_current,
        }
    }

    /// Latest post-response contact force magnitude, N.
    pub fn current_force(&self) -> f64 {
        self.f_current
    }

    fn spring_force(&self, depth: f64) -> f64 {
        (self.params.contact_stiffness * depth).min(self.params.contact_force_cap)
    }

    fn record(&mut self, f: f64) {
        if f > self.f_max_accum {
            self.f_max_accum = f;
        }
    }

    /// Resolve one substep of contact. Returns the f_d component.
    fn resolve_contact(&mut self, sub_xy: Vec2, sub_dz: f64) -> f64 {
        self.f_current = 0.0;
        if self.state.object.pitch > 0.0 {
            return self.resolve_pivot_contact(sub_xy, sub_dz);
        }
        let p = self.params;
        let obj = self.state.object;
        let fp = obj.footprint();
        let (tip_xy, tip_z) = self.state.ee.tip(p.ee_finger_len);
        if tip_z >= obj.top_height() || tip_z < 0.0 {
            return 0.0;
        }
        let Some(pen) = fp.penetration_toward(tip_xy, sub_xy) else {
            return 0.0;
        };
        // Descending onto the top face: the finger presses down on the
        // object, which the floor supports. Force reported, no object
        // motion. Side contact wins for any non-descending motion so that
        // deep horizontal rams keep reading the side spring.
        let d_top = obj.top_height() - tip_z;
        if d_top < pen.depth && sub_dz < 0.0 && sub_dz.abs() >= sub_xy.norm() {
            let f = self.spring_force(d_top);
            self.record(f);
            self.f_current = f;
            return 0.0;
        }
        let push_dir = pen.normal_out.scaled(-1.0);
        let f_spike = self.spring_force(pen.depth);
        self.record(f_spike);

        // Wedged against a wall in the push direction: pivot attempt.
        if obj.resting_face == RestingFace::Flat {
            let wedged = WallId::ALL
                .into_iter()
                .find(|w| w.gap(&fp) <= p.wall_contact_tol && push_dir.dot(w.normal_out()) >= 0.5);
            if let Some(wall) = wedged {
                let mis = misalignment(obj.pose.yaw, wall);
                if mis.abs() <= p.pivot_align_tol {
                    if let Some(f_d) = self.try_pivot(wall, mis, sub_xy, sub_dz) {
                        return f_d;
                    }
                }
            }
        }

        // Planar kinematic push.
        let slip_force = obj.friction_mu * obj.mass * p.gravity;
        if f_spike > slip_force {
            let give = pen.depth - slip_force / p.contact_stiffness;
            let slide = push_dir.scaled(give);
            let contact = tip_xy + pen.normal_out.scaled(pen.depth);
            self.apply_planar_slide(slide, contact);
        }
        // Force after the response.
        let obj = self.state.object;
        let f_end = match obj.footprint().penetration_toward(tip_xy, sub_xy) {
            Some(pen2) if tip_z < obj.top_height() => self.spring_force(pen2.depth),
            _ => 0.0,
        };
        self.record(f_end);
        self.f_current = f_end;
        push_dir.dot(self.forward_axis).max(0.0) * f_end
    }

    /// Translate with the contact point, rotate about the center by the
    /// compliance fraction of the pinned-contact rotation, then clamp into
    /// the walls. Blocked slide against a touching wall relaxes yaw toward
    /// flush.
    fn apply_planar_slide(&mut self, slide: Vec2, contact: Vec2) {
        let p = self.params;
        let obj = &mut self.state.object;
        let r = contact - obj.center();
        let r2 = r.dot(r).max(1e-6);
        let dyaw = p.push_compliance * r.cross(slide) / r2;
        obj.pose.yaw = wrap_angle(obj.pose.yaw + dyaw);
        let wanted = Vec2::new(obj.pose.x + slide.x, obj.pose.y + slide.y);
        obj.pose.x = wanted.x;
        obj.pose.y = wanted.y;
        let fp = obj.footprint();
        let hx = fp.extent_along(Vec2::new(1.0, 0.0)) / 2.0;
        let hy = fp.extent_along(Vec2::new(0.0, 1.0)) / 2.0;
        obj.pose.x = obj.pose.x.clamp(hx, WALL_SIDE - hx);
        obj.pose.y = obj.pose.y.clamp(hy, WALL_SIDE - hy);
        let blocked = (wanted - obj.center()).norm();
        if blocked > 1e-9 {
            // The wall eats part of the slide; corner torque turns the
            // object toward flush.
            let fp = obj.footprint();
            if let Some(wall) = WallId::ALL
                .into_iter()
                .find(|w| w.gap(&fp) <= p.wall_contact_tol)
            {
                let mis = misalignment(obj.pose.yaw, wall);
                let budget = p.yaw_align_rate * blocked;
                obj.pose.yaw = wrap_angle(obj.pose.yaw - mis.clamp(-budget, budget));
                super::settle::project_into_workspace(obj);
            }
        }
    }

    /// Attempt to start a pivot from flat: snap the object flush, resolve
    /// against the near face, and keep the result only if the pitch actually
    /// advanced. Otherwise the state is restored and planar pushing handles
    /// the substep.
    fn try_pivot(&mut self, wall: WallId, mis: f64, sub_xy: Vec2, sub_dz: f64) -> Option<f64> {
        let saved = self.state.object;
        {
            let obj = &mut self.state.object;
            obj.pose.yaw = wrap_angle(obj.pose.yaw - mis);
            let n = wall.normal_out();
            let u_into_wall =
                obj.footprint().axis_u().dot(n).abs() >= obj.footprint().axis_v().dot(n).abs();
            let pivot = Pivot {
                wall,
                u_into_wall,
                lateral: obj.center().dot(wall.tangent()),
            };
            let plane = PivotPlane::from_pivot(obj, &pivot);
            let flush = wall.normal_out().scaled(plane.plane - plane.w_d / 2.0)
                + wall.tangent().scaled(pivot.lateral);
            obj.pose.x = flush.x;
            obj.pose.y = flush.y;
            obj.pivot = Some(pivot);
        }
        let f_d = self.resolve_pivot_contact(sub_xy, sub_dz);
        if self.state.object.pitch == 0.0 && self.state.object.resting_face == RestingFace::Flat {
            self.state.object = saved;
            return None;
        }
        Some(f_d)
    }

    /// Contact against the near face of a pivoting (or pivot-ready) object.
    fn resolve_pivot_contact(&mut self, sub_xy: Vec2, sub_dz: f64) -> f64 {
        let p = self.params;
        let Some(pivot) = self.state.object.pivot else {
            // Pitched state without bookkeeping: treat as unsupported.
            return 0.0;
        };
        let plane = PivotPlane::from_pivot(&self.state.object, &pivot);
        let n = pivot.wall.normal_out();
        let t = pivot.wall.tangent();
        let (tip_xy, tip_z) = self.state.ee.tip(p.ee_finger_len);
        // Out-of-plane rejection.
        if (tip_xy.dot(t) - pivot.lateral).abs() > plane.l_perp / 2.0 {
            return 0.0;
        }
        let tip_s = tip_xy.dot(n);
        let mass = self.state.object.mass;
        let g = p.gravity;
        // Upward fraction of the commanded motion mobilizes fingertip
        // friction up the face; pure forward pushes get none and jam.
        let fwd = sub_xy.dot(n).max(0.0);
        let lambda = sub_dz.max(0.0) / (fwd.hypot(sub_dz.max(0.0)) + 1e-12);
        let theta_b = plane.balance_angle();

        let contact = |theta: f64| -> (f64, f64) {
            let (a_s, a_z) = plane.near_corner(theta);
            let (sin_t, cos_t) = theta.sin_cos();
            let rel_s = tip_s - a_s;
            let rel_z = tip_z - a_z;
            let u = rel_s * sin_t + rel_z * cos_t;
            let depth = rel_s * cos_t - rel_z * sin_t; // -(rel . m_out)
            (u, depth)
        };

        let mut theta = self.state.object.pitch;
        let start_theta = theta;
        let mut f_end;
        loop {
            let (u, depth) = contact(theta);
            if depth <= 0.0 || !(-0.005..=plane.h + 0.005).contains(&u) {
                f_end = 0.0;
                break;
            }
            let (sin_t, cos_t) = theta.sin_cos();
            let f = self.spring_force(depth);
            self.record(f);
            f_end = f;
            let drive = f * (u - plane.h * cos_t * cos_t)
                + lambda * p.ee_contact_mu * f * (plane.w_d - plane.h * sin_t * cos_t);
            let resist = mass * g * ((plane.w_d / 2.0) * cos_t - (plane.h / 2.0) * sin_t);
            if drive <= resist || theta - start_theta >= PIVOT_MAX_ADVANCE {
                break;
            }
            // Advance only while the fingertip stays on the near face: the
            // face bottom lifts as the object rolls, so rotation waits for
            // the finger to climb.
            let (u_next, depth_next) = contact(theta + PIVOT_DTHETA);
            if u_next < 0.0 || depth_next <= 0.0 {
                break;
            }
            theta += PIVOT_DTHETA;
            if theta > theta_b {
                // Past balance: gravity completes the fall, contact breaks.
                complete_standing(&mut self.state.object, &pivot);
                self.f_current = 0.0;
                return 0.0;
            }
        }
        let obj = &mut self.state.object;
        obj.pitch = theta;
        if theta > 0.0 {
            let pos = plane.com_world(theta);
            obj.pose.x = pos.x;
            obj.pose.y = pos.y;
        }
        self.f_current = f_end;
        // Horizontal component of the face-normal force.
        f_end * theta.cos() * n.dot(self.forward_axis).max(0.0)
    }
}

fn clamp_reach(pose: EePose) -> EePose {
    EePose {
        x: pose.x.clamp(-REACH_MARGIN, WALL_SIDE + REACH_MARGIN),
        y: pose.y.clamp(-REACH_MARGIN, WALL_SIDE + REACH_MARGIN),
        z: pose.z.clamp(0.0, REACH_CEILING),
        yaw: wrap_angle(pose.yaw),
        pitch_y: pose.pitch_y.clamp(-std::f64::consts::FRAC_PI_2, std::f64::consts::FRAC_PI_2),
    }
}

/// Signed rotation taking the object's nearest axis onto the wall normal,
/// in [-pi/4, pi/4].
pub fn misalignment(yaw: f64, wall: WallId) -> f64 {
    let phi = wall.normal_out().y.atan2(wall.normal_out().x);
    let raw = wrap_angle(yaw - phi);
    let k = (raw / std::f64::consts::FRAC_PI_2).round();
    raw - k * std::f64::consts::FRAC_PI_2
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::settle::settle;
    use crate::sim::test_support::{flat_box_at, wall_flush_box};

    fn sim_with(state: WorkspaceState) -> Simulator {
        Simulator::new(PhysicsParams::default(), state)
    }

    #[test]
    fn free_space_motion_leaves_object_untouched() {
        let mut sim = sim_with(flat_box_at(0.2, 0.2, 0.0));
        let before = sim.state.object;
        sim.teleport_ee(EePose {
            x: 0.05,
            y: 0.05,
            z: 0.02,
            yaw: 0.0,
            pitch_y: 0.0,
        });
        let reading = sim.step_ee(EeDisplacement {
            dx: 0.03,
            dy: 0.0,
            ..Default::default()
        });
        assert_eq!(sim.state.object, before);
        assert_eq!(reading, ContactReading::default());
    }

    #[test]
    fn push_translates_object_by_stroke_minus_friction_slack() {
        let mut sim = sim_with(flat_box_at(0.2, 0.2, 0.0));
        let obj = sim.state.object;
        let face_x = obj.pose.x - obj.dims.length / 2.0;
        sim.teleport_ee(EePose {
            x: face_x,
            y: 0.2,
            z: 0.02,
            yaw: 0.0,
            pitch_y: 0.0,
        });
        sim.set_forward_axis(0.0);
        let reading = sim.step_ee(EeDisplacement {
            dx: 0.05,
            ..Default::default()
        });
        // Quasi-static slide keeps penetration at the slip threshold.
        let slack = obj.friction_mu * obj.mass * sim.params.gravity
            / sim.params.contact_stiffness;
        let moved = sim.state.object.pose.x - obj.pose.x;
        assert!(
            (moved - (0.05 - slack)).abs() < 0.003,
            "moved {moved}, expected {} +- 3 mm",
            0.05 - slack
        );
        // Still touching at the slip force.
        let slip = obj.friction_mu * obj.mass * sim.params.gravity;
        assert!((reading.f_current - slip).abs() < 0.3 * slip);
        assert!(reading.f_d > 0.0);
        assert!((sim.state.object.pose.y - 0.2).abs() < 1e-9);
    }

    #[test]
    fn spring_force_matches_stiffness_times_penetration() {
        let mut sim = sim_with(flat_box_at(0.2, 0.2, 0.0));
        let depth = 0.004;
        let face_x = 0.2 - sim.state.object.dims.length / 2.0;
        sim.teleport_ee(EePose {
            x: face_x + depth,
            y: 0.2,
            z: 0.02,
            yaw: 0.0,
            pitch_y: 0.0,
        });
        // Static: 2 N is below the 1.03 N slip force? No: slip = 1.03 N,
        // spring = 2 N, so the object yields; read the spike instead.
        let reading = sim.step_ee(EeDisplacement::default());
        let expected = sim.params.contact_stiffness * depth;
        assert!(
            (reading.f_max - expected).abs() < 0.05 * expected,
            "f_max {} expected {expected}",
            reading.f_max
        );
    }

    #[test]
    fn pure_forward_ram_against_wall_jams_without_pitch() {
        let mut sim = sim_with(wall_flush_box(WallId::East));
        let obj = sim.state.object;
        let face_x = obj.pose.x - obj.dims.width / 2.0;
        sim.teleport_ee(EePose {
            x: face_x - 0.002,
            y: obj.pose.y,
            z: 0.8 * obj.dims.height,
            yaw: 0.0,
            pitch_y: 0.0,
        });
        sim.set_forward_axis(0.0);
        let mut last = ContactReading::default();
        for _ in 0..8 {
            last = sim.step_ee(EeDisplacement {
                dx: 0.005,
                ..Default::default()
            });
        }
        // Without an upward motion component the fingertip cannot lift the
        // face; the object stays flat and force builds toward the cap.
        assert_eq!(sim.state.object.pitch, 0.0);
        assert!(last.f_max > 10.0, "f_max {}", last.f_max);
    }

    #[test]
    fn rising_press_pivots_and_completes_to_standing() {
        let mut sim = sim_with(wall_flush_box(WallId::East));
        let obj = sim.state.object;
        let face_x = obj.pose.x - obj.dims.width / 2.0;
        sim.teleport_ee(EePose {
            x: face_x - 0.002,
            y: obj.pose.y,
            z: 0.015,
            yaw: 0.0,
            pitch_y: 0.0,
        });
        sim.set_forward_axis(0.0);
        let mut prev_pitch = 0.0;
        let mut stood = false;
        for step in 0..40 {
            let reading = sim.step_ee(EeDisplacement {
                dx: 0.004,
                dz: 0.0035,
                ..Default::default()
            });
            assert!(reading.f_max <= sim.params.contact_force_cap + 1e-9);
            if sim.state.object.resting_face == RestingFace::Standing {
                stood = true;
                break;
            }
            // Monotone pitch while the contact persists.
            if reading.f_current > 0.0 {
                assert!(
                    sim.state.object.pitch >= prev_pitch - 1e-12,
                    "pitch decreased under load at step {step}"
                );
            }
            prev_pitch = sim.state.object.pitch;
        }
        assert!(stood, "rising press never reached standing");
    }

    #[test]
    fn unsupported_partial_pitch_falls_back_flat() {
        let mut state = crate::sim::test_support::pitched_at_wall(WallId::East, 0.091, 0.041, 0.0);
        state.object.pitch = 0.5; // below balance (1.147 rad)
        let mut sim = sim_with(state);
        sim.teleport_ee(EePose {
            x: 0.1,
            y: 0.1,
            z: 0.2,
            yaw: 0.0,
            pitch_y: 0.0,
        });
        sim.step_ee(EeDisplacement {
            dz: 0.01,
            ..Default::default()
        });
        assert_eq!(sim.state.object.pitch, 0.0);
        assert_eq!(sim.state.object.resting_face, RestingFace::Flat);
    }

    #[test]
    fn step_is_deterministic() {
        let run = || {
            let mut sim = sim_with(wall_flush_box(WallId::North));
            sim.teleport_ee(EePose {
                x: 0.224,
                y: 0.25,
                z: 0.018,
                yaw: std::f64::consts::FRAC_PI_2,
                pitch_y: 0.0,
            });
            sim.set_forward_axis(std::f64::consts::FRAC_PI_2);
            let mut readings = Vec::new();
            for _ in 0..12 {
                readings.push(sim.step_ee(EeDisplacement {
                    dy: 0.004,
                    dz: 0.003,
                    ..Default::default()
                }));
            }
            (sim.state, readings)
        };
        let (s1, r1) = run();
        let (s2, r2) = run();
        assert_eq!(s1, s2);
        assert_eq!(r1, r2);
    }

    #[test]
    fn settle_after_partial_press_falls_back() {
        let mut sim = sim_with(wall_flush_box(WallId::East));
        let obj = sim.state.object;
        let face_x = obj.pose.x - obj.dims.width / 2.0;
        sim.teleport_ee(EePose {
            x: face_x - 0.002,
            y: obj.pose.y,
            z: 0.015,
            yaw: 0.0,
            pitch_y: 0.0,
        });
        // A couple of rising presses: some pitch, then release and settle.
        for _ in 0..3 {
            sim.step_ee(EeDisplacement {
                dx: 0.004,
                dz: 0.0035,
                ..Default::default()
            });
        }
        let mid = sim.state.object.pitch;
        if mid > 0.0 {
            let plane = PivotPlane::from_pivot(
                &sim.state.object,
                &sim.state.object.pivot.unwrap(),
            );
            assert!(mid <= plane.balance_angle() + PIVOT_MAX_ADVANCE);
        }
        let mut state = sim.state.clone();
        settle(&sim.params, &mut state);
        assert!(state.object.is_settled());
    }
}
