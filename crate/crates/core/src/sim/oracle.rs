//! Brute-force quasi-static oracle for the verification suites.
//!
//! Everything here is derived numerically from corner geometry under the
//! two-contact rolling constraint: no closed-form balance angles, no torque
//! formulas, and no calls into the simulator. The test suites compare
//! simulator outcomes against this independent route.

/// Cross-section of a pivoting box: extent toward the wall when flat,
/// vertical extent when flat, and mass.
#[derive(Debug, Clone, Copy)]
pub struct PivotOracle {
    pub w_d: f64,
    pub h: f64,
    pub mass: f64,
    pub gravity: f64,
}

impl PivotOracle {
    /// Corner positions (s, z) at pitch `theta`, s measured along the wall
    /// outward normal with the wall plane at s = 0. The body rests on the
    /// floor (min z = 0) and touches the wall (max s = 0).
    pub fn corners(&self, theta: f64) -> [(f64, f64); 4] {
        let (sin_t, cos_t) = theta.sin_cos();
        // Body frame: bottom edge direction and face-up direction.
        let d = (-cos_t, sin_t);
        let n = (sin_t, cos_t);
        // Raw corner offsets from the bottom-far edge.
        let raw = [
            (0.0, 0.0),
            (self.w_d * d.0, self.w_d * d.1),
            (self.h * n.0, self.h * n.1),
            (self.w_d * d.0 + self.h * n.0, self.w_d * d.1 + self.h * n.1),
        ];
        // Slide along the floor until no corner crosses the wall plane.
        let max_s = raw.iter().map(|c| c.0).fold(f64::MIN, f64::max);
        raw.map(|(s, z)| (s - max_s, z))
    }

    /// Center-of-mass height at pitch `theta` (mean of the corners).
    pub fn com_height(&self, theta: f64) -> f64 {
        let corners = self.corners(theta);
        corners.iter().map(|c| c.1).sum::<f64>() / 4.0
    }

    /// Potential energy at pitch `theta`.
    pub fn energy(&self, theta: f64) -> f64 {
        self.mass * self.gravity * self.com_height(theta)
    }

    /// Pitch of maximum potential energy, located by grid search.
    pub fn balance_angle(&self, grid: usize) -> f64 {
        let mut best = (f64::MIN, 0.0);
        for k in 0..=grid {
            let theta = std::f64::consts::FRAC_PI_2 * k as f64 / grid as f64;
            let e = self.energy(theta);
            if e > best.0 {
                best = (e, theta);
            }
        }
        best.1
    }

    /// Released at `pitch`, does the object fall toward standing? Downhill
    /// direction of the numeric energy landscape.
    pub fn settles_standing(&self, pitch: f64) -> bool {
        pitch > self.balance_angle(20_000)
    }

    /// Does a press at face height `u` with force `f` and upward-motion
    /// fraction `lambda` start the roll from flat? Work rates are taken from
    /// finite differences of the corner geometry.
    pub fn press_lifts(&self, u: f64, f: f64, lambda: f64, mu_ee: f64) -> bool {
        let d_theta = 1e-6;
        // Material contact point on the near face, offset u up the face.
        let point = |theta: f64| {
            let corners = self.corners(theta);
            let near_bottom = corners[1];
            let near_top = corners[3];
            let dir = (
                (near_top.0 - near_bottom.0) / self.h,
                (near_top.1 - near_bottom.1) / self.h,
            );
            (near_bottom.0 + u * dir.0, near_bottom.1 + u * dir.1, dir)
        };
        let (p0s, p0z, face_dir) = point(0.0);
        let (p1s, p1z, _) = point(d_theta);
        let v = ((p1s - p0s) / d_theta, (p1z - p0z) / d_theta);
        // Outward face normal at flat: perpendicular to the face, pointing
        // away from the body interior.
        let normal_out = (-face_dir.1, face_dir.0);
        let push = (-normal_out.0 * f, -normal_out.1 * f);
        let friction = (face_dir.0 * lambda * mu_ee * f, face_dir.1 * lambda * mu_ee * f);
        let work_rate = (push.0 + friction.0) * v.0 + (push.1 + friction.1) * v.1;
        let energy_rate = (self.energy(d_theta) - self.energy(0.0)) / d_theta;
        work_rate > energy_rate
    }
}
