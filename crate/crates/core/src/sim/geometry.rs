//! Planar vector and rotated-rectangle helpers for the quasi-static model.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Self = Self { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn from_angle(a: f64) -> Self {
        Self::new(a.cos(), a.sin())
    }

    pub fn dot(self, o: Self) -> f64 {
        self.x * o.x + self.y * o.y
    }

    /// z-component of the 3D cross product.
    pub fn cross(self, o: Self) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn scaled(self, s: f64) -> Self {
        Self::new(self.x * s, self.y * s)
    }

    pub fn perp(self) -> Self {
        Self::new(-self.y, self.x)
    }

    pub fn rotated(self, a: f64) -> Self {
        let (s, c) = a.sin_cos();
        Self::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }
}

impl std::ops::Add for Vec2 {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.x + o.x, self.y + o.y)
    }
}

impl std::ops::Sub for Vec2 {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.x - o.x, self.y - o.y)
    }
}

/// Wrap an angle to (-pi, pi].
pub fn wrap_angle(a: f64) -> f64 {
    let mut a = a % std::f64::consts::TAU;
    if a <= -std::f64::consts::PI {
        a += std::f64::consts::TAU;
    } else if a > std::f64::consts::PI {
        a -= std::f64::consts::TAU;
    }
    a
}

/// Penetration of a point inside a rotated rectangle, if any.
#[derive(Debug, Clone, Copy)]
pub struct Penetration {
    pub depth: f64,
    /// Outward normal of the face the point is closest to exiting through.
    pub normal_out: Vec2,
}

/// Rectangle centered at `center`, half extent `half_u` along the yaw axis
/// and `half_v` across it.
#[derive(Debug, Clone, Copy)]
pub struct Footprint {
    pub center: Vec2,
    pub yaw: f64,
    pub half_u: f64,
    pub half_v: f64,
}

impl Footprint {
    pub fn axis_u(&self) -> Vec2 {
        Vec2::from_angle(self.yaw)
    }

    pub fn axis_v(&self) -> Vec2 {
        self.axis_u().perp()
    }

    pub fn corners(&self) -> [Vec2; 4] {
        let u = self.axis_u().scaled(self.half_u);
        let v = self.axis_v().scaled(self.half_v);
        [
            self.center + u + v,
            self.center + u - v,
            self.center - u - v,
            self.center - u + v,
        ]
    }

    pub fn contains(&self, p: Vec2) -> bool {
        let d = p - self.center;
        d.dot(self.axis_u()).abs() <= self.half_u && d.dot(self.axis_v()).abs() <= self.half_v
    }

    pub fn penetration(&self, p: Vec2) -> Option<Penetration> {
        let d = p - self.center;
        let u = d.dot(self.axis_u());
        let v = d.dot(self.axis_v());
        let du = self.half_u - u.abs();
        let dv = self.half_v - v.abs();
        if du < 0.0 || dv < 0.0 {
            return None;
        }
        if du <= dv {
            Some(Penetration {
                depth: du,
                normal_out: self.axis_u().scaled(u.signum()),
            })
        } else {
            Some(Penetration {
                depth: dv,
                normal_out: self.axis_v().scaled(v.signum()),
            })
        }
    }

    /// Penetration against the face the motion drives into. A point pushed
    /// deep past the center must keep pressing its entry face, not pop out
    /// the far side; proximity only breaks ties when the motion singles out
    /// no face.
    pub fn penetration_toward(&self, p: Vec2, motion: Vec2) -> Option<Penetration> {
        let d = p - self.center;
        let u = d.dot(self.axis_u());
        let v = d.dot(self.axis_v());
        if u.abs() > self.half_u || v.abs() > self.half_v {
            return None;
        }
        let faces = [
            (self.axis_u(), self.half_u - u),
            (self.axis_u().scaled(-1.0), self.half_u + u),
            (self.axis_v(), self.half_v - v),
            (self.axis_v().scaled(-1.0), self.half_v + v),
        ];
        faces
            .into_iter()
            .filter(|(n, _)| n.dot(motion) < -1e-9)
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .map(|(normal_out, depth)| Penetration { depth, normal_out })
            .or_else(|| self.penetration(p))
    }

    /// Caliper width of the rectangle along `dir` (unit vector).
    pub fn extent_along(&self, dir: Vec2) -> f64 {
        2.0 * (self.half_u * dir.dot(self.axis_u()).abs()
            + self.half_v * dir.dot(self.axis_v()).abs())
    }

    /// Projection interval of the rectangle onto `dir`.
    pub fn support_interval(&self, dir: Vec2) -> (f64, f64) {
        let c = self.center.dot(dir);
        let h = self.extent_along(dir) / 2.0;
        (c - h, c + h)
    }
}
