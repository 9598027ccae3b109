//! The five-parameter grasp rectangle.
//!
//! Coordinates are image pixels: `x` grows to the right, `y` grows downward,
//! and pixel `(i, j)` covers `[j, j + 1) x [i, i + 1)`. The angle is in degrees,
//! counterclockwise as seen on screen, so the opening axis points along
//! `(cos θ, -sin θ)` in pixel coordinates.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Point = [f64; 2];

/// Maps any finite angle in degrees into `(-90, 90]`.
pub fn normalize_angle(deg: f64) -> f64 {
    let t = deg.rem_euclid(180.0);
    if t > 90.0 {
        t - 180.0
    } else {
        t
    }
}

/// Smallest difference between two gripper orientations, in `[0, 90]`.
pub fn angle_diff(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(180.0);
    d.min(180.0 - d)
}

/// A parallel-jaw grasp `{x, y, h, w, θ}`.
///
/// `w` is the opening (distance between the inner faces of the jaws) and `h`
/// the jaw size (length of the plates). Both are in pixels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawGrasp", into = "RawGrasp")]
pub struct Grasp {
    x: f64,
    y: f64,
    h: f64,
    w: f64,
    theta: f64,
}

#[derive(Serialize, Deserialize)]
struct RawGrasp {
    x: f64,
    y: f64,
    h: f64,
    w: f64,
    theta: f64,
}

impl TryFrom<RawGrasp> for Grasp {
    type Error = Error;

    fn try_from(r: RawGrasp) -> Result<Self> {
        Grasp::new(r.x, r.y, r.w, r.h, r.theta)
    }
}

impl From<Grasp> for RawGrasp {
    fn from(g: Grasp) -> Self {
        RawGrasp {
            x: g.x,
            y: g.y,
            h: g.h,
            w: g.w,
            theta: g.theta,
        }
    }
}

impl Grasp {
    /// Builds a grasp, normalizing `theta_deg` into `(-90, 90]`.
    pub fn new(x: f64, y: f64, w: f64, h: f64, theta_deg: f64) -> Result<Self> {
        for (name, v) in [("x", x), ("y", y), ("w", w), ("h", h), ("theta", theta_deg)] {
            if !v.is_finite() {
                return Err(Error::InvalidGrasp(format!("{name} is not finite ({v})")));
            }
        }
        if w <= 0.0 {
            return Err(Error::InvalidGrasp(format!(
                "opening must be positive, got {w}"
            )));
        }
        if h <= 0.0 {
            return Err(Error::InvalidGrasp(format!(
                "jaw size must be positive, got {h}"
            )));
        }
        Ok(Grasp {
            x,
            y,
            h,
            w,
            theta: normalize_angle(theta_deg),
        })
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn y(&self) -> f64 {
        self.y
    }

    pub fn center(&self) -> Point {
        [self.x, self.y]
    }

    /// Opening, in pixels.
    pub fn w(&self) -> f64 {
        self.w
    }

    /// Jaw size, in pixels.
    pub fn h(&self) -> f64 {
        self.h
    }

    /// Orientation in degrees, in `(-90, 90]`.
    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn with_center(self, x: f64, y: f64) -> Result<Self> {
        Grasp::new(x, y, self.w, self.h, self.theta)
    }

    pub fn with_jaw(self, h: f64) -> Result<Self> {
        Grasp::new(self.x, self.y, self.w, h, self.theta)
    }

    pub fn with_theta(self, theta_deg: f64) -> Result<Self> {
        Grasp::new(self.x, self.y, self.w, self.h, theta_deg)
    }

    /// Unit vector along which the jaws close.
    pub fn closing_axis(&self) -> Point {
        let t = self.theta.to_radians();
        [t.cos(), -t.sin()]
    }

    /// Unit vector along the jaw plates.
    pub fn jaw_axis(&self) -> Point {
        let t = self.theta.to_radians();
        [t.sin(), t.cos()]
    }

    /// Rectangle corners with positive signed area. Edges 1-2 and 3-4 are the
    /// jaw sides (length `h`); edges 0-1 and 2-3 span the opening (length `w`).
    pub fn corners(&self) -> [Point; 4] {
        let u = self.closing_axis();
        let v = self.jaw_axis();
        let (hw, hh) = (self.w / 2.0, self.h / 2.0);
        let at = |a: f64, b: f64| [self.x + a * u[0] + b * v[0], self.y + a * u[1] + b * v[1]];
        [at(-hw, -hh), at(hw, -hh), at(hw, hh), at(-hw, hh)]
    }

    /// The 5-vector `(x, y, h, w, θ)`.
    pub fn as_vector(&self) -> [f64; 5] {
        [self.x, self.y, self.h, self.w, self.theta]
    }

    pub fn area(&self) -> f64 {
        self.w * self.h
    }
}

/// Free-function form of [`Grasp::corners`].
pub fn rect_corners(g: &Grasp) -> [Point; 4] {
    g.corners()
}
