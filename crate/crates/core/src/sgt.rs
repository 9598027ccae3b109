//! Quasi-static simulated grasp trial on a posed height field.
//!
//! A trial runs four stages and stops at the first failure:
//!
//! 1. approach: the open gripper descends along the surface normal at the
//!    grasp center until the jaw tips reach the grasp plane, one insertion
//!    depth below the center height. Steep normals and material under either
//!    jaw plate abort the trial.
//! 2. close: both jaws slide toward the center along the closing axis and
//!    stop at the first material above the grasp plane.
//! 3. hold: each contact normal must lie inside the friction cone around the
//!    closing direction.
//! 4. lift: the friction grip must carry the object's weight with margin.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grasp::Grasp;
use crate::scene::Scene;

pub const GRAVITY: f64 = 9.81;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GripperConfig {
    /// Meters.
    pub max_opening: f64,
    /// Jaw plate lengths, meters, ascending.
    pub jaw_sizes: Vec<f64>,
    pub jaw_thickness: f64,
    pub insertion_depth: f64,
    pub friction_mu: f64,
    /// Newtons per jaw.
    pub grip_force: f64,
    pub lift_safety_factor: f64,
    /// Steepest surface, degrees from vertical, the gripper may approach along.
    pub max_approach_tilt: f64,
}

impl Default for GripperConfig {
    fn default() -> Self {
        GripperConfig {
            max_opening: 0.10,
            jaw_sizes: vec![0.01, 0.02, 0.03, 0.04, 0.06],
            jaw_thickness: 0.005,
            insertion_depth: 0.01,
            friction_mu: 0.5,
            grip_force: 40.0,
            lift_safety_factor: 1.2,
            max_approach_tilt: 30.0,
        }
    }
}

/// Tolerance when matching a jaw size given in pixels back to meters.
pub const JAW_SIZE_TOLERANCE: f64 = 1e-6;

impl GripperConfig {
    pub fn validate(&self) -> Result<()> {
        let scalars = [
            ("max_opening", self.max_opening),
            ("jaw_thickness", self.jaw_thickness),
            ("insertion_depth", self.insertion_depth),
            ("friction_mu", self.friction_mu),
            ("grip_force", self.grip_force),
            ("lift_safety_factor", self.lift_safety_factor),
            ("max_approach_tilt", self.max_approach_tilt),
        ];
        for (name, v) in scalars {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidConfig(format!(
                    "gripper {name} must be positive, got {v}"
                )));
            }
        }
        if self.jaw_sizes.is_empty() || self.jaw_sizes.iter().any(|&j| !(j.is_finite() && j > 0.0))
        {
            return Err(Error::InvalidConfig(
                "gripper jaw sizes must be positive and non-empty".into(),
            ));
        }
        if self.jaw_sizes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidConfig(
                "gripper jaw sizes must be strictly ascending".into(),
            ));
        }
        Ok(())
    }

    /// The configured jaw size matching `meters`.
    pub fn resolve_jaw(&self, meters: f64) -> Result<f64> {
        self.jaw_sizes
            .iter()
            .copied()
            .find(|j| (j - meters).abs() <= JAW_SIZE_TOLERANCE)
            .ok_or(Error::InvalidJawSize(meters))
    }

    /// Friction cone half-angle, degrees.
    pub fn friction_half_angle(&self) -> f64 {
        self.friction_mu.atan().to_degrees()
    }

    pub fn can_lift(&self, mass: f64) -> bool {
        2.0 * self.friction_mu * self.grip_force >= self.lift_safety_factor * mass * GRAVITY
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FailureReason {
    ApproachCollision,
    NoContact,
    SingleSideContact,
    FrictionConeViolation,
    PayloadExceeded,
    OpeningExceeded,
}

impl FailureReason {
    pub const ALL: [FailureReason; 6] = [
        FailureReason::ApproachCollision,
        FailureReason::NoContact,
        FailureReason::SingleSideContact,
        FailureReason::FrictionConeViolation,
        FailureReason::PayloadExceeded,
        FailureReason::OpeningExceeded,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            FailureReason::ApproachCollision => "approach-collision",
            FailureReason::NoContact => "no-contact",
            FailureReason::SingleSideContact => "single-side-contact",
            FailureReason::FrictionConeViolation => "friction-cone-violation",
            FailureReason::PayloadExceeded => "payload-exceeded",
            FailureReason::OpeningExceeded => "opening-exceeded",
        }
    }
}

impl std::fmt::Display for FailureReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Where one jaw stopped.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JawContact {
    /// Exposed material cells on the contact front.
    pub cells: usize,
    /// Outward unit surface normal `(x, y, z)` in the world frame.
    pub normal: [f64; 3],
    /// Angle between the normal and the jaw's closing direction, degrees.
    pub normal_angle: f64,
    /// Distance the jaw slid before touching, meters.
    pub travel: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct ContactSummary {
    /// Height of the jaw tips, meters.
    pub grasp_plane: f64,
    /// Jaw on the `+closing_axis` side, then the opposite jaw.
    pub jaws: [Option<JawContact>; 2],
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialOutcome {
    pub success: bool,
    pub failure_reason: Option<FailureReason>,
    pub contact: ContactSummary,
}

impl TrialOutcome {
    fn fail(reason: FailureReason, contact: ContactSummary) -> Self {
        TrialOutcome {
            success: false,
            failure_reason: Some(reason),
            contact,
        }
    }
}

struct JawFront {
    /// Largest distance from the center along the jaw's side, meters.
    reach: f64,
    grad_sum: [f64; 2],
    exposed: usize,
    /// Any material at all in the corridor.
    hit: bool,
}

impl JawFront {
    fn new() -> Self {
        JawFront {
            reach: f64::NEG_INFINITY,
            grad_sum: [0.0; 2],
            exposed: 0,
            hit: false,
        }
    }
}

/// Runs one trial of `grasp` with the given jaw size (meters).
pub fn simulate_grasp(
    scene: &Scene,
    grasp: &Grasp,
    jaw_size: f64,
    gripper: &GripperConfig,
) -> Result<TrialOutcome> {
    let jaw = gripper.resolve_jaw(jaw_size)?;
    let cam = scene.camera();
    if !scene.contains_pixel(grasp.x(), grasp.y()) {
        return Err(Error::CenterOutsideImage {
            x: grasp.x(),
            y: grasp.y(),
            width: cam.width,
            height: cam.height,
        });
    }
    let res = cam.resolution;
    let mut contact = ContactSummary::default();

    let opening = grasp.w() * res;
    if opening > gripper.max_opening * (1.0 + 1e-9) {
        return Ok(TrialOutcome::fail(FailureReason::OpeningExceeded, contact));
    }

    // approach
    let (cr, cc) = (grasp.y().floor() as usize, grasp.x().floor() as usize);
    let center_h = scene.heights().get(cr, cc);
    let g = scene.gradient(cr, cc);
    let tilt = g[0].hypot(g[1]).atan().to_degrees();
    let plane = (center_h - gripper.insertion_depth).max(0.0);
    contact.grasp_plane = plane;
    if tilt > gripper.max_approach_tilt {
        return Ok(TrialOutcome::fail(
            FailureReason::ApproachCollision,
            contact,
        ));
    }

    let u = grasp.closing_axis();
    let v = grasp.jaw_axis();
    let half_open = opening / 2.0;
    let thickness = gripper.jaw_thickness.max(res);
    let half_jaw = jaw.max(res) / 2.0;
    let outer = half_open + thickness;

    // Pixel bounding box of the whole gripper footprint.
    let ext_u = outer / res;
    let ext_v = half_jaw / res;
    let span_x = ext_u * u[0].abs() + ext_v * v[0].abs() + 1.0;
    let span_y = ext_u * u[1].abs() + ext_v * v[1].abs() + 1.0;
    let c0 = (grasp.x() - span_x).floor().max(0.0) as usize;
    let c1 = ((grasp.x() + span_x).ceil().max(0.0) as usize).min(cam.width);
    let r0 = (grasp.y() - span_y).floor().max(0.0) as usize;
    let r1 = ((grasp.y() + span_y).ceil().max(0.0) as usize).min(cam.height);

    let heights = scene.heights();
    let solid = |r: isize, c: isize| heights.get_signed(r, c).unwrap_or(0.0) > plane;
    let mut fronts = [JawFront::new(), JawFront::new()];
    // First pass: collisions and how far each jaw can slide.
    for r in r0..r1 {
        let dy = r as f64 + 0.5 - grasp.y();
        for c in c0..c1 {
            if heights.get(r, c) <= plane {
                continue;
            }
            let dx = c as f64 + 0.5 - grasp.x();
            let a = (dx * u[0] + dy * u[1]) * res;
            let b = (dx * v[0] + dy * v[1]) * res;
            if b.abs() > half_jaw {
                continue;
            }
            let dist = a.abs();
            if dist >= half_open {
                if dist <= outer {
                    return Ok(TrialOutcome::fail(
                        FailureReason::ApproachCollision,
                        contact,
                    ));
                }
                continue;
            }
            for (side, front) in fronts.iter_mut().enumerate() {
                let along = if side == 0 { a } else { -a };
                if along >= 0.0 {
                    front.hit = true;
                    front.reach = front.reach.max(along);
                }
            }
        }
    }

    // Second pass: exposed cells on each contact front give the normal.
    for r in r0..r1 {
        let dy = r as f64 + 0.5 - grasp.y();
        for c in c0..c1 {
            if heights.get(r, c) <= plane {
                continue;
            }
            let dx = c as f64 + 0.5 - grasp.x();
            let a = (dx * u[0] + dy * u[1]) * res;
            let b = (dx * v[0] + dy * v[1]) * res;
            if b.abs() > half_jaw || a.abs() >= half_open {
                continue;
            }
            let (ri, ci) = (r as isize, c as isize);
            let exposed = !solid(ri - 1, ci)
                || !solid(ri + 1, ci)
                || !solid(ri, ci - 1)
                || !solid(ri, ci + 1);
            if !exposed {
                continue;
            }
            for (side, front) in fronts.iter_mut().enumerate() {
                let along = if side == 0 { a } else { -a };
                if front.hit && along >= 0.0 && along >= front.reach - res {
                    let g = scene.gradient(r, c);
                    front.grad_sum[0] += g[0];
                    front.grad_sum[1] += g[1];
                    front.exposed += 1;
                }
            }
        }
    }

    for (side, front) in fronts.iter().enumerate() {
        if !front.hit {
            continue;
        }
        let n = front.exposed.max(1) as f64;
        let (gx, gy) = (front.grad_sum[0] / n, front.grad_sum[1] / n);
        let norm = (gx * gx + gy * gy + 1.0).sqrt();
        let normal = [-gx / norm, -gy / norm, 1.0 / norm];
        let dir = if side == 0 {
            [u[0], u[1]]
        } else {
            [-u[0], -u[1]]
        };
        let cos = (normal[0] * dir[0] + normal[1] * dir[1]).clamp(-1.0, 1.0);
        contact.jaws[side] = Some(JawContact {
            cells: front.exposed,
            normal,
            normal_angle: cos.acos().to_degrees(),
            travel: (half_open - front.reach).max(0.0),
        });
    }

    match (contact.jaws[0], contact.jaws[1]) {
        (None, None) => return Ok(TrialOutcome::fail(FailureReason::NoContact, contact)),
        (Some(_), None) | (None, Some(_)) => {
            return Ok(TrialOutcome::fail(
                FailureReason::SingleSideContact,
                contact,
            ))
        }
        (Some(a), Some(b)) => {
            let cone = gripper.friction_half_angle() + 1e-9;
            if a.normal_angle > cone || b.normal_angle > cone {
                return Ok(TrialOutcome::fail(
                    FailureReason::FrictionConeViolation,
                    contact,
                ));
            }
        }
    }

    if !gripper.can_lift(scene.object().mass) {
        return Ok(TrialOutcome::fail(FailureReason::PayloadExceeded, contact));
    }

    Ok(TrialOutcome {
        success: true,
        failure_reason: None,
        contact,
    })
}

/// Every configured jaw size (meters) for which the grasp succeeds.
pub fn trial_all_jaw_sizes(
    scene: &Scene,
    grasp: &Grasp,
    gripper: &GripperConfig,
) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for &jaw in &gripper.jaw_sizes {
        if simulate_grasp(scene, grasp, jaw, gripper)?.success {
            out.push(jaw);
        }
    }
    Ok(out)
}
