//! Posed objects under an overhead orthographic camera.
//!
//! World and image frames share orientation: world `(0, 0)` is the image
//! center, `x` grows with the column and `y` with the row, in meters.

use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::kv::{KvDoc, KvWriter};
use crate::netpbm;
use crate::object::{validate_id, ObjectModel};

pub const DEPTH_LEVELS: u16 = u16::MAX;

/// Orthographic overhead camera.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Camera {
    pub width: usize,
    pub height: usize,
    /// Meters per pixel.
    pub resolution: f64,
    /// Height of the image plane above the table, meters.
    pub distance: f64,
}

impl Camera {
    pub fn validate(&self) -> Result<()> {
        if self.width == 0 || self.height == 0 {
            return Err(Error::InvalidConfig(
                "camera image must be non-empty".into(),
            ));
        }
        if !(self.resolution.is_finite() && self.resolution > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "camera resolution must be positive, got {}",
                self.resolution
            )));
        }
        if !(self.distance.is_finite() && self.distance > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "camera distance must be positive, got {}",
                self.distance
            )));
        }
        Ok(())
    }

    pub fn half_extent(&self) -> [f64; 2] {
        [
            self.width as f64 * self.resolution / 2.0,
            self.height as f64 * self.resolution / 2.0,
        ]
    }

    pub fn pixel_to_world(&self, px: f64, py: f64) -> [f64; 2] {
        [
            (px - self.width as f64 / 2.0) * self.resolution,
            (py - self.height as f64 / 2.0) * self.resolution,
        ]
    }

    pub fn world_to_pixel(&self, x: f64, y: f64) -> [f64; 2] {
        [
            x / self.resolution + self.width as f64 / 2.0,
            y / self.resolution + self.height as f64 / 2.0,
        ]
    }

    /// Depth step of one 16-bit code, meters.
    pub fn depth_step(&self) -> f64 {
        self.distance / DEPTH_LEVELS as f64
    }
}

/// How scenes pick their camera.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CameraConfig {
    pub width: usize,
    pub height: usize,
    pub distance: f64,
    /// Fixed meters per pixel. When absent the frame's shorter side spans
    /// `fit_factor` times the object's longest side.
    pub resolution: Option<f64>,
    pub fit_factor: f64,
}

impl Default for CameraConfig {
    fn default() -> Self {
        CameraConfig {
            width: 256,
            height: 256,
            distance: 1.0,
            resolution: None,
            fit_factor: 3.0,
        }
    }
}

impl CameraConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.fit_factor.is_finite() && self.fit_factor > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "fit factor must be positive, got {}",
                self.fit_factor
            )));
        }
        self.camera_for(1.0).validate()
    }

    pub fn camera_for(&self, longest_side: f64) -> Camera {
        let resolution = self
            .resolution
            .unwrap_or_else(|| self.fit_factor * longest_side / self.width.min(self.height) as f64);
        Camera {
            width: self.width,
            height: self.height,
            resolution,
            distance: self.distance,
        }
    }
}

/// Planar rigid transform from the object frame to the world frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pose {
    pub tx: f64,
    pub ty: f64,
    /// Degrees; positive turns the object x-axis toward its y-axis.
    pub yaw: f64,
}

impl Pose {
    pub fn apply(&self, p: [f64; 2]) -> [f64; 2] {
        let (s, c) = self.yaw.to_radians().sin_cos();
        [c * p[0] - s * p[1] + self.tx, s * p[0] + c * p[1] + self.ty]
    }

    pub fn inverse_apply(&self, w: [f64; 2]) -> [f64; 2] {
        let (s, c) = self.yaw.to_radians().sin_cos();
        let (dx, dy) = (w[0] - self.tx, w[1] - self.ty);
        [c * dx + s * dy, -s * dx + c * dy]
    }
}

/// Identity and physical properties of the object in a scene.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectInfo {
    pub id: String,
    pub longest_side: f64,
    pub mass: f64,
}

/// A settled object under the camera.
///
/// The posed height field is stored on the 16-bit depth lattice, so the depth
/// image written to disk reproduces the simulator's input exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    scene_id: String,
    scene_index: usize,
    object: ObjectInfo,
    pose: Pose,
    camera: Camera,
    seed: u64,
    depth_codes: Grid<u16>,
    heights: Grid<f64>,
}

fn code_to_height(code: u16, camera: &Camera) -> f64 {
    if code == DEPTH_LEVELS {
        0.0
    } else {
        camera.distance - code as f64 * camera.depth_step()
    }
}

fn height_to_code(height: f64, camera: &Camera) -> u16 {
    let depth = (camera.distance - height).clamp(0.0, camera.distance);
    (depth / camera.depth_step())
        .round()
        .clamp(0.0, DEPTH_LEVELS as f64) as u16
}

pub fn scene_id_for(object_id: &str, scene_index: usize) -> String {
    format!("{object_id}_{scene_index}")
}

impl Scene {
    /// Poses `model` and samples its height field at every pixel center.
    pub fn place(
        model: &ObjectModel,
        pose: Pose,
        camera: Camera,
        scene_index: usize,
        seed: u64,
    ) -> Result<Scene> {
        camera.validate()?;
        if !footprint_fits(model, &pose, &camera) {
            return Err(Error::DoesNotFit {
                id: model.id().to_string(),
            });
        }
        if model.extents().z >= camera.distance {
            return Err(Error::InvalidConfig(format!(
                "object {} is taller than the camera distance",
                model.id()
            )));
        }
        let depth_codes = Grid::from_fn(camera.height, camera.width, |r, c| {
            let w = camera.pixel_to_world(c as f64 + 0.5, r as f64 + 0.5);
            let p = pose.inverse_apply(w);
            height_to_code(model.height_at(p[0], p[1]), &camera)
        });
        Self::from_depth_codes(
            scene_id_for(model.id(), scene_index),
            scene_index,
            ObjectInfo {
                id: model.id().to_string(),
                longest_side: model.longest_side(),
                mass: model.mass(),
            },
            pose,
            camera,
            seed,
            depth_codes,
        )
    }

    /// Rebuilds a scene from its recorded metadata and depth image.
    pub fn from_depth_codes(
        scene_id: String,
        scene_index: usize,
        object: ObjectInfo,
        pose: Pose,
        camera: Camera,
        seed: u64,
        depth_codes: Grid<u16>,
    ) -> Result<Scene> {
        camera.validate()?;
        if depth_codes.rows() != camera.height || depth_codes.cols() != camera.width {
            return Err(Error::InvalidConfig(format!(
                "depth image is {}x{}, camera is {}x{}",
                depth_codes.cols(),
                depth_codes.rows(),
                camera.width,
                camera.height
            )));
        }
        let heights = depth_codes.map(|c| code_to_height(c, &camera));
        Ok(Scene {
            scene_id,
            scene_index,
            object,
            pose,
            camera,
            seed,
            depth_codes,
            heights,
        })
    }

    pub fn scene_id(&self) -> &str {
        &self.scene_id
    }

    pub fn scene_index(&self) -> usize {
        self.scene_index
    }

    pub fn object(&self) -> &ObjectInfo {
        &self.object
    }

    pub fn pose(&self) -> Pose {
        self.pose
    }

    pub fn camera(&self) -> &Camera {
        &self.camera
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Posed heights on the image grid, meters above the table.
    pub fn heights(&self) -> &Grid<f64> {
        &self.heights
    }

    pub fn depth_codes(&self) -> &Grid<u16> {
        &self.depth_codes
    }

    /// Height of the pixel containing `(px, py)`; the table outside the image.
    #[inline]
    pub fn height_at_pixel(&self, px: f64, py: f64) -> f64 {
        if px < 0.0 || py < 0.0 {
            return 0.0;
        }
        self.heights
            .get_signed(py.floor() as isize, px.floor() as isize)
            .unwrap_or(0.0)
    }

    /// Central-difference height gradient at a pixel, meters per meter. Pixels
    /// outside the image count as table.
    #[inline]
    pub fn gradient(&self, row: usize, col: usize) -> [f64; 2] {
        let (r, c) = (row as isize, col as isize);
        let h = |r: isize, c: isize| self.heights.get_signed(r, c).unwrap_or(0.0);
        let k = 2.0 * self.camera.resolution;
        [
            (h(r, c + 1) - h(r, c - 1)) / k,
            (h(r + 1, c) - h(r - 1, c)) / k,
        ]
    }

    pub fn contains_pixel(&self, px: f64, py: f64) -> bool {
        px >= 0.0 && py >= 0.0 && px < self.camera.width as f64 && py < self.camera.height as f64
    }

    pub fn metadata(&self) -> KvWriter {
        let mut kv = KvWriter::new();
        kv.put("scene_id", &self.scene_id)
            .put("scene_index", self.scene_index)
            .put("object_id", &self.object.id)
            .put("object_longest_side", self.object.longest_side)
            .put("object_mass", self.object.mass)
            .put("seed", self.seed)
            .put("pose_tx", self.pose.tx)
            .put("pose_ty", self.pose.ty)
            .put("pose_yaw", self.pose.yaw)
            .put("camera_width", self.camera.width)
            .put("camera_height", self.camera.height)
            .put("camera_resolution", self.camera.resolution)
            .put("camera_distance", self.camera.distance);
        kv
    }

    /// Writes `depth.pgm`, `mask.pgm` and the scene keys of `scene.txt`
    /// followed by `extra`.
    pub fn write(&self, dir: &Path, extra: KvWriter) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        netpbm::write_pgm(&dir.join("depth.pgm"), &self.depth_codes, DEPTH_LEVELS)?;
        let mask = render_mask(self).0.map(u16::from);
        netpbm::write_pgm(&dir.join("mask.pgm"), &mask, 1)?;
        let mut text = self.metadata().finish();
        text.push_str(&extra.finish());
        let p = dir.join("scene.txt");
        std::fs::write(&p, text).map_err(|e| Error::io(&p, e))
    }

    /// Reads a scene directory written by [`Scene::write`].
    pub fn read(dir: &Path) -> Result<(Scene, KvDoc)> {
        let doc = KvDoc::read(&dir.join("scene.txt"))?;
        let object = ObjectInfo {
            id: doc.str("object_id")?.to_string(),
            longest_side: doc.get("object_longest_side")?,
            mass: doc.get("object_mass")?,
        };
        validate_id(&object.id).map_err(|e| doc.error("object_id", e.to_string()))?;
        let pose = Pose {
            tx: doc.get("pose_tx")?,
            ty: doc.get("pose_ty")?,
            yaw: doc.get("pose_yaw")?,
        };
        let camera = Camera {
            width: doc.get("camera_width")?,
            height: doc.get("camera_height")?,
            resolution: doc.get("camera_resolution")?,
            distance: doc.get("camera_distance")?,
        };
        let depth_path = dir.join("depth.pgm");
        let (maxval, codes) = netpbm::read_pgm(&depth_path)?;
        if maxval != DEPTH_LEVELS {
            return Err(Error::parse(
                &depth_path,
                0,
                format!("expected maxval {DEPTH_LEVELS}, got {maxval}"),
            ));
        }
        let scene = Scene::from_depth_codes(
            doc.str("scene_id")?.to_string(),
            doc.get("scene_index")?,
            object,
            pose,
            camera,
            doc.get("seed")?,
            codes,
        )
        .map_err(|e| Error::parse(&depth_path, 0, e.to_string()))?;
        Ok((scene, doc))
    }
}

/// Whether every occupied cell of `model` lands inside the frame under `pose`.
pub fn footprint_fits(model: &ObjectModel, pose: &Pose, camera: &Camera) -> bool {
    let [hx, hy] = camera.half_extent();
    model.footprint_corners().into_iter().all(|p| {
        let w = pose.apply(p);
        w[0] >= -hx && w[0] <= hx && w[1] >= -hy && w[1] <= hy
    })
}

/// Attempts at drawing a yaw for which a placement exists.
pub const SETTLE_ATTEMPTS: usize = 64;

/// Random planar resting pose: yaw uniform in `(-180, 180]`, translation
/// uniform over the placements that keep the footprint in frame.
pub fn settle<R: Rng + ?Sized>(
    model: &ObjectModel,
    rng: &mut R,
    camera: Camera,
    scene_index: usize,
    seed: u64,
) -> Result<Scene> {
    let corners = model.footprint_corners();
    let [hx, hy] = camera.half_extent();
    for _ in 0..SETTLE_ATTEMPTS {
        let yaw = 180.0 - 360.0 * rng.random::<f64>();
        let rot = Pose {
            tx: 0.0,
            ty: 0.0,
            yaw,
        };
        let (mut x0, mut x1, mut y0, mut y1) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
        for p in &corners {
            let w = rot.apply(*p);
            x0 = x0.min(w[0]);
            x1 = x1.max(w[0]);
            y0 = y0.min(w[1]);
            y1 = y1.max(w[1]);
        }
        let (lo_x, hi_x) = (-hx - x0, hx - x1);
        let (lo_y, hi_y) = (-hy - y0, hy - y1);
        if lo_x > hi_x || lo_y > hi_y {
            continue;
        }
        let tx = lo_x + (hi_x - lo_x) * rng.random::<f64>();
        let ty = lo_y + (hi_y - lo_y) * rng.random::<f64>();
        let pose = Pose { tx, ty, yaw };
        if !footprint_fits(model, &pose, &camera) {
            // Rounding at the frame boundary; draw again.
            continue;
        }
        return Scene::place(model, pose, camera, scene_index, seed);
    }
    Err(Error::DoesNotFit {
        id: model.id().to_string(),
    })
}

/// Depth from the camera, meters, 16-bit quantized.
#[derive(Debug, Clone, PartialEq)]
pub struct DepthImage {
    pub codes: Grid<u16>,
    pub distance: f64,
}

impl DepthImage {
    pub fn meters(&self) -> Grid<f64> {
        let step = self.distance / DEPTH_LEVELS as f64;
        self.codes.map(|c| {
            if c == DEPTH_LEVELS {
                self.distance
            } else {
                c as f64 * step
            }
        })
    }
}

/// Object (1) versus background (0).
#[derive(Debug, Clone, PartialEq)]
pub struct MaskImage(pub Grid<u8>);

pub fn render_depth(scene: &Scene) -> DepthImage {
    DepthImage {
        codes: scene.depth_codes.clone(),
        distance: scene.camera.distance,
    }
}

pub fn render_mask(scene: &Scene) -> MaskImage {
    MaskImage(scene.heights.map(|h| u8::from(h > 0.0)))
}
