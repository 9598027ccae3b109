//! Annotation generation: sample, screen, sweep jaw sizes, deduplicate.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grasp::{angle_diff, Grasp};
use crate::object::RescaleConfig;
use crate::sampler::{
    edge_map, probability_map, CandidateStream, GripperRanges, ProbabilityMap, SamplerConfig,
};
use crate::scene::{CameraConfig, Scene};
use crate::sgt::{simulate_grasp, trial_all_jaw_sizes, GripperConfig};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Thresholds under which two successful grasps count as the same one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DedupConfig {
    /// Meters.
    pub center_thresh: f64,
    /// Degrees.
    pub angle_thresh: f64,
    /// Meters.
    pub opening_thresh: f64,
}

impl Default for DedupConfig {
    fn default() -> Self {
        DedupConfig {
            center_thresh: 0.01,
            angle_thresh: 15.0,
            opening_thresh: 0.01,
        }
    }
}

impl DedupConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("center_thresh", self.center_thresh),
            ("angle_thresh", self.angle_thresh),
            ("opening_thresh", self.opening_thresh),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidConfig(format!(
                    "dedup {name} must be positive, got {v}"
                )));
            }
        }
        Ok(())
    }

    /// Whether `b` duplicates `a` in an image with the given meters per pixel.
    pub fn is_duplicate(&self, a: &Grasp, b: &Grasp, resolution: f64) -> bool {
        let center = (a.x() - b.x()).hypot(a.y() - b.y()) * resolution;
        center < self.center_thresh
            && angle_diff(a.theta(), b.theta()) < self.angle_thresh
            && (a.w() - b.w()).abs() * resolution < self.opening_thresh
    }
}

/// Deterministic sort key: x, then y, then θ, then opening and jaw size.
fn dedup_order(a: &Grasp, b: &Grasp) -> std::cmp::Ordering {
    a.x()
        .total_cmp(&b.x())
        .then(a.y().total_cmp(&b.y()))
        .then(a.theta().total_cmp(&b.theta()))
        .then(a.w().total_cmp(&b.w()))
        .then(a.h().total_cmp(&b.h()))
}

/// Greedy keep-first deduplication; returns kept indices in sorted order.
pub fn dedup_indices(grasps: &[Grasp], cfg: &DedupConfig, resolution: f64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..grasps.len()).collect();
    order.sort_by(|&i, &j| dedup_order(&grasps[i], &grasps[j]));
    let mut kept: Vec<usize> = Vec::new();
    for i in order {
        if !kept
            .iter()
            .any(|&k| cfg.is_duplicate(&grasps[k], &grasps[i], resolution))
        {
            kept.push(i);
        }
    }
    kept
}

pub fn dedup(grasps: &[Grasp], cfg: &DedupConfig, resolution: f64) -> Vec<Grasp> {
    dedup_indices(grasps, cfg, resolution)
        .into_iter()
        .map(|i| grasps[i])
        .collect()
}

/// Everything that shapes the annotations of one scene.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnotationConfig {
    pub sampler: SamplerConfig,
    pub gripper: GripperConfig,
    pub dedup: DedupConfig,
    /// Jaw size used for the first screening pass, meters.
    pub screening_jaw: f64,
}

impl Default for AnnotationConfig {
    fn default() -> Self {
        AnnotationConfig {
            sampler: SamplerConfig::default(),
            gripper: GripperConfig::default(),
            dedup: DedupConfig::default(),
            screening_jaw: 0.02,
        }
    }
}

impl AnnotationConfig {
    pub fn validate(&self) -> Result<()> {
        self.sampler.validate()?;
        self.gripper.validate()?;
        self.dedup.validate()?;
        self.gripper.resolve_jaw(self.screening_jaw).map(|_| ())
    }
}

/// A successful grasp and every jaw size (meters) it works with. The grasp's
/// `h` is the smallest of those sizes, in pixels.
#[derive(Debug, Clone, PartialEq)]
pub struct AnnotationEntry {
    pub grasp: Grasp,
    pub jaw_sizes: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnnotationSet {
    pub scene_id: String,
    pub entries: Vec<AnnotationEntry>,
    /// Seed the candidates were drawn with.
    pub seed: u64,
    pub candidates: usize,
    /// Candidates that passed the screening trial.
    pub screened: usize,
    pub tool_version: String,
}

impl AnnotationSet {
    /// True when no grasp survived; the scene is kept regardless.
    pub fn warning(&self) -> bool {
        self.entries.is_empty()
    }

    /// One rectangle per (grasp, jaw size), in file order.
    pub fn rectangles(&self, resolution: f64) -> Vec<Grasp> {
        self.entries
            .iter()
            .flat_map(|e| {
                e.jaw_sizes
                    .iter()
                    .map(move |&j| e.grasp.with_jaw(j / resolution).expect("positive jaw size"))
            })
            .collect()
    }

    pub fn line_count(&self) -> usize {
        self.entries.iter().map(|e| e.jaw_sizes.len()).sum()
    }
}

pub fn gripper_ranges(scene: &Scene, gripper: &GripperConfig, jaw: f64) -> GripperRanges {
    let res = scene.camera().resolution;
    GripperRanges {
        max_opening_px: gripper.max_opening / res,
        jaw_px: jaw / res,
    }
}

/// Runs the three annotation steps on one scene.
pub fn annotate_scene(scene: &Scene, cfg: &AnnotationConfig, seed: u64) -> Result<AnnotationSet> {
    cfg.validate()?;
    let res = scene.camera().resolution;
    let edges = edge_map(scene, &cfg.sampler);
    let ranges = gripper_ranges(scene, &cfg.gripper, cfg.screening_jaw);
    let map = probability_map(&edges, ranges.max_opening_px, &cfg.sampler);
    let rng = ChaCha8Rng::seed_from_u64(seed);

    // 1. candidates, screened with a single jaw size
    let mut screened = Vec::new();
    for g in CandidateStream::new(&map, rng, ranges, &cfg.sampler).take(cfg.sampler.candidates) {
        if simulate_grasp(scene, &g, cfg.screening_jaw, &cfg.gripper)?.success {
            screened.push(g);
        }
    }

    // 2. every jaw size
    let mut swept = Vec::with_capacity(screened.len());
    for g in &screened {
        let sizes = trial_all_jaw_sizes(scene, g, &cfg.gripper)?;
        if let Some(&smallest) = sizes.first() {
            swept.push(AnnotationEntry {
                grasp: g.with_jaw(smallest / res)?,
                jaw_sizes: sizes,
            });
        }
    }

    // 3. near-duplicates
    let grasps: Vec<Grasp> = swept.iter().map(|e| e.grasp).collect();
    let entries: Vec<AnnotationEntry> = dedup_indices(&grasps, &cfg.dedup, res)
        .into_iter()
        .map(|i| swept[i].clone())
        .collect();

    if entries.is_empty() {
        log::info!(
            "scene {}: no successful grasp among {} candidates",
            scene.scene_id(),
            cfg.sampler.candidates
        );
    }
    Ok(AnnotationSet {
        scene_id: scene.scene_id().to_string(),
        entries,
        seed,
        candidates: cfg.sampler.candidates,
        screened: screened.len(),
        tool_version: TOOL_VERSION.to_string(),
    })
}

/// Draws candidates from `map` and trials each at the screening jaw size
/// until `target` mutually non-duplicate successes have been found. Returns
/// the number of trials spent, or `None` if `max_trials` ran out first.
pub fn trials_to_unique_successes(
    scene: &Scene,
    map: &ProbabilityMap,
    cfg: &AnnotationConfig,
    seed: u64,
    target: usize,
    max_trials: usize,
) -> Result<Option<usize>> {
    let res = scene.camera().resolution;
    let ranges = gripper_ranges(scene, &cfg.gripper, cfg.screening_jaw);
    let stream = CandidateStream::new(map, ChaCha8Rng::seed_from_u64(seed), ranges, &cfg.sampler);
    let mut kept: Vec<Grasp> = Vec::new();
    for (i, g) in stream.take(max_trials).enumerate() {
        if simulate_grasp(scene, &g, cfg.screening_jaw, &cfg.gripper)?.success
            && !kept.iter().any(|k| cfg.dedup.is_duplicate(k, &g, res))
        {
            kept.push(g);
            if kept.len() >= target {
                return Ok(Some(i + 1));
            }
        }
    }
    Ok(None)
}

/// Full generation settings. The worker count only affects scheduling and is
/// never written to the dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub master_seed: u64,
    pub scenes_per_object: usize,
    pub annotation: AnnotationConfig,
    pub camera: CameraConfig,
    pub rescale: RescaleConfig,
    /// Cells across the longest horizontal extent when rasterizing meshes.
    pub mesh_cells: usize,
    #[serde(skip)]
    pub workers: usize,
}

pub const MAX_SCENES_PER_OBJECT: usize = 5;

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            master_seed: 0,
            scenes_per_object: MAX_SCENES_PER_OBJECT,
            annotation: AnnotationConfig::default(),
            camera: CameraConfig::default(),
            rescale: RescaleConfig::default(),
            mesh_cells: 256,
            workers: 1,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if !(1..=MAX_SCENES_PER_OBJECT).contains(&self.scenes_per_object) {
            return Err(Error::InvalidConfig(format!(
                "scenes per object must be in 1..={MAX_SCENES_PER_OBJECT}, got {}",
                self.scenes_per_object
            )));
        }
        if self.mesh_cells == 0 {
            return Err(Error::InvalidConfig("mesh cells must be positive".into()));
        }
        self.annotation.validate()?;
        self.camera.validate()?;
        self.rescale.validate()
    }
}
