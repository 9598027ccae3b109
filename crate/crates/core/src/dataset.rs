//! Dataset layout on disk, annotation and prediction files, and generation.
//!
//! ```text
//! <out>/dataset.json                 generation settings
//! <out>/manifest.txt                 one record per scene
//! <out>/<object_id>/<k>/depth.pgm    16-bit depth, meters from the camera
//! <out>/<object_id>/<k>/mask.pgm     object mask, maxval 1
//! <out>/<object_id>/<k>/scene.txt    key=value scene record
//! <out>/<object_id>/<k>/grasps.txt   x;y;theta;opening;jaw_size per line
//! ```

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grasp::Grasp;
use crate::kv::{KvDoc, KvWriter};
use crate::object::{rescale_object, ObjectModel};
use crate::pipeline::{annotate_scene, AnnotationEntry, AnnotationSet, RunConfig};
use crate::scene::{scene_id_for, settle, Scene};
use crate::seed::{scene_seed, sha256_hex};
use crate::sgt::GripperConfig;

pub const MANIFEST: &str = "manifest.txt";
pub const CONFIG: &str = "dataset.json";

fn fmt_f64(v: f64) -> String {
    format!("{v}")
}

fn parse_field(path: &Path, line: usize, name: &str, tok: &str) -> Result<f64> {
    let v: f64 = tok
        .trim()
        .parse()
        .map_err(|_| Error::parse(path, line, format!("field {name}: not a number: {tok:?}")))?;
    if !v.is_finite() {
        return Err(Error::parse(
            path,
            line,
            format!("field {name}: not finite"),
        ));
    }
    Ok(v)
}

fn check_theta(path: &Path, line: usize, theta: f64) -> Result<()> {
    if theta > -90.0 && theta <= 90.0 {
        Ok(())
    } else {
        Err(Error::parse(
            path,
            line,
            format!("field theta: {theta} outside (-90, 90]"),
        ))
    }
}

/// Serializes annotations, one line per (grasp, jaw size).
pub fn encode_annotations(entries: &[AnnotationEntry], resolution: f64) -> String {
    let mut out = String::new();
    for e in entries {
        let g = &e.grasp;
        for &jaw in &e.jaw_sizes {
            let _ = writeln!(
                out,
                "{};{};{};{};{}",
                fmt_f64(g.x()),
                fmt_f64(g.y()),
                fmt_f64(g.theta()),
                fmt_f64(g.w()),
                fmt_f64(jaw / resolution)
            );
        }
    }
    out
}

/// Parses `grasps.txt`. Consecutive lines with the same rectangle form one
/// entry; jaw sizes must match the gripper's.
pub fn decode_annotations(
    path: &Path,
    text: &str,
    resolution: f64,
    gripper: &GripperConfig,
) -> Result<Vec<AnnotationEntry>> {
    let mut entries: Vec<AnnotationEntry> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = raw.split(';').collect();
        if fields.len() != 5 {
            return Err(Error::parse(
                path,
                line,
                format!(
                    "expected 5 fields x;y;theta;opening;jaw_size, found {}",
                    fields.len()
                ),
            ));
        }
        let names = ["x", "y", "theta", "opening", "jaw_size"];
        let mut v = [0.0; 5];
        for k in 0..5 {
            v[k] = parse_field(path, line, names[k], fields[k])?;
        }
        let [x, y, theta, opening, jaw_px] = v;
        check_theta(path, line, theta)?;
        let jaw = gripper.resolve_jaw(jaw_px * resolution).map_err(|_| {
            Error::parse(
                path,
                line,
                format!("field jaw_size: {jaw_px} px is not a configured jaw size"),
            )
        })?;
        let grasp = Grasp::new(x, y, opening, jaw_px, theta)
            .map_err(|e| Error::parse(path, line, e.to_string()))?;
        match entries.last_mut() {
            Some(last)
                if last.grasp.x() == x
                    && last.grasp.y() == y
                    && last.grasp.theta() == theta
                    && last.grasp.w() == opening =>
            {
                if last.jaw_sizes.contains(&jaw) {
                    return Err(Error::parse(
                        path,
                        line,
                        "duplicate jaw size for the same grasp",
                    ));
                }
                last.jaw_sizes.push(jaw);
            }
            _ => entries.push(AnnotationEntry {
                grasp,
                jaw_sizes: vec![jaw],
            }),
        }
    }
    Ok(entries)
}

/// A grasp prediction for a named scene; `grasp.h()` is the jaw size in pixels.
#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub scene_id: String,
    pub grasp: Grasp,
    /// 1-based line in the file it came from, 0 if constructed in memory.
    pub line: usize,
}

pub fn encode_predictions(preds: &[Prediction]) -> String {
    let mut out = String::new();
    for p in preds {
        let g = &p.grasp;
        let _ = writeln!(
            out,
            "{};{};{};{};{};{}",
            p.scene_id,
            fmt_f64(g.x()),
            fmt_f64(g.y()),
            fmt_f64(g.theta()),
            fmt_f64(g.w()),
            fmt_f64(g.h())
        );
    }
    out
}

pub fn write_predictions(path: &Path, preds: &[Prediction]) -> Result<()> {
    std::fs::write(path, encode_predictions(preds)).map_err(|e| Error::io(path, e))
}

pub fn decode_predictions(path: &Path, text: &str) -> Result<Vec<Prediction>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = raw.split(';').collect();
        if fields.len() != 6 {
            return Err(Error::parse(
                path,
                line,
                format!(
                    "expected 6 fields scene_id;x;y;theta;opening;jaw_size, found {}",
                    fields.len()
                ),
            ));
        }
        let scene_id = fields[0].trim();
        if scene_id.is_empty() {
            return Err(Error::parse(path, line, "field scene_id: empty"));
        }
        let names = ["x", "y", "theta", "opening", "jaw_size"];
        let mut v = [0.0; 5];
        for k in 0..5 {
            v[k] = parse_field(path, line, names[k], fields[k + 1])?;
        }
        let [x, y, theta, opening, jaw] = v;
        check_theta(path, line, theta)?;
        let grasp = Grasp::new(x, y, opening, jaw, theta)
            .map_err(|e| Error::parse(path, line, e.to_string()))?;
        out.push(Prediction {
            scene_id: scene_id.to_string(),
            grasp,
            line,
        });
    }
    Ok(out)
}

pub fn read_predictions(path: &Path) -> Result<Vec<Prediction>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    decode_predictions(path, &text)
}

/// One line of the manifest.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ManifestRecord {
    Scene {
        object_id: String,
        scene_id: String,
        scene_index: usize,
        seed: u64,
        annotations: usize,
        warning: bool,
        digest: String,
    },
    Failed {
        object_id: String,
        scene_index: usize,
        message: String,
    },
}

impl ManifestRecord {
    fn encode(&self) -> String {
        match self {
            ManifestRecord::Scene {
                object_id,
                scene_id,
                scene_index,
                seed,
                annotations,
                warning,
                digest,
            } => format!(
                "scene;{object_id};{scene_id};{scene_index};{seed};{annotations};{};{digest}",
                u8::from(*warning)
            ),
            ManifestRecord::Failed {
                object_id,
                scene_index,
                message,
            } => format!(
                "failed;{object_id};{scene_index};{}",
                message.replace(['\n', ';'], " ")
            ),
        }
    }

    fn decode(path: &Path, line: usize, text: &str) -> Result<Self> {
        let f: Vec<&str> = text.split(';').collect();
        let bad = |msg: &str| Error::parse(path, line, msg.to_string());
        match f.first().copied() {
            Some("scene") if f.len() == 8 => Ok(ManifestRecord::Scene {
                object_id: f[1].to_string(),
                scene_id: f[2].to_string(),
                scene_index: f[3].parse().map_err(|_| bad("bad scene index"))?,
                seed: f[4].parse().map_err(|_| bad("bad seed"))?,
                annotations: f[5].parse().map_err(|_| bad("bad annotation count"))?,
                warning: match f[6] {
                    "0" => false,
                    "1" => true,
                    _ => return Err(bad("warning flag must be 0 or 1")),
                },
                digest: f[7].to_string(),
            }),
            Some("failed") if f.len() >= 4 => Ok(ManifestRecord::Failed {
                object_id: f[1].to_string(),
                scene_index: f[2].parse().map_err(|_| bad("bad scene index"))?,
                message: f[3..].join(";"),
            }),
            _ => Err(bad("unrecognized manifest record")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Manifest {
    pub records: Vec<ManifestRecord>,
}

impl Manifest {
    pub fn encode(&self) -> String {
        let mut out = String::from("# graspgen manifest v1\n");
        for r in &self.records {
            out.push_str(&r.encode());
            out.push('\n');
        }
        out
    }

    pub fn digest(&self) -> String {
        sha256_hex(&[self.encode().as_bytes()])
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut records = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            records.push(ManifestRecord::decode(path, i + 1, line)?);
        }
        Ok(Manifest { records })
    }

    pub fn scene_count(&self) -> usize {
        self.records
            .iter()
            .filter(|r| matches!(r, ManifestRecord::Scene { .. }))
            .count()
    }

    pub fn failures(&self) -> impl Iterator<Item = &ManifestRecord> {
        self.records
            .iter()
            .filter(|r| matches!(r, ManifestRecord::Failed { .. }))
    }
}

fn annotation_metadata(set: &AnnotationSet, cfg: &RunConfig) -> KvWriter {
    let a = &cfg.annotation;
    let mut kv = KvWriter::new();
    kv.put("tool_version", &set.tool_version)
        .put("annotation_seed", set.seed)
        .put("annotation_candidates", set.candidates)
        .put("annotation_screened", set.screened)
        .put("annotation_screening_jaw", a.screening_jaw)
        .put("annotation_count", set.entries.len())
        .put("annotation_lines", set.line_count())
        .put("annotation_warning", u8::from(set.warning()))
        .put("gripper_max_opening", a.gripper.max_opening)
        .put_list("gripper_jaw_sizes", &a.gripper.jaw_sizes)
        .put("gripper_jaw_thickness", a.gripper.jaw_thickness)
        .put("gripper_insertion_depth", a.gripper.insertion_depth)
        .put("gripper_friction_mu", a.gripper.friction_mu)
        .put("gripper_grip_force", a.gripper.grip_force)
        .put("gripper_lift_safety_factor", a.gripper.lift_safety_factor)
        .put("gripper_max_approach_tilt", a.gripper.max_approach_tilt)
        .put("dedup_center_thresh", a.dedup.center_thresh)
        .put("dedup_angle_thresh", a.dedup.angle_thresh)
        .put("dedup_opening_thresh", a.dedup.opening_thresh);
    kv
}

fn scene_dir(out: &Path, object_id: &str, k: usize) -> PathBuf {
    out.join(object_id).join(k.to_string())
}

const SCENE_FILES: [&str; 4] = ["depth.pgm", "mask.pgm", "scene.txt", "grasps.txt"];

fn digest_scene_dir(dir: &Path) -> Result<String> {
    let mut blobs = Vec::new();
    for name in SCENE_FILES {
        let p = dir.join(name);
        blobs.push(std::fs::read(&p).map_err(|e| Error::io(&p, e))?);
    }
    let refs: Vec<&[u8]> = blobs.iter().map(Vec::as_slice).collect();
    Ok(sha256_hex(&refs))
}

/// Builds, annotates and writes one scene.
pub fn generate_scene(
    object: &ObjectModel,
    k: usize,
    cfg: &RunConfig,
    out: &Path,
) -> Result<ManifestRecord> {
    let seed = scene_seed(cfg.master_seed, object.id(), k);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let model = rescale_object(object, &mut rng, &cfg.rescale);
    let camera = cfg.camera.camera_for(model.longest_side());
    let scene = settle(&model, &mut rng, camera, k, seed)?;
    let annotation_seed = rng.next_u64();
    let set = annotate_scene(&scene, &cfg.annotation, annotation_seed)?;
    let dir = scene_dir(out, object.id(), k);
    scene.write(&dir, annotation_metadata(&set, cfg))?;
    let grasps = dir.join("grasps.txt");
    std::fs::write(&grasps, encode_annotations(&set.entries, camera.resolution))
        .map_err(|e| Error::io(&grasps, e))?;
    Ok(ManifestRecord::Scene {
        object_id: object.id().to_string(),
        scene_id: scene.scene_id().to_string(),
        scene_index: k,
        seed,
        annotations: set.entries.len(),
        warning: set.warning(),
        digest: digest_scene_dir(&dir)?,
    })
}

/// Generates every scene of every object into `out` and writes the manifest.
///
/// Scene failures are recorded in the manifest rather than aborting the run.
pub fn generate_dataset(objects: &[ObjectModel], cfg: &RunConfig, out: &Path) -> Result<Manifest> {
    cfg.validate()?;
    if objects.is_empty() {
        return Err(Error::InvalidConfig("object pool is empty".into()));
    }
    let mut sorted: Vec<&ObjectModel> = objects.iter().collect();
    sorted.sort_by(|a, b| a.id().cmp(b.id()));
    if let Some(w) = sorted.windows(2).find(|w| w[0].id() == w[1].id()) {
        return Err(Error::InvalidConfig(format!(
            "duplicate object id {:?}",
            w[0].id()
        )));
    }
    std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let jobs: Vec<(&ObjectModel, usize)> = sorted
        .iter()
        .flat_map(|o| (0..cfg.scenes_per_object).map(move |k| (*o, k)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers.max(1))
        .build()
        .map_err(|e| Error::InvalidConfig(format!("cannot start workers: {e}")))?;
    let results: Vec<Result<ManifestRecord>> = pool.install(|| {
        jobs.par_iter()
            .map(|(o, k)| generate_scene(o, *k, cfg, out))
            .collect()
    });
    let mut records = Vec::with_capacity(results.len());
    for ((o, k), r) in jobs.iter().zip(results) {
        match r {
            Ok(rec) => records.push(rec),
            Err(Error::Io { path, source }) => return Err(Error::Io { path, source }),
            Err(e) => {
                log::warn!("object {} scene {k}: {e}", o.id());
                records.push(ManifestRecord::Failed {
                    object_id: o.id().to_string(),
                    scene_index: *k,
                    message: e.to_string(),
                });
            }
        }
    }
    let manifest = Manifest { records };
    let cfg_path = out.join(CONFIG);
    let json = serde_json::to_string_pretty(cfg).expect("config serializes");
    std::fs::write(&cfg_path, json + "\n").map_err(|e| Error::io(&cfg_path, e))?;
    let man_path = out.join(MANIFEST);
    std::fs::write(&man_path, manifest.encode()).map_err(|e| Error::io(&man_path, e))?;
    Ok(manifest)
}

/// A scene loaded back from disk with its annotations.
#[derive(Debug, Clone)]
pub struct DatasetScene {
    pub scene: Scene,
    pub annotations: AnnotationSet,
    pub dir: PathBuf,
}

#[derive(Debug, Clone)]
pub struct Dataset {
    pub root: PathBuf,
    pub config: RunConfig,
    pub manifest: Manifest,
    /// Keyed by scene id.
    pub scenes: BTreeMap<String, DatasetScene>,
}

impl Dataset {
    pub fn gripper(&self) -> &GripperConfig {
        &self.config.annotation.gripper
    }

    /// Scene id → rectangles, for the rectangle metric.
    pub fn ground_truth(&self) -> BTreeMap<String, Vec<Grasp>> {
        self.scenes
            .iter()
            .map(|(id, s)| {
                (
                    id.clone(),
                    s.annotations.rectangles(s.scene.camera().resolution),
                )
            })
            .collect()
    }
}

pub fn read_scene_dir(dir: &Path, gripper: &GripperConfig) -> Result<DatasetScene> {
    let (scene, doc) = Scene::read(dir)?;
    let grasps_path = dir.join("grasps.txt");
    let text = std::fs::read_to_string(&grasps_path).map_err(|e| Error::io(&grasps_path, e))?;
    let entries = decode_annotations(&grasps_path, &text, scene.camera().resolution, gripper)?;
    let annotations = AnnotationSet {
        scene_id: scene.scene_id().to_string(),
        entries,
        seed: doc.get("annotation_seed")?,
        candidates: doc.get("annotation_candidates")?,
        screened: doc.get("annotation_screened")?,
        tool_version: doc.str("tool_version")?.to_string(),
    };
    let count: usize = doc.get("annotation_count")?;
    if count != annotations.entries.len() {
        return Err(doc.error(
            "annotation_count",
            format!(
                "records {count} annotations, grasps.txt has {}",
                annotations.entries.len()
            ),
        ));
    }
    Ok(DatasetScene {
        scene,
        annotations,
        dir: dir.to_path_buf(),
    })
}

/// Reads one scene directory on its own, taking the gripper from the
/// settings recorded in its `scene.txt`.
pub fn read_scene_standalone(dir: &Path) -> Result<DatasetScene> {
    let doc = KvDoc::read(&dir.join("scene.txt"))?;
    let gripper = GripperConfig {
        max_opening: doc.get("gripper_max_opening")?,
        jaw_sizes: doc.list("gripper_jaw_sizes")?,
        jaw_thickness: doc.get("gripper_jaw_thickness")?,
        insertion_depth: doc.get("gripper_insertion_depth")?,
        friction_mu: doc.get("gripper_friction_mu")?,
        grip_force: doc.get("gripper_grip_force")?,
        lift_safety_factor: doc.get("gripper_lift_safety_factor")?,
        max_approach_tilt: doc.get("gripper_max_approach_tilt")?,
    };
    gripper
        .validate()
        .map_err(|e| doc.error("gripper_jaw_sizes", e.to_string()))?;
    read_scene_dir(dir, &gripper)
}

pub fn read_config(root: &Path) -> Result<RunConfig> {
    let p = root.join(CONFIG);
    let text = std::fs::read_to_string(&p).map_err(|e| Error::io(&p, e))?;
    let cfg: RunConfig =
        serde_json::from_str(&text).map_err(|e| Error::parse(&p, e.line(), e.to_string()))?;
    cfg.validate()?;
    Ok(cfg)
}

/// Loads every scene listed in the manifest.
pub fn read_dataset(root: &Path) -> Result<Dataset> {
    let config = read_config(root)?;
    let manifest = Manifest::read(&root.join(MANIFEST))?;
    let mut scenes = BTreeMap::new();
    for r in &manifest.records {
        if let ManifestRecord::Scene {
            object_id,
            scene_id,
            scene_index,
            ..
        } = r
        {
            if *scene_id != scene_id_for(object_id, *scene_index) {
                return Err(Error::parse(
                    root.join(MANIFEST),
                    0,
                    format!("inconsistent scene id {scene_id}"),
                ));
            }
            let ds = read_scene_dir(
                &scene_dir(root, object_id, *scene_index),
                &config.annotation.gripper,
            )?;
            scenes.insert(scene_id.clone(), ds);
        }
    }
    Ok(Dataset {
        root: root.to_path_buf(),
        config,
        manifest,
        scenes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const RES: f64 = 0.0005;

    fn entry(x: f64, sizes: &[f64]) -> AnnotationEntry {
        AnnotationEntry {
            grasp: Grasp::new(x, 20.25, 61.5, sizes[0] / RES, -33.0).unwrap(),
            jaw_sizes: sizes.to_vec(),
        }
    }

    #[test]
    fn annotations_round_trip() {
        let entries = vec![entry(10.0, &[0.01, 0.02, 0.06]), entry(11.125, &[0.02])];
        let text = encode_annotations(&entries, RES);
        assert_eq!(text.lines().count(), 4);
        let back =
            decode_annotations(Path::new("g.txt"), &text, RES, &GripperConfig::default()).unwrap();
        assert_eq!(back, entries);
    }

    #[test]
    fn annotation_errors_name_lines() {
        let gr = GripperConfig::default();
        let p = Path::new("g.txt");
        let e = decode_annotations(p, "1;2;3;4;20\n1;2;3;4\n", RES, &gr)
            .unwrap_err()
            .to_string();
        assert!(e.contains("g.txt:2") && e.contains("5 fields"), "{e}");
        let e = decode_annotations(p, "1;2;3;4;50\n", RES, &gr)
            .unwrap_err()
            .to_string();
        assert!(e.contains("jaw_size"), "{e}");
        let e = decode_annotations(p, "1;2;250;4;20\n", RES, &gr)
            .unwrap_err()
            .to_string();
        assert!(e.contains("theta"), "{e}");
        let e = decode_annotations(p, "1;2;3;-4;20\n", RES, &gr)
            .unwrap_err()
            .to_string();
        assert!(e.contains("g.txt:1"), "{e}");
    }

    #[test]
    fn predictions_normalize_on_write_and_reject_on_read() {
        let p = Prediction {
            scene_id: "obj_0".into(),
            grasp: Grasp::new(1.0, 2.0, 3.0, 4.0, 250.0).unwrap(),
            line: 0,
        };
        let text = encode_predictions(std::slice::from_ref(&p));
        assert_eq!(text, "obj_0;1;2;70;3;4\n");
        let back = decode_predictions(Path::new("p.txt"), &text).unwrap();
        assert_eq!(back[0].grasp, p.grasp);
        assert_eq!(back[0].line, 1);
        let err = decode_predictions(Path::new("p.txt"), "obj_0;1;2;250;3;4\n").unwrap_err();
        assert!(err.to_string().contains("theta"));
        let err = decode_predictions(Path::new("p.txt"), "\nobj_0;1;2;3\n").unwrap_err();
        assert!(err.to_string().contains("p.txt:2"), "{err}");
    }

    #[test]
    fn standalone_scene_read_matches_dataset_read() {
        let pool = crate::shapes::fixture_pool(0.001).unwrap();
        let cfg = RunConfig {
            scenes_per_object: 1,
            ..RunConfig::default()
        };
        let out = tempfile::tempdir().unwrap();
        let mut small = cfg.clone();
        small.annotation.sampler.candidates = 300;
        generate_dataset(&pool[..1], &small, out.path()).unwrap();
        let ds = read_dataset(out.path()).unwrap();
        let (_, a) = ds.scenes.iter().next().unwrap();
        let b = read_scene_standalone(&a.dir).unwrap();
        assert_eq!(a.annotations, b.annotations);
        assert_eq!(a.scene, b.scene);
    }

    #[test]
    fn manifest_round_trip() {
        let m = Manifest {
            records: vec![
                ManifestRecord::Scene {
                    object_id: "a".into(),
                    scene_id: "a_0".into(),
                    scene_index: 0,
                    seed: 42,
                    annotations: 3,
                    warning: false,
                    digest: "00ff".into(),
                },
                ManifestRecord::Failed {
                    object_id: "b".into(),
                    scene_index: 1,
                    message: "too big".into(),
                },
            ],
        };
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join(MANIFEST);
        std::fs::write(&p, m.encode()).unwrap();
        assert_eq!(Manifest::read(&p).unwrap(), m);
        assert_eq!(m.scene_count(), 1);
        assert_eq!(m.failures().count(), 1);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn prediction_files_round_trip(
                raw in proptest::collection::vec(
                    (0usize..4, -1e3..1e3f64, -1e3..1e3f64, 1e-3..300.0f64, 1e-3..80.0f64, -720.0..720.0f64),
                    0..20,
                )
            ) {
                let preds: Vec<Prediction> = raw
                    .iter()
                    .enumerate()
                    .map(|(i, &(s, x, y, w, h, t))| Prediction {
                        scene_id: format!("obj-{s}_1"),
                        grasp: Grasp::new(x, y, w, h, t).unwrap(),
                        line: i + 1,
                    })
                    .collect();
                let text = encode_predictions(&preds);
                prop_assert_eq!(decode_predictions(Path::new("p"), &text).unwrap(), preds);
            }
        }
    }
}
