//! Command implementations behind the `graspgen` binary.

pub mod args;
pub mod overlay;

use std::collections::BTreeMap;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use graspgen_core::dataset::{
    generate_dataset, read_dataset, read_predictions, read_scene_standalone, Dataset,
    ManifestRecord, Prediction,
};
use graspgen_core::object::load_object_pool;
use graspgen_core::pipeline::gripper_ranges;
use graspgen_core::sampler::{edge_map, probability_map};
use graspgen_core::{
    netpbm, rect_match, shapes, simulate_grasp, FailureReason, RectCriterionConfig, RunConfig,
};
use serde::Serialize;

use crate::args::*;

/// Input or configuration problem; exits with status 1.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct Invalid(pub String);

pub const EXIT_OK: u8 = 0;
pub const EXIT_INVALID: u8 = 1;
pub const EXIT_RUNTIME: u8 = 2;

/// Maps an error to the process exit status.
pub fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.is::<Invalid>() {
            return EXIT_INVALID;
        }
        if let Some(e) = cause.downcast_ref::<graspgen_core::Error>() {
            return if e.is_validation() {
                EXIT_INVALID
            } else {
                EXIT_RUNTIME
            };
        }
        if let Some(e) = cause.downcast_ref::<graspgen_service::ServeError>() {
            return match e {
                graspgen_service::ServeError::Dataset { source, .. } if source.is_validation() => {
                    EXIT_INVALID
                }
                _ => EXIT_RUNTIME,
            };
        }
    }
    EXIT_RUNTIME
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Generate(a) => cmd_generate(&a),
        Command::EvalRect(a) => cmd_eval_rect(&a),
        Command::EvalSgt(a) => cmd_eval_sgt(&a),
        Command::RenderOverlay(a) => cmd_render_overlay(&a),
        Command::ProbabilityMap(a) => cmd_probability_map(&a),
        Command::Serve(a) => cmd_serve(&a),
        Command::Fixtures(a) => cmd_fixtures(&a),
    }
}

pub fn run_config(a: &GenerateArgs) -> RunConfig {
    let mut cfg = RunConfig {
        master_seed: a.seed,
        scenes_per_object: a.scenes_per_object,
        mesh_cells: a.mesh_cells,
        workers: if a.workers == 0 {
            std::thread::available_parallelism()
                .map(|n| n.get())
                .unwrap_or(1)
        } else {
            a.workers
        },
        ..RunConfig::default()
    };
    cfg.annotation.sampler.candidates = a.candidates;
    cfg.annotation.gripper.max_opening = a.max_opening;
    cfg.camera.width = a.camera_width;
    cfg.camera.height = a.camera_height;
    cfg.camera.distance = a.camera_distance;
    cfg.camera.resolution = a.camera_resolution;
    cfg.camera.fit_factor = a.fit_factor;
    cfg
}

pub fn cmd_generate(a: &GenerateArgs) -> Result<()> {
    let cfg = run_config(a);
    cfg.validate()?;
    let pool = load_object_pool(&a.objects, cfg.mesh_cells)
        .with_context(|| format!("loading objects from {}", a.objects.display()))?;
    if pool.is_empty() {
        return Err(Invalid(format!(
            "no objects (*.meta or *.obj) in {}",
            a.objects.display()
        ))
        .into());
    }
    let manifest = generate_dataset(&pool, &cfg, &a.out)?;
    let annotated: usize = manifest
        .records
        .iter()
        .map(|r| match r {
            ManifestRecord::Scene { annotations, .. } => *annotations,
            ManifestRecord::Failed { .. } => 0,
        })
        .sum();
    let warnings = manifest
        .records
        .iter()
        .filter(|r| matches!(r, ManifestRecord::Scene { warning: true, .. }))
        .count();
    println!(
        "{} objects, {} scenes, {} grasps, {} scenes without grasps",
        pool.len(),
        manifest.scene_count(),
        annotated,
        warnings
    );
    println!("manifest digest: {}", manifest.digest());
    let failures: Vec<String> = manifest
        .failures()
        .map(|r| match r {
            ManifestRecord::Failed {
                object_id,
                scene_index,
                message,
            } => format!("  {object_id} scene {scene_index}: {message}"),
            ManifestRecord::Scene { .. } => unreachable!(),
        })
        .collect();
    if !failures.is_empty() {
        return Err(Invalid(format!(
            "{} scenes failed:\n{}",
            failures.len(),
            failures.join("\n")
        ))
        .into());
    }
    Ok(())
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct SceneScore {
    pub predictions: usize,
    pub hits: usize,
    pub accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RectReport {
    pub criterion: &'static str,
    pub predictions: usize,
    pub matched: usize,
    pub accuracy: f64,
    pub angle_thresh: f64,
    pub iou_thresh: f64,
    /// Scenes that were predicted on but have no annotations; those
    /// predictions count as misses.
    pub empty_ground_truth: Vec<String>,
    pub scenes: BTreeMap<String, SceneScore>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SgtReport {
    pub criterion: &'static str,
    pub predictions: usize,
    pub successes: usize,
    pub accuracy: f64,
    pub failure_reasons: BTreeMap<String, usize>,
    pub scenes: BTreeMap<String, SceneScore>,
}

fn check_predictions(ds: &Dataset, preds: &[Prediction], file: &Path) -> Result<()> {
    if preds.is_empty() {
        return Err(Invalid(format!("{}: no predictions", file.display())).into());
    }
    let mut unknown: Vec<&str> = preds
        .iter()
        .map(|p| p.scene_id.as_str())
        .filter(|id| !ds.scenes.contains_key(*id))
        .collect();
    unknown.sort_unstable();
    unknown.dedup();
    if !unknown.is_empty() {
        return Err(Invalid(format!(
            "{}: unknown scene ids: {}",
            file.display(),
            unknown.join(", ")
        ))
        .into());
    }
    Ok(())
}

fn tally(scenes: &mut BTreeMap<String, SceneScore>, id: &str, hit: bool) {
    let s = scenes.entry(id.to_string()).or_default();
    s.predictions += 1;
    s.hits += usize::from(hit);
    s.accuracy = s.hits as f64 / s.predictions as f64;
}

pub fn eval_rect(
    ds: &Dataset,
    preds: &[Prediction],
    cfg: &RectCriterionConfig,
    file: &Path,
) -> Result<RectReport> {
    cfg.validate()?;
    check_predictions(ds, preds, file)?;
    let gts = ds.ground_truth();
    let mut scenes = BTreeMap::new();
    let mut empty = Vec::new();
    let mut matched = 0;
    for p in preds {
        let gt = &gts[&p.scene_id];
        let hit = if gt.is_empty() {
            empty.push(p.scene_id.clone());
            false
        } else {
            rect_match(&p.grasp, gt, cfg)?.is_some()
        };
        matched += usize::from(hit);
        tally(&mut scenes, &p.scene_id, hit);
    }
    empty.sort();
    empty.dedup();
    Ok(RectReport {
        criterion: "rectangle",
        predictions: preds.len(),
        matched,
        accuracy: matched as f64 / preds.len() as f64,
        angle_thresh: cfg.angle_thresh,
        iou_thresh: cfg.iou_thresh,
        empty_ground_truth: empty,
        scenes,
    })
}

pub fn eval_sgt(ds: &Dataset, preds: &[Prediction], file: &Path) -> Result<SgtReport> {
    check_predictions(ds, preds, file)?;
    let gripper = ds.gripper();
    let mut reasons: BTreeMap<String, usize> = FailureReason::ALL
        .iter()
        .map(|r| (r.to_string(), 0))
        .collect();
    let mut scenes = BTreeMap::new();
    let mut successes = 0;
    for p in preds {
        let s = &ds.scenes[&p.scene_id].scene;
        let at = || format!("{}:{}", file.display(), p.line);
        let jaw = gripper
            .resolve_jaw(p.grasp.h() * s.camera().resolution)
            .map_err(|_| {
                Invalid(format!(
                    "{}: jaw_size {} px is not a configured jaw size",
                    at(),
                    p.grasp.h()
                ))
            })?;
        let o = simulate_grasp(s, &p.grasp, jaw, gripper)
            .map_err(|e| Invalid(format!("{}: {e}", at())))?;
        successes += usize::from(o.success);
        if let Some(r) = o.failure_reason {
            *reasons.entry(r.to_string()).or_default() += 1;
        }
        tally(&mut scenes, &p.scene_id, o.success);
    }
    Ok(SgtReport {
        criterion: "sgt",
        predictions: preds.len(),
        successes,
        accuracy: successes as f64 / preds.len() as f64,
        failure_reasons: reasons,
        scenes,
    })
}

fn report_path(explicit: &Option<PathBuf>, pred: &Path, suffix: &str) -> PathBuf {
    explicit.clone().unwrap_or_else(|| {
        let mut s = pred.as_os_str().to_owned();
        s.push(suffix);
        PathBuf::from(s)
    })
}

fn write_report<T: Serialize>(path: &Path, report: &T) -> Result<()> {
    let json = serde_json::to_string_pretty(report)?;
    std::fs::write(path, json + "\n").with_context(|| format!("writing {}", path.display()))?;
    println!("report: {}", path.display());
    Ok(())
}

fn percent(v: f64) -> String {
    format!("{:.2}%", 100.0 * v)
}

fn print_scenes(scenes: &BTreeMap<String, SceneScore>) {
    for (id, s) in scenes {
        println!(
            "  {id}: {} ({}/{})",
            percent(s.accuracy),
            s.hits,
            s.predictions
        );
    }
}

pub fn cmd_eval_rect(a: &EvalRectArgs) -> Result<()> {
    let ds = read_dataset(&a.dataset.dataset)?;
    let preds = read_predictions(&a.pred)?;
    let cfg = RectCriterionConfig {
        angle_thresh: a.angle_thresh,
        iou_thresh: a.iou_thresh,
    };
    let r = eval_rect(&ds, &preds, &cfg, &a.pred)?;
    println!(
        "rectangle accuracy: {} ({}/{}, angle <= {}°, IoU >= {})",
        percent(r.accuracy),
        r.matched,
        r.predictions,
        r.angle_thresh,
        r.iou_thresh
    );
    print_scenes(&r.scenes);
    for id in &r.empty_ground_truth {
        println!("  note: {id} has no annotations; its predictions count as misses");
    }
    write_report(&report_path(&a.report, &a.pred, ".rect.json"), &r)
}

pub fn cmd_eval_sgt(a: &EvalSgtArgs) -> Result<()> {
    let ds = read_dataset(&a.dataset.dataset)?;
    let preds = read_predictions(&a.pred)?;
    let r = eval_sgt(&ds, &preds, &a.pred)?;
    println!(
        "SGT accuracy: {} ({}/{})",
        percent(r.accuracy),
        r.successes,
        r.predictions
    );
    print_scenes(&r.scenes);
    println!("failure reasons:");
    for (reason, n) in &r.failure_reasons {
        println!("  {reason}: {n}");
    }
    write_report(&report_path(&a.report, &a.pred, ".sgt.json"), &r)
}

pub fn cmd_render_overlay(a: &OverlayArgs) -> Result<()> {
    let s = read_scene_standalone(&a.scene)?;
    let res = s.scene.camera().resolution;
    let annotations = s.annotations.rectangles(res);
    let predictions: Vec<_> = match &a.pred {
        Some(p) => read_predictions(p)?
            .into_iter()
            .filter(|p| p.scene_id == s.scene.scene_id())
            .map(|p| p.grasp)
            .collect(),
        None => Vec::new(),
    };
    let img = overlay::render(&s.scene, &annotations, &predictions);
    img.save_with_format(&a.out, image::ImageFormat::Png)
        .with_context(|| format!("writing {}", a.out.display()))?;
    println!(
        "{}: {} annotations, {} predictions",
        a.out.display(),
        annotations.len(),
        predictions.len()
    );
    Ok(())
}

pub fn cmd_probability_map(a: &ProbabilityMapArgs) -> Result<()> {
    let s = read_scene_standalone(&a.scene)?;
    let root = a.scene.parent().and_then(Path::parent);
    let cfg = root
        .and_then(|r| graspgen_core::dataset::read_config(r).ok())
        .unwrap_or_default()
        .annotation;
    let ranges = gripper_ranges(&s.scene, &cfg.gripper, cfg.screening_jaw);
    let map = probability_map(
        &edge_map(&s.scene, &cfg.sampler),
        ranges.max_opening_px,
        &cfg.sampler,
    );
    netpbm::write_pgm(&a.out, &map.to_gray(), u16::MAX)?;
    println!("{}", a.out.display());
    Ok(())
}

pub fn cmd_serve(a: &ServeArgs) -> Result<()> {
    let addr: SocketAddr = a
        .addr
        .parse()
        .map_err(|e| Invalid(format!("invalid --addr {:?}: {e}", a.addr)))?;
    let log = a
        .log
        .clone()
        .unwrap_or_else(|| a.dataset.dataset.join("submissions.ndjson"));
    let rt = tokio::runtime::Runtime::new().context("starting runtime")?;
    rt.block_on(async {
        let state = graspgen_service::AppState::load(&a.dataset.dataset, &log)?;
        let listener = tokio::net::TcpListener::bind(addr)
            .await
            .map_err(|source| graspgen_service::ServeError::Bind {
                addr: a.addr.clone(),
                source,
            })?;
        println!(
            "serving {} scenes on http://{}/api/v1 (log: {})",
            state.dataset().scenes.len(),
            listener.local_addr()?,
            log.display()
        );
        graspgen_service::serve_on(listener, state).await?;
        Ok(())
    })
}

pub fn cmd_fixtures(a: &FixturesArgs) -> Result<()> {
    std::fs::create_dir_all(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    let pool = shapes::fixture_pool(a.resolution)?;
    for m in &pool {
        m.write(&a.out)?;
    }
    println!("{} objects written to {}", pool.len(), a.out.display());
    Ok(())
}
