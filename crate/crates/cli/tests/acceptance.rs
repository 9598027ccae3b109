//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails.

use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use graspgen_core::dataset::{generate_dataset, read_dataset, Dataset};
use graspgen_core::object::ObjectModel;
use graspgen_core::pipeline::{gripper_ranges, trials_to_unique_successes, AnnotationConfig};
use graspgen_core::sampler::{edge_map, probability_map, ProbabilityMap};
use graspgen_core::scene::{settle, Camera, CameraConfig};
use graspgen_core::shapes::{cuboid, fixture_pool};
use graspgen_core::{
    iou, normalize_angle, rect_match, simulate_grasp, FailureReason, Grasp, GripperConfig, Pose,
    RectCriterionConfig, RunConfig, Scene,
};
use graspgen_service::{spawn_local, AppState, SubmissionLog};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn tree(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.push((
                    p.strip_prefix(dir).unwrap().display().to_string(),
                    std::fs::read(&p).unwrap(),
                ));
            }
        }
    }
    out.sort();
    out
}

/// Replays every (grasp, jaw size) line of a dataset; returns (lines, failures).
fn replay(ds: &Dataset) -> (usize, Vec<String>) {
    let mut lines = 0;
    let mut bad = Vec::new();
    for (id, s) in &ds.scenes {
        let res = s.scene.camera().resolution;
        for e in &s.annotations.entries {
            for &jaw in &e.jaw_sizes {
                lines += 1;
                let g = e.grasp.with_jaw(jaw / res).unwrap();
                let o = simulate_grasp(&s.scene, &g, jaw, ds.gripper()).unwrap();
                if !o.success {
                    bad.push(format!("{id} {g:?} jaw {jaw}: {:?}", o.failure_reason));
                }
            }
        }
    }
    (lines, bad)
}

fn annotation_self_consistency(work: &Path) -> Outcome {
    let pool = fixture_pool(0.001).map_err(|e| e.to_string())?;
    ensure(pool.len() >= 20, || {
        format!("only {} fixture objects", pool.len())
    })?;
    let cfg = RunConfig {
        master_seed: 2024,
        scenes_per_object: 2,
        workers: std::thread::available_parallelism()
            .map(|n| n.get())
            .unwrap_or(1),
        ..RunConfig::default()
    };
    let out = work.join("c1");
    let start = Instant::now();
    let manifest = generate_dataset(&pool, &cfg, &out).map_err(|e| e.to_string())?;
    let ds = read_dataset(&out).map_err(|e| e.to_string())?;
    let (lines, bad) = replay(&ds);
    let elapsed = start.elapsed();
    ensure(manifest.scene_count() == pool.len() * 2, || {
        format!(
            "{} scenes for {} objects",
            manifest.scene_count(),
            pool.len()
        )
    })?;
    ensure(lines > 0, || "no annotations generated".into())?;
    ensure(bad.is_empty(), || {
        format!(
            "{} of {lines} lines fail replay, e.g. {}",
            bad.len(),
            bad[0]
        )
    })?;
    ensure(elapsed < Duration::from_secs(120), || {
        format!("took {elapsed:.1?}")
    })?;
    Ok(format!(
        "{} objects x 2 scenes, {lines}/{lines} (grasp, jaw) lines replay as success, {elapsed:.1?}",
        pool.len()
    ))
}

/// Point-in-rectangle test in the rectangle's own frame.
struct Frame {
    c: [f64; 2],
    cos: f64,
    sin: f64,
    half: [f64; 2],
}

impl Frame {
    fn new(g: &Grasp) -> Self {
        let (sin, cos) = g.theta().to_radians().sin_cos();
        Frame {
            c: [g.x(), g.y()],
            cos,
            sin,
            half: [g.w() / 2.0, g.h() / 2.0],
        }
    }

    fn contains(&self, px: f64, py: f64) -> bool {
        let (dx, dy) = (px - self.c[0], py - self.c[1]);
        (dx * self.cos - dy * self.sin).abs() <= self.half[0]
            && (dx * self.sin + dy * self.cos).abs() <= self.half[1]
    }
}

fn raster_iou(a: &Grasp, b: &Grasp, n: usize) -> f64 {
    let pts: Vec<[f64; 2]> = a.corners().into_iter().chain(b.corners()).collect();
    let x0 = pts.iter().map(|p| p[0]).fold(f64::MAX, f64::min);
    let x1 = pts.iter().map(|p| p[0]).fold(f64::MIN, f64::max);
    let y0 = pts.iter().map(|p| p[1]).fold(f64::MAX, f64::min);
    let y1 = pts.iter().map(|p| p[1]).fold(f64::MIN, f64::max);
    let (sx, sy) = ((x1 - x0) / n as f64, (y1 - y0) / n as f64);
    let (fa, fb) = (Frame::new(a), Frame::new(b));
    let (mut inter, mut uni) = (0u64, 0u64);
    for i in 0..n {
        let py = y0 + (i as f64 + 0.5) * sy;
        for j in 0..n {
            let px = x0 + (j as f64 + 0.5) * sx;
            let (ia, ib) = (fa.contains(px, py), fb.contains(px, py));
            inter += u64::from(ia && ib);
            uni += u64::from(ia || ib);
        }
    }
    if uni == 0 {
        0.0
    } else {
        inter as f64 / uni as f64
    }
}

fn iou_oracle_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1000);
    let random = |rng: &mut ChaCha8Rng| {
        Grasp::new(
            rng.random_range(40.0..60.0),
            rng.random_range(40.0..60.0),
            rng.random_range(2.0..30.0),
            rng.random_range(2.0..20.0),
            rng.random_range(-90.0..90.0),
        )
        .unwrap()
    };
    let mut worst = 0.0f64;
    let mut overlapping = 0;
    for _ in 0..1000 {
        let (a, b) = (random(&mut rng), random(&mut rng));
        let exact = iou(&a, &b);
        overlapping += usize::from(exact > 0.0);
        worst = worst.max((exact - raster_iou(&a, &b, 1000)).abs());
    }
    ensure(worst <= 0.02, || {
        format!("max |clip - raster| = {worst:.4}")
    })?;
    let a = Grasp::new(5.0, 5.0, 4.0, 2.0, 30.0).unwrap();
    let s = Grasp::new(0.0, 0.0, 10.0, 10.0, 0.0).unwrap();
    let cases = [
        ("identity", iou(&a, &a), 1.0),
        (
            "disjoint",
            iou(&a, &a.with_center(40.0, 40.0).unwrap()),
            0.0,
        ),
        (
            "offset squares",
            iou(&s, &s.with_center(2.5, 0.0).unwrap()),
            0.6,
        ),
    ];
    for (name, got, want) in cases {
        ensure((got - want).abs() <= 1e-9, || {
            format!("{name}: {got} != {want}")
        })?;
    }
    Ok(format!(
        "1000 pairs ({overlapping} overlapping), max deviation {worst:.4} <= 0.02; analytic cases exact to 1e-9"
    ))
}

fn rectangle_criterion() -> Outcome {
    let cfg = RectCriterionConfig::default();
    let gt = Grasp::new(50.0, 40.0, 10.0, 10.0, 20.0).unwrap();
    let gts = [gt];
    let m = |p: &Grasp| rect_match(p, &gts, &cfg).map_err(|e| e.to_string());
    ensure(m(&gt)?.is_some(), || "identity prediction rejected".into())?;
    let rotated = gt.with_theta(normalize_angle(gt.theta() + 45.0)).unwrap();
    ensure(m(&rotated)?.is_none(), || "45° prediction accepted".into())?;
    // shifted by a quarter side along the closing axis: IoU 0.6, same angle
    let u = gt.closing_axis();
    let shifted = gt
        .with_center(gt.x() + 2.5 * u[0], gt.y() + 2.5 * u[1])
        .unwrap();
    let v = iou(&gt, &shifted);
    ensure((v - 0.6).abs() < 1e-9, || format!("shifted IoU is {v}"))?;
    ensure(m(&shifted)?.is_some(), || {
        "IoU-0.6 prediction rejected".into()
    })?;
    Ok(format!(
        "defaults angle {}°, IoU {}: identity passes, 45° fails, IoU 0.6 / Δθ 0 passes",
        cfg.angle_thresh, cfg.iou_thresh
    ))
}

fn sampler_efficiency() -> Outcome {
    let pool: BTreeMap<String, ObjectModel> = fixture_pool(0.001)
        .map_err(|e| e.to_string())?
        .into_iter()
        .map(|m| (m.id().to_string(), m))
        .collect();
    let shapes = [
        "box-brick",
        "l-thin",
        "cyl-can",
        "t-small",
        "frame-square",
        "cyl-lying",
    ];
    let cfg = AnnotationConfig::default();
    let (target, seeds) = (50, 10u64);
    let cap = 2_000_000;
    let mut lines = Vec::new();
    let mut failures = Vec::new();
    for id in shapes {
        let m = &pool[id];
        let cam = CameraConfig::default().camera_for(m.longest_side());
        let (mut heur, mut unif) = (0usize, 0usize);
        for seed in 0..seeds {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let scene = settle(m, &mut rng, cam, 0, seed).map_err(|e| e.to_string())?;
            let ranges = gripper_ranges(&scene, &cfg.gripper, cfg.screening_jaw);
            let map = probability_map(
                &edge_map(&scene, &cfg.sampler),
                ranges.max_opening_px,
                &cfg.sampler,
            );
            let uniform = ProbabilityMap::uniform(cam.height, cam.width);
            let h = trials_to_unique_successes(&scene, &map, &cfg, seed, target, cap)
                .map_err(|e| e.to_string())?;
            let u = trials_to_unique_successes(&scene, &uniform, &cfg, seed, target, cap)
                .map_err(|e| e.to_string())?;
            match (h, u) {
                (Some(h), Some(u)) => {
                    heur += h;
                    unif += u;
                }
                _ => failures.push(format!(
                    "{id} seed {seed}: did not reach {target} within {cap} trials"
                )),
            }
        }
        let ratio = unif as f64 / heur as f64;
        lines.push(format!(
            "{id} {:.0}/{:.0}={ratio:.1}x",
            unif as f64 / seeds as f64,
            heur as f64 / seeds as f64
        ));
        if ratio < 5.0 {
            failures.push(format!("{id}: only {ratio:.2}x fewer trials"));
        }
    }
    ensure(failures.is_empty(), || {
        format!("{}; {}", failures.join("; "), lines.join(", "))
    })?;
    Ok(format!(
        "mean trials uniform/heuristic to {target} unique successes over {seeds} seeds: {}",
        lines.join(", ")
    ))
}

fn determinism(work: &Path) -> Outcome {
    let objs = work.join("c5-objs");
    let pool = fixture_pool(0.001).map_err(|e| e.to_string())?;
    std::fs::create_dir_all(&objs).map_err(|e| e.to_string())?;
    for m in pool.iter().step_by(3) {
        m.write(&objs).map_err(|e| e.to_string())?;
    }
    let mut digests = Vec::new();
    let mut dirs = Vec::new();
    for workers in ["1", "4"] {
        let out = work.join(format!("c5-w{workers}"));
        let o = Command::new(env!("CARGO_BIN_EXE_graspgen"))
            .args([
                "generate",
                "--seed",
                "77",
                "--scenes-per-object",
                "2",
                "--workers",
                workers,
            ])
            .arg("--objects")
            .arg(&objs)
            .arg("--out")
            .arg(&out)
            .output()
            .map_err(|e| e.to_string())?;
        ensure(o.status.success(), || {
            String::from_utf8_lossy(&o.stderr).into_owned()
        })?;
        let digest = String::from_utf8_lossy(&o.stdout)
            .lines()
            .find_map(|l| l.strip_prefix("manifest digest: ").map(str::to_string))
            .ok_or("no digest printed")?;
        digests.push(digest);
        dirs.push(out);
    }
    ensure(digests[0] == digests[1], || {
        format!("digests differ: {digests:?}")
    })?;
    let (a, b) = (tree(&dirs[0]), tree(&dirs[1]));
    ensure(a == b, || "scene directories differ".into())?;
    Ok(format!(
        "--workers 1 and 4: {} identical files, manifest digest {}",
        a.len(),
        &digests[0][..16]
    ))
}

fn gripper_constraints(datasets: &[PathBuf]) -> Outcome {
    let allowed = [0.01, 0.02, 0.03, 0.04, 0.06];
    let mut entries = 0;
    for dir in datasets {
        let ds = read_dataset(dir).map_err(|e| e.to_string())?;
        for (id, s) in &ds.scenes {
            let res = s.scene.camera().resolution;
            for e in &s.annotations.entries {
                entries += 1;
                let opening = e.grasp.w() * res;
                ensure(opening <= 0.10 + 1e-12, || {
                    format!("{id}: opening {opening} m")
                })?;
                ensure(!e.jaw_sizes.is_empty(), || {
                    format!("{id}: entry without jaw sizes")
                })?;
                for j in &e.jaw_sizes {
                    ensure(allowed.iter().any(|a| (a - j).abs() < 1e-9), || {
                        format!("{id}: jaw size {j}")
                    })?;
                }
            }
        }
    }
    ensure(entries > 0, || "no annotations to check".into())?;
    Ok(format!(
        "{entries} annotations in {} datasets: opening <= 0.10 m, jaw sizes non-empty subsets of {{1,2,3,4,6}} cm",
        datasets.len()
    ))
}

async fn post(client: &reqwest::Client, url: &str, body: &Value) -> Result<Value, String> {
    let r = client
        .post(url)
        .json(body)
        .send()
        .await
        .map_err(|e| e.to_string())?;
    let status = r.status();
    let v: Value = r.json().await.map_err(|e| e.to_string())?;
    ensure(status.is_success(), || format!("{status}: {v}"))?;
    Ok(v)
}

async fn service_equivalence_async(dataset_dir: &Path, work: &Path) -> Outcome {
    let ds = read_dataset(dataset_dir).map_err(|e| e.to_string())?;
    let log = work.join("c7-submissions.ndjson");
    let state = AppState::new(
        ds.clone(),
        SubmissionLog::open(&log).map_err(|e| e.to_string())?,
    );
    let base = format!(
        "http://{}/api/v1",
        spawn_local(state).await.map_err(|e| e.to_string())?
    );
    let client = reqwest::Client::new();
    let gripper = ds.gripper().clone();
    let ids: Vec<&String> = ds.scenes.keys().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut successes = 0;
    for i in 0..200 {
        let id = ids[rng.random_range(0..ids.len())];
        let s = &ds.scenes[id];
        let cam = s.scene.camera();
        let res = cam.resolution;
        let jaw = gripper.jaw_sizes[rng.random_range(0..gripper.jaw_sizes.len())];
        // a quarter exact annotation replays, a quarter perturbed annotations,
        // the rest anywhere in the image
        let near = s
            .annotations
            .entries
            .get(rng.random_range(0..s.annotations.entries.len().max(1)));
        let (x, y, theta, opening, jaw) = match near {
            Some(e) if i % 4 == 0 => (
                e.grasp.x(),
                e.grasp.y(),
                e.grasp.theta(),
                e.grasp.w(),
                e.jaw_sizes[rng.random_range(0..e.jaw_sizes.len())],
            ),
            Some(e) if i % 4 == 1 => (
                (e.grasp.x() + rng.random_range(-2.0..2.0)).clamp(0.0, cam.width as f64 - 1e-6),
                (e.grasp.y() + rng.random_range(-2.0..2.0)).clamp(0.0, cam.height as f64 - 1e-6),
                normalize_angle(e.grasp.theta() + rng.random_range(-10.0..10.0)),
                e.grasp.w() * rng.random_range(0.8..1.2),
                jaw,
            ),
            _ => (
                rng.random_range(0.0..cam.width as f64),
                rng.random_range(0.0..cam.height as f64),
                normalize_angle(rng.random_range(-90.0..90.0)),
                rng.random_range(1.0..0.12 / res),
                jaw,
            ),
        };
        let body = json!({"x": x, "y": y, "theta": theta, "opening": opening, "jaw_size": jaw / res, "client": "acceptance"});
        let v = post(&client, &format!("{base}/scenes/{id}/trials"), &body).await?;
        let g = Grasp::new(x, y, opening, jaw / res, theta).map_err(|e| e.to_string())?;
        let lib = simulate_grasp(&s.scene, &g, jaw, &gripper).map_err(|e| e.to_string())?;
        successes += usize::from(lib.success);
        let want = serde_json::to_value(lib.failure_reason).unwrap();
        ensure(
            v["success"] == lib.success && v["failure_reason"] == want,
            || {
                format!(
                    "request {i} on {id}: http {v}, library {:?}",
                    lib.failure_reason
                )
            },
        )?;
    }

    let (id, body) = ds
        .scenes
        .iter()
        .find_map(|(id, s)| {
            s.annotations.entries.first().map(|e| {
                let res = s.scene.camera().resolution;
                let g = e.grasp;
                (id.clone(), json!({"x": g.x(), "y": g.y(), "theta": g.theta(), "opening": g.w(), "jaw_size": e.jaw_sizes[0] / res}))
            })
        })
        .ok_or("dataset has no annotations")?;
    let url = format!("{base}/scenes/{id}/trials");
    let before = std::fs::read_to_string(&log)
        .map_err(|e| e.to_string())?
        .lines()
        .count();
    let tasks: Vec<_> = (0..100)
        .map(|_| {
            let (client, url, body) = (client.clone(), url.clone(), body.clone());
            tokio::spawn(async move { post(&client, &url, &body).await })
        })
        .collect();
    let mut outcomes = Vec::new();
    for t in futures::future::join_all(tasks).await {
        let v = t.map_err(|e| e.to_string())??;
        outcomes.push((v["success"].clone(), v["failure_reason"].clone()));
    }
    ensure(outcomes.windows(2).all(|w| w[0] == w[1]), || {
        "concurrent outcomes differ".into()
    })?;
    let after = std::fs::read_to_string(&log)
        .map_err(|e| e.to_string())?
        .lines()
        .count();
    ensure(after - before == 100, || {
        format!("{} log records for 100 requests", after - before)
    })?;

    // restart on the same log
    let state = AppState::new(ds, SubmissionLog::open(&log).map_err(|e| e.to_string())?);
    let base2 = format!(
        "http://{}/api/v1",
        spawn_local(state).await.map_err(|e| e.to_string())?
    );
    let stats: Value = client
        .get(format!("{base2}/stats"))
        .send()
        .await
        .map_err(|e| e.to_string())?
        .json()
        .await
        .map_err(|e| e.to_string())?;
    ensure(stats["submissions"] == json!(after), || {
        format!("restarted stats: {stats}")
    })?;
    let v = post(&client, &format!("{base2}/scenes/{id}/trials"), &body).await?;
    ensure(v["submission_id"] == json!(after + 1), || {
        format!("next id after restart: {v}")
    })?;
    Ok(format!(
        "200 random requests agree with the library ({successes} successes); 100 concurrent identical requests -> \
         1 distinct outcome, 100 log records; {after} records survive restart"
    ))
}

fn service_equivalence(dataset_dir: &Path, work: &Path) -> Outcome {
    tokio::runtime::Runtime::new()
        .map_err(|e| e.to_string())?
        .block_on(service_equivalence_async(dataset_dir, work))
}

fn sgt_truth_table() -> Outcome {
    let res = 0.001;
    let m = cuboid("box", 0.06, 0.03, 0.04, res).map_err(|e| e.to_string())?;
    let cam = Camera {
        width: 200,
        height: 200,
        resolution: res,
        distance: 1.0,
    };
    let scene = Scene::place(
        &m,
        Pose {
            tx: 0.0,
            ty: 0.0,
            yaw: 0.0,
        },
        cam,
        0,
        0,
    )
    .map_err(|e| e.to_string())?;
    let gr = GripperConfig::default();
    let cases = [
        (
            "across 30 mm side",
            Grasp::new(100.0, 100.0, 50.0, 20.0, 90.0),
            None,
        ),
        (
            "across 60 mm side",
            Grasp::new(100.0, 100.0, 50.0, 20.0, 0.0),
            Some(FailureReason::ApproachCollision),
        ),
        (
            "empty table",
            Grasp::new(25.0, 25.0, 50.0, 20.0, 90.0),
            Some(FailureReason::NoContact),
        ),
        (
            "opening 0.12 m",
            Grasp::new(100.0, 100.0, 120.0, 20.0, 90.0),
            Some(FailureReason::OpeningExceeded),
        ),
    ];
    let mut got = Vec::new();
    for (name, g, want) in cases {
        let g = g.map_err(|e| e.to_string())?;
        let o = simulate_grasp(&scene, &g, 0.02, &gr).map_err(|e| e.to_string())?;
        ensure(
            o.failure_reason == want && o.success == want.is_none(),
            || format!("{name}: expected {want:?}, got {:?}", o.failure_reason),
        )?;
        got.push(format!(
            "{name} -> {}",
            want.map_or("success".to_string(), |r| r.to_string())
        ));
    }
    Ok(got.join("; "))
}

fn main() {
    let work = tempfile::tempdir().expect("temp dir");
    let w = work.path();
    let started = Instant::now();
    let mut results: Vec<(&str, Outcome, Duration)> = Vec::new();
    let mut check = |name: &'static str, f: &mut dyn FnMut() -> Outcome| {
        let t = Instant::now();
        let r = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        let line = match &r {
            Ok(detail) => format!("PASS  {name}: {detail}"),
            Err(why) => format!("FAIL  {name}: {why}"),
        };
        println!("{line} [{:.1?}]", t.elapsed());
        results.push((name, r, t.elapsed()));
    };

    check("1 annotation self-consistency", &mut || {
        annotation_self_consistency(w)
    });
    check("2 IoU oracle equivalence", &mut iou_oracle_equivalence);
    check("3 rectangle criterion", &mut rectangle_criterion);
    check("4 sampler efficiency", &mut sampler_efficiency);
    check("5 determinism across worker counts", &mut || determinism(w));
    let datasets = vec![w.join("c1"), w.join("c5-w1"), w.join("c5-w4")];
    check("6 gripper constraints", &mut || {
        gripper_constraints(&datasets)
    });
    check("7 service/library equivalence", &mut || {
        service_equivalence(&w.join("c1"), w)
    });
    check("8 SGT fixture truth table", &mut sgt_truth_table);

    let failed = results.iter().filter(|r| r.1.is_err()).count();
    println!(
        "acceptance: {}/{} passed in {:.1?}",
        results.len() - failed,
        results.len(),
        started.elapsed()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
