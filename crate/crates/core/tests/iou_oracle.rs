use graspgen_core::{iou, Grasp};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

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

/// IoU by sampling an n × n grid over the joint bounding box.
fn raster_iou(a: &Grasp, b: &Grasp, n: usize) -> f64 {
    let pts: Vec<[f64; 2]> = a.corners().into_iter().chain(b.corners()).collect();
    let (x0, x1) = pts.iter().fold((f64::MAX, f64::MIN), |(lo, hi), p| {
        (lo.min(p[0]), hi.max(p[0]))
    });
    let (y0, y1) = pts.iter().fold((f64::MAX, f64::MIN), |(lo, hi), p| {
        (lo.min(p[1]), hi.max(p[1]))
    });
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

fn random_grasp(rng: &mut impl Rng) -> Grasp {
    Grasp::new(
        rng.random_range(20.0..40.0),
        rng.random_range(20.0..40.0),
        rng.random_range(2.0..25.0),
        rng.random_range(2.0..15.0),
        rng.random_range(-90.0..90.0),
    )
    .unwrap()
}

#[test]
fn clipping_matches_rasterization_on_random_pairs() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let a = random_grasp(&mut rng);
        let b = random_grasp(&mut rng);
        let d = (iou(&a, &b) - raster_iou(&a, &b, 1000)).abs();
        worst = worst.max(d);
    }
    assert!(worst <= 0.02, "worst deviation {worst}");
}

#[test]
fn analytic_cases_are_exact() {
    let a = Grasp::new(5.0, 5.0, 4.0, 2.0, 0.0).unwrap();
    assert!((iou(&a, &a) - 1.0).abs() < 1e-9);
    let far = a.with_center(50.0, 50.0).unwrap();
    assert!(iou(&a, &far).abs() < 1e-9);
    // 10 x 10 squares offset by 2.5: overlap 75, union 125
    let s = Grasp::new(0.0, 0.0, 10.0, 10.0, 0.0).unwrap();
    assert!((iou(&s, &s.with_center(2.5, 0.0).unwrap()) - 0.6).abs() < 1e-9);
}
