use graspgen_core::object::ObjectModel;
use graspgen_core::sampler::{
    edge_map, probability_map, CandidateStream, GripperRanges, SamplerConfig,
};
use graspgen_core::scene::Camera;
use graspgen_core::{Grid, Pose, Scene};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

fn scene() -> Scene {
    let camera = Camera {
        width: 24,
        height: 24,
        resolution: 0.001,
        distance: 1.0,
    };
    let m = ObjectModel::new("b", Grid::filled(6, 10, 0.01), 0.001).unwrap();
    Scene::place(
        &m,
        Pose {
            tx: 0.001,
            ty: -0.002,
            yaw: 20.0,
        },
        camera,
        0,
        0,
    )
    .unwrap()
}

#[test]
fn centers_follow_the_map() {
    let cfg = SamplerConfig::default();
    let s = scene();
    let map = probability_map(&edge_map(&s, &cfg), 16.0, &cfg);
    let w = map.weights.data();
    assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    assert!(w.iter().all(|&p| p > 0.0));

    let n = 100_000;
    let ranges = GripperRanges {
        max_opening_px: 16.0,
        jaw_px: 4.0,
    };
    let mut counts = vec![0u64; w.len()];
    for g in CandidateStream::new(&map, ChaCha8Rng::seed_from_u64(99), ranges, &cfg).take(n) {
        assert!(g.w() > 0.0 && g.w() <= 16.0);
        counts[g.y().floor() as usize * 24 + g.x().floor() as usize] += 1;
    }
    let stat: f64 = counts
        .iter()
        .zip(w)
        .map(|(&o, &p)| {
            let e = p * n as f64;
            (o as f64 - e).powi(2) / e
        })
        .sum();
    let dist = ChiSquared::new((w.len() - 1) as f64).unwrap();
    let p = 1.0 - dist.cdf(stat);
    assert!(p > 0.01, "chi-square {stat}, p = {p}");
}
