//! Candidate grasp proposal from aligned antipodal edges.
//!
//! Edges are cells of the posed height field whose slope exceeds a threshold.
//! Two edges with the same tangent orientation whose slopes face each other,
//! no farther apart than the gripper's maximum opening, look like the two
//! sides of something a parallel gripper could close on. Every cell between
//! such a pair gains weight, and remembers the closing direction.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grasp::{normalize_angle, Grasp};
use crate::grid::Grid;
use crate::scene::Scene;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub candidates: usize,
    /// Share of probability mass from the edge heuristic; the rest is uniform.
    pub heuristic_weight: f64,
    pub orientation_bins: usize,
    /// Half-width of the uniform jitter around the edge normal, degrees.
    pub theta_jitter: f64,
    /// Minimum slope (m/m) for a cell to count as an edge.
    pub edge_threshold: f64,
    /// Orientation bins two edges may differ by and still pair.
    pub pair_bin_tolerance: usize,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig {
            candidates: 5000,
            heuristic_weight: 0.95,
            orientation_bins: 18,
            theta_jitter: 15.0,
            edge_threshold: 0.5,
            pair_bin_tolerance: 1,
        }
    }
}

impl SamplerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.candidates == 0 {
            return Err(Error::InvalidConfig(
                "candidate count must be at least 1".into(),
            ));
        }
        if !(0.0..1.0).contains(&self.heuristic_weight) {
            return Err(Error::InvalidConfig(format!(
                "heuristic weight must be in [0, 1), got {}",
                self.heuristic_weight
            )));
        }
        if self.orientation_bins == 0 || self.orientation_bins > 180 {
            return Err(Error::InvalidConfig(
                "orientation bins must be in 1..=180".into(),
            ));
        }
        if !(self.theta_jitter >= 0.0 && self.theta_jitter <= 90.0) {
            return Err(Error::InvalidConfig(
                "theta jitter must be in [0, 90]".into(),
            ));
        }
        if !(self.edge_threshold.is_finite() && self.edge_threshold > 0.0) {
            return Err(Error::InvalidConfig(
                "edge threshold must be positive".into(),
            ));
        }
        Ok(())
    }

    fn bin_width(&self) -> f64 {
        180.0 / self.orientation_bins as f64
    }

    /// Bins are centered on multiples of the bin width.
    pub fn bin_of(&self, deg: f64) -> usize {
        let w = self.bin_width();
        (((deg.rem_euclid(180.0) + w / 2.0) / w).floor() as usize) % self.orientation_bins
    }

    pub fn bin_center(&self, bin: usize) -> f64 {
        bin as f64 * self.bin_width()
    }
}

/// Per-cell slope of the posed height field.
#[derive(Debug, Clone)]
pub struct EdgeMap {
    /// Gradient (m/m) along image x and y.
    pub gradient: Grid<[f64; 2]>,
    pub magnitude: Grid<f64>,
    /// Edge tangent orientation, degrees in `[0, 180)`, grasp-angle convention.
    pub orientation: Grid<f64>,
    pub bin: Grid<u16>,
}

pub fn edge_map(scene: &Scene, cfg: &SamplerConfig) -> EdgeMap {
    let (rows, cols) = (scene.heights().rows(), scene.heights().cols());
    let gradient = Grid::from_fn(rows, cols, |r, c| scene.gradient(r, c));
    let magnitude = gradient.map(|g| g[0].hypot(g[1]));
    // A slope along +x has grasp angle 0; +y (down the image) is -90.
    let orientation = gradient.map(|g| {
        if g == [0.0, 0.0] {
            0.0
        } else {
            ((-g[1]).atan2(g[0]).to_degrees() + 90.0).rem_euclid(180.0)
        }
    });
    let bin = orientation.map(|t| cfg.bin_of(t) as u16);
    EdgeMap {
        gradient,
        magnitude,
        orientation,
        bin,
    }
}

/// Sampling weights over image cells, plus a preferred closing angle where
/// the edge heuristic has an opinion.
#[derive(Debug, Clone)]
pub struct ProbabilityMap {
    pub weights: Grid<f64>,
    /// Dominant closing angle in degrees, grasp convention.
    pub orientation: Grid<Option<f64>>,
}

impl ProbabilityMap {
    pub fn uniform(rows: usize, cols: usize) -> Self {
        let n = (rows * cols) as f64;
        ProbabilityMap {
            weights: Grid::filled(rows, cols, 1.0 / n),
            orientation: Grid::filled(rows, cols, None),
        }
    }

    /// Grayscale dump, brightest at the most likely cell.
    pub fn to_gray(&self) -> Grid<u16> {
        let max = self.weights.data().iter().copied().fold(0.0, f64::max);
        self.weights.map(|w| {
            if max > 0.0 {
                (w / max * 255.0).round() as u16
            } else {
                0
            }
        })
    }
}

fn circular_bin_distance(a: usize, b: usize, n: usize) -> usize {
    let d = a.abs_diff(b) % n;
    d.min(n - d)
}

/// Antipodal edge-pair density blended with a uniform floor.
pub fn probability_map(
    edges: &EdgeMap,
    max_opening_px: f64,
    cfg: &SamplerConfig,
) -> ProbabilityMap {
    let (rows, cols) = (edges.magnitude.rows(), edges.magnitude.cols());
    let bins = cfg.orientation_bins;
    let mut density = vec![0.0f64; rows * cols];
    let mut hist = vec![0u32; rows * cols * bins];
    let reach = max_opening_px.max(0.0).floor() as usize;
    let is_edge = |r: usize, c: usize| edges.magnitude.get(r, c) > cfg.edge_threshold;

    for (r, c, mag) in edges.magnitude.indexed() {
        if mag <= cfg.edge_threshold {
            continue;
        }
        let bin = edges.bin.get(r, c) as usize;
        let g = edges.gradient.get(r, c);
        // Walk along the quantized normal, uphill into the object.
        let normal = cfg.bin_center(bin) + 90.0;
        let t = normal.to_radians();
        let mut d = [t.cos(), -t.sin()];
        if d[0] * g[0] + d[1] * g[1] < 0.0 {
            d = [-d[0], -d[1]];
        }
        let closing_bin = cfg.bin_of(normal);
        let (x0, y0) = (c as f64 + 0.5, r as f64 + 0.5);
        for step in 1..=reach {
            let qx = x0 + d[0] * step as f64;
            let qy = y0 + d[1] * step as f64;
            if qx < 0.0 || qy < 0.0 || qx >= cols as f64 || qy >= rows as f64 {
                break;
            }
            let (qr, qc) = (qy.floor() as usize, qx.floor() as usize);
            if !is_edge(qr, qc) {
                continue;
            }
            let qb = edges.bin.get(qr, qc) as usize;
            let qg = edges.gradient.get(qr, qc);
            if circular_bin_distance(bin, qb, bins) > cfg.pair_bin_tolerance
                || qg[0] * d[0] + qg[1] * d[1] >= 0.0
            {
                continue;
            }
            for s in 0..=step {
                let sx = x0 + d[0] * s as f64;
                let sy = y0 + d[1] * s as f64;
                let idx = sy.floor() as usize * cols + sx.floor() as usize;
                density[idx] += 1.0;
                hist[idx * bins + closing_bin] += 1;
            }
        }
    }

    let n = (rows * cols) as f64;
    let total: f64 = density.iter().sum();
    let (hw, floor) = if total > 0.0 {
        (cfg.heuristic_weight, (1.0 - cfg.heuristic_weight) / n)
    } else {
        (0.0, 1.0 / n)
    };
    let mut weights: Vec<f64> = density
        .iter()
        .map(|&d| floor + if total > 0.0 { hw * d / total } else { 0.0 })
        .collect();
    let sum: f64 = weights.iter().sum();
    for w in &mut weights {
        *w /= sum;
    }
    let orientation = Grid::from_fn(rows, cols, |r, c| {
        let h = &hist[(r * cols + c) * bins..(r * cols + c + 1) * bins];
        let (best, &count) = h
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(&a.0)))
            .expect("at least one bin");
        (count > 0).then(|| normalize_angle(cfg.bin_center(best)))
    });
    ProbabilityMap {
        weights: Grid::from_vec(rows, cols, weights),
        orientation,
    }
}

/// Gripper dimensions in image pixels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GripperRanges {
    pub max_opening_px: f64,
    pub jaw_px: f64,
}

/// Endless seeded stream of candidates drawn from a map.
pub struct CandidateStream<'a, R: Rng> {
    map: &'a ProbabilityMap,
    index: WeightedIndex<f64>,
    rng: R,
    ranges: GripperRanges,
    jitter: f64,
}

impl<'a, R: Rng> CandidateStream<'a, R> {
    pub fn new(
        map: &'a ProbabilityMap,
        rng: R,
        ranges: GripperRanges,
        cfg: &SamplerConfig,
    ) -> Self {
        let index =
            WeightedIndex::new(map.weights.data().iter().copied()).expect("weights are positive");
        CandidateStream {
            map,
            index,
            rng,
            ranges,
            jitter: cfg.theta_jitter,
        }
    }
}

impl<R: Rng> Iterator for CandidateStream<'_, R> {
    type Item = Grasp;

    fn next(&mut self) -> Option<Grasp> {
        let cols = self.map.weights.cols();
        let cell = self.index.sample(&mut self.rng);
        let (r, c) = (cell / cols, cell % cols);
        let x = c as f64 + self.rng.random::<f64>();
        let y = r as f64 + self.rng.random::<f64>();
        let theta = match self.map.orientation.get(r, c) {
            Some(t) => t + self.jitter * (2.0 * self.rng.random::<f64>() - 1.0),
            None => 90.0 - 180.0 * self.rng.random::<f64>(),
        };
        let opening = self.ranges.max_opening_px * (1.0 - self.rng.random::<f64>());
        Some(Grasp::new(x, y, opening, self.ranges.jaw_px, theta).expect("sampled grasp is valid"))
    }
}

pub fn sample_candidates<R: Rng>(
    map: &ProbabilityMap,
    n: usize,
    rng: R,
    ranges: GripperRanges,
    cfg: &SamplerConfig,
) -> Vec<Grasp> {
    CandidateStream::new(map, rng, ranges, cfg)
        .take(n)
        .collect()
}
