//! Rectangle-metric scoring against ground-truth grasp sets.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::iou;
use crate::grasp::{angle_diff, Grasp};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RectCriterionConfig {
    /// Maximum orientation difference, degrees.
    pub angle_thresh: f64,
    /// Minimum intersection over union.
    pub iou_thresh: f64,
}

impl Default for RectCriterionConfig {
    fn default() -> Self {
        RectCriterionConfig {
            angle_thresh: 30.0,
            iou_thresh: 0.25,
        }
    }
}

impl RectCriterionConfig {
    pub fn new(angle_thresh: f64, iou_thresh: f64) -> Result<Self> {
        let cfg = RectCriterionConfig {
            angle_thresh,
            iou_thresh,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.angle_thresh > 0.0 && self.angle_thresh <= 90.0) {
            return Err(Error::InvalidConfig(format!(
                "angle threshold must be in (0, 90], got {}",
                self.angle_thresh
            )));
        }
        if !(self.iou_thresh > 0.0 && self.iou_thresh <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "IoU threshold must be in (0, 1], got {}",
                self.iou_thresh
            )));
        }
        Ok(())
    }
}

/// Whether `pred` matches some annotation; returns the first matching index.
pub fn rect_match(pred: &Grasp, gt: &[Grasp], cfg: &RectCriterionConfig) -> Result<Option<usize>> {
    if gt.is_empty() {
        return Err(Error::EmptyGroundTruth);
    }
    Ok(gt.iter().position(|g| {
        angle_diff(pred.theta(), g.theta()) <= cfg.angle_thresh && iou(pred, g) >= cfg.iou_thresh
    }))
}

/// Squared distance from `pred` to the closest annotation, computed on the raw
/// `(x, y, h, w, θ)` vectors with θ in degrees.
pub fn min_grasp_distance(pred: &Grasp, gt: &[Grasp]) -> Result<f64> {
    let p = pred.as_vector();
    gt.iter()
        .map(|g| {
            g.as_vector()
                .iter()
                .zip(p.iter())
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
        })
        .min_by(f64::total_cmp)
        .ok_or(Error::EmptyGroundTruth)
}

/// Fraction of predictions accepted by [`rect_match`].
pub fn batch_accuracy(
    preds: &[(String, Grasp)],
    gts: &BTreeMap<String, Vec<Grasp>>,
    cfg: &RectCriterionConfig,
) -> Result<f64> {
    if preds.is_empty() {
        return Err(Error::NoPredictions);
    }
    let unknown: BTreeSet<&String> = preds
        .iter()
        .filter(|(id, _)| !gts.contains_key(id))
        .map(|(id, _)| id)
        .collect();
    if !unknown.is_empty() {
        return Err(Error::UnknownScenes(unknown.into_iter().cloned().collect()));
    }
    let mut hits = 0usize;
    for (id, g) in preds {
        if rect_match(g, &gts[id], cfg)?.is_some() {
            hits += 1;
        }
    }
    Ok(hits as f64 / preds.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(x: f64, y: f64, w: f64, h: f64, t: f64) -> Grasp {
        Grasp::new(x, y, w, h, t).unwrap()
    }

    #[test]
    fn identity_matches_at_its_index() {
        let gt = vec![g(0.0, 0.0, 10.0, 5.0, 0.0), g(50.0, 50.0, 20.0, 8.0, 40.0)];
        let cfg = RectCriterionConfig::default();
        assert_eq!(rect_match(&gt[1], &gt, &cfg).unwrap(), Some(1));
    }

    #[test]
    fn rotated_45_fails_default() {
        let gt = vec![g(50.0, 50.0, 40.0, 20.0, 10.0)];
        let pred = g(50.0, 50.0, 40.0, 20.0, 55.0);
        assert_eq!(
            rect_match(&pred, &gt, &RectCriterionConfig::default()).unwrap(),
            None
        );
    }

    #[test]
    fn iou_point_six_passes_default() {
        let gt = vec![g(50.0, 50.0, 40.0, 20.0, 0.0)];
        let pred = g(60.0, 50.0, 40.0, 20.0, 0.0);
        assert_eq!(
            rect_match(&pred, &gt, &RectCriterionConfig::default()).unwrap(),
            Some(0)
        );
    }

    #[test]
    fn first_match_wins() {
        let a = g(50.0, 50.0, 40.0, 20.0, 0.0);
        let gt = vec![g(0.0, 0.0, 4.0, 2.0, 0.0), a, a];
        assert_eq!(
            rect_match(&a, &gt, &RectCriterionConfig::default()).unwrap(),
            Some(1)
        );
    }

    #[test]
    fn empty_ground_truth_is_error() {
        let p = g(0.0, 0.0, 1.0, 1.0, 0.0);
        assert!(matches!(
            rect_match(&p, &[], &RectCriterionConfig::default()),
            Err(Error::EmptyGroundTruth)
        ));
        assert!(min_grasp_distance(&p, &[]).is_err());
    }

    #[test]
    fn config_bounds() {
        assert!(RectCriterionConfig::new(0.0, 0.25).is_err());
        assert!(RectCriterionConfig::new(91.0, 0.25).is_err());
        assert!(RectCriterionConfig::new(30.0, 0.0).is_err());
        assert!(RectCriterionConfig::new(30.0, 1.5).is_err());
        assert!(RectCriterionConfig::new(90.0, 1.0).is_ok());
    }

    #[test]
    fn distance_examples() {
        let gt = vec![g(0.0, 0.0, 4.0, 2.0, 0.0)];
        assert_eq!(min_grasp_distance(&gt[0], &gt).unwrap(), 0.0);
        let pred = g(3.0, 4.0, 4.0, 2.0, 0.0);
        assert_eq!(min_grasp_distance(&pred, &gt).unwrap(), 25.0);
        let gt2 = vec![g(0.0, 0.0, 4.0, 2.0, 0.0), g(3.0, 6.0, 4.0, 2.0, 0.0)];
        assert_eq!(min_grasp_distance(&pred, &gt2).unwrap(), 4.0);
    }

    #[test]
    fn accuracy_counting() {
        let a = g(50.0, 50.0, 40.0, 20.0, 0.0);
        let mut gts = BTreeMap::new();
        gts.insert("s0".to_string(), vec![a]);
        let cfg = RectCriterionConfig::default();
        let all = vec![("s0".to_string(), a), ("s0".to_string(), a)];
        assert_eq!(batch_accuracy(&all, &gts, &cfg).unwrap(), 1.0);
        let half = vec![
            ("s0".to_string(), a),
            ("s0".to_string(), a.with_theta(80.0).unwrap()),
        ];
        assert_eq!(batch_accuracy(&half, &gts, &cfg).unwrap(), 0.5);
        assert!(matches!(
            batch_accuracy(&[], &gts, &cfg),
            Err(Error::NoPredictions)
        ));
        let bad = vec![("nope".to_string(), a), ("zz".to_string(), a)];
        match batch_accuracy(&bad, &gts, &cfg) {
            Err(Error::UnknownScenes(ids)) => assert_eq!(ids, vec!["nope", "zz"]),
            other => panic!("unexpected {other:?}"),
        }
    }

    mod props {
        use super::super::*;
        use proptest::prelude::*;

        fn grasp() -> impl Strategy<Value = Grasp> {
            (
                0.0..100.0f64,
                0.0..100.0f64,
                1.0..40.0f64,
                1.0..40.0f64,
                -90.0..90.0f64,
            )
                .prop_map(|(x, y, w, h, t)| Grasp::new(x, y, w, h, t).unwrap())
        }

        proptest! {
            #[test]
            fn match_is_translation_invariant(
                pred in grasp(),
                gt in proptest::collection::vec(grasp(), 1..6),
                dx in -500.0..500.0f64, dy in -500.0..500.0f64,
            ) {
                let cfg = RectCriterionConfig::default();
                let before = rect_match(&pred, &gt, &cfg).unwrap();
                let shift = |g: &Grasp| g.with_center(g.x() + dx, g.y() + dy).unwrap();
                let moved: Vec<Grasp> = gt.iter().map(shift).collect();
                let after = rect_match(&shift(&pred), &moved, &cfg).unwrap();
                // Translation perturbs IoU by rounding only; skip knife-edge cases.
                let near_edge = gt.iter().any(|g| (iou(&pred, g) - cfg.iou_thresh).abs() < 1e-9);
                prop_assume!(!near_edge);
                prop_assert_eq!(before, after);
            }

            #[test]
            fn distance_zero_iff_member(pred in grasp(), gt in proptest::collection::vec(grasp(), 1..5), pick in 0usize..5) {
                prop_assert!(min_grasp_distance(&pred, &gt).unwrap() > 0.0 || gt.contains(&pred));
                let member = gt[pick % gt.len()];
                prop_assert_eq!(min_grasp_distance(&member, &gt).unwrap(), 0.0);
            }
        }
    }
}
