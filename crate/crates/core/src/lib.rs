//! Synthetic grasp datasets from simulated grasp trials, and the tools to
//! score grasp predictions against them.

pub mod dataset;
pub mod error;
pub mod geometry;
pub mod grasp;
pub mod grid;
pub mod kv;
pub mod metric;
pub mod netpbm;
pub mod object;
pub mod pipeline;
pub mod sampler;
pub mod scene;
pub mod seed;
pub mod sgt;
pub mod shapes;

pub use dataset::{generate_dataset, read_dataset, Dataset, Manifest, Prediction};
pub use error::{Error, Result};
pub use geometry::iou;
pub use grasp::{angle_diff, normalize_angle, rect_corners, Grasp};
pub use grid::Grid;
pub use metric::{batch_accuracy, min_grasp_distance, rect_match, RectCriterionConfig};
pub use object::{ObjectModel, RescaleConfig};
pub use pipeline::{
    annotate_scene, AnnotationConfig, AnnotationEntry, AnnotationSet, DedupConfig, RunConfig,
};
pub use scene::{Camera, CameraConfig, Pose, Scene};
pub use seed::scene_seed;
pub use sgt::{simulate_grasp, trial_all_jaw_sizes, FailureReason, GripperConfig, TrialOutcome};
