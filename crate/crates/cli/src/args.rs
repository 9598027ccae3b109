use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(
    name = "graspgen",
    version,
    about = "Generate synthetic grasp datasets and evaluate grasp predictions",
    after_help = "Exit status: 0 success, 1 invalid input or configuration, 2 runtime failure."
)]
pub struct Cli {
    /// Log verbosity (error, warn, info, debug, trace)
    #[arg(long, global = true, default_value = "warn", env = "GRASPGEN_LOG")]
    pub log_level: String,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build scenes from an object pool and annotate them by simulated grasp trials
    Generate(GenerateArgs),
    /// Score a prediction file with the rectangle criterion
    EvalRect(EvalRectArgs),
    /// Score a prediction file by replaying each grasp in the simulator
    EvalSgt(EvalSgtArgs),
    /// Draw annotations (and optionally predictions) over a scene's depth image
    RenderOverlay(OverlayArgs),
    /// Write a scene's candidate probability map as a 16-bit graymap
    ProbabilityMap(ProbabilityMapArgs),
    /// Serve simulated grasp trials over HTTP
    Serve(ServeArgs),
    /// Write the built-in analytic fixture objects as heightmap files
    Fixtures(FixturesArgs),
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// Directory of objects: `<id>.meta` heightmaps and `<id>.obj` meshes
    #[arg(long)]
    pub objects: PathBuf,
    /// Output dataset directory
    #[arg(long)]
    pub out: PathBuf,
    /// Master seed from which every per-scene seed is derived
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Scenes per object (1 to 5)
    #[arg(long, default_value_t = 5)]
    pub scenes_per_object: usize,
    /// Candidate grasps sampled per scene
    #[arg(long, default_value_t = 5000)]
    pub candidates: usize,
    /// Parallel scene jobs; 0 uses every available core
    #[arg(long, default_value_t = 0)]
    pub workers: usize,
    /// Cells across the longest horizontal extent when rasterizing meshes
    #[arg(long, default_value_t = 256)]
    pub mesh_cells: usize,
    /// Image width, pixels
    #[arg(long, default_value_t = 256)]
    pub camera_width: usize,
    /// Image height, pixels
    #[arg(long, default_value_t = 256)]
    pub camera_height: usize,
    /// Camera height above the table, meters
    #[arg(long, default_value_t = 1.0)]
    pub camera_distance: f64,
    /// Fixed meters per pixel; when omitted the frame is fitted to each object
    #[arg(long)]
    pub camera_resolution: Option<f64>,
    /// Frame width as a multiple of the object's longest side when fitting
    #[arg(long, default_value_t = 3.0)]
    pub fit_factor: f64,
    /// Gripper stroke, meters
    #[arg(long, default_value_t = 0.10)]
    pub max_opening: f64,
}

#[derive(Debug, Args)]
pub struct DatasetArg {
    /// Dataset directory written by `generate`
    #[arg(long, env = "GRASPGEN_DATASET")]
    pub dataset: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvalRectArgs {
    /// Prediction file: `scene_id;x;y;theta;opening;jaw_size` per line
    #[arg(long)]
    pub pred: PathBuf,
    #[command(flatten)]
    pub dataset: DatasetArg,
    /// Maximum orientation difference, degrees
    #[arg(long, default_value_t = 30.0)]
    pub angle_thresh: f64,
    /// Minimum intersection over union
    #[arg(long, default_value_t = 0.25)]
    pub iou_thresh: f64,
    /// JSON report path [default: <pred>.rect.json]
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvalSgtArgs {
    /// Prediction file: `scene_id;x;y;theta;opening;jaw_size` per line
    #[arg(long)]
    pub pred: PathBuf,
    #[command(flatten)]
    pub dataset: DatasetArg,
    /// JSON report path [default: <pred>.sgt.json]
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct OverlayArgs {
    /// Scene directory, `<dataset>/<object_id>/<k>`
    #[arg(long)]
    pub scene: PathBuf,
    /// Output PNG
    #[arg(long)]
    pub out: PathBuf,
    /// Prediction file; lines for this scene are drawn in a distinct style
    #[arg(long)]
    pub pred: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ProbabilityMapArgs {
    /// Scene directory, `<dataset>/<object_id>/<k>`
    #[arg(long)]
    pub scene: PathBuf,
    /// Output graymap
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[command(flatten)]
    pub dataset: DatasetArg,
    /// Listen address
    #[arg(long, default_value = "127.0.0.1:8080")]
    pub addr: String,
    /// Submission log [default: <dataset>/submissions.ndjson]
    #[arg(long)]
    pub log: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FixturesArgs {
    /// Output directory for `<id>.meta` and `<id>.grid` files
    #[arg(long)]
    pub out: PathBuf,
    /// Meters per cell
    #[arg(long, default_value_t = 0.001)]
    pub resolution: f64,
}
