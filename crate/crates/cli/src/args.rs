use std::path::PathBuf;

use bvqa::FeatureKind;
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "bvqa", version, about = "Blind video quality assessment toolkit")]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Dataset manifest CSV (`video_id,path,mos,width,height,fps`)
    #[arg(long, global = true)]
    pub manifest: Vec<PathBuf>,

    /// Feature kinds, comma separated, or `all`
    #[arg(long, global = true, value_delimiter = ',', value_parser = parse_kinds)]
    pub kind: Vec<KindSel>,

    #[arg(long, global = true, default_value = "bvqa-cache")]
    pub cache_dir: PathBuf,

    /// Directory holding `resnet50_features.onnx` and `vgg16_features.onnx` with their sidecars
    #[arg(long, global = true)]
    pub models_dir: Option<PathBuf>,

    /// Use small seeded stand-in graphs instead of ONNX files
    #[arg(long, global = true, conflicts_with = "models_dir")]
    pub synthetic_models: bool,

    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    /// Worker threads; 0 uses every core
    #[arg(long, global = true, default_value_t = 0)]
    pub jobs: usize,

    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Program invoked as `<decoder> <input> <width> <height> rgb24` for non-directory inputs
    #[arg(long, global = true, env = "BVQA_DECODER")]
    pub decoder: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KindSel {
    All,
    One(FeatureKind),
}

fn parse_kinds(s: &str) -> Result<KindSel, String> {
    if s.eq_ignore_ascii_case("all") {
        return Ok(KindSel::All);
    }
    s.parse().map(KindSel::One).map_err(|e: bvqa::Error| e.to_string())
}

impl Common {
    /// Selected kinds in canonical order, without repeats.
    pub fn kinds(&self) -> Vec<FeatureKind> {
        if self.kind.contains(&KindSel::All) {
            return FeatureKind::ALL.to_vec();
        }
        FeatureKind::ALL
            .into_iter()
            .filter(|k| self.kind.contains(&KindSel::One(*k)))
            .collect()
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute features into the cache, skipping valid entries
    Extract(ExtractArgs),
    /// Fit an SVR on cached features and save it
    Train(TrainArgs),
    /// Repeated 80/20 hold-out evaluation on cached features
    Evaluate(EvaluateArgs),
    /// Windowed cosine between deep features and reduced saliency
    Correlate,
    /// Per-kind extraction and prediction timing
    Bench(BenchArgs),
    /// Render feature maps or a saliency overlay for one frame
    Visualize(VisualizeArgs),
    /// Write a synthetic distorted-clip dataset with a manifest
    Synth(SynthArgs),
}

#[derive(Debug, Args)]
pub struct ExtractArgs {
    /// Also write per-frame saliency maps (PNG and raw f32) under this directory
    #[arg(long)]
    pub save_saliency: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Skip the grid search and use this C (requires --gamma)
    #[arg(long, requires = "gamma")]
    pub c: Option<f64>,
    #[arg(long, requires = "c")]
    pub gamma: Option<f64>,
    #[arg(long, default_value_t = bvqa::regression::DEFAULT_EPSILON)]
    pub epsilon: f64,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum GridModeArg {
    /// Search C and gamma on every iteration's training split
    PerIteration,
    /// Search once and reuse the result
    Once,
}

impl From<GridModeArg> for bvqa::GridMode {
    fn from(m: GridModeArg) -> Self {
        match m {
            GridModeArg::PerIteration => bvqa::GridMode::PerIteration,
            GridModeArg::Once => bvqa::GridMode::Once,
        }
    }
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long, default_value_t = 100)]
    pub iterations: usize,
    #[arg(long, value_enum, default_value = "per-iteration")]
    pub grid_mode: GridModeArg,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Use at most this many videos from the manifest
    #[arg(long, default_value_t = 10)]
    pub limit: usize,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum GraphArg {
    Resnet,
    Vgg,
}

#[derive(Debug, Args)]
pub struct VisualizeArgs {
    /// Video id from --manifest
    #[arg(long, conflicts_with = "image")]
    pub video: Option<String>,
    /// A single image file instead of a video
    #[arg(long)]
    pub image: Option<PathBuf>,
    /// Decode-order index of the frame to render
    #[arg(long, default_value_t = 0)]
    pub frame: usize,
    #[arg(long, value_enum, default_value = "resnet")]
    pub graph: GraphArg,
    #[arg(long, default_value = bvqa::cnn::CONV_FINAL)]
    pub layer: String,
    /// Write the frame blended with its Score-CAM map instead of feature maps
    #[arg(long)]
    pub saliency: bool,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long, default_value_t = 40)]
    pub count: usize,
    #[arg(long, default_value_t = 64)]
    pub width: usize,
    #[arg(long, default_value_t = 64)]
    pub height: usize,
    #[arg(long, default_value_t = 16)]
    pub frames: usize,
    #[arg(long, default_value_t = 8.0)]
    pub fps: f64,
}
