//! Blind video quality assessment: natural-scene statistics, pooled deep
//! features, Score-CAM saliency, their fusions, and an SVR evaluation
//! protocol.

pub mod cache;
pub mod cnn;
pub mod correlation;
pub mod error;
pub mod evaluation;
pub mod fusion;
pub mod imageops;
pub mod ingest;
pub mod nss;
pub mod regression;
pub mod saliency;
pub mod synth;

pub use cache::FeatureCache;
pub use cnn::{Activation, DeepFeature, DeepKind, GraphOutputs, InferenceGraph, SyntheticGraph};
#[cfg(feature = "onnx")]
pub use cnn::OnnxGraph;
pub use correlation::{CorrelationRecord, Histogram};
pub use error::{Error, Result};
pub use evaluation::{CrossvalConfig, EvalReport, GridMode, LogisticParams, Metrics};
pub use fusion::{Backbones, FeatureExtractor, FeatureKind, FeatureVector};
pub use ingest::{DatasetManifest, Frame, FrameSource, SamplingPolicy, VideoRecord};
pub use nss::{NssVector, NSS_DIM};
pub use regression::{HyperGrid, Scaler, SvrModel, SvrParams};
pub use saliency::{SaliencyMap, ScoreCam};
