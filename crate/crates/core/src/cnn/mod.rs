//! Pooled deep features from pre-trained classification graphs.

#[cfg(feature = "onnx")]
mod onnx;
mod synthetic;
mod visualize;

#[cfg(feature = "onnx")]
pub use onnx::{sidecar_path, Normalization, OnnxGraph, Sidecar, SidecarOutput};
pub use synthetic::SyntheticGraph;
pub use visualize::{dump_activations, ActivationDump};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{resize_normalize, Frame};

pub const CONV_FINAL: &str = "conv_final";
pub const POOLED: &str = "pooled";
pub const LOGITS: &str = "logits";
pub const INPUT_SIDE: usize = 224;

/// A `C×H×W` activation tensor, channel-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Activation {
    pub channels: usize,
    pub height: usize,
    pub width: usize,
    pub data: Vec<f32>,
}

impl Activation {
    pub fn new(channels: usize, height: usize, width: usize, data: Vec<f32>) -> Result<Self> {
        if data.len() != channels * height * width {
            return Err(Error::DimensionMismatch {
                expected: channels * height * width,
                got: data.len(),
            });
        }
        Ok(Activation {
            channels,
            height,
            width,
            data,
        })
    }

    pub fn channel(&self, c: usize) -> &[f32] {
        let n = self.height * self.width;
        &self.data[c * n..(c + 1) * n]
    }

    pub fn channel_mut(&mut self, c: usize) -> &mut [f32] {
        let n = self.height * self.width;
        &mut self.data[c * n..(c + 1) * n]
    }
}

/// The outputs every inference graph must expose.
#[derive(Clone, Debug, PartialEq)]
pub struct GraphOutputs {
    pub conv_final: Activation,
    pub pooled: Vec<f32>,
    pub logits: Vec<f32>,
}

/// A loaded, immutable classification graph.
///
/// Inputs are planar `3×H×W` tensors scaled to `[0, 1]`; any channel
/// standardization is part of the graph.
pub trait InferenceGraph: Send + Sync {
    fn graph_id(&self) -> &str;

    /// Identifies the exact weights, for cache invalidation.
    fn fingerprint(&self) -> String;

    /// `(width, height)` of the expected input.
    fn input_size(&self) -> (usize, usize) {
        (INPUT_SIDE, INPUT_SIDE)
    }

    fn forward(&self, input: &[f32]) -> Result<GraphOutputs>;

    fn forward_batch(&self, inputs: &[Vec<f32>]) -> Result<Vec<GraphOutputs>> {
        inputs.iter().map(|x| self.forward(x)).collect()
    }

    /// Names of intermediate outputs available to [`InferenceGraph::tap`].
    fn layers(&self) -> Vec<String>;

    fn tap(&self, input: &[f32], layer: &str) -> Result<Activation>;
}

/// Resizes `frame` to the graph's input size and lays it out planar.
pub fn prepare_input(frame: &Frame, graph: &dyn InferenceGraph) -> Result<Vec<f32>> {
    let (w, h) = graph.input_size();
    Ok(resize_normalize(frame, w, h)?.to_chw())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DeepKind {
    /// Spatially averaged final convolutional maps.
    Cnn2048,
    /// Spatial mean and standard deviation of the final convolutional maps.
    Vsfa4096,
}

impl DeepKind {
    pub fn dim(self) -> usize {
        match self {
            DeepKind::Cnn2048 => 2048,
            DeepKind::Vsfa4096 => 4096,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DeepFeature {
    pub kind: DeepKind,
    pub values: Vec<f64>,
}

impl DeepFeature {
    pub fn new(kind: DeepKind, values: Vec<f64>) -> Result<Self> {
        if values.len() != kind.dim() {
            return Err(Error::DimensionMismatch {
                expected: kind.dim(),
                got: values.len(),
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("deep feature"));
        }
        Ok(DeepFeature { kind, values })
    }
}

/// Per-channel spatial mean.
pub fn spatial_mean_pool(maps: &Activation) -> Vec<f64> {
    let n = (maps.height * maps.width) as f64;
    (0..maps.channels)
        .map(|c| maps.channel(c).iter().map(|&v| v as f64).sum::<f64>() / n)
        .collect()
}

/// Per-channel spatial means followed by per-channel population standard deviations.
pub fn mean_std_pool(maps: &Activation) -> Vec<f64> {
    let n = (maps.height * maps.width) as f64;
    let means = spatial_mean_pool(maps);
    let stds: Vec<f64> = (0..maps.channels)
        .map(|c| {
            let m = means[c];
            let var = maps
                .channel(c)
                .iter()
                .map(|&v| (v as f64 - m).powi(2))
                .sum::<f64>()
                / n;
            var.sqrt()
        })
        .collect();
    let mut out = means;
    out.extend(stds);
    out
}

/// Average-pooled final convolutional maps (2048 entries for a ResNet-50 backbone).
pub fn deep_feature(frame: &Frame, graph: &dyn InferenceGraph) -> Result<DeepFeature> {
    let out = graph.forward(&prepare_input(frame, graph)?)?;
    DeepFeature::new(DeepKind::Cnn2048, spatial_mean_pool(&out.conv_final))
}

/// Content-aware feature: spatial mean and std pooling of the final maps (4096 entries).
pub fn vsfa_content_feature(frame: &Frame, graph: &dyn InferenceGraph) -> Result<DeepFeature> {
    let out = graph.forward(&prepare_input(frame, graph)?)?;
    DeepFeature::new(DeepKind::Vsfa4096, mean_std_pool(&out.conv_final))
}

/// Element-wise mean of per-frame features of one kind.
pub fn pool_video(per_frame: &[DeepFeature]) -> Result<DeepFeature> {
    let first = per_frame
        .first()
        .ok_or_else(|| Error::InvalidArgument("no frame features to pool".into()))?;
    if per_frame.iter().any(|f| f.kind != first.kind) {
        return Err(Error::InvalidArgument("mixed deep feature kinds".into()));
    }
    let mut sum = vec![0.0; first.values.len()];
    for f in per_frame {
        for (s, v) in sum.iter_mut().zip(&f.values) {
            *s += v;
        }
    }
    let n = per_frame.len() as f64;
    DeepFeature::new(first.kind, sum.into_iter().map(|s| s / n).collect())
}

/// Streaming counterpart of [`pool_video`].
#[derive(Debug, Clone)]
pub struct MeanPool {
    sum: Vec<f64>,
    count: usize,
}

impl MeanPool {
    pub fn new(dim: usize) -> Self {
        MeanPool {
            sum: vec![0.0; dim],
            count: 0,
        }
    }

    pub fn add(&mut self, v: &[f64]) -> Result<()> {
        if v.len() != self.sum.len() {
            return Err(Error::DimensionMismatch {
                expected: self.sum.len(),
                got: v.len(),
            });
        }
        for (s, x) in self.sum.iter_mut().zip(v) {
            *s += x;
        }
        self.count += 1;
        Ok(())
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn mean(&self) -> Result<Vec<f64>> {
        if self.count == 0 {
            return Err(Error::InvalidArgument("nothing to pool".into()));
        }
        let n = self.count as f64;
        Ok(self.sum.iter().map(|s| s / n).collect())
    }
}
