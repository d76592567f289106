//! Score-CAM saliency, its 224-entry reduction, and map-level fusion with
//! deep feature maps.
//!
//! The reduction to 224 values is a column-wise mean and the fusion is a
//! broadcast add of the resized saliency map onto every channel. Both are
//! choices of this crate; only the output dimensions are fixed externally.

use std::path::Path;

use image::{GrayImage, Luma};

use crate::cnn::{prepare_input, Activation, InferenceGraph, INPUT_SIDE};
use crate::error::{Error, Result};
use crate::imageops::resize_bilinear;
use crate::ingest::Frame;

pub const SALIENCY_SIDE: usize = INPUT_SIDE;
pub const SALIENCY_DIM: usize = SALIENCY_SIDE;
/// Masked forward passes are issued in groups of this many channels.
pub const MASK_BATCH: usize = 32;

/// A 224×224 row-major map with values in `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct SaliencyMap {
    values: Vec<f64>,
}

impl SaliencyMap {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() != SALIENCY_SIDE * SALIENCY_SIDE {
            return Err(Error::DimensionMismatch {
                expected: SALIENCY_SIDE * SALIENCY_SIDE,
                got: values.len(),
            });
        }
        if values.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::InvalidArgument("saliency values must lie in [0, 1]".into()));
        }
        Ok(SaliencyMap { values })
    }

    pub fn zeros() -> Self {
        SaliencyMap {
            values: vec![0.0; SALIENCY_SIDE * SALIENCY_SIDE],
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn at(&self, row: usize, col: usize) -> f64 {
        self.values[row * SALIENCY_SIDE + col]
    }

    pub fn to_gray(&self) -> GrayImage {
        GrayImage::from_fn(SALIENCY_SIDE as u32, SALIENCY_SIDE as u32, |x, y| {
            Luma([(self.at(y as usize, x as usize) * 255.0).round() as u8])
        })
    }

    /// Writes an 8-bit PNG and a little-endian f32 sidecar (`.f32`) next to it.
    pub fn save(&self, png_path: &Path) -> Result<()> {
        self.to_gray()
            .save(png_path)
            .map_err(|e| Error::Format(format!("{}: {e}", png_path.display())))?;
        let raw: Vec<u8> = self.values.iter().flat_map(|&v| (v as f32).to_le_bytes()).collect();
        let raw_path = png_path.with_extension("f32");
        std::fs::write(&raw_path, raw).map_err(|e| Error::io(raw_path, e))
    }
}

/// Min-max normalization to `[0, 1]`; `None` when the input is constant.
fn min_max(values: &[f64]) -> Option<Vec<f64>> {
    let (lo, hi) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let span = hi - lo;
    (span > 0.0 && span.is_finite()).then(|| values.iter().map(|&v| ((v - lo) / span).clamp(0.0, 1.0)).collect())
}

fn softmax(xs: &[f64]) -> Vec<f64> {
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = xs.iter().map(|&x| (x - m).exp()).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|v| v / s).collect()
}

fn argmax(xs: &[f32]) -> usize {
    let mut best = 0;
    for (i, &v) in xs.iter().enumerate() {
        if v > xs[best] {
            best = i;
        }
    }
    best
}

/// Bilinear upsampling of one activation channel to the saliency resolution.
pub fn upsample_channel(maps: &Activation, c: usize) -> Vec<f64> {
    resize_bilinear(maps.channel(c), maps.width, maps.height, 1, SALIENCY_SIDE, SALIENCY_SIDE)
}

#[derive(Clone, Debug)]
pub struct ScoreCam {
    pub map: SaliencyMap,
    /// Target class: argmax of the unmasked logits.
    pub target_class: usize,
    /// Per-channel masked-input scores `softmax(logits)[target]`.
    pub scores: Vec<f64>,
    /// Softmax of `scores` across channels; sums to 1.
    pub weights: Vec<f64>,
    /// The weighted map was identically zero (or constant) and could not be normalized.
    pub degenerate: bool,
}

/// Score-CAM saliency of `frame` under `graph`.
///
/// 1. Forward the frame; take `conv_final` maps `A_k` and target `c = argmax logits`.
/// 2. Upsample each `A_k` to 224×224 and min-max normalize it into a mask
///    (constant channels give an all-zero mask).
/// 3. Forward `frame ⊙ mask_k`; score `s_k = softmax(logits)[c]`.
/// 4. Saliency = min-max(ReLU(Σ_k softmax(s)_k · upsampled A_k)).
pub fn score_cam(frame: &Frame, graph: &dyn InferenceGraph) -> Result<ScoreCam> {
    if graph.input_size() != (SALIENCY_SIDE, SALIENCY_SIDE) {
        return Err(Error::Model(format!(
            "{}: Score-CAM expects a {SALIENCY_SIDE}x{SALIENCY_SIDE} input",
            graph.graph_id()
        )));
    }
    let input = prepare_input(frame, graph)?;
    let base = graph.forward(&input)?;
    let target_class = argmax(&base.logits);
    let maps = &base.conv_final;
    let plane = SALIENCY_SIDE * SALIENCY_SIDE;

    let upsampled: Vec<Vec<f64>> = (0..maps.channels).map(|c| upsample_channel(maps, c)).collect();
    let mut scores = Vec::with_capacity(maps.channels);
    for group in upsampled.chunks(MASK_BATCH) {
        let batch: Vec<Vec<f32>> = group
            .iter()
            .map(|up| {
                let mask = min_max(up).unwrap_or_else(|| vec![0.0; plane]);
                let mut masked = input.clone();
                for ch in 0..3 {
                    for (v, m) in masked[ch * plane..(ch + 1) * plane].iter_mut().zip(&mask) {
                        *v = (*v as f64 * m) as f32;
                    }
                }
                masked
            })
            .collect();
        for out in graph.forward_batch(&batch)? {
            let logits: Vec<f64> = out.logits.iter().map(|&v| v as f64).collect();
            scores.push(softmax(&logits)[target_class]);
        }
    }
    let weights = softmax(&scores);

    let mut combined = vec![0.0; plane];
    for (w, up) in weights.iter().zip(&upsampled) {
        for (acc, v) in combined.iter_mut().zip(up) {
            *acc += w * v;
        }
    }
    combined.iter_mut().for_each(|v| *v = v.max(0.0));
    let (map, degenerate) = match min_max(&combined) {
        Some(values) => (SaliencyMap { values }, false),
        None => (SaliencyMap::zeros(), true),
    };
    Ok(ScoreCam {
        map,
        target_class,
        scores,
        weights,
        degenerate,
    })
}

/// Column-wise mean of a saliency map (224 entries).
pub fn saliency_vector(map: &SaliencyMap) -> Vec<f64> {
    column_means(map.values())
}

/// Column means of any 224×224 row-major array; linear in its input.
pub fn column_means(values: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; SALIENCY_SIDE];
    for row in values.chunks_exact(SALIENCY_SIDE) {
        for (o, v) in out.iter_mut().zip(row) {
            *o += v;
        }
    }
    out.iter_mut().for_each(|o| *o /= SALIENCY_SIDE as f64);
    out
}

/// Adds the saliency map, resized to the maps' spatial size, to every channel.
pub fn fuse_map_sum(conv_maps: &Activation, map: &SaliencyMap) -> Result<Activation> {
    let resized = resize_bilinear(map.values(), SALIENCY_SIDE, SALIENCY_SIDE, 1, conv_maps.width, conv_maps.height);
    let n = conv_maps.width * conv_maps.height;
    if resized.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: resized.len(),
        });
    }
    let mut out = conv_maps.clone();
    for c in 0..out.channels {
        for (v, s) in out.channel_mut(c).iter_mut().zip(&resized) {
            *v = (*v as f64 + s) as f32;
        }
    }
    Ok(out)
}
