//! Window-shifted cosine similarity between per-frame deep features and
//! reduced saliency maps.

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cnn::{deep_feature, InferenceGraph, DeepKind};
use crate::error::{Error, Result};
use crate::imageops::resize_bilinear;
use crate::ingest::{sample_frames, DatasetManifest, FrameSource, SamplingPolicy};
use crate::saliency::{score_cam, SaliencyMap, SALIENCY_SIDE};

pub const REDUCED_SIDE: usize = 45;
pub const REDUCED_DIM: usize = REDUCED_SIDE * REDUCED_SIDE;
pub const BIN_WIDTH: f64 = 0.01;

pub fn cosine(v1: &[f64], v2: &[f64]) -> Result<f64> {
    if v1.len() != v2.len() {
        return Err(Error::DimensionMismatch { expected: v1.len(), got: v2.len() });
    }
    let (mut dot, mut n1, mut n2) = (0.0, 0.0, 0.0);
    for (a, b) in v1.iter().zip(v2) {
        dot += a * b;
        n1 += a * a;
        n2 += b * b;
    }
    if n1 == 0.0 || n2 == 0.0 {
        return Err(Error::Degenerate("cosine of a zero vector".into()));
    }
    Ok((dot / (n1.sqrt() * n2.sqrt())).clamp(-1.0, 1.0))
}

/// Bilinear 224×224 → 45×45, flattened row-major.
pub fn reduce_saliency(map: &SaliencyMap) -> Vec<f64> {
    resize_bilinear(map.values(), SALIENCY_SIDE, SALIENCY_SIDE, 1, REDUCED_SIDE, REDUCED_SIDE)
}

#[derive(Clone, Debug, PartialEq)]
pub struct WindowedCosine {
    /// Windows that contributed to the average.
    pub windows: usize,
    /// Offsets skipped because the subvector was zero.
    pub skipped: Vec<usize>,
    pub avg_cosine: f64,
}

/// Mean cosine between `s` and every length-`|s|` window of `df`, stride 1.
pub fn windowed_cosine(df: &[f64], s: &[f64]) -> Result<WindowedCosine> {
    if s.is_empty() || df.len() < s.len() {
        return Err(Error::InvalidArgument(format!(
            "window of {} does not fit a deep feature of {}",
            s.len(),
            df.len()
        )));
    }
    if s.iter().all(|&v| v == 0.0) {
        return Err(Error::Degenerate("saliency vector is zero".into()));
    }
    let mut sum = 0.0;
    let mut windows = 0;
    let mut skipped = Vec::new();
    for o in 0..=df.len() - s.len() {
        match cosine(&df[o..o + s.len()], s) {
            Ok(c) => {
                sum += c;
                windows += 1;
            }
            Err(Error::Degenerate(_)) => skipped.push(o),
            Err(e) => return Err(e),
        }
    }
    if windows == 0 {
        return Err(Error::Degenerate("every window of the deep feature is zero".into()));
    }
    Ok(WindowedCosine {
        windows,
        skipped,
        avg_cosine: (sum / windows as f64).clamp(-1.0, 1.0),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorrelationRecord {
    pub video_id: String,
    pub frame_index: usize,
    pub windows: usize,
    pub avg_cosine: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub bin_width: f64,
    /// `counts.len() + 1` edges from −1 to 1.
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
}

impl Histogram {
    pub fn new(bin_width: f64) -> Self {
        let bins = (2.0 / bin_width).round() as usize;
        Histogram {
            bin_width,
            edges: (0..=bins).map(|i| -1.0 + i as f64 * bin_width).collect(),
            counts: vec![0; bins],
        }
    }

    /// Bins are half-open `[lo, hi)` except the last, which includes 1.
    pub fn add(&mut self, v: f64) {
        let bins = self.counts.len();
        let i = (((v + 1.0) / self.bin_width).floor().max(0.0) as usize).min(bins - 1);
        self.counts[i] += 1;
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn from_values(values: impl IntoIterator<Item = f64>) -> Self {
        let mut h = Histogram::new(BIN_WIDTH);
        values.into_iter().for_each(|v| h.add(v));
        h
    }
}

#[derive(Clone, Debug)]
pub struct CorrelationRun {
    pub records: Vec<CorrelationRecord>,
    pub histogram: Histogram,
    /// Videos that failed, with the error text.
    pub failures: Vec<(String, String)>,
}

/// Per-frame windowed cosine between the deep feature and reduced saliency
/// at one frame per second.
pub fn frame_correlation(frame: &crate::ingest::Frame, resnet: &dyn InferenceGraph, vgg: &dyn InferenceGraph) -> Result<WindowedCosine> {
    let df = deep_feature(frame, resnet)?;
    debug_assert_eq!(df.values.len(), DeepKind::Cnn2048.dim());
    let cam = score_cam(frame, vgg)?;
    windowed_cosine(&df.values, &reduce_saliency(&cam.map))
}

pub fn dataset_correlation(manifest: &DatasetManifest, resnet: &dyn InferenceGraph, vgg: &dyn InferenceGraph, source: &FrameSource) -> CorrelationRun {
    let per_video: Vec<Result<Vec<CorrelationRecord>>> = manifest
        .records
        .par_iter()
        .map(|video| {
            let frames = sample_frames(video, source, SamplingPolicy::PerSecond(1))?;
            frames
                .par_iter()
                .map(|f| {
                    let w = frame_correlation(f, resnet, vgg)?;
                    Ok(CorrelationRecord {
                        video_id: video.video_id.clone(),
                        frame_index: f.source_index,
                        windows: w.windows,
                        avg_cosine: w.avg_cosine,
                    })
                })
                .collect::<Result<Vec<_>>>()
                .map_err(|e| e.for_video(&video.video_id))
        })
        .collect();

    let mut records = Vec::new();
    let mut failures = Vec::new();
    for (video, r) in manifest.records.iter().zip(per_video) {
        match r {
            Ok(mut recs) => records.append(&mut recs),
            Err(e) => {
                log::warn!("{e}");
                failures.push((video.video_id.clone(), e.to_string()));
            }
        }
    }
    let histogram = Histogram::from_values(records.iter().map(|r| r.avg_cosine));
    CorrelationRun {
        records,
        histogram,
        failures,
    }
}

impl CorrelationRun {
    /// Writes `<stem>.csv` (`video_id,frame_index,avg_cosine`) and `<stem>.histogram.json`.
    pub fn write(&self, dir: &Path, stem: &str) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let csv_path = dir.join(format!("{stem}.csv"));
        let mut w = csv::Writer::from_path(&csv_path).map_err(|e| Error::Format(format!("{}: {e}", csv_path.display())))?;
        let fmt_err = |e: csv::Error| Error::Format(format!("{}: {e}", csv_path.display()));
        w.write_record(["video_id", "frame_index", "avg_cosine"]).map_err(fmt_err)?;
        for r in &self.records {
            w.write_record([r.video_id.clone(), r.frame_index.to_string(), format!("{}", r.avg_cosine)])
                .map_err(fmt_err)?;
        }
        w.flush().map_err(|e| Error::io(&csv_path, e))?;
        let hist_path = dir.join(format!("{stem}.histogram.json"));
        let json = serde_json::to_string_pretty(&self.histogram).map_err(|e| Error::Format(e.to_string()))?;
        std::fs::write(&hist_path, json).map_err(|e| Error::io(hist_path, e))
    }
}
