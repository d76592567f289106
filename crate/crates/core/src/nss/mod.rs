//! Natural-scene-statistics features.
//!
//! A video's NSS vector is the mean and standard deviation of per-frame
//! spatial features sampled at 2 frames/s, followed by temporal features
//! sampled at 8 frames/s: `680 + 680 + 476 = 1836` entries.

pub mod distribution;
pub mod mscn;
pub mod spatial;
pub mod stats;
pub mod temporal;

pub use distribution::{fit_aggd, fit_ggd, AggdFit, AggdParams, GgdParams};
pub use mscn::mscn_transform;
pub use spatial::{spatial_nss_frame, SPATIAL_DIM};
pub use temporal::{temporal_nss, TemporalAccumulator, TemporalNss, TEMPORAL_DIM};

use crate::error::{Error, Result};
use crate::ingest::{for_each_frame, Frame, FrameSource, SamplingPolicy, VideoRecord};

pub const NSS_DIM: usize = 2 * SPATIAL_DIM + TEMPORAL_DIM;
pub const SPATIAL_RATE: u32 = 2;
pub const TEMPORAL_RATE: u32 = 8;

#[derive(Clone, Debug, PartialEq)]
pub struct NssVector {
    pub spatial_mean: Vec<f64>,
    pub spatial_std: Vec<f64>,
    pub temporal: Vec<f64>,
}

impl NssVector {
    pub fn to_vec(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(NSS_DIM);
        v.extend_from_slice(&self.spatial_mean);
        v.extend_from_slice(&self.spatial_std);
        v.extend_from_slice(&self.temporal);
        v
    }
}

/// Running mean/std pool over per-frame spatial vectors.
#[derive(Debug)]
struct SpatialPool {
    sum: Vec<f64>,
    sum_sq: Vec<f64>,
    count: usize,
}

impl SpatialPool {
    fn new() -> Self {
        SpatialPool {
            sum: vec![0.0; SPATIAL_DIM],
            sum_sq: vec![0.0; SPATIAL_DIM],
            count: 0,
        }
    }

    fn add(&mut self, v: &[f64]) {
        for ((s, q), x) in self.sum.iter_mut().zip(&mut self.sum_sq).zip(v) {
            *s += x;
            *q += x * x;
        }
        self.count += 1;
    }

    fn finish(self) -> (Vec<f64>, Vec<f64>) {
        let n = self.count as f64;
        let mean: Vec<f64> = self.sum.iter().map(|s| s / n).collect();
        let std = self
            .sum_sq
            .iter()
            .zip(&mean)
            .map(|(q, m)| (q / n - m * m).max(0.0).sqrt())
            .collect();
        (mean, std)
    }
}

/// Builds the NSS vector from already-sampled frames.
pub fn nss_from_frames(spatial_frames: &[Frame], temporal_frames: &[Frame]) -> Result<NssVector> {
    if spatial_frames.is_empty() || temporal_frames.is_empty() {
        return Err(Error::InvalidArgument("NSS needs at least one frame".into()));
    }
    let mut pool = SpatialPool::new();
    for f in spatial_frames {
        pool.add(&spatial_nss_frame(f)?);
    }
    let (spatial_mean, spatial_std) = pool.finish();
    let temporal = temporal_nss(temporal_frames)?;
    Ok(NssVector {
        spatial_mean,
        spatial_std,
        temporal: temporal.values,
    })
}

/// Decodes `video` once, taking 2 frames/s for spatial and 8 frames/s for
/// temporal statistics (the former is a subset of the latter).
pub fn nss_video_vector(video: &VideoRecord, source: &FrameSource) -> Result<NssVector> {
    let mut pool = SpatialPool::new();
    let mut temporal = TemporalAccumulator::new();
    let spatial_policy = SamplingPolicy::PerSecond(SPATIAL_RATE);
    for_each_frame(video, source, SamplingPolicy::PerSecond(TEMPORAL_RATE), |frame| {
        if spatial_policy.selects(frame.source_index, video.fps) {
            pool.add(&spatial_nss_frame(&frame)?);
        }
        temporal.push(frame.luma())
    })
    .map_err(|e| e.for_video(&video.video_id))?;
    let temporal = temporal.finish();
    if temporal.zero_filled {
        log::debug!("{}: temporal NSS zero-filled (too few frames)", video.video_id);
    }
    let (spatial_mean, spatial_std) = pool.finish();
    Ok(NssVector {
        spatial_mean,
        spatial_std,
        temporal: temporal.values,
    })
}
