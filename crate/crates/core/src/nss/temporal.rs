//! Temporal NSS features from Haar-filtered frame differences.
//!
//! Two undecimated temporal Haar detail bands are formed from consecutive
//! luma frames:
//!
//! * scale 1: `(L[t+1] − L[t]) / √2`
//! * scale 2: `(L[t+2] + L[t+3] − L[t] − L[t+1]) / 2`
//!
//! Each band frame is summarized at two spatial scales by 7 maps (raw band,
//! band MSCN, four MSCN paired products, local deviation field) × 17
//! statistics, and the summaries are averaged over the clip. Layout:
//! `[t1·s1, t1·s2, t2·s1, t2·s2]`, 119 entries each.

use std::collections::VecDeque;

use super::mscn::{mscn_with_sigma, paired_products};
use super::stats::{summarize_into, STATS_PER_MAP};
use crate::error::{Error, Result};
use crate::imageops::{downsample2, Plane};
use crate::ingest::Frame;

pub const MAPS_PER_BAND: usize = 7;
const BLOCK: usize = MAPS_PER_BAND * STATS_PER_MAP;
const BAND_DIM: usize = 2 * BLOCK;
pub const TEMPORAL_DIM: usize = 2 * BAND_DIM;

/// Clip-level temporal features; `zero_filled` marks bands that had too few frames.
#[derive(Clone, Debug, PartialEq)]
pub struct TemporalNss {
    pub values: Vec<f64>,
    pub zero_filled: bool,
}

fn band_features(band: &Plane, out: &mut Vec<f64>) -> Result<()> {
    for plane in [band.clone(), downsample2(band)] {
        summarize_into(&plane.data, out);
        let m = mscn_with_sigma(&plane)?;
        summarize_into(&m.coefficients.data, out);
        for p in paired_products(&m.coefficients) {
            summarize_into(&p, out);
        }
        summarize_into(&m.local_sigma.data, out);
    }
    Ok(())
}

/// Streaming accumulator; feed luma frames in temporal order.
#[derive(Debug, Default)]
pub struct TemporalAccumulator {
    window: VecDeque<Plane>,
    sums: [Vec<f64>; 2],
    counts: [usize; 2],
    scratch: Vec<f64>,
}

impl TemporalAccumulator {
    pub fn new() -> Self {
        TemporalAccumulator {
            sums: [vec![0.0; BAND_DIM], vec![0.0; BAND_DIM]],
            ..Default::default()
        }
    }

    fn add_band(&mut self, scale: usize, band: &Plane) -> Result<()> {
        self.scratch.clear();
        band_features(band, &mut self.scratch)?;
        for (s, v) in self.sums[scale].iter_mut().zip(&self.scratch) {
            *s += v;
        }
        self.counts[scale] += 1;
        Ok(())
    }

    pub fn push(&mut self, luma: Plane) -> Result<()> {
        if let Some(first) = self.window.front() {
            if (first.width, first.height) != (luma.width, luma.height) {
                return Err(Error::InvalidArgument("temporal frames differ in size".into()));
            }
        }
        self.window.push_back(luma);
        if self.window.len() > 4 {
            self.window.pop_front();
        }
        let n = self.window.len();
        if n >= 2 {
            let d1 = self.window[n - 1].zip_map(&self.window[n - 2], |a, b| (a - b) / std::f64::consts::SQRT_2);
            self.add_band(0, &d1)?;
        }
        if n == 4 {
            let w = &self.window;
            let later = w[2].zip_map(&w[3], |a, b| a + b);
            let earlier = w[0].zip_map(&w[1], |a, b| a + b);
            let d2 = later.zip_map(&earlier, |a, b| (a - b) / 2.0);
            self.add_band(1, &d2)?;
        }
        Ok(())
    }

    pub fn finish(self) -> TemporalNss {
        let mut values = Vec::with_capacity(TEMPORAL_DIM);
        let mut zero_filled = false;
        for scale in 0..2 {
            if self.counts[scale] == 0 {
                zero_filled = true;
                values.extend(std::iter::repeat(0.0).take(BAND_DIM));
            } else {
                let n = self.counts[scale] as f64;
                values.extend(self.sums[scale].iter().map(|s| s / n));
            }
        }
        TemporalNss { values, zero_filled }
    }
}

/// The 476-entry temporal NSS vector of a clip sampled at 8 frames per second.
///
/// A single frame yields a zero-filled, flagged vector.
pub fn temporal_nss(frames: &[Frame]) -> Result<TemporalNss> {
    let mut acc = TemporalAccumulator::new();
    for f in frames {
        acc.push(f.luma())?;
    }
    Ok(acc.finish())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dimension_is_476() {
        assert_eq!(TEMPORAL_DIM, 476);
    }

    #[test]
    fn single_frame_zero_filled() {
        let t = temporal_nss(&[Frame::constant(32, 32, 0.3).unwrap()]).unwrap();
        assert!(t.zero_filled);
        assert_eq!(t.values, vec![0.0; 476]);
    }

    #[test]
    fn static_clip_is_finite() {
        let frames = vec![Frame::constant(32, 32, 0.3).unwrap(); 6];
        let t = temporal_nss(&frames).unwrap();
        assert!(!t.zero_filled);
        assert_eq!(t.values.len(), 476);
        assert!(t.values.iter().all(|v| v.is_finite()));
    }
}
