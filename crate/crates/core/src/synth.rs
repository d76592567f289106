//! Procedural test clips with controlled blur and noise, written as frame
//! directories that the ingest layer reads like any other video.

use std::path::Path;

use image::RgbImage;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::imageops::{gaussian_kernel, separable_filter, Plane};
use crate::ingest::{write_manifest, DatasetManifest, VideoRecord, MOS_RANGE};

#[derive(Clone, Debug, PartialEq)]
pub struct SynthClip {
    pub width: usize,
    pub height: usize,
    pub frames: usize,
    pub fps: f64,
    /// Gaussian blur sigma in pixels; 0 disables blurring.
    pub blur_sigma: f64,
    /// Additive noise std on the [0, 255] scale.
    pub noise_sigma: f64,
    /// Selects the scene content and the noise realization.
    pub seed: u64,
}

struct Grating {
    fx: f64,
    fy: f64,
    phase: f64,
    amp: [f64; 3],
}

struct Disc {
    cx: f64,
    cy: f64,
    r: f64,
    colour: [f64; 3],
}

struct Scene {
    gratings: Vec<Grating>,
    discs: Vec<Disc>,
    velocity: (f64, f64),
}

impl Scene {
    fn new(rng: &mut ChaCha8Rng, w: f64, h: f64) -> Self {
        let gratings = (0..4)
            .map(|_| {
                let f = rng.random_range(0.02..0.25);
                let theta: f64 = rng.random_range(0.0..std::f64::consts::PI);
                Grating {
                    fx: f * theta.cos(),
                    fy: f * theta.sin(),
                    phase: rng.random_range(0.0..std::f64::consts::TAU),
                    amp: [rng.random_range(10.0..35.0), rng.random_range(10.0..35.0), rng.random_range(10.0..35.0)],
                }
            })
            .collect();
        let discs = (0..5)
            .map(|_| Disc {
                cx: rng.random_range(0.0..w),
                cy: rng.random_range(0.0..h),
                r: rng.random_range(0.08..0.25) * w.min(h),
                colour: [rng.random_range(-60.0..60.0), rng.random_range(-60.0..60.0), rng.random_range(-60.0..60.0)],
            })
            .collect();
        Scene {
            gratings,
            discs,
            velocity: (rng.random_range(-1.5..1.5), rng.random_range(-1.5..1.5)),
        }
    }

    fn sample(&self, x: f64, y: f64, c: usize) -> f64 {
        let mut v = 128.0;
        for g in &self.gratings {
            v += g.amp[c] * (std::f64::consts::TAU * (g.fx * x + g.fy * y) + g.phase).sin();
        }
        for d in &self.discs {
            if (x - d.cx).powi(2) + (y - d.cy).powi(2) <= d.r * d.r {
                v += d.colour[c];
            }
        }
        v
    }
}

impl SynthClip {
    /// RGB8 frames, row-major interleaved.
    pub fn render(&self) -> Result<Vec<Vec<u8>>> {
        if self.width == 0 || self.height == 0 || self.frames == 0 || !(self.fps > 0.0) {
            return Err(Error::InvalidArgument("synthetic clip needs positive size, length and fps".into()));
        }
        if self.blur_sigma < 0.0 || self.noise_sigma < 0.0 {
            return Err(Error::InvalidArgument("blur and noise levels must be non-negative".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let scene = Scene::new(&mut rng, self.width as f64, self.height as f64);
        let noise = Normal::new(0.0, self.noise_sigma.max(f64::MIN_POSITIVE)).expect("valid sigma");
        let taps = (self.blur_sigma > 0.0).then(|| {
            let radius = (3.0 * self.blur_sigma).ceil() as usize;
            gaussian_kernel(2 * radius + 1, self.blur_sigma)
        });
        let (w, h) = (self.width, self.height);
        let mut frames = Vec::with_capacity(self.frames);
        for t in 0..self.frames {
            let (dx, dy) = (scene.velocity.0 * t as f64, scene.velocity.1 * t as f64);
            let mut planes: Vec<Plane> = (0..3)
                .map(|c| {
                    let mut data = Vec::with_capacity(w * h);
                    for y in 0..h {
                        for x in 0..w {
                            data.push(scene.sample(x as f64 - dx, y as f64 - dy, c));
                        }
                    }
                    Plane::new(w, h, data)
                })
                .collect();
            if let Some(taps) = &taps {
                planes = planes.iter().map(|p| separable_filter(p, taps)).collect();
            }
            let mut bytes = Vec::with_capacity(w * h * 3);
            for i in 0..w * h {
                for p in &planes {
                    let n = if self.noise_sigma > 0.0 { noise.sample(&mut rng) } else { 0.0 };
                    bytes.push((p.data[i] + n).round().clamp(0.0, 255.0) as u8);
                }
            }
            frames.push(bytes);
        }
        Ok(frames)
    }

    /// Writes `frame_NNNNN.png` files into `dir`.
    pub fn write_dir(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        for (t, bytes) in self.render()?.into_iter().enumerate() {
            let img = RgbImage::from_raw(self.width as u32, self.height as u32, bytes).expect("sized buffer");
            let path = dir.join(format!("frame_{t:05}.png"));
            img.save(&path).map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
        }
        Ok(())
    }

    pub fn record(&self, video_id: impl Into<String>, dir: &Path, mos: f64) -> VideoRecord {
        VideoRecord {
            video_id: video_id.into(),
            path: dir.to_path_buf(),
            mos,
            width: self.width as u32,
            height: self.height as u32,
            fps: self.fps,
            duration_s: Some(self.frames as f64 / self.fps),
        }
    }
}

/// Shape of a synthetic dataset; clip `i` gets distortion level `i / (count − 1)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SynthDataset {
    pub count: usize,
    pub width: usize,
    pub height: usize,
    pub frames: usize,
    pub fps: f64,
    pub max_blur: f64,
    pub max_noise: f64,
    pub seed: u64,
}

impl Default for SynthDataset {
    fn default() -> Self {
        SynthDataset {
            count: 5,
            width: 64,
            height: 64,
            frames: 16,
            fps: 8.0,
            max_blur: 2.5,
            max_noise: 20.0,
            seed: 0,
        }
    }
}

impl SynthDataset {
    /// MOS falls linearly from 5 at level 0 to 1 at level 1.
    pub fn mos(level: f64) -> f64 {
        MOS_RANGE.1 - (MOS_RANGE.1 - MOS_RANGE.0) * level
    }

    pub fn clip(&self, i: usize) -> (SynthClip, f64) {
        let level = if self.count > 1 { i as f64 / (self.count - 1) as f64 } else { 0.0 };
        let clip = SynthClip {
            width: self.width,
            height: self.height,
            frames: self.frames,
            fps: self.fps,
            blur_sigma: self.max_blur * level,
            noise_sigma: self.max_noise * level,
            seed: self.seed.wrapping_mul(1_000_003).wrapping_add(i as u64),
        };
        (clip, level)
    }

    /// Renders every clip under `root/clips/` and writes `root/manifest.csv`.
    pub fn write(&self, root: &Path) -> Result<DatasetManifest> {
        let mut records = Vec::with_capacity(self.count);
        for i in 0..self.count {
            let (clip, level) = self.clip(i);
            let rel = format!("clips/clip_{i:03}");
            clip.write_dir(&root.join(&rel))?;
            let mut rec = clip.record(format!("clip_{i:03}"), Path::new(&rel), Self::mos(level));
            rec.duration_s = None;
            records.push(rec);
        }
        write_manifest(root.join("manifest.csv"), &records)?;
        crate::ingest::load_manifest(root.join("manifest.csv"))
    }
}
