use std::path::Path;

use image::{GrayImage, Luma};

use super::{prepare_input, Activation, InferenceGraph};
use crate::error::{Error, Result};
use crate::ingest::Frame;

/// At most this many channels are rendered individually.
pub const MAX_RENDERED_CHANNELS: usize = 64;
const GRID_COLUMNS: usize = 8;

/// Rendered activations of one layer for one frame.
#[derive(Clone, Debug)]
pub struct ActivationDump {
    pub layer: String,
    /// Per-channel images for the first (up to) 64 channels, min-max normalized.
    pub channels: Vec<GrayImage>,
    /// Channel (over all channels) holding the largest activation; ties go to the lowest index.
    pub max_channel: usize,
    pub max_image: GrayImage,
}

/// Min-max normalizes one channel to 8 bits; a constant channel renders mid-gray.
fn render_channel(maps: &Activation, c: usize) -> GrayImage {
    let data = maps.channel(c);
    let (lo, hi) = data
        .iter()
        .fold((f32::INFINITY, f32::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let span = hi - lo;
    GrayImage::from_fn(maps.width as u32, maps.height as u32, |x, y| {
        let v = data[y as usize * maps.width + x as usize];
        let g = if span > 0.0 && span.is_finite() {
            ((v - lo) / span * 255.0).round() as u8
        } else {
            128
        };
        Luma([g])
    })
}

pub fn argmax_channel(maps: &Activation) -> usize {
    let mut best = (0, f32::NEG_INFINITY);
    for c in 0..maps.channels {
        let m = maps.channel(c).iter().copied().fold(f32::NEG_INFINITY, f32::max);
        if m > best.1 {
            best = (c, m);
        }
    }
    best.0
}

pub fn dump_activations(frame: &Frame, graph: &dyn InferenceGraph, layer: &str) -> Result<ActivationDump> {
    if !graph.layers().iter().any(|l| l == layer) {
        return Err(Error::UnknownLayer(layer.to_string()));
    }
    let maps = graph.tap(&prepare_input(frame, graph)?, layer)?;
    Ok(activation_dump(&maps, layer))
}

pub fn activation_dump(maps: &Activation, layer: &str) -> ActivationDump {
    let shown = maps.channels.min(MAX_RENDERED_CHANNELS);
    let max_channel = argmax_channel(maps);
    ActivationDump {
        layer: layer.to_string(),
        channels: (0..shown).map(|c| render_channel(maps, c)).collect(),
        max_channel,
        max_image: render_channel(maps, max_channel),
    }
}

impl ActivationDump {
    /// Tiles the rendered channels 8 per row with a 1-pixel black gutter.
    pub fn grid(&self) -> GrayImage {
        let Some(first) = self.channels.first() else {
            return GrayImage::new(1, 1);
        };
        let (w, h) = (first.width(), first.height());
        let cols = GRID_COLUMNS.min(self.channels.len()) as u32;
        let rows = self.channels.len().div_ceil(GRID_COLUMNS) as u32;
        let mut out = GrayImage::new(cols * (w + 1) - 1, rows * (h + 1) - 1);
        for (i, img) in self.channels.iter().enumerate() {
            let (gx, gy) = ((i % GRID_COLUMNS) as u32 * (w + 1), (i / GRID_COLUMNS) as u32 * (h + 1));
            for (x, y, p) in img.enumerate_pixels() {
                out.put_pixel(gx + x, gy + y, *p);
            }
        }
        out
    }

    /// Writes `<layer>_ch<NNN>.png`, `<layer>_grid.png` and `<layer>_max_ch<NNN>.png`.
    pub fn write(&self, dir: &Path) -> Result<Vec<std::path::PathBuf>> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let mut written = Vec::new();
        let mut save = |img: &GrayImage, name: String| -> Result<()> {
            let p = dir.join(name);
            img.save(&p).map_err(|e| Error::Format(format!("{}: {e}", p.display())))?;
            written.push(p);
            Ok(())
        };
        for (c, img) in self.channels.iter().enumerate() {
            save(img, format!("{}_ch{c:03}.png", self.layer))?;
        }
        save(&self.grid(), format!("{}_grid.png", self.layer))?;
        save(&self.max_image, format!("{}_max_ch{:03}.png", self.layer, self.max_channel))?;
        Ok(written)
    }
}
