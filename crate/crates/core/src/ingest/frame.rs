use crate::error::{Error, Result};
use crate::imageops::{resize_bilinear, Plane};

/// A decoded RGB frame with samples normalized to `[0, 1]`, interleaved row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Frame {
    pub width: usize,
    pub height: usize,
    pub data: Vec<f32>,
    pub source_index: usize,
    pub timestamp_s: f64,
}

impl Frame {
    pub const CHANNELS: usize = 3;

    pub fn new(width: usize, height: usize, data: Vec<f32>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidArgument("frame dimensions must be positive".into()));
        }
        if data.len() != width * height * 3 {
            return Err(Error::DimensionMismatch {
                expected: width * height * 3,
                got: data.len(),
            });
        }
        if let Some(v) = data.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::InvalidArgument(format!("frame sample {v} outside [0, 1]")));
        }
        Ok(Frame {
            width,
            height,
            data,
            source_index: 0,
            timestamp_s: 0.0,
        })
    }

    pub fn from_rgb8(width: usize, height: usize, bytes: &[u8]) -> Result<Self> {
        if bytes.len() != width * height * 3 {
            return Err(Error::DimensionMismatch {
                expected: width * height * 3,
                got: bytes.len(),
            });
        }
        Frame::new(width, height, bytes.iter().map(|&b| b as f32 / 255.0).collect())
    }

    /// A frame with every sample set to `value`.
    pub fn constant(width: usize, height: usize, value: f32) -> Result<Self> {
        Frame::new(width, height, vec![value; width * height * 3])
    }

    pub fn with_position(mut self, source_index: usize, timestamp_s: f64) -> Self {
        self.source_index = source_index;
        self.timestamp_s = timestamp_s;
        self
    }

    #[inline]
    pub fn rgb(&self, x: usize, y: usize) -> [f32; 3] {
        let i = (y * self.width + x) * 3;
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }

    /// BT.601 luma on the `[0, 255]` scale.
    pub fn luma(&self) -> Plane {
        let data = self
            .data
            .chunks_exact(3)
            .map(|p| 255.0 * (0.299 * p[0] as f64 + 0.587 * p[1] as f64 + 0.114 * p[2] as f64))
            .collect();
        Plane::new(self.width, self.height, data)
    }

    /// BT.601 colour-difference planes (Cb, Cr), zero-centred, on the `[0, 255]` scale.
    pub fn chroma(&self) -> (Plane, Plane) {
        let (mut cb, mut cr) = (Vec::with_capacity(self.data.len() / 3), Vec::with_capacity(self.data.len() / 3));
        for p in self.data.chunks_exact(3) {
            let (r, g, b) = (p[0] as f64 * 255.0, p[1] as f64 * 255.0, p[2] as f64 * 255.0);
            cb.push(-0.168736 * r - 0.331264 * g + 0.5 * b);
            cr.push(0.5 * r - 0.418688 * g - 0.081312 * b);
        }
        (Plane::new(self.width, self.height, cb), Plane::new(self.width, self.height, cr))
    }

    /// Planar `C×H×W` copy, the layout network inputs use.
    pub fn to_chw(&self) -> Vec<f32> {
        let n = self.width * self.height;
        let mut out = vec![0.0f32; 3 * n];
        for (i, p) in self.data.chunks_exact(3).enumerate() {
            out[i] = p[0];
            out[n + i] = p[1];
            out[2 * n + i] = p[2];
        }
        out
    }
}

/// Bilinear resample to `target_w × target_h`, clamped to `[0, 1]`.
///
/// Matching dimensions return the input samples unchanged.
pub fn resize_normalize(frame: &Frame, target_w: usize, target_h: usize) -> Result<Frame> {
    if target_w == 0 || target_h == 0 {
        return Err(Error::InvalidArgument("target dimensions must be positive".into()));
    }
    let data = if frame.width == target_w && frame.height == target_h {
        frame.data.clone()
    } else {
        resize_bilinear(&frame.data, frame.width, frame.height, 3, target_w, target_h)
            .into_iter()
            .map(|v| v.clamp(0.0, 1.0) as f32)
            .collect()
    };
    Ok(Frame {
        width: target_w,
        height: target_h,
        data,
        source_index: frame.source_index,
        timestamp_s: frame.timestamp_s,
    })
}
