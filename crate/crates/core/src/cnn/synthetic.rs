use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use super::{Activation, GraphOutputs, InferenceGraph, CONV_FINAL, INPUT_SIDE};
use crate::error::{Error, Result};

/// A small native network with explicit weights:
/// average-pool to a `grid×grid` lattice → 1×1 convolution → ReLU (`conv_final`)
/// → global average (`pooled`) → fully connected (`logits`).
///
/// Used for tests, benchmarks and model-free dry runs; the checked-in ONNX
/// fixtures implement the same architecture.
#[derive(Clone, Debug)]
pub struct SyntheticGraph {
    id: String,
    grid: usize,
    channels: usize,
    classes: usize,
    conv_weights: Vec<f32>,
    conv_bias: Vec<f32>,
    fc_weights: Vec<f32>,
    fc_bias: Vec<f32>,
}

impl SyntheticGraph {
    /// `conv_weights` is `channels×3`, `fc_weights` is `classes×channels`, both row-major.
    pub fn new(
        id: impl Into<String>,
        grid: usize,
        conv_weights: Vec<f32>,
        conv_bias: Vec<f32>,
        fc_weights: Vec<f32>,
        fc_bias: Vec<f32>,
    ) -> Result<Self> {
        if grid == 0 || INPUT_SIDE % grid != 0 {
            return Err(Error::InvalidArgument(format!("grid {grid} must divide {INPUT_SIDE}")));
        }
        let channels = conv_bias.len();
        let classes = fc_bias.len();
        if channels == 0 || classes == 0 || conv_weights.len() != channels * 3 || fc_weights.len() != classes * channels {
            return Err(Error::InvalidArgument("inconsistent synthetic graph weights".into()));
        }
        Ok(SyntheticGraph {
            id: id.into(),
            grid,
            channels,
            classes,
            conv_weights,
            conv_bias,
            fc_weights,
            fc_bias,
        })
    }

    /// Weights drawn uniformly from `[-1, 1]` with a seeded ChaCha8 stream.
    pub fn seeded(id: impl Into<String>, channels: usize, grid: usize, classes: usize, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut draw = |n: usize| -> Vec<f32> { (0..n).map(|_| rng.random_range(-1.0f32..=1.0)).collect() };
        let conv_weights = draw(channels * 3);
        let conv_bias = draw(channels).into_iter().map(|b| b * 0.25).collect();
        let fc_weights = draw(classes * channels);
        let fc_bias = draw(classes);
        SyntheticGraph::new(id, grid, conv_weights, conv_bias, fc_weights, fc_bias)
    }

    /// ResNet-50-shaped stand-in: 2048 channels on a 7×7 lattice.
    pub fn resnet_like(seed: u64) -> Self {
        SyntheticGraph::seeded("synthetic-resnet50", 2048, 7, 10, seed).expect("valid shape")
    }

    /// VGG-16-shaped stand-in for saliency: a 14×14 lattice with few channels.
    pub fn vgg_like(channels: usize, seed: u64) -> Self {
        SyntheticGraph::seeded("synthetic-vgg16", channels, 14, 10, seed).expect("valid shape")
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    fn check_input(&self, input: &[f32]) -> Result<()> {
        if input.len() != 3 * INPUT_SIDE * INPUT_SIDE {
            return Err(Error::DimensionMismatch {
                expected: 3 * INPUT_SIDE * INPUT_SIDE,
                got: input.len(),
            });
        }
        Ok(())
    }

    fn pool(&self, input: &[f32]) -> Activation {
        let g = self.grid;
        let s = INPUT_SIDE / g;
        let plane = INPUT_SIDE * INPUT_SIDE;
        let mut out = vec![0.0f32; 3 * g * g];
        for c in 0..3 {
            for gy in 0..g {
                for gx in 0..g {
                    let mut acc = 0.0f64;
                    for y in gy * s..(gy + 1) * s {
                        let row = &input[c * plane + y * INPUT_SIDE + gx * s..c * plane + y * INPUT_SIDE + (gx + 1) * s];
                        acc += row.iter().map(|&v| v as f64).sum::<f64>();
                    }
                    out[c * g * g + gy * g + gx] = (acc / (s * s) as f64) as f32;
                }
            }
        }
        Activation {
            channels: 3,
            height: g,
            width: g,
            data: out,
        }
    }

    fn conv(&self, pooled: &Activation) -> Activation {
        let n = self.grid * self.grid;
        let mut out = vec![0.0f32; self.channels * n];
        for c in 0..self.channels {
            let w = &self.conv_weights[c * 3..c * 3 + 3];
            for i in 0..n {
                let v = w[0] * pooled.data[i] + w[1] * pooled.data[n + i] + w[2] * pooled.data[2 * n + i] + self.conv_bias[c];
                out[c * n + i] = v.max(0.0);
            }
        }
        Activation {
            channels: self.channels,
            height: self.grid,
            width: self.grid,
            data: out,
        }
    }
}

impl InferenceGraph for SyntheticGraph {
    fn graph_id(&self) -> &str {
        &self.id
    }

    fn fingerprint(&self) -> String {
        let mut h = Sha256::new();
        h.update(self.id.as_bytes());
        h.update((self.grid as u64).to_le_bytes());
        for w in self.conv_weights.iter().chain(&self.conv_bias).chain(&self.fc_weights).chain(&self.fc_bias) {
            h.update(w.to_le_bytes());
        }
        hex::encode(&h.finalize()[..8])
    }

    fn forward(&self, input: &[f32]) -> Result<GraphOutputs> {
        self.check_input(input)?;
        let conv_final = self.conv(&self.pool(input));
        let n = (self.grid * self.grid) as f32;
        let pooled: Vec<f32> = (0..self.channels).map(|c| conv_final.channel(c).iter().sum::<f32>() / n).collect();
        let logits = (0..self.classes)
            .map(|k| {
                let row = &self.fc_weights[k * self.channels..(k + 1) * self.channels];
                row.iter().zip(&pooled).map(|(w, p)| w * p).sum::<f32>() + self.fc_bias[k]
            })
            .collect();
        Ok(GraphOutputs {
            conv_final,
            pooled,
            logits,
        })
    }

    fn layers(&self) -> Vec<String> {
        vec!["pool".into(), CONV_FINAL.into()]
    }

    fn tap(&self, input: &[f32], layer: &str) -> Result<Activation> {
        self.check_input(input)?;
        match layer {
            "pool" => Ok(self.pool(input)),
            CONV_FINAL => Ok(self.conv(&self.pool(input))),
            other => Err(Error::UnknownLayer(other.to_string())),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shapes() {
        let g = SyntheticGraph::seeded("t", 5, 7, 4, 1).unwrap();
        let x = vec![0.5f32; 3 * 224 * 224];
        let out = g.forward(&x).unwrap();
        assert_eq!((out.conv_final.channels, out.conv_final.height, out.conv_final.width), (5, 7, 7));
        assert_eq!((out.pooled.len(), out.logits.len()), (5, 4));
        assert!(g.tap(&x, "nope").is_err());
        assert_eq!(g.fingerprint(), SyntheticGraph::seeded("t", 5, 7, 4, 1).unwrap().fingerprint());
        assert_ne!(g.fingerprint(), SyntheticGraph::seeded("t", 5, 7, 4, 2).unwrap().fingerprint());
    }
}
