//! The eleven feature sets and how they are assembled from extractor blocks.
//!
//! Concatenation order is always NSS, then deep, then saliency. The
//! `*VSFACNN_SALIENCY` kinds use map-level sum fusion rather than
//! concatenation, so their deep block stays at 4096 entries.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::cnn::{deep_feature, mean_std_pool, prepare_input, vsfa_content_feature, InferenceGraph, MeanPool};
use crate::error::{Error, Result};
use crate::ingest::{for_each_frame, FrameSource, SamplingPolicy, VideoRecord};
use crate::nss::{nss_video_vector, NSS_DIM};
use crate::saliency::{fuse_map_sum, saliency_vector, score_cam, SALIENCY_DIM};

/// Bumped whenever any extractor's numerics change; invalidates cached features.
pub const EXTRACTOR_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum FeatureKind {
    Saliency,
    Nss,
    NssSaliency,
    NssCnn,
    NssCnnSaliency,
    NssVsfacnn,
    NssVsfacnnSaliency,
    Cnn,
    CnnSaliency,
    Vsfacnn,
    VsfacnnSaliency,
}

/// Building blocks a feature set is concatenated from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Block {
    Nss,
    Cnn,
    Vsfa,
    /// Mean of per-second saliency vectors.
    Saliency,
    /// Content-aware features of sum-fused deep and saliency maps.
    VsfaSaliency,
}

impl Block {
    pub fn dim(self) -> usize {
        match self {
            Block::Nss => NSS_DIM,
            Block::Cnn => 2048,
            Block::Vsfa | Block::VsfaSaliency => 4096,
            Block::Saliency => SALIENCY_DIM,
        }
    }

    pub fn needs_resnet(self) -> bool {
        matches!(self, Block::Cnn | Block::Vsfa | Block::VsfaSaliency)
    }

    pub fn needs_vgg(self) -> bool {
        matches!(self, Block::Saliency | Block::VsfaSaliency)
    }
}

impl FeatureKind {
    pub const ALL: [FeatureKind; 11] = [
        FeatureKind::Saliency,
        FeatureKind::Nss,
        FeatureKind::NssSaliency,
        FeatureKind::NssCnn,
        FeatureKind::NssCnnSaliency,
        FeatureKind::NssVsfacnn,
        FeatureKind::NssVsfacnnSaliency,
        FeatureKind::Cnn,
        FeatureKind::CnnSaliency,
        FeatureKind::Vsfacnn,
        FeatureKind::VsfacnnSaliency,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FeatureKind::Saliency => "SALIENCY",
            FeatureKind::Nss => "NSS",
            FeatureKind::NssSaliency => "NSS_SALIENCY",
            FeatureKind::NssCnn => "NSS_CNN",
            FeatureKind::NssCnnSaliency => "NSS_CNN_SALIENCY",
            FeatureKind::NssVsfacnn => "NSS_VSFACNN",
            FeatureKind::NssVsfacnnSaliency => "NSS_VSFACNN_SALIENCY",
            FeatureKind::Cnn => "CNN",
            FeatureKind::CnnSaliency => "CNN_SALIENCY",
            FeatureKind::Vsfacnn => "VSFACNN",
            FeatureKind::VsfacnnSaliency => "VSFACNN_SALIENCY",
        }
    }

    pub fn blocks(self) -> &'static [Block] {
        use Block::*;
        match self {
            FeatureKind::Saliency => &[Saliency],
            FeatureKind::Nss => &[Nss],
            FeatureKind::NssSaliency => &[Nss, Saliency],
            FeatureKind::NssCnn => &[Nss, Cnn],
            FeatureKind::NssCnnSaliency => &[Nss, Cnn, Saliency],
            FeatureKind::NssVsfacnn => &[Nss, Vsfa],
            FeatureKind::NssVsfacnnSaliency => &[Nss, VsfaSaliency],
            FeatureKind::Cnn => &[Cnn],
            FeatureKind::CnnSaliency => &[Cnn, Saliency],
            FeatureKind::Vsfacnn => &[Vsfa],
            FeatureKind::VsfacnnSaliency => &[VsfaSaliency],
        }
    }

    pub fn dim(self) -> usize {
        self.blocks().iter().map(|b| b.dim()).sum()
    }

    pub fn needs_resnet(self) -> bool {
        self.blocks().iter().any(|b| b.needs_resnet())
    }

    pub fn needs_vgg(self) -> bool {
        self.blocks().iter().any(|b| b.needs_vgg())
    }
}

impl fmt::Display for FeatureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FeatureKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let wanted = s.trim().to_ascii_uppercase().replace('-', "_");
        FeatureKind::ALL
            .into_iter()
            .find(|k| k.name() == wanted)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown feature kind `{s}`")))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FeatureVector {
    pub kind: FeatureKind,
    pub video_id: String,
    pub values: Vec<f64>,
}

impl FeatureVector {
    pub fn new(kind: FeatureKind, video_id: impl Into<String>, values: Vec<f64>) -> Result<Self> {
        if values.len() != kind.dim() {
            return Err(Error::DimensionMismatch {
                expected: kind.dim(),
                got: values.len(),
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("feature vector"));
        }
        Ok(FeatureVector {
            kind,
            video_id: video_id.into(),
            values,
        })
    }
}

/// Order-preserving concatenation.
pub fn concat(parts: &[&[f64]]) -> Result<Vec<f64>> {
    if parts.is_empty() {
        return Err(Error::InvalidArgument("nothing to concatenate".into()));
    }
    Ok(parts.iter().flat_map(|p| p.iter().copied()).collect())
}

/// Pre-trained graphs: a ResNet-50-style backbone for deep features and a
/// VGG-16-style classifier for Score-CAM.
#[derive(Clone, Default)]
pub struct Backbones {
    pub resnet: Option<Arc<dyn InferenceGraph>>,
    pub vgg: Option<Arc<dyn InferenceGraph>>,
}

impl fmt::Debug for Backbones {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Backbones")
            .field("resnet", &self.resnet.as_ref().map(|g| g.graph_id().to_string()))
            .field("vgg", &self.vgg.as_ref().map(|g| g.graph_id().to_string()))
            .finish()
    }
}

impl Backbones {
    pub fn new(resnet: Arc<dyn InferenceGraph>, vgg: Arc<dyn InferenceGraph>) -> Self {
        Backbones {
            resnet: Some(resnet),
            vgg: Some(vgg),
        }
    }

    fn resnet(&self) -> Result<&dyn InferenceGraph> {
        self.resnet
            .as_deref()
            .ok_or_else(|| Error::Model("this feature kind needs the ResNet-50 graph".into()))
    }

    fn vgg(&self) -> Result<&dyn InferenceGraph> {
        self.vgg
            .as_deref()
            .ok_or_else(|| Error::Model("this feature kind needs the VGG-16 graph".into()))
    }

    /// Short hash of the extractor version and every graph `kind` depends on.
    pub fn version_hash(&self, kind: FeatureKind) -> String {
        let mut h = Sha256::new();
        h.update(EXTRACTOR_VERSION.to_le_bytes());
        h.update(kind.name().as_bytes());
        if kind.needs_resnet() {
            h.update(self.resnet.as_ref().map(|g| g.fingerprint()).unwrap_or_default());
        }
        if kind.needs_vgg() {
            h.update(self.vgg.as_ref().map(|g| g.fingerprint()).unwrap_or_default());
        }
        hex::encode(&h.finalize()[..6])
    }
}

/// Computes feature sets for videos, reusing blocks shared between kinds.
#[derive(Clone, Debug, Default)]
pub struct FeatureExtractor {
    pub backbones: Backbones,
    pub source: FrameSource,
    /// When set, per-frame saliency maps are written under `<dir>/<video_id>/`.
    pub saliency_dir: Option<PathBuf>,
}

const DEEP_RATE: SamplingPolicy = SamplingPolicy::PerSecond(1);

impl FeatureExtractor {
    pub fn new(backbones: Backbones, source: FrameSource) -> Self {
        FeatureExtractor {
            backbones,
            source,
            saliency_dir: None,
        }
    }

    pub fn block(&self, video: &VideoRecord, block: Block) -> Result<Vec<f64>> {
        let values = match block {
            Block::Nss => nss_video_vector(video, &self.source)?.to_vec(),
            Block::Cnn => {
                let graph = self.backbones.resnet()?;
                self.pooled(video, DEEP_RATE, 2048, |frame| Ok(deep_feature(&frame, graph)?.values))?
            }
            Block::Vsfa => {
                let graph = self.backbones.resnet()?;
                self.pooled(video, SamplingPolicy::EveryFrame, 4096, |frame| {
                    Ok(vsfa_content_feature(&frame, graph)?.values)
                })?
            }
            Block::Saliency => {
                let graph = self.backbones.vgg()?;
                let save_dir = self.saliency_dir.as_ref().map(|d| d.join(sanitize(&video.video_id)));
                if let Some(d) = &save_dir {
                    std::fs::create_dir_all(d).map_err(|e| Error::io(d, e))?;
                }
                self.pooled(video, DEEP_RATE, SALIENCY_DIM, |frame| {
                    let cam = score_cam(&frame, graph)?;
                    if let Some(d) = &save_dir {
                        cam.map.save(&d.join(format!("frame_{:06}.png", frame.source_index)))?;
                    }
                    Ok(saliency_vector(&cam.map))
                })?
            }
            Block::VsfaSaliency => {
                let (resnet, vgg) = (self.backbones.resnet()?, self.backbones.vgg()?);
                self.pooled(video, DEEP_RATE, 4096, |frame| {
                    let maps = resnet.forward(&prepare_input(&frame, resnet)?)?.conv_final;
                    let cam = score_cam(&frame, vgg)?;
                    Ok(mean_std_pool(&fuse_map_sum(&maps, &cam.map)?))
                })?
            }
        };
        if values.len() != block.dim() {
            return Err(Error::DimensionMismatch {
                expected: block.dim(),
                got: values.len(),
            }
            .for_video(&video.video_id));
        }
        Ok(values)
    }

    fn pooled<F>(&self, video: &VideoRecord, policy: SamplingPolicy, dim: usize, mut per_frame: F) -> Result<Vec<f64>>
    where
        F: FnMut(crate::ingest::Frame) -> Result<Vec<f64>>,
    {
        let mut pool = MeanPool::new(dim);
        for_each_frame(video, &self.source, policy, |frame| pool.add(&per_frame(frame)?))?;
        pool.mean()
    }

    pub fn build_feature(&self, video: &VideoRecord, kind: FeatureKind) -> Result<FeatureVector> {
        Ok(self.build_features(video, &[kind])?.remove(0))
    }

    /// Builds several kinds for one video, computing each block once.
    pub fn build_features(&self, video: &VideoRecord, kinds: &[FeatureKind]) -> Result<Vec<FeatureVector>> {
        let mut blocks: Vec<(Block, Vec<f64>)> = Vec::new();
        let mut out = Vec::with_capacity(kinds.len());
        for &kind in kinds {
            let mut parts: Vec<&[f64]> = Vec::new();
            for &b in kind.blocks() {
                if !blocks.iter().any(|(have, _)| *have == b) {
                    let v = self.block(video, b).map_err(|e| e.for_video(&video.video_id))?;
                    blocks.push((b, v));
                }
            }
            for &b in kind.blocks() {
                parts.push(&blocks.iter().find(|(have, _)| *have == b).expect("computed above").1);
            }
            let values = concat(&parts)?;
            out.push(FeatureVector::new(kind, &video.video_id, values).map_err(|e| e.for_video(&video.video_id))?);
        }
        Ok(out)
    }
}

/// One-shot helper around [`FeatureExtractor::build_feature`].
pub fn build_feature(video: &VideoRecord, kind: FeatureKind, backbones: &Backbones, source: &FrameSource) -> Result<FeatureVector> {
    FeatureExtractor::new(backbones.clone(), source.clone()).build_feature(video, kind)
}

/// Filesystem-safe form of a video id.
pub fn sanitize(id: &str) -> String {
    id.chars()
        .map(|c| if c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.') { c } else { '_' })
        .collect()
}
