use std::path::Path;
use std::sync::Arc;

use anyhow::{Context, Result};
use bvqa::{Backbones, FeatureKind, InferenceGraph, SyntheticGraph};

use crate::args::Common;
use crate::usage;

pub const RESNET_STEM: &str = "resnet50_features";
pub const VGG_STEM: &str = "vgg16_features";

/// Stand-in for the ResNet-50 graph: 2048 maps on a 7×7 grid.
pub fn synthetic_resnet() -> SyntheticGraph {
    SyntheticGraph::seeded("synthetic-resnet50", 2048, 7, 16, 11).expect("valid synthetic graph")
}

/// Stand-in for the VGG-16 graph: 16 maps on a 14×14 grid.
pub fn synthetic_vgg() -> SyntheticGraph {
    SyntheticGraph::seeded("synthetic-vgg16", 16, 14, 16, 12).expect("valid synthetic graph")
}

fn load_onnx(dir: &Path, stem: &str) -> Result<Arc<dyn InferenceGraph>> {
    let g = bvqa::OnnxGraph::load_named(dir, stem).with_context(|| format!("loading {stem} from {}", dir.display()))?;
    log::info!("loaded {stem} ({})", g.fingerprint());
    Ok(Arc::new(g))
}

/// Loads only the graphs that `kinds` need.
pub fn backbones_for(common: &Common, kinds: &[FeatureKind]) -> Result<Backbones> {
    let need_resnet = kinds.iter().any(|k| k.needs_resnet());
    let need_vgg = kinds.iter().any(|k| k.needs_vgg());
    load(common, need_resnet, need_vgg)
}

pub fn load(common: &Common, need_resnet: bool, need_vgg: bool) -> Result<Backbones> {
    let mut b = Backbones::default();
    if !need_resnet && !need_vgg {
        return Ok(b);
    }
    if common.synthetic_models {
        if need_resnet {
            b.resnet = Some(Arc::new(synthetic_resnet()));
        }
        if need_vgg {
            b.vgg = Some(Arc::new(synthetic_vgg()));
        }
        return Ok(b);
    }
    let Some(dir) = &common.models_dir else {
        return Err(usage("the selected kinds need --models-dir (or --synthetic-models)"));
    };
    if need_resnet {
        b.resnet = Some(load_onnx(dir, RESNET_STEM)?);
    }
    if need_vgg {
        b.vgg = Some(load_onnx(dir, VGG_STEM)?);
    }
    Ok(b)
}
