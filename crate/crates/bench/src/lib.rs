//! Shared fixtures for the benchmarks: a small synthetic dataset on disk and
//! stand-in graphs with the real tap shapes.

use std::sync::Arc;

use bvqa::synth::SynthDataset;
use bvqa::{Backbones, DatasetManifest, FeatureExtractor, FrameSource, SyntheticGraph};
use tempfile::TempDir;

pub struct Fixture {
    _dir: TempDir,
    pub manifest: DatasetManifest,
    pub extractor: FeatureExtractor,
}

impl Fixture {
    /// `count` clips of 64×64, 16 frames at 8 fps.
    pub fn new(count: usize) -> Fixture {
        let dir = tempfile::tempdir().expect("temp dir");
        let manifest = SynthDataset {
            count,
            ..SynthDataset::default()
        }
        .write(dir.path())
        .expect("synthetic dataset");
        let backbones = Backbones::new(
            Arc::new(SyntheticGraph::seeded("bench-resnet50", 2048, 7, 16, 11).unwrap()),
            Arc::new(SyntheticGraph::seeded("bench-vgg16", 16, 14, 16, 12).unwrap()),
        );
        Fixture {
            _dir: dir,
            manifest,
            extractor: FeatureExtractor::new(backbones, FrameSource::default()),
        }
    }
}
