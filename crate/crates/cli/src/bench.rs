use std::fmt::Write as _;
use std::time::Instant;

use anyhow::Result;
use bvqa::regression::train_svr;
use bvqa::{FeatureExtractor, FeatureKind};
use serde::{Deserialize, Serialize};

use crate::args::{BenchArgs, Common};
use crate::commands::{frame_source, manifests};
use crate::{models, usage, Outcome};

const PREDICT_REPEATS: usize = 200;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub kind: FeatureKind,
    pub dim: usize,
    /// Mean wall-clock seconds to extract this kind for one video, from scratch.
    pub extract_s: f64,
    /// Mean seconds for one SVR prediction.
    pub predict_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub videos: usize,
    pub rows: Vec<BenchRow>,
}

impl BenchReport {
    pub fn row(&self, kind: FeatureKind) -> Option<&BenchRow> {
        self.rows.iter().find(|r| r.kind == kind)
    }

    pub fn table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{:<22} {:>6} {:>16} {:>16}", "FEATURES", "DIM", "EXTRACT (s)", "PREDICT (s)");
        for r in &self.rows {
            let _ = writeln!(out, "{:<22} {:>6} {:>16.6} {:>16.3e}", r.kind.name(), r.dim, r.extract_s, r.predict_s);
        }
        let _ = writeln!(out, "(means over {} video(s))", self.videos);
        out
    }
}

/// Times each kind on its own, so shared blocks are not reused between kinds.
pub fn run_bench(extractor: &FeatureExtractor, videos: &[bvqa::VideoRecord], kinds: &[FeatureKind]) -> Result<BenchReport> {
    let mut rows = Vec::with_capacity(kinds.len());
    for &kind in kinds {
        let mut x = Vec::with_capacity(videos.len());
        let start = Instant::now();
        for v in videos {
            x.push(extractor.build_feature(v, kind)?.values);
        }
        let extract_s = start.elapsed().as_secs_f64() / videos.len() as f64;

        let mut y: Vec<f64> = videos.iter().map(|v| v.mos).collect();
        if x.len() == 1 {
            // one video: pair it with a copy so the regression has two targets
            x.push(x[0].clone());
            y = vec![y[0] - 0.5, y[0] + 0.5];
        }
        let model = train_svr(&x, &y, 1.0, 1.0 / kind.dim() as f64, bvqa::regression::DEFAULT_EPSILON)?;
        let start = Instant::now();
        let mut sink = 0.0;
        for _ in 0..PREDICT_REPEATS {
            for row in &x {
                sink += model.predict(row)?;
            }
        }
        std::hint::black_box(sink);
        let predict_s = start.elapsed().as_secs_f64() / (PREDICT_REPEATS * x.len()) as f64;
        log::info!("{kind}: {extract_s:.4}s extract, {predict_s:.3e}s predict");
        rows.push(BenchRow {
            kind,
            dim: kind.dim(),
            extract_s,
            predict_s,
        });
    }
    Ok(BenchReport {
        videos: videos.len(),
        rows,
    })
}

pub fn bench(common: &Common, args: &BenchArgs) -> Result<Outcome> {
    let kinds = match common.kinds() {
        k if k.is_empty() => FeatureKind::ALL.to_vec(),
        k => k,
    };
    if args.limit == 0 {
        return Err(usage("--limit must be at least 1"));
    }
    let videos: Vec<bvqa::VideoRecord> = manifests(common)?
        .into_iter()
        .flat_map(|m| m.records)
        .take(args.limit)
        .collect();
    let extractor = FeatureExtractor::new(models::backbones_for(common, &kinds)?, frame_source(common));
    let report = run_bench(&extractor, &videos, &kinds)?;
    let table = report.table();
    print!("{table}");
    if let Some(dir) = &common.out {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("bench.json"), serde_json::to_string_pretty(&report)?)?;
        std::fs::write(dir.join("bench.txt"), table)?;
    }
    Ok(Outcome::Success)
}
