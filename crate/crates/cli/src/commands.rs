use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use anyhow::{Context, Result};
use bvqa::correlation::dataset_correlation;
use bvqa::evaluation::crossval_run;
use bvqa::ingest::load_manifest;
use bvqa::regression::{grid_search, train_svr};
use bvqa::synth::SynthDataset;
use bvqa::{
    Backbones, CrossvalConfig, DatasetManifest, EvalReport, FeatureCache, FeatureExtractor, FeatureKind, FeatureVector,
    FrameSource, HyperGrid,
};
use rayon::prelude::*;

use crate::args::{Common, EvaluateArgs, ExtractArgs, SynthArgs, TrainArgs};
use crate::{models, usage, Outcome};

pub fn frame_source(common: &Common) -> FrameSource {
    FrameSource {
        decoder: common.decoder.clone(),
    }
}

pub fn manifests(common: &Common) -> Result<Vec<DatasetManifest>> {
    if common.manifest.is_empty() {
        return Err(usage("--manifest is required"));
    }
    common
        .manifest
        .iter()
        .map(|p| load_manifest(p).with_context(|| format!("reading manifest {}", p.display())))
        .collect()
}

fn one_manifest(common: &Common) -> Result<DatasetManifest> {
    let mut all = manifests(common)?;
    if all.len() != 1 {
        return Err(usage("this command takes exactly one --manifest"));
    }
    Ok(all.remove(0))
}

fn kinds(common: &Common) -> Result<Vec<FeatureKind>> {
    let k = common.kinds();
    if k.is_empty() {
        return Err(usage("--kind is required (a feature kind name or `all`)"));
    }
    Ok(k)
}

fn out_dir(common: &Common, default: &str) -> Result<PathBuf> {
    let dir = common.out.clone().unwrap_or_else(|| PathBuf::from(default));
    std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    Ok(dir)
}

#[derive(Debug, Default, Clone, PartialEq, Eq)]
pub struct ExtractSummary {
    /// Cache entries written by this run.
    pub extracted: usize,
    /// Entries already present and valid.
    pub cached: usize,
    pub failed: Vec<String>,
}

/// Fills the cache for every (video, kind) pair; one failing video does not stop the batch.
pub fn extract_into(
    manifest: &DatasetManifest,
    kinds: &[FeatureKind],
    extractor: &FeatureExtractor,
    cache: &FeatureCache,
) -> ExtractSummary {
    let extracted = AtomicUsize::new(0);
    let cached = AtomicUsize::new(0);
    let failed = Mutex::new(Vec::new());
    manifest.records.par_iter().for_each(|video| {
        let missing: Vec<FeatureKind> = kinds
            .iter()
            .copied()
            .filter(|&k| cache.get(&video.video_id, k, &extractor.backbones.version_hash(k)).is_none())
            .collect();
        cached.fetch_add(kinds.len() - missing.len(), Ordering::Relaxed);
        if missing.is_empty() {
            return;
        }
        let result = extractor.build_features(video, &missing).and_then(|feats| {
            for f in &feats {
                cache.put(f, &extractor.backbones.version_hash(f.kind))?;
            }
            Ok(feats.len())
        });
        match result {
            Ok(n) => {
                extracted.fetch_add(n, Ordering::Relaxed);
                log::info!("{}: extracted {n} kind(s)", video.video_id);
            }
            Err(e) => {
                log::error!("{e}");
                failed.lock().unwrap().push(video.video_id.clone());
            }
        }
    });
    let mut failed = failed.into_inner().unwrap();
    failed.sort();
    ExtractSummary {
        extracted: extracted.into_inner(),
        cached: cached.into_inner(),
        failed,
    }
}

pub fn extract(common: &Common, args: &ExtractArgs) -> Result<Outcome> {
    let kinds = kinds(common)?;
    let manifests = manifests(common)?;
    let mut extractor = FeatureExtractor::new(models::backbones_for(common, &kinds)?, frame_source(common));
    extractor.saliency_dir = args.save_saliency.clone();
    let cache = FeatureCache::new(&common.cache_dir);
    let mut outcome = Outcome::Success;
    for m in &manifests {
        let s = extract_into(m, &kinds, &extractor, &cache);
        println!(
            "{}: extracted {} feature(s), {} cached, {} video(s) failed",
            m.name,
            s.extracted,
            s.cached,
            s.failed.len()
        );
        if !s.failed.is_empty() {
            eprintln!("failed videos: {}", s.failed.join(", "));
            outcome = Outcome::Partial;
        }
    }
    Ok(outcome)
}

/// Cached features of `kind` for every video, or the ids that have none.
pub fn cached_features(
    manifest: &DatasetManifest,
    kind: FeatureKind,
    backbones: &Backbones,
    cache: &FeatureCache,
) -> std::result::Result<Vec<FeatureVector>, Vec<String>> {
    let hash = backbones.version_hash(kind);
    let mut found = Vec::with_capacity(manifest.len());
    let mut missing = Vec::new();
    for r in &manifest.records {
        match cache.get(&r.video_id, kind, &hash) {
            Some(f) => found.push(f),
            None => missing.push(r.video_id.clone()),
        }
    }
    if missing.is_empty() {
        Ok(found)
    } else {
        Err(missing)
    }
}

fn missing_error(kind: FeatureKind, missing: &[String]) -> anyhow::Error {
    anyhow::anyhow!(
        "{kind}: no cached features for {} video(s): {} (run `bvqa extract` first)",
        missing.len(),
        missing.join(", ")
    )
}

pub fn train(common: &Common, args: &TrainArgs) -> Result<Outcome> {
    let kinds = kinds(common)?;
    let [kind] = kinds[..] else {
        return Err(usage("train takes exactly one --kind"));
    };
    let manifest = one_manifest(common)?;
    let Some(out) = &common.out else {
        return Err(usage("train needs --out <model file>"));
    };
    let backbones = models::backbones_for(common, &kinds)?;
    let feats = cached_features(&manifest, kind, &backbones, &FeatureCache::new(&common.cache_dir))
        .map_err(|m| missing_error(kind, &m))?;
    let x: Vec<Vec<f64>> = feats.into_iter().map(|f| f.values).collect();
    let y = manifest.mos();
    let (c, gamma) = match (args.c, args.gamma) {
        (Some(c), Some(g)) => (c, g),
        _ => {
            let grid = HyperGrid {
                epsilon: args.epsilon,
                ..HyperGrid::default()
            };
            grid_search(&x, &y, &grid, common.seed)?
        }
    };
    let model = train_svr(&x, &y, c, gamma, args.epsilon)?;
    if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent)?;
    }
    model.save(out)?;
    println!(
        "{kind}: C={c} gamma={gamma} epsilon={} support vectors={} -> {}",
        args.epsilon,
        model.support_vectors.len(),
        out.display()
    );
    Ok(Outcome::Success)
}

pub fn report_path(dir: &Path, report: &EvalReport) -> PathBuf {
    dir.join(format!("{}.{}.json", bvqa::fusion::sanitize(&report.dataset), report.kind))
}

pub fn evaluate(common: &Common, args: &EvaluateArgs) -> Result<Outcome> {
    let kinds = kinds(common)?;
    let manifests = manifests(common)?;
    let backbones = models::backbones_for(common, &kinds)?;
    let cache = FeatureCache::new(&common.cache_dir);
    let dir = out_dir(common, "bvqa-results")?;
    let config = CrossvalConfig {
        iterations: args.iterations,
        seed: common.seed,
        grid_mode: args.grid_mode.into(),
        ..CrossvalConfig::default()
    };

    let mut reports = Vec::new();
    let mut outcome = Outcome::Success;
    for m in &manifests {
        for &kind in &kinds {
            let feats = match cached_features(m, kind, &backbones, &cache) {
                Ok(f) => f,
                Err(missing) => {
                    eprintln!("{}: {}", m.name, missing_error(kind, &missing));
                    outcome = Outcome::Partial;
                    continue;
                }
            };
            match crossval_run(&feats, m, &config) {
                Ok(report) => {
                    let path = report_path(&dir, &report);
                    std::fs::write(&path, report.to_json()?).with_context(|| format!("writing {}", path.display()))?;
                    reports.push(report);
                }
                Err(e) => {
                    eprintln!("{} {kind}: {e}", m.name);
                    outcome = Outcome::Partial;
                }
            }
        }
    }
    let table = EvalReport::table(&reports);
    std::fs::write(dir.join("results.txt"), &table)?;
    print!("{table}");
    if reports.is_empty() {
        anyhow::bail!("nothing was evaluated");
    }
    Ok(outcome)
}

pub fn correlate(common: &Common) -> Result<Outcome> {
    let manifests = manifests(common)?;
    let backbones = models::load(common, true, true)?;
    let (resnet, vgg) = (backbones.resnet.unwrap(), backbones.vgg.unwrap());
    let dir = out_dir(common, "bvqa-correlation")?;
    let source = frame_source(common);
    let mut outcome = Outcome::Success;
    for m in &manifests {
        let run = dataset_correlation(m, resnet.as_ref(), vgg.as_ref(), &source);
        let stem = bvqa::fusion::sanitize(&m.name);
        run.write(&dir, &stem)?;
        let values: Vec<f64> = run.records.iter().map(|r| r.avg_cosine).collect();
        let mean = if values.is_empty() { f64::NAN } else { values.iter().sum::<f64>() / values.len() as f64 };
        println!(
            "{}: {} frame(s), mean windowed cosine {mean:.4}, {} video(s) failed -> {}",
            m.name,
            values.len(),
            run.failures.len(),
            dir.join(format!("{stem}.csv")).display()
        );
        if !run.failures.is_empty() {
            outcome = Outcome::Partial;
        }
    }
    Ok(outcome)
}

pub fn synth(common: &Common, args: &SynthArgs) -> Result<Outcome> {
    let Some(root) = &common.out else {
        return Err(usage("synth needs --out <directory>"));
    };
    if args.count < 2 {
        return Err(usage("--count must be at least 2"));
    }
    let data = SynthDataset {
        count: args.count,
        width: args.width,
        height: args.height,
        frames: args.frames,
        fps: args.fps,
        seed: common.seed,
        ..SynthDataset::default()
    };
    let manifest = data.write(root)?;
    println!("wrote {} clip(s) and {}", manifest.len(), root.join("manifest.csv").display());
    Ok(Outcome::Success)
}
