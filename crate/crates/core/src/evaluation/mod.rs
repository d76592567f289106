//! Correlation metrics, logistic mapping and repeated hold-out cross-validation.

mod logistic;
mod metrics;

use std::collections::HashMap;
use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fusion::{FeatureKind, FeatureVector};
use crate::ingest::DatasetManifest;
use crate::regression::{grid_search, train_svr, tuning_size, HyperGrid};

pub use logistic::{logistic_fit, logistic_fit_detailed, LogisticFit, LogisticParams};
pub use metrics::{average_ranks, krcc, mean, median, plcc, rmse, srcc, std_dev};

pub const DEFAULT_ITERATIONS: usize = 100;

/// When hyperparameters are searched during cross-validation.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridMode {
    /// Search on every iteration's training split.
    #[default]
    PerIteration,
    /// Search once on the first iteration's training split and reuse the result.
    Once,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CrossvalConfig {
    pub iterations: usize,
    pub seed: u64,
    pub grid: HyperGrid,
    pub grid_mode: GridMode,
}

impl Default for CrossvalConfig {
    fn default() -> Self {
        CrossvalConfig {
            iterations: DEFAULT_ITERATIONS,
            seed: 0,
            grid: HyperGrid::default(),
            grid_mode: GridMode::PerIteration,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub srcc: f64,
    pub krcc: f64,
    pub plcc: f64,
    pub rmse: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationResult {
    pub iteration: usize,
    pub c: f64,
    pub gamma: f64,
    pub metrics: Metrics,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub dataset: String,
    pub kind: FeatureKind,
    pub seed: u64,
    pub iterations: usize,
    pub grid_mode: GridMode,
    pub train_size: usize,
    pub test_size: usize,
    pub srcc: Vec<f64>,
    pub krcc: Vec<f64>,
    pub plcc: Vec<f64>,
    pub rmse: Vec<f64>,
    pub chosen: Vec<(f64, f64)>,
    pub median: Metrics,
    /// Population standard deviation across iterations.
    pub std: Metrics,
}

/// Metrics of one test split. SRCC/KRCC use raw predictions; PLCC/RMSE use
/// the logistic-mapped predictions. An undefined correlation (constant
/// predictions) is recorded as 0.
pub fn score_predictions(pred: &[f64], mos: &[f64]) -> Result<Metrics> {
    let mapped = match logistic_fit(pred, mos) {
        Ok(p) => p.map(pred),
        Err(Error::InvalidArgument(_)) => pred.to_vec(),
        Err(e) => return Err(e),
    };
    let or_zero = |r: Result<f64>| match r {
        Ok(v) => Ok(v),
        Err(Error::Degenerate(_)) => Ok(0.0),
        Err(e) => Err(e),
    };
    Ok(Metrics {
        srcc: or_zero(srcc(pred, mos))?,
        krcc: or_zero(krcc(pred, mos))?,
        plcc: or_zero(plcc(&mapped, mos))?,
        rmse: rmse(&mapped, mos)?,
    })
}

/// Aligns features to manifest order; errors list every video without a feature.
pub fn align_features<'a>(features: &'a [FeatureVector], manifest: &DatasetManifest) -> Result<(FeatureKind, Vec<&'a [f64]>)> {
    let by_id: HashMap<&str, &FeatureVector> = features.iter().map(|f| (f.video_id.as_str(), f)).collect();
    let missing: Vec<String> = manifest
        .records
        .iter()
        .filter(|r| !by_id.contains_key(r.video_id.as_str()))
        .map(|r| r.video_id.clone())
        .collect();
    if !missing.is_empty() {
        return Err(Error::MissingFeatures(missing));
    }
    let rows: Vec<&FeatureVector> = manifest.records.iter().map(|r| by_id[r.video_id.as_str()]).collect();
    let kind = rows[0].kind;
    if let Some(other) = rows.iter().find(|f| f.kind != kind) {
        return Err(Error::InvalidArgument(format!(
            "mixed feature kinds: {} and {}",
            kind, other.kind
        )));
    }
    Ok((kind, rows.into_iter().map(|f| f.values.as_slice()).collect()))
}

fn split(n: usize, rng: &mut ChaCha8Rng) -> (Vec<usize>, Vec<usize>) {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let test = order.split_off(n - tuning_size(n));
    (order, test)
}

/// Repeated 80/20 hold-out evaluation. Iteration `k` draws its split from
/// `ChaCha8Rng::seed_from_u64(seed ^ k)`; the grid-search seed is the next
/// 64-bit word of the same stream.
pub fn crossval_run(features: &[FeatureVector], manifest: &DatasetManifest, config: &CrossvalConfig) -> Result<EvalReport> {
    let (kind, rows) = align_features(features, manifest)?;
    let mos = manifest.mos();
    let n = rows.len();
    let n_test = tuning_size(n);
    if n_test < 2 || n - n_test < 2 {
        return Err(Error::InvalidArgument(format!("{n} videos are too few for an 80/20 split")));
    }
    if config.iterations == 0 {
        return Err(Error::InvalidArgument("at least one iteration is required".into()));
    }

    let plan = |k: usize| {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ k as u64);
        let (train, test) = split(n, &mut rng);
        (train, test, rng.next_u64())
    };
    let gather = |idx: &[usize]| -> (Vec<Vec<f64>>, Vec<f64>) { (idx.iter().map(|&i| rows[i].to_vec()).collect(), idx.iter().map(|&i| mos[i]).collect()) };

    let fixed = match config.grid_mode {
        GridMode::Once => {
            let (train, _, grid_seed) = plan(0);
            let (x, y) = gather(&train);
            Some(grid_search(&x, &y, &config.grid, grid_seed)?)
        }
        GridMode::PerIteration => None,
    };

    let results = (0..config.iterations)
        .into_par_iter()
        .map(|k| -> Result<IterationResult> {
            let (train, test, grid_seed) = plan(k);
            let (x_train, y_train) = gather(&train);
            let (x_test, y_test) = gather(&test);
            let (c, gamma) = match fixed {
                Some(p) => p,
                None => grid_search(&x_train, &y_train, &config.grid, grid_seed)?,
            };
            let model = train_svr(&x_train, &y_train, c, gamma, config.grid.epsilon)?;
            let pred = model.predict_all(&x_test)?;
            Ok(IterationResult {
                iteration: k,
                c,
                gamma,
                metrics: score_predictions(&pred, &y_test)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(assemble(manifest.name.clone(), kind, config, n - n_test, n_test, &results))
}

fn assemble(dataset: String, kind: FeatureKind, config: &CrossvalConfig, train_size: usize, test_size: usize, results: &[IterationResult]) -> EvalReport {
    let col = |f: fn(&Metrics) -> f64| results.iter().map(|r| f(&r.metrics)).collect::<Vec<f64>>();
    let (s, k, p, r) = (col(|m| m.srcc), col(|m| m.krcc), col(|m| m.plcc), col(|m| m.rmse));
    EvalReport {
        dataset,
        kind,
        seed: config.seed,
        iterations: results.len(),
        grid_mode: config.grid_mode,
        train_size,
        test_size,
        median: Metrics {
            srcc: median(&s),
            krcc: median(&k),
            plcc: median(&p),
            rmse: median(&r),
        },
        std: Metrics {
            srcc: std_dev(&s),
            krcc: std_dev(&k),
            plcc: std_dev(&p),
            rmse: std_dev(&r),
        },
        chosen: results.iter().map(|r| (r.c, r.gamma)).collect(),
        srcc: s,
        krcc: k,
        plcc: p,
        rmse: r,
    }
}

impl EvalReport {
    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Format(e.to_string()))
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Format(e.to_string()))
    }

    /// One row per report, `median(±std)` per metric.
    pub fn table(reports: &[EvalReport]) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<12} {:<22} {:>18} {:>18} {:>18} {:>18}",
            "DATASET", "FEATURES", "SRCC", "KRCC", "PLCC", "RMSE"
        );
        for r in reports {
            let cell = |m: f64, s: f64| format!("{m:.4}(±{s:.4})");
            let _ = writeln!(
                out,
                "{:<12} {:<22} {:>18} {:>18} {:>18} {:>18}",
                r.dataset,
                r.kind.name(),
                cell(r.median.srcc, r.std.srcc),
                cell(r.median.krcc, r.std.krcc),
                cell(r.median.plcc, r.std.plcc),
                cell(r.median.rmse, r.std.rmse),
            );
        }
        out
    }
}
