//! RBF epsilon-SVR: training, prediction, grid search and model files.

mod scaler;
mod smo;

use std::io::{Read, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evaluation::srcc;

pub use scaler::Scaler;
pub use smo::{SmoProblem, SmoSolution};

pub const KKT_TOLERANCE: f64 = 1e-3;
pub const DEFAULT_EPSILON: f64 = 0.1;
const MAX_ITERATIONS: usize = 50_000_000;

pub const MODEL_MAGIC: &[u8; 4] = b"BVQM";
pub const MODEL_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SvrParams {
    pub c: f64,
    pub gamma: f64,
    pub epsilon: f64,
}

impl SvrParams {
    pub fn new(c: f64, gamma: f64, epsilon: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) || !(gamma > 0.0 && gamma.is_finite()) || !(epsilon >= 0.0 && epsilon.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "SVR parameters need C > 0, gamma > 0, epsilon >= 0 (got {c}, {gamma}, {epsilon})"
            )));
        }
        Ok(SvrParams { c, gamma, epsilon })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SvrModel {
    pub params: SvrParams,
    pub scaler: Scaler,
    /// Scaled training rows with nonzero coefficient.
    pub support_vectors: Vec<Vec<f64>>,
    pub dual_coefs: Vec<f64>,
    pub bias: f64,
    /// SMO steps taken; not serialized.
    pub iterations: usize,
}

pub fn rbf(gamma: f64, a: &[f64], b: &[f64]) -> f64 {
    let d2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    (-gamma * d2).exp()
}

fn check_rows(x: &[Vec<f64>], y: &[f64]) -> Result<()> {
    if x.len() < 2 {
        return Err(Error::InvalidArgument(format!("SVR needs at least 2 rows, got {}", x.len())));
    }
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch { expected: x.len(), got: y.len() });
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("SVR targets"));
    }
    Ok(())
}

/// Fits a min-max scaler on `x` and trains an RBF epsilon-SVR on the scaled rows.
pub fn train_svr(x: &[Vec<f64>], y: &[f64], c: f64, gamma: f64, epsilon: f64) -> Result<SvrModel> {
    let params = SvrParams::new(c, gamma, epsilon)?;
    check_rows(x, y)?;
    let scaler = Scaler::fit(x)?;
    let scaled = scaler.apply_all(x)?;
    train_scaled(scaled, y, params, scaler)
}

fn train_scaled(scaled: Vec<Vec<f64>>, y: &[f64], params: SvrParams, scaler: Scaler) -> Result<SvrModel> {
    let l = scaled.len();
    let mut kernel = vec![0.0; l * l];
    for i in 0..l {
        kernel[i * l + i] = 1.0;
        for j in 0..i {
            let k = rbf(params.gamma, &scaled[i], &scaled[j]);
            kernel[i * l + j] = k;
            kernel[j * l + i] = k;
        }
    }
    let solution = SmoProblem {
        kernel: &kernel,
        targets: y,
        c: params.c,
        epsilon: params.epsilon,
        tolerance: KKT_TOLERANCE,
        max_iterations: MAX_ITERATIONS,
    }
    .solve()?;

    let (mut support_vectors, mut dual_coefs) = (Vec::new(), Vec::new());
    for (row, coef) in scaled.into_iter().zip(solution.coefs) {
        if coef != 0.0 {
            support_vectors.push(row);
            dual_coefs.push(coef);
        }
    }
    Ok(SvrModel {
        params,
        scaler,
        support_vectors,
        dual_coefs,
        bias: solution.bias,
        iterations: solution.iterations,
    })
}

impl SvrModel {
    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        let z = self.scaler.apply(x)?;
        Ok(self.predict_scaled(&z))
    }

    pub fn predict_scaled(&self, z: &[f64]) -> f64 {
        self.support_vectors
            .iter()
            .zip(&self.dual_coefs)
            .map(|(sv, a)| a * rbf(self.params.gamma, sv, z))
            .sum::<f64>()
            + self.bias
    }

    pub fn predict_all(&self, rows: &[Vec<f64>]) -> Result<Vec<f64>> {
        rows.iter().map(|r| self.predict(r)).collect()
    }

    pub fn dim(&self) -> usize {
        self.scaler.dim()
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let dim = self.dim();
        let mut out = Vec::with_capacity(32 + 8 * (2 * dim + self.dual_coefs.len() * (dim + 1)));
        out.extend_from_slice(MODEL_MAGIC);
        out.extend_from_slice(&MODEL_VERSION.to_le_bytes());
        for v in [self.params.c, self.params.gamma, self.params.epsilon] {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out.extend_from_slice(&(dim as u64).to_le_bytes());
        out.extend_from_slice(&(self.dual_coefs.len() as u64).to_le_bytes());
        let mut put = |vs: &[f64]| vs.iter().for_each(|v| out.extend_from_slice(&v.to_le_bytes()));
        put(&self.scaler.min);
        put(&self.scaler.max);
        for sv in &self.support_vectors {
            put(sv);
        }
        put(&self.dual_coefs);
        put(&[self.bias]);
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = bytes;
        let mut magic = [0u8; 4];
        read_exact(&mut r, &mut magic)?;
        if &magic != MODEL_MAGIC {
            return Err(Error::Format("not a BVQM model file".into()));
        }
        let version = u32::from_le_bytes(take(&mut r)?);
        if version != MODEL_VERSION {
            return Err(Error::Format(format!("unsupported model version {version}")));
        }
        let f = |r: &mut &[u8]| take::<8>(r).map(f64::from_le_bytes);
        let params = SvrParams::new(f(&mut r)?, f(&mut r)?, f(&mut r)?)?;
        let dim = u64::from_le_bytes(take(&mut r)?) as usize;
        let count = u64::from_le_bytes(take(&mut r)?) as usize;
        let expected = 8usize
            .checked_mul(2 * dim + count * (dim + 1) + 1)
            .ok_or_else(|| Error::Format("model header sizes overflow".into()))?;
        if r.len() != expected {
            return Err(Error::Format(format!("model body is {} bytes, header implies {expected}", r.len())));
        }
        let mut vec = |n: usize| (0..n).map(|_| f(&mut r)).collect::<Result<Vec<f64>>>();
        let scaler = Scaler { min: vec(dim)?, max: vec(dim)? };
        let support_vectors = (0..count).map(|_| vec(dim)).collect::<Result<Vec<_>>>()?;
        let dual_coefs = vec(count)?;
        let bias = vec(1)?[0];
        Ok(SvrModel {
            params,
            scaler,
            support_vectors,
            dual_coefs,
            bias,
            iterations: 0,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        f.write_all(&self.to_bytes()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let mut bytes = Vec::new();
        std::fs::File::open(path)
            .and_then(|mut f| f.read_to_end(&mut bytes))
            .map_err(|e| Error::io(path, e))?;
        Self::from_bytes(&bytes)
    }
}

fn read_exact(r: &mut &[u8], buf: &mut [u8]) -> Result<()> {
    r.read_exact(buf).map_err(|_| Error::Format("truncated model file".into()))
}

fn take<const N: usize>(r: &mut &[u8]) -> Result<[u8; N]> {
    let mut b = [0u8; N];
    read_exact(r, &mut b)?;
    Ok(b)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HyperGrid {
    pub c: Vec<f64>,
    pub gamma: Vec<f64>,
    pub epsilon: f64,
}

impl Default for HyperGrid {
    /// C in 2^-6, 2^-4, ..., 2^10; gamma in 2^-8, 2^-6, ..., 2^2.
    fn default() -> Self {
        HyperGrid {
            c: (-6..=10).step_by(2).map(|e| 2f64.powi(e)).collect(),
            gamma: (-8..=2).step_by(2).map(|e| 2f64.powi(e)).collect(),
            epsilon: DEFAULT_EPSILON,
        }
    }
}

impl HyperGrid {
    pub fn single(c: f64, gamma: f64, epsilon: f64) -> Self {
        HyperGrid {
            c: vec![c],
            gamma: vec![gamma],
            epsilon,
        }
    }

    /// Grid points ordered by C, then gamma, both ascending.
    pub fn points(&self) -> Result<Vec<(f64, f64)>> {
        if self.c.is_empty() || self.gamma.is_empty() {
            return Err(Error::InvalidArgument("hyperparameter grid is empty".into()));
        }
        let mut c = self.c.clone();
        let mut g = self.gamma.clone();
        c.sort_by(f64::total_cmp);
        g.sort_by(f64::total_cmp);
        c.dedup();
        g.dedup();
        Ok(c.iter().flat_map(|&c| g.iter().map(move |&g| (c, g))).collect())
    }
}

/// Number of tuning rows held out of `n` training rows.
pub fn tuning_size(n: usize) -> usize {
    (n as f64 * 0.2).round() as usize
}

#[derive(Clone, Debug, PartialEq)]
pub struct GridResult {
    pub c: f64,
    pub gamma: f64,
    /// Tuning SRCC of every point in `HyperGrid::points` order; `None` when undefined.
    pub scores: Vec<Option<f64>>,
}

/// Picks `(C, gamma)` by tuning-split SRCC on a seeded 80/20 split of the training rows.
pub fn grid_search(x: &[Vec<f64>], y: &[f64], grid: &HyperGrid, seed: u64) -> Result<(f64, f64)> {
    grid_search_scored(x, y, grid, seed).map(|r| (r.c, r.gamma))
}

pub fn grid_search_scored(x: &[Vec<f64>], y: &[f64], grid: &HyperGrid, seed: u64) -> Result<GridResult> {
    let points = grid.points()?;
    if points.len() == 1 {
        let (c, gamma) = points[0];
        return Ok(GridResult { c, gamma, scores: vec![None] });
    }
    check_rows(x, y)?;
    let n = x.len();
    let n_tune = tuning_size(n);
    if n_tune < 2 || n - n_tune < 2 {
        return Err(Error::InvalidArgument(format!(
            "{n} training rows give a degenerate tuning split ({n_tune} tuning rows)"
        )));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let (tune, fit) = order.split_at(n_tune);
    let pick = |idx: &[usize]| -> (Vec<Vec<f64>>, Vec<f64>) { (idx.iter().map(|&i| x[i].clone()).collect(), idx.iter().map(|&i| y[i]).collect()) };
    let (x_fit, y_fit) = pick(fit);
    let (x_tune, y_tune) = pick(tune);
    let scaler = Scaler::fit(&x_fit)?;
    let z_fit = scaler.apply_all(&x_fit)?;
    let z_tune = scaler.apply_all(&x_tune)?;

    let scores = points
        .par_iter()
        .map(|&(c, gamma)| -> Result<Option<f64>> {
            let model = train_scaled(z_fit.clone(), &y_fit, SvrParams::new(c, gamma, grid.epsilon)?, scaler.clone())?;
            let pred: Vec<f64> = z_tune.iter().map(|z| model.predict_scaled(z)).collect();
            Ok(srcc(&pred, &y_tune).ok())
        })
        .collect::<Result<Vec<_>>>()?;

    // strict improvement keeps the earliest point, i.e. smaller C then smaller gamma
    let mut best = 0;
    for (i, s) in scores.iter().enumerate() {
        let better = match (s, scores[best]) {
            (Some(a), Some(b)) => *a > b,
            (Some(_), None) => true,
            _ => false,
        };
        if better {
            best = i;
        }
    }
    let (c, gamma) = points[best];
    Ok(GridResult { c, gamma, scores })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_target_gives_constant_model() {
        let x: Vec<Vec<f64>> = (0..20).map(|i| vec![i as f64, (i * i) as f64]).collect();
        let y = vec![3.5; 20];
        let m = train_svr(&x, &y, 1.0, 0.5, 0.1).unwrap();
        for q in [[0.0, 0.0], [7.5, -3.0], [100.0, 2.0]] {
            assert!((m.predict(&q).unwrap() - 3.5).abs() <= 0.1);
        }
    }

    #[test]
    fn model_bytes_round_trip() {
        let x: Vec<Vec<f64>> = (0..15).map(|i| vec![i as f64 / 3.0, (i % 4) as f64]).collect();
        let y: Vec<f64> = x.iter().map(|r| 1.0 + r[0].sin().abs() * 3.0).collect();
        let m = train_svr(&x, &y, 4.0, 1.0, 0.1).unwrap();
        let bytes = m.to_bytes();
        let back = SvrModel::from_bytes(&bytes).unwrap();
        assert_eq!(back.to_bytes(), bytes);
        assert_eq!(back.predict(&[1.0, 2.0]).unwrap().to_bits(), m.predict(&[1.0, 2.0]).unwrap().to_bits());
        assert!(SvrModel::from_bytes(&bytes[..bytes.len() - 1]).is_err());
        assert!(SvrModel::from_bytes(b"BVQX").is_err());
    }

    #[test]
    fn default_grid_shape() {
        let g = HyperGrid::default();
        assert_eq!(g.c.len(), 9);
        assert_eq!(g.gamma.len(), 6);
        assert_eq!(g.c[0], 2f64.powi(-6));
        assert_eq!(*g.gamma.last().unwrap(), 4.0);
        assert_eq!(g.points().unwrap().len(), 54);
    }

    #[test]
    fn singleton_grid_short_circuits() {
        let g = HyperGrid::single(2.0, 0.5, 0.1);
        assert_eq!(grid_search(&[vec![1.0]], &[1.0], &g, 0).unwrap(), (2.0, 0.5));
    }

    #[test]
    fn bad_inputs() {
        assert!(train_svr(&[vec![1.0]], &[1.0], 1.0, 1.0, 0.1).is_err());
        assert!(train_svr(&[vec![1.0], vec![2.0]], &[1.0, f64::NAN], 1.0, 1.0, 0.1).is_err());
        assert!(train_svr(&[vec![1.0], vec![2.0]], &[1.0, 2.0], 0.0, 1.0, 0.1).is_err());
        let g = HyperGrid::default();
        let x: Vec<Vec<f64>> = (0..5).map(|i| vec![i as f64]).collect();
        assert!(grid_search(&x, &[1.0, 2.0, 3.0, 4.0, 5.0], &g, 0).is_err());
    }
}
