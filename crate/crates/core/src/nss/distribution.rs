//! Moment-matching estimators for the generalized Gaussian (GGD) and its
//! asymmetric variant (AGGD).

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

pub const MIN_SAMPLES: usize = 100;
pub const ALPHA_MIN: f64 = 0.02;
pub const ALPHA_MAX: f64 = 10.0;
const GRID_POINTS: usize = 9801;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GgdParams {
    pub alpha: f64,
    pub sigma: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AggdParams {
    pub alpha: f64,
    pub sigma_l: f64,
    pub sigma_r: f64,
    pub eta: f64,
}

/// Result of [`fit_aggd`]; `fallback` marks single-signed input fitted as a symmetric GGD.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AggdFit {
    pub params: AggdParams,
    pub fallback: bool,
}

/// `Γ(2/α)² / (Γ(1/α)·Γ(3/α))`, the value of `(E|x|)² / E[x²]` for a GGD of shape α.
pub fn ggd_ratio(alpha: f64) -> f64 {
    (2.0 * ln_gamma(2.0 / alpha) - ln_gamma(1.0 / alpha) - ln_gamma(3.0 / alpha)).exp()
}

struct RatioTable {
    alphas: Vec<f64>,
    ratios: Vec<f64>,
}

fn table() -> &'static RatioTable {
    static TABLE: OnceLock<RatioTable> = OnceLock::new();
    TABLE.get_or_init(|| {
        let (lo, hi) = (ALPHA_MIN.ln(), ALPHA_MAX.ln());
        let step = (hi - lo) / (GRID_POINTS - 1) as f64;
        let alphas: Vec<f64> = (0..GRID_POINTS).map(|i| (lo + step * i as f64).exp()).collect();
        let ratios = alphas.iter().map(|&a| ggd_ratio(a)).collect();
        RatioTable { alphas, ratios }
    })
}

/// Grid alpha whose ratio is nearest to `r` (the ratio is increasing in alpha).
fn invert_ratio(r: f64) -> f64 {
    let t = table();
    let i = t.ratios.partition_point(|&v| v < r);
    if i == 0 {
        return t.alphas[0];
    }
    if i == t.ratios.len() {
        return t.alphas[t.alphas.len() - 1];
    }
    if (t.ratios[i] - r).abs() < (r - t.ratios[i - 1]).abs() {
        t.alphas[i]
    } else {
        t.alphas[i - 1]
    }
}

fn check_samples(samples: &[f64]) -> Result<()> {
    if samples.len() < MIN_SAMPLES {
        return Err(Error::InvalidArgument(format!(
            "distribution fit needs at least {MIN_SAMPLES} samples, got {}",
            samples.len()
        )));
    }
    if samples.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("distribution samples"));
    }
    Ok(())
}

/// Zero-mean GGD fit by moment matching.
pub fn fit_ggd(samples: &[f64]) -> Result<GgdParams> {
    check_samples(samples)?;
    let n = samples.len() as f64;
    let mean_abs = samples.iter().map(|v| v.abs()).sum::<f64>() / n;
    let mean_sq = samples.iter().map(|v| v * v).sum::<f64>() / n;
    if mean_sq <= f64::MIN_POSITIVE || mean_abs <= f64::MIN_POSITIVE {
        return Err(Error::Degenerate("zero-variance samples".into()));
    }
    Ok(GgdParams {
        alpha: invert_ratio(mean_abs * mean_abs / mean_sq),
        sigma: mean_sq.sqrt(),
    })
}

/// AGGD fit by moment matching on the negative and positive halves.
///
/// Input lacking either sign is fitted as a symmetric GGD and flagged.
pub fn fit_aggd(samples: &[f64]) -> Result<AggdFit> {
    check_samples(samples)?;
    let (mut sq_l, mut n_l, mut sq_r, mut n_r) = (0.0, 0usize, 0.0, 0usize);
    let (mut sum_abs, mut sum_sq) = (0.0, 0.0);
    for &v in samples {
        if v < 0.0 {
            sq_l += v * v;
            n_l += 1;
        } else if v > 0.0 {
            sq_r += v * v;
            n_r += 1;
        }
        sum_abs += v.abs();
        sum_sq += v * v;
    }
    if n_l == 0 || n_r == 0 {
        let g = fit_ggd(samples)?;
        return Ok(AggdFit {
            params: AggdParams {
                alpha: g.alpha,
                sigma_l: g.sigma,
                sigma_r: g.sigma,
                eta: 0.0,
            },
            fallback: true,
        });
    }
    let n = samples.len() as f64;
    let sigma_l = (sq_l / n_l as f64).sqrt();
    let sigma_r = (sq_r / n_r as f64).sqrt();
    let gamma_hat = sigma_l / sigma_r;
    let r_hat = (sum_abs / n).powi(2) / (sum_sq / n);
    let big_r = r_hat * (gamma_hat.powi(3) + 1.0) * (gamma_hat + 1.0) / (gamma_hat * gamma_hat + 1.0).powi(2);
    let alpha = invert_ratio(big_r);

    let scale = (ln_gamma(1.0 / alpha) - ln_gamma(3.0 / alpha)).exp().sqrt();
    let (beta_l, beta_r) = (sigma_l * scale, sigma_r * scale);
    let eta = (beta_r - beta_l) * (ln_gamma(2.0 / alpha) - ln_gamma(1.0 / alpha)).exp();
    Ok(AggdFit {
        params: AggdParams {
            alpha,
            sigma_l,
            sigma_r,
            eta,
        },
        fallback: false,
    })
}
