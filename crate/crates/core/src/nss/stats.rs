//! The fixed 17-entry summary computed for every statistical map.
//!
//! | index | statistic |
//! |-------|-----------|
//! | 0–1   | GGD shape, scale |
//! | 2–5   | AGGD shape, left scale, right scale, mean offset |
//! | 6–9   | mean, standard deviation, skewness, excess kurtosis |
//! | 10–14 | 5th, 25th, 50th, 75th, 95th percentiles |
//! | 15    | mean absolute value |
//! | 16    | fraction of strictly positive samples |
//!
//! Failed distribution fits (too few samples, zero variance) contribute zeros.

use super::distribution::{fit_aggd, fit_ggd};

pub const STATS_PER_MAP: usize = 17;

pub const STAT_NAMES: [&str; STATS_PER_MAP] = [
    "ggd_alpha",
    "ggd_sigma",
    "aggd_alpha",
    "aggd_sigma_l",
    "aggd_sigma_r",
    "aggd_eta",
    "mean",
    "std",
    "skewness",
    "kurtosis",
    "p05",
    "p25",
    "p50",
    "p75",
    "p95",
    "mean_abs",
    "frac_positive",
];

/// Index of the GGD shape entry within a map's summary.
pub const GGD_ALPHA: usize = 0;

fn percentile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// Appends the 17 summary statistics of `samples` to `out`.
pub fn summarize_into(samples: &[f64], out: &mut Vec<f64>) {
    if samples.is_empty() {
        out.extend([0.0; STATS_PER_MAP]);
        return;
    }
    match fit_ggd(samples) {
        Ok(g) => out.extend([g.alpha, g.sigma]),
        Err(_) => out.extend([0.0, 0.0]),
    }
    match fit_aggd(samples) {
        Ok(a) => out.extend([a.params.alpha, a.params.sigma_l, a.params.sigma_r, a.params.eta]),
        Err(_) => out.extend([0.0; 4]),
    }

    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for &v in samples {
        let d = v - mean;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    let (m2, m3, m4) = (m2 / n, m3 / n, m4 / n);
    let std = m2.sqrt();
    let (skew, kurt) = if m2 > 1e-24 {
        (m3 / m2.powf(1.5), m4 / (m2 * m2) - 3.0)
    } else {
        (0.0, 0.0)
    };
    out.extend([mean, std, skew, kurt]);

    let mut sorted = samples.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    for q in [0.05, 0.25, 0.5, 0.75, 0.95] {
        out.push(percentile(&sorted, q));
    }
    out.push(samples.iter().map(|v| v.abs()).sum::<f64>() / n);
    out.push(samples.iter().filter(|&&v| v > 0.0).count() as f64 / n);
}
