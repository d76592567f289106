//! Four-parameter logistic mapping fitted by Levenberg-Marquardt.

use serde::{Deserialize, Serialize};

use super::metrics::{mean, std_dev};
use crate::error::{Error, Result};

pub const MIN_POINTS: usize = 5;
pub const MAX_ITERATIONS: usize = 2000;
pub const REL_TOLERANCE: f64 = 1e-10;

/// `f(x) = β₂ + (β₁ − β₂) / (1 + exp(−(x − β₃)/|β₄|))`
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogisticParams {
    pub beta1: f64,
    pub beta2: f64,
    pub beta3: f64,
    pub beta4: f64,
}

impl LogisticParams {
    pub fn eval(&self, x: f64) -> f64 {
        self.beta2 + (self.beta1 - self.beta2) * sigmoid((x - self.beta3) / self.beta4.abs())
    }

    pub fn map(&self, xs: &[f64]) -> Vec<f64> {
        xs.iter().map(|&x| self.eval(x)).collect()
    }

    fn as_array(&self) -> [f64; 4] {
        [self.beta1, self.beta2, self.beta3, self.beta4]
    }

    fn from_array(b: [f64; 4]) -> Self {
        LogisticParams {
            beta1: b[0],
            beta2: b[1],
            beta3: b[2],
            beta4: b[3],
        }
    }
}

fn sigmoid(u: f64) -> f64 {
    if u >= 0.0 {
        1.0 / (1.0 + (-u).exp())
    } else {
        let e = u.exp();
        e / (1.0 + e)
    }
}

fn sse(p: &LogisticParams, x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(&xi, &yi)| (p.eval(xi) - yi).powi(2)).sum()
}

/// Partial derivatives of `f` at `x` with respect to β₁..β₄.
fn gradient(p: &LogisticParams, x: f64) -> [f64; 4] {
    let s = p.beta4.abs();
    let u = (x - p.beta3) / s;
    let g = sigmoid(u);
    let dg = g * (1.0 - g);
    let amp = p.beta1 - p.beta2;
    [g, 1.0 - g, -amp * dg / s, -amp * dg * u / s * p.beta4.signum()]
}

/// Solves a 4×4 system by Gaussian elimination with partial pivoting.
fn solve4(mut a: [[f64; 4]; 4], mut b: [f64; 4]) -> Option<[f64; 4]> {
    for col in 0..4 {
        let piv = (col..4).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..4 {
            let f = a[r][col] / a[col][col];
            for c in col..4 {
                a[r][c] -= f * a[col][c];
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = [0.0; 4];
    for r in (0..4).rev() {
        let s: f64 = (r + 1..4).map(|c| a[r][c] * x[c]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    x.iter().all(|v| v.is_finite()).then_some(x)
}

#[derive(Clone, Copy, Debug)]
pub struct LogisticFit {
    pub params: LogisticParams,
    pub sse: f64,
    pub iterations: usize,
}

/// Least-squares fit of the logistic mapping from predictions `x` to MOS `y`.
pub fn logistic_fit(x: &[f64], y: &[f64]) -> Result<LogisticParams> {
    logistic_fit_detailed(x, y).map(|f| f.params)
}

pub fn logistic_fit_detailed(x: &[f64], y: &[f64]) -> Result<LogisticFit> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch { expected: x.len(), got: y.len() });
    }
    if x.len() < MIN_POINTS {
        return Err(Error::InvalidArgument(format!(
            "logistic fit needs at least {MIN_POINTS} points, got {}",
            x.len()
        )));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("logistic fit input"));
    }
    let (y_max, y_min) = y
        .iter()
        .fold((f64::NEG_INFINITY, f64::INFINITY), |(hi, lo), &v| (hi.max(v), lo.min(v)));
    if y_max == y_min {
        return Err(Error::Degenerate("logistic fit needs non-constant targets".into()));
    }
    let sx = std_dev(x);
    let mut p = LogisticParams {
        beta1: y_max,
        beta2: y_min,
        beta3: mean(x),
        beta4: if sx > 0.0 { sx } else { 1.0 },
    };
    let mut cost = sse(&p, x, y);
    let mut lambda = 1e-3;
    let mut iterations = 0;
    while iterations < MAX_ITERATIONS {
        iterations += 1;
        let mut jtj = [[0.0; 4]; 4];
        let mut jtr = [0.0; 4];
        for (&xi, &yi) in x.iter().zip(y) {
            let g = gradient(&p, xi);
            let r = p.eval(xi) - yi;
            for a in 0..4 {
                jtr[a] += g[a] * r;
                for b in 0..4 {
                    jtj[a][b] += g[a] * g[b];
                }
            }
        }
        let mut accepted = false;
        while lambda < 1e16 {
            let mut m = jtj;
            for (d, row) in m.iter_mut().enumerate() {
                row[d] += lambda * jtj[d][d].max(1e-12);
            }
            if let Some(step) = solve4(m, jtr.map(|v| -v)) {
                let mut b = p.as_array();
                for (bi, s) in b.iter_mut().zip(step) {
                    *bi += s;
                }
                let cand = LogisticParams::from_array(b);
                let c = sse(&cand, x, y);
                if cand.beta4 != 0.0 && c.is_finite() && c <= cost {
                    let rel = (cost - c) / cost.max(f64::MIN_POSITIVE);
                    p = cand;
                    cost = c;
                    lambda = (lambda / 10.0).max(1e-12);
                    accepted = true;
                    if rel < REL_TOLERANCE {
                        return Ok(finish(p, cost, iterations, y));
                    }
                    break;
                }
            }
            lambda *= 10.0;
        }
        if !accepted {
            break;
        }
    }
    Ok(finish(p, cost, iterations, y))
}

/// The constant curve at `mean(y)` is representable (`β₁ = β₂`), so the fit
/// never does worse than the best constant predictor.
fn finish(p: LogisticParams, cost: f64, iterations: usize, y: &[f64]) -> LogisticFit {
    let m = mean(y);
    let flat = LogisticParams {
        beta1: m,
        beta2: m,
        ..p
    };
    let flat_cost: f64 = y.iter().map(|v| (v - m).powi(2)).sum();
    if flat_cost < cost {
        LogisticFit {
            params: flat,
            sse: flat_cost,
            iterations,
        }
    } else {
        LogisticFit { params: p, sse: cost, iterations }
    }
}
