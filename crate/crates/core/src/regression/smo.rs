//! Epsilon-SVR dual solved by sequential minimal optimization.
//!
//! The dual is posed over `2l` variables `α = (α⁺, α⁻)` with labels
//! `s = (+1…, −1…)`:
//!
//! ```text
//! min ½ αᵀQα + pᵀα   s.t.  sᵀα = 0,  0 ≤ α ≤ C
//! Q_ij = s_i s_j K(x_i, x_j),  p = (ε − y, ε + y)
//! ```
//!
//! Each step updates the maximal-violating pair. Shrinking is not used, so
//! the iterate sequence depends only on the data order.

use crate::error::{Error, Result};

/// Outcome of a solver run in the original `l` variables.
#[derive(Clone, Debug)]
pub struct SmoSolution {
    /// `α⁺ − α⁻` per training row, each in `[−C, C]`.
    pub coefs: Vec<f64>,
    pub bias: f64,
    pub iterations: usize,
    /// Final `max(−sG over I_up) − min(−sG over I_low)`.
    pub violation: f64,
}

pub struct SmoProblem<'a> {
    /// Row-major `l×l` kernel matrix.
    pub kernel: &'a [f64],
    pub targets: &'a [f64],
    pub c: f64,
    pub epsilon: f64,
    pub tolerance: f64,
    pub max_iterations: usize,
}

const TAU: f64 = 1e-12;

impl SmoProblem<'_> {
    pub fn solve(&self) -> Result<SmoSolution> {
        let l = self.targets.len();
        if self.kernel.len() != l * l {
            return Err(Error::DimensionMismatch { expected: l * l, got: self.kernel.len() });
        }
        let n = 2 * l;
        let c = self.c;
        let sign = |t: usize| if t < l { 1.0 } else { -1.0 };
        let row = |t: usize| t % l;
        let k = |a: usize, b: usize| self.kernel[row(a) * l + row(b)];
        let q = |a: usize, b: usize| sign(a) * sign(b) * k(a, b);

        let mut alpha = vec![0.0f64; n];
        let mut grad: Vec<f64> = (0..n)
            .map(|t| if t < l { self.epsilon - self.targets[t] } else { self.epsilon + self.targets[t - l] })
            .collect();

        let in_up = |a: f64, s: f64| (s > 0.0 && a < c) || (s < 0.0 && a > 0.0);
        let in_low = |a: f64, s: f64| (s < 0.0 && a < c) || (s > 0.0 && a > 0.0);

        let mut iterations = 0;
        let violation = loop {
            let (mut i, mut g_max) = (usize::MAX, f64::NEG_INFINITY);
            let (mut j, mut g_min) = (usize::MAX, f64::INFINITY);
            for t in 0..n {
                let v = -sign(t) * grad[t];
                if in_up(alpha[t], sign(t)) && v > g_max {
                    g_max = v;
                    i = t;
                }
                if in_low(alpha[t], sign(t)) && v < g_min {
                    g_min = v;
                    j = t;
                }
            }
            let gap = g_max - g_min;
            if i == usize::MAX || j == usize::MAX || gap < self.tolerance {
                break gap.max(0.0);
            }
            if iterations >= self.max_iterations {
                return Err(Error::Degenerate(format!(
                    "SMO did not reach KKT tolerance {} within {} iterations (gap {gap})",
                    self.tolerance, self.max_iterations
                )));
            }
            iterations += 1;

            let (old_i, old_j) = (alpha[i], alpha[j]);
            let (qii, qjj, qij) = (q(i, i), q(j, j), q(i, j));
            if sign(i) != sign(j) {
                let quad = (qii + qjj + 2.0 * qij).max(TAU);
                let delta = (-grad[i] - grad[j]) / quad;
                let diff = alpha[i] - alpha[j];
                alpha[i] += delta;
                alpha[j] += delta;
                if diff > 0.0 {
                    if alpha[j] < 0.0 {
                        alpha[j] = 0.0;
                        alpha[i] = diff;
                    }
                } else if alpha[i] < 0.0 {
                    alpha[i] = 0.0;
                    alpha[j] = -diff;
                }
                // equal box bounds: diff > C_i − C_j reduces to diff > 0
                if diff > 0.0 {
                    if alpha[i] > c {
                        alpha[i] = c;
                        alpha[j] = c - diff;
                    }
                } else if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = c + diff;
                }
            } else {
                let quad = (qii + qjj - 2.0 * qij).max(TAU);
                let delta = (grad[i] - grad[j]) / quad;
                let sum = alpha[i] + alpha[j];
                alpha[i] -= delta;
                alpha[j] += delta;
                if sum > c {
                    if alpha[i] > c {
                        alpha[i] = c;
                        alpha[j] = sum - c;
                    }
                } else if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = sum;
                }
                if sum > c {
                    if alpha[j] > c {
                        alpha[j] = c;
                        alpha[i] = sum - c;
                    }
                } else if alpha[i] < 0.0 {
                    alpha[i] = 0.0;
                    alpha[j] = sum;
                }
            }

            let (di, dj) = (alpha[i] - old_i, alpha[j] - old_j);
            for t in 0..n {
                grad[t] += q(i, t) * di + q(j, t) * dj;
            }
        };

        // bias from free variables, or the midpoint of the feasible interval
        let (mut ub, mut lb) = (f64::INFINITY, f64::NEG_INFINITY);
        let (mut free_sum, mut free_count) = (0.0, 0usize);
        for t in 0..n {
            let yg = sign(t) * grad[t];
            let s = sign(t);
            if alpha[t] >= c {
                if s < 0.0 {
                    ub = ub.min(yg);
                } else {
                    lb = lb.max(yg);
                }
            } else if alpha[t] <= 0.0 {
                if s > 0.0 {
                    ub = ub.min(yg);
                } else {
                    lb = lb.max(yg);
                }
            } else {
                free_sum += yg;
                free_count += 1;
            }
        }
        let rho = if free_count > 0 { free_sum / free_count as f64 } else { (ub + lb) / 2.0 };

        Ok(SmoSolution {
            coefs: (0..l).map(|t| alpha[t] - alpha[t + l]).collect(),
            bias: -rho,
            iterations,
            violation,
        })
    }
}
