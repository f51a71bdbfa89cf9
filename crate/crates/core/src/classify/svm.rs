// SPDX-License-Identifier: Apache-2.0

//! Soft-margin RBF support vector machine trained by sequential minimal
//! optimization with maximal-violating-pair working-set selection.

use rayon::prelude::*;
use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

use super::{logistic, Dataset};
use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SvmParams {
    /// Cost `c`.
    pub c: f64,
    /// RBF coefficient: `K(x, z) = exp(-gamma * |x - z|^2)`.
    pub gamma: f64,
    /// Stop when the maximal KKT violation falls below this.
    pub tol: f64,
    /// Iteration cap; `0` means `max(1_000_000, 100 n)`.
    pub max_iter: usize,
}

impl Default for SvmParams {
    fn default() -> Self {
        Self { c: 64.0, gamma: 0.0625, tol: 1e-3, max_iter: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmModel {
    pub params: SvmParams,
    pub support_vectors: Vec<Vec<f64>>,
    /// `alpha_i * y_i` per support vector.
    pub coef: Vec<f64>,
    pub bias: f64,
    /// False when the iteration cap was hit before the tolerance.
    pub converged: bool,
    pub iterations: usize,
}

impl SvmModel {
    /// `sum_i coef_i K(sv_i, x) + bias`.
    pub fn decision_value(&self, x: &[f64]) -> f64 {
        self.support_vectors.iter().zip(&self.coef).map(|(sv, c)| c * rbf(self.params.gamma, sv, x)).sum::<f64>()
            + self.bias
    }

    pub fn predict_score(&self, x: &[f64]) -> f64 {
        logistic(self.decision_value(x))
    }
}

pub fn rbf(gamma: f64, a: &[f64], b: &[f64]) -> f64 {
    let d2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    (-gamma * d2).exp()
}

/// Full dual solution, including multipliers for every training row.
#[derive(Debug, Clone)]
pub struct SvmSolution {
    pub model: SvmModel,
    pub alpha: Vec<f64>,
    /// Per-row upper bounds on `alpha`.
    pub upper: Vec<f64>,
}

const TAU: f64 = 1e-12;
const FULL_GRAM_LIMIT: usize = 3000;
const CACHE_BYTES: usize = 256 << 20;

/// Kernel rows, either precomputed or cached on demand.
struct KernelRows<'a> {
    data: &'a Dataset,
    gamma: f64,
    full: Option<Vec<f64>>,
    cache: FxHashMap<usize, Vec<f64>>,
    order: std::collections::VecDeque<usize>,
    capacity: usize,
}

impl<'a> KernelRows<'a> {
    fn new(data: &'a Dataset, gamma: f64) -> Self {
        let n = data.len();
        let full = (n <= FULL_GRAM_LIMIT).then(|| {
            let mut g = vec![0.0; n * n];
            g.par_chunks_mut(n.max(1)).enumerate().for_each(|(i, row)| {
                for (j, v) in row.iter_mut().enumerate() {
                    *v = rbf(gamma, data.row(i), data.row(j));
                }
            });
            g
        });
        Self {
            data,
            gamma,
            full,
            cache: FxHashMap::default(),
            order: std::collections::VecDeque::new(),
            capacity: (CACHE_BYTES / (8 * n.max(1))).max(2),
        }
    }

    // `if let` here trips the borrow checker on the cache branch below.
    #[allow(clippy::unnecessary_unwrap)]
    fn row(&mut self, i: usize) -> &[f64] {
        let n = self.data.len();
        if self.full.is_some() {
            return &self.full.as_ref().expect("full gram")[i * n..(i + 1) * n];
        }
        if !self.cache.contains_key(&i) {
            if self.cache.len() >= self.capacity {
                if let Some(old) = self.order.pop_front() {
                    self.cache.remove(&old);
                }
            }
            let xi = self.data.row(i);
            let (data, gamma) = (self.data, self.gamma);
            let row: Vec<f64> = (0..n).into_par_iter().map(|j| rbf(gamma, xi, data.row(j))).collect();
            self.cache.insert(i, row);
            self.order.push_back(i);
        }
        &self.cache[&i]
    }
}

/// Trains with per-row cost `c` (or `c * n * w_i` when `weights`, which sum
/// to one, are given).
pub fn train_svm_rbf(data: &Dataset, params: &SvmParams, weights: Option<&[f64]>) -> Result<SvmModel> {
    solve(data, params, weights).map(|s| s.model)
}

/// SMO on the dual `min ½ aᵀQa - eᵀa` s.t. `yᵀa = 0`, `0 <= a_i <= C_i`.
pub fn solve(data: &Dataset, params: &SvmParams, weights: Option<&[f64]>) -> Result<SvmSolution> {
    data.require_both_classes()?;
    let n = data.len();
    let y: Vec<f64> = data.labels().iter().map(|&l| if l { 1.0 } else { -1.0 }).collect();
    let upper: Vec<f64> = match weights {
        Some(w) => w.iter().map(|wi| params.c * n as f64 * wi).collect(),
        None => vec![params.c; n],
    };
    let max_iter = if params.max_iter == 0 { (100 * n).max(1_000_000) } else { params.max_iter };

    let mut kernel = KernelRows::new(data, params.gamma);
    let mut alpha = vec![0.0; n];
    let mut grad = vec![-1.0; n];
    let mut iterations = 0;
    let mut converged = false;

    let in_up = |a: f64, yt: f64, c: f64| (yt > 0.0 && a < c) || (yt < 0.0 && a > 0.0);
    let in_low = |a: f64, yt: f64, c: f64| (yt > 0.0 && a > 0.0) || (yt < 0.0 && a < c);

    while iterations < max_iter {
        let mut i = usize::MAX;
        let mut gmax = f64::NEG_INFINITY;
        let mut j = usize::MAX;
        let mut gmin = f64::INFINITY;
        for t in 0..n {
            let v = -y[t] * grad[t];
            if in_up(alpha[t], y[t], upper[t]) && v > gmax {
                gmax = v;
                i = t;
            }
            if in_low(alpha[t], y[t], upper[t]) && v < gmin {
                gmin = v;
                j = t;
            }
        }
        if i == usize::MAX || j == usize::MAX || gmax - gmin < params.tol {
            converged = true;
            break;
        }
        iterations += 1;

        let ki = kernel.row(i).to_vec();
        let kj = kernel.row(j).to_vec();
        let (ci, cj) = (upper[i], upper[j]);
        let (old_ai, old_aj) = (alpha[i], alpha[j]);
        let (mut ai, mut aj) = (old_ai, old_aj);
        let qii = ki[i];
        let qjj = kj[j];
        let qij = y[i] * y[j] * ki[j];

        if y[i] != y[j] {
            let quad = (qii + qjj + 2.0 * qij).max(TAU);
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = ai - aj;
            ai += delta;
            aj += delta;
            if diff > 0.0 {
                if aj < 0.0 {
                    aj = 0.0;
                    ai = diff;
                }
            } else if ai < 0.0 {
                ai = 0.0;
                aj = -diff;
            }
            if diff > ci - cj {
                if ai > ci {
                    ai = ci;
                    aj = ci - diff;
                }
            } else if aj > cj {
                aj = cj;
                ai = cj + diff;
            }
        } else {
            let quad = (qii + qjj - 2.0 * qij).max(TAU);
            let delta = (grad[i] - grad[j]) / quad;
            let sum = ai + aj;
            ai -= delta;
            aj += delta;
            if sum > ci {
                if ai > ci {
                    ai = ci;
                    aj = sum - ci;
                }
            } else if aj < 0.0 {
                aj = 0.0;
                ai = sum;
            }
            if sum > cj {
                if aj > cj {
                    aj = cj;
                    ai = sum - cj;
                }
            } else if ai < 0.0 {
                ai = 0.0;
                aj = sum;
            }
        }
        alpha[i] = ai;
        alpha[j] = aj;

        let dai = ai - old_ai;
        let daj = aj - old_aj;
        let (yi, yj) = (y[i], y[j]);
        grad.par_iter_mut().enumerate().with_min_len(1024).for_each(|(t, g)| {
            *g += y[t] * (yi * ki[t] * dai + yj * kj[t] * daj);
        });
    }
    if !converged {
        log::warn!("SMO hit the iteration cap ({max_iter}) before reaching tol {}", params.tol);
    }

    // Offset from free multipliers, or the midpoint of the feasible range.
    let mut free_sum = 0.0;
    let mut free_n = 0usize;
    let mut ub = f64::INFINITY;
    let mut lb = f64::NEG_INFINITY;
    for t in 0..n {
        let yg = y[t] * grad[t];
        if alpha[t] > 0.0 && alpha[t] < upper[t] {
            free_sum += yg;
            free_n += 1;
        } else if (alpha[t] >= upper[t] && y[t] < 0.0) || (alpha[t] <= 0.0 && y[t] > 0.0) {
            ub = ub.min(yg);
        } else {
            lb = lb.max(yg);
        }
    }
    let rho = if free_n > 0 { free_sum / free_n as f64 } else { (ub + lb) / 2.0 };

    let mut support_vectors = Vec::new();
    let mut coef = Vec::new();
    for t in 0..n {
        if alpha[t] > 0.0 {
            support_vectors.push(data.row(t).to_vec());
            coef.push(alpha[t] * y[t]);
        }
    }
    Ok(SvmSolution {
        model: SvmModel { params: *params, support_vectors, coef, bias: -rho, converged, iterations },
        alpha,
        upper,
    })
}
