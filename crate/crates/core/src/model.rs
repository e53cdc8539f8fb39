//! Class-weighted, L2-regularized logistic regression.
//!
//! The training objective over samples `(x_i, y_i)` with `t_i = 2 y_i - 1` is
//!
//! ```text
//! J(w, b) = ½ (‖w‖² + b²) + C Σ_i c(y_i) ln(1 + exp(-t_i (w·x_i + b)))
//! ```
//!
//! The bias is penalized like any other weight, as if every sample carried an
//! extra constant feature of value 1. It is minimized with a truncated Newton
//! method: conjugate gradient on Hessian-vector products, followed by an
//! Armijo backtracking line search. The solver uses no randomness, so a fixed
//! input always produces the same bits.

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::vectorize::SparseVector;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("training labels contain a single class")]
    SingleClass,
    #[error("label {label} at position {index} is not 0 or 1")]
    InvalidLabel { index: usize, label: u8 },
    #[error("{features} feature rows but {labels} labels")]
    LengthMismatch { features: usize, labels: usize },
    #[error("row {index} has dimension {found}, expected {expected}")]
    DimensionMismatch { index: usize, expected: usize, found: usize },
    #[error("row {index} contains a non-finite feature value")]
    NonFiniteFeature { index: usize },
    #[error("invalid hyperparameter: {0}")]
    InvalidParameter(&'static str),
    #[error("objective became non-finite at iteration {iteration}")]
    Diverged { iteration: usize },
}

/// Per-class loss multipliers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassWeights {
    pub negative: f64,
    pub positive: f64,
}

impl ClassWeights {
    pub const UNIFORM: ClassWeights = ClassWeights { negative: 1.0, positive: 1.0 };

    pub fn for_label(&self, label: u8) -> f64 {
        if label == 1 {
            self.positive
        } else {
            self.negative
        }
    }

    pub fn swapped(self) -> Self {
        ClassWeights { negative: self.positive, positive: self.negative }
    }
}

/// Balanced weights `n / (2 n_c)` for each class `c`.
pub fn compute_class_weights(labels: &[u8]) -> Result<ClassWeights, ModelError> {
    check_labels(labels)?;
    let n = labels.len() as f64;
    let n_pos = labels.iter().filter(|&&l| l == 1).count() as f64;
    let n_neg = n - n_pos;
    if n_pos == 0.0 || n_neg == 0.0 {
        return Err(ModelError::SingleClass);
    }
    Ok(ClassWeights { negative: n / (2.0 * n_neg), positive: n / (2.0 * n_pos) })
}

fn check_labels(labels: &[u8]) -> Result<(), ModelError> {
    match labels.iter().position(|&l| l > 1) {
        Some(index) => Err(ModelError::InvalidLabel { index, label: labels[index] }),
        None => Ok(()),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainParams {
    /// Inverse regularization strength.
    pub c: f64,
    /// Relative tolerance on the gradient infinity-norm.
    pub tol: f64,
    /// Upper bound on Newton iterations.
    pub max_iter: usize,
    /// Recorded for provenance; the solver is deterministic and never draws from it.
    pub seed: u64,
}

impl Default for TrainParams {
    fn default() -> Self {
        TrainParams { c: 1.0, tol: 1e-4, max_iter: 2000, seed: 42 }
    }
}

/// Convergence record of one training run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingReport {
    pub iterations: usize,
    pub converged: bool,
    pub initial_grad_norm: f64,
    pub final_grad_norm: f64,
    /// Objective value before the first and after every iteration.
    pub objective_trace: Vec<f64>,
}

impl TrainingReport {
    /// Either the gradient criterion was met or the iteration budget ran out.
    pub fn satisfies_stopping_rule(&self, params: &TrainParams) -> bool {
        let met = self.final_grad_norm <= params.tol * self.initial_grad_norm;
        (self.converged && met) || (!self.converged && self.iterations == params.max_iter)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub class_weights: ClassWeights,
    pub params: TrainParams,
    pub report: TrainingReport,
}

impl TrainedModel {
    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    /// Raw margin `w·x + b`.
    pub fn decision_function(&self, x: &SparseVector) -> f64 {
        x.dot_dense(&self.weights) + self.bias
    }

    pub fn predict_proba(&self, x: &SparseVector) -> f64 {
        sigmoid(self.decision_function(x))
    }
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + libm::exp(-z))
    } else {
        let e = libm::exp(z);
        e / (1.0 + e)
    }
}

/// `ln(1 + exp(-m))` without overflow.
fn log_loss(margin: f64) -> f64 {
    if margin >= 0.0 {
        libm::log1p(libm::exp(-margin))
    } else {
        -margin + libm::log1p(libm::exp(margin))
    }
}

/// The training objective over a fixed sample set.
///
/// Parameters are packed as `[w_0, ..., w_{d-1}, b]`.
#[derive(Debug, Clone, Copy)]
pub struct LogisticObjective<'a> {
    rows: &'a [SparseVector],
    labels: &'a [u8],
    c: f64,
    class_weights: ClassWeights,
    dim: usize,
}

impl<'a> LogisticObjective<'a> {
    pub fn new(
        rows: &'a [SparseVector],
        labels: &'a [u8],
        c: f64,
        class_weights: ClassWeights,
    ) -> Result<Self, ModelError> {
        if rows.len() != labels.len() {
            return Err(ModelError::LengthMismatch { features: rows.len(), labels: labels.len() });
        }
        check_labels(labels)?;
        let dim = rows.first().map_or(0, SparseVector::dim);
        for (index, row) in rows.iter().enumerate() {
            if row.dim() != dim {
                return Err(ModelError::DimensionMismatch { index, expected: dim, found: row.dim() });
            }
            if !row.is_finite() {
                return Err(ModelError::NonFiniteFeature { index });
            }
        }
        if !(c.is_finite() && c > 0.0) {
            return Err(ModelError::InvalidParameter("C must be finite and positive"));
        }
        Ok(Self { rows, labels, c, class_weights, dim })
    }

    /// Number of packed parameters (feature dimension + 1).
    pub fn n_params(&self) -> usize {
        self.dim + 1
    }

    fn sign(&self, i: usize) -> f64 {
        if self.labels[i] == 1 {
            1.0
        } else {
            -1.0
        }
    }

    fn sample_weight(&self, i: usize) -> f64 {
        self.c * self.class_weights.for_label(self.labels[i])
    }

    fn margins(&self, params: &[f64]) -> Vec<f64> {
        let bias = params[self.dim];
        self.rows.iter().map(|x| x.dot_dense(&params[..self.dim]) + bias).collect()
    }

    fn value_at(&self, params: &[f64], margins: &[f64]) -> f64 {
        let reg = 0.5 * params.iter().map(|p| p * p).sum::<f64>();
        let loss: f64 = margins
            .iter()
            .enumerate()
            .map(|(i, &z)| self.sample_weight(i) * log_loss(self.sign(i) * z))
            .sum();
        reg + loss
    }

    pub fn value(&self, params: &[f64]) -> f64 {
        self.value_at(params, &self.margins(params))
    }

    fn gradient_at(&self, params: &[f64], margins: &[f64]) -> Vec<f64> {
        let mut grad = params.to_vec();
        for (i, (x, &z)) in self.rows.iter().zip(margins).enumerate() {
            let t = self.sign(i);
            let coef = self.sample_weight(i) * (sigmoid(t * z) - 1.0) * t;
            if coef == 0.0 {
                continue;
            }
            for &(j, v) in x.entries() {
                grad[j] += coef * v;
            }
            grad[self.dim] += coef;
        }
        grad
    }

    pub fn gradient(&self, params: &[f64]) -> Vec<f64> {
        self.gradient_at(params, &self.margins(params))
    }

    /// Diagonal curvature terms `C c_i σ(z_i)(1 − σ(z_i))`.
    fn curvature(&self, margins: &[f64]) -> Vec<f64> {
        margins
            .iter()
            .enumerate()
            .map(|(i, &z)| {
                let s = sigmoid(z);
                self.sample_weight(i) * s * (1.0 - s)
            })
            .collect()
    }

    fn hessian_vec(&self, curvature: &[f64], v: &[f64], out: &mut [f64]) {
        out.copy_from_slice(v);
        let bias_v = v[self.dim];
        for (x, &d) in self.rows.iter().zip(curvature) {
            if d == 0.0 {
                continue;
            }
            let xv = x.dot_dense(&v[..self.dim]) + bias_v;
            let scaled = d * xv;
            for &(j, val) in x.entries() {
                out[j] += scaled * val;
            }
            out[self.dim] += scaled;
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(libm::fabs(*x)))
}

/// Truncated conjugate gradient for `H s = -g`.
fn newton_direction(obj: &LogisticObjective<'_>, curvature: &[f64], grad: &[f64]) -> Vec<f64> {
    const MAX_CG: usize = 250;
    let n = grad.len();
    let mut step = vec![0.0; n];
    let mut residual: Vec<f64> = grad.iter().map(|g| -g).collect();
    let mut dir = residual.clone();
    let mut hd = vec![0.0; n];
    let mut rr = dot(&residual, &residual);
    let stop = 0.1 * libm::sqrt(rr);
    for _ in 0..MAX_CG {
        if libm::sqrt(rr) <= stop {
            break;
        }
        obj.hessian_vec(curvature, &dir, &mut hd);
        let alpha = rr / dot(&dir, &hd);
        for k in 0..n {
            step[k] += alpha * dir[k];
            residual[k] -= alpha * hd[k];
        }
        let rr_next = dot(&residual, &residual);
        let beta = rr_next / rr;
        rr = rr_next;
        for k in 0..n {
            dir[k] = residual[k] + beta * dir[k];
        }
    }
    step
}

/// Fits the model; stops once `‖∇J‖∞ ≤ tol · ‖∇J(0)‖∞` or after `max_iter`
/// Newton iterations.
pub fn train_logreg(
    rows: &[SparseVector],
    labels: &[u8],
    class_weights: ClassWeights,
    params: TrainParams,
) -> Result<TrainedModel, ModelError> {
    let obj = LogisticObjective::new(rows, labels, params.c, class_weights)?;
    if !labels.contains(&0) || !labels.contains(&1) {
        return Err(ModelError::SingleClass);
    }
    if !(params.tol.is_finite() && params.tol >= 0.0) {
        return Err(ModelError::InvalidParameter("tol must be finite and non-negative"));
    }

    let n = obj.n_params();
    let mut w = vec![0.0; n];
    let mut margins = obj.margins(&w);
    let mut f = obj.value_at(&w, &margins);
    let mut grad = obj.gradient_at(&w, &margins);
    let initial = inf_norm(&grad);
    let mut trace = vec![f];
    let mut iterations = 0;
    let mut converged = inf_norm(&grad) <= params.tol * initial;

    while !converged && iterations < params.max_iter {
        let curvature = obj.curvature(&margins);
        let step = newton_direction(&obj, &curvature, &grad);
        let slope = dot(&grad, &step);
        let step_margins = obj.margins_of_direction(&step);

        let mut alpha = 1.0;
        let mut accepted = None;
        for _ in 0..40 {
            let cand: Vec<f64> = w.iter().zip(&step).map(|(a, s)| a + alpha * s).collect();
            let cand_margins: Vec<f64> =
                margins.iter().zip(&step_margins).map(|(m, s)| m + alpha * s).collect();
            let value = obj.value_at(&cand, &cand_margins);
            if !value.is_finite() {
                return Err(ModelError::Diverged { iteration: iterations });
            }
            if value <= f + 1e-4 * alpha * slope {
                accepted = Some((cand, cand_margins, value));
                break;
            }
            alpha *= 0.5;
        }
        iterations += 1;
        let Some((cand, cand_margins, value)) = accepted else {
            // No decrease is representable any more; the iterate is as good as
            // floating point allows.
            trace.push(f);
            break;
        };
        w = cand;
        margins = cand_margins;
        f = value;
        grad = obj.gradient_at(&w, &margins);
        trace.push(f);
        converged = inf_norm(&grad) <= params.tol * initial;
    }

    if w.iter().any(|v| !v.is_finite()) {
        return Err(ModelError::Diverged { iteration: iterations });
    }
    let bias = w.pop().expect("bias slot");
    Ok(TrainedModel {
        weights: w,
        bias,
        class_weights,
        params,
        report: TrainingReport {
            iterations,
            converged,
            initial_grad_norm: initial,
            final_grad_norm: inf_norm(&grad),
            objective_trace: trace,
        },
    })
}

impl LogisticObjective<'_> {
    /// `X̃ s` for the packed direction `s`, used to update margins along a line.
    fn margins_of_direction(&self, step: &[f64]) -> Vec<f64> {
        let bias = step[self.dim];
        self.rows.iter().map(|x| x.dot_dense(&step[..self.dim]) + bias).collect()
    }
}
