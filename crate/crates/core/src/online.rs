//! Iterative trainers: full-batch gradient descent on the least-squares
//! functional, the regularized perceptron, and WINNOW. Also the decision
//! boundary of second-order (quadratic-lift) classifiers.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{out_of_range, Error, Result};
use crate::features::{BasisSpec, DesignMatrix};
use crate::linalg::{dot, norm2};
use crate::lsq::{self, DecisionRule, LinearModel, DEFAULT_LS_THRESHOLD};

/// Half-width of the interval small random initial weights are drawn from.
pub const INIT_SCALE: f64 = 0.05;
/// The gradient trainer gives up once ‖G‖ exceeds this multiple of its
/// smallest value seen so far.
pub const GRAD_GROWTH_LIMIT: f64 = 1e3;
/// Maximum number of history samples kept in a [`TrainReport`].
pub const HISTORY_CAP: usize = 100_000;

const DEGENERATE_EPS: f64 = 1e-12;

/// Sign of the regularization term in the update rules.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegSign {
    /// `ω ← ω − ηG`: steps downhill on the regularized functional, so the
    /// perceptron update decays weights by `−ηγω`.
    #[default]
    Descent,
    /// `ω ← ω + ηG` and `+ηγω`: the update formulas with their printed
    /// signs, which climb the regularized functional.
    #[serde(rename = "paper_literal")]
    Ascent,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub eta: f64,
    pub gamma: f64,
    pub theta: f64,
    pub max_iter: u64,
    pub seed: u64,
    pub reg_sign: RegSign,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            eta: 0.5,
            gamma: 0.0,
            theta: 1e-6,
            max_iter: 100_000,
            seed: 0,
            reg_sign: RegSign::Descent,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.eta > 0.0 && self.eta.is_finite()) {
            return Err(out_of_range("eta", self.eta, "must be > 0"));
        }
        if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
            return Err(out_of_range("gamma", self.gamma, "must be >= 0"));
        }
        if !(self.theta > 0.0 && self.theta < 1.0) {
            return Err(out_of_range("theta", self.theta, "must lie in (0, 1)"));
        }
        if self.max_iter < 1 {
            return Err(out_of_range("max_iter", 0.0, "must be >= 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    GradientSmall,
    AllCorrect,
    GradExploded,
    WeightsStabilized,
    MaxIter,
}

impl StopReason {
    pub fn is_converged(self) -> bool {
        matches!(
            self,
            StopReason::GradientSmall | StopReason::AllCorrect | StopReason::WeightsStabilized
        )
    }
}

/// Outcome of an iterative training run.
///
/// History entry `i` was recorded at iteration `i * history_stride`; the
/// stride doubles whenever the history would exceed [`HISTORY_CAP`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub converged: bool,
    pub iterations: u64,
    pub final_misclassified: usize,
    pub stop_reason: StopReason,
    pub loss_history: Vec<f64>,
    pub misclassified_history: Vec<usize>,
    pub history_stride: u64,
}

impl TrainReport {
    /// Writes `iteration,loss,misclassified_count` rows.
    pub fn write_history_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "iteration,loss,misclassified_count")?;
        for (i, (loss, mis)) in self.loss_history.iter().zip(&self.misclassified_history).enumerate() {
            writeln!(w, "{},{},{}", i as u64 * self.history_stride, loss, mis)?;
        }
        Ok(())
    }
}

#[derive(Debug)]
struct History {
    loss: Vec<f64>,
    misclassified: Vec<usize>,
    stride: u64,
}

impl History {
    fn new() -> Self {
        History {
            loss: Vec::new(),
            misclassified: Vec::new(),
            stride: 1,
        }
    }

    fn record(&mut self, iteration: u64, loss: f64, misclassified: usize) {
        if !iteration.is_multiple_of(self.stride) {
            return;
        }
        if self.loss.len() == HISTORY_CAP {
            let keep = |v: &mut Vec<f64>| *v = v.iter().copied().step_by(2).collect();
            keep(&mut self.loss);
            self.misclassified = self.misclassified.iter().copied().step_by(2).collect();
            self.stride *= 2;
            if !iteration.is_multiple_of(self.stride) {
                return;
            }
        }
        self.loss.push(loss);
        self.misclassified.push(misclassified);
    }

    fn into_report(self, stop: StopReason, iterations: u64, final_misclassified: usize) -> TrainReport {
        TrainReport {
            converged: stop.is_converged(),
            iterations,
            final_misclassified,
            stop_reason: stop,
            loss_history: self.loss,
            misclassified_history: self.misclassified,
            history_stride: self.stride,
        }
    }
}

/// `m` weights drawn uniformly from `[-0.05, 0.05]`, deterministic per seed.
pub fn init_weights(m: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..m).map(|_| rng.random_range(-INIT_SCALE..=INIT_SCALE)).collect()
}

/// 1 if `ωᵀx > 0`, else 0 (an exact zero is class 0).
pub fn predict_sign(omega: &[f64], features: &[f64]) -> Result<u8> {
    if omega.len() != features.len() {
        return Err(Error::DimensionMismatch {
            expected: omega.len(),
            found: features.len(),
        });
    }
    Ok(u8::from(dot(omega, features) > 0.0))
}

fn check_labels(design: &DesignMatrix, labels: &[u8]) -> Result<()> {
    if labels.len() != design.rows() {
        return Err(Error::DimensionMismatch {
            expected: design.rows(),
            found: labels.len(),
        });
    }
    if let Some((row, &v)) = labels.iter().enumerate().find(|(_, &v)| v > 1) {
        return Err(Error::InvalidLabel {
            row,
            value: f64::from(v),
        });
    }
    Ok(())
}

fn count_sign_errors(w: &[f64], design: &DesignMatrix, labels: &[u8], level: f64) -> usize {
    design
        .matrix
        .row_iter()
        .zip(labels)
        .filter(|(x, &c)| u8::from(dot(w, x) > level) != c)
        .count()
}

/// Online perceptron. Each pass visits the examples in dataset order and
/// updates every weight after every example:
///
/// `ω_i ← ω_i + η((c − h)x_i ∓ γω_i)`
///
/// with `−γ` in [`RegSign::Descent`] mode and `+γ` in
/// [`RegSign::Ascent`] mode. Training stops after the first pass in
/// which every example was classified correctly, or after `max_iter` passes.
/// Non-convergence is reported, never raised.
pub fn perceptron_train(design: &DesignMatrix, labels: &[u8], cfg: &TrainConfig) -> Result<(LinearModel, TrainReport)> {
    cfg.validate()?;
    check_labels(design, labels)?;
    let mut w = init_weights(design.cols(), cfg.seed);
    let decay = match cfg.reg_sign {
        RegSign::Descent => -cfg.gamma,
        RegSign::Ascent => cfg.gamma,
    };
    let mut history = History::new();
    let mut stop = StopReason::MaxIter;
    let mut passes = 0;
    while passes < cfg.max_iter {
        passes += 1;
        let mut errors = 0;
        for (x, &c) in design.matrix.row_iter().zip(labels) {
            let h = u8::from(dot(&w, x) > 0.0);
            let diff = f64::from(c) - f64::from(h);
            if diff != 0.0 {
                errors += 1;
            } else if decay == 0.0 {
                continue;
            }
            for (wi, xi) in w.iter_mut().zip(x) {
                *wi += cfg.eta * (diff * xi + decay * *wi);
            }
        }
        let loss = 0.5 * errors as f64 + 0.5 * cfg.gamma * dot(&w, &w);
        history.record(passes - 1, loss, errors);
        if w.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("perceptron weights"));
        }
        if errors == 0 {
            stop = StopReason::AllCorrect;
            break;
        }
    }
    let final_misclassified = count_sign_errors(&w, design, labels, 0.0);
    let model = LinearModel::new(design.basis, w, cfg.gamma, 0.0)?.with_rule(DecisionRule::Above);
    Ok((model, history.into_report(stop, passes, final_misclassified)))
}

/// Full-batch gradient iteration on `½‖t − Aω‖² + (γ/2)‖ω‖²` from small
/// random initial weights.
pub fn gradient_train(design: &DesignMatrix, t: &[f64], cfg: &TrainConfig) -> Result<(LinearModel, TrainReport)> {
    let w0 = init_weights(design.cols(), cfg.seed);
    gradient_train_from(design, t, cfg, w0)
}

/// Gradient iteration from explicit initial weights.
///
/// Stops when `‖G‖ ≤ θ`, when `‖G‖` grows past [`GRAD_GROWTH_LIMIT`] times
/// its running minimum, when `‖ω^k − ω^{k−1}‖ ≤ θ‖ω^k‖`, or after
/// `max_iter` updates.
pub fn gradient_train_from(
    design: &DesignMatrix,
    t: &[f64],
    cfg: &TrainConfig,
    initial: Vec<f64>,
) -> Result<(LinearModel, TrainReport)> {
    cfg.validate()?;
    if initial.len() != design.cols() {
        return Err(Error::DimensionMismatch {
            expected: design.cols(),
            found: initial.len(),
        });
    }
    let step = match cfg.reg_sign {
        RegSign::Descent => -cfg.eta,
        RegSign::Ascent => cfg.eta,
    };
    let misclassified = |w: &[f64]| -> Result<usize> {
        let y = design.matrix.matvec(w)?;
        Ok(y.iter()
            .zip(t)
            .filter(|(yi, ti)| (**yi >= DEFAULT_LS_THRESHOLD) != (**ti >= DEFAULT_LS_THRESHOLD))
            .count())
    };
    let mut w = initial;
    let mut history = History::new();
    let mut min_gnorm = f64::INFINITY;
    let mut k = 0;
    let stop = loop {
        let (loss, g) = lsq::loss_and_gradient(design, t, &w, cfg.gamma)?;
        let gnorm = norm2(&g);
        history.record(k, loss, misclassified(&w)?);
        if !gnorm.is_finite() || gnorm > GRAD_GROWTH_LIMIT * min_gnorm {
            break StopReason::GradExploded;
        }
        min_gnorm = min_gnorm.min(gnorm);
        if gnorm <= cfg.theta {
            break StopReason::GradientSmall;
        }
        if k >= cfg.max_iter {
            break StopReason::MaxIter;
        }
        let next: Vec<f64> = w.iter().zip(&g).map(|(wi, gi)| wi + step * gi).collect();
        let change = norm2(&w.iter().zip(&next).map(|(a, b)| a - b).collect::<Vec<_>>());
        w = next;
        k += 1;
        if change <= cfg.theta * norm2(&w) {
            break StopReason::WeightsStabilized;
        }
    };
    if w.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("gradient iterate"));
    }
    let final_misclassified = misclassified(&w)?;
    let model = LinearModel::new(design.basis, w, cfg.gamma, DEFAULT_LS_THRESHOLD)?;
    Ok((model, history.into_report(stop, k, final_misclassified)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WinnowInit {
    /// All weights start at 1.
    #[default]
    Ones,
    /// Small positive random weights in `(0, 0.05]`.
    SmallRandom,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WinnowParams {
    /// Promotion/demotion factor, `> 1`.
    pub alpha: f64,
    /// Decision level: `h = 1` iff `ωᵀx > threshold`. `None` uses the number
    /// of features.
    pub threshold: Option<f64>,
    pub init: WinnowInit,
}

impl Default for WinnowParams {
    fn default() -> Self {
        WinnowParams {
            alpha: 2.0,
            threshold: None,
            init: WinnowInit::Ones,
        }
    }
}

/// WINNOW: multiplicative updates `ω_i ← ω_i · α^((c − h)x_i)`.
///
/// Weights stay positive, so with non-negative features `ωᵀx` is never
/// negative; the decision compares against a positive threshold instead of
/// zero. Same pass/stop structure as [`perceptron_train`].
pub fn winnow_train(
    design: &DesignMatrix,
    labels: &[u8],
    params: &WinnowParams,
    cfg: &TrainConfig,
) -> Result<(LinearModel, TrainReport)> {
    cfg.validate()?;
    check_labels(design, labels)?;
    if !(params.alpha > 1.0 && params.alpha.is_finite()) {
        return Err(out_of_range("alpha", params.alpha, "must be > 1"));
    }
    for (row, x) in design.matrix.row_iter().enumerate() {
        if let Some((column, &value)) = x.iter().enumerate().find(|(_, &v)| v < 0.0) {
            return Err(Error::NegativeFeature { row, column, value });
        }
    }
    let m = design.cols();
    let level = params.threshold.unwrap_or(m as f64);
    let mut w = match params.init {
        WinnowInit::Ones => vec![1.0; m],
        WinnowInit::SmallRandom => {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            (0..m).map(|_| INIT_SCALE - rng.random_range(0.0..INIT_SCALE)).collect()
        }
    };
    let ln_alpha = params.alpha.ln();
    let mut history = History::new();
    let mut stop = StopReason::MaxIter;
    let mut passes = 0;
    while passes < cfg.max_iter {
        passes += 1;
        let mut errors = 0;
        for (x, &c) in design.matrix.row_iter().zip(labels) {
            let h = u8::from(dot(&w, x) > level);
            if h == c {
                continue;
            }
            errors += 1;
            let diff = f64::from(c) - f64::from(h);
            for (wi, xi) in w.iter_mut().zip(x) {
                if *xi != 0.0 {
                    *wi *= (diff * xi * ln_alpha).exp();
                }
            }
        }
        history.record(passes - 1, errors as f64, errors);
        if errors == 0 {
            stop = StopReason::AllCorrect;
            break;
        }
    }
    let final_misclassified = count_sign_errors(&w, design, labels, level);
    let model = LinearModel::new(design.basis, w, 0.0, level)?.with_rule(DecisionRule::Above);
    Ok((model, history.into_report(stop, passes, final_misclassified)))
}

/// `−Σ t_i ωᵀx_i` over the examples whose sign disagrees with `t_i ∈ {−1, +1}`.
pub fn misclassified_residual(omega: &[f64], design: &DesignMatrix, t_pm: &[f64]) -> Result<f64> {
    if omega.len() != design.cols() {
        return Err(Error::DimensionMismatch {
            expected: design.cols(),
            found: omega.len(),
        });
    }
    if t_pm.len() != design.rows() {
        return Err(Error::DimensionMismatch {
            expected: design.rows(),
            found: t_pm.len(),
        });
    }
    let mut sum = 0.0;
    for (row, (x, &ti)) in design.matrix.row_iter().zip(t_pm).enumerate() {
        if ti != 1.0 && ti != -1.0 {
            return Err(Error::InvalidLabel { row, value: ti });
        }
        let margin = ti * dot(omega, x);
        if margin < 0.0 {
            sum -= margin;
        }
    }
    Ok(sum)
}

/// Second-order decision function
/// `ω0 + ω1·x1 + ω2·x2 + ω3·x1² + ω4·x1·x2 + ω5·x2²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadraticBoundary {
    pub w: [f64; 6],
}

impl QuadraticBoundary {
    pub fn new(w: [f64; 6]) -> Self {
        QuadraticBoundary { w }
    }

    /// Boundary `ωᵀz = threshold` of a quad2d model.
    pub fn from_model(model: &LinearModel) -> Result<Self> {
        if model.basis != BasisSpec::QuadraticLift2D {
            return Err(Error::DimensionMismatch {
                expected: 6,
                found: model.weights.len(),
            });
        }
        let mut w = [0.0; 6];
        w.copy_from_slice(&model.weights);
        w[0] -= model.threshold;
        Ok(QuadraticBoundary { w })
    }

    pub fn evaluate(&self, x1: f64, x2: f64) -> f64 {
        let w = &self.w;
        w[0] + w[1] * x1 + w[2] * x2 + w[3] * x1 * x1 + w[4] * x1 * x2 + w[5] * x2 * x2
    }

    pub fn max_abs_weight(&self) -> f64 {
        self.w.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }
}

/// Solves the boundary equation for `x2` at a fixed `x1`.
///
/// Writing it as `a·x2² + b·x2 + c = 0` with `a = ω5`, `b = ω2 + ω4·x1`,
/// `c = ω0 + ω1·x1 + ω3·x1²`, returns zero, one or two roots in ascending
/// order. When `|a| < 1e-12` the equation is treated as linear.
pub fn boundary_roots(qb: &QuadraticBoundary, x1: f64) -> Vec<f64> {
    let w = &qb.w;
    let a = w[5];
    let b = w[2] + w[4] * x1;
    let c = w[0] + w[1] * x1 + w[3] * x1 * x1;
    if a.abs() < DEGENERATE_EPS {
        return if b.abs() >= DEGENERATE_EPS {
            vec![-c / b]
        } else {
            Vec::new()
        };
    }
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return Vec::new();
    }
    if disc == 0.0 {
        return vec![-b / (2.0 * a)];
    }
    // Cancellation-free form of (−b ± √D) / 2a.
    let q = -0.5 * (b + b.signum() * disc.sqrt());
    let (r1, r2) = (q / a, c / q);
    vec![r1.min(r2), r1.max(r2)]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::{linear2d_design, linear_design, quadratic_lift, DesignMatrix};
    use crate::linalg::{gram, DenseMatrix};
    use crate::testutil::{power_iteration, random_matrix};

    fn raw_design(rows: &[&[f64]]) -> DesignMatrix {
        let m = DenseMatrix::from_rows(rows).unwrap();
        let n = m.cols();
        DesignMatrix {
            matrix: m,
            basis: BasisSpec::Polynomial(n),
            raw_dim: 1,
        }
    }

    #[test]
    fn init_weights_is_seeded_and_bounded() {
        assert_eq!(init_weights(5, 42), init_weights(5, 42));
        assert_ne!(init_weights(5, 42), init_weights(5, 43));
        let w = init_weights(3, 7);
        assert_eq!(w.len(), 3);
        assert!(w.iter().all(|v| v.abs() <= INIT_SCALE));
    }

    #[test]
    fn predict_sign_cases() {
        assert_eq!(predict_sign(&[1.0, 0.0], &[1.0, 5.0]).unwrap(), 1);
        assert_eq!(predict_sign(&[-1.0, 0.0], &[1.0, 5.0]).unwrap(), 0);
        assert_eq!(predict_sign(&[1.0, -1.0], &[2.0, 2.0]).unwrap(), 0);
        assert!(predict_sign(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn config_validation() {
        let bad = [
            TrainConfig {
                eta: 0.0,
                ..Default::default()
            },
            TrainConfig {
                theta: 1.0,
                ..Default::default()
            },
            TrainConfig {
                theta: 0.0,
                ..Default::default()
            },
            TrainConfig {
                max_iter: 0,
                ..Default::default()
            },
            TrainConfig {
                gamma: -0.1,
                ..Default::default()
            },
        ];
        for cfg in bad {
            assert!(matches!(cfg.validate(), Err(Error::OutOfRange { .. })));
        }
    }

    #[test]
    fn perceptron_single_update() {
        // Zero weights (h = 0) and c = 1: ω ← ω + η·x.
        let mut w = vec![0.0; 3];
        let x = [1.0, 2.0, 3.0];
        let h = predict_sign(&w, &x).unwrap();
        assert_eq!(h, 0);
        for (wi, xi) in w.iter_mut().zip(&x) {
            *wi += 0.5 * (1.0 - f64::from(h)) * xi;
        }
        assert_eq!(w, vec![0.5, 1.0, 1.5]);

        // Same step through the trainer: one example, one pass to fix it.
        let d = raw_design(&[&[1.0, 2.0, 3.0]]);
        let cfg = TrainConfig {
            max_iter: 1,
            ..Default::default()
        };
        let (m, rep) = perceptron_train(&d, &[1], &cfg).unwrap();
        let w0 = init_weights(3, cfg.seed);
        let expected: Vec<f64> = if dot(&w0, &x) > 0.0 {
            w0.clone()
        } else {
            w0.iter().zip(&x).map(|(a, b)| a + 0.5 * b).collect()
        };
        assert_eq!(m.weights, expected);
        assert_eq!(rep.iterations, 1);
    }

    #[test]
    fn perceptron_correct_example_leaves_weights() {
        let d = raw_design(&[&[1.0, 1.0]]);
        let cfg = TrainConfig {
            seed: 3,
            ..Default::default()
        };
        let w0 = init_weights(2, 3);
        let label = predict_sign(&w0, &[1.0, 1.0]).unwrap();
        let (m, rep) = perceptron_train(&d, &[label], &cfg).unwrap();
        assert_eq!(m.weights, w0);
        assert_eq!(rep.stop_reason, StopReason::AllCorrect);
        assert!(rep.converged);
        assert_eq!(rep.iterations, 1);
    }

    #[test]
    fn perceptron_rejects_bad_labels() {
        let d = raw_design(&[&[1.0, 1.0]]);
        assert!(matches!(
            perceptron_train(&d, &[2], &TrainConfig::default()),
            Err(Error::InvalidLabel { row: 0, .. })
        ));
    }

    #[test]
    fn perceptron_xor_does_not_converge() {
        let d = linear2d_design(&[(0.0, 0.0), (1.0, 1.0), (0.0, 1.0), (1.0, 0.0)]).unwrap();
        let cfg = TrainConfig {
            max_iter: 500,
            ..Default::default()
        };
        let (_, rep) = perceptron_train(&d, &[0, 0, 1, 1], &cfg).unwrap();
        assert!(!rep.converged);
        assert_eq!(rep.stop_reason, StopReason::MaxIter);
        assert_eq!(rep.iterations, 500);
        assert!(rep.final_misclassified > 0);
    }

    #[test]
    fn perceptron_separates_shifted_points() {
        let pts: Vec<(f64, f64)> = (0..40)
            .map(|i| {
                let x = i as f64 / 4.0;
                (x, 1.2 - 0.5 * x + if i % 2 == 0 { 0.3 } else { -0.3 })
            })
            .collect();
        let labels: Vec<u8> = (0..40).map(|i| u8::from(i % 2 == 0)).collect();
        let d = linear2d_design(&pts).unwrap();
        let (m, rep) = perceptron_train(&d, &labels, &TrainConfig::default()).unwrap();
        assert!(rep.converged);
        assert_eq!(rep.final_misclassified, 0);
        assert_eq!(m.threshold, 0.0);
    }

    #[test]
    fn perceptron_regularized_modes_differ() {
        let pts = [(0.0, 1.0), (1.0, 3.0), (2.0, 0.5), (3.0, -1.0)];
        let d = linear2d_design(&pts).unwrap();
        let labels = [1, 1, 0, 0];
        let base = TrainConfig {
            gamma: 0.01,
            max_iter: 50,
            ..Default::default()
        };
        let (a, _) = perceptron_train(&d, &labels, &base).unwrap();
        let lit = TrainConfig {
            reg_sign: RegSign::Ascent,
            ..base
        };
        let (b, _) = perceptron_train(&d, &labels, &lit).unwrap();
        assert_ne!(a.weights, b.weights);
    }

    #[test]
    fn perceptron_is_deterministic() {
        let pts: Vec<(f64, f64)> = (0..30).map(|i| ((i * 7 % 11) as f64, (i * 5 % 13) as f64)).collect();
        let labels: Vec<u8> = pts.iter().map(|(x, y)| u8::from(x + y > 11.0)).collect();
        let d = linear2d_design(&pts).unwrap();
        let cfg = TrainConfig {
            seed: 9,
            max_iter: 2000,
            ..Default::default()
        };
        let (m1, r1) = perceptron_train(&d, &labels, &cfg).unwrap();
        let (m2, r2) = perceptron_train(&d, &labels, &cfg).unwrap();
        assert_eq!(r1, r2);
        let bits = |m: &LinearModel| m.weights.iter().map(|v| v.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&m1), bits(&m2));
    }

    #[test]
    fn quadratic_perceptron_separates_circle_from_ring() {
        let mut pts = Vec::new();
        let mut labels = Vec::new();
        for k in 0..36 {
            let a = k as f64 * std::f64::consts::PI / 18.0;
            let r = 0.3 + 0.6 * (k % 3) as f64 / 3.0;
            pts.push((r * a.cos(), r * a.sin()));
            labels.push(1);
            pts.push((3.0 * a.cos(), 3.0 * a.sin()));
            labels.push(0);
        }
        let cfg = TrainConfig {
            max_iter: 20_000,
            ..Default::default()
        };
        let (_, lin) = perceptron_train(&linear2d_design(&pts).unwrap(), &labels, &cfg).unwrap();
        assert!(!lin.converged);
        let (m, quad) = perceptron_train(&quadratic_lift(&pts).unwrap(), &labels, &cfg).unwrap();
        assert!(quad.converged);
        assert_eq!(quad.final_misclassified, 0);
        assert_eq!(m.weights.len(), 6);
    }

    #[test]
    fn gradient_starts_at_stationary_point() {
        let d = linear2d_design(&[(0.0, 1.0), (1.0, 0.5), (2.0, 3.0), (-1.0, 2.0)]).unwrap();
        let t = [1.0, 0.0, 1.0, 0.0];
        let (ls, _) = lsq::fit_ls(&d, &t).unwrap();
        let cfg = TrainConfig {
            theta: 1e-6,
            ..Default::default()
        };
        let (m, rep) = gradient_train_from(&d, &t, &cfg, ls.weights.clone()).unwrap();
        assert_eq!(rep.stop_reason, StopReason::GradientSmall);
        assert_eq!(rep.iterations, 0);
        assert_eq!(m.weights, ls.weights);
    }

    #[test]
    fn gradient_scalar_contraction() {
        let d = raw_design(&[&[1.0]]);
        let cfg = TrainConfig {
            theta: 1e-10,
            ..Default::default()
        };
        let (m, rep) = gradient_train_from(&d, &[1.0], &cfg, vec![0.0]).unwrap();
        assert!(rep.converged);
        assert!((m.weights[0] - 1.0).abs() < 1e-9);
        // ω_k = 1 − 2^{−k}: first losses are ½(2^{−k})².
        for (k, loss) in rep.loss_history.iter().take(5).enumerate() {
            assert!((loss - 0.5 * 0.25f64.powi(k as i32)).abs() < 1e-15);
        }
    }

    #[test]
    fn gradient_descent_loss_is_non_increasing() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let a = random_matrix(&mut rng, 25, 4);
        let t: Vec<f64> = (0..25).map(|_| f64::from(rng.random_range(0..2u8))).collect();
        let lmax = power_iteration(&gram(&a), 500);
        let d = DesignMatrix {
            matrix: a,
            basis: BasisSpec::Polynomial(4),
            raw_dim: 1,
        };
        let cfg = TrainConfig {
            eta: 0.9 / lmax,
            theta: 1e-9,
            max_iter: 5000,
            ..Default::default()
        };
        let (_, rep) = gradient_train(&d, &t, &cfg).unwrap();
        assert!(rep.loss_history.len() > 10);
        for pair in rep.loss_history.windows(2) {
            assert!(pair[1] <= pair[0] + 1e-12);
        }
    }

    #[test]
    fn gradient_ascent_sign_blows_up() {
        let d = raw_design(&[&[1.0], &[2.0]]);
        let cfg = TrainConfig {
            reg_sign: RegSign::Ascent,
            ..Default::default()
        };
        let (_, rep) = gradient_train_from(&d, &[1.0, 0.0], &cfg, vec![0.5]).unwrap();
        assert_eq!(rep.stop_reason, StopReason::GradExploded);
        assert!(!rep.converged);
    }

    #[test]
    fn winnow_single_update() {
        // ω = (1, 1), x = (1, 0), c = 1, h = 0 → ω = (2, 1).
        let d = raw_design(&[&[1.0, 0.0]]);
        let params = WinnowParams {
            threshold: Some(1.0),
            ..Default::default()
        };
        let cfg = TrainConfig {
            max_iter: 1,
            ..Default::default()
        };
        let (m, _) = winnow_train(&d, &[1], &params, &cfg).unwrap();
        assert_eq!(m.weights, vec![2.0, 1.0]);
        // c = h leaves the weights alone.
        let (m, rep) = winnow_train(&d, &[0], &params, &cfg).unwrap();
        assert_eq!(m.weights, vec![1.0, 1.0]);
        assert!(rep.converged);
    }

    #[test]
    fn winnow_learns_single_attribute() {
        let rows: Vec<Vec<f64>> = (0..16u32)
            .map(|b| (0..4).map(|i| f64::from((b >> i) & 1)).collect())
            .collect();
        let labels: Vec<u8> = rows.iter().map(|r| r[0] as u8).collect();
        let d = linear_design(&DenseMatrix::from_rows(&rows).unwrap()).unwrap();
        let (m, rep) = winnow_train(&d, &labels, &WinnowParams::default(), &TrainConfig::default()).unwrap();
        assert!(rep.converged);
        assert_eq!(rep.final_misclassified, 0);
        assert!(m.weights.iter().all(|&w| w > 0.0));
        for (r, &c) in rows.iter().zip(&labels) {
            assert_eq!(m.classify(r).unwrap(), c);
        }
    }

    #[test]
    fn winnow_rejects_negative_features_and_bad_alpha() {
        let d = raw_design(&[&[1.0, -0.5]]);
        assert!(matches!(
            winnow_train(&d, &[1], &WinnowParams::default(), &TrainConfig::default()),
            Err(Error::NegativeFeature { row: 0, column: 1, .. })
        ));
        let ok = raw_design(&[&[1.0, 0.5]]);
        let params = WinnowParams {
            alpha: 1.0,
            ..Default::default()
        };
        assert!(matches!(
            winnow_train(&ok, &[1], &params, &TrainConfig::default()),
            Err(Error::OutOfRange { .. })
        ));
    }

    #[test]
    fn winnow_random_init_is_positive() {
        let d = raw_design(&[&[1.0, 0.0, 1.0], &[0.0, 1.0, 1.0]]);
        let params = WinnowParams {
            init: WinnowInit::SmallRandom,
            threshold: Some(0.5),
            ..Default::default()
        };
        let (m, _) = winnow_train(
            &d,
            &[1, 0],
            &params,
            &TrainConfig {
                max_iter: 3,
                ..Default::default()
            },
        )
        .unwrap();
        assert!(m.weights.iter().all(|&w| w > 0.0));
    }

    #[test]
    fn misclassified_residual_cases() {
        let d = raw_design(&[&[1.0]]);
        assert_eq!(misclassified_residual(&[1.0], &d, &[-1.0]).unwrap(), 1.0);
        assert_eq!(misclassified_residual(&[1.0], &d, &[1.0]).unwrap(), 0.0);
        assert!(matches!(
            misclassified_residual(&[1.0], &d, &[0.0]),
            Err(Error::InvalidLabel { .. })
        ));

        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let a = random_matrix(&mut rng, 40, 3);
        let t: Vec<f64> = (0..40).map(|_| if rng.random_bool(0.5) { 1.0 } else { -1.0 }).collect();
        let w = [0.3, -0.7, 0.2];
        let d = DesignMatrix {
            matrix: a.clone(),
            basis: BasisSpec::Polynomial(3),
            raw_dim: 1,
        };
        let mut brute = 0.0;
        for i in 0..40 {
            let y: f64 = (0..3).map(|j| w[j] * a.get(i, j)).sum();
            if y.signum() != t[i] && y != 0.0 {
                brute += -t[i] * y;
            }
        }
        let got = misclassified_residual(&w, &d, &t).unwrap();
        assert!((got - brute).abs() < 1e-12);
        assert!(got >= 0.0);
    }

    #[test]
    fn boundary_root_examples() {
        let circle = QuadraticBoundary::new([-4.0, 0.0, 0.0, 0.0, 0.0, 1.0]);
        assert_eq!(boundary_roots(&circle, 0.0), vec![-2.0, 2.0]);
        let empty = QuadraticBoundary::new([1.0, 0.0, 0.0, 0.0, 0.0, 1.0]);
        assert!(boundary_roots(&empty, 0.0).is_empty());
        let line = QuadraticBoundary::new([-4.0, 0.0, 2.0, 0.0, 0.0, 0.0]);
        for x1 in [-3.0, 0.0, 17.5] {
            assert_eq!(boundary_roots(&line, x1), vec![2.0]);
        }
        let flat = QuadraticBoundary::new([1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        assert!(boundary_roots(&flat, 1.0).is_empty());
        let double = QuadraticBoundary::new([1.0, 0.0, -2.0, 0.0, 0.0, 1.0]);
        assert_eq!(boundary_roots(&double, 0.0), vec![1.0]);
    }

    #[test]
    fn boundary_roots_lie_on_the_curve() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let mut checked = 0;
        for _ in 0..500 {
            let w: [f64; 6] = std::array::from_fn(|_| rng.random_range(-3.0..3.0));
            let qb = QuadraticBoundary::new(w);
            let x1 = rng.random_range(-5.0..5.0);
            for x2 in boundary_roots(&qb, x1) {
                let scale = 1e-8 * (1.0 + qb.max_abs_weight()) * (1.0 + x1 * x1 + x2 * x2);
                assert!(qb.evaluate(x1, x2).abs() <= scale);
                checked += 1;
            }
        }
        assert!(checked > 100);
    }

    #[test]
    fn history_decimates_past_cap() {
        let mut h = History::new();
        for i in 0..(HISTORY_CAP as u64 * 3) {
            h.record(i, i as f64, 0);
        }
        assert!(h.loss.len() <= HISTORY_CAP);
        assert_eq!(h.stride, 4);
        for (k, v) in h.loss.iter().enumerate() {
            assert_eq!(*v as u64, k as u64 * h.stride);
        }
    }

    #[test]
    fn history_csv_layout() {
        let rep = TrainReport {
            converged: true,
            iterations: 2,
            final_misclassified: 0,
            stop_reason: StopReason::AllCorrect,
            loss_history: vec![1.5, 0.0],
            misclassified_history: vec![3, 0],
            history_stride: 1,
        };
        let mut out = Vec::new();
        rep.write_history_csv(&mut out).unwrap();
        assert_eq!(
            String::from_utf8(out).unwrap(),
            "iteration,loss,misclassified_count\n0,1.5,3\n1,0,0\n"
        );
        let json = serde_json::to_string(&rep).unwrap();
        assert!(json.contains(r#""stop_reason":"all_correct""#));
    }
}
