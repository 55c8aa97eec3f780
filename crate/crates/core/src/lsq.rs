//! Least-squares classification through the normal equations.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{BasisSpec, DesignMatrix};
use crate::linalg::{self, dot, norm2, DenseMatrix, PIVOT_EPS};

/// Decision level for least-squares models fitted to {0, 1} targets.
pub const DEFAULT_LS_THRESHOLD: f64 = 0.5;

/// How a decision value is compared with the threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecisionRule {
    /// Class 1 iff `ωᵀφ(x) >= threshold` (least-squares fits).
    #[default]
    AtLeast,
    /// Class 1 iff `ωᵀφ(x) > threshold` (perceptron and WINNOW).
    Above,
}

impl DecisionRule {
    fn is_at_least(&self) -> bool {
        *self == DecisionRule::AtLeast
    }

    pub fn decide(self, value: f64, threshold: f64) -> u8 {
        u8::from(match self {
            DecisionRule::AtLeast => value >= threshold,
            DecisionRule::Above => value > threshold,
        })
    }
}

/// Weights over a basis, bias first. Field order is the JSON layout; `rule`
/// is only written when it differs from the default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub basis: BasisSpec,
    pub weights: Vec<f64>,
    pub gamma: f64,
    pub threshold: f64,
    #[serde(default, skip_serializing_if = "DecisionRule::is_at_least")]
    pub rule: DecisionRule,
}

impl LinearModel {
    pub fn new(basis: BasisSpec, weights: Vec<f64>, gamma: f64, threshold: f64) -> Result<Self> {
        if weights.len() != basis.n_features() {
            return Err(Error::DimensionMismatch {
                expected: basis.n_features(),
                found: weights.len(),
            });
        }
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::NonFinite("model weights"));
        }
        Ok(LinearModel {
            basis,
            weights,
            gamma,
            threshold,
            rule: DecisionRule::AtLeast,
        })
    }

    pub fn with_rule(mut self, rule: DecisionRule) -> Self {
        self.rule = rule;
        self
    }

    /// `ωᵀφ(x)`
    pub fn predict(&self, raw_point: &[f64]) -> Result<f64> {
        predict(self, raw_point)
    }

    /// Classifies against the model's own threshold and rule.
    pub fn classify(&self, raw_point: &[f64]) -> Result<u8> {
        Ok(self.rule.decide(self.predict(raw_point)?, self.threshold))
    }

    /// Number of rows of `raw` whose classification differs from `labels`.
    pub fn count_misclassified(&self, raw: &DenseMatrix, labels: &[u8]) -> Result<usize> {
        if raw.rows() != labels.len() {
            return Err(Error::DimensionMismatch {
                expected: raw.rows(),
                found: labels.len(),
            });
        }
        let mut errors = 0;
        for (r, &c) in raw.row_iter().zip(labels) {
            if self.classify(r)? != c {
                errors += 1;
            }
        }
        Ok(errors)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitDiagnostics {
    /// ‖Aω − t‖₂
    pub residual_norm: f64,
    /// ‖ω‖₂
    pub weight_norm: f64,
    pub gamma: f64,
}

fn check_targets(design: &DesignMatrix, t: &[f64]) -> Result<()> {
    if t.len() != design.rows() {
        return Err(Error::DimensionMismatch {
            expected: design.rows(),
            found: t.len(),
        });
    }
    if t.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("targets"));
    }
    Ok(())
}

fn diagnostics(a: &DenseMatrix, t: &[f64], w: &[f64], gamma: f64) -> Result<FitDiagnostics> {
    let r: Vec<f64> = a.matvec(w)?.iter().zip(t).map(|(p, q)| p - q).collect();
    Ok(FitDiagnostics {
        residual_norm: norm2(&r),
        weight_norm: norm2(w),
        gamma,
    })
}

/// Solves `AᵀAω = Aᵀt` with a Cholesky factorization of the Gram matrix.
pub fn fit_ls(design: &DesignMatrix, t: &[f64]) -> Result<(LinearModel, FitDiagnostics)> {
    check_targets(design, t)?;
    let a = &design.matrix;
    if a.rows() < a.cols() {
        return Err(Error::RankDeficient);
    }
    let g = linalg::gram(a);
    let rhs = a.tr_matvec(t)?;
    let w = match linalg::solve_spd(&g, &rhs) {
        Err(Error::NotPositiveDefinite { .. }) => return Err(Error::RankDeficient),
        other => other?,
    };
    let diag = diagnostics(a, t, &w, 0.0)?;
    let model = LinearModel::new(design.basis, w, 0.0, DEFAULT_LS_THRESHOLD)?;
    Ok((model, diag))
}

/// Solves `(AᵀA + γI)ω = Aᵀt`.
pub fn fit_ridge(design: &DesignMatrix, t: &[f64], gamma: f64) -> Result<(LinearModel, FitDiagnostics)> {
    check_targets(design, t)?;
    if !(gamma > 0.0) || !gamma.is_finite() {
        return Err(Error::NonPositiveGamma(gamma));
    }
    let a = &design.matrix;
    let g = linalg::gram(a).add_diagonal(gamma);
    let w = linalg::solve_spd(&g, &a.tr_matvec(t)?)?;
    let diag = diagnostics(a, t, &w, gamma)?;
    let model = LinearModel::new(design.basis, w, gamma, DEFAULT_LS_THRESHOLD)?;
    Ok((model, diag))
}

/// Moore–Penrose pseudo-inverse `(AᵀA)⁻¹Aᵀ` of a full-column-rank matrix.
///
/// The Gram inverse comes from Gauss–Jordan elimination rather than the
/// Cholesky path used by [`fit_ls`], so the two fits are independent.
pub fn pseudo_inverse(a: &DenseMatrix) -> Result<DenseMatrix> {
    let g = linalg::gram(a);
    let inv = gauss_jordan_inverse(&g)?;
    inv.matmul(&a.transpose())
}

pub fn pseudo_inverse_fit(design: &DesignMatrix, t: &[f64]) -> Result<LinearModel> {
    check_targets(design, t)?;
    let pinv = pseudo_inverse(&design.matrix)?;
    let w = pinv.matvec(t)?;
    LinearModel::new(design.basis, w, 0.0, DEFAULT_LS_THRESHOLD)
}

fn gauss_jordan_inverse(m: &DenseMatrix) -> Result<DenseMatrix> {
    let n = m.rows();
    let tol = PIVOT_EPS * m.max_abs();
    let mut a: Vec<Vec<f64>> = (0..n).map(|i| m.row(i).to_vec()).collect();
    let mut inv: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    for c in 0..n {
        let p = (c..n)
            .max_by(|&x, &y| a[x][c].abs().total_cmp(&a[y][c].abs()))
            .ok_or(Error::RankDeficient)?;
        if !(a[p][c].abs() > tol) {
            return Err(Error::RankDeficient);
        }
        a.swap(c, p);
        inv.swap(c, p);
        let d = a[c][c];
        for k in 0..n {
            a[c][k] /= d;
            inv[c][k] /= d;
        }
        for r in 0..n {
            if r == c {
                continue;
            }
            let f = a[r][c];
            if f == 0.0 {
                continue;
            }
            for k in 0..n {
                a[r][k] -= f * a[c][k];
                inv[r][k] -= f * inv[c][k];
            }
        }
    }
    DenseMatrix::new(n, n, inv.into_iter().flatten().collect())
}

pub fn predict(model: &LinearModel, raw_point: &[f64]) -> Result<f64> {
    let phi = model.basis.expand(raw_point)?;
    Ok(dot(&model.weights, &phi))
}

/// 1 when `predict >= threshold`; ties go to class 1.
pub fn classify(model: &LinearModel, raw_point: &[f64], threshold: f64) -> Result<u8> {
    Ok(u8::from(predict(model, raw_point)? >= threshold))
}

/// Value and gradient of `½‖t − Aω‖² + (γ/2)‖ω‖²`.
///
/// The gradient is `−Aᵀ(t − Aω) + γω`.
pub fn loss_and_gradient(design: &DesignMatrix, t: &[f64], omega: &[f64], gamma: f64) -> Result<(f64, Vec<f64>)> {
    check_targets(design, t)?;
    let a = &design.matrix;
    let residual: Vec<f64> = t.iter().zip(a.matvec(omega)?).map(|(ti, yi)| ti - yi).collect();
    let loss = 0.5 * dot(&residual, &residual) + 0.5 * gamma * dot(omega, omega);
    let mut grad = a.tr_matvec(&residual)?;
    for (g, w) in grad.iter_mut().zip(omega) {
        *g = -*g + gamma * w;
    }
    Ok((loss, grad))
}
