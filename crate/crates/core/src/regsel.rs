//! Choice of the Tikhonov regularization parameter γ for the functional
//!
//! ```text
//! J_γ(ω) = ½‖Aω − t‖² + (γ/2)‖ω − ω₀‖²
//! ```
//!
//! Its minimizer solves `(AᵀA + γI)ω = Aᵀt + γω₀`. At that minimizer the
//! value function splits as `F(γ) = φ̄(γ) + γψ̄(γ)` with
//! `φ̄ = ½‖Aω_γ − t‖²` and `ψ̄ = ½‖ω_γ − ω₀‖²`; `F′(γ) = ψ̄(γ)`.
//!
//! Three rules are provided: the a-priori power law `γ = Cδ^μ` (with the
//! decaying schedule `γ_k = γ₀/(k+1)^p`), Morozov's discrepancy principle
//! solved by bisection, and the balancing principle `φ̄ = Cγψ̄` solved by
//! fixed-point iteration.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{out_of_range, Error, Result};
use crate::features::DesignMatrix;
use crate::linalg::{self, norm2, DenseMatrix};

/// One evaluation of the value function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValuePoint {
    pub gamma: f64,
    /// `F(γ) = min_ω J_γ(ω)`
    pub value: f64,
    pub phi_bar: f64,
    pub psi_bar: f64,
}

impl ValuePoint {
    /// `‖Aω_γ − t‖`
    pub fn discrepancy(&self) -> f64 {
        (2.0 * self.phi_bar).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RegRule {
    APriori,
    Morozov,
    Balancing,
    Schedule,
}

/// Outcome of a selection rule.
///
/// `achieved` is the discrepancy `‖Aω_γ − t‖` for Morozov, the last step
/// `|γ_k − γ_{k−1}|` for balancing and 0 for the a-priori rule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegSelection {
    pub rule: RegRule,
    #[serde(rename = "gamma")]
    pub gamma_star: f64,
    pub iterates: Vec<f64>,
    pub achieved: f64,
}

/// `C·δ^μ` with δ ∈ (0, 1), μ ∈ (0, 2), C > 0. Both `γ(δ) → 0` and
/// `δ²/γ(δ) → 0` hold as δ → 0 for this range of μ.
pub fn apriori_gamma(delta: f64, c: f64, mu: f64) -> Result<f64> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(out_of_range("delta", delta, "must lie in (0, 1)"));
    }
    if !(c > 0.0 && c.is_finite()) {
        return Err(out_of_range("C", c, "must be > 0"));
    }
    if !(mu > 0.0 && mu < 2.0) {
        return Err(out_of_range("mu", mu, "must lie in (0, 2)"));
    }
    Ok(c * delta.powf(mu))
}

pub fn apriori_select(delta: f64, c: f64, mu: f64) -> Result<RegSelection> {
    let gamma = apriori_gamma(delta, c, mu)?;
    Ok(RegSelection {
        rule: RegRule::APriori,
        gamma_star: gamma,
        iterates: vec![gamma],
        achieved: 0.0,
    })
}

/// `γ₀ / (k+1)^p` with p ∈ (0, 1].
pub fn gamma_schedule(gamma0: f64, p: f64, k: u64) -> Result<f64> {
    if !(gamma0 > 0.0 && gamma0.is_finite()) {
        return Err(out_of_range("gamma0", gamma0, "must be > 0"));
    }
    if !(p > 0.0 && p <= 1.0) {
        return Err(out_of_range("p", p, "must lie in (0, 1]"));
    }
    Ok(gamma0 / ((k + 1) as f64).powf(p))
}

/// The decreasing sequence `γ_0, …, γ_k` of [`gamma_schedule`], ending at
/// the selected `γ_k`.
pub fn schedule_select(gamma0: f64, p: f64, k: u64) -> Result<RegSelection> {
    let iterates = (0..=k)
        .map(|i| gamma_schedule(gamma0, p, i))
        .collect::<Result<Vec<_>>>()?;
    Ok(RegSelection {
        rule: RegRule::Schedule,
        gamma_star: *iterates.last().expect("k + 1 >= 1 iterates"),
        iterates,
        achieved: 0.0,
    })
}

/// A fixed `(A, t, ω₀)` with the Gram matrix and `Aᵀt` precomputed, so that
/// many values of γ can be evaluated cheaply.
#[derive(Debug, Clone)]
pub struct TikhonovProblem<'a> {
    design: &'a DesignMatrix,
    t: &'a [f64],
    omega0: Vec<f64>,
    gram: DenseMatrix,
    atb: Vec<f64>,
}

impl<'a> TikhonovProblem<'a> {
    /// `omega0 = None` means the zero vector.
    pub fn new(design: &'a DesignMatrix, t: &'a [f64], omega0: Option<&[f64]>) -> Result<Self> {
        if t.len() != design.rows() {
            return Err(Error::DimensionMismatch {
                expected: design.rows(),
                found: t.len(),
            });
        }
        let m = design.cols();
        let omega0 = match omega0 {
            Some(w) if w.len() != m => {
                return Err(Error::DimensionMismatch {
                    expected: m,
                    found: w.len(),
                })
            }
            Some(w) => w.to_vec(),
            None => vec![0.0; m],
        };
        Ok(TikhonovProblem {
            design,
            t,
            omega0,
            gram: linalg::gram(&design.matrix),
            atb: design.matrix.tr_matvec(t)?,
        })
    }

    /// Minimizer `ω_γ` of `J_γ`.
    pub fn minimizer(&self, gamma: f64) -> Result<Vec<f64>> {
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::NonPositiveGamma(gamma));
        }
        let lhs = self.gram.add_diagonal(gamma);
        let rhs: Vec<f64> = self
            .atb
            .iter()
            .zip(&self.omega0)
            .map(|(b, w0)| b + gamma * w0)
            .collect();
        linalg::solve_spd(&lhs, &rhs)
    }

    pub fn evaluate(&self, gamma: f64) -> Result<ValuePoint> {
        let w = self.minimizer(gamma)?;
        let r: Vec<f64> = self
            .design
            .matrix
            .matvec(&w)?
            .iter()
            .zip(self.t)
            .map(|(y, t)| y - t)
            .collect();
        let dw: Vec<f64> = w.iter().zip(&self.omega0).map(|(a, b)| a - b).collect();
        let phi_bar = 0.5 * linalg::dot(&r, &r);
        let psi_bar = 0.5 * linalg::dot(&dw, &dw);
        Ok(ValuePoint {
            gamma,
            value: phi_bar + gamma * psi_bar,
            phi_bar,
            psi_bar,
        })
    }

    /// `‖Aω_γ − t‖`
    pub fn discrepancy(&self, gamma: f64) -> Result<f64> {
        Ok(self.evaluate(gamma)?.discrepancy())
    }

    pub fn target_norm(&self) -> f64 {
        norm2(self.t)
    }
}

pub fn value_function(design: &DesignMatrix, t: &[f64], omega0: Option<&[f64]>, gamma: f64) -> Result<ValuePoint> {
    TikhonovProblem::new(design, t, omega0)?.evaluate(gamma)
}

/// `n` log-spaced values from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

pub fn trace(problem: &TikhonovProblem<'_>, gammas: &[f64]) -> Result<Vec<ValuePoint>> {
    gammas.iter().map(|&g| problem.evaluate(g)).collect()
}

/// Writes `gamma,F,phi_bar,psi_bar` rows.
pub fn write_trace_csv<W: Write>(points: &[ValuePoint], mut w: W) -> std::io::Result<()> {
    writeln!(w, "gamma,F,phi_bar,psi_bar")?;
    for p in points {
        writeln!(w, "{},{},{},{}", p.gamma, p.value, p.phi_bar, p.psi_bar)?;
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MorozovParams {
    /// Noise level δ > 0, in the units of `‖Aω − t‖`.
    pub delta: f64,
    /// c_m ≥ 1; the target discrepancy is `c_m·δ`.
    pub c_m: f64,
    pub bracket: (f64, f64),
    /// Allowed absolute deviation of the achieved discrepancy.
    pub tol: f64,
}

impl MorozovParams {
    pub fn new(delta: f64) -> Self {
        MorozovParams {
            delta,
            c_m: 1.0,
            bracket: (1e-10, 1e10),
            tol: 1e-6,
        }
    }
}

const BISECTION_MAX_STEPS: usize = 200;
const BISECTION_REL_WIDTH: f64 = 1e-12;

/// Discrepancy principle `‖Aω_γ − t‖ = c_m·δ`, solved by bisection in log γ
/// on the monotone map `γ ↦ ‖Aω_γ − t‖`.
pub fn morozov_select(design: &DesignMatrix, t: &[f64], params: &MorozovParams) -> Result<RegSelection> {
    morozov_select_with(&TikhonovProblem::new(design, t, None)?, params)
}

pub fn morozov_select_with(problem: &TikhonovProblem<'_>, params: &MorozovParams) -> Result<RegSelection> {
    let MorozovParams {
        delta,
        c_m,
        bracket: (mut lo, mut hi),
        tol,
    } = *params;
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(out_of_range("delta", delta, "must be > 0"));
    }
    if !(c_m >= 1.0 && c_m.is_finite()) {
        return Err(out_of_range("c_m", c_m, "must be >= 1"));
    }
    if !(lo > 0.0 && hi > lo && hi.is_finite()) {
        return Err(out_of_range(
            "gamma_lo",
            lo,
            "bracket must satisfy 0 < gamma_lo < gamma_hi",
        ));
    }
    if !(tol > 0.0) {
        return Err(out_of_range("tol", tol, "must be > 0"));
    }
    let target = c_m * delta;
    let d_lo = problem.discrepancy(lo)?;
    let d_hi = problem.discrepancy(hi)?;
    if !(d_lo < target && target < d_hi) {
        return Err(Error::BracketInvalid {
            target,
            low: d_lo,
            high: d_hi,
        });
    }
    let mut iterates = Vec::new();
    let mut best = (f64::INFINITY, lo);
    for _ in 0..BISECTION_MAX_STEPS {
        let mid = (lo * hi).sqrt();
        let d = problem.discrepancy(mid)?;
        iterates.push(mid);
        if (d - target).abs() < best.0 {
            best = ((d - target).abs(), mid);
        }
        if d < target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi / lo - 1.0 <= BISECTION_REL_WIDTH {
            break;
        }
    }
    let gamma = best.1;
    let achieved = problem.discrepancy(gamma)?;
    if (achieved - target).abs() > tol {
        log::warn!("discrepancy {achieved} misses target {target} by more than {tol} at gamma = {gamma}");
    }
    Ok(RegSelection {
        rule: RegRule::Morozov,
        gamma_star: gamma,
        iterates,
        achieved,
    })
}

/// Balancing iterates beyond this are treated as divergent.
const DIVERGENCE_CAP: f64 = 1e100;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BalancingParams {
    pub gamma0: f64,
    /// Balancing constant; C = 1 is the zero-crossing rule.
    pub c: f64,
    pub theta: f64,
    pub max_iter: usize,
}

impl Default for BalancingParams {
    fn default() -> Self {
        BalancingParams {
            gamma0: 1.0,
            c: 1.0,
            theta: 1e-3,
            max_iter: 100,
        }
    }
}

/// Fixed-point iteration `γ_{k+1} = φ̄(γ_k) / (C·ψ̄(γ_k))` for the balancing
/// equation `φ̄(γ) = Cγψ̄(γ)`.
///
/// Stops once `|γ_{k+1} − γ_k| ≤ θγ_k` and returns `γ_{k+1}`, or returns the
/// last iterate after `max_iter` updates.
pub fn balancing_fixed_point(design: &DesignMatrix, t: &[f64], params: &BalancingParams) -> Result<RegSelection> {
    balancing_fixed_point_with(&TikhonovProblem::new(design, t, None)?, params)
}

pub fn balancing_fixed_point_with(problem: &TikhonovProblem<'_>, params: &BalancingParams) -> Result<RegSelection> {
    let BalancingParams {
        gamma0,
        c,
        theta,
        max_iter,
    } = *params;
    if !(gamma0 > 0.0 && gamma0.is_finite()) {
        return Err(Error::NonPositiveGamma(gamma0));
    }
    if !(c > 0.0 && c.is_finite()) {
        return Err(out_of_range("C", c, "must be > 0"));
    }
    if !(theta > 0.0 && theta < 1.0) {
        return Err(out_of_range("theta", theta, "must lie in (0, 1)"));
    }
    let mut gamma = gamma0;
    let mut iterates = vec![gamma];
    let mut step = f64::INFINITY;
    for _ in 0..max_iter {
        if gamma > DIVERGENCE_CAP {
            return Err(Error::DegenerateIterate {
                gamma,
                reason: "iterates diverge; the balancing equation has no root above gamma0",
            });
        }
        let p = problem.evaluate(gamma)?;
        if p.psi_bar == 0.0 {
            return Err(Error::DegenerateIterate {
                gamma,
                reason: "penalty term vanished (minimizer equals the first guess)",
            });
        }
        let next = p.phi_bar / (c * p.psi_bar);
        if !(next > 0.0 && next.is_finite()) {
            return Err(Error::DegenerateIterate {
                gamma,
                reason: "misfit vanished or iterate left (0, inf)",
            });
        }
        iterates.push(next);
        step = (next - gamma).abs();
        let done = step <= theta * gamma;
        gamma = next;
        if done {
            break;
        }
    }
    Ok(RegSelection {
        rule: RegRule::Balancing,
        gamma_star: gamma,
        iterates,
        achieved: step,
    })
}
