use anyhow::{bail, Result};
use clap::{Args, ValueEnum};
use linclass::regsel::{self, BalancingParams, MorozovParams, TikhonovProblem};
use linclass::RegSelection;

use crate::UsageError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RuleArg {
    /// Use --gamma as given
    Fixed,
    /// γ = C·δ^μ
    Apriori,
    /// Discrepancy principle ‖Aω − t‖ = c_m·δ
    Morozov,
    /// Fixed point of φ̄(γ) = C·γ·ψ̄(γ)
    Balancing,
    /// γ_k = γ0/(k+1)^p
    Schedule,
}

#[derive(Debug, Clone, Args)]
pub struct RegArgs {
    #[arg(long, value_enum, default_value = "fixed")]
    pub rule: RuleArg,
    /// Noise level δ
    #[arg(long)]
    pub delta: Option<f64>,
    /// Exponent of the a-priori rule
    #[arg(long, default_value_t = 1.0)]
    pub mu: f64,
    /// Constant of the a-priori and balancing rules
    #[arg(long = "C", default_value_t = 1.0)]
    pub c: f64,
    /// Discrepancy multiplier c_m ≥ 1
    #[arg(long, default_value_t = 1.0)]
    pub c_m: f64,
    /// Starting γ (balancing) or γ0 (schedule)
    #[arg(long, default_value_t = 1.0)]
    pub gamma0: f64,
    /// Schedule exponent
    #[arg(long, default_value_t = 1.0)]
    pub p: f64,
    /// Schedule index
    #[arg(long, default_value_t = 10)]
    pub k: u64,
    /// Lower end of the Morozov bracket
    #[arg(long, default_value_t = 1e-10)]
    pub gamma_lo: f64,
    /// Upper end of the Morozov bracket
    #[arg(long, default_value_t = 1e10)]
    pub gamma_hi: f64,
    /// Allowed discrepancy miss for Morozov
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    /// Iteration cap of the balancing fixed point
    #[arg(long, default_value_t = 100)]
    pub balance_max_iter: usize,
}

fn need_delta(reg: &RegArgs) -> Result<f64> {
    match reg.delta {
        Some(d) => Ok(d),
        None => bail!(UsageError(
            format!("--rule {:?} needs --delta", reg.rule).to_lowercase()
        )),
    }
}

fn need_problem<'p, 'a>(problem: Option<&'p TikhonovProblem<'a>>) -> Result<&'p TikhonovProblem<'a>> {
    match problem {
        Some(p) => Ok(p),
        None => bail!(UsageError("this rule needs --data or --field".into())),
    }
}

/// Runs the selected rule. `theta` is the balancing stabilization tolerance.
pub fn select(reg: &RegArgs, theta: f64, problem: Option<&TikhonovProblem<'_>>) -> Result<RegSelection> {
    let sel = match reg.rule {
        RuleArg::Fixed => bail!(UsageError("--rule fixed selects nothing; pass --gamma to train".into())),
        RuleArg::Apriori => regsel::apriori_select(need_delta(reg)?, reg.c, reg.mu)?,
        RuleArg::Schedule => regsel::schedule_select(reg.gamma0, reg.p, reg.k)?,
        RuleArg::Morozov => {
            let params = MorozovParams {
                delta: need_delta(reg)?,
                c_m: reg.c_m,
                bracket: (reg.gamma_lo, reg.gamma_hi),
                tol: reg.tol,
            };
            regsel::morozov_select_with(need_problem(problem)?, &params)?
        }
        RuleArg::Balancing => {
            let params = BalancingParams {
                gamma0: reg.gamma0,
                c: reg.c,
                theta,
                max_iter: reg.balance_max_iter,
            };
            regsel::balancing_fixed_point_with(need_problem(problem)?, &params)?
        }
    };
    Ok(sel)
}
