use anyhow::{bail, Result};
use clap::{Args, ValueEnum};
use linclass::lsq::{self, FitDiagnostics};
use linclass::online::{self, RegSign, StopReason, TrainConfig, TrainReport, WinnowInit, WinnowParams};
use linclass::regsel::TikhonovProblem;
use linclass::{BasisSpec, Dataset, LinearModel, RegSelection};
use serde::Serialize;

use crate::data::default_basis;
use crate::select::{self, RegArgs, RuleArg};
use crate::UsageError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algo {
    /// Least squares through the normal equations
    Ls,
    /// Ridge least squares with a fixed or selected γ
    LsReg,
    /// Full-batch gradient iteration
    Gradient,
    /// Online perceptron on the chosen basis
    Perceptron,
    /// Perceptron on the quadratic lift of two raw coordinates
    Perceptron2,
    /// Multiplicative-update WINNOW
    Winnow,
}

impl Algo {
    pub fn name(self) -> &'static str {
        match self {
            Algo::Ls => "ls",
            Algo::LsReg => "ls-reg",
            Algo::Gradient => "gradient",
            Algo::Perceptron => "perceptron",
            Algo::Perceptron2 => "perceptron2",
            Algo::Winnow => "winnow",
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum RegSignArg {
    Descent,
    #[value(name = "paper-literal")]
    Ascent,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum WinnowInitArg {
    Ones,
    SmallRandom,
}

#[derive(Debug, Clone, Args)]
pub struct TrainArgs {
    /// Basis: linear2d, quad2d, linear:<n> or poly:<d>
    #[arg(long, value_parser = parse_basis)]
    pub basis: Option<BasisSpec>,
    /// Learning rate
    #[arg(long, default_value_t = 0.5)]
    pub eta: f64,
    /// Regularization weight (fixed γ for ls-reg)
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long, value_enum, default_value = "descent")]
    pub reg_sign: RegSignArg,
    /// Stopping tolerance of the gradient iteration
    #[arg(long, default_value_t = 1e-6)]
    pub theta: f64,
    /// Iteration cap (passes over the data for the online trainers)
    #[arg(long, default_value_t = 100_000)]
    pub max_iter: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Decision level of least-squares models
    #[arg(long, default_value_t = lsq::DEFAULT_LS_THRESHOLD)]
    pub threshold: f64,
    /// WINNOW promotion factor
    #[arg(long, default_value_t = 2.0)]
    pub alpha: f64,
    /// WINNOW decision level (default: number of features)
    #[arg(long)]
    pub winnow_threshold: Option<f64>,
    #[arg(long, value_enum, default_value = "ones")]
    pub winnow_init: WinnowInitArg,
    /// Stabilization tolerance when ls-reg uses the balancing rule
    #[arg(long, default_value_t = 1e-3)]
    pub balance_theta: f64,
}

pub fn parse_basis(s: &str) -> std::result::Result<BasisSpec, String> {
    s.parse().map_err(|e: linclass::Error| e.to_string())
}

impl TrainArgs {
    pub fn config(&self) -> TrainConfig {
        TrainConfig {
            eta: self.eta,
            gamma: self.gamma.unwrap_or(0.0),
            theta: self.theta,
            max_iter: self.max_iter,
            seed: self.seed,
            reg_sign: match self.reg_sign {
                RegSignArg::Descent => RegSign::Descent,
                RegSignArg::Ascent => RegSign::Ascent,
            },
        }
    }
}

/// Contents of `report.json`.
#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub algo: Algo,
    pub basis: BasisSpec,
    pub converged: bool,
    pub iterations: u64,
    pub misclassified: usize,
    /// `solved` for closed-form fits, otherwise the trainer's stop reason.
    pub stop_reason: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fit: Option<FitDiagnostics>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub selection: Option<RegSelection>,
}

pub struct Outcome {
    pub model: LinearModel,
    pub report: RunReport,
    pub training: Option<TrainReport>,
}

fn stop_name(stop: StopReason) -> String {
    match serde_json::to_value(stop) {
        Ok(serde_json::Value::String(s)) => s,
        _ => format!("{stop:?}"),
    }
}

pub fn basis_for(algo: Algo, requested: Option<BasisSpec>, ds: &Dataset) -> BasisSpec {
    if algo == Algo::Perceptron2 {
        if let Some(b) = requested.filter(|b| *b != BasisSpec::QuadraticLift2D) {
            log::warn!("perceptron2 always uses the quad2d basis; ignoring --basis {b}");
        }
        return BasisSpec::QuadraticLift2D;
    }
    requested.unwrap_or_else(|| default_basis(ds))
}

pub fn run(algo: Algo, args: &TrainArgs, reg: &RegArgs, ds: &Dataset) -> Result<Outcome> {
    let basis = basis_for(algo, args.basis, ds);
    let design = ds.design(basis)?;
    let t = ds.targets_f64();

    let closed_form = |model: LinearModel, fit: FitDiagnostics, selection| -> Result<Outcome> {
        let model = LinearModel {
            threshold: args.threshold,
            ..model
        };
        let misclassified = model.count_misclassified(&ds.features, &ds.targets)?;
        Ok(Outcome {
            report: RunReport {
                algo,
                basis,
                converged: true,
                iterations: 0,
                misclassified,
                stop_reason: "solved".into(),
                fit: Some(fit),
                selection,
            },
            model,
            training: None,
        })
    };

    let (model, training) = match algo {
        Algo::Ls => {
            let (model, fit) = lsq::fit_ls(&design, &t)?;
            return closed_form(model, fit, None);
        }
        Algo::LsReg => {
            let (gamma, selection) = match reg.rule {
                RuleArg::Fixed => match args.gamma {
                    Some(g) => (g, None),
                    None => bail!(UsageError("ls-reg needs --gamma or a selection --rule".into())),
                },
                _ => {
                    let problem = TikhonovProblem::new(&design, &t, None)?;
                    let sel = select::select(reg, args.balance_theta, Some(&problem))?;
                    (sel.gamma_star, Some(sel))
                }
            };
            let (model, fit) = lsq::fit_ridge(&design, &t, gamma)?;
            return closed_form(model, fit, selection);
        }
        Algo::Gradient => online::gradient_train(&design, &t, &args.config())?,
        Algo::Perceptron | Algo::Perceptron2 => online::perceptron_train(&design, &ds.targets, &args.config())?,
        Algo::Winnow => {
            let params = WinnowParams {
                alpha: args.alpha,
                threshold: args.winnow_threshold,
                init: match args.winnow_init {
                    WinnowInitArg::Ones => WinnowInit::Ones,
                    WinnowInitArg::SmallRandom => WinnowInit::SmallRandom,
                },
            };
            online::winnow_train(&design, &ds.targets, &params, &args.config())?
        }
    };
    Ok(Outcome {
        report: RunReport {
            algo,
            basis,
            converged: training.converged,
            iterations: training.iterations,
            misclassified: training.final_misclassified,
            stop_reason: stop_name(training.stop_reason),
            fit: None,
            selection: None,
        },
        model,
        training: Some(training),
    })
}
