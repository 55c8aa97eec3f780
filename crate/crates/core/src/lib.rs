//! Linear classifiers built on least squares, online perceptron-style
//! training and Tikhonov regularization with automatic parameter choice.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]
pub mod datagen;
pub mod error;
pub mod features;
pub mod linalg;
pub mod lsq;
pub mod online;
pub mod regsel;

#[cfg(test)]
mod testutil;

pub use datagen::{Dataset, LabelRule, NoiseSpec};
pub use error::{Error, Result};
pub use features::{BasisSpec, DesignMatrix};
pub use linalg::DenseMatrix;
pub use lsq::{DecisionRule, FitDiagnostics, LinearModel};
pub use online::{QuadraticBoundary, RegSign, StopReason, TrainConfig, TrainReport, WinnowInit, WinnowParams};
pub use regsel::{BalancingParams, MorozovParams, RegRule, RegSelection, TikhonovProblem, ValuePoint};
