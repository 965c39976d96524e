//! Regularized linear support vector machines.
//!
//! Hinge-loss classifiers under L2, L1, elastic-net and k-support penalties,
//! an all-in-one multi-class L1 SVM solved as a linear program, synthetic
//! benchmark generators, cross-validation and sparsity/grouping diagnostics.

// `!(x > 0.0)` style checks are kept so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod datagen;
pub mod dataio;
pub mod dataset;
pub mod error;
pub mod lp;
pub mod matcore;
pub mod metrics;
pub mod objective;
pub mod protocol;
pub mod solvers;
pub mod svm;

pub use dataio::{CvResult, DelimitedOptions, Fold, GridSpec, SplitKind, SplitSpec};
pub use dataset::Dataset;
pub use error::{Error, ErrorKind, Result};
pub use lp::{LpSolution, LpStatus, RowSense, StandardFormLP};
pub use matcore::{DenseMatrix, RngSeed, ScaleMode, Standardizer};
pub use metrics::{EvalReport, GroupingAudit};
pub use objective::{BinaryObjective, PenaltySpec};
pub use solvers::{SolveReport, SolverConfig, StepSchedule};
pub use svm::{
    Learner, LinearModel, Model, MultiClassModel, MultiClassOrigin, PenaltyFamily, SparsityRule, TrainConfig,
};
