use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Parser, Serialize)]
#[command(
    name = "regsvm",
    version,
    about = "Regularized linear SVMs with sparsity diagnostics"
)]
pub struct Cli {
    /// Master seed for every random stream.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    /// Worker threads for grid points and repetitions.
    #[arg(long, global = true, default_value_t = 1)]
    pub jobs: usize,

    /// Relative convergence tolerance of the iterative solvers.
    #[arg(long, global = true, default_value_t = 1e-6)]
    pub tolerance: f64,

    /// Iteration cap of the iterative solvers.
    #[arg(long = "max-iters", global = true, default_value_t = 5000)]
    pub max_iters: usize,

    /// Directory receiving results and manifest.json.
    #[arg(long = "out-dir", global = true, env = "REGSVM_OUT_DIR", default_value = ".")]
    pub out_dir: PathBuf,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
pub enum Command {
    /// Generate a synthetic dataset.
    Synth(SynthArgs),
    /// Train one model.
    Train(TrainArgs),
    /// Cross-validated grid search.
    Cv(CvArgs),
    /// Coefficient path over a descending regularization grid.
    Path(PathArgs),
    /// Repeated train/tune/test protocol with aggregated results.
    Benchmark(BenchmarkArgs),
    /// Re-run the command recorded in a manifest.
    Replay(ReplayArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SynthKind {
    Grouped,
    Fourclass,
}

#[derive(Debug, Args, Serialize)]
pub struct SynthArgs {
    pub kind: SynthKind,
    /// Instances per class (grouped).
    #[arg(long = "n-per-class", default_value_t = 30)]
    pub n_per_class: usize,
    /// Total instances (fourclass).
    #[arg(long, default_value_t = 100)]
    pub samples: usize,
    /// Feature count; defaults to 30 (grouped) or 100 (fourclass).
    #[arg(long)]
    pub features: Option<usize>,
    /// Size of the correlated relevant block (grouped).
    #[arg(long, default_value_t = 5)]
    pub block: usize,
    /// Within-block correlation (grouped).
    #[arg(long, default_value_t = 0.8)]
    pub rho: f64,
    /// Class mean offset of the relevant block (grouped).
    #[arg(long, default_value_t = 1.0)]
    pub mean: f64,
    /// Class shift of the first two features (fourclass).
    #[arg(long, default_value_t = 3.0)]
    pub d: f64,
    /// Noise columns appended after generation.
    #[arg(long)]
    pub contaminate: Option<usize>,
    /// Also write the independent test set (fourclass).
    #[arg(long)]
    pub with_test: bool,
    /// Output file name inside the output directory.
    #[arg(long)]
    pub out: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DataFormat {
    Csv,
    Sparse,
}

#[derive(Debug, Args, Serialize)]
pub struct DataArgs {
    /// Dataset file.
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, value_enum, default_value_t = DataFormat::Csv)]
    pub format: DataFormat,
    /// Label value mapped to +1 for text labels; the other value becomes -1.
    #[arg(long = "positive-label")]
    pub positive_label: Option<String>,
    /// Zero-based label column (default: last).
    #[arg(long = "label-column")]
    pub label_column: Option<usize>,
    #[arg(long, default_value_t = ',')]
    pub delimiter: char,
    /// The first row is data, not a header.
    #[arg(long = "no-header")]
    pub no_header: bool,
    /// Treat the first m features as the relevant block in nonzero counts.
    #[arg(long)]
    pub relevant: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    L2,
    L1,
    Elasticnet,
    Ksupport,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LearnerKind {
    Binary,
    Ova,
    L1msvm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Scaling {
    None,
    UnitVariance,
    UnitL2,
}

#[derive(Debug, Args, Serialize)]
pub struct SolverArgs {
    /// Solve L1 problems exactly with the simplex method.
    #[arg(long = "exact-lp")]
    pub exact_lp: bool,
    /// Column standardization fitted on training rows.
    #[arg(long, value_enum, default_value_t = Scaling::None)]
    pub scale: Scaling,
    /// Simplex pricing rule.
    #[arg(long, value_enum, default_value_t = Pricing::SteepestEdge)]
    pub pricing: Pricing,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Pricing {
    Bland,
    Dantzig,
    SteepestEdge,
}

#[derive(Debug, Args, Serialize)]
pub struct TrainArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long, value_enum)]
    pub penalty: Family,
    #[arg(long, value_enum, default_value_t = LearnerKind::Binary)]
    pub learner: LearnerKind,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub lambda1: Option<f64>,
    #[arg(long)]
    pub lambda2: Option<f64>,
    #[arg(long)]
    pub k: Option<usize>,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Check the elastic-net grouping bound on every feature pair.
    /// Implies unit-l2 scaling.
    #[arg(long = "audit-grouping")]
    pub audit_grouping: bool,
    /// Audit slack; defaults to 10 * tolerance * n.
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Model file name inside the output directory.
    #[arg(long = "model-out", default_value = "model.txt")]
    pub model_out: String,
}

#[derive(Debug, Args, Serialize, Default)]
pub struct GridArgs {
    /// Comma-separated values of lambda (L2, L1, k-support, multi-class L1).
    #[arg(long, value_delimiter = ',')]
    pub lambdas: Vec<f64>,
    /// Comma-separated values of lambda1 (elastic net).
    #[arg(long, value_delimiter = ',')]
    pub lambda1s: Vec<f64>,
    /// Comma-separated values of lambda2 (elastic net).
    #[arg(long, value_delimiter = ',')]
    pub lambda2s: Vec<f64>,
    /// Comma-separated values of k (k-support).
    #[arg(long, value_delimiter = ',')]
    pub ks: Vec<usize>,
    /// Log-spaced values per decade for defaulted weight lists over [1e-4, 1e4].
    #[arg(long = "per-decade", default_value_t = 1)]
    pub per_decade: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct CvArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long, value_enum)]
    pub penalty: Family,
    #[arg(long, value_enum, default_value_t = LearnerKind::Binary)]
    pub learner: LearnerKind,
    #[command(flatten)]
    pub grid: GridArgs,
    /// k-fold cross-validation.
    #[arg(long, conflicts_with_all = ["loo", "holdout"])]
    pub folds: Option<usize>,
    /// Leave-one-out cross-validation.
    #[arg(long)]
    pub loo: bool,
    /// Single holdout split with this test fraction.
    #[arg(long)]
    pub holdout: Option<f64>,
    /// Keep class proportions in every fold.
    #[arg(long)]
    pub stratified: bool,
    #[command(flatten)]
    pub solver: SolverArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct PathArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long, value_enum)]
    pub penalty: Family,
    /// Explicit grid of the primary weight (lambda, or lambda1 for the elastic net).
    #[arg(long, value_delimiter = ',')]
    pub lambdas: Vec<f64>,
    /// Number of log-spaced grid points when no explicit grid is given.
    #[arg(long, default_value_t = 30)]
    pub points: usize,
    #[arg(long = "lambda-max", default_value_t = 100.0)]
    pub lambda_max: f64,
    #[arg(long = "lambda-min", default_value_t = 0.01)]
    pub lambda_min: f64,
    /// Fixed lambda2 along an elastic-net path.
    #[arg(long, default_value_t = 1.0)]
    pub lambda2: f64,
    /// Fixed k along a k-support path.
    #[arg(long)]
    pub k: Option<usize>,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[arg(long, default_value = "path.csv")]
    pub out: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Protocol {
    Table1,
    Table2,
}

#[derive(Debug, Args, Serialize)]
pub struct BenchmarkArgs {
    pub protocol: Protocol,
    /// Binary dataset for table1.
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long = "positive-label")]
    pub positive_label: Option<String>,
    #[arg(long = "label-column")]
    pub label_column: Option<usize>,
    /// Use generated grouped data for table1 instead of a file.
    #[arg(long)]
    pub grouped: bool,
    /// Noise columns appended per repetition (table1).
    #[arg(long)]
    pub contaminate: Option<usize>,
    #[arg(long, default_value_t = 10)]
    pub reps: usize,
    /// Cross-validation folds (table1).
    #[arg(long, default_value_t = 10)]
    pub folds: usize,
    /// Test fraction of the holdout split (table1).
    #[arg(long = "test-fraction", default_value_t = 1.0 / 3.0)]
    pub test_fraction: f64,
    /// Class shifts (table2).
    #[arg(long, value_delimiter = ',', default_value = "3")]
    pub d: Vec<f64>,
    /// Methods to run; default all (l2, l1, elasticnet, ksupport, plus
    /// l1msvm and the ova_ variants for table2).
    #[arg(long, value_delimiter = ',')]
    pub methods: Vec<String>,
    #[command(flatten)]
    pub grid: GridArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct ReplayArgs {
    pub manifest: PathBuf,
}
