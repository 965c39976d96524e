//! Trainers and predictors: binary SVMs under any penalty, one-vs-all and
//! all-in-one multi-class models, and regularization paths.

mod format;

pub use format::{Model, FORMAT_TAG};

use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::lp::{
    binary_l1_svm_to_lp, extract_binary_model, extract_multiclass_model, l1msvm_to_lp, simplex_solve_with, PivotRule,
    SimplexOptions,
};
use crate::matcore::{dot, norm_inf, ScaleMode, Standardizer};
use crate::objective::{BinaryObjective, PenaltySpec};
use crate::solvers::{accelerated_subgradient_solve, prox_subgradient_solve, SolveReport, SolverConfig};

/// How nonzero coefficients are counted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SparsityRule {
    /// `|b_j| > 1e-4 * |b|_inf`, for iterative solvers. Relative, so the
    /// count does not change when the whole vector is rescaled.
    Threshold,
    /// `b_j != 0`, for simplex solutions.
    Exact,
}

pub const SPARSITY_THRESHOLD: f64 = 1e-4;

impl SparsityRule {
    pub fn mask(self, beta: &[f64]) -> Vec<bool> {
        match self {
            SparsityRule::Exact => beta.iter().map(|b| *b != 0.0).collect(),
            SparsityRule::Threshold => {
                let cut = SPARSITY_THRESHOLD * norm_inf(beta);
                beta.iter().map(|b| b.abs() > cut).collect()
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NonzeroCounts {
    pub total: usize,
    /// Nonzeros among the first `m` features when a relevant block is known.
    pub relevant: Option<usize>,
    pub non_relevant: Option<usize>,
}

/// Counts nonzeros of `beta`; with `relevant = Some(m)` the first `m`
/// coordinates form the relevant block.
pub fn count_nonzero(beta: &[f64], rule: SparsityRule, relevant: Option<usize>) -> NonzeroCounts {
    counts_from_mask(&rule.mask(beta), relevant)
}

fn counts_from_mask(mask: &[bool], relevant: Option<usize>) -> NonzeroCounts {
    let total = mask.iter().filter(|m| **m).count();
    match relevant {
        Some(m) => {
            let rel = mask.iter().take(m).filter(|m| **m).count();
            NonzeroCounts {
                total,
                relevant: Some(rel),
                non_relevant: Some(total - rel),
            }
        }
        None => NonzeroCounts {
            total,
            relevant: None,
            non_relevant: None,
        },
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel {
    pub beta0: f64,
    pub beta: Vec<f64>,
    pub penalty: PenaltySpec,
    pub sparsity: SparsityRule,
    /// Applied to raw inputs before the linear function, when present.
    pub scaler: Option<Standardizer>,
    pub report: Option<SolveReport>,
}

impl LinearModel {
    pub fn n_features(&self) -> usize {
        self.beta.len()
    }

    pub fn nonzero(&self, relevant: Option<usize>) -> NonzeroCounts {
        count_nonzero(&self.beta, self.sparsity, relevant)
    }

    pub fn support(&self) -> Vec<bool> {
        self.sparsity.mask(&self.beta)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MultiClassOrigin {
    Ova,
    L1Msvm,
}

/// `k` linear class functions `f_c(x) = b_c0 + x.b_c`, classes numbered
/// from 1.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiClassModel {
    pub intercepts: Vec<f64>,
    pub coefficients: Vec<Vec<f64>>,
    pub origin: MultiClassOrigin,
    pub penalty: PenaltySpec,
    pub sparsity: SparsityRule,
    pub scaler: Option<Standardizer>,
}

impl MultiClassModel {
    pub fn num_classes(&self) -> usize {
        self.intercepts.len()
    }

    pub fn n_features(&self) -> usize {
        self.coefficients.first().map_or(0, Vec::len)
    }

    /// Feature `j` is selected when any class function uses it.
    pub fn selected_features(&self) -> Vec<bool> {
        let mut sel = vec![false; self.n_features()];
        for c in &self.coefficients {
            for (s, m) in sel.iter_mut().zip(self.sparsity.mask(c)) {
                *s |= m;
            }
        }
        sel
    }

    pub fn nonzero(&self, relevant: Option<usize>) -> NonzeroCounts {
        counts_from_mask(&self.selected_features(), relevant)
    }

    /// Nonzero count of each class function taken on its own.
    pub fn per_class_counts(&self) -> Vec<usize> {
        self.coefficients
            .iter()
            .map(|c| count_nonzero(c, self.sparsity, None).total)
            .collect()
    }

    /// Mean per-class count (the "binary classifier" feature count for
    /// one-vs-all models).
    pub fn mean_class_count(&self) -> f64 {
        let c = self.per_class_counts();
        c.iter().sum::<usize>() as f64 / c.len().max(1) as f64
    }

    /// Largest `|sum_c b_c0|` and `|sum_c b_cj|`.
    pub fn sum_to_zero_violation(&self) -> f64 {
        let mut worst = self.intercepts.iter().sum::<f64>().abs();
        for j in 0..self.n_features() {
            let s: f64 = self.coefficients.iter().map(|c| c[j]).sum();
            worst = worst.max(s.abs());
        }
        worst
    }

    pub fn decision_values(&self, x: &[f64]) -> Result<Vec<f64>> {
        let x = prepare_input(x, self.n_features(), self.scaler.as_ref())?;
        Ok(self
            .intercepts
            .iter()
            .zip(&self.coefficients)
            .map(|(b0, b)| b0 + dot(&x, b))
            .collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub solver: SolverConfig,
    /// Solve L1 problems exactly through the simplex instead of iteratively.
    pub exact_l1: bool,
    /// Fit a standardizer on the training data and store it in the model.
    pub scaling: Option<ScaleMode>,
    pub simplex: SimplexOptions,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            solver: SolverConfig::default(),
            exact_l1: false,
            scaling: None,
            simplex: SimplexOptions {
                rule: PivotRule::SteepestEdge,
                max_iterations: None,
            },
        }
    }
}

fn prepare_input<'a>(x: &'a [f64], p: usize, scaler: Option<&Standardizer>) -> Result<std::borrow::Cow<'a, [f64]>> {
    if x.len() != p {
        return Err(Error::DimensionMismatch(format!(
            "model has {p} features, input has {}",
            x.len()
        )));
    }
    Ok(match scaler {
        None => std::borrow::Cow::Borrowed(x),
        Some(s) => {
            let mut v = x.to_vec();
            s.transform_row_in_place(&mut v);
            std::borrow::Cow::Owned(v)
        }
    })
}

fn scaled(dataset: &Dataset, mode: Option<ScaleMode>) -> Result<(Dataset, Option<Standardizer>)> {
    match mode {
        None => Ok((dataset.clone(), None)),
        Some(mode) => {
            let st = Standardizer::fit(&dataset.x, mode);
            Ok((dataset.with_features(st.transform(&dataset.x)?)?, Some(st)))
        }
    }
}

fn check_two_classes(dataset: &Dataset) -> Result<()> {
    dataset.check_binary()?;
    if dataset.classes().len() != 2 {
        return Err(Error::Data("binary training needs both classes present".into()));
    }
    Ok(())
}

/// Trains on already-prepared data; no scaler is attached.
fn train_binary_raw(
    dataset: &Dataset,
    penalty: &PenaltySpec,
    config: &TrainConfig,
    warm: Option<(f64, &[f64])>,
) -> Result<LinearModel> {
    check_two_classes(dataset)?;
    penalty.validate(dataset.n_features())?;
    match *penalty {
        PenaltySpec::L1 { lambda } if config.exact_l1 => {
            let (lp, layout) = binary_l1_svm_to_lp(dataset, lambda)?;
            let sol = simplex_solve_with(&lp, config.simplex)?;
            extract_binary_model(&sol, layout, lambda)
        }
        PenaltySpec::KSupport { .. } => {
            let s = accelerated_subgradient_solve(dataset, penalty, &config.solver, warm)?;
            Ok(iterative_model(s, *penalty))
        }
        _ => {
            let obj = BinaryObjective::new(dataset, *penalty)?;
            let s = prox_subgradient_solve(&obj, &config.solver, warm)?;
            Ok(iterative_model(s, *penalty))
        }
    }
}

fn iterative_model(s: crate::solvers::Solution, penalty: PenaltySpec) -> LinearModel {
    LinearModel {
        beta0: s.beta0,
        beta: s.beta,
        penalty,
        sparsity: SparsityRule::Threshold,
        scaler: None,
        report: Some(s.report),
    }
}

/// Binary SVM under `penalty`: simplex for L1 when `exact_l1` is set,
/// accelerated subgradient for k-support, proximal subgradient otherwise.
pub fn train_binary(dataset: &Dataset, penalty: &PenaltySpec, config: &TrainConfig) -> Result<LinearModel> {
    check_two_classes(dataset)?;
    let (data, scaler) = scaled(dataset, config.scaling)?;
    let mut model = train_binary_raw(&data, penalty, config, None)?;
    model.scaler = scaler;
    Ok(model)
}

pub fn decision_value(model: &LinearModel, x: &[f64]) -> Result<f64> {
    let x = prepare_input(x, model.n_features(), model.scaler.as_ref())?;
    Ok(model.beta0 + dot(&x, &model.beta))
}

/// `+1` when the decision value is `>= 0`.
pub fn predict_binary(model: &LinearModel, x: &[f64]) -> Result<i32> {
    Ok(if decision_value(model, x)? >= 0.0 { 1 } else { -1 })
}

/// Index (1-based) of the largest value; ties go to the lowest index.
pub fn argmax_class(f: &[f64]) -> usize {
    let mut best = 0;
    for (c, v) in f.iter().enumerate().skip(1) {
        if *v > f[best] {
            best = c;
        }
    }
    best + 1
}

pub fn predict_multiclass(model: &MultiClassModel, x: &[f64]) -> Result<usize> {
    Ok(argmax_class(&model.decision_values(x)?))
}

/// One binary model per class (class `c` positive, the rest negative), all
/// with the same penalty.
pub fn train_ova(dataset: &Dataset, penalty: &PenaltySpec, config: &TrainConfig) -> Result<MultiClassModel> {
    let k = dataset.num_classes()?;
    let (data, scaler) = scaled(dataset, config.scaling)?;
    let mut intercepts = Vec::with_capacity(k);
    let mut coefficients = Vec::with_capacity(k);
    let mut sparsity = SparsityRule::Threshold;
    for c in 1..=k as i32 {
        let y = data.y.iter().map(|&l| if l == c { 1 } else { -1 }).collect();
        let m = train_binary_raw(&data.with_labels(y)?, penalty, config, None)?;
        sparsity = m.sparsity;
        intercepts.push(m.beta0);
        coefficients.push(m.beta);
    }
    Ok(MultiClassModel {
        intercepts,
        coefficients,
        origin: MultiClassOrigin::Ova,
        penalty: *penalty,
        sparsity,
        scaler,
    })
}

/// All-in-one multi-class L1 SVM, solved exactly as a linear program.
pub fn train_l1msvm(dataset: &Dataset, lambda: f64, config: &TrainConfig) -> Result<MultiClassModel> {
    let k = dataset.num_classes()?;
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(Error::InvalidParameter(format!("lambda = {lambda}")));
    }
    let (data, scaler) = scaled(dataset, config.scaling)?;
    let (lp, layout) = l1msvm_to_lp(&data, lambda, k)?;
    let sol = simplex_solve_with(&lp, config.simplex)?;
    if sol.status != crate::lp::LpStatus::Optimal {
        return Err(Error::Internal(format!(
            "multi-class LP ended with status {:?}",
            sol.status
        )));
    }
    let mut model = extract_multiclass_model(&sol, layout, lambda)?;
    model.scaler = scaler;
    Ok(model)
}

/// Regularizer family, without weights.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PenaltyFamily {
    L2,
    L1,
    ElasticNet,
    KSupport,
}

impl PenaltyFamily {
    pub const ALL: [PenaltyFamily; 4] = [
        PenaltyFamily::L2,
        PenaltyFamily::L1,
        PenaltyFamily::ElasticNet,
        PenaltyFamily::KSupport,
    ];

    pub fn of(p: &PenaltySpec) -> Self {
        match p {
            PenaltySpec::L2 { .. } => PenaltyFamily::L2,
            PenaltySpec::L1 { .. } => PenaltyFamily::L1,
            PenaltySpec::ElasticNet { .. } => PenaltyFamily::ElasticNet,
            PenaltySpec::KSupport { .. } => PenaltyFamily::KSupport,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            PenaltyFamily::L2 => "l2",
            PenaltyFamily::L1 => "l1",
            PenaltyFamily::ElasticNet => "elasticnet",
            PenaltyFamily::KSupport => "ksupport",
        }
    }
}

/// What gets trained for a given penalty.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "learner", content = "family", rename_all = "snake_case")]
pub enum Learner {
    Binary(PenaltyFamily),
    Ova(PenaltyFamily),
    /// Penalties passed to it must be `L1`; `lambda` is the LP weight.
    L1Msvm,
}

impl Learner {
    pub fn family(self) -> PenaltyFamily {
        match self {
            Learner::Binary(f) | Learner::Ova(f) => f,
            Learner::L1Msvm => PenaltyFamily::L1,
        }
    }

    pub fn name(self) -> String {
        match self {
            Learner::Binary(f) => f.name().to_string(),
            Learner::Ova(f) => format!("ova_{}", f.name()),
            Learner::L1Msvm => "l1msvm".to_string(),
        }
    }
}

/// Trains `learner` at `penalty`, whose family must match the learner's.
pub fn fit(learner: Learner, dataset: &Dataset, penalty: &PenaltySpec, config: &TrainConfig) -> Result<Model> {
    if PenaltyFamily::of(penalty) != learner.family() {
        return Err(Error::InvalidParameter(format!(
            "{} cannot be trained with a {} penalty",
            learner.name(),
            penalty.name()
        )));
    }
    match (learner, penalty) {
        (Learner::Binary(_), _) => train_binary(dataset, penalty, config).map(Model::Binary),
        (Learner::Ova(_), _) => train_ova(dataset, penalty, config).map(Model::MultiClass),
        (Learner::L1Msvm, PenaltySpec::L1 { lambda }) => train_l1msvm(dataset, *lambda, config).map(Model::MultiClass),
        (Learner::L1Msvm, _) => unreachable!("family checked above"),
    }
}

impl Model {
    /// Predicted label: `+1/-1` for binary models, `1..=k` otherwise.
    pub fn predict(&self, x: &[f64]) -> Result<i32> {
        match self {
            Model::Binary(m) => predict_binary(m, x),
            Model::MultiClass(m) => predict_multiclass(m, x).map(|c| c as i32),
        }
    }

    pub fn n_features(&self) -> usize {
        match self {
            Model::Binary(m) => m.n_features(),
            Model::MultiClass(m) => m.n_features(),
        }
    }

    pub fn penalty(&self) -> &PenaltySpec {
        match self {
            Model::Binary(m) => &m.penalty,
            Model::MultiClass(m) => &m.penalty,
        }
    }

    pub fn nonzero(&self, relevant: Option<usize>) -> NonzeroCounts {
        match self {
            Model::Binary(m) => m.nonzero(relevant),
            Model::MultiClass(m) => m.nonzero(relevant),
        }
    }
}

/// Returns `template` with its primary regularization weight replaced:
/// `lambda` for L2/L1/k-support and `lambda1` for the elastic net.
pub fn with_regularization(template: &PenaltySpec, value: f64) -> PenaltySpec {
    match *template {
        PenaltySpec::L2 { .. } => PenaltySpec::L2 { lambda: value },
        PenaltySpec::L1 { .. } => PenaltySpec::L1 { lambda: value },
        PenaltySpec::ElasticNet { lambda2, .. } => PenaltySpec::ElasticNet {
            lambda1: value,
            lambda2,
        },
        PenaltySpec::KSupport { k, .. } => PenaltySpec::KSupport { lambda: value, k },
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathRow {
    pub lambda: f64,
    pub beta0: f64,
    pub beta: Vec<f64>,
    pub nonzero: usize,
}

/// Trains along a descending grid of the primary regularization weight
/// (see [`with_regularization`]), warm-starting each iterative solve from
/// the previous grid point.
pub fn regularization_path(
    dataset: &Dataset,
    family: &PenaltySpec,
    grid: &[f64],
    config: &TrainConfig,
) -> Result<Vec<PathRow>> {
    if grid.is_empty() || grid.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
        return Err(Error::InvalidParameter("path grid values must be positive".into()));
    }
    if grid.windows(2).any(|w| w[1] > w[0]) {
        return Err(Error::InvalidParameter("path grid must be sorted descending".into()));
    }
    check_two_classes(dataset)?;
    let (data, _) = scaled(dataset, config.scaling)?;
    let mut rows: Vec<PathRow> = Vec::with_capacity(grid.len());
    for &lambda in grid {
        let penalty = with_regularization(family, lambda);
        let warm = rows.last().map(|r| (r.beta0, r.beta.as_slice()));
        let m = train_binary_raw(&data, &penalty, config, warm)?;
        rows.push(PathRow {
            lambda,
            beta0: m.beta0,
            nonzero: m.nonzero(None).total,
            beta: m.beta,
        });
    }
    Ok(rows)
}

/// `n` log-spaced values from `hi` down to `lo`.
pub fn log_grid_descending(hi: f64, lo: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![hi];
    }
    let (a, b) = (hi.ln(), lo.ln());
    (0..n)
        .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::DenseMatrix;
    use crate::solvers::StepSchedule;

    fn data(rows: &[&[f64]], y: &[i32]) -> Dataset {
        let rows: Vec<Vec<f64>> = rows.iter().map(|r| r.to_vec()).collect();
        Dataset::new(DenseMatrix::from_rows(&rows).unwrap(), y.to_vec()).unwrap()
    }

    fn linear(beta0: f64, beta: Vec<f64>) -> LinearModel {
        LinearModel {
            beta0,
            beta,
            penalty: PenaltySpec::L2 { lambda: 1.0 },
            sparsity: SparsityRule::Threshold,
            scaler: None,
            report: None,
        }
    }

    #[test]
    fn decision_and_tie_rule() {
        let m = linear(0.0, vec![1.0, 0.0]);
        assert_eq!(decision_value(&m, &[2.0, 5.0]).unwrap(), 2.0);
        assert_eq!(predict_binary(&m, &[2.0, 5.0]).unwrap(), 1);
        assert_eq!(predict_binary(&m, &[0.0, 3.0]).unwrap(), 1);
        let neg = linear(-0.0, vec![-1.0, -0.0]);
        assert_eq!(predict_binary(&neg, &[2.0, 5.0]).unwrap(), -1);
        assert!(decision_value(&m, &[1.0]).is_err());
    }

    #[test]
    fn argmax_examples() {
        assert_eq!(argmax_class(&[0.1, 0.9, 0.3]), 2);
        assert_eq!(argmax_class(&[0.9, 0.9, 0.1]), 1);
        assert_eq!(argmax_class(&[1.1, 1.9, 1.3]), 2);
    }

    #[test]
    fn nonzero_counting() {
        assert_eq!(count_nonzero(&[0.0, 1e-9, 0.5], SparsityRule::Threshold, None).total, 1);
        let mut v = vec![0.0; 60];
        v[3] = 1.0;
        v[17] = -2.0;
        let c = count_nonzero(&v, SparsityRule::Threshold, Some(30));
        assert_eq!((c.total, c.relevant, c.non_relevant), (2, Some(2), Some(0)));
        assert_eq!(count_nonzero(&[1e-9, 0.0, 1.0], SparsityRule::Exact, None).total, 2);
        assert_eq!(count_nonzero(&[0.0; 4], SparsityRule::Threshold, None).total, 0);
        // Small but dense vectors stay dense.
        assert_eq!(
            count_nonzero(&[3e-5, -2e-5, 6e-4], SparsityRule::Threshold, None).total,
            3
        );
    }

    proptest::proptest! {
        #[test]
        fn threshold_count_is_scale_invariant(
            v in proptest::collection::vec(-10.0f64..10.0, 1..20),
            e in -8i32..8,
        ) {
            let s = 2f64.powi(e);
            let scaled: Vec<f64> = v.iter().map(|x| x * s).collect();
            proptest::prop_assert_eq!(
                SparsityRule::Threshold.mask(&v),
                SparsityRule::Threshold.mask(&scaled)
            );
        }
    }

    #[test]
    fn separable_pair_is_fit_by_l2() {
        let d = data(&[&[1.0], &[-1.0]], &[1, -1]);
        let m = train_binary(&d, &PenaltySpec::L2 { lambda: 0.1 }, &TrainConfig::default()).unwrap();
        assert!(m.beta[0] > 0.0);
        assert_eq!(predict_binary(&m, &[1.0]).unwrap(), 1);
        assert_eq!(predict_binary(&m, &[-1.0]).unwrap(), -1);
    }

    #[test]
    fn single_class_is_rejected() {
        let d = data(&[&[1.0], &[2.0]], &[1, 1]);
        assert!(train_binary(&d, &PenaltySpec::L1 { lambda: 1.0 }, &TrainConfig::default()).is_err());
    }

    #[test]
    fn huge_penalty_gives_near_zero_coefficients() {
        let d = data(&[&[1.0, 2.0], &[-1.0, 0.5], &[0.3, -2.0], &[2.0, 1.0]], &[1, -1, -1, 1]);
        for p in [
            PenaltySpec::L2 { lambda: 1e4 },
            PenaltySpec::L1 { lambda: 1e4 },
            PenaltySpec::ElasticNet {
                lambda1: 1e4,
                lambda2: 1e4,
            },
            PenaltySpec::KSupport { lambda: 1e4, k: 1 },
        ] {
            let m = train_binary(&d, &p, &TrainConfig::default()).unwrap();
            assert!(norm_inf(&m.beta) <= 1e-3, "{p:?}: {:?}", m.beta);
        }
    }

    #[test]
    fn exact_l1_gives_exact_zeros() {
        let d = data(
            &[&[1.0, 0.1], &[2.0, -0.1], &[-1.0, 0.2], &[-2.0, -0.3]],
            &[1, 1, -1, -1],
        );
        let cfg = TrainConfig {
            exact_l1: true,
            ..TrainConfig::default()
        };
        let m = train_binary(&d, &PenaltySpec::L1 { lambda: 0.5 }, &cfg).unwrap();
        assert_eq!(m.sparsity, SparsityRule::Exact);
        assert_eq!(m.beta[1], 0.0);
        assert!(m.beta[0] > 0.0);
    }

    #[test]
    fn scaler_is_applied_at_prediction() {
        let d = data(&[&[10.0], &[12.0], &[20.0], &[22.0]], &[-1, -1, 1, 1]);
        let cfg = TrainConfig {
            scaling: Some(ScaleMode::UnitVariance),
            ..TrainConfig::default()
        };
        let m = train_binary(&d, &PenaltySpec::L2 { lambda: 0.01 }, &cfg).unwrap();
        assert!(m.scaler.is_some());
        for i in 0..4 {
            assert_eq!(predict_binary(&m, d.row(i)).unwrap(), d.y[i]);
        }
    }

    fn blobs() -> Dataset {
        let centers = [(0.0, 4.0), (4.0, -2.0), (-4.0, -2.0)];
        let offsets = [(0.3, 0.1), (-0.2, 0.4), (0.1, -0.3), (-0.4, -0.1)];
        let mut rows = Vec::new();
        let mut y = Vec::new();
        for (c, (cx, cy)) in centers.iter().enumerate() {
            for (ox, oy) in offsets {
                rows.push(vec![cx + ox, cy + oy]);
                y.push(c as i32 + 1);
            }
        }
        Dataset::new(DenseMatrix::from_rows(&rows).unwrap(), y).unwrap()
    }

    #[test]
    fn l1msvm_separates_blobs_with_sum_to_zero() {
        let d = blobs();
        let m = train_l1msvm(&d, 0.01, &TrainConfig::default()).unwrap();
        assert!(m.sum_to_zero_violation() <= 1e-8);
        for i in 0..d.n_samples() {
            assert_eq!(predict_multiclass(&m, d.row(i)).unwrap() as i32, d.y[i]);
        }
    }

    #[test]
    fn l1msvm_with_large_lambda_predicts_first_class() {
        let d = blobs();
        let m = train_l1msvm(&d, 1e3, &TrainConfig::default()).unwrap();
        assert!(m.coefficients.iter().flatten().all(|v| *v == 0.0));
        for i in 0..d.n_samples() {
            assert_eq!(predict_multiclass(&m, d.row(i)).unwrap(), 1);
        }
    }

    #[test]
    fn l1msvm_commutes_with_label_permutation() {
        let d = blobs();
        let perm = [2, 3, 1];
        let permuted = d
            .with_labels(d.y.iter().map(|&l| perm[l as usize - 1]).collect())
            .unwrap();
        let a = train_l1msvm(&d, 0.01, &TrainConfig::default()).unwrap();
        let b = train_l1msvm(&permuted, 0.01, &TrainConfig::default()).unwrap();
        for x in [[0.5, 3.0], [3.0, -1.0], [-3.5, -1.5], [0.0, 0.0]] {
            let pa = predict_multiclass(&a, &x).unwrap();
            let pb = predict_multiclass(&b, &x).unwrap();
            assert_eq!(perm[pa - 1] as usize, pb);
        }
    }

    #[test]
    fn two_class_ova_matches_binary_predictions() {
        let rows: Vec<Vec<f64>> = (0..12)
            .map(|i| {
                let t = i as f64;
                vec![
                    (t * 0.7).sin() * 2.0 + if i % 2 == 0 { 1.0 } else { -1.0 },
                    (t * 1.3).cos(),
                ]
            })
            .collect();
        let labels: Vec<i32> = (0..12).map(|i| if i % 2 == 0 { 1 } else { 2 }).collect();
        let multi = Dataset::new(DenseMatrix::from_rows(&rows).unwrap(), labels.clone()).unwrap();
        let bin = multi
            .with_labels(labels.iter().map(|&l| if l == 1 { 1 } else { -1 }).collect())
            .unwrap();
        let cfg = TrainConfig::default();
        let pen = PenaltySpec::L2 { lambda: 1.0 };
        let ova = train_ova(&multi, &pen, &cfg).unwrap();
        let single = train_binary(&bin, &pen, &cfg).unwrap();
        let mut agree = 0;
        for i in 0..12 {
            let a = predict_multiclass(&ova, multi.row(i)).unwrap();
            let b = predict_binary(&single, multi.row(i)).unwrap();
            agree += usize::from((a == 1) == (b == 1));
        }
        assert!(agree >= 11, "agreement {agree}/12");
    }

    #[test]
    fn ova_feature_count_is_union() {
        let m = MultiClassModel {
            intercepts: vec![0.0; 3],
            coefficients: vec![vec![1.0, 0.0, 0.0], vec![0.0, 0.0, 2.0], vec![1.0, 0.0, 0.0]],
            origin: MultiClassOrigin::Ova,
            penalty: PenaltySpec::L1 { lambda: 1.0 },
            sparsity: SparsityRule::Exact,
            scaler: None,
        };
        assert_eq!(m.nonzero(None).total, 2);
        assert_eq!(m.per_class_counts(), vec![1, 1, 1]);
        assert_eq!(m.mean_class_count(), 1.0);
    }

    #[test]
    fn path_validates_grid_and_shrinks_at_the_top() {
        let d = data(&[&[1.0, 2.0], &[-1.0, 0.5], &[0.3, -2.0], &[2.0, 1.0]], &[1, -1, -1, 1]);
        let fam = PenaltySpec::L1 { lambda: 1.0 };
        let cfg = TrainConfig::default();
        assert!(regularization_path(&d, &fam, &[1.0, 2.0], &cfg).is_err());
        assert!(regularization_path(&d, &fam, &[], &cfg).is_err());
        let grid = log_grid_descending(1e3, 1e-2, 6);
        assert_eq!(grid.len(), 6);
        let rows = regularization_path(&d, &fam, &grid, &cfg).unwrap();
        assert_eq!(rows.len(), 6);
        assert!(norm_inf(&rows[0].beta) <= 1e-3);
        assert_eq!(rows[0].nonzero, 0);
    }

    #[test]
    fn constant_step_runs_are_deterministic() {
        let d = data(&[&[1.0, 2.0], &[-1.0, 0.5], &[0.3, -2.0], &[2.0, 1.0]], &[1, -1, -1, 1]);
        let cfg = TrainConfig {
            solver: SolverConfig {
                step: StepSchedule::Constant { scale: 0.5 },
                ..SolverConfig::default()
            },
            ..TrainConfig::default()
        };
        let p = PenaltySpec::ElasticNet {
            lambda1: 0.3,
            lambda2: 0.2,
        };
        let a = train_binary(&d, &p, &cfg).unwrap();
        let b = train_binary(&d, &p, &cfg).unwrap();
        assert_eq!(a.beta, b.beta);
        assert_eq!(a.beta0.to_bits(), b.beta0.to_bits());
    }
}
