//! Dataset files, train/test splits and cross-validated grid search.

mod text;

pub use text::{load_delimited, load_sparse_text, save_delimited, save_sparse_text, DelimitedOptions};

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::matcore::RngSeed;
use crate::metrics::accuracy;
use crate::objective::PenaltySpec;
use crate::svm::{fit, Learner, PenaltyFamily, TrainConfig};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SplitKind {
    Holdout { test_fraction: f64 },
    KFold { k: usize },
    Loo,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub kind: SplitKind,
    pub seed: u64,
    pub stratified: bool,
}

/// Sorted row indices of one train/test partition.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fold {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

fn by_class(y: &[i32]) -> Vec<Vec<usize>> {
    let mut labels: Vec<i32> = y.to_vec();
    labels.sort_unstable();
    labels.dedup();
    labels
        .iter()
        .map(|&l| (0..y.len()).filter(|&i| y[i] == l).collect())
        .collect()
}

fn fold_from_test(n: usize, mut test: Vec<usize>) -> Fold {
    test.sort_unstable();
    let mut in_test = vec![false; n];
    for &i in &test {
        in_test[i] = true;
    }
    Fold {
        train: (0..n).filter(|&i| !in_test[i]).collect(),
        test,
    }
}

/// Partitions the rows of `dataset`.
///
/// Holdout yields one fold; k-fold deals shuffled rows round-robin (class by
/// class when stratified, so every fold holds each class to within one
/// instance); leave-one-out ignores the seed and the stratified flag.
pub fn split(dataset: &Dataset, spec: &SplitSpec) -> Result<Vec<Fold>> {
    let n = dataset.n_samples();
    let mut rng = RngSeed(spec.seed).rng();
    let groups = if spec.stratified {
        by_class(&dataset.y)
    } else {
        vec![(0..n).collect()]
    };
    match spec.kind {
        SplitKind::Holdout { test_fraction } => {
            if !(test_fraction > 0.0 && test_fraction < 1.0) {
                return Err(Error::InvalidParameter(format!(
                    "holdout fraction {test_fraction} outside (0, 1)"
                )));
            }
            let mut test = Vec::new();
            for mut g in groups {
                g.shuffle(&mut rng);
                let take = (g.len() as f64 * test_fraction).round() as usize;
                test.extend_from_slice(&g[..take]);
            }
            if test.is_empty() || test.len() == n {
                return Err(Error::InvalidParameter(format!(
                    "holdout fraction {test_fraction} leaves an empty side with {n} rows"
                )));
            }
            Ok(vec![fold_from_test(n, test)])
        }
        SplitKind::KFold { k } => {
            if k < 2 || k > n {
                return Err(Error::InvalidParameter(format!(
                    "k-fold needs 2 <= k <= n = {n}, got {k}"
                )));
            }
            if spec.stratified {
                if let Some(g) = groups.iter().find(|g| g.len() < k) {
                    return Err(Error::InvalidParameter(format!(
                        "stratified {k}-fold split would leave a fold without class {} ({} instances)",
                        dataset.y[g[0]],
                        g.len()
                    )));
                }
            }
            let mut order = Vec::with_capacity(n);
            for mut g in groups {
                g.shuffle(&mut rng);
                order.extend(g);
            }
            let mut tests = vec![Vec::new(); k];
            for (pos, i) in order.into_iter().enumerate() {
                tests[pos % k].push(i);
            }
            Ok(tests.into_iter().map(|t| fold_from_test(n, t)).collect())
        }
        SplitKind::Loo => {
            if n < 2 {
                return Err(Error::InvalidParameter("leave-one-out needs at least two rows".into()));
            }
            Ok((0..n).map(|i| fold_from_test(n, vec![i])).collect())
        }
    }
}

/// Candidate values per hyperparameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub lambda: Vec<f64>,
    pub lambda1: Vec<f64>,
    pub lambda2: Vec<f64>,
    pub k: Vec<usize>,
}

/// `10^-4, 10^-3, ..., 10^4`.
pub fn default_lambda_grid() -> Vec<f64> {
    log10_grid(-4, 4, 1)
}

/// Ascending `10^(j / per_decade)` from `10^lo` to `10^hi`; whole powers of
/// ten are exact.
pub fn log10_grid(lo: i32, hi: i32, per_decade: usize) -> Vec<f64> {
    let m = per_decade.max(1) as i32;
    (lo * m..=hi * m)
        .map(|j| {
            if j % m == 0 {
                10f64.powi(j / m)
            } else {
                10f64.powf(j as f64 / m as f64)
            }
        })
        .collect()
}

/// `1, 2, 5, 10, 20, 50, ...` below `p`, then `p` itself.
pub fn default_k_grid(p: usize) -> Vec<usize> {
    let mut ks = Vec::new();
    let mut base = 1;
    'outer: loop {
        for m in [1, 2, 5] {
            let k = m * base;
            if k >= p {
                break 'outer;
            }
            ks.push(k);
        }
        base *= 10;
    }
    ks.push(p.max(1));
    ks
}

impl GridSpec {
    pub fn default_for(n_features: usize) -> Self {
        Self {
            lambda: default_lambda_grid(),
            lambda1: default_lambda_grid(),
            lambda2: default_lambda_grid(),
            k: default_k_grid(n_features),
        }
    }

    /// Penalties to try, in grid order: the elastic net iterates `lambda2`
    /// fastest, the k-support norm iterates `k` fastest.
    pub fn points(&self, family: PenaltyFamily, n_features: usize) -> Result<Vec<PenaltySpec>> {
        fn check(name: &str, v: &[f64]) -> Result<()> {
            if v.is_empty() {
                return Err(Error::InvalidParameter(format!("{name} grid is empty")));
            }
            if let Some(bad) = v.iter().find(|x| !(**x > 0.0) || !x.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "{name} grid value {bad} is not positive"
                )));
            }
            Ok(())
        }
        let points: Vec<PenaltySpec> = match family {
            PenaltyFamily::L2 | PenaltyFamily::L1 => {
                check("lambda", &self.lambda)?;
                self.lambda
                    .iter()
                    .map(|&lambda| match family {
                        PenaltyFamily::L2 => PenaltySpec::L2 { lambda },
                        _ => PenaltySpec::L1 { lambda },
                    })
                    .collect()
            }
            PenaltyFamily::ElasticNet => {
                check("lambda1", &self.lambda1)?;
                check("lambda2", &self.lambda2)?;
                self.lambda1
                    .iter()
                    .flat_map(|&lambda1| {
                        self.lambda2
                            .iter()
                            .map(move |&lambda2| PenaltySpec::ElasticNet { lambda1, lambda2 })
                    })
                    .collect()
            }
            PenaltyFamily::KSupport => {
                check("lambda", &self.lambda)?;
                if self.k.is_empty() {
                    return Err(Error::InvalidParameter("k grid is empty".into()));
                }
                if let Some(k) = self.k.iter().find(|&&k| k < 1 || k > n_features) {
                    return Err(Error::InvalidParameter(format!("k = {k} outside [1, {n_features}]")));
                }
                self.lambda
                    .iter()
                    .flat_map(|&lambda| self.k.iter().map(move |&k| PenaltySpec::KSupport { lambda, k }))
                    .collect()
            }
        };
        Ok(points)
    }
}

/// Validation accuracy of one grid point on one fold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvCell {
    pub point: usize,
    pub fold: usize,
    pub accuracy: Option<f64>,
    pub failure: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointScore {
    pub penalty: PenaltySpec,
    /// Mean over folds; `None` when any fold failed.
    pub mean_accuracy: Option<f64>,
    pub failure: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvResult {
    pub best: usize,
    pub best_penalty: PenaltySpec,
    pub best_accuracy: f64,
    pub scores: Vec<PointScore>,
    /// One row per (grid point, fold), point-major.
    pub cells: Vec<CvCell>,
    pub n_folds: usize,
}

impl CvResult {
    /// Comma-separated score table with one row per (grid point, fold).
    pub fn table_csv(&self) -> String {
        let mut out = String::from("point,fold,penalty,lambda,lambda1,lambda2,k,accuracy,failure\n");
        for c in &self.cells {
            let p = self.scores[c.point].penalty;
            let acc = c.accuracy.map(|a| format!("{a}")).unwrap_or_default();
            let failure = c.failure.as_deref().unwrap_or("").replace([',', '\n'], ";");
            out.push_str(&format!(
                "{},{},{},{},{acc},{failure}\n",
                c.point,
                c.fold,
                p.name(),
                penalty_columns(&p)
            ));
        }
        out
    }
}

/// `lambda,lambda1,lambda2,k` cells for a penalty, blank where unused.
pub fn penalty_columns(p: &PenaltySpec) -> String {
    match p {
        PenaltySpec::L2 { lambda } | PenaltySpec::L1 { lambda } => format!("{lambda},,,"),
        PenaltySpec::ElasticNet { lambda1, lambda2 } => format!(",{lambda1},{lambda2},"),
        PenaltySpec::KSupport { lambda, k } => format!("{lambda},,,{k}"),
    }
}

/// Regularization strength ordered so that larger means sparser:
/// the weights in declaration order, then `-k` for the k-support norm.
fn strength(p: &PenaltySpec) -> (f64, f64) {
    match *p {
        PenaltySpec::L2 { lambda } | PenaltySpec::L1 { lambda } => (lambda, 0.0),
        PenaltySpec::ElasticNet { lambda1, lambda2 } => (lambda1, lambda2),
        PenaltySpec::KSupport { lambda, k } => (lambda, -(k as f64)),
    }
}

const TIE_TOLERANCE: f64 = 1e-12;

/// Index of the best grid point: highest mean accuracy, then stronger
/// regularization, then earliest in grid order.
pub fn select_best(scores: &[PointScore]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, s) in scores.iter().enumerate() {
        let Some(acc) = s.mean_accuracy else { continue };
        best = match best {
            None => Some((i, acc)),
            Some((b, bacc)) => {
                let better = if acc > bacc + TIE_TOLERANCE {
                    true
                } else if acc < bacc - TIE_TOLERANCE {
                    false
                } else {
                    strength(&s.penalty)
                        .partial_cmp(&strength(&scores[b].penalty))
                        .is_some_and(|o| o.is_gt())
                };
                if better {
                    Some((i, acc))
                } else {
                    Some((b, bacc))
                }
            }
        };
    }
    best.map(|(i, _)| i)
}

/// Cross-validates every grid point of `family` for `learner`.
///
/// (point, fold) tasks run on the current rayon pool; results are gathered
/// in task order so the outcome does not depend on the thread count.
/// Standardization (if `config.scaling` is set) is fitted on each training
/// fold only.
pub fn grid_search_cv(
    dataset: &Dataset,
    learner: Learner,
    grid: &GridSpec,
    split_spec: &SplitSpec,
    config: &TrainConfig,
) -> Result<CvResult> {
    let points = grid.points(learner.family(), dataset.n_features())?;
    let folds = split(dataset, split_spec)?;
    let parts: Vec<(Dataset, Dataset)> = folds
        .iter()
        .map(|f| (dataset.subset(&f.train), dataset.subset(&f.test)))
        .collect();
    let tasks: Vec<(usize, usize)> = (0..points.len())
        .flat_map(|p| (0..parts.len()).map(move |f| (p, f)))
        .collect();
    let cells: Vec<CvCell> = tasks
        .par_iter()
        .map(|&(point, fold)| {
            let (train, test) = &parts[fold];
            let outcome = fit(learner, train, &points[point], config).and_then(|m| accuracy(&m, test));
            match outcome {
                Ok(a) => CvCell {
                    point,
                    fold,
                    accuracy: Some(a),
                    failure: None,
                },
                Err(e) => CvCell {
                    point,
                    fold,
                    accuracy: None,
                    failure: Some(format!("fold {fold}: {e}")),
                },
            }
        })
        .collect();
    let k = parts.len();
    let scores: Vec<PointScore> = points
        .iter()
        .enumerate()
        .map(|(p, penalty)| {
            let mine = &cells[p * k..(p + 1) * k];
            let failure = mine.iter().find_map(|c| c.failure.clone());
            let mean_accuracy = match failure {
                Some(_) => None,
                None => Some(mine.iter().filter_map(|c| c.accuracy).sum::<f64>() / k as f64),
            };
            PointScore {
                penalty: *penalty,
                mean_accuracy,
                failure,
            }
        })
        .collect();
    let best = select_best(&scores).ok_or_else(|| {
        Error::Internal(format!(
            "every grid point failed; first failure: {}",
            scores[0].failure.as_deref().unwrap_or("unknown")
        ))
    })?;
    Ok(CvResult {
        best,
        best_penalty: scores[best].penalty,
        best_accuracy: scores[best].mean_accuracy.expect("best point scored"),
        scores,
        cells,
        n_folds: k,
    })
}
