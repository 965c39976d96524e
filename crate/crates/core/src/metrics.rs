//! Accuracy, confusion counts, sparsity summaries and the elastic-net
//! grouping audit.

use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::matcore::{mean, pearson_correlation, sample_std};
use crate::objective::PenaltySpec;
use crate::svm::{LinearModel, Model};

/// Feature counts as reals so that aggregated reports can hold means.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureCounts {
    pub total: f64,
    pub relevant: Option<f64>,
    pub non_relevant: Option<f64>,
}

/// Sample standard deviations matching the fields of an aggregated report.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Spread {
    pub accuracy: f64,
    pub nonzero: FeatureCounts,
    pub class_features: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub accuracy: f64,
    /// Label values indexing the confusion matrix rows (truth) and columns.
    pub labels: Vec<i32>,
    pub confusion: Vec<Vec<usize>>,
    pub nonzero: FeatureCounts,
    /// Mean number of features used per class, for multi-class models.
    pub class_features: Option<f64>,
    pub repetitions: usize,
    /// Present on aggregated reports.
    pub spread: Option<Spread>,
}

impl EvalReport {
    pub fn error_rate(&self) -> f64 {
        1.0 - self.accuracy
    }
}

/// Fraction of rows of `data` whose label `model` predicts.
pub fn accuracy(model: &Model, data: &Dataset) -> Result<f64> {
    if data.n_samples() == 0 {
        return Err(Error::Data("empty test set".into()));
    }
    let mut correct = 0usize;
    for i in 0..data.n_samples() {
        if model.predict(data.row(i))? == data.y[i] {
            correct += 1;
        }
    }
    Ok(correct as f64 / data.n_samples() as f64)
}

fn model_labels(model: &Model) -> Vec<i32> {
    match model {
        Model::Binary(_) => vec![-1, 1],
        Model::MultiClass(m) => (1..=m.num_classes() as i32).collect(),
    }
}

pub fn evaluate(model: &Model, test: &Dataset) -> Result<EvalReport> {
    if test.n_samples() == 0 {
        return Err(Error::Data("empty test set".into()));
    }
    if test.n_features() != model.n_features() {
        return Err(Error::DimensionMismatch(format!(
            "model has {} features, test data has {}",
            model.n_features(),
            test.n_features()
        )));
    }
    let labels = model_labels(model);
    let index = |l: i32| {
        labels
            .iter()
            .position(|&v| v == l)
            .ok_or_else(|| Error::Data(format!("test label {l} is not a class of the model")))
    };
    let mut confusion = vec![vec![0usize; labels.len()]; labels.len()];
    let mut correct = 0usize;
    for i in 0..test.n_samples() {
        let truth = test.y[i];
        let pred = model.predict(test.row(i))?;
        confusion[index(truth)?][index(pred)?] += 1;
        if truth == pred {
            correct += 1;
        }
    }
    let counts = model.nonzero(test.relevant_features);
    let class_features = match model {
        Model::Binary(_) => None,
        Model::MultiClass(m) => Some(m.mean_class_count()),
    };
    Ok(EvalReport {
        accuracy: correct as f64 / test.n_samples() as f64,
        labels,
        confusion,
        nonzero: FeatureCounts {
            total: counts.total as f64,
            relevant: counts.relevant.map(|v| v as f64),
            non_relevant: counts.non_relevant.map(|v| v as f64),
        },
        class_features,
        repetitions: 1,
        spread: None,
    })
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.iter().all(|v| *v == values[0]) {
        return (values[0], 0.0);
    }
    (mean(values), sample_std(values))
}

fn optional_mean_std(values: Vec<Option<f64>>) -> Option<(f64, f64)> {
    let v: Option<Vec<f64>> = values.into_iter().collect();
    v.map(|v| mean_std(&v))
}

/// Means and sample standard deviations (`n - 1` denominator) of every
/// metric; confusion matrices are summed.
pub fn aggregate_repetitions(reports: &[EvalReport]) -> Result<EvalReport> {
    let first = reports
        .first()
        .ok_or_else(|| Error::InvalidParameter("no reports to aggregate".into()))?;
    let same_shape = |r: &EvalReport| {
        r.labels == first.labels
            && r.nonzero.relevant.is_some() == first.nonzero.relevant.is_some()
            && r.nonzero.non_relevant.is_some() == first.nonzero.non_relevant.is_some()
            && r.class_features.is_some() == first.class_features.is_some()
    };
    if !reports.iter().all(same_shape) {
        return Err(Error::DimensionMismatch("reports have different shapes".into()));
    }
    let mut confusion = vec![vec![0usize; first.labels.len()]; first.labels.len()];
    for r in reports {
        for (row, add) in confusion.iter_mut().zip(&r.confusion) {
            for (c, a) in row.iter_mut().zip(add) {
                *c += a;
            }
        }
    }
    let acc = mean_std(&reports.iter().map(|r| r.accuracy).collect::<Vec<_>>());
    let total = mean_std(&reports.iter().map(|r| r.nonzero.total).collect::<Vec<_>>());
    let rel = optional_mean_std(reports.iter().map(|r| r.nonzero.relevant).collect());
    let nonrel = optional_mean_std(reports.iter().map(|r| r.nonzero.non_relevant).collect());
    let class = optional_mean_std(reports.iter().map(|r| r.class_features).collect());
    Ok(EvalReport {
        accuracy: acc.0,
        labels: first.labels.clone(),
        confusion,
        nonzero: FeatureCounts {
            total: total.0,
            relevant: rel.map(|v| v.0),
            non_relevant: nonrel.map(|v| v.0),
        },
        class_features: class.map(|v| v.0),
        repetitions: reports.iter().map(|r| r.repetitions).sum(),
        spread: Some(Spread {
            accuracy: acc.1,
            nonzero: FeatureCounts {
                total: total.1,
                relevant: rel.map(|v| v.1),
                non_relevant: nonrel.map(|v| v.1),
            },
            class_features: class.map(|v| v.1),
        }),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairRecord {
    pub j: usize,
    pub l: usize,
    /// `None` when one of the columns is constant.
    pub rho: Option<f64>,
    pub gap: f64,
    pub bound: f64,
    /// `bound + epsilon - gap`; negative exactly when the pair fails.
    pub slack: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupingAudit {
    pub lambda2: f64,
    pub epsilon: f64,
    pub n_samples: usize,
    pub pairs: Vec<PairRecord>,
}

impl GroupingAudit {
    pub fn passed(&self) -> usize {
        self.pairs.iter().filter(|p| p.pass).count()
    }

    pub fn all_pass(&self) -> bool {
        self.pairs.iter().all(|p| p.pass)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("j,l,rho,gap,bound,slack,pass\n");
        for p in &self.pairs {
            let rho = p.rho.map(|r| format!("{r}")).unwrap_or_default();
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                p.j + 1,
                p.l + 1,
                rho,
                p.gap,
                p.bound,
                p.slack,
                p.pass
            ));
        }
        out
    }
}

/// Audit slack used when the caller has none: `10 * tolerance * n`.
pub fn default_audit_epsilon(tolerance: f64, n_samples: usize) -> f64 {
    10.0 * tolerance * n_samples as f64
}

/// Checks `|b_j - b_l| <= (sqrt(n) / lambda2) * sqrt(2 (1 - rho_jl)) + epsilon`
/// for every feature pair of an elastic-net model.
///
/// `data` must be the centered, unit-l2-column data the model was fitted on.
pub fn grouping_audit(model: &LinearModel, data: &Dataset, lambda2: f64, epsilon: f64) -> Result<GroupingAudit> {
    if !matches!(model.penalty, PenaltySpec::ElasticNet { .. }) {
        return Err(Error::WrongPenalty);
    }
    if !(lambda2 > 0.0) || !lambda2.is_finite() {
        return Err(Error::InvalidParameter(format!("lambda2 = {lambda2} must be positive")));
    }
    if !(epsilon >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "epsilon = {epsilon} must be nonnegative"
        )));
    }
    let p = model.n_features();
    if data.n_features() != p {
        return Err(Error::DimensionMismatch(format!(
            "model has {p} features, data has {}",
            data.n_features()
        )));
    }
    let columns: Vec<Vec<f64>> = (0..p).map(|j| data.x.column(j)).collect();
    for (j, c) in columns.iter().enumerate() {
        let norm: f64 = c.iter().map(|v| v * v).sum::<f64>().sqrt();
        if (mean(c).abs() > 1e-8 || (norm - 1.0).abs() > 1e-8) && norm > 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "column {} is not centered with unit l2 norm",
                j + 1
            )));
        }
    }
    let n = data.n_samples();
    let scale = (n as f64).sqrt() / lambda2;
    let mut pairs = Vec::with_capacity(p * p.saturating_sub(1) / 2);
    for j in 0..p {
        for l in j + 1..p {
            let rho = pearson_correlation(&columns[j], &columns[l]).ok();
            let dist = match rho {
                Some(r) => (2.0 * (1.0 - r)).max(0.0).sqrt(),
                None => columns[j]
                    .iter()
                    .zip(&columns[l])
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt(),
            };
            let bound = scale * dist;
            let gap = (model.beta[j] - model.beta[l]).abs();
            let slack = bound + epsilon - gap;
            pairs.push(PairRecord {
                j,
                l,
                rho,
                gap,
                bound,
                slack,
                pass: gap <= bound + epsilon,
            });
        }
    }
    Ok(GroupingAudit {
        lambda2,
        epsilon,
        n_samples: n,
        pairs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::DenseMatrix;
    use crate::svm::{MultiClassModel, MultiClassOrigin, SparsityRule};

    fn binary(beta0: f64, beta: Vec<f64>, penalty: PenaltySpec) -> LinearModel {
        LinearModel {
            beta0,
            beta,
            penalty,
            sparsity: SparsityRule::Exact,
            scaler: None,
            report: None,
        }
    }

    fn separable() -> Dataset {
        let x = DenseMatrix::from_rows(&[vec![2.0], vec![1.0], vec![-1.0], vec![-3.0]]).unwrap();
        Dataset::new(x, vec![1, 1, -1, -1]).unwrap()
    }

    #[test]
    fn perfect_model_scores_one() {
        let m = Model::Binary(binary(0.0, vec![1.0], PenaltySpec::L2 { lambda: 1.0 }));
        let r = evaluate(&m, &separable()).unwrap();
        assert_eq!(r.accuracy, 1.0);
        assert_eq!(r.confusion, vec![vec![2, 0], vec![0, 2]]);
    }

    #[test]
    fn zero_model_predicts_positive() {
        let m = Model::Binary(binary(0.0, vec![0.0], PenaltySpec::L1 { lambda: 1.0 }));
        let r = evaluate(&m, &separable()).unwrap();
        assert_eq!(r.accuracy, 0.5);
        assert_eq!(r.confusion, vec![vec![0, 2], vec![0, 2]]);
        let total: usize = r.confusion.iter().flatten().sum();
        assert_eq!(total, 4);
    }

    #[test]
    fn empty_test_set_is_an_error() {
        let m = Model::Binary(binary(0.0, vec![1.0], PenaltySpec::L2 { lambda: 1.0 }));
        let d = separable().subset(&[]);
        assert!(evaluate(&m, &d).is_err());
    }

    #[test]
    fn multiclass_confusion_rows_match_class_counts() {
        let m = Model::MultiClass(MultiClassModel {
            intercepts: vec![0.0, 0.0, 0.0],
            coefficients: vec![vec![1.0], vec![0.0], vec![-1.0]],
            origin: MultiClassOrigin::Ova,
            penalty: PenaltySpec::L2 { lambda: 1.0 },
            sparsity: SparsityRule::Exact,
            scaler: None,
        });
        let x = DenseMatrix::from_rows(&[vec![1.0], vec![-1.0], vec![0.0], vec![2.0], vec![-2.0]]).unwrap();
        let d = Dataset::new(x, vec![1, 3, 2, 2, 3]).unwrap();
        let r = evaluate(&m, &d).unwrap();
        let rows: Vec<usize> = r.confusion.iter().map(|r| r.iter().sum()).collect();
        assert_eq!(rows, vec![1, 2, 2]);
        // x = 0 ties across all classes and goes to class 1, as does x = 2
        assert_eq!(r.confusion[1], vec![2, 0, 0]);
        assert_eq!(r.class_features, Some(2.0 / 3.0));
    }

    fn report(acc: f64) -> EvalReport {
        EvalReport {
            accuracy: acc,
            labels: vec![-1, 1],
            confusion: vec![vec![1, 0], vec![0, 1]],
            nonzero: FeatureCounts {
                total: 3.0,
                relevant: Some(2.0),
                non_relevant: Some(1.0),
            },
            class_features: None,
            repetitions: 1,
            spread: None,
        }
    }

    #[test]
    fn aggregate_two_accuracies() {
        let a = aggregate_repetitions(&[report(0.9), report(1.0)]).unwrap();
        assert!((a.accuracy - 0.95).abs() < 1e-12);
        let s = a.spread.unwrap();
        assert!((s.accuracy - 0.070_710_678_118_654_76).abs() < 1e-12);
        assert_eq!(s.nonzero.total, 0.0);
        assert_eq!(a.confusion, vec![vec![2, 0], vec![0, 2]]);
        assert_eq!(a.repetitions, 2);
    }

    #[test]
    fn aggregate_single_and_identical() {
        let a = aggregate_repetitions(&[report(0.8)]).unwrap();
        assert_eq!(a.accuracy, 0.8);
        assert_eq!(a.spread.unwrap().accuracy, 0.0);
        let b = aggregate_repetitions(&[report(0.7), report(0.7), report(0.7)]).unwrap();
        assert_eq!(b.spread.unwrap().accuracy, 0.0);
    }

    #[test]
    fn aggregate_rejects_shape_mismatch() {
        let mut r = report(0.5);
        r.nonzero.relevant = None;
        assert!(aggregate_repetitions(&[report(0.5), r]).is_err());
        assert!(aggregate_repetitions(&[]).is_err());
    }

    fn unit_l2(cols: &[Vec<f64>]) -> Dataset {
        let n = cols[0].len();
        let mut rows = vec![Vec::new(); n];
        for c in cols {
            let m = mean(c);
            let norm: f64 = c.iter().map(|v| (v - m) * (v - m)).sum::<f64>().sqrt();
            for (i, v) in c.iter().enumerate() {
                rows[i].push((v - m) / norm);
            }
        }
        let y = (0..n).map(|i| if i % 2 == 0 { 1 } else { -1 }).collect();
        Dataset::new(DenseMatrix::from_rows(&rows).unwrap(), y).unwrap()
    }

    #[test]
    fn duplicate_columns_have_zero_bound() {
        let c = vec![1.0, 2.0, 4.0, 0.5];
        let d = unit_l2(&[c.clone(), c]);
        let en = PenaltySpec::ElasticNet {
            lambda1: 0.0,
            lambda2: 1.0,
        };
        let ok = grouping_audit(&binary(0.0, vec![0.3, 0.3], en), &d, 1.0, 1e-9).unwrap();
        assert!(ok.pairs[0].bound.abs() < 1e-6);
        assert!(ok.all_pass());
        let bad = grouping_audit(&binary(0.0, vec![0.3, 0.2], en), &d, 1.0, 1e-9).unwrap();
        assert!(!bad.all_pass());
        assert!(bad.pairs[0].slack < 0.0);
    }

    #[test]
    fn bound_formula_at_rho_point_eight() {
        let n = 60.0_f64;
        let bound = n.sqrt() / 1.0 * (2.0_f64 * (1.0 - 0.8)).sqrt();
        assert!((bound - 4.898_979_485_566_356).abs() < 1e-12);
    }

    #[test]
    fn audit_requires_elastic_net() {
        let d = unit_l2(&[vec![1.0, 2.0, 3.0], vec![3.0, 1.0, 2.0]]);
        let m = binary(0.0, vec![1.0, 0.0], PenaltySpec::L1 { lambda: 1.0 });
        assert!(matches!(grouping_audit(&m, &d, 1.0, 0.0), Err(Error::WrongPenalty)));
    }

    #[test]
    fn audit_never_fails_a_loose_bound() {
        let d = unit_l2(&[vec![1.0, 2.0, 3.0, 0.0], vec![3.0, 1.0, 2.0, 5.0]]);
        let en = PenaltySpec::ElasticNet {
            lambda1: 0.0,
            lambda2: 1e-6,
        };
        let a = grouping_audit(&binary(0.0, vec![100.0, -100.0], en), &d, 1e-6, 0.0).unwrap();
        assert!(a.pairs[0].slack > 1e5);
        assert!(a.all_pass());
    }

    #[test]
    fn audit_rejects_unstandardized_data() {
        let x = DenseMatrix::from_rows(&[vec![1.0, 0.0], vec![2.0, 1.0], vec![4.0, 0.0]]).unwrap();
        let d = Dataset::new(x, vec![1, -1, 1]).unwrap();
        let en = PenaltySpec::ElasticNet {
            lambda1: 0.0,
            lambda2: 1.0,
        };
        assert!(grouping_audit(&binary(0.0, vec![0.0, 0.0], en), &d, 1.0, 0.0).is_err());
    }
}
