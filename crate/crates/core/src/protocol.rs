//! Repeated train/tune/test experiments behind the benchmark tables.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::datagen::{contaminate, gen_fourclass, FourClassSpec};
use crate::dataio::{grid_search_cv, log10_grid, split, GridSpec, SplitKind, SplitSpec};
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::matcore::{RngSeed, ScaleMode};
use crate::metrics::{aggregate_repetitions, evaluate, EvalReport};
use crate::objective::PenaltySpec;
use crate::svm::{fit, Learner, PenaltyFamily, TrainConfig};

/// Outcome of one method on one repetition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepOutcome {
    pub rep: usize,
    pub penalty: Option<PenaltySpec>,
    pub cv_accuracy: Option<f64>,
    pub report: Option<EvalReport>,
    pub failure: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkRow {
    pub method: String,
    /// Class-shift parameter for the four-class protocol.
    pub d: Option<f64>,
    /// Aggregate over the repetitions that succeeded.
    pub summary: Option<EvalReport>,
    pub reps: Vec<RepOutcome>,
}

impl BenchmarkRow {
    pub fn failures(&self) -> usize {
        self.reps.iter().filter(|r| r.failure.is_some()).count()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkTable {
    pub protocol: String,
    pub rows: Vec<BenchmarkRow>,
}

fn cell(v: Option<f64>) -> String {
    v.map(|v| format!("{v}")).unwrap_or_default()
}

impl BenchmarkTable {
    /// One line per method: means and sample standard deviations.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "protocol,d,method,reps_ok,failures,accuracy_mean,accuracy_std,error_mean,error_std,\
             nonzero_mean,nonzero_std,relevant_mean,relevant_std,non_relevant_mean,non_relevant_std,\
             class_features_mean,class_features_std\n",
        );
        for r in &self.rows {
            let s = r.summary.as_ref();
            let sp = s.and_then(|s| s.spread);
            let fields = [
                self.protocol.clone(),
                cell(r.d),
                r.method.clone(),
                s.map(|s| s.repetitions).unwrap_or(0).to_string(),
                r.failures().to_string(),
                cell(s.map(|s| s.accuracy)),
                cell(sp.map(|v| v.accuracy)),
                cell(s.map(|s| s.error_rate())),
                cell(sp.map(|v| v.accuracy)),
                cell(s.map(|s| s.nonzero.total)),
                cell(sp.map(|v| v.nonzero.total)),
                cell(s.and_then(|s| s.nonzero.relevant)),
                cell(sp.and_then(|v| v.nonzero.relevant)),
                cell(s.and_then(|s| s.nonzero.non_relevant)),
                cell(sp.and_then(|v| v.nonzero.non_relevant)),
                cell(s.and_then(|s| s.class_features)),
                cell(sp.and_then(|v| v.class_features)),
            ];
            out.push_str(&fields.join(","));
            out.push('\n');
        }
        out
    }
}

fn run_rep(
    learner: Learner,
    rep: usize,
    train: &Dataset,
    test: &Dataset,
    grid: &GridSpec,
    cv: &SplitSpec,
    config: &TrainConfig,
) -> RepOutcome {
    let outcome = grid_search_cv(train, learner, grid, cv, config).and_then(|res| {
        let model = fit(learner, train, &res.best_penalty, config)?;
        Ok((res, evaluate(&model, test)?))
    });
    match outcome {
        Ok((res, report)) => RepOutcome {
            rep,
            penalty: Some(res.best_penalty),
            cv_accuracy: Some(res.best_accuracy),
            report: Some(report),
            failure: None,
        },
        Err(e) => RepOutcome {
            rep,
            penalty: None,
            cv_accuracy: None,
            report: None,
            failure: Some(e.to_string()),
        },
    }
}

fn summarize(method: String, d: Option<f64>, reps: Vec<RepOutcome>) -> BenchmarkRow {
    let ok: Vec<EvalReport> = reps.iter().filter_map(|r| r.report.clone()).collect();
    BenchmarkRow {
        method,
        d,
        summary: aggregate_repetitions(&ok).ok(),
        reps,
    }
}

/// Holdout / k-fold protocol on a binary dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table1Config {
    pub repetitions: usize,
    pub test_fraction: f64,
    pub folds: usize,
    /// Number of N(0,1) noise columns appended before splitting.
    pub contaminate: Option<usize>,
    pub families: Vec<PenaltyFamily>,
    pub grid: GridSpec,
    pub train: TrainConfig,
    pub seed: u64,
}

impl Table1Config {
    /// Ten repetitions of a stratified 2:1 split, ten-fold CV on the training
    /// part, the default grids, unit-variance scaling fitted on training rows
    /// and exact L1 via the simplex.
    pub fn new(n_features: usize, contaminate: Option<usize>, seed: u64) -> Self {
        let p = n_features + contaminate.unwrap_or(0);
        Self {
            repetitions: 10,
            test_fraction: 1.0 / 3.0,
            folds: 10,
            contaminate,
            families: PenaltyFamily::ALL.to_vec(),
            grid: GridSpec::default_for(p),
            train: TrainConfig {
                exact_l1: true,
                scaling: Some(ScaleMode::UnitVariance),
                ..Default::default()
            },
            seed,
        }
    }
}

/// Repetition `r` draws its contamination, split and folds from
/// `seed.derive(r)`, so each repetition is independent of the others and of
/// the thread count.
pub fn run_table1(data: &Dataset, cfg: &Table1Config) -> Result<BenchmarkTable> {
    data.check_binary()?;
    if cfg.repetitions == 0 {
        return Err(Error::InvalidParameter("need at least one repetition".into()));
    }
    let prepared: Vec<Result<(Dataset, Dataset, SplitSpec)>> = (0..cfg.repetitions)
        .map(|r| {
            let seed = RngSeed(cfg.seed).derive(r as u64);
            let d = match cfg.contaminate {
                Some(q) => contaminate(data, q, seed.derive(0).0)?,
                None => data.clone(),
            };
            let holdout = SplitSpec {
                kind: SplitKind::Holdout {
                    test_fraction: cfg.test_fraction,
                },
                seed: seed.derive(1).0,
                stratified: true,
            };
            let fold = split(&d, &holdout)?.remove(0);
            let cv = SplitSpec {
                kind: SplitKind::KFold { k: cfg.folds },
                seed: seed.derive(2).0,
                stratified: true,
            };
            Ok((d.subset(&fold.train), d.subset(&fold.test), cv))
        })
        .collect();
    let rows = cfg
        .families
        .iter()
        .map(|&family| {
            let learner = Learner::Binary(family);
            let reps: Vec<RepOutcome> = prepared
                .par_iter()
                .enumerate()
                .map(|(r, prep)| match prep {
                    Ok((train, test, cv)) => run_rep(learner, r, train, test, &cfg.grid, cv, &cfg.train),
                    Err(e) => RepOutcome {
                        rep: r,
                        penalty: None,
                        cv_accuracy: None,
                        report: None,
                        failure: Some(e.to_string()),
                    },
                })
                .collect();
            summarize(learner.name(), None, reps)
        })
        .collect();
    Ok(BenchmarkTable {
        protocol: "table1".into(),
        rows,
    })
}

/// Four-class synthetic protocol with leave-one-out tuning.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table2Config {
    pub repetitions: usize,
    pub d_values: Vec<f64>,
    pub n_samples: usize,
    pub n_features: usize,
    pub learners: Vec<Learner>,
    pub grid: GridSpec,
    pub train: TrainConfig,
    pub seed: u64,
}

impl Table2Config {
    /// All learners, 100 x 100 data and no rescaling. Weights run over half
    /// decades of `[1e-4, 1e4]` (17 values); the k grid is the default one.
    pub fn new(d_values: Vec<f64>, repetitions: usize, seed: u64) -> Self {
        let mut learners = vec![Learner::L1Msvm];
        learners.extend(PenaltyFamily::ALL.iter().map(|&f| Learner::Ova(f)));
        Self {
            repetitions,
            d_values,
            n_samples: 100,
            n_features: 100,
            learners,
            grid: GridSpec {
                lambda: log10_grid(-4, 4, 2),
                lambda1: log10_grid(-4, 4, 2),
                lambda2: log10_grid(-4, 4, 2),
                ..GridSpec::default_for(100)
            },
            train: TrainConfig::default(),
            seed,
        }
    }
}

pub fn run_table2(cfg: &Table2Config) -> Result<BenchmarkTable> {
    if cfg.repetitions == 0 {
        return Err(Error::InvalidParameter("need at least one repetition".into()));
    }
    let mut rows = Vec::new();
    for (di, &d) in cfg.d_values.iter().enumerate() {
        let data: Vec<(Dataset, Dataset)> = (0..cfg.repetitions)
            .map(|r| {
                let spec = FourClassSpec {
                    n_samples: cfg.n_samples,
                    n_features: cfg.n_features,
                    d,
                    seed: RngSeed(cfg.seed).derive(di as u64).derive(r as u64).0,
                };
                Ok((gen_fourclass(&spec)?, gen_fourclass(&spec.test_spec())?))
            })
            .collect::<Result<_>>()?;
        let cv = SplitSpec {
            kind: SplitKind::Loo,
            seed: 0,
            stratified: false,
        };
        for &learner in &cfg.learners {
            let reps: Vec<RepOutcome> = data
                .par_iter()
                .enumerate()
                .map(|(r, (train, test))| run_rep(learner, r, train, test, &cfg.grid, &cv, &cfg.train))
                .collect();
            rows.push(summarize(learner.name(), Some(d), reps));
        }
    }
    Ok(BenchmarkTable {
        protocol: "table2".into(),
        rows,
    })
}
