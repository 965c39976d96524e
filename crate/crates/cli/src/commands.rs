use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use log::{info, warn};
use serde_json::{json, Value};

use regsvm_core::datagen::{contaminate, gen_fourclass, gen_grouped_binary, FourClassSpec, GroupedBinarySpec};
use regsvm_core::dataio::{
    default_k_grid, grid_search_cv, load_delimited, load_sparse_text, log10_grid, penalty_columns, save_delimited,
};
use regsvm_core::lp::{PivotRule, SimplexOptions};
use regsvm_core::metrics::{default_audit_epsilon, evaluate, grouping_audit};
use regsvm_core::protocol::{run_table1, run_table2, BenchmarkTable, Table1Config, Table2Config};
use regsvm_core::svm::{fit, log_grid_descending, regularization_path};
use regsvm_core::{
    Dataset, DelimitedOptions, GridSpec, Learner, Model, PenaltyFamily, PenaltySpec, ScaleMode, SolverConfig,
    SplitKind, SplitSpec, TrainConfig,
};

use crate::args::*;
use crate::error::{arg_err, with_path, CliError};

/// Result of a command: files written and a summary for the manifest.
pub struct Outcome {
    pub outputs: Vec<String>,
    pub warnings: Vec<String>,
    pub summary: Value,
}

pub struct Globals<'a> {
    pub seed: u64,
    pub tolerance: f64,
    pub max_iters: usize,
    pub out_dir: &'a Path,
}

impl Globals<'_> {
    fn path(&self, name: &str) -> PathBuf {
        self.out_dir.join(name)
    }

    fn solver(&self) -> SolverConfig {
        SolverConfig {
            max_iterations: self.max_iters,
            tolerance: self.tolerance,
            seed: self.seed,
            ..SolverConfig::default()
        }
    }

    fn train_config(&self, s: &SolverArgs) -> TrainConfig {
        TrainConfig {
            solver: self.solver(),
            exact_l1: s.exact_lp,
            scaling: scale_mode(s.scale),
            simplex: SimplexOptions {
                rule: match s.pricing {
                    Pricing::Bland => PivotRule::Bland,
                    Pricing::Dantzig => PivotRule::Dantzig,
                    Pricing::SteepestEdge => PivotRule::SteepestEdge,
                },
                max_iterations: None,
            },
        }
    }
}

fn scale_mode(s: Scaling) -> Option<ScaleMode> {
    match s {
        Scaling::None => None,
        Scaling::UnitVariance => Some(ScaleMode::UnitVariance),
        Scaling::UnitL2 => Some(ScaleMode::UnitL2),
    }
}

fn family(f: Family) -> PenaltyFamily {
    match f {
        Family::L2 => PenaltyFamily::L2,
        Family::L1 => PenaltyFamily::L1,
        Family::Elasticnet => PenaltyFamily::ElasticNet,
        Family::Ksupport => PenaltyFamily::KSupport,
    }
}

fn learner(kind: LearnerKind, f: Family) -> Result<Learner, CliError> {
    Ok(match kind {
        LearnerKind::Binary => Learner::Binary(family(f)),
        LearnerKind::Ova => Learner::Ova(family(f)),
        LearnerKind::L1msvm if f == Family::L1 => Learner::L1Msvm,
        LearnerKind::L1msvm => return Err(arg_err("the multi-class L1 SVM takes --penalty l1")),
    })
}

fn load_data(a: &DataArgs) -> Result<Dataset, CliError> {
    let mut d = match a.format {
        DataFormat::Csv => {
            if !a.delimiter.is_ascii() {
                return Err(arg_err("delimiter must be a single ASCII character"));
            }
            let opts = DelimitedOptions {
                label_column: a.label_column,
                delimiter: a.delimiter as u8,
                header: !a.no_header,
                positive_label: a.positive_label.clone(),
            };
            load_delimited(&a.data, &opts).map_err(|e| with_path(e, &a.data))?
        }
        DataFormat::Sparse => load_sparse_text(&a.data, None).map_err(|e| with_path(e, &a.data))?,
    };
    if let Some(m) = a.relevant {
        if m > d.n_features() {
            return Err(arg_err(format!(
                "--relevant {m} exceeds the {} features",
                d.n_features()
            )));
        }
        d.relevant_features = Some(m);
    }
    Ok(d)
}

fn write_file(g: &Globals, name: &str, text: &str, outputs: &mut Vec<String>) -> Result<(), CliError> {
    let path = g.path(name);
    std::fs::write(&path, text).map_err(|e| with_path(e, &path))?;
    outputs.push(name.to_string());
    Ok(())
}

fn need(v: Option<f64>, flag: &str) -> Result<f64, CliError> {
    v.ok_or_else(|| arg_err(format!("{flag} is required for this penalty")))
}

fn penalty_from_flags(a: &TrainArgs) -> Result<PenaltySpec, CliError> {
    Ok(match a.penalty {
        Family::L2 => PenaltySpec::L2 {
            lambda: need(a.lambda, "--lambda")?,
        },
        Family::L1 => PenaltySpec::L1 {
            lambda: need(a.lambda, "--lambda")?,
        },
        Family::Elasticnet => PenaltySpec::ElasticNet {
            lambda1: need(a.lambda1, "--lambda1")?,
            lambda2: need(a.lambda2, "--lambda2")?,
        },
        Family::Ksupport => PenaltySpec::KSupport {
            lambda: need(a.lambda, "--lambda")?,
            k: a.k
                .ok_or_else(|| arg_err("--k is required for the k-support penalty"))?,
        },
    })
}

fn grid_from_flags(a: &GridArgs, n_features: usize) -> GridSpec {
    let weights = |v: &Vec<f64>| {
        if v.is_empty() {
            log10_grid(-4, 4, a.per_decade)
        } else {
            v.clone()
        }
    };
    GridSpec {
        lambda: weights(&a.lambdas),
        lambda1: weights(&a.lambda1s),
        lambda2: weights(&a.lambda2s),
        k: if a.ks.is_empty() {
            default_k_grid(n_features)
        } else {
            a.ks.clone()
        },
    }
}

pub fn synth(g: &Globals, a: &SynthArgs) -> Result<Outcome, CliError> {
    let mut outputs = Vec::new();
    let (train, test, default_name) = match a.kind {
        SynthKind::Grouped => {
            let spec = GroupedBinarySpec {
                n_per_class: a.n_per_class,
                n_features: a.features.unwrap_or(30),
                block: a.block,
                rho: a.rho,
                mean: a.mean,
                seed: g.seed,
            };
            spec.validate()?;
            if a.with_test {
                return Err(arg_err("--with-test applies to fourclass data only"));
            }
            (gen_grouped_binary(&spec)?, None, "grouped.csv")
        }
        SynthKind::Fourclass => {
            let spec = FourClassSpec {
                n_samples: a.samples,
                n_features: a.features.unwrap_or(100),
                d: a.d,
                seed: g.seed,
            };
            spec.validate()?;
            let test = if a.with_test {
                Some(gen_fourclass(&spec.test_spec())?)
            } else {
                None
            };
            (gen_fourclass(&spec)?, test, "fourclass.csv")
        }
    };
    let noise_seed = regsvm_core::RngSeed(g.seed).derive(0xc0).0;
    let contaminated = |d: Dataset, salt: u64| -> Result<Dataset, CliError> {
        Ok(match a.contaminate {
            Some(q) => contaminate(&d, q, noise_seed ^ salt)?,
            None => d,
        })
    };
    let train = contaminated(train, 0)?;
    let name = a.out.clone().unwrap_or_else(|| default_name.to_string());
    save_delimited(&train, &g.path(&name))?;
    outputs.push(name.clone());
    if let Some(test) = test {
        let test = contaminated(test, 1)?;
        let stem = name.strip_suffix(".csv").unwrap_or(&name);
        let test_name = format!("{stem}_test.csv");
        save_delimited(&test, &g.path(&test_name))?;
        outputs.push(test_name);
    }
    Ok(Outcome {
        outputs,
        warnings: Vec::new(),
        summary: json!({
            "rows": train.n_samples(),
            "features": train.n_features(),
            "relevant_features": train.relevant_features,
        }),
    })
}

pub fn train(g: &Globals, a: &TrainArgs) -> Result<Outcome, CliError> {
    let penalty = penalty_from_flags(a)?;
    let learner = learner(a.learner, a.penalty)?;
    let mut config = g.train_config(&a.solver);
    if a.audit_grouping {
        if learner != Learner::Binary(PenaltyFamily::ElasticNet) {
            return Err(arg_err("--audit-grouping needs a binary elastic-net model"));
        }
        match a.solver.scale {
            Scaling::None | Scaling::UnitL2 => config.scaling = Some(ScaleMode::UnitL2),
            Scaling::UnitVariance => return Err(arg_err("--audit-grouping needs unit-l2 scaling")),
        }
    }
    let data = load_data(&a.data)?;
    let model = fit(learner, &data, &penalty, &config)?;
    let mut outputs = Vec::new();
    write_file(g, &a.model_out, &model.to_text(), &mut outputs)?;
    let training = evaluate(&model, &data)?;
    let mut summary = json!({
        "learner": learner.name(),
        "penalty": penalty,
        "training_accuracy": training.accuracy,
        "nonzero": model.nonzero(data.relevant_features),
    });
    if let Model::Binary(m) = &model {
        summary["solve_report"] = serde_json::to_value(&m.report)?;
    }
    if a.audit_grouping {
        let Model::Binary(m) = &model else {
            unreachable!("checked above")
        };
        let scaler = m.scaler.as_ref().expect("unit-l2 scaling was forced");
        let standardized = data.with_features(scaler.transform(&data.x)?)?;
        let PenaltySpec::ElasticNet { lambda2, .. } = penalty else {
            unreachable!()
        };
        let eps = a
            .epsilon
            .unwrap_or_else(|| default_audit_epsilon(g.tolerance, data.n_samples()));
        let audit = grouping_audit(m, &standardized, lambda2, eps)?;
        write_file(g, "grouping_audit.csv", &audit.to_csv(), &mut outputs)?;
        summary["grouping_audit"] = json!({
            "pairs": audit.pairs.len(),
            "passed": audit.passed(),
            "epsilon": eps,
        });
    }
    let mut report = serde_json::to_string_pretty(&summary)?;
    report.push('\n');
    write_file(g, "report.json", &report, &mut outputs)?;
    Ok(Outcome {
        outputs,
        warnings: Vec::new(),
        summary,
    })
}

pub fn cv(g: &Globals, a: &CvArgs) -> Result<Outcome, CliError> {
    let learner = learner(a.learner, a.penalty)?;
    let data = load_data(&a.data)?;
    let kind = match (a.folds, a.loo, a.holdout) {
        (None, true, None) => SplitKind::Loo,
        (None, false, Some(f)) => SplitKind::Holdout { test_fraction: f },
        (Some(k), false, None) => SplitKind::KFold { k },
        (None, false, None) => SplitKind::KFold { k: 10 },
        _ => return Err(arg_err("choose one of --folds, --loo, --holdout")),
    };
    let split = SplitSpec {
        kind,
        seed: g.seed,
        stratified: a.stratified,
    };
    let grid = grid_from_flags(&a.grid, data.n_features());
    let res = grid_search_cv(&data, learner, &grid, &split, &g.train_config(&a.solver))?;
    let mut outputs = Vec::new();
    write_file(g, "cv_scores.csv", &res.table_csv(), &mut outputs)?;
    let mut best = String::from("penalty,lambda,lambda1,lambda2,k,cv_accuracy\n");
    let _ = writeln!(
        best,
        "{},{},{}",
        res.best_penalty.name(),
        penalty_columns(&res.best_penalty),
        res.best_accuracy
    );
    write_file(g, "best.csv", &best, &mut outputs)?;
    let failed = res.scores.iter().filter(|s| s.failure.is_some()).count();
    let warnings = if failed > 0 {
        vec![format!("{failed} grid points failed; see cv_scores.csv")]
    } else {
        Vec::new()
    };
    Ok(Outcome {
        outputs,
        warnings,
        summary: json!({
            "learner": learner.name(),
            "folds": res.n_folds,
            "grid_points": res.scores.len(),
            "best_index": res.best,
            "best_penalty": res.best_penalty,
            "best_accuracy": res.best_accuracy,
        }),
    })
}

pub fn path(g: &Globals, a: &PathArgs) -> Result<Outcome, CliError> {
    let data = load_data(&a.data)?;
    let mut warnings = Vec::new();
    let mut grid = if a.lambdas.is_empty() {
        if a.points == 0 || !(a.lambda_min > 0.0) || !(a.lambda_max >= a.lambda_min) {
            return Err(arg_err("need --points >= 1 and 0 < --lambda-min <= --lambda-max"));
        }
        log_grid_descending(a.lambda_max, a.lambda_min, a.points)
    } else {
        a.lambdas.clone()
    };
    if grid.windows(2).any(|w| w[1] > w[0]) {
        grid.sort_by(|x, y| y.total_cmp(x));
        warnings.push("grid was not in descending order; sorted descending".to_string());
        warn!("{}", warnings[0]);
    }
    let template = match a.penalty {
        Family::L2 => PenaltySpec::L2 { lambda: 1.0 },
        Family::L1 => PenaltySpec::L1 { lambda: 1.0 },
        Family::Elasticnet => PenaltySpec::ElasticNet {
            lambda1: 1.0,
            lambda2: a.lambda2,
        },
        Family::Ksupport => PenaltySpec::KSupport {
            lambda: 1.0,
            k: a.k.ok_or_else(|| arg_err("--k is required for a k-support path"))?,
        },
    };
    let rows = regularization_path(&data, &template, &grid, &g.train_config(&a.solver))?;
    let mut out = String::from("lambda,beta0");
    for j in 1..=data.n_features() {
        let _ = write!(out, ",beta{j}");
    }
    out.push_str(",nonzero\n");
    for r in &rows {
        let _ = write!(out, "{},{}", r.lambda, r.beta0);
        for b in &r.beta {
            let _ = write!(out, ",{b}");
        }
        let _ = writeln!(out, ",{}", r.nonzero);
    }
    let mut outputs = Vec::new();
    write_file(g, &a.out, &out, &mut outputs)?;
    Ok(Outcome {
        outputs,
        warnings,
        summary: json!({ "rows": rows.len(), "grid": grid }),
    })
}

fn parse_methods(names: &[String], protocol: Protocol) -> Result<Option<Vec<Learner>>, CliError> {
    if names.is_empty() {
        return Ok(None);
    }
    let mut out = Vec::new();
    for n in names {
        let (ova, base) = match n.strip_prefix("ova_") {
            Some(b) => (true, b),
            None => (false, n.as_str()),
        };
        let fam = match base {
            "l2" => PenaltyFamily::L2,
            "l1" => PenaltyFamily::L1,
            "elasticnet" => PenaltyFamily::ElasticNet,
            "ksupport" => PenaltyFamily::KSupport,
            "l1msvm" if !ova && protocol == Protocol::Table2 => {
                out.push(Learner::L1Msvm);
                continue;
            }
            _ => return Err(arg_err(format!("unknown method {n:?}"))),
        };
        out.push(match (protocol, ova) {
            (Protocol::Table1, false) => Learner::Binary(fam),
            (Protocol::Table2, _) => Learner::Ova(fam),
            (Protocol::Table1, true) => return Err(arg_err("table1 runs binary methods only")),
        });
    }
    Ok(Some(out))
}

fn reps_csv(table: &BenchmarkTable) -> String {
    let mut out = String::from(
        "method,d,rep,penalty,lambda,lambda1,lambda2,k,cv_accuracy,test_accuracy,nonzero,relevant,non_relevant,class_features,failure\n",
    );
    let opt = |v: Option<f64>| v.map(|v| format!("{v}")).unwrap_or_default();
    for row in &table.rows {
        for r in &row.reps {
            let (name, cols) = match &r.penalty {
                Some(p) => (p.name().to_string(), penalty_columns(p)),
                None => (String::new(), ",,,".to_string()),
            };
            let rep = r.report.as_ref();
            let _ = writeln!(
                out,
                "{},{},{},{name},{cols},{},{},{},{},{},{},{}",
                row.method,
                opt(row.d),
                r.rep,
                opt(r.cv_accuracy),
                opt(rep.map(|x| x.accuracy)),
                opt(rep.map(|x| x.nonzero.total)),
                opt(rep.and_then(|x| x.nonzero.relevant)),
                opt(rep.and_then(|x| x.nonzero.non_relevant)),
                opt(rep.and_then(|x| x.class_features)),
                r.failure.as_deref().unwrap_or("").replace([',', '\n'], ";"),
            );
        }
    }
    out
}

pub fn benchmark(g: &Globals, a: &BenchmarkArgs) -> Result<Outcome, CliError> {
    if a.reps == 0 {
        return Err(arg_err("--reps must be at least 1"));
    }
    let methods = parse_methods(&a.methods, a.protocol)?;
    let solver = g.solver();
    let table = match a.protocol {
        Protocol::Table1 => {
            let data = match (&a.data, a.grouped) {
                (Some(path), false) => load_delimited(
                    path,
                    &DelimitedOptions {
                        label_column: a.label_column,
                        positive_label: a.positive_label.clone(),
                        ..DelimitedOptions::default()
                    },
                )
                .map_err(|e| with_path(e, path))?,
                (None, true) => gen_grouped_binary(&GroupedBinarySpec {
                    seed: g.seed,
                    ..GroupedBinarySpec::default()
                })?,
                _ => return Err(arg_err("table1 needs exactly one of --data or --grouped")),
            };
            let mut cfg = Table1Config::new(data.n_features(), a.contaminate, g.seed);
            cfg.repetitions = a.reps;
            cfg.folds = a.folds;
            cfg.test_fraction = a.test_fraction;
            cfg.train.solver = solver;
            cfg.grid = grid_from_flags(&a.grid, data.n_features() + a.contaminate.unwrap_or(0));
            if let Some(m) = methods {
                cfg.families = m.iter().map(|l| l.family()).collect();
            }
            info!(
                "table1: {} rows x {} features, {} repetitions",
                data.n_samples(),
                data.n_features(),
                a.reps
            );
            run_table1(&data, &cfg)?
        }
        Protocol::Table2 => {
            if a.data.is_some() || a.grouped || a.contaminate.is_some() {
                return Err(arg_err(
                    "table2 generates its own data; drop --data/--grouped/--contaminate",
                ));
            }
            let mut cfg = Table2Config::new(a.d.clone(), a.reps, g.seed);
            cfg.train.solver = solver;
            let mut grid_args = GridArgs {
                per_decade: a.grid.per_decade.max(2),
                ..GridArgs::default()
            };
            grid_args.lambdas.clone_from(&a.grid.lambdas);
            grid_args.lambda1s.clone_from(&a.grid.lambda1s);
            grid_args.lambda2s.clone_from(&a.grid.lambda2s);
            grid_args.ks.clone_from(&a.grid.ks);
            cfg.grid = grid_from_flags(&grid_args, cfg.n_features);
            if let Some(m) = methods {
                cfg.learners = m;
            }
            info!("table2: d = {:?}, {} repetitions", a.d, a.reps);
            run_table2(&cfg)?
        }
    };
    let mut outputs = Vec::new();
    write_file(g, "benchmark.csv", &table.to_csv(), &mut outputs)?;
    write_file(g, "benchmark_reps.csv", &reps_csv(&table), &mut outputs)?;
    let warnings: Vec<String> = table
        .rows
        .iter()
        .filter(|r| r.failures() > 0)
        .map(|r| format!("{}: {} of {} repetitions failed", r.method, r.failures(), r.reps.len()))
        .collect();
    let summary: Vec<Value> = table
        .rows
        .iter()
        .map(|r| {
            json!({
                "method": r.method,
                "d": r.d,
                "accuracy": r.summary.as_ref().map(|s| s.accuracy),
                "nonzero": r.summary.as_ref().map(|s| s.nonzero.total),
                "failures": r.failures(),
            })
        })
        .collect();
    Ok(Outcome {
        outputs,
        warnings,
        summary: Value::Array(summary),
    })
}
