//! Plain-text model files.
//!
//! One `key = value` pair per line; vectors are space-separated. Floats are
//! written with Rust's shortest round-trip formatting, so a save/load cycle
//! reproduces every finite value bit for bit. Blank lines and lines starting
//! with `#` are ignored.
//!
//! ```text
//! format = regsvm-model/1
//! kind = binary            # or multiclass
//! penalty = elasticnet     # l2 | l1 | elasticnet | ksupport
//! lambda1 = 0.5            # lambda, lambda1, lambda2, k as the penalty needs
//! lambda2 = 1
//! sparsity = threshold     # or exact
//! features = 3
//! beta0 = 0.25             # binary only
//! beta = 1 0 -0.5          # binary only
//! origin = ova             # multiclass only: ova | l1msvm
//! classes = 2              # multiclass only
//! intercepts = 0.1 -0.1    # multiclass only
//! coef.1 = 1 0 0           # multiclass only, one line per class
//! scale_mode = unit_l2     # optional standardizer
//! scale_means = ...
//! scale_scales = ...
//! ```

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::matcore::{ScaleMode, Standardizer};
use crate::objective::PenaltySpec;

use super::{LinearModel, MultiClassModel, MultiClassOrigin, SparsityRule};

pub const FORMAT_TAG: &str = "regsvm-model/1";

#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    Binary(LinearModel),
    MultiClass(MultiClassModel),
}

fn join(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x}")).collect::<Vec<_>>().join(" ")
}

fn write_penalty(out: &mut String, p: &PenaltySpec) {
    let _ = writeln!(out, "penalty = {}", p.name());
    match p {
        PenaltySpec::L2 { lambda } | PenaltySpec::L1 { lambda } => {
            let _ = writeln!(out, "lambda = {lambda}");
        }
        PenaltySpec::ElasticNet { lambda1, lambda2 } => {
            let _ = writeln!(out, "lambda1 = {lambda1}\nlambda2 = {lambda2}");
        }
        PenaltySpec::KSupport { lambda, k } => {
            let _ = writeln!(out, "lambda = {lambda}\nk = {k}");
        }
    }
}

fn write_common(out: &mut String, kind: &str, p: &PenaltySpec, s: SparsityRule, features: usize) {
    let _ = writeln!(out, "format = {FORMAT_TAG}\nkind = {kind}");
    write_penalty(out, p);
    let sparsity = match s {
        SparsityRule::Threshold => "threshold",
        SparsityRule::Exact => "exact",
    };
    let _ = writeln!(out, "sparsity = {sparsity}\nfeatures = {features}");
}

fn write_scaler(out: &mut String, s: &Option<Standardizer>) {
    if let Some(s) = s {
        let mode = match s.mode {
            ScaleMode::UnitVariance => "unit_variance",
            ScaleMode::UnitL2 => "unit_l2",
        };
        let _ = writeln!(out, "scale_mode = {mode}");
        let _ = writeln!(out, "scale_means = {}", join(&s.means));
        let _ = writeln!(out, "scale_scales = {}", join(&s.scales));
    }
}

impl Model {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        match self {
            Model::Binary(m) => {
                write_common(&mut out, "binary", &m.penalty, m.sparsity, m.n_features());
                let _ = writeln!(out, "beta0 = {}", m.beta0);
                let _ = writeln!(out, "beta = {}", join(&m.beta));
                write_scaler(&mut out, &m.scaler);
            }
            Model::MultiClass(m) => {
                write_common(&mut out, "multiclass", &m.penalty, m.sparsity, m.n_features());
                let origin = match m.origin {
                    MultiClassOrigin::Ova => "ova",
                    MultiClassOrigin::L1Msvm => "l1msvm",
                };
                let _ = writeln!(out, "origin = {origin}\nclasses = {}", m.num_classes());
                let _ = writeln!(out, "intercepts = {}", join(&m.intercepts));
                for (c, b) in m.coefficients.iter().enumerate() {
                    let _ = writeln!(out, "coef.{} = {}", c + 1, join(b));
                }
                write_scaler(&mut out, &m.scaler);
            }
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Model> {
        let fields = Fields::read(text)?;
        if fields.str("format")? != FORMAT_TAG {
            return Err(fields.err("format", "unsupported model format"));
        }
        let penalty = fields.penalty()?;
        let sparsity = match fields.str("sparsity")? {
            "threshold" => SparsityRule::Threshold,
            "exact" => SparsityRule::Exact,
            _ => return Err(fields.err("sparsity", "expected threshold or exact")),
        };
        let p: usize = fields.parse("features")?;
        let scaler = fields.scaler(p)?;
        match fields.str("kind")? {
            "binary" => Ok(Model::Binary(LinearModel {
                beta0: fields.parse("beta0")?,
                beta: fields.vector("beta", p)?,
                penalty,
                sparsity,
                scaler,
                report: None,
            })),
            "multiclass" => {
                let origin = match fields.str("origin")? {
                    "ova" => MultiClassOrigin::Ova,
                    "l1msvm" => MultiClassOrigin::L1Msvm,
                    _ => return Err(fields.err("origin", "expected ova or l1msvm")),
                };
                let k: usize = fields.parse("classes")?;
                let coefficients = (1..=k)
                    .map(|c| fields.vector(&format!("coef.{c}"), p))
                    .collect::<Result<Vec<_>>>()?;
                Ok(Model::MultiClass(MultiClassModel {
                    intercepts: fields.vector("intercepts", k)?,
                    coefficients,
                    origin,
                    penalty,
                    sparsity,
                    scaler,
                }))
            }
            _ => Err(fields.err("kind", "expected binary or multiclass")),
        }
    }
}

struct Fields<'a> {
    map: BTreeMap<&'a str, (usize, &'a str)>,
}

impl<'a> Fields<'a> {
    fn read(text: &'a str) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(Error::Parse {
                    line: i + 1,
                    msg: "expected `key = value`".into(),
                });
            };
            if map.insert(k.trim(), (i + 1, v.trim())).is_some() {
                return Err(Error::Parse {
                    line: i + 1,
                    msg: format!("duplicate key `{}`", k.trim()),
                });
            }
        }
        Ok(Self { map })
    }

    fn err(&self, key: &str, msg: &str) -> Error {
        Error::Parse {
            line: self.map.get(key).map_or(0, |e| e.0),
            msg: format!("`{key}`: {msg}"),
        }
    }

    fn has(&self, key: &str) -> bool {
        self.map.contains_key(key)
    }

    fn str(&self, key: &str) -> Result<&'a str> {
        self.map.get(key).map(|e| e.1).ok_or_else(|| Error::Parse {
            line: 0,
            msg: format!("missing key `{key}`"),
        })
    }

    fn parse<T: std::str::FromStr>(&self, key: &str) -> Result<T> {
        self.str(key)?.parse().map_err(|_| self.err(key, "malformed value"))
    }

    fn vector(&self, key: &str, len: usize) -> Result<Vec<f64>> {
        let v = self
            .str(key)?
            .split_whitespace()
            .map(|t| t.parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|_| self.err(key, "malformed number"))?;
        if v.len() != len {
            return Err(self.err(key, &format!("expected {len} values, found {}", v.len())));
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(self.err(key, "non-finite value"));
        }
        Ok(v)
    }

    fn penalty(&self) -> Result<PenaltySpec> {
        let p = match self.str("penalty")? {
            "l2" => PenaltySpec::L2 {
                lambda: self.parse("lambda")?,
            },
            "l1" => PenaltySpec::L1 {
                lambda: self.parse("lambda")?,
            },
            "elasticnet" => PenaltySpec::ElasticNet {
                lambda1: self.parse("lambda1")?,
                lambda2: self.parse("lambda2")?,
            },
            "ksupport" => PenaltySpec::KSupport {
                lambda: self.parse("lambda")?,
                k: self.parse("k")?,
            },
            _ => return Err(self.err("penalty", "unknown penalty")),
        };
        Ok(p)
    }

    fn scaler(&self, p: usize) -> Result<Option<Standardizer>> {
        if !self.has("scale_mode") {
            return Ok(None);
        }
        let mode = match self.str("scale_mode")? {
            "unit_variance" => ScaleMode::UnitVariance,
            "unit_l2" => ScaleMode::UnitL2,
            _ => return Err(self.err("scale_mode", "expected unit_variance or unit_l2")),
        };
        Ok(Some(Standardizer {
            mode,
            means: self.vector("scale_means", p)?,
            scales: self.vector("scale_scales", p)?,
        }))
    }
}
