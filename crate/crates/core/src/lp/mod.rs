//! Dense-tableau simplex solver and the compilers that turn l1-penalized
//! hinge problems into linear programs.

mod compile;
mod simplex;

pub use compile::{
    binary_l1_svm_to_lp, extract_binary_model, extract_multiclass_model, l1msvm_to_lp, BinaryLpLayout,
    MulticlassLpLayout,
};
pub use simplex::{simplex_solve, simplex_solve_with, PivotRule, SimplexOptions};

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matcore::DenseMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RowSense {
    Le,
    Eq,
    Ge,
}

impl RowSense {
    fn symbol(self) -> &'static str {
        match self {
            RowSense::Le => "<=",
            RowSense::Eq => "=",
            RowSense::Ge => ">=",
        }
    }
}

/// `min c.z  s.t.  A z (<=|=|>=) b,  z >= 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct StandardFormLP {
    pub c: Vec<f64>,
    pub a: DenseMatrix,
    pub b: Vec<f64>,
    pub senses: Vec<RowSense>,
    /// Optional variable names, used only by the text dump.
    pub names: Option<Vec<String>>,
}

impl StandardFormLP {
    pub fn new(c: Vec<f64>, a: DenseMatrix, b: Vec<f64>, senses: Vec<RowSense>) -> Result<Self> {
        let lp = Self {
            c,
            a,
            b,
            senses,
            names: None,
        };
        lp.validate()?;
        Ok(lp)
    }

    pub fn n_vars(&self) -> usize {
        self.c.len()
    }

    pub fn n_rows(&self) -> usize {
        self.b.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.a.cols() != self.c.len() || self.a.rows() != self.b.len() || self.senses.len() != self.b.len() {
            return Err(Error::DimensionMismatch(format!(
                "LP with {} costs, {}x{} matrix, {} rhs, {} senses",
                self.c.len(),
                self.a.rows(),
                self.a.cols(),
                self.b.len(),
                self.senses.len()
            )));
        }
        if self.b.iter().chain(&self.c).any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("LP data must be finite".into()));
        }
        if let Some(names) = &self.names {
            if names.len() != self.c.len() {
                return Err(Error::DimensionMismatch("one name per variable".into()));
            }
        }
        Ok(())
    }

    fn var_name(&self, j: usize) -> String {
        match &self.names {
            Some(n) => n[j].clone(),
            None => format!("z{j}"),
        }
    }

    /// Largest constraint violation of `z` (0 when feasible).
    pub fn max_violation(&self, z: &[f64]) -> f64 {
        let mut worst = z.iter().fold(0.0f64, |m, v| m.max(-v));
        for i in 0..self.n_rows() {
            let lhs: f64 = self.a.row(i).iter().zip(z).map(|(a, v)| a * v).sum();
            let v = match self.senses[i] {
                RowSense::Le => lhs - self.b[i],
                RowSense::Ge => self.b[i] - lhs,
                RowSense::Eq => (lhs - self.b[i]).abs(),
            };
            worst = worst.max(v);
        }
        worst
    }
}

/// Human-readable dump, one constraint per line; zero coefficients omitted.
impl fmt::Display for StandardFormLP {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms = |coefs: &[f64]| {
            let parts: Vec<String> = coefs
                .iter()
                .enumerate()
                .filter(|(_, v)| **v != 0.0)
                .map(|(j, v)| format!("{v:+} {}", self.var_name(j)))
                .collect();
            if parts.is_empty() {
                "0".to_string()
            } else {
                parts.join(" ")
            }
        };
        writeln!(f, "minimize: {}", terms(&self.c))?;
        for i in 0..self.n_rows() {
            writeln!(
                f,
                "r{i}: {} {} {}",
                terms(self.a.row(i)),
                self.senses[i].symbol(),
                self.b[i]
            )?;
        }
        writeln!(f, "bounds: all variables >= 0")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Primal values (meaningful only when optimal).
    pub z: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
}

impl LpSolution {
    pub fn require_optimal(&self) -> Result<()> {
        match self.status {
            LpStatus::Optimal => Ok(()),
            s => Err(Error::NotOptimal(s)),
        }
    }
}
