//! In-memory labelled dataset shared by every trainer.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::matcore::DenseMatrix;

/// Dense design matrix plus labels.
///
/// Binary datasets carry labels in `{-1, +1}`; multi-class datasets carry
/// class indices `1..=k`. `relevant_features`, when set, marks the first
/// `m` columns as the "relevant" block (the rest being appended noise).
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub x: DenseMatrix,
    pub y: Vec<i32>,
    pub feature_names: Option<Vec<String>>,
    pub relevant_features: Option<usize>,
}

impl Dataset {
    pub fn new(x: DenseMatrix, y: Vec<i32>) -> Result<Self> {
        if x.rows() != y.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} rows but {} labels",
                x.rows(),
                y.len()
            )));
        }
        Ok(Self {
            x,
            y,
            feature_names: None,
            relevant_features: None,
        })
    }

    pub fn n_samples(&self) -> usize {
        self.x.rows()
    }

    pub fn n_features(&self) -> usize {
        self.x.cols()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        self.x.row(i)
    }

    pub fn is_binary(&self) -> bool {
        self.y.iter().all(|&l| l == 1 || l == -1)
    }

    /// Sorted distinct label values.
    pub fn classes(&self) -> Vec<i32> {
        self.y.iter().copied().collect::<BTreeSet<_>>().into_iter().collect()
    }

    /// Number of classes for a multi-class dataset: the largest label,
    /// after checking that labels lie in `1..=k` and every class is present.
    pub fn num_classes(&self) -> Result<usize> {
        let max = self.y.iter().copied().max().unwrap_or(0);
        if max < 2 || self.y.iter().any(|&l| l < 1) {
            return Err(Error::Data(
                "multi-class labels must be class indices 1..=k with k >= 2".into(),
            ));
        }
        let k = max as usize;
        let mut counts = vec![0usize; k];
        for &l in &self.y {
            counts[l as usize - 1] += 1;
        }
        if let Some(c) = counts.iter().position(|&c| c == 0) {
            return Err(Error::Data(format!("class {} has no instances", c + 1)));
        }
        Ok(k)
    }

    pub fn check_binary(&self) -> Result<()> {
        if self.n_samples() == 0 {
            return Err(Error::Data("empty dataset".into()));
        }
        if !self.is_binary() {
            return Err(Error::Data("binary labels must be -1 or +1".into()));
        }
        Ok(())
    }

    /// Rows selected by `indices`, in that order.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            x: self.x.select_rows(indices),
            y: indices.iter().map(|&i| self.y[i]).collect(),
            feature_names: self.feature_names.clone(),
            relevant_features: self.relevant_features,
        }
    }

    /// Same features, labels replaced.
    pub fn with_labels(&self, y: Vec<i32>) -> Result<Dataset> {
        let mut d = Dataset::new(self.x.clone(), y)?;
        d.feature_names = self.feature_names.clone();
        d.relevant_features = self.relevant_features;
        Ok(d)
    }

    /// Same labels, features replaced (e.g. after standardization).
    pub fn with_features(&self, x: DenseMatrix) -> Result<Dataset> {
        if x.rows() != self.n_samples() {
            return Err(Error::DimensionMismatch(
                "replacement feature matrix has a different row count".into(),
            ));
        }
        Ok(Dataset {
            x,
            y: self.y.clone(),
            feature_names: self.feature_names.clone(),
            relevant_features: self.relevant_features,
        })
    }
}
