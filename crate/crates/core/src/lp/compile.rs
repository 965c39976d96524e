//! Reductions of l1-penalized hinge problems to [`StandardFormLP`].
//!
//! Every free quantity is split into nonnegative parts, `b = b+ - b-`, so the
//! l1 penalty becomes the linear term `lambda * (b+ + b-)`. Intercepts are
//! split the same way but carry no cost.

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::matcore::DenseMatrix;
use crate::objective::PenaltySpec;
use crate::svm::{LinearModel, MultiClassModel, MultiClassOrigin, SparsityRule};

use super::{LpSolution, RowSense, StandardFormLP};

/// Column layout of [`binary_l1_svm_to_lp`]:
/// `[b+ (p) | b- (p) | b0+ | b0- | xi (n)]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BinaryLpLayout {
    pub n_samples: usize,
    pub n_features: usize,
}

impl BinaryLpLayout {
    pub fn beta_plus(&self, j: usize) -> usize {
        j
    }
    pub fn beta_minus(&self, j: usize) -> usize {
        self.n_features + j
    }
    pub fn intercept_plus(&self) -> usize {
        2 * self.n_features
    }
    pub fn intercept_minus(&self) -> usize {
        2 * self.n_features + 1
    }
    pub fn slack(&self, i: usize) -> usize {
        2 * self.n_features + 2 + i
    }
    pub fn n_vars(&self) -> usize {
        2 * self.n_features + 2 + self.n_samples
    }

    /// Cost vector for penalty weight `lambda`.
    pub fn costs(&self, lambda: f64) -> Vec<f64> {
        let mut c = vec![0.0; self.n_vars()];
        for j in 0..self.n_features {
            c[self.beta_plus(j)] = lambda;
            c[self.beta_minus(j)] = lambda;
        }
        for i in 0..self.n_samples {
            c[self.slack(i)] = 1.0;
        }
        c
    }
}

/// `min sum xi + lambda sum (b+ + b-)` subject to
/// `y_i (b0 + x_i.(b+ - b-)) + xi_i >= 1`.
pub fn binary_l1_svm_to_lp(dataset: &Dataset, lambda: f64) -> Result<(StandardFormLP, BinaryLpLayout)> {
    dataset.check_binary()?;
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(Error::InvalidParameter(format!("lambda must be >= 0, got {lambda}")));
    }
    let (n, p) = (dataset.n_samples(), dataset.n_features());
    let layout = BinaryLpLayout {
        n_samples: n,
        n_features: p,
    };
    let nv = layout.n_vars();
    let c = layout.costs(lambda);
    let mut a = DenseMatrix::zeros(n, nv);
    for i in 0..n {
        let y = dataset.y[i] as f64;
        let row = a.row_mut(i);
        for (j, &x) in dataset.row(i).iter().enumerate() {
            row[layout.beta_plus(j)] = y * x;
            row[layout.beta_minus(j)] = -y * x;
        }
        row[layout.intercept_plus()] = y;
        row[layout.intercept_minus()] = -y;
        row[layout.slack(i)] = 1.0;
    }
    let mut lp = StandardFormLP::new(c, a, vec![1.0; n], vec![RowSense::Ge; n])?;
    let mut names = Vec::with_capacity(nv);
    names.extend((0..p).map(|j| format!("b+[{j}]")));
    names.extend((0..p).map(|j| format!("b-[{j}]")));
    names.push("b0+".into());
    names.push("b0-".into());
    names.extend((0..n).map(|i| format!("xi[{i}]")));
    lp.names = Some(names);
    Ok((lp, layout))
}

/// Reads `(b0, b)` back out of an optimal solution of [`binary_l1_svm_to_lp`].
pub fn extract_binary_model(solution: &LpSolution, layout: BinaryLpLayout, lambda: f64) -> Result<LinearModel> {
    solution.require_optimal()?;
    let z = &solution.z;
    let beta = (0..layout.n_features)
        .map(|j| z[layout.beta_plus(j)] - z[layout.beta_minus(j)])
        .collect();
    let beta0 = z[layout.intercept_plus()] - z[layout.intercept_minus()];
    Ok(LinearModel {
        beta0,
        beta,
        penalty: PenaltySpec::L1 { lambda },
        sparsity: SparsityRule::Exact,
        scaler: None,
        report: None,
    })
}

/// Column layout of [`l1msvm_to_lp`]: one block `[b+ (p) | b- (p) | b0+ | b0-]`
/// per class, then `xi (n)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MulticlassLpLayout {
    pub n_samples: usize,
    pub n_features: usize,
    pub n_classes: usize,
}

impl MulticlassLpLayout {
    fn block(&self) -> usize {
        2 * self.n_features + 2
    }
    pub fn beta_plus(&self, class: usize, j: usize) -> usize {
        class * self.block() + j
    }
    pub fn beta_minus(&self, class: usize, j: usize) -> usize {
        class * self.block() + self.n_features + j
    }
    pub fn intercept_plus(&self, class: usize) -> usize {
        class * self.block() + 2 * self.n_features
    }
    pub fn intercept_minus(&self, class: usize) -> usize {
        class * self.block() + 2 * self.n_features + 1
    }
    pub fn slack(&self, i: usize) -> usize {
        self.n_classes * self.block() + i
    }
    pub fn n_vars(&self) -> usize {
        self.n_classes * self.block() + self.n_samples
    }

    /// Cost vector for penalty weight `lambda`.
    pub fn costs(&self, lambda: f64) -> Vec<f64> {
        let mut c = vec![0.0; self.n_vars()];
        for class in 0..self.n_classes {
            for j in 0..self.n_features {
                c[self.beta_plus(class, j)] = lambda;
                c[self.beta_minus(class, j)] = lambda;
            }
        }
        for i in 0..self.n_samples {
            c[self.slack(i)] = 1.0;
        }
        c
    }
}

/// All-in-one multi-class l1 SVM as a linear program.
///
/// One margin row per `(i, c != y_i)`: `f_{y_i}(x_i) - f_c(x_i) + xi_i >= 1`,
/// which together bound the worst competing class. Sum-to-zero equality rows
/// over classes tie the intercepts and each coordinate. Classes are 1-based
/// in the dataset and 0-based in the layout.
pub fn l1msvm_to_lp(
    dataset: &Dataset,
    lambda: f64,
    num_classes: usize,
) -> Result<(StandardFormLP, MulticlassLpLayout)> {
    if dataset.n_samples() == 0 {
        return Err(Error::Data("empty dataset".into()));
    }
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(Error::InvalidParameter(format!("lambda must be >= 0, got {lambda}")));
    }
    let k = dataset.num_classes()?;
    if k != num_classes {
        return Err(Error::Data(format!(
            "labels span {k} classes but {num_classes} were requested"
        )));
    }
    let (n, p) = (dataset.n_samples(), dataset.n_features());
    let layout = MulticlassLpLayout {
        n_samples: n,
        n_features: p,
        n_classes: k,
    };
    let nv = layout.n_vars();
    let c = layout.costs(lambda);
    let n_margin = n * (k - 1);
    let n_rows = n_margin + p + 1;
    let mut a = DenseMatrix::zeros(n_rows, nv);
    let mut b = Vec::with_capacity(n_rows);
    let mut senses = Vec::with_capacity(n_rows);
    let mut r = 0;
    for i in 0..n {
        let yi = dataset.y[i] as usize - 1;
        let x = dataset.row(i);
        for other in (0..k).filter(|&c| c != yi) {
            let row = a.row_mut(r);
            for (j, &v) in x.iter().enumerate() {
                row[layout.beta_plus(yi, j)] = v;
                row[layout.beta_minus(yi, j)] = -v;
                row[layout.beta_plus(other, j)] = -v;
                row[layout.beta_minus(other, j)] = v;
            }
            row[layout.intercept_plus(yi)] = 1.0;
            row[layout.intercept_minus(yi)] = -1.0;
            row[layout.intercept_plus(other)] = -1.0;
            row[layout.intercept_minus(other)] = 1.0;
            row[layout.slack(i)] = 1.0;
            b.push(1.0);
            senses.push(RowSense::Ge);
            r += 1;
        }
    }
    {
        let row = a.row_mut(r);
        for class in 0..k {
            row[layout.intercept_plus(class)] = 1.0;
            row[layout.intercept_minus(class)] = -1.0;
        }
        b.push(0.0);
        senses.push(RowSense::Eq);
        r += 1;
    }
    for j in 0..p {
        let row = a.row_mut(r);
        for class in 0..k {
            row[layout.beta_plus(class, j)] = 1.0;
            row[layout.beta_minus(class, j)] = -1.0;
        }
        b.push(0.0);
        senses.push(RowSense::Eq);
        r += 1;
    }
    debug_assert_eq!(r, n_rows);
    let mut lp = StandardFormLP::new(c, a, b, senses)?;
    let mut names = vec![String::new(); nv];
    for class in 0..k {
        for j in 0..p {
            names[layout.beta_plus(class, j)] = format!("b+[{},{j}]", class + 1);
            names[layout.beta_minus(class, j)] = format!("b-[{},{j}]", class + 1);
        }
        names[layout.intercept_plus(class)] = format!("b0+[{}]", class + 1);
        names[layout.intercept_minus(class)] = format!("b0-[{}]", class + 1);
    }
    for i in 0..n {
        names[layout.slack(i)] = format!("xi[{i}]");
    }
    lp.names = Some(names);
    Ok((lp, layout))
}

/// Rebuilds per-class `(b0_c, b_c)` as `b+ - b-` from an optimal solution.
pub fn extract_multiclass_model(
    solution: &LpSolution,
    layout: MulticlassLpLayout,
    lambda: f64,
) -> Result<MultiClassModel> {
    solution.require_optimal()?;
    let z = &solution.z;
    let k = layout.n_classes;
    let intercepts = (0..k)
        .map(|c| z[layout.intercept_plus(c)] - z[layout.intercept_minus(c)])
        .collect();
    let coefficients = (0..k)
        .map(|c| {
            (0..layout.n_features)
                .map(|j| z[layout.beta_plus(c, j)] - z[layout.beta_minus(c, j)])
                .collect()
        })
        .collect();
    Ok(MultiClassModel {
        intercepts,
        coefficients,
        origin: MultiClassOrigin::L1Msvm,
        penalty: PenaltySpec::L1 { lambda },
        sparsity: SparsityRule::Exact,
        scaler: None,
    })
}
