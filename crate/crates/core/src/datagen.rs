//! Synthetic benchmark data: a two-class problem with one correlated block
//! of relevant features, a four-class problem where only two features carry
//! signal, and appending pure-noise columns to an existing dataset.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::matcore::{cholesky, sample_mvn, standard_normal, DenseMatrix, RngSeed};

/// Mixed into a training seed to obtain the matching test-set seed.
pub const TEST_SEED_SALT: u64 = 0x7e57_5e7d_a5a5_0001;

/// Two Gaussian classes `N(+mu, S)` and `N(-mu, S)` where `mu` is `mean` on
/// the first `block` coordinates and 0 elsewhere, and `S` has unit variances
/// with correlation `rho` inside that block.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroupedBinarySpec {
    pub n_per_class: usize,
    pub n_features: usize,
    pub block: usize,
    pub rho: f64,
    pub mean: f64,
    pub seed: u64,
}

impl Default for GroupedBinarySpec {
    fn default() -> Self {
        Self {
            n_per_class: 30,
            n_features: 30,
            block: 5,
            rho: 0.8,
            mean: 1.0,
            seed: 0,
        }
    }
}

impl GroupedBinarySpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_per_class == 0 || self.block > self.n_features || self.n_features == 0 {
            return Err(Error::InvalidParameter(format!(
                "grouped spec needs samples, features and block <= features: {self:?}"
            )));
        }
        if !(self.rho.abs() < 1.0) || !self.mean.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "block correlation must satisfy |rho| < 1, got {}",
                self.rho
            )));
        }
        Ok(())
    }

    pub fn covariance(&self) -> DenseMatrix {
        let p = self.n_features;
        let mut s = DenseMatrix::identity(p);
        for i in 0..self.block {
            for j in 0..self.block {
                if i != j {
                    s.set(i, j, self.rho);
                }
            }
        }
        s
    }
}

/// Rows `0..n_per_class` are the `+1` class, the rest `-1`. The correlated
/// block is marked relevant.
pub fn gen_grouped_binary(spec: &GroupedBinarySpec) -> Result<Dataset> {
    spec.validate()?;
    let l = cholesky(&spec.covariance())?;
    let mut mu = vec![0.0; spec.n_features];
    mu[..spec.block].fill(spec.mean);
    let neg: Vec<f64> = mu.iter().map(|m| -m).collect();
    let seed = RngSeed(spec.seed);
    let pos = sample_mvn(&mu, &l, spec.n_per_class, seed.derive(0))?;
    let negs = sample_mvn(&neg, &l, spec.n_per_class, seed.derive(1))?;
    let mut data = pos.as_slice().to_vec();
    data.extend_from_slice(negs.as_slice());
    let x = DenseMatrix::new(2 * spec.n_per_class, spec.n_features, data)?;
    let mut y = vec![1; spec.n_per_class];
    y.extend(std::iter::repeat_n(-1, spec.n_per_class));
    let mut d = Dataset::new(x, y)?;
    d.relevant_features = Some(spec.block);
    Ok(d)
}

/// Standard-normal features; class `c` (of four) has its first two features
/// shifted by `(d,0)`, `(0,d)`, `(-d,0)`, `(0,-d)` respectively.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FourClassSpec {
    pub n_samples: usize,
    pub n_features: usize,
    pub d: f64,
    pub seed: u64,
}

impl Default for FourClassSpec {
    fn default() -> Self {
        Self {
            n_samples: 100,
            n_features: 100,
            d: 3.0,
            seed: 0,
        }
    }
}

impl FourClassSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.d > 0.0) || !self.d.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "shift d must be positive, got {}",
                self.d
            )));
        }
        if self.n_samples == 0 || !self.n_samples.is_multiple_of(4) {
            return Err(Error::InvalidParameter(format!(
                "instance count must be a positive multiple of 4, got {}",
                self.n_samples
            )));
        }
        if self.n_features < 2 {
            return Err(Error::InvalidParameter("need at least two features".into()));
        }
        Ok(())
    }

    /// Same construction with an independent, derived seed.
    pub fn test_spec(&self) -> FourClassSpec {
        FourClassSpec {
            seed: self.seed ^ TEST_SEED_SALT,
            ..*self
        }
    }

    pub fn class_shift(&self, class: usize) -> [f64; 2] {
        let d = self.d;
        [[d, 0.0], [0.0, d], [-d, 0.0], [0.0, -d]][class - 1]
    }
}

/// Labels are 1..=4; class `c` fills pre-shuffle rows `m(c-1)..mc` with
/// `m = n/4`, then rows are shuffled. The first two features are marked
/// relevant.
pub fn gen_fourclass(spec: &FourClassSpec) -> Result<Dataset> {
    spec.validate()?;
    let (n, p) = (spec.n_samples, spec.n_features);
    let per = n / 4;
    let mut rng = RngSeed(spec.seed).rng();
    let mut rows: Vec<(Vec<f64>, i32)> = (0..n)
        .map(|i| {
            let class = i / per + 1;
            let mut u: Vec<f64> = (0..p).map(|_| standard_normal(&mut rng)).collect();
            let a = spec.class_shift(class);
            u[0] += a[0];
            u[1] += a[1];
            (u, class as i32)
        })
        .collect();
    rows.shuffle(&mut rng);
    let y = rows.iter().map(|r| r.1).collect();
    let x: Vec<Vec<f64>> = rows.into_iter().map(|r| r.0).collect();
    let mut d = Dataset::new(DenseMatrix::from_rows(&x)?, y)?;
    d.relevant_features = Some(2);
    Ok(d)
}

/// Appends `q` i.i.d. standard-normal columns. The original columns become
/// the relevant block (unless one was already recorded).
pub fn contaminate(dataset: &Dataset, q: usize, seed: u64) -> Result<Dataset> {
    if q == 0 {
        return Ok(dataset.clone());
    }
    let mut rng = RngSeed(seed).rng();
    let n = dataset.n_samples();
    let noise: Vec<f64> = (0..n * q).map(|_| standard_normal(&mut rng)).collect();
    let x = dataset.x.hstack(&DenseMatrix::new(n, q, noise)?)?;
    let mut out = dataset.with_features(x)?;
    out.relevant_features = Some(dataset.relevant_features.unwrap_or(dataset.n_features()));
    if let Some(names) = &mut out.feature_names {
        names.extend((1..=q).map(|j| format!("noise{j}")));
    }
    Ok(out)
}
