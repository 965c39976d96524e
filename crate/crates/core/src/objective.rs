//! Hinge losses, penalties, subgradients and proximal maps.

use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::matcore::{dot, norm1};

/// Regularizer applied to the coefficient vector (never to the intercept).
///
/// Scaling follows the usual conventions: `L2` is `lambda/2 * |b|_2^2`,
/// `ElasticNet` is `lambda1 * |b|_1 + lambda2/2 * |b|_2^2`, and `KSupport`
/// is `lambda * |b|_k^sp` with no half factor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PenaltySpec {
    L2 { lambda: f64 },
    L1 { lambda: f64 },
    ElasticNet { lambda1: f64, lambda2: f64 },
    KSupport { lambda: f64, k: usize },
}

impl PenaltySpec {
    /// Checks the weights and, for k-support, that `1 <= k <= n_features`.
    pub fn validate(&self, n_features: usize) -> Result<()> {
        let weights: &[f64] = match self {
            PenaltySpec::L2 { lambda } | PenaltySpec::L1 { lambda } => &[*lambda],
            PenaltySpec::ElasticNet { lambda1, lambda2 } => &[*lambda1, *lambda2],
            PenaltySpec::KSupport { lambda, .. } => &[*lambda],
        };
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidParameter(format!(
                "regularization weights must be finite and nonnegative: {self:?}"
            )));
        }
        if let PenaltySpec::KSupport { k, .. } = self {
            if *k < 1 || *k > n_features {
                return Err(Error::InvalidParameter(format!(
                    "k-support k = {k} outside [1, {n_features}]"
                )));
            }
        }
        Ok(())
    }

    pub fn name(&self) -> &'static str {
        match self {
            PenaltySpec::L2 { .. } => "l2",
            PenaltySpec::L1 { .. } => "l1",
            PenaltySpec::ElasticNet { .. } => "elasticnet",
            PenaltySpec::KSupport { .. } => "ksupport",
        }
    }

    pub fn value(&self, beta: &[f64]) -> f64 {
        penalty_value(self, beta)
    }
}

/// `max(0, 1 - y f)`.
#[inline]
pub fn hinge_loss(y: f64, f: f64) -> f64 {
    (1.0 - y * f).max(0.0)
}

/// One element of the subdifferential of `max(0, 1 - y (b0 + x.b))` with
/// respect to `(b0, b)`. At the kink (margin exactly 1) this returns zero.
pub fn hinge_subgradient(y: f64, x: &[f64], beta0: f64, beta: &[f64]) -> (f64, Vec<f64>) {
    let margin = y * (beta0 + dot(x, beta));
    if margin < 1.0 {
        (-y, x.iter().map(|v| -y * v).collect())
    } else {
        (0.0, vec![0.0; x.len()])
    }
}

/// `max(0, 1 - min_{c != y} (f_y - f_c))` for a 1-based class index `y`.
pub fn multiclass_hinge(f: &[f64], y: usize) -> f64 {
    assert!(f.len() >= 2 && (1..=f.len()).contains(&y), "class index out of range");
    let fy = f[y - 1];
    let min_gap = f
        .iter()
        .enumerate()
        .filter(|&(c, _)| c != y - 1)
        .map(|(_, fc)| fy - fc)
        .fold(f64::INFINITY, f64::min);
    (1.0 - min_gap).max(0.0)
}

pub fn penalty_value(spec: &PenaltySpec, beta: &[f64]) -> f64 {
    match *spec {
        PenaltySpec::L2 { lambda } => 0.5 * lambda * dot(beta, beta),
        PenaltySpec::L1 { lambda } => lambda * norm1(beta),
        PenaltySpec::ElasticNet { lambda1, lambda2 } => lambda1 * norm1(beta) + 0.5 * lambda2 * dot(beta, beta),
        PenaltySpec::KSupport { lambda, k } => lambda * ksupport_norm(beta, k),
    }
}

/// Absolute values sorted in decreasing order.
fn sorted_magnitudes(beta: &[f64]) -> Vec<f64> {
    let mut z: Vec<f64> = beta.iter().map(|b| b.abs()).collect();
    z.sort_by(|a, b| b.total_cmp(a));
    z
}

/// Tail sums `tail[i] = z[i] + ... + z[d-1]` (0-based), with `tail[d] = 0`.
fn tail_sums(z: &[f64]) -> Vec<f64> {
    let mut tail = vec![0.0; z.len() + 1];
    for i in (0..z.len()).rev() {
        tail[i] = tail[i + 1] + z[i];
    }
    tail
}

/// Bracketing test for a candidate `r` over the sorted magnitudes `z`:
/// `z_{k-r-1} > T_r / (r+1) >= z_{k-r}` (1-based, `z_0 = +inf`), where
/// `T_r` sums `z_{k-r}..z_d`. `slack` relaxes both comparisons.
fn bracket_holds(z: &[f64], tail: &[f64], k: usize, r: usize, slack: f64) -> bool {
    // 1-based z_{k-r} is z[k-r-1] in 0-based indexing
    let avg = tail[k - r - 1] / (r + 1) as f64;
    let upper = if k - r - 1 == 0 { f64::INFINITY } else { z[k - r - 2] };
    upper > avg - slack && avg >= z[k - r - 1] - slack
}

/// Every `r` in `0..k` satisfying the bracketing condition exactly.
/// For inputs with distinct nonzero magnitudes there is exactly one.
pub fn ksupport_bracket_candidates(beta: &[f64], k: usize) -> Vec<usize> {
    assert!(k >= 1 && k <= beta.len(), "k out of range");
    let z = sorted_magnitudes(beta);
    let tail = tail_sums(&z);
    (0..k).filter(|&r| bracket_holds(&z, &tail, k, r, 0.0)).collect()
}

/// Active `r` for the sorted magnitudes: first exact match in increasing
/// order, then the first match under a 1e-12 relative slack (ties), and
/// finally the least-violating candidate.
fn active_r(z: &[f64], tail: &[f64], k: usize) -> usize {
    if let Some(r) = (0..k).find(|&r| bracket_holds(z, tail, k, r, 0.0)) {
        return r;
    }
    let slack = 1e-12 * z[0].max(1.0);
    if let Some(r) = (0..k).find(|&r| bracket_holds(z, tail, k, r, slack)) {
        return r;
    }
    (0..k)
        .min_by(|&a, &b| violation(z, tail, k, a).total_cmp(&violation(z, tail, k, b)))
        .unwrap_or(0)
}

fn violation(z: &[f64], tail: &[f64], k: usize, r: usize) -> f64 {
    let avg = tail[k - r - 1] / (r + 1) as f64;
    let upper = if k - r - 1 == 0 { f64::INFINITY } else { z[k - r - 2] };
    (avg - upper).max(0.0) + (z[k - r - 1] - avg).max(0.0)
}

/// The k-support norm: for `k = 1` it is the l1 norm, for `k = d` the l2 norm.
pub fn ksupport_norm(beta: &[f64], k: usize) -> f64 {
    assert!(k >= 1 && k <= beta.len(), "k out of range");
    let z = sorted_magnitudes(beta);
    if z[0] == 0.0 {
        return 0.0;
    }
    let tail = tail_sums(&z);
    let r = active_r(&z, &tail, k);
    let head: f64 = z[..k - r - 1].iter().map(|v| v * v).sum();
    let t = tail[k - r - 1];
    (head + t * t / (r + 1) as f64).sqrt()
}

/// Gradient of the closed form at the active `r`: the top `k-r-1`
/// coordinates get `b_i / N`, the rest `sign(b_i) T / ((r+1) N)`.
/// Returns zero at `b = 0`.
pub fn ksupport_subgradient(beta: &[f64], k: usize) -> Vec<f64> {
    assert!(k >= 1 && k <= beta.len(), "k out of range");
    let d = beta.len();
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| beta[b].abs().total_cmp(&beta[a].abs()));
    let z: Vec<f64> = order.iter().map(|&i| beta[i].abs()).collect();
    if z[0] == 0.0 {
        return vec![0.0; d];
    }
    let tail = tail_sums(&z);
    let r = active_r(&z, &tail, k);
    let head_len = k - r - 1;
    let head: f64 = z[..head_len].iter().map(|v| v * v).sum();
    let t = tail[head_len];
    let norm = (head + t * t / (r + 1) as f64).sqrt();
    let tail_grad = t / ((r + 1) as f64 * norm);
    let mut g = vec![0.0; d];
    for (rank, &i) in order.iter().enumerate() {
        g[i] = if rank < head_len {
            beta[i] / norm
        } else if beta[i] == 0.0 {
            0.0
        } else {
            beta[i].signum() * tail_grad
        };
    }
    g
}

/// Subgradient of the penalty term (zero at `b_j = 0` for the l1 parts).
pub fn penalty_subgradient(spec: &PenaltySpec, beta: &[f64]) -> Vec<f64> {
    let sign = |b: f64| if b == 0.0 { 0.0 } else { b.signum() };
    match *spec {
        PenaltySpec::L2 { lambda } => beta.iter().map(|b| lambda * b).collect(),
        PenaltySpec::L1 { lambda } => beta.iter().map(|&b| lambda * sign(b)).collect(),
        PenaltySpec::ElasticNet { lambda1, lambda2 } => beta.iter().map(|&b| lambda1 * sign(b) + lambda2 * b).collect(),
        PenaltySpec::KSupport { lambda, k } => ksupport_subgradient(beta, k).into_iter().map(|g| lambda * g).collect(),
    }
}

#[inline]
pub fn soft_threshold(v: f64, t: f64) -> f64 {
    if v > t {
        v - t
    } else if v < -t {
        v + t
    } else {
        0.0
    }
}

/// `argmin_u 1/2 |u - v|^2 + step * penalty(u)`.
pub fn prox_map(spec: &PenaltySpec, v: &[f64], step: f64) -> Result<Vec<f64>> {
    let mut out = v.to_vec();
    prox_map_in_place(spec, &mut out, step)?;
    Ok(out)
}

pub(crate) fn prox_map_in_place(spec: &PenaltySpec, v: &mut [f64], step: f64) -> Result<()> {
    if !(step > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "prox step must be positive, got {step}"
        )));
    }
    match *spec {
        PenaltySpec::L2 { lambda } => {
            let s = 1.0 / (1.0 + step * lambda);
            v.iter_mut().for_each(|x| *x *= s);
        }
        PenaltySpec::L1 { lambda } => {
            let t = step * lambda;
            v.iter_mut().for_each(|x| *x = soft_threshold(*x, t));
        }
        PenaltySpec::ElasticNet { lambda1, lambda2 } => {
            let t = step * lambda1;
            let s = 1.0 / (1.0 + step * lambda2);
            v.iter_mut().for_each(|x| *x = s * soft_threshold(*x, t));
        }
        PenaltySpec::KSupport { .. } => return Err(Error::UnsupportedProx),
    }
    Ok(())
}

/// Penalized empirical hinge objective `sum_i hinge_i + penalty(b)` over a
/// binary dataset. The intercept is never penalized.
#[derive(Debug, Clone, Copy)]
pub struct BinaryObjective<'a> {
    pub dataset: &'a Dataset,
    pub penalty: PenaltySpec,
}

impl<'a> BinaryObjective<'a> {
    pub fn new(dataset: &'a Dataset, penalty: PenaltySpec) -> Result<Self> {
        dataset.check_binary()?;
        penalty.validate(dataset.n_features())?;
        Ok(Self { dataset, penalty })
    }

    pub fn loss(&self, beta0: f64, beta: &[f64]) -> f64 {
        (0..self.dataset.n_samples())
            .map(|i| {
                let y = self.dataset.y[i] as f64;
                hinge_loss(y, beta0 + dot(self.dataset.row(i), beta))
            })
            .sum()
    }

    pub fn value(&self, beta0: f64, beta: &[f64]) -> f64 {
        self.loss(beta0, beta) + penalty_value(&self.penalty, beta)
    }

    /// Subgradient of the full objective (loss sum plus penalty).
    pub fn subgradient(&self, beta0: f64, beta: &[f64]) -> (f64, Vec<f64>) {
        let mut g0 = 0.0;
        let mut g = penalty_subgradient(&self.penalty, beta);
        for i in 0..self.dataset.n_samples() {
            let x = self.dataset.row(i);
            let y = self.dataset.y[i] as f64;
            if y * (beta0 + dot(x, beta)) < 1.0 {
                g0 -= y;
                for (gj, xj) in g.iter_mut().zip(x) {
                    *gj -= y * xj;
                }
            }
        }
        (g0, g)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::{norm2, standard_normal, RngSeed};
    use proptest::prelude::*;

    #[test]
    fn hinge_examples() {
        assert_eq!(hinge_loss(1.0, 0.5), 0.5);
        assert_eq!(hinge_loss(1.0, 2.0), 0.0);
        assert_eq!(hinge_loss(-1.0, 1.0), 2.0);
    }

    #[test]
    fn hinge_subgradient_branches() {
        assert_eq!(
            hinge_subgradient(1.0, &[1.5, 0.0], 0.0, &[1.0, 1.0]),
            (0.0, vec![0.0, 0.0])
        );
        assert_eq!(
            hinge_subgradient(1.0, &[1.0, 0.0], 0.0, &[0.0, 0.0]),
            (-1.0, vec![-1.0, -0.0])
        );
        // margin exactly one
        assert_eq!(hinge_subgradient(-1.0, &[1.0], 0.0, &[-1.0]), (0.0, vec![0.0]));
    }

    #[test]
    fn multiclass_hinge_examples() {
        assert_eq!(multiclass_hinge(&[2.0, 0.5, -1.0], 1), 0.0);
        assert!((multiclass_hinge(&[0.2, 0.5, -1.0], 1) - 1.3).abs() < 1e-12);
        assert_eq!(multiclass_hinge(&[1.0, 0.0], 1), 0.0);
    }

    #[test]
    fn multiclass_hinge_two_class_boundary_matches_binary() {
        for &g in &[-1.0, -0.2, 0.0, 0.3, 0.5, 0.7, 2.0] {
            let multi = multiclass_hinge(&[g, -g], 1);
            let binary = hinge_loss(1.0, 2.0 * g);
            assert_eq!(multi == 0.0, binary == 0.0, "g = {g}");
            assert!((multi - binary).abs() < 1e-12);
        }
    }

    #[test]
    fn penalty_examples() {
        assert_eq!(penalty_value(&PenaltySpec::L1 { lambda: 2.0 }, &[3.0, -1.0]), 8.0);
        let en = PenaltySpec::ElasticNet {
            lambda1: 1.0,
            lambda2: 2.0,
        };
        assert_eq!(penalty_value(&en, &[1.0, 1.0]), 4.0);
        let ks = PenaltySpec::KSupport { lambda: 1.0, k: 1 };
        assert_eq!(penalty_value(&ks, &[3.0, 1.0]), 4.0);
        assert_eq!(penalty_value(&PenaltySpec::L2 { lambda: 2.0 }, &[3.0, 1.0]), 10.0);
    }

    #[test]
    fn ksupport_examples() {
        assert!((ksupport_norm(&[3.0, 1.0], 1) - 4.0).abs() < 1e-15);
        assert!((ksupport_norm(&[3.0, 4.0, 0.0], 3) - 5.0).abs() < 1e-15);
        assert!((ksupport_norm(&[2.0, 2.0, 1.0], 2) - 5.0 / 2f64.sqrt()).abs() < 1e-12);
        assert_eq!(ksupport_bracket_candidates(&[2.0, 2.0, 1.0], 2), vec![1]);
        assert_eq!(ksupport_norm(&[0.0, 0.0], 2), 0.0);
    }

    /// Dual-norm oracle: the k-support norm is `max <u, b>` over `u` whose
    /// k largest magnitudes have unit l2 norm. Scanned over a sphere grid.
    fn gauge_oracle_3d(beta: [f64; 3], k: usize) -> f64 {
        let steps = 1200;
        let mut best = 0.0f64;
        for a in 0..=steps {
            let theta = std::f64::consts::PI * a as f64 / steps as f64;
            for b in 0..(2 * steps) {
                let phi = std::f64::consts::PI * b as f64 / steps as f64;
                let u = [theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()];
                let mut m: Vec<f64> = u.iter().map(|v| v * v).collect();
                m.sort_by(|x, y| y.total_cmp(x));
                let dual: f64 = m[..k].iter().sum::<f64>().sqrt();
                let val = (u[0] * beta[0] + u[1] * beta[1] + u[2] * beta[2]) / dual;
                best = best.max(val);
            }
        }
        best
    }

    #[test]
    fn ksupport_matches_gauge_oracle() {
        let oracle = gauge_oracle_3d([2.0, 2.0, 1.0], 2);
        assert!((oracle - 3.535_533_905_932_737_6).abs() < 1e-3, "oracle {oracle}");
        assert!((ksupport_norm(&[2.0, 2.0, 1.0], 2) - oracle).abs() < 1e-3);
        let oracle = gauge_oracle_3d([3.0, -0.5, 1.5], 2);
        assert!((ksupport_norm(&[3.0, -0.5, 1.5], 2) - oracle).abs() < 1e-3);
    }

    fn random_vec(rng: &mut impl rand::Rng, d: usize) -> Vec<f64> {
        (0..d).map(|_| standard_normal(rng)).collect()
    }

    #[test]
    fn ksupport_is_a_norm() {
        let mut rng = RngSeed(17).rng();
        for t in 0..1000 {
            let d = 1 + t % 9;
            let k = 1 + t % d;
            let a = random_vec(&mut rng, d);
            let b = random_vec(&mut rng, d);
            let c = 3.0 * standard_normal(&mut rng);
            let scaled: Vec<f64> = a.iter().map(|v| c * v).collect();
            let sum: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
            let na = ksupport_norm(&a, k);
            assert!((ksupport_norm(&scaled, k) - c.abs() * na).abs() < 1e-10 * (1.0 + na * c.abs()));
            assert!(ksupport_norm(&sum, k) <= na + ksupport_norm(&b, k) + 1e-10);
        }
    }

    #[test]
    fn ksupport_sits_between_l2_and_l1_and_decreases_in_k() {
        let mut rng = RngSeed(23).rng();
        for _ in 0..300 {
            let d = 6;
            let b = random_vec(&mut rng, d);
            let mut prev = f64::INFINITY;
            for k in 1..=d {
                let n = ksupport_norm(&b, k);
                assert!(n <= norm1(&b) + 1e-12);
                assert!(n >= norm2(&b) - 1e-12);
                assert!(n <= prev + 1e-12);
                prev = n;
            }
            assert_eq!(
                ksupport_bracket_candidates(&b, 1 + (b[0].abs() * 10.0) as usize % d).len(),
                1
            );
        }
    }

    #[test]
    fn ksupport_subgradient_special_cases() {
        let b = [0.5, -2.0, 1.0];
        let g = ksupport_subgradient(&b, 3);
        let n = norm2(&b);
        for (gi, bi) in g.iter().zip(&b) {
            assert!((gi - bi / n).abs() < 1e-12);
        }
        let g = ksupport_subgradient(&[0.5, -2.0, 0.0], 1);
        assert_eq!(g, vec![1.0, -1.0, 0.0]);
        assert_eq!(ksupport_subgradient(&[0.0, 0.0], 1), vec![0.0, 0.0]);
    }

    #[test]
    fn ksupport_subgradient_matches_finite_differences() {
        let h = 1e-6;
        let check = |b: &[f64], k: usize| {
            let g = ksupport_subgradient(b, k);
            for j in 0..b.len() {
                let mut up = b.to_vec();
                let mut dn = b.to_vec();
                up[j] += h;
                dn[j] -= h;
                let fd = (ksupport_norm(&up, k) - ksupport_norm(&dn, k)) / (2.0 * h);
                assert!((fd - g[j]).abs() < 1e-5, "b={b:?} k={k} j={j}: {fd} vs {}", g[j]);
            }
        };
        // (2,2,1) sits on a tie; perturb off it
        check(&[2.0, 2.0 + 1e-3, 1.0], 2);
        check(&[2.0 - 1e-3, 2.0, 1.0], 2);
        let mut rng = RngSeed(5).rng();
        for t in 0..100 {
            let d = 2 + t % 6;
            check(&random_vec(&mut rng, d), 1 + t % d);
        }
    }

    #[test]
    fn prox_examples() {
        let l1 = PenaltySpec::L1 { lambda: 1.0 };
        assert_eq!(prox_map(&l1, &[2.0, -0.5], 1.0).unwrap(), vec![1.0, 0.0]);
        let l2 = PenaltySpec::L2 { lambda: 1.0 };
        assert_eq!(prox_map(&l2, &[2.0], 1.0).unwrap(), vec![1.0]);
        let en = PenaltySpec::ElasticNet {
            lambda1: 1.0,
            lambda2: 1.0,
        };
        assert_eq!(prox_map(&en, &[3.0], 1.0).unwrap(), vec![1.0]);
        // 1-D grid minimization of the prox objective
        let obj = |u: f64| 0.5 * (u - 3.0) * (u - 3.0) + u.abs() + 0.5 * u * u;
        let grid_min = (0..=60_000)
            .map(|i| -1.0 + i as f64 * 1e-4)
            .min_by(|a, b| obj(*a).total_cmp(&obj(*b)))
            .unwrap();
        assert!((grid_min - 1.0).abs() < 1e-4);
        assert!(matches!(
            prox_map(&PenaltySpec::KSupport { lambda: 1.0, k: 1 }, &[1.0], 1.0),
            Err(Error::UnsupportedProx)
        ));
        assert!(prox_map(&l1, &[1.0], 0.0).is_err());
    }

    #[test]
    fn prox_beats_random_candidates() {
        let mut rng = RngSeed(8).rng();
        let specs = [
            PenaltySpec::L2 { lambda: 0.7 },
            PenaltySpec::L1 { lambda: 0.4 },
            PenaltySpec::ElasticNet {
                lambda1: 0.3,
                lambda2: 1.5,
            },
        ];
        for spec in specs {
            let v = random_vec(&mut rng, 4);
            let step = 0.8;
            let p = prox_map(&spec, &v, step).unwrap();
            let obj = |u: &[f64]| {
                0.5 * u.iter().zip(&v).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() + step * penalty_value(&spec, u)
            };
            let best = obj(&p);
            for _ in 0..10_000 {
                let cand: Vec<f64> = p.iter().map(|x| x + 0.5 * standard_normal(&mut rng)).collect();
                assert!(best <= obj(&cand) + 1e-12);
            }
        }
    }

    #[test]
    fn penalty_validation() {
        assert!(PenaltySpec::L1 { lambda: -1.0 }.validate(3).is_err());
        assert!(PenaltySpec::KSupport { lambda: 1.0, k: 0 }.validate(3).is_err());
        assert!(PenaltySpec::KSupport { lambda: 1.0, k: 4 }.validate(3).is_err());
        assert!(PenaltySpec::KSupport { lambda: 1.0, k: 3 }.validate(3).is_ok());
    }

    proptest! {
        #[test]
        fn hinge_is_one_lipschitz(y in prop::bool::ANY, f1 in -10.0f64..10.0, f2 in -10.0f64..10.0) {
            let y = if y { 1.0 } else { -1.0 };
            prop_assert!((hinge_loss(y, f1) - hinge_loss(y, f2)).abs() <= (f1 - f2).abs() + 1e-14 * (1.0 + f1.abs() + f2.abs()));
        }

        #[test]
        fn unique_bracket_for_distinct_magnitudes(v in prop::collection::vec(0.01f64..10.0, 1..10), kseed in 0usize..100) {
            let mut v = v;
            v.sort_by(|a, b| b.total_cmp(a));
            v.dedup_by(|a, b| (*a - *b).abs() < 1e-6);
            let k = 1 + kseed % v.len();
            prop_assert_eq!(ksupport_bracket_candidates(&v, k).len(), 1);
        }
    }
}
