//! First-order solvers for penalized hinge objectives.
//!
//! Both solvers minimize `sum_i hinge_i + penalty(b)` by working on the
//! mean-scaled objective (averaged hinge subgradient, penalty weight `1/n`),
//! start from zero unless warm-started, and return the best iterate seen.

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::matcore::dot;
use crate::objective::{ksupport_subgradient, prox_map_in_place, BinaryObjective, PenaltySpec};

/// Step-size rule. `G` below is the largest row norm of `[1 | X]`, so a
/// scale of 1 corresponds to the classical `1/G` step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StepSchedule {
    /// `eta_t = scale / G`.
    Constant { scale: f64 },
    /// `eta_t = scale / (G sqrt(t))`.
    Diminishing { scale: f64 },
    /// Constant steps in stages of `stage_length` iterations, halving the
    /// step after each stage and restarting from the best point so far.
    Restarted { scale: f64, stage_length: usize },
}

impl StepSchedule {
    fn scale(&self) -> f64 {
        match *self {
            StepSchedule::Constant { scale }
            | StepSchedule::Diminishing { scale }
            | StepSchedule::Restarted { scale, .. } => scale,
        }
    }
}

impl Default for StepSchedule {
    fn default() -> Self {
        StepSchedule::Restarted {
            scale: 10.0,
            stage_length: 250,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub max_iterations: usize,
    /// Relative objective change below which a run counts as converged.
    /// Measured across `window` iterations (on the averaged iterate when
    /// averaging, else on the best objective), or across two consecutive
    /// stages for [`StepSchedule::Restarted`].
    pub tolerance: f64,
    pub step: StepSchedule,
    /// Also track the running average of the iterates (per stage when
    /// restarting) as a candidate solution.
    pub averaging: bool,
    pub window: usize,
    /// Reserved for randomized initialization; the solvers here start from
    /// zero or a warm start and draw nothing.
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            max_iterations: 5000,
            tolerance: 1e-6,
            step: StepSchedule::default(),
            averaging: true,
            window: 10,
            seed: 0,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let stage_ok = match self.step {
            StepSchedule::Restarted { stage_length, .. } => stage_length >= 1,
            _ => true,
        };
        if self.max_iterations < 1
            || !(self.tolerance > 0.0)
            || !(self.step.scale() > 0.0)
            || !self.step.scale().is_finite()
            || self.window < 1
            || !stage_ok
        {
            return Err(Error::InvalidParameter(format!(
                "invalid solver configuration: {self:?}"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub iteration: usize,
    /// Best objective seen up to this iteration.
    pub objective: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub iterations: usize,
    pub final_objective: f64,
    /// Best-so-far objective, downsampled to at most ~100 points.
    pub trace: Vec<TracePoint>,
    pub converged: bool,
    /// Last measured relative change across the convergence window.
    pub tolerance_achieved: f64,
    #[serde(skip)]
    pub wall_time: Duration,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub beta0: f64,
    pub beta: Vec<f64>,
    pub report: SolveReport,
}

/// `sum_i hinge(y_i, b0 + x_i.b) + penalty(b)`.
pub fn objective_value(dataset: &Dataset, penalty: &PenaltySpec, beta0: f64, beta: &[f64]) -> Result<f64> {
    if beta.len() != dataset.n_features() {
        return Err(Error::DimensionMismatch(format!(
            "{} coefficients for {} features",
            beta.len(),
            dataset.n_features()
        )));
    }
    Ok(BinaryObjective {
        dataset,
        penalty: *penalty,
    }
    .value(beta0, beta))
}

/// Subgradient of the full (unscaled) objective.
pub fn objective_subgradient(
    dataset: &Dataset,
    penalty: &PenaltySpec,
    beta0: f64,
    beta: &[f64],
) -> Result<(f64, Vec<f64>)> {
    if beta.len() != dataset.n_features() {
        return Err(Error::DimensionMismatch("coefficient length".into()));
    }
    Ok(BinaryObjective {
        dataset,
        penalty: *penalty,
    }
    .subgradient(beta0, beta))
}

fn max_row_norm(d: &Dataset) -> f64 {
    (0..d.n_samples())
        .map(|i| (1.0 + dot(d.row(i), d.row(i))).sqrt())
        .fold(1.0, f64::max)
}

/// Accumulates the averaged hinge subgradient at `(b0, b)` into `(g0, g)`
/// and returns the summed hinge loss there.
fn hinge_pass(d: &Dataset, beta0: f64, beta: &[f64], g0: &mut f64, g: &mut [f64]) -> f64 {
    let n = d.n_samples();
    let inv_n = 1.0 / n as f64;
    *g0 = 0.0;
    g.fill(0.0);
    let mut loss = 0.0;
    for i in 0..n {
        let x = d.row(i);
        let y = d.y[i] as f64;
        let m = y * (beta0 + dot(x, beta));
        if m < 1.0 {
            loss += 1.0 - m;
            *g0 -= y * inv_n;
            let s = y * inv_n;
            for (gj, xj) in g.iter_mut().zip(x) {
                *gj -= s * xj;
            }
        }
    }
    loss
}

/// One first-order method: owns the iterate and knows how to take a step.
trait Method {
    /// Moves the iterate to `(b0, b)` and clears any momentum.
    fn reset(&mut self, beta0: f64, beta: &[f64]);
    /// Takes a step of size `eta`; `local_t` counts iterations since the
    /// last reset, from 1. Returns the objective at the point where the
    /// subgradient was evaluated (see [`Method::evaluated`]).
    fn step(&mut self, eta: f64, local_t: usize) -> Result<f64>;
    fn evaluated(&self) -> (f64, &[f64]);
    fn current(&self) -> (f64, &[f64]);
}

struct ProxMethod<'a> {
    objective: BinaryObjective<'a>,
    beta0: f64,
    beta: Vec<f64>,
    prev0: f64,
    prev: Vec<f64>,
    g0: f64,
    g: Vec<f64>,
}

impl Method for ProxMethod<'_> {
    fn reset(&mut self, beta0: f64, beta: &[f64]) {
        self.beta0 = beta0;
        self.beta.copy_from_slice(beta);
    }

    fn step(&mut self, eta: f64, _local_t: usize) -> Result<f64> {
        let d = self.objective.dataset;
        self.prev0 = self.beta0;
        self.prev.copy_from_slice(&self.beta);
        let loss = hinge_pass(d, self.beta0, &self.beta, &mut self.g0, &mut self.g);
        let f = loss + self.objective.penalty.value(&self.beta);
        self.beta0 -= eta * self.g0;
        for (b, gj) in self.beta.iter_mut().zip(&self.g) {
            *b -= eta * gj;
        }
        prox_map_in_place(&self.objective.penalty, &mut self.beta, eta / d.n_samples() as f64)?;
        Ok(f)
    }

    fn evaluated(&self) -> (f64, &[f64]) {
        (self.prev0, &self.prev)
    }

    fn current(&self) -> (f64, &[f64]) {
        (self.beta0, &self.beta)
    }
}

struct MomentumMethod<'a> {
    objective: BinaryObjective<'a>,
    k: usize,
    /// `lambda / n`: penalty weight in the mean-scaled objective.
    weight: f64,
    beta0: f64,
    beta: Vec<f64>,
    prev0: f64,
    prev: Vec<f64>,
    look0: f64,
    look: Vec<f64>,
    g0: f64,
    g: Vec<f64>,
}

impl Method for MomentumMethod<'_> {
    fn reset(&mut self, beta0: f64, beta: &[f64]) {
        self.beta0 = beta0;
        self.prev0 = beta0;
        self.beta.copy_from_slice(beta);
        self.prev.copy_from_slice(beta);
    }

    fn step(&mut self, eta: f64, local_t: usize) -> Result<f64> {
        let mu = (local_t as f64 - 1.0) / (local_t as f64 + 2.0);
        self.look0 = self.beta0 + mu * (self.beta0 - self.prev0);
        for ((l, b), q) in self.look.iter_mut().zip(&self.beta).zip(&self.prev) {
            *l = b + mu * (b - q);
        }
        let d = self.objective.dataset;
        let loss = hinge_pass(d, self.look0, &self.look, &mut self.g0, &mut self.g);
        let f = loss + self.objective.penalty.value(&self.look);
        let gk = ksupport_subgradient(&self.look, self.k);
        self.prev0 = self.beta0;
        self.prev.copy_from_slice(&self.beta);
        self.beta0 = self.look0 - eta * self.g0;
        for ((b, l), (gj, kj)) in self.beta.iter_mut().zip(&self.look).zip(self.g.iter().zip(&gk)) {
            *b = l - eta * (gj + self.weight * kj);
        }
        Ok(f)
    }

    fn evaluated(&self) -> (f64, &[f64]) {
        (self.look0, &self.look)
    }

    fn current(&self) -> (f64, &[f64]) {
        (self.beta0, &self.beta)
    }
}

/// Best point, running average, convergence test and trace.
struct Tracker<'a> {
    objective: BinaryObjective<'a>,
    config: SolverConfig,
    best_obj: f64,
    best0: f64,
    best: Vec<f64>,
    avg_weight: f64,
    avg0: f64,
    avg: Vec<f64>,
    history: Vec<f64>,
    stage_best: f64,
    quiet_stages: usize,
    trace: Vec<TracePoint>,
    trace_every: usize,
    last_change: f64,
}

impl<'a> Tracker<'a> {
    fn new(objective: BinaryObjective<'a>, config: SolverConfig, beta0: f64, beta: &[f64]) -> Self {
        let f0 = objective.value(beta0, beta);
        Self {
            objective,
            config,
            best_obj: f0,
            best0: beta0,
            best: beta.to_vec(),
            avg_weight: 0.0,
            avg0: beta0,
            avg: beta.to_vec(),
            history: Vec::new(),
            stage_best: f0,
            quiet_stages: 0,
            trace: vec![TracePoint {
                iteration: 0,
                objective: f0,
            }],
            trace_every: (config.max_iterations / 100).max(1),
            last_change: f64::INFINITY,
        }
    }

    fn offer(&mut self, f: f64, beta0: f64, beta: &[f64]) {
        if f < self.best_obj {
            self.best_obj = f;
            self.best0 = beta0;
            self.best.copy_from_slice(beta);
        }
    }

    fn accumulate(&mut self, weight: f64, beta0: f64, beta: &[f64]) {
        self.avg_weight += weight;
        let w = weight / self.avg_weight;
        self.avg0 += w * (beta0 - self.avg0);
        for (a, b) in self.avg.iter_mut().zip(beta) {
            *a += w * (b - *a);
        }
    }

    fn offer_average(&mut self) -> f64 {
        let fa = self.objective.value(self.avg0, &self.avg);
        if fa < self.best_obj {
            self.best_obj = fa;
            self.best0 = self.avg0;
            self.best.copy_from_slice(&self.avg);
        }
        fa
    }

    fn clear_average(&mut self) {
        self.avg_weight = 0.0;
    }

    fn relative(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-12)
    }

    /// Window test for the non-restarted schedules.
    fn window_converged(&mut self, tracked: f64) -> bool {
        self.history.push(tracked);
        let w = self.config.window;
        if self.history.len() > w {
            let old = self.history[self.history.len() - 1 - w];
            self.last_change = Self::relative(old, tracked);
            return self.last_change < self.config.tolerance;
        }
        false
    }

    /// Stage test for the restarted schedule: two quiet stages in a row.
    fn stage_converged(&mut self) -> bool {
        self.last_change = Self::relative(self.stage_best, self.best_obj);
        self.stage_best = self.best_obj;
        if self.last_change < self.config.tolerance {
            self.quiet_stages += 1;
        } else {
            self.quiet_stages = 0;
        }
        self.quiet_stages >= 2
    }

    fn note(&mut self, t: usize) {
        if t.is_multiple_of(self.trace_every) {
            self.trace.push(TracePoint {
                iteration: t,
                objective: self.best_obj,
            });
        }
    }
}

fn run<M: Method>(
    objective: BinaryObjective<'_>,
    config: &SolverConfig,
    method: &mut M,
    started: Instant,
) -> Result<Solution> {
    let base = 1.0 / max_row_norm(objective.dataset);
    let (b0, b) = method.current();
    let mut tracker = Tracker::new(objective, *config, b0, b);
    let mut converged = false;
    let mut t = 0;
    while t < config.max_iterations {
        t += 1;
        let (eta, local_t) = match config.step {
            StepSchedule::Constant { scale } => (scale * base, t),
            StepSchedule::Diminishing { scale } => (scale * base / (t as f64).sqrt(), t),
            StepSchedule::Restarted { scale, stage_length } => {
                let stage = (t - 1) / stage_length;
                let local = (t - 1) % stage_length + 1;
                if local == 1 && stage > 0 {
                    method.reset(tracker.best0, &tracker.best);
                    tracker.clear_average();
                }
                (scale * base * 0.5f64.powi(stage.min(1000) as i32), local)
            }
        };
        let f = method.step(eta, local_t)?;
        if !f.is_finite() {
            return Err(Error::NonFinite(t));
        }
        let (e0, e) = method.evaluated();
        tracker.offer(f, e0, e);
        let (c0, c) = method.current();
        if c0.is_nan() || c.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite(t));
        }
        let done = match config.step {
            StepSchedule::Restarted { stage_length, .. } => {
                if config.averaging {
                    tracker.accumulate(1.0, c0, c);
                }
                if t % stage_length == 0 {
                    tracker.offer(objective.value(c0, c), c0, c);
                    if config.averaging {
                        tracker.offer_average();
                    }
                    tracker.stage_converged()
                } else {
                    false
                }
            }
            _ => {
                let tracked = if config.averaging {
                    tracker.accumulate(eta, c0, c);
                    tracker.offer_average()
                } else {
                    tracker.best_obj
                };
                tracker.window_converged(tracked)
            }
        };
        tracker.note(t);
        if done {
            converged = true;
            break;
        }
    }
    let (c0, c) = method.current();
    let c = c.to_vec();
    tracker.offer(objective.value(c0, &c), c0, &c);
    let final_objective = objective.value(tracker.best0, &tracker.best);
    if tracker.trace.last().map(|p| p.iteration) != Some(t) {
        tracker.trace.push(TracePoint {
            iteration: t,
            objective: final_objective,
        });
    } else if let Some(last) = tracker.trace.last_mut() {
        last.objective = final_objective;
    }
    Ok(Solution {
        beta0: tracker.best0,
        beta: tracker.best,
        report: SolveReport {
            iterations: t,
            final_objective,
            trace: tracker.trace,
            converged,
            tolerance_achieved: tracker.last_change,
            wall_time: started.elapsed(),
        },
    })
}

fn initial_point(p: usize, warm: Option<(f64, &[f64])>) -> Result<(f64, Vec<f64>)> {
    match warm {
        None => Ok((0.0, vec![0.0; p])),
        Some((b0, b)) if b.len() == p && b0.is_finite() && b.iter().all(|v| v.is_finite()) => Ok((b0, b.to_vec())),
        Some(_) => Err(Error::DimensionMismatch(
            "warm start must be finite with one coefficient per feature".into(),
        )),
    }
}

/// Proximal subgradient method for the L2, L1 and elastic-net penalties:
/// `b <- prox(b - eta_t g_t, eta_t / n)` with `g_t` the averaged hinge
/// subgradient; the intercept takes a plain subgradient step.
pub fn prox_subgradient_solve(
    objective: &BinaryObjective<'_>,
    config: &SolverConfig,
    warm: Option<(f64, &[f64])>,
) -> Result<Solution> {
    config.validate()?;
    if matches!(objective.penalty, PenaltySpec::KSupport { .. }) {
        return Err(Error::UnsupportedProx);
    }
    let started = Instant::now();
    let d = objective.dataset;
    d.check_binary()?;
    objective.penalty.validate(d.n_features())?;
    let p = d.n_features();
    let (beta0, beta) = initial_point(p, warm)?;
    let mut method = ProxMethod {
        objective: *objective,
        beta0,
        prev0: beta0,
        prev: beta.clone(),
        beta,
        g0: 0.0,
        g: vec![0.0; p],
    };
    run(*objective, config, &mut method, started)
}

/// Nesterov-style momentum on the k-support objective, using
/// [`ksupport_subgradient`] for the penalty part. Momentum is reset at every
/// restart of a [`StepSchedule::Restarted`] schedule.
pub fn accelerated_subgradient_solve(
    dataset: &Dataset,
    penalty: &PenaltySpec,
    config: &SolverConfig,
    warm: Option<(f64, &[f64])>,
) -> Result<Solution> {
    config.validate()?;
    let PenaltySpec::KSupport { lambda, k } = *penalty else {
        return Err(Error::InvalidParameter(
            "accelerated solver expects a k-support penalty".into(),
        ));
    };
    let started = Instant::now();
    let objective = BinaryObjective::new(dataset, *penalty)?;
    let p = dataset.n_features();
    let (beta0, beta) = initial_point(p, warm)?;
    let mut method = MomentumMethod {
        objective,
        k,
        weight: lambda / dataset.n_samples() as f64,
        beta0,
        prev0: beta0,
        look0: beta0,
        prev: beta.clone(),
        look: beta.clone(),
        beta,
        g0: 0.0,
        g: vec![0.0; p],
    };
    run(objective, config, &mut method, started)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::{binary_l1_svm_to_lp, simplex_solve};
    use crate::matcore::{norm2, standard_normal, DenseMatrix, RngSeed};
    use rand::Rng;

    fn random_binary(seed: u64, n: usize, p: usize) -> Dataset {
        let mut rng = RngSeed(seed).rng();
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..p).map(|_| standard_normal(&mut rng)).collect())
            .collect();
        let mut y: Vec<i32> = rows
            .iter()
            .map(|r| {
                if r[0] + 0.8 * standard_normal(&mut rng) > 0.0 {
                    1
                } else {
                    -1
                }
            })
            .collect();
        y[0] = 1;
        y[1] = -1;
        Dataset::new(DenseMatrix::from_rows(&rows).unwrap(), y).unwrap()
    }

    #[test]
    fn objective_value_examples() {
        let d = random_binary(1, 7, 3);
        let zero = objective_value(&d, &PenaltySpec::L2 { lambda: 5.0 }, 0.0, &[0.0; 3]).unwrap();
        assert_eq!(zero, 7.0);
        let hand = Dataset::new(DenseMatrix::from_rows(&[vec![1.0], vec![-1.0]]).unwrap(), vec![1, -1]).unwrap();
        let v = objective_value(&hand, &PenaltySpec::L1 { lambda: 1.0 }, 0.0, &[0.5]).unwrap();
        assert!((v - 1.5).abs() < 1e-15);
        let sep = objective_value(&hand, &PenaltySpec::L2 { lambda: 2.0 }, 0.0, &[3.0]).unwrap();
        assert!((sep - 9.0).abs() < 1e-15);
        assert!(objective_value(&hand, &PenaltySpec::L1 { lambda: 1.0 }, 0.0, &[0.5, 1.0]).is_err());
    }

    #[test]
    fn l1_matches_simplex_within_one_percent() {
        for inst in 0..20u64 {
            let n = 8 + (inst as usize * 7) % 13;
            let p = 1 + inst as usize % 4;
            let d = random_binary(100 + inst, n, p);
            let lambda = [0.1, 0.5, 1.0, 2.0][inst as usize % 4];
            let (lp, _) = binary_l1_svm_to_lp(&d, lambda).unwrap();
            let exact = simplex_solve(&lp).unwrap().objective;
            let obj = BinaryObjective::new(&d, PenaltySpec::L1 { lambda }).unwrap();
            let s = prox_subgradient_solve(&obj, &SolverConfig::default(), None).unwrap();
            let rel = (s.report.final_objective - exact) / exact;
            assert!(rel >= -1e-9, "iterate beats the LP optimum: {rel}");
            assert!(rel <= 0.01, "instance {inst}: {} vs {exact}", s.report.final_objective);
        }
    }

    #[test]
    fn diminishing_schedule_also_approaches_the_optimum() {
        let d = random_binary(3, 12, 2);
        let (lp, _) = binary_l1_svm_to_lp(&d, 1.0).unwrap();
        let exact = simplex_solve(&lp).unwrap().objective;
        let obj = BinaryObjective::new(&d, PenaltySpec::L1 { lambda: 1.0 }).unwrap();
        let cfg = SolverConfig {
            step: StepSchedule::Diminishing { scale: 1.0 },
            max_iterations: 20_000,
            tolerance: 1e-9,
            ..SolverConfig::default()
        };
        let s = prox_subgradient_solve(&obj, &cfg, None).unwrap();
        assert!((s.report.final_objective - exact) / exact <= 0.01);
    }

    #[test]
    fn separable_pair_l2() {
        let d = Dataset::new(DenseMatrix::from_rows(&[vec![1.0], vec![-1.0]]).unwrap(), vec![1, -1]).unwrap();
        let obj = BinaryObjective::new(&d, PenaltySpec::L2 { lambda: 0.1 }).unwrap();
        let s = prox_subgradient_solve(&obj, &SolverConfig::default(), None).unwrap();
        assert!(s.beta[0] > 0.0);
        assert!(s.beta0 + s.beta[0] > 0.0 && s.beta0 - s.beta[0] < 0.0);
    }

    #[test]
    fn report_matches_returned_iterate_and_trace_is_monotone() {
        let d = random_binary(9, 20, 4);
        for pen in [
            PenaltySpec::L2 { lambda: 0.5 },
            PenaltySpec::ElasticNet {
                lambda1: 0.3,
                lambda2: 0.3,
            },
            PenaltySpec::KSupport { lambda: 1.0, k: 2 },
        ] {
            for step in [
                StepSchedule::default(),
                StepSchedule::Diminishing { scale: 1.0 },
                StepSchedule::Constant { scale: 0.1 },
            ] {
                let cfg = SolverConfig {
                    step,
                    max_iterations: 800,
                    ..SolverConfig::default()
                };
                let s = if let PenaltySpec::KSupport { .. } = pen {
                    accelerated_subgradient_solve(&d, &pen, &cfg, None).unwrap()
                } else {
                    prox_subgradient_solve(&BinaryObjective::new(&d, pen).unwrap(), &cfg, None).unwrap()
                };
                let direct = objective_value(&d, &pen, s.beta0, &s.beta).unwrap();
                assert!((direct - s.report.final_objective).abs() <= 1e-12);
                assert!(s.report.trace.windows(2).all(|w| w[1].objective <= w[0].objective));
                assert!(s.report.final_objective <= d.n_samples() as f64);
            }
        }
    }

    #[test]
    fn runs_are_bitwise_deterministic() {
        let d = random_binary(4, 15, 3);
        let pen = PenaltySpec::KSupport { lambda: 0.7, k: 2 };
        let a = accelerated_subgradient_solve(&d, &pen, &SolverConfig::default(), None).unwrap();
        let b = accelerated_subgradient_solve(&d, &pen, &SolverConfig::default(), None).unwrap();
        assert_eq!(a.beta0.to_bits(), b.beta0.to_bits());
        assert!(a.beta.iter().zip(&b.beta).all(|(x, y)| x.to_bits() == y.to_bits()));
    }

    #[test]
    fn huge_penalty_shrinks_to_zero() {
        let d = random_binary(5, 16, 3);
        for pen in [
            PenaltySpec::L2 { lambda: 1e4 },
            PenaltySpec::L1 { lambda: 1e4 },
            PenaltySpec::ElasticNet {
                lambda1: 1e4,
                lambda2: 0.0,
            },
        ] {
            let s = prox_subgradient_solve(&BinaryObjective::new(&d, pen).unwrap(), &SolverConfig::default(), None)
                .unwrap();
            assert!(s.beta.iter().all(|b| b.abs() <= 1e-3), "{pen:?} {:?}", s.beta);
        }
        let s = accelerated_subgradient_solve(
            &d,
            &PenaltySpec::KSupport { lambda: 1e4, k: 2 },
            &SolverConfig::default(),
            None,
        )
        .unwrap();
        assert!(s.beta.iter().all(|b| b.abs() <= 1e-3));
    }

    #[test]
    fn ksupport_with_full_k_matches_linearized_l2() {
        let d = random_binary(21, 20, 2);
        let lambda = 2.0;
        let cfg = SolverConfig {
            max_iterations: 20_000,
            tolerance: 1e-10,
            ..SolverConfig::default()
        };
        let ks = accelerated_subgradient_solve(&d, &PenaltySpec::KSupport { lambda, k: 2 }, &cfg, None).unwrap();
        let l2_lambda = lambda / norm2(&ks.beta);
        let obj = BinaryObjective::new(&d, PenaltySpec::L2 { lambda: l2_lambda }).unwrap();
        let l2 = prox_subgradient_solve(&obj, &cfg, None).unwrap();
        let diff: Vec<f64> = ks.beta.iter().zip(&l2.beta).map(|(a, b)| a - b).collect();
        assert!(norm2(&diff) <= 0.05 * norm2(&l2.beta), "{:?} vs {:?}", ks.beta, l2.beta);
    }

    #[test]
    fn warm_start_is_validated_and_used() {
        let d = random_binary(6, 12, 2);
        let obj = BinaryObjective::new(&d, PenaltySpec::L1 { lambda: 0.5 }).unwrap();
        assert!(prox_subgradient_solve(&obj, &SolverConfig::default(), Some((0.0, &[1.0]))).is_err());
        let cold = prox_subgradient_solve(&obj, &SolverConfig::default(), None).unwrap();
        let cfg = SolverConfig {
            max_iterations: 1,
            ..SolverConfig::default()
        };
        let warm = prox_subgradient_solve(&obj, &cfg, Some((cold.beta0, &cold.beta))).unwrap();
        assert!(warm.report.final_objective <= cold.report.final_objective);
    }

    #[test]
    fn config_validation() {
        let bad = [
            SolverConfig {
                max_iterations: 0,
                ..SolverConfig::default()
            },
            SolverConfig {
                tolerance: 0.0,
                ..SolverConfig::default()
            },
            SolverConfig {
                step: StepSchedule::Constant { scale: -1.0 },
                ..SolverConfig::default()
            },
            SolverConfig {
                step: StepSchedule::Restarted {
                    scale: 1.0,
                    stage_length: 0,
                },
                ..SolverConfig::default()
            },
        ];
        for c in bad {
            assert!(c.validate().is_err(), "{c:?}");
        }
        let d = random_binary(6, 12, 2);
        let obj = BinaryObjective::new(&d, PenaltySpec::KSupport { lambda: 1.0, k: 1 }).unwrap();
        assert!(matches!(
            prox_subgradient_solve(&obj, &SolverConfig::default(), None),
            Err(Error::UnsupportedProx)
        ));
    }

    /// Central differences at random points where no margin sits at a kink
    /// and no coordinate is zero.
    #[test]
    fn full_subgradient_matches_finite_differences() {
        let d = random_binary(77, 15, 4);
        let mut rng = RngSeed(78).rng();
        let h = 1e-6;
        for pen in [
            PenaltySpec::L2 { lambda: 0.7 },
            PenaltySpec::L1 { lambda: 0.7 },
            PenaltySpec::ElasticNet {
                lambda1: 0.4,
                lambda2: 0.9,
            },
            PenaltySpec::KSupport { lambda: 1.3, k: 2 },
        ] {
            let mut checked = 0;
            while checked < 100 {
                let b0: f64 = rng.random_range(-1.0..1.0);
                let b: Vec<f64> = (0..4).map(|_| rng.random_range(-2.0..2.0)).collect();
                let margins_ok = (0..d.n_samples()).all(|i| {
                    let m = d.y[i] as f64 * (b0 + dot(d.row(i), &b));
                    (m - 1.0).abs() > 1e-3
                });
                if !margins_ok || b.iter().any(|v| v.abs() < 1e-3) {
                    continue;
                }
                checked += 1;
                let (g0, g) = objective_subgradient(&d, &pen, b0, &b).unwrap();
                let f = |b0: f64, b: &[f64]| objective_value(&d, &pen, b0, b).unwrap();
                let fd0 = (f(b0 + h, &b) - f(b0 - h, &b)) / (2.0 * h);
                assert!((fd0 - g0).abs() <= 1e-5f64.max(1e-4 * g0.abs()));
                for j in 0..4 {
                    let mut up = b.clone();
                    let mut dn = b.clone();
                    up[j] += h;
                    dn[j] -= h;
                    let fd = (f(b0, &up) - f(b0, &dn)) / (2.0 * h);
                    assert!(
                        (fd - g[j]).abs() <= 1e-5f64.max(1e-4 * g[j].abs()),
                        "{pen:?} coord {j}: fd {fd} vs {}",
                        g[j]
                    );
                }
            }
        }
    }
}
