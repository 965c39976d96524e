use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::{LpSolution, LpStatus, RowSense, StandardFormLP};

const PIVOT_TOL: f64 = 1e-9;
const FEAS_TOL: f64 = 1e-9;
const OPT_TOL: f64 = 1e-10;

/// Pricing rule. Both are deterministic; ties always go to the lowest index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PivotRule {
    /// Lowest-index eligible variable (anti-cycling).
    #[default]
    Bland,
    /// Most negative reduced cost (primal) or most infeasible row (dual).
    /// Falls back to Bland after a run of degenerate pivots.
    Dantzig,
    /// Dual steepest edge: the dual method picks the row maximizing
    /// `infeasibility^2 / |e_r B^-1|^2`; the primal method prices like
    /// `Dantzig`. Same Bland fallback.
    SteepestEdge,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimplexOptions {
    pub rule: PivotRule,
    /// Pivot budget; `None` means `50 * (rows + cols)`.
    pub max_iterations: Option<usize>,
}

pub fn simplex_solve(lp: &StandardFormLP) -> Result<LpSolution> {
    simplex_solve_with(lp, SimplexOptions::default())
}

/// Solves `lp`.
///
/// When every cost is nonnegative the all-slack basis is dual feasible and
/// the dual simplex method runs from it directly (equality rows become two
/// inequalities). Otherwise a two-phase primal method with artificial
/// variables is used; a positive phase-one optimum means infeasible.
pub fn simplex_solve_with(lp: &StandardFormLP, opts: SimplexOptions) -> Result<LpSolution> {
    lp.validate()?;
    let cap = opts.max_iterations.unwrap_or(50 * (lp.n_rows() + lp.n_vars()).max(1));
    let mut solver = if lp.c.iter().all(|&c| c >= 0.0) {
        Solver::dual_start(lp, opts.rule, cap)
    } else {
        Solver::primal_start(lp, opts.rule, cap)
    };
    let status = solver.run(lp)?;
    Ok(solver.solution(&lp.c, status))
}

/// Row-major tableau `[B^-1 A | B^-1 b]` plus reduced-cost row
/// `[d | -objective]`.
struct Tableau {
    m: usize,
    width: usize,
    t: Vec<f64>,
    obj: Vec<f64>,
    basis: Vec<usize>,
    nz: Vec<usize>,
    prow: Vec<f64>,
    /// `|e_r B^-1|^2` per row, tracked when the columns from `inverse_start`
    /// on hold `B^-1` (slack-started dual tableaus).
    weights: Option<Vec<f64>>,
    inverse_start: usize,
}

impl Tableau {
    fn new(m: usize, width: usize) -> Self {
        Self {
            m,
            width,
            t: vec![0.0; m * (width + 1)],
            obj: vec![0.0; width + 1],
            basis: vec![0; m],
            nz: Vec::with_capacity(width + 1),
            prow: Vec::with_capacity(width + 1),
            weights: None,
            inverse_start: width,
        }
    }

    #[inline]
    fn at(&self, i: usize, j: usize) -> f64 {
        self.t[i * (self.width + 1) + j]
    }

    #[inline]
    fn set(&mut self, i: usize, j: usize, v: f64) {
        self.t[i * (self.width + 1) + j] = v;
    }

    #[inline]
    fn rhs(&self, i: usize) -> f64 {
        self.at(i, self.width)
    }

    fn pivot(&mut self, r: usize, s: usize) {
        let w1 = self.width + 1;
        let inv = 1.0 / self.at(r, s);
        let ks = self.inverse_start;
        self.nz.clear();
        self.prow.clear();
        {
            let row = &mut self.t[r * w1..(r + 1) * w1];
            for (j, v) in row.iter_mut().enumerate() {
                if *v != 0.0 {
                    *v *= inv;
                    self.nz.push(j);
                    self.prow.push(*v);
                }
            }
            row[s] = 1.0;
        }
        let k0 = self.nz.partition_point(|&j| j < ks);
        let k1 = self.nz.partition_point(|&j| j < self.width);
        let wr: f64 = self.prow[k0..k1].iter().map(|p| p * p).sum();
        for i in 0..self.m {
            if i == r {
                continue;
            }
            let row = &mut self.t[i * w1..(i + 1) * w1];
            let f = row[s];
            if f == 0.0 {
                continue;
            }
            match &mut self.weights {
                None => {
                    for (&j, &p) in self.nz.iter().zip(&self.prow) {
                        row[j] -= f * p;
                    }
                }
                Some(w) => {
                    // nz is sorted: plain columns, then B^-1 columns, then rhs
                    let mut delta = 0.0;
                    for (&j, &p) in self.nz[..k0].iter().zip(&self.prow[..k0]) {
                        row[j] -= f * p;
                    }
                    for (&j, &p) in self.nz[k0..k1].iter().zip(&self.prow[k0..k1]) {
                        let old = row[j];
                        let new = old - f * p;
                        row[j] = new;
                        delta += new * new - old * old;
                    }
                    for (&j, &p) in self.nz[k1..].iter().zip(&self.prow[k1..]) {
                        row[j] -= f * p;
                    }
                    w[i] = (w[i] + delta).max(1e-12);
                }
            }
            row[s] = 0.0;
        }
        if let Some(w) = &mut self.weights {
            w[r] = wr.max(1e-12);
        }
        let f = self.obj[s];
        if f != 0.0 {
            for (&j, &p) in self.nz.iter().zip(&self.prow) {
                self.obj[j] -= f * p;
            }
            self.obj[s] = 0.0;
        }
        self.basis[r] = s;
    }
}

enum Mode {
    Dual,
    Primal { artificial_start: usize },
}

struct Solver {
    tab: Tableau,
    mode: Mode,
    rule: PivotRule,
    cap: usize,
    iterations: usize,
    degenerate_run: usize,
}

impl Solver {
    fn dual_start(lp: &StandardFormLP, rule: PivotRule, cap: usize) -> Self {
        let n = lp.n_vars();
        // every row as <=, equalities doubled
        let mut rows: Vec<(usize, f64)> = Vec::new();
        for i in 0..lp.n_rows() {
            match lp.senses[i] {
                RowSense::Le => rows.push((i, 1.0)),
                RowSense::Ge => rows.push((i, -1.0)),
                RowSense::Eq => {
                    rows.push((i, 1.0));
                    rows.push((i, -1.0));
                }
            }
        }
        let m = rows.len();
        let mut tab = Tableau::new(m, n + m);
        for (r, &(i, sign)) in rows.iter().enumerate() {
            for (j, &a) in lp.a.row(i).iter().enumerate() {
                if a != 0.0 {
                    tab.set(r, j, sign * a);
                }
            }
            tab.set(r, n + r, 1.0);
            tab.set(r, n + m, sign * lp.b[i]);
            tab.basis[r] = n + r;
        }
        tab.obj[..n].copy_from_slice(&lp.c);
        if rule == PivotRule::SteepestEdge {
            tab.inverse_start = n;
            tab.weights = Some(vec![1.0; m]);
        }
        Self {
            tab,
            mode: Mode::Dual,
            rule,
            cap,
            iterations: 0,
            degenerate_run: 0,
        }
    }

    fn primal_start(lp: &StandardFormLP, rule: PivotRule, cap: usize) -> Self {
        let n = lp.n_vars();
        let m = lp.n_rows();
        // flip rows so that b >= 0
        let mut rows = Vec::with_capacity(m);
        for i in 0..m {
            let flip = lp.b[i] < 0.0;
            let sense = match (lp.senses[i], flip) {
                (s, false) => s,
                (RowSense::Le, true) => RowSense::Ge,
                (RowSense::Ge, true) => RowSense::Le,
                (RowSense::Eq, true) => RowSense::Eq,
            };
            rows.push((if flip { -1.0 } else { 1.0 }, sense));
        }
        let n_slack = rows.iter().filter(|(_, s)| *s != RowSense::Eq).count();
        let n_art = rows.iter().filter(|(_, s)| *s != RowSense::Le).count();
        let artificial_start = n + n_slack;
        let width = artificial_start + n_art;
        let mut tab = Tableau::new(m, width);
        let (mut next_slack, mut next_art) = (n, artificial_start);
        for (i, &(sign, sense)) in rows.iter().enumerate() {
            for (j, &a) in lp.a.row(i).iter().enumerate() {
                if a != 0.0 {
                    tab.set(i, j, sign * a);
                }
            }
            tab.set(i, width, sign * lp.b[i]);
            match sense {
                RowSense::Le => {
                    tab.set(i, next_slack, 1.0);
                    tab.basis[i] = next_slack;
                    next_slack += 1;
                }
                RowSense::Ge => {
                    tab.set(i, next_slack, -1.0);
                    next_slack += 1;
                    tab.set(i, next_art, 1.0);
                    tab.basis[i] = next_art;
                    next_art += 1;
                }
                RowSense::Eq => {
                    tab.set(i, next_art, 1.0);
                    tab.basis[i] = next_art;
                    next_art += 1;
                }
            }
        }
        // phase-one costs: sum of artificials, priced out of the basis
        for j in artificial_start..width {
            tab.obj[j] = 1.0;
        }
        for i in 0..m {
            if tab.basis[i] >= artificial_start {
                for j in 0..=width {
                    tab.obj[j] -= tab.at(i, j);
                }
            }
        }
        Self {
            tab,
            mode: Mode::Primal { artificial_start },
            rule,
            cap,
            iterations: 0,
            degenerate_run: 0,
        }
    }

    fn run(&mut self, lp: &StandardFormLP) -> Result<LpStatus> {
        match self.mode {
            Mode::Dual => self.dual_loop(),
            Mode::Primal { artificial_start } => {
                let width = self.tab.width;
                match self.primal_loop(width)? {
                    LpStatus::Optimal => {}
                    // phase one is bounded below by zero
                    _ => return Err(Error::Internal("phase one reported unbounded".into())),
                }
                let scale = 1.0 + lp.b.iter().map(|b| b.abs()).fold(0.0, f64::max);
                if -self.tab.obj[width] > FEAS_TOL * scale {
                    return Ok(LpStatus::Infeasible);
                }
                self.expel_artificials(artificial_start);
                self.load_phase_two_costs(lp, artificial_start);
                self.primal_loop(artificial_start)
            }
        }
    }

    fn solution(&self, c: &[f64], status: LpStatus) -> LpSolution {
        let n = c.len();
        let mut z = vec![0.0; n];
        if status == LpStatus::Optimal {
            for (r, &j) in self.tab.basis.iter().enumerate() {
                if j < n {
                    let v = self.tab.rhs(r);
                    // roundoff below zero
                    z[j] = if v < 0.0 && v > -FEAS_TOL { 0.0 } else { v };
                }
            }
        }
        let objective = match status {
            LpStatus::Optimal => c.iter().zip(&z).map(|(c, v)| c * v).sum(),
            LpStatus::Infeasible => f64::INFINITY,
            LpStatus::Unbounded => f64::NEG_INFINITY,
        };
        LpSolution {
            status,
            z,
            objective,
            iterations: self.iterations,
        }
    }

    fn tick(&mut self) -> Result<()> {
        self.iterations += 1;
        if self.iterations > self.cap {
            return Err(Error::IterationLimit {
                cap: self.cap,
                basis: self.tab.basis.clone(),
            });
        }
        Ok(())
    }

    fn use_bland(&self) -> bool {
        self.rule == PivotRule::Bland || self.degenerate_run > 50
    }

    /// Primal simplex over columns `0..allowed`.
    fn primal_loop(&mut self, allowed: usize) -> Result<LpStatus> {
        loop {
            let bland = self.use_bland();
            let mut entering = None;
            let mut best = -OPT_TOL;
            for j in 0..allowed {
                let d = self.tab.obj[j];
                if d < -OPT_TOL {
                    if bland {
                        entering = Some(j);
                        break;
                    }
                    if d < best {
                        best = d;
                        entering = Some(j);
                    }
                }
            }
            let Some(s) = entering else {
                return Ok(LpStatus::Optimal);
            };
            let mut leaving: Option<(usize, f64)> = None;
            for i in 0..self.tab.m {
                let a = self.tab.at(i, s);
                if a > PIVOT_TOL {
                    let ratio = self.tab.rhs(i).max(0.0) / a;
                    leaving = match leaving {
                        None => Some((i, ratio)),
                        Some((r, best)) => {
                            if ratio < best - 1e-12 * (1.0 + best)
                                || (ratio <= best + 1e-12 * (1.0 + best) && self.tab.basis[i] < self.tab.basis[r])
                            {
                                Some((i, ratio.min(best)))
                            } else {
                                Some((r, best))
                            }
                        }
                    };
                }
            }
            let Some((r, ratio)) = leaving else {
                return Ok(LpStatus::Unbounded);
            };
            self.tick()?;
            self.note_degeneracy(ratio == 0.0);
            self.tab.pivot(r, s);
        }
    }

    fn dual_loop(&mut self) -> Result<LpStatus> {
        let width = self.tab.width;
        loop {
            let bland = self.use_bland();
            let mut leaving: Option<usize> = None;
            let mut best_score = 0.0;
            for i in 0..self.tab.m {
                let v = self.tab.rhs(i);
                if v < -FEAS_TOL {
                    let score = match (&self.tab.weights, bland) {
                        (_, true) => 0.0,
                        (Some(w), false) => v * v / w[i],
                        (None, false) => -v,
                    };
                    let better = match leaving {
                        None => true,
                        Some(r) if bland => self.tab.basis[i] < self.tab.basis[r],
                        Some(r) => score > best_score || (score == best_score && self.tab.basis[i] < self.tab.basis[r]),
                    };
                    if better {
                        leaving = Some(i);
                        best_score = score;
                    }
                }
            }
            let Some(r) = leaving else {
                return Ok(LpStatus::Optimal);
            };
            let mut entering: Option<(usize, f64)> = None;
            for j in 0..width {
                let a = self.tab.at(r, j);
                if a < -PIVOT_TOL {
                    let ratio = self.tab.obj[j].max(0.0) / -a;
                    match entering {
                        Some((_, best)) if ratio >= best - 1e-12 * (1.0 + best) => {}
                        _ => entering = Some((j, ratio)),
                    }
                }
            }
            let Some((s, ratio)) = entering else {
                return Ok(LpStatus::Infeasible);
            };
            self.tick()?;
            self.note_degeneracy(ratio == 0.0);
            self.tab.pivot(r, s);
        }
    }

    fn note_degeneracy(&mut self, degenerate: bool) {
        if degenerate {
            self.degenerate_run += 1;
        } else {
            self.degenerate_run = 0;
        }
    }

    /// Pivots zero-valued artificials out of the basis where possible. Rows
    /// where that is impossible are redundant and keep a zero artificial.
    fn expel_artificials(&mut self, artificial_start: usize) {
        for r in 0..self.tab.m {
            if self.tab.basis[r] < artificial_start {
                continue;
            }
            let col = (0..artificial_start)
                .filter(|&j| self.tab.at(r, j).abs() > PIVOT_TOL)
                .max_by(|&a, &b| self.tab.at(r, a).abs().total_cmp(&self.tab.at(r, b).abs()));
            if let Some(j) = col {
                self.tab.pivot(r, j);
            }
        }
    }

    fn load_phase_two_costs(&mut self, lp: &StandardFormLP, artificial_start: usize) {
        let width = self.tab.width;
        let n = lp.n_vars();
        self.tab.obj.fill(0.0);
        self.tab.obj[..n].copy_from_slice(&lp.c);
        for r in 0..self.tab.m {
            let j = self.tab.basis[r];
            if j < n && lp.c[j] != 0.0 {
                let c = lp.c[j];
                for k in 0..=width {
                    self.tab.obj[k] -= c * self.tab.at(r, k);
                }
            }
        }
        // artificial columns never re-enter
        for j in artificial_start..width {
            self.tab.obj[j] = 0.0;
        }
    }
}
