//! Backward-induction value tables and optimal acceptance thresholds.
//!
//! The state before interviewing candidate `j` is the pair `(X, Y)`: `X`
//! positions still empty, `Y` positions still held by preselected employees.
//! `V[j][X][Y]` is the best expected controllable reward from that point on —
//! scores of candidates hired from `j` onward plus the scores of whichever
//! preselected employees are still in place at the end.
//!
//! One induction step averages, over the incoming score `S`, the better of
//! rejecting (`V[j+1][X][Y]`) and accepting (`S` plus the better of filling
//! an empty position or replacing the worst retained incumbent). Written with
//! the threshold `Z = V[j+1][X][Y] - best accept continuation`, the step
//! collapses to
//!
//! ```text
//! V[j] = V[j+1] + Z·(F(Z) - 1) + E[S·1{S > Z}]
//! ```
//!
//! which needs only the closed forms from [`crate::dist`]. Boundary layers
//! are pinned directly: a state with more empty positions than remaining
//! candidates is infeasible (stored as `0`), and a state with exactly as many
//! is a forced fill worth `X·mean + Σ retained preselection scores`.
//!
//! The candidate is accepted exactly when the score strictly beats
//! `T[j][X][Y] = V[j+1][X][Y] - max(V[j+1][X-1][Y], V[j+1][X][Y-1])`.
//!
//! The rank-based variant replaces scores with absolute ranks (lower is
//! better) and minimizes the expected rank sum; it serves the no-information
//! regime where only pairwise comparisons are available.

use crate::dist::ScoreDistribution;
use crate::{Error, Result};
use std::fmt::Write as _;

/// One selection round's problem data.
#[derive(Debug, Clone, PartialEq)]
pub struct WsspInstance {
    candidates: usize,
    positions: usize,
    empty_at_start: usize,
    preselection: Vec<f64>,
    dist: ScoreDistribution,
}

impl WsspInstance {
    /// Validates and normalizes a round: `1 <= b <= n`, `r <= b`, exactly
    /// `b - r` preselection scores, every score inside the distribution
    /// support. Preselection scores are sorted descending.
    pub fn new(
        candidates: usize,
        positions: usize,
        empty_at_start: usize,
        mut preselection: Vec<f64>,
        dist: ScoreDistribution,
    ) -> Result<Self> {
        if positions == 0 {
            return Err(Error::InvalidInstance("b must be at least 1".into()));
        }
        if positions > candidates {
            return Err(Error::InvalidInstance(format!(
                "b = {positions} exceeds n = {candidates}"
            )));
        }
        if empty_at_start > positions {
            return Err(Error::InvalidInstance(format!(
                "r = {empty_at_start} exceeds b = {positions}"
            )));
        }
        let expected = positions - empty_at_start;
        if preselection.len() != expected {
            return Err(Error::InvalidInstance(format!(
                "expected {expected} preselection score(s) (b - r), got {}",
                preselection.len()
            )));
        }
        for &s in &preselection {
            if !s.is_finite() || !dist.in_support(s) {
                return Err(Error::InvalidInstance(format!(
                    "preselection score {s} lies outside the support of {dist}"
                )));
            }
        }
        preselection.sort_by(|a, b| b.total_cmp(a));
        Ok(Self {
            candidates,
            positions,
            empty_at_start,
            preselection,
            dist,
        })
    }

    /// Number of candidates to be interviewed (`n`).
    pub fn candidates(&self) -> usize {
        self.candidates
    }

    /// Number of job positions (`b`).
    pub fn positions(&self) -> usize {
        self.positions
    }

    /// Positions empty at the start of the round (`r`).
    pub fn empty_at_start(&self) -> usize {
        self.empty_at_start
    }

    /// Preselection scores, sorted descending (`b - r` of them).
    pub fn preselection(&self) -> &[f64] {
        &self.preselection
    }

    pub fn dist(&self) -> &ScoreDistribution {
        &self.dist
    }

    /// Cumulative sums of the top preselection scores; `prefix[y]` is the
    /// reward retained when exactly the `y` best incumbents stay.
    fn preselection_prefix(&self) -> Vec<f64> {
        let mut prefix = Vec::with_capacity(self.preselection.len() + 1);
        prefix.push(0.0);
        for &s in &self.preselection {
            prefix.push(prefix.last().unwrap() + s);
        }
        prefix
    }
}

/// One induction step of the generic recurrence.
///
/// `v_next` is the reject continuation, `v_accept_best` the best accept
/// continuation. Accepting is optional, so the result never drops below
/// `v_next`; the closed forms keep that up to rounding, which the final
/// `max` absorbs.
pub fn value_recurrence_step(v_next: f64, v_accept_best: f64, dist: &ScoreDistribution) -> f64 {
    let z = v_next - v_accept_best;
    let v = v_next + z * (dist.cdf(z) - 1.0) + dist.upper_partial_expectation(z);
    v.max(v_next)
}

/// The uniform specialization of [`value_recurrence_step`], as a quadratic in
/// the threshold. The threshold is clamped into `[lower, upper]` before the
/// quadratic form; on that range the two paths agree to rounding.
pub fn uniform_recurrence_step(
    v_next: f64,
    v_accept_best: f64,
    lower: f64,
    upper: f64,
) -> Result<f64> {
    if !(lower < upper) {
        return Err(Error::InvalidDistribution(format!(
            "uniform requires lower < upper, got [{lower}, {upper}]"
        )));
    }
    let z = (v_next - v_accept_best).clamp(lower, upper);
    let increment = (z * z - 2.0 * lower * z + upper * upper) / (2.0 * (upper - lower)) - z;
    Ok(v_next + increment)
}

/// Dense value grid `V[j][X][Y]` for `j in 1..=n+1`, `X in 0..=r`,
/// `Y in 0..=b-r`, plus the thresholds it induces.
#[derive(Debug, Clone)]
pub struct ValueTable {
    instance: WsspInstance,
    /// Layer-major storage; layer `j` holds `(r+1) * (b-r+1)` entries.
    values: Vec<f64>,
    prefix: Vec<f64>,
}

impl ValueTable {
    /// Full backward induction over `j = n+1 .. 1`.
    ///
    /// Every `(X, Y)` cell is computed, including states unreachable under
    /// the selection rules, because the accept branch of neighbouring states
    /// reads them.
    pub fn build(instance: &WsspInstance) -> Self {
        let prefix = instance.preselection_prefix();
        let mu = instance.dist.mean();
        let width = layer_width(instance);
        let n = instance.candidates;

        let mut values = vec![0.0; (n + 1) * width];
        // Terminal layer: only X = 0 is feasible; the Y best incumbents
        // contribute their scores.
        for y in 0..=instance.positions - instance.empty_at_start {
            values[(n + 1 - 1) * width + y] = prefix[y];
        }
        for j in (1..=n).rev() {
            let (head, tail) = values.split_at_mut(j * width);
            let layer = &mut head[(j - 1) * width..];
            let next = &tail[..width];
            fill_layer(instance, &prefix, mu, j, next, layer);
        }
        Self {
            instance: instance.clone(),
            values,
            prefix,
        }
    }

    pub fn instance(&self) -> &WsspInstance {
        &self.instance
    }

    /// `V[j][X][Y]` for `j in 1..=n+1`.
    pub fn value(&self, j: usize, empty: usize, held: usize) -> Result<f64> {
        self.check_state(j, empty, held, self.instance.candidates + 1)?;
        Ok(self.values[(j - 1) * layer_width(&self.instance) + cell(&self.instance, empty, held)])
    }

    /// Optimal acceptance threshold `T[j][X][Y]` for `j in 1..=n`.
    ///
    /// A candidate is hired exactly when their score strictly beats this.
    /// With no capacity left (`X = Y = 0`) the threshold is `+inf`; at forced
    /// fills it is negative because the reject continuation is infeasible,
    /// so any non-negative score passes.
    pub fn threshold(&self, j: usize, empty: usize, held: usize) -> Result<f64> {
        self.check_state(j, empty, held, self.instance.candidates)?;
        let width = layer_width(&self.instance);
        let next = &self.values[j * width..(j + 1) * width];
        Ok(threshold_from_next(&self.instance, next, empty, held))
    }

    /// Whether the accept branch at `(j, X, Y)` prefers filling an empty
    /// position over replacing an incumbent. Ties prefer filling.
    pub fn prefers_fill(&self, j: usize, empty: usize, held: usize) -> Result<bool> {
        self.check_state(j, empty, held, self.instance.candidates)?;
        if empty == 0 || held == 0 {
            return Ok(empty > 0);
        }
        let width = layer_width(&self.instance);
        let next = &self.values[j * width..(j + 1) * width];
        Ok(next[cell(&self.instance, empty - 1, held)]
            >= next[cell(&self.instance, empty, held - 1)])
    }

    /// CSV export: header `j,X,Y,V,T`, rows in lexicographic `(j, X, Y)`
    /// order for `j in 1..=n`, six decimal places.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("j,X,Y,V,T\n");
        for j in 1..=self.instance.candidates {
            for x in 0..=self.instance.empty_at_start {
                for y in 0..=self.instance.positions - self.instance.empty_at_start {
                    let v = self.value(j, x, y).unwrap();
                    let t = self.threshold(j, x, y).unwrap();
                    let _ = writeln!(out, "{j},{x},{y},{v:.6},{t:.6}");
                }
            }
        }
        out
    }

    fn check_state(&self, j: usize, empty: usize, held: usize, j_max: usize) -> Result<()> {
        let inst = &self.instance;
        if j == 0 || j > j_max || empty > inst.empty_at_start
            || held > inst.positions - inst.empty_at_start
        {
            return Err(Error::OutOfGrid { j, x: empty, y: held });
        }
        Ok(())
    }
}

/// Acceptance threshold at `(j, X, Y)` computed from scratch over the
/// remaining horizon only (layers `n+1` down to `j+1`, two rolling buffers).
///
/// The partial-information policy refits the distribution at every step and
/// calls this instead of building a full table each time.
pub fn remaining_horizon_threshold(
    instance: &WsspInstance,
    j: usize,
    empty: usize,
    held: usize,
) -> Result<f64> {
    let n = instance.candidates;
    if j == 0 || j > n || empty > instance.empty_at_start
        || held > instance.positions - instance.empty_at_start
    {
        return Err(Error::OutOfGrid { j, x: empty, y: held });
    }
    let prefix = instance.preselection_prefix();
    let mu = instance.dist.mean();
    let width = layer_width(instance);

    let mut next = vec![0.0; width];
    for (y, slot) in next.iter_mut().enumerate().take(prefix.len()) {
        *slot = prefix[y];
    }
    let mut layer = vec![0.0; width];
    for step in ((j + 1)..=n).rev() {
        fill_layer(instance, &prefix, mu, step, &next, &mut layer);
        std::mem::swap(&mut next, &mut layer);
    }
    Ok(threshold_from_next(instance, &next, empty, held))
}

fn layer_width(instance: &WsspInstance) -> usize {
    (instance.empty_at_start + 1) * (instance.positions - instance.empty_at_start + 1)
}

fn cell(instance: &WsspInstance, empty: usize, held: usize) -> usize {
    empty * (instance.positions - instance.empty_at_start + 1) + held
}

/// Computes value layer `j` from layer `j + 1`.
fn fill_layer(
    instance: &WsspInstance,
    prefix: &[f64],
    mu: f64,
    j: usize,
    next: &[f64],
    layer: &mut [f64],
) {
    let n = instance.candidates;
    let remaining = n - j + 1;
    for x in 0..=instance.empty_at_start {
        for y in 0..=instance.positions - instance.empty_at_start {
            let idx = cell(instance, x, y);
            layer[idx] = if x > remaining {
                0.0 // infeasible: cannot fill x positions with fewer candidates
            } else if x == remaining && x > 0 {
                x as f64 * mu + prefix[y] // forced fill of every remaining candidate
            } else if x == 0 && y == 0 {
                0.0 // no capacity left, nothing controllable remains
            } else {
                let mut accept_best = f64::NEG_INFINITY;
                if x > 0 {
                    accept_best = next[cell(instance, x - 1, y)];
                }
                if y > 0 {
                    accept_best = accept_best.max(next[cell(instance, x, y - 1)]);
                }
                value_recurrence_step(next[idx], accept_best, &instance.dist)
            };
        }
    }
}

fn threshold_from_next(instance: &WsspInstance, next: &[f64], empty: usize, held: usize) -> f64 {
    if empty == 0 && held == 0 {
        return f64::INFINITY;
    }
    let mut accept_best = f64::NEG_INFINITY;
    if empty > 0 {
        accept_best = next[cell(instance, empty - 1, held)];
    }
    if held > 0 {
        accept_best = accept_best.max(next[cell(instance, empty, held - 1)]);
    }
    next[cell(instance, empty, held)] - accept_best
}

/// Denominator convention for the rank recursion's quadratic term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RankDenominator {
    /// `n + b - r`, the number of distinct individuals seen across a round.
    /// Consistent with the relative-rank rescaling; the default.
    #[default]
    PopulationSize,
    /// `n + b`, a legacy convention kept for comparison runs.
    InterviewsPlusPositions,
}

/// Value table in units of expected absolute rank (lower is better), for the
/// no-information regime.
///
/// Absolute ranks over the `M = n + b - r` individuals of a round follow a
/// discrete uniform law, so the induction step has its own closed form:
/// `V[j] = V[j+1] - (Z² - Z) / (2M)` with `Z = V[j+1] - min(accept
/// continuations)` clamped into `[0, M]`, minimization semantics throughout.
///
/// Terminal and forced layers charge each preselected employee the expected
/// rank of an order statistic — the `i`-th best of a uniform sample of
/// `b - r` individuals sits at rank `i·(M+1)/(b-r+1)` in expectation — and
/// each forced hire the population mean rank `(M+1)/2`.
#[derive(Debug, Clone)]
pub struct RankValueTable {
    candidates: usize,
    positions: usize,
    empty_at_start: usize,
    population: usize,
    values: Vec<f64>,
}

impl RankValueTable {
    pub fn build(candidates: usize, positions: usize, empty_at_start: usize) -> Result<Self> {
        Self::build_with_denominator(
            candidates,
            positions,
            empty_at_start,
            RankDenominator::default(),
        )
    }

    pub fn build_with_denominator(
        candidates: usize,
        positions: usize,
        empty_at_start: usize,
        denominator: RankDenominator,
    ) -> Result<Self> {
        if positions == 0 || positions > candidates || empty_at_start > positions {
            return Err(Error::InvalidInstance(format!(
                "rank table requires 1 <= b <= n and r <= b, got n={candidates} b={positions} r={empty_at_start}"
            )));
        }
        let n = candidates;
        let held_max = positions - empty_at_start;
        let population = n + held_max;
        let denom = match denominator {
            RankDenominator::PopulationSize => population as f64,
            RankDenominator::InterviewsPlusPositions => (n + positions) as f64,
        };

        // Expected-rank prefix of the y best preselected employees.
        let mut rank_prefix = vec![0.0; held_max + 1];
        for y in 1..=held_max {
            rank_prefix[y] =
                rank_prefix[y - 1] + y as f64 * (population + 1) as f64 / (held_max + 1) as f64;
        }
        let mean_rank = (population + 1) as f64 / 2.0;

        let width = (empty_at_start + 1) * (held_max + 1);
        let idx = |x: usize, y: usize| x * (held_max + 1) + y;
        let mut values = vec![0.0; (n + 1) * width];
        for (y, &rp) in rank_prefix.iter().enumerate() {
            values[n * width + idx(0, y)] = rp;
        }
        for j in (1..=n).rev() {
            let remaining = n - j + 1;
            for x in 0..=empty_at_start {
                for y in 0..=held_max {
                    let v = if x > remaining {
                        0.0
                    } else if x == remaining && x > 0 {
                        x as f64 * mean_rank + rank_prefix[y]
                    } else if x == 0 && y == 0 {
                        0.0
                    } else {
                        let next = &values[j * width..(j + 1) * width];
                        let mut accept_best = f64::INFINITY;
                        if x > 0 {
                            accept_best = next[idx(x - 1, y)];
                        }
                        if y > 0 {
                            accept_best = accept_best.min(next[idx(x, y - 1)]);
                        }
                        let z = (next[idx(x, y)] - accept_best).clamp(0.0, population as f64);
                        next[idx(x, y)] - (z * z - z) / (2.0 * denom)
                    };
                    values[(j - 1) * width + idx(x, y)] = v;
                }
            }
        }
        Ok(Self {
            candidates,
            positions,
            empty_at_start,
            population,
            values,
        })
    }

    pub fn candidates(&self) -> usize {
        self.candidates
    }

    pub fn positions(&self) -> usize {
        self.positions
    }

    pub fn empty_at_start(&self) -> usize {
        self.empty_at_start
    }

    /// Total individuals per round, `M = n + b - r`.
    pub fn population(&self) -> usize {
        self.population
    }

    pub fn value(&self, j: usize, empty: usize, held: usize) -> Result<f64> {
        self.check_state(j, empty, held, self.candidates + 1)?;
        let width = (self.empty_at_start + 1) * (self.positions - self.empty_at_start + 1);
        Ok(self.values
            [(j - 1) * width + empty * (self.positions - self.empty_at_start + 1) + held])
    }

    /// Absolute-rank acceptance threshold at `(j, X, Y)`, clamped into
    /// `[0, M]`. A candidate is hired when their rank estimate is strictly
    /// below the relative rescaling of this (see [`relative_rank_threshold`]).
    ///
    /// Forced fills are not expressible as a finite rank threshold under
    /// minimization, so policies keep them as an explicit guard.
    pub fn threshold(&self, j: usize, empty: usize, held: usize) -> Result<f64> {
        self.check_state(j, empty, held, self.candidates)?;
        if empty == 0 && held == 0 {
            return Ok(0.0); // ranks start at 1, so nothing beats this
        }
        let held_max = self.positions - self.empty_at_start;
        let width = (self.empty_at_start + 1) * (held_max + 1);
        let next = &self.values[j * width..(j + 1) * width];
        let idx = |x: usize, y: usize| x * (held_max + 1) + y;
        let mut accept_best = f64::INFINITY;
        if empty > 0 {
            accept_best = next[idx(empty - 1, held)];
        }
        if held > 0 {
            accept_best = accept_best.min(next[idx(empty, held - 1)]);
        }
        Ok((next[idx(empty, held)] - accept_best).clamp(0.0, self.population as f64))
    }

    /// CSV export in the same `j,X,Y,V,T` layout as [`ValueTable::to_csv`].
    pub fn to_csv(&self) -> String {
        let mut out = String::from("j,X,Y,V,T\n");
        for j in 1..=self.candidates {
            for x in 0..=self.empty_at_start {
                for y in 0..=self.positions - self.empty_at_start {
                    let v = self.value(j, x, y).unwrap();
                    let t = self.threshold(j, x, y).unwrap();
                    let _ = writeln!(out, "{j},{x},{y},{v:.6},{t:.6}");
                }
            }
        }
        out
    }

    fn check_state(&self, j: usize, empty: usize, held: usize, j_max: usize) -> Result<()> {
        if j == 0 || j > j_max || empty > self.empty_at_start
            || held > self.positions - self.empty_at_start
        {
            return Err(Error::OutOfGrid { j, x: empty, y: held });
        }
        Ok(())
    }
}

/// Rescales an absolute-rank threshold to the relative rank observable after
/// `j + b - r` of the `n + b - r` individuals have been examined:
/// `tau = (j + b - r) / (n + b - r) · t_abs`.
pub fn relative_rank_threshold(
    t_abs: f64,
    j: usize,
    candidates: usize,
    positions: usize,
    empty_at_start: usize,
) -> f64 {
    let seen = (j + positions - empty_at_start) as f64;
    let total = (candidates + positions - empty_at_start) as f64;
    seen / total * t_abs
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::ScoreDistribution;

    fn table1_instance() -> WsspInstance {
        WsspInstance::new(
            14,
            3,
            2,
            vec![0.682],
            ScoreDistribution::uniform(0.0, 1.0).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn instance_validation() {
        let u = ScoreDistribution::uniform(0.0, 1.0).unwrap();
        assert!(WsspInstance::new(5, 6, 0, vec![0.1; 6], u.clone()).is_err());
        assert!(WsspInstance::new(5, 3, 4, vec![], u.clone()).is_err());
        assert!(WsspInstance::new(5, 3, 1, vec![0.5], u.clone()).is_err());
        assert!(WsspInstance::new(5, 3, 1, vec![0.5, 1.5], u.clone()).is_err());
        assert!(WsspInstance::new(5, 0, 0, vec![], u.clone()).is_err());

        let inst = WsspInstance::new(5, 3, 1, vec![0.2, 0.9], u).unwrap();
        assert_eq!(inst.preselection(), &[0.9, 0.2]);
    }

    #[test]
    fn generic_step_examples() {
        let u = ScoreDistribution::uniform(0.0, 1.0).unwrap();
        // E[max(S, v)] = (1 + v^2) / 2 for U(0,1).
        assert!((value_recurrence_step(0.5, 0.0, &u) - 0.625).abs() < 1e-15);
        assert!((value_recurrence_step(0.625, 0.0, &u) - 0.6953125).abs() < 1e-15);

        let e = ScoreDistribution::exponential(1.0).unwrap();
        let expected = 1.0 + (-1.0f64).exp();
        assert!((value_recurrence_step(1.0, 0.0, &e) - expected).abs() < 1e-12);

        // Threshold at or below the support floor: accept surely, gain the mean.
        let shifted = ScoreDistribution::uniform(0.5, 1.5).unwrap();
        let v = value_recurrence_step(1.0, 0.8, &shifted);
        assert!((v - (0.8 + 1.0)).abs() < 1e-15);
    }

    #[test]
    fn uniform_step_examples() {
        let v = uniform_recurrence_step(0.5, 0.0, 0.0, 1.0).unwrap();
        assert!((v - 0.625).abs() < 1e-15);
        // Threshold at the support top: never accept, no increment.
        let v = uniform_recurrence_step(1.0, 0.0, 0.0, 1.0).unwrap();
        assert!((v - 1.0).abs() < 1e-15);
        let v = uniform_recurrence_step(0.625, 0.0, 0.0, 1.0).unwrap();
        assert!((v - 0.6953125).abs() < 1e-15);

        assert!(uniform_recurrence_step(0.5, 0.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn table1_reference_cells() {
        let table = ValueTable::build(&table1_instance());
        let cases = [
            (1, 2, 1, 2.547),
            (2, 2, 1, 2.523),
            (2, 1, 1, 1.742),
            (2, 2, 0, 1.702),
            (5, 1, 1, 1.694),
            (13, 1, 1, 1.333),
            (13, 2, 1, 1.682),
            (14, 1, 1, 1.182),
            (14, 2, 1, 0.0),
        ];
        for (j, x, y, want) in cases {
            let got = table.value(j, x, y).unwrap();
            assert!(
                (got - want).abs() <= 0.0015,
                "V[{j}][{x}][{y}] = {got}, reference {want}"
            );
        }
        // Independent hand recursion for the cells the reference prints
        // garbled: V[14][0][1] = (1 + 0.682^2) / 2 and one more step back.
        let v14 = table.value(14, 0, 1).unwrap();
        assert!((v14 - (1.0 + 0.682f64.powi(2)) / 2.0).abs() < 1e-12);
        assert!((v14 - 0.7326).abs() < 1e-4);
        let v13 = table.value(13, 0, 1).unwrap();
        assert!((v13 - (1.0 + v14 * v14) / 2.0).abs() < 1e-12);
        assert!((v13 - 0.768).abs() < 1e-3);
    }

    #[test]
    fn no_capacity_states_are_zero() {
        let table = ValueTable::build(&table1_instance());
        for j in 1..=15 {
            assert_eq!(table.value(j, 0, 0).unwrap(), 0.0);
        }
    }

    #[test]
    fn threshold_examples() {
        let table = ValueTable::build(&table1_instance());
        let t1 = table.threshold(1, 2, 1).unwrap();
        assert!((t1 - 0.781).abs() <= 0.0015, "T1 = {t1}");
        let t2 = table.threshold(2, 2, 1).unwrap();
        assert!((t2 - 0.767).abs() <= 0.0015, "T2 = {t2}");
        // The last candidate must strictly beat the retained employee.
        let t_last = table.threshold(14, 0, 1).unwrap();
        assert!((t_last - 0.682).abs() < 1e-12);
        // No capacity: nothing can be accepted.
        assert_eq!(table.threshold(3, 0, 0).unwrap(), f64::INFINITY);
        // Out-of-grid states are rejected.
        assert!(table.threshold(0, 0, 1).is_err());
        assert!(table.threshold(15, 0, 1).is_err());
        assert!(table.threshold(3, 3, 0).is_err());
        assert!(table.threshold(3, 0, 2).is_err());
    }

    #[test]
    fn forced_fill_threshold_is_negative() {
        let table = ValueTable::build(&table1_instance());
        // At j = 13 with X = 2 both remaining candidates are forced hires.
        let t = table.threshold(13, 2, 1).unwrap();
        assert!(t < 0.0, "forced threshold {t}");
    }

    #[test]
    fn remaining_horizon_matches_full_table() {
        let inst = table1_instance();
        let table = ValueTable::build(&inst);
        for j in 1..=14 {
            for x in 0..=2 {
                for y in 0..=1 {
                    let full = table.threshold(j, x, y).unwrap();
                    let tail = remaining_horizon_threshold(&inst, j, x, y).unwrap();
                    if full.is_infinite() {
                        assert!(tail.is_infinite());
                    } else {
                        assert!((full - tail).abs() < 1e-12, "(j={j}, x={x}, y={y})");
                    }
                }
            }
        }
    }

    #[test]
    fn forced_fill_layer_identity() {
        // V at (j = n - r + 1, X = r, Y = b - r) equals r * mean + sum of
        // preselection scores.
        let dists = [
            ScoreDistribution::uniform(0.0, 2.0).unwrap(),
            ScoreDistribution::exponential(0.5).unwrap(),
        ];
        for dist in dists {
            let inst = WsspInstance::new(9, 4, 2, vec![0.9, 0.4], dist).unwrap();
            let table = ValueTable::build(&inst);
            let v = table.value(9 - 2 + 1, 2, 2).unwrap();
            let want = 2.0 * inst.dist().mean() + 0.9 + 0.4;
            assert!((v - want).abs() < 1e-12);
        }
    }

    #[test]
    fn rank_table_examples() {
        // Single candidate, single empty position: forced hire at the mean rank.
        let t = RankValueTable::build(1, 1, 1).unwrap();
        assert_eq!(t.population(), 1);
        assert!((t.value(1, 1, 0).unwrap() - 1.0).abs() < 1e-15);

        // Two candidates: one hand-rolled induction step.
        let t = RankValueTable::build(2, 1, 1).unwrap();
        assert!((t.value(2, 1, 0).unwrap() - 1.5).abs() < 1e-15);
        assert!((t.value(1, 1, 0).unwrap() - 1.3125).abs() < 1e-15);
    }

    #[test]
    fn rank_thresholds_are_clamped() {
        let t = RankValueTable::build(10, 3, 2).unwrap();
        for j in 1..=10 {
            for x in 0..=2 {
                for y in 0..=1 {
                    let thr = t.threshold(j, x, y).unwrap();
                    assert!(thr >= 0.0 && thr <= t.population() as f64);
                }
            }
        }
    }

    #[test]
    fn rank_denominator_variants_differ_when_preselection_exists() {
        let a = RankValueTable::build_with_denominator(6, 3, 1, RankDenominator::PopulationSize)
            .unwrap();
        let b = RankValueTable::build_with_denominator(
            6,
            3,
            1,
            RankDenominator::InterviewsPlusPositions,
        )
        .unwrap();
        assert!((a.value(1, 1, 2).unwrap() - b.value(1, 1, 2).unwrap()).abs() > 1e-9);

        // With r = 0 the two conventions coincide.
        let a = RankValueTable::build_with_denominator(6, 3, 0, RankDenominator::PopulationSize)
            .unwrap();
        let b = RankValueTable::build_with_denominator(
            6,
            3,
            0,
            RankDenominator::InterviewsPlusPositions,
        )
        .unwrap();
        assert!((a.value(1, 0, 3).unwrap() - b.value(1, 0, 3).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn relative_rank_threshold_examples() {
        let tau = relative_rank_threshold(10.0, 50, 100, 5, 0);
        assert!((tau - 55.0 / 105.0 * 10.0).abs() < 1e-15);
        let tau = relative_rank_threshold(10.0, 50, 100, 5, 5);
        assert!((tau - 5.0).abs() < 1e-15);
        let tau = relative_rank_threshold(3.7, 100, 100, 5, 5);
        assert!((tau - 3.7).abs() < 1e-15);
    }

    #[test]
    fn csv_export_shape() {
        let inst = WsspInstance::new(
            3,
            2,
            1,
            vec![0.5],
            ScoreDistribution::uniform(0.0, 1.0).unwrap(),
        )
        .unwrap();
        let csv = ValueTable::build(&inst).to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("j,X,Y,V,T"));
        // 3 steps * 2 X-values * 2 Y-values.
        assert_eq!(lines.count(), 12);
        let second = csv.lines().nth(1).unwrap();
        assert!(second.starts_with("1,0,0,0.000000,inf"));
    }
}
