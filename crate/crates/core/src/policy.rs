//! Online decision policies over a candidate stream.
//!
//! Every policy sees one candidate at a time and must commit immediately:
//! accept (filling an empty position, or replacing the worst retained
//! incumbent once none are empty) or reject. [`SelectionState`] tracks the
//! live counters and enforces the selection rules; the policies differ only
//! in how they pick the verdict.
//!
//! All policies share the same two guards so that regret comparisons stay
//! between feasible strategies: with no capacity left they reject, and when
//! the remaining candidates exactly fill the remaining empty positions they
//! accept unconditionally.

use crate::dist::{DistributionEstimator, DistributionShape, ScoreDistribution};
use crate::dp::{
    relative_rank_threshold, remaining_horizon_threshold, RankValueTable, ValueTable,
    WsspInstance,
};
use crate::rng::unit_f64;
use crate::{Error, Result};
use rand_chacha::ChaCha8Rng;
use rand_core::SeedableRng;
use std::fmt;
use std::str::FromStr;

/// Which branch an accepted candidate takes when both are open.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AcceptPreference {
    FillEmpty,
    ReplaceWorst,
}

/// A policy's verdict for one candidate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decision {
    Reject,
    Accept(AcceptPreference),
}

impl Decision {
    pub fn is_accept(&self) -> bool {
        matches!(self, Decision::Accept(_))
    }
}

/// Live counters of one selection round.
///
/// `empty_positions` (the count of unfilled jobs) never increases and
/// `preselected_held` only decreases when a hire replaces an incumbent, so
/// both are non-increasing over the round. Retained flags flip only from
/// held to fired, worst-ranked incumbent first.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectionState {
    candidates: usize,
    positions: usize,
    next_candidate: usize,
    empty: usize,
    held: usize,
    retained: Vec<bool>,
    decisions: Vec<bool>,
    hires: Vec<f64>,
}

impl SelectionState {
    pub fn new(instance: &WsspInstance) -> Self {
        let held = instance.positions() - instance.empty_at_start();
        Self {
            candidates: instance.candidates(),
            positions: instance.positions(),
            next_candidate: 1,
            empty: instance.empty_at_start(),
            held,
            retained: vec![true; held],
            decisions: Vec::with_capacity(instance.candidates()),
            hires: Vec::new(),
        }
    }

    /// Index of the candidate about to be interviewed, 1-based.
    pub fn next_candidate(&self) -> usize {
        self.next_candidate
    }

    /// Number of positions still empty (`X`).
    pub fn empty_positions(&self) -> usize {
        self.empty
    }

    /// Number of positions still held by preselected employees (`Y`).
    pub fn preselected_held(&self) -> usize {
        self.held
    }

    /// Per-incumbent flags in descending score order; fired flags are final.
    pub fn retained(&self) -> &[bool] {
        &self.retained
    }

    pub fn decisions(&self) -> &[bool] {
        &self.decisions
    }

    pub fn hires(&self) -> &[f64] {
        &self.hires
    }

    pub fn has_capacity(&self) -> bool {
        self.empty > 0 || self.held > 0
    }

    /// True when the remaining candidates are exactly enough to fill the
    /// remaining empty positions, so every one of them must be hired.
    pub fn forced_fill(&self) -> bool {
        self.empty > 0 && self.next_candidate + self.empty == self.candidates + 1
    }

    pub fn is_complete(&self) -> bool {
        self.next_candidate > self.candidates
    }

    /// Records the verdict for the current candidate and advances.
    ///
    /// An accept fills an empty position or fires the worst retained
    /// incumbent; `preference` is only consulted when both branches are
    /// open. Accepting with no capacity is an error.
    pub fn apply_decision(
        &mut self,
        score: f64,
        accept: bool,
        preference: AcceptPreference,
    ) -> Result<()> {
        debug_assert!(!self.is_complete(), "round already finished");
        if accept {
            if self.empty == 0 && self.held == 0 {
                return Err(Error::CapacityViolation {
                    candidate: self.next_candidate,
                });
            }
            let fill = if self.empty == 0 {
                false
            } else if self.held == 0 {
                true
            } else {
                preference == AcceptPreference::FillEmpty
            };
            if fill {
                self.empty -= 1;
            } else {
                self.retained[self.held - 1] = false;
                self.held -= 1;
            }
            self.hires.push(score);
        }
        self.decisions.push(accept);
        self.next_candidate += 1;
        Ok(())
    }

    /// Reward accumulated so far: retained preselection scores plus hires.
    pub fn online_reward(&self, instance: &WsspInstance) -> f64 {
        let kept: f64 = instance
            .preselection()
            .iter()
            .zip(&self.retained)
            .filter(|(_, &keep)| keep)
            .map(|(&s, _)| s)
            .sum();
        kept + self.hires.iter().sum::<f64>()
    }

    /// Scores of everyone holding a position right now.
    pub fn current_employees(&self, instance: &WsspInstance) -> Vec<f64> {
        let mut employees: Vec<f64> = instance
            .preselection()
            .iter()
            .zip(&self.retained)
            .filter(|(_, &keep)| keep)
            .map(|(&s, _)| s)
            .collect();
        employees.extend_from_slice(&self.hires);
        employees
    }
}

/// Shared feasibility guard: `Some(false)` with no capacity, `Some(true)` on
/// forced fills, `None` when the policy rule applies.
fn capacity_guard(state: &SelectionState) -> Option<bool> {
    if !state.has_capacity() {
        Some(false)
    } else if state.forced_fill() {
        Some(true)
    } else {
        None
    }
}

/// Full-information threshold rule: accept exactly when the score strictly
/// beats the table threshold for the current state. Ties reject.
pub fn ccmdp_decide(state: &SelectionState, score: f64, table: &ValueTable) -> bool {
    match capacity_guard(state) {
        Some(verdict) => verdict,
        None => {
            let t = table
                .threshold(
                    state.next_candidate(),
                    state.empty_positions(),
                    state.preselected_held(),
                )
                .expect("state tracks the table instance");
            score > t
        }
    }
}

/// Sorted multiset of every score observed so far in a round (preselection
/// plus interviewed candidates). The relative rank of a new score is one
/// plus the number of stored scores strictly above it.
#[derive(Debug, Clone, Default)]
pub struct RankMemory {
    scores: Vec<f64>,
}

impl RankMemory {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn seeded(scores: &[f64]) -> Self {
        let mut mem = Self::new();
        for &s in scores {
            mem.insert(s);
        }
        mem
    }

    pub fn insert(&mut self, score: f64) {
        let at = self.scores.partition_point(|&x| x <= score);
        self.scores.insert(at, score);
    }

    pub fn relative_rank(&self, score: f64) -> usize {
        1 + self.scores.len() - self.scores.partition_point(|&x| x <= score)
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }
}

/// No-information rule: accept when the candidate's relative rank is
/// strictly below the rescaled rank threshold. The score enters the memory
/// after the verdict, never before.
pub fn ccmdp_rank_decide(
    state: &SelectionState,
    score: f64,
    memory: &mut RankMemory,
    table: &RankValueTable,
) -> bool {
    let verdict = match capacity_guard(state) {
        Some(v) => v,
        None => {
            let t_abs = table
                .threshold(
                    state.next_candidate(),
                    state.empty_positions(),
                    state.preselected_held(),
                )
                .expect("state tracks the rank table");
            let tau = relative_rank_threshold(
                t_abs,
                state.next_candidate(),
                table.candidates(),
                table.positions(),
                table.empty_at_start(),
            );
            (memory.relative_rank(score) as f64) < tau
        }
    };
    memory.insert(score);
    verdict
}

/// Hiring-above-the-mean baseline: accept when the score strictly beats the
/// average of the current employees; with nobody employed yet, accept
/// unconditionally.
pub fn mean_decide(state: &SelectionState, score: f64, employees: &[f64]) -> bool {
    match capacity_guard(state) {
        Some(verdict) => verdict,
        None => {
            if employees.is_empty() {
                true
            } else {
                score > employees.iter().sum::<f64>() / employees.len() as f64
            }
        }
    }
}

/// Cutoff baseline: the first `learning` candidates are rejected by default
/// while their scores are recorded; afterwards a candidate must strictly
/// beat the k-th largest learning-phase score, `k = max(1, round(b·c/n))`.
pub fn ccm_decide(
    state: &SelectionState,
    score: f64,
    learning: usize,
    buffer: &mut Vec<f64>,
) -> bool {
    let in_learning = state.next_candidate() <= learning;
    if in_learning {
        buffer.push(score);
    }
    match capacity_guard(state) {
        Some(verdict) => verdict,
        None if in_learning => false,
        None => {
            if buffer.is_empty() {
                return false;
            }
            let k = ((state.positions * learning) as f64 / state.candidates as f64).round()
                as usize;
            let k = k.max(1).min(buffer.len());
            let mut sorted = buffer.clone();
            sorted.sort_by(|a, b| b.total_cmp(a));
            score > sorted[k - 1]
        }
    }
}

/// Random baseline: accept with probability `b / n`, independently per
/// candidate, from the policy's own seeded stream.
pub fn rand_decide(state: &SelectionState, rng: &mut ChaCha8Rng) -> bool {
    match capacity_guard(state) {
        Some(verdict) => verdict,
        None => unit_f64(rng) < state.positions as f64 / state.candidates as f64,
    }
}

/// A policy driving one replicate's rounds. Mutable state persists across
/// rounds within the policy object (the partial-information estimator relies
/// on this); fresh policies are built per replicate.
pub trait Policy {
    /// Prepares for a round: rebuild tables, reset per-round memory.
    fn begin_round(&mut self, instance: &WsspInstance) -> Result<()>;

    /// Verdict for the current candidate. Implementations observe the score
    /// only after deciding; no future information leaks in by construction.
    fn decide(&mut self, instance: &WsspInstance, state: &SelectionState, score: f64)
        -> Decision;
}

/// Full-information table policy.
#[derive(Debug, Default)]
pub struct CcmdpPolicy {
    table: Option<ValueTable>,
}

impl CcmdpPolicy {
    pub fn new() -> Self {
        Self::default()
    }
}

impl Policy for CcmdpPolicy {
    fn begin_round(&mut self, instance: &WsspInstance) -> Result<()> {
        self.table = Some(ValueTable::build(instance));
        Ok(())
    }

    fn decide(&mut self, _: &WsspInstance, state: &SelectionState, score: f64) -> Decision {
        let table = self.table.as_ref().expect("begin_round builds the table");
        if ccmdp_decide(state, score, table) {
            let fill = table
                .prefers_fill(
                    state.next_candidate(),
                    state.empty_positions(),
                    state.preselected_held(),
                )
                .expect("state tracks the table instance");
            Decision::Accept(if fill {
                AcceptPreference::FillEmpty
            } else {
                AcceptPreference::ReplaceWorst
            })
        } else {
            Decision::Reject
        }
    }
}

/// Partial-information policy: the distribution shape is known, its
/// parameters are fitted from every score seen so far (round-1 preselection
/// included), and the threshold is recomputed over the remaining horizon at
/// each step. Until two observations exist it falls back to the rank rule.
#[derive(Debug, Clone)]
pub struct CcmdpPartialPolicy {
    estimator: DistributionEstimator,
    seeded: bool,
    rank_table: Option<RankValueTable>,
    rank_memory: RankMemory,
}

impl CcmdpPartialPolicy {
    pub fn new(shape: DistributionShape) -> Self {
        Self {
            estimator: DistributionEstimator::new(shape),
            seeded: false,
            rank_table: None,
            rank_memory: RankMemory::new(),
        }
    }

    pub fn estimator(&self) -> &DistributionEstimator {
        &self.estimator
    }

    fn fitted_threshold(
        &self,
        instance: &WsspInstance,
        state: &SelectionState,
    ) -> Result<f64> {
        let fitted = self.estimator.fit()?;
        let refit = WsspInstance::new(
            instance.candidates(),
            instance.positions(),
            instance.empty_at_start(),
            instance.preselection().to_vec(),
            fitted,
        )?;
        remaining_horizon_threshold(
            &refit,
            state.next_candidate(),
            state.empty_positions(),
            state.preselected_held(),
        )
    }
}

impl Policy for CcmdpPartialPolicy {
    fn begin_round(&mut self, instance: &WsspInstance) -> Result<()> {
        if !self.seeded {
            for &s in instance.preselection() {
                self.estimator.observe(s);
            }
            self.seeded = true;
        }
        if self.rank_table.is_none() {
            self.rank_table = Some(RankValueTable::build(
                instance.candidates(),
                instance.positions(),
                instance.empty_at_start(),
            )?);
        }
        self.rank_memory = RankMemory::seeded(instance.preselection());
        Ok(())
    }

    fn decide(&mut self, instance: &WsspInstance, state: &SelectionState, score: f64) -> Decision {
        let rank_table = self.rank_table.as_ref().expect("begin_round builds it");
        let verdict = match capacity_guard(state) {
            Some(v) => {
                self.rank_memory.insert(score);
                v
            }
            None => {
                let by_threshold = if self.estimator.count() >= 2 {
                    self.fitted_threshold(instance, state).ok()
                } else {
                    None
                };
                match by_threshold {
                    Some(t) => {
                        self.rank_memory.insert(score);
                        score > t
                    }
                    // Cold start: fall back to the rank rule (inserts for us).
                    None => ccmdp_rank_decide(state, score, &mut self.rank_memory, rank_table),
                }
            }
        };
        self.estimator.observe(score);
        if verdict {
            Decision::Accept(AcceptPreference::FillEmpty)
        } else {
            Decision::Reject
        }
    }
}

/// No-information policy built on relative ranks.
#[derive(Debug, Default)]
pub struct CcmdpRankPolicy {
    table: Option<RankValueTable>,
    memory: RankMemory,
}

impl CcmdpRankPolicy {
    pub fn new() -> Self {
        Self::default()
    }
}

impl Policy for CcmdpRankPolicy {
    fn begin_round(&mut self, instance: &WsspInstance) -> Result<()> {
        if self.table.is_none() {
            self.table = Some(RankValueTable::build(
                instance.candidates(),
                instance.positions(),
                instance.empty_at_start(),
            )?);
        }
        self.memory = RankMemory::seeded(instance.preselection());
        Ok(())
    }

    fn decide(&mut self, _: &WsspInstance, state: &SelectionState, score: f64) -> Decision {
        let table = self.table.as_ref().expect("begin_round builds it");
        if ccmdp_rank_decide(state, score, &mut self.memory, table) {
            Decision::Accept(AcceptPreference::FillEmpty)
        } else {
            Decision::Reject
        }
    }
}

/// Hiring-above-the-mean baseline.
#[derive(Debug, Default)]
pub struct MeanPolicy;

impl Policy for MeanPolicy {
    fn begin_round(&mut self, _: &WsspInstance) -> Result<()> {
        Ok(())
    }

    fn decide(&mut self, instance: &WsspInstance, state: &SelectionState, score: f64) -> Decision {
        let employees = state.current_employees(instance);
        if mean_decide(state, score, &employees) {
            Decision::Accept(AcceptPreference::FillEmpty)
        } else {
            Decision::Reject
        }
    }
}

/// Cutoff baseline with a fixed learning-phase length.
#[derive(Debug)]
pub struct CcmPolicy {
    learning: usize,
    buffer: Vec<f64>,
}

impl CcmPolicy {
    pub fn new(learning: usize) -> Self {
        Self {
            learning,
            buffer: Vec::new(),
        }
    }
}

impl Policy for CcmPolicy {
    fn begin_round(&mut self, instance: &WsspInstance) -> Result<()> {
        if self.learning > instance.candidates() {
            return Err(Error::InvalidConfig(format!(
                "ccm learning phase {} exceeds the number of candidates {}",
                self.learning,
                instance.candidates()
            )));
        }
        self.buffer.clear();
        Ok(())
    }

    fn decide(&mut self, _: &WsspInstance, state: &SelectionState, score: f64) -> Decision {
        if ccm_decide(state, score, self.learning, &mut self.buffer) {
            Decision::Accept(AcceptPreference::FillEmpty)
        } else {
            Decision::Reject
        }
    }
}

/// Random baseline with its own seeded stream.
#[derive(Debug)]
pub struct RandPolicy {
    rng: ChaCha8Rng,
}

impl RandPolicy {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }
}

impl Policy for RandPolicy {
    fn begin_round(&mut self, _: &WsspInstance) -> Result<()> {
        Ok(())
    }

    fn decide(&mut self, _: &WsspInstance, state: &SelectionState, score: f64) -> Decision {
        let _ = score;
        if rand_decide(state, &mut self.rng) {
            Decision::Accept(AcceptPreference::FillEmpty)
        } else {
            Decision::Reject
        }
    }
}

/// Parsed policy selector, one per CLI `--policy` flag.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PolicySpec {
    Ccmdp,
    CcmdpPartial,
    CcmdpRank,
    Mean,
    Ccm { learning: usize },
    /// Cutoff baseline with the learning-phase length chosen by a pilot grid
    /// search; resolved inside the simulation harness.
    CcmStar,
    Rand,
}

pub const POLICY_SPEC_GRAMMAR: &str =
    "ccmdp, ccmdp-partial, ccmdp-rank, mean, ccm:c=<int>, ccm-star, rand";

impl FromStr for PolicySpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ccmdp" => Ok(Self::Ccmdp),
            "ccmdp-partial" => Ok(Self::CcmdpPartial),
            "ccmdp-rank" => Ok(Self::CcmdpRank),
            "mean" => Ok(Self::Mean),
            "ccm-star" => Ok(Self::CcmStar),
            "rand" => Ok(Self::Rand),
            other => {
                if let Some(rest) = other.strip_prefix("ccm:c=") {
                    let learning = rest.parse().map_err(|_| {
                        Error::InvalidConfig(format!(
                            "bad learning-phase length in '{other}'; valid specs: {POLICY_SPEC_GRAMMAR}"
                        ))
                    })?;
                    Ok(Self::Ccm { learning })
                } else {
                    Err(Error::InvalidConfig(format!(
                        "unknown policy '{other}'; valid specs: {POLICY_SPEC_GRAMMAR}"
                    )))
                }
            }
        }
    }
}

impl fmt::Display for PolicySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Ccmdp => write!(f, "ccmdp"),
            Self::CcmdpPartial => write!(f, "ccmdp-partial"),
            Self::CcmdpRank => write!(f, "ccmdp-rank"),
            Self::Mean => write!(f, "mean"),
            Self::Ccm { learning } => write!(f, "ccm:c={learning}"),
            Self::CcmStar => write!(f, "ccm-star"),
            Self::Rand => write!(f, "rand"),
        }
    }
}

/// Builds a fresh policy for one replicate. `seed` feeds the random
/// baseline's private stream; other policies ignore it.
pub fn build_policy(
    spec: &PolicySpec,
    dist: &ScoreDistribution,
    seed: u64,
) -> Result<Box<dyn Policy>> {
    match spec {
        PolicySpec::Ccmdp => Ok(Box::new(CcmdpPolicy::new())),
        PolicySpec::CcmdpPartial => {
            let shape = dist.shape().ok_or_else(|| {
                Error::InvalidConfig(
                    "ccmdp-partial needs a parametric score distribution (uniform or exp)"
                        .into(),
                )
            })?;
            Ok(Box::new(CcmdpPartialPolicy::new(shape)))
        }
        PolicySpec::CcmdpRank => Ok(Box::new(CcmdpRankPolicy::new())),
        PolicySpec::Mean => Ok(Box::new(MeanPolicy)),
        PolicySpec::Ccm { learning } => Ok(Box::new(CcmPolicy::new(*learning))),
        PolicySpec::CcmStar => Err(Error::InvalidConfig(
            "ccm-star must be resolved to a concrete learning-phase length first".into(),
        )),
        PolicySpec::Rand => Ok(Box::new(RandPolicy::new(seed))),
    }
}
