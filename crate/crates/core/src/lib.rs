//! Optimal multiple stopping for warm-starting sequential selection.
//!
//! A decision maker interviews `n` candidates one by one and manages `b`
//! interchangeable job positions, `r` of which start empty while the rest are
//! held by a *preselection* of incumbent employees. Every hire is immediate
//! and irrevocable: an accepted candidate either fills an empty position or
//! replaces the worst retained incumbent, and all `b` positions must be
//! filled by the end of the stream.
//!
//! The crate provides:
//!
//! * [`dist`] — score distributions (uniform, exponential, discrete) with
//!   exact cumulative/partial-expectation closed forms, reproducible
//!   inverse-transform sampling, and an online parameter estimator for the
//!   partial-information setting.
//! * [`dp`] — backward-induction value tables `V[j][X][Y]` over the state
//!   counters (candidates interviewed, empty positions, positions still held
//!   by the preselection), the optimal acceptance thresholds they induce, and
//!   the rank-based variant used when scores are unobservable.
//! * [`policy`] — online decision policies: the table-driven threshold rule
//!   in full, partial, and no-information regimes, plus the RAND, MEAN, and
//!   cutoff baselines, all enforcing the selection rules.
//! * [`sim`] — single-round execution, an offline oracle, and the multi-round
//!   harness with population sampling, resignations, and per-round regret
//!   statistics over replicates.
//!
//! All randomness flows through explicitly seeded ChaCha8 generators, so any
//! simulation output is a pure function of its configuration.

pub mod dist;
pub mod dp;
pub mod policy;
pub mod sim;

mod error;
mod rng;

pub use dist::{DistributionEstimator, DistributionShape, ScoreDistribution};
pub use dp::{RankDenominator, RankValueTable, ValueTable, WsspInstance};
pub use error::{Error, Result};
pub use policy::{AcceptPreference, Decision, Policy, PolicySpec, SelectionState};
pub use sim::{MsspConfig, MsspReport, RoundResult};
