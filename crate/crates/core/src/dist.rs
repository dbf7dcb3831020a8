//! Score distributions and online parameter estimation.
//!
//! The selection process assumes non-negative i.i.d. candidate scores drawn
//! from a known distribution. The backward induction only ever needs three
//! quantities from it — the cumulative probability `F(x)`, the mean, and the
//! upper partial expectation `E[S·1{S > z}]` — and all three are implemented
//! in closed form for every supported kind, so no quadrature appears anywhere
//! in the crate.
//!
//! `F` and the partial expectation are total functions on the reals: below
//! the support they return `0` and the mean, above it `1` and `0`. The value
//! recursion evaluates them outside the support near the horizon, and the
//! total extension removes every boundary branch from that code.
//!
//! Sampling is inverse-transform from a seeded ChaCha8 stream, which makes
//! every sample sequence a pure function of `(distribution, seed, count)`.

use crate::rng::unit_f64;
use crate::{Error, Result};
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use std::fmt;
use std::str::FromStr;

/// Discrete atom probabilities must sum to one within this tolerance.
const ATOM_PROBABILITY_TOL: f64 = 1e-12;

/// A non-negative score distribution.
///
/// The `Discrete` kind exists to make exact enumeration oracles possible in
/// tests; its cumulative function is the right-continuous step form and its
/// partial expectation sums atoms *strictly above* the cut, which is exactly
/// what the strict acceptance rule `S > T` requires for the value recursion
/// to match brute-force enumeration bit for bit.
#[derive(Debug, Clone, PartialEq)]
pub enum ScoreDistribution {
    Uniform { lower: f64, upper: f64 },
    Exponential { rate: f64 },
    Discrete { atoms: Vec<(f64, f64)> },
}

impl ScoreDistribution {
    /// Uniform on `[lower, upper)`; requires `0 <= lower < upper`.
    pub fn uniform(lower: f64, upper: f64) -> Result<Self> {
        if !lower.is_finite() || !upper.is_finite() {
            return Err(Error::InvalidDistribution(
                "uniform bounds must be finite".into(),
            ));
        }
        if lower < 0.0 {
            return Err(Error::InvalidDistribution(format!(
                "uniform lower bound must be non-negative, got {lower}"
            )));
        }
        if lower >= upper {
            return Err(Error::InvalidDistribution(format!(
                "uniform requires lower < upper, got [{lower}, {upper}]"
            )));
        }
        Ok(Self::Uniform { lower, upper })
    }

    /// Exponential with the given rate; requires `rate > 0`.
    pub fn exponential(rate: f64) -> Result<Self> {
        if !(rate.is_finite() && rate > 0.0) {
            return Err(Error::InvalidDistribution(format!(
                "exponential rate must be positive and finite, got {rate}"
            )));
        }
        Ok(Self::Exponential { rate })
    }

    /// Finite distribution over `(value, probability)` atoms.
    ///
    /// Atoms are sorted by value; probabilities must be positive and sum to
    /// one within `1e-12`, values must be non-negative and distinct.
    pub fn discrete(mut atoms: Vec<(f64, f64)>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::InvalidDistribution(
                "discrete distribution needs at least one atom".into(),
            ));
        }
        for &(value, prob) in &atoms {
            if !value.is_finite() || value < 0.0 {
                return Err(Error::InvalidDistribution(format!(
                    "atom value must be finite and non-negative, got {value}"
                )));
            }
            if !(prob.is_finite() && prob > 0.0) {
                return Err(Error::InvalidDistribution(format!(
                    "atom probability must be positive, got {prob}"
                )));
            }
        }
        atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
        if atoms.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::InvalidDistribution(
                "atom values must be distinct".into(),
            ));
        }
        let total: f64 = atoms.iter().map(|&(_, p)| p).sum();
        if (total - 1.0).abs() > ATOM_PROBABILITY_TOL {
            return Err(Error::InvalidDistribution(format!(
                "atom probabilities sum to {total}, expected 1"
            )));
        }
        Ok(Self::Discrete { atoms })
    }

    /// Support bounds `(lower, upper)`; the exponential upper bound is `+inf`.
    pub fn support(&self) -> (f64, f64) {
        match self {
            Self::Uniform { lower, upper } => (*lower, *upper),
            Self::Exponential { .. } => (0.0, f64::INFINITY),
            Self::Discrete { atoms } => (atoms[0].0, atoms[atoms.len() - 1].0),
        }
    }

    pub fn in_support(&self, x: f64) -> bool {
        let (lower, upper) = self.support();
        x >= lower && x <= upper
    }

    /// Cumulative probability `P(S <= x)`, extended to all reals.
    pub fn cdf(&self, x: f64) -> f64 {
        match self {
            Self::Uniform { lower, upper } => {
                ((x - lower) / (upper - lower)).clamp(0.0, 1.0)
            }
            Self::Exponential { rate } => {
                if x <= 0.0 {
                    0.0
                } else {
                    1.0 - (-rate * x).exp()
                }
            }
            Self::Discrete { atoms } => atoms
                .iter()
                .take_while(|&&(value, _)| value <= x)
                .map(|&(_, prob)| prob)
                .sum(),
        }
    }

    /// Density at `x`. The discrete kind carries its mass in atoms, not a
    /// density, so it reports `0` everywhere.
    pub fn pdf(&self, x: f64) -> f64 {
        match self {
            Self::Uniform { lower, upper } => {
                if x >= *lower && x < *upper {
                    1.0 / (upper - lower)
                } else {
                    0.0
                }
            }
            Self::Exponential { rate } => {
                if x < 0.0 {
                    0.0
                } else {
                    rate * (-rate * x).exp()
                }
            }
            Self::Discrete { .. } => 0.0,
        }
    }

    pub fn mean(&self) -> f64 {
        match self {
            Self::Uniform { lower, upper } => 0.5 * (lower + upper),
            Self::Exponential { rate } => 1.0 / rate,
            Self::Discrete { atoms } => atoms.iter().map(|&(v, p)| v * p).sum(),
        }
    }

    /// Upper partial expectation `E[S · 1{S > z}]`, extended to all reals:
    /// the full mean for `z` below the support, `0` above it, non-increasing
    /// in between.
    pub fn upper_partial_expectation(&self, z: f64) -> f64 {
        match self {
            Self::Uniform { lower, upper } => {
                if z <= *lower {
                    self.mean()
                } else if z >= *upper {
                    0.0
                } else {
                    (upper * upper - z * z) / (2.0 * (upper - lower))
                }
            }
            Self::Exponential { rate } => {
                if z <= 0.0 {
                    1.0 / rate
                } else {
                    (z + 1.0 / rate) * (-rate * z).exp()
                }
            }
            Self::Discrete { atoms } => atoms
                .iter()
                .filter(|&&(value, _)| value > z)
                .map(|&(value, prob)| value * prob)
                .sum(),
        }
    }

    /// Inverse cumulative transform of `u` in `[0, 1)`.
    pub fn quantile(&self, u: f64) -> f64 {
        debug_assert!((0.0..1.0).contains(&u));
        match self {
            Self::Uniform { lower, upper } => lower + u * (upper - lower),
            Self::Exponential { rate } => -(1.0 - u).ln() / rate,
            Self::Discrete { atoms } => {
                let mut cumulative = 0.0;
                for &(value, prob) in atoms {
                    cumulative += prob;
                    if u < cumulative {
                        return value;
                    }
                }
                atoms[atoms.len() - 1].0
            }
        }
    }

    /// One inverse-transform draw from the given stream.
    pub fn sample<R: RngCore>(&self, rng: &mut R) -> f64 {
        self.quantile(unit_f64(rng))
    }

    /// `count` draws from a fresh ChaCha8 stream seeded with `seed`.
    ///
    /// Deterministic: the same `(distribution, seed, count)` always yields
    /// the same sequence, on every platform.
    pub fn sample_stream(&self, seed: u64, count: usize) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..count).map(|_| self.sample(&mut rng)).collect()
    }

    /// The estimator shape matching this distribution, if it has one.
    pub fn shape(&self) -> Option<DistributionShape> {
        match self {
            Self::Uniform { .. } => Some(DistributionShape::Uniform),
            Self::Exponential { .. } => Some(DistributionShape::Exponential),
            Self::Discrete { .. } => None,
        }
    }
}

impl fmt::Display for ScoreDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Uniform { lower, upper } => write!(f, "uniform:{lower},{upper}"),
            Self::Exponential { rate } => write!(f, "exp:{rate}"),
            Self::Discrete { atoms } => {
                write!(f, "discrete:")?;
                for (i, (value, prob)) in atoms.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{value}:{prob}")?;
                }
                Ok(())
            }
        }
    }
}

/// Parses the CLI grammar: `uniform:<lower>,<upper>`, `exp:<rate>`, or
/// `discrete:<v1>:<p1>,<v2>:<p2>,...`.
impl FromStr for ScoreDistribution {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = |msg: &str| Error::InvalidDistribution(format!("{msg} in spec '{s}'"));
        let (kind, rest) = s
            .split_once(':')
            .ok_or_else(|| bad("missing ':' separator"))?;
        match kind {
            "uniform" => {
                let (a, b) = rest
                    .split_once(',')
                    .ok_or_else(|| bad("uniform needs '<lower>,<upper>'"))?;
                let lower: f64 = a.trim().parse().map_err(|_| bad("bad lower bound"))?;
                let upper: f64 = b.trim().parse().map_err(|_| bad("bad upper bound"))?;
                Self::uniform(lower, upper)
            }
            "exp" => {
                let rate: f64 = rest.trim().parse().map_err(|_| bad("bad rate"))?;
                Self::exponential(rate)
            }
            "discrete" => {
                let mut atoms = Vec::new();
                for pair in rest.split(',') {
                    let (v, p) = pair
                        .split_once(':')
                        .ok_or_else(|| bad("discrete atoms need '<value>:<prob>'"))?;
                    let value: f64 = v.trim().parse().map_err(|_| bad("bad atom value"))?;
                    let prob: f64 = p.trim().parse().map_err(|_| bad("bad atom probability"))?;
                    atoms.push((value, prob));
                }
                Self::discrete(atoms)
            }
            other => Err(Error::InvalidDistribution(format!(
                "unknown distribution kind '{other}' (expected uniform, exp, or discrete)"
            ))),
        }
    }
}

/// Parametric family assumed known in the partial-information setting.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DistributionShape {
    Uniform,
    Exponential,
}

/// Running score statistics for fitting a distribution online.
///
/// Only `(count, min, max, sum)` are kept, so the estimate is O(1) in memory
/// and invariant to the order observations arrive in.
#[derive(Debug, Clone, PartialEq)]
pub struct DistributionEstimator {
    shape: DistributionShape,
    count: usize,
    min: f64,
    max: f64,
    sum: f64,
}

impl DistributionEstimator {
    pub fn new(shape: DistributionShape) -> Self {
        Self {
            shape,
            count: 0,
            min: f64::INFINITY,
            max: f64::NEG_INFINITY,
            sum: 0.0,
        }
    }

    pub fn observe(&mut self, score: f64) {
        self.count += 1;
        self.min = self.min.min(score);
        self.max = self.max.max(score);
        self.sum += score;
    }

    pub fn count(&self) -> usize {
        self.count
    }

    /// Fits the configured shape from the running statistics.
    ///
    /// * uniform: range-expansion estimate. With `m` observations the
    ///   observed range underestimates the true one by a factor
    ///   `(m-1)/(m+1)` in expectation, so both ends are pushed out by
    ///   `(max-min)/(m-1)`, then the lower end is clamped to `0` to stay on
    ///   a non-negative support.
    /// * exponential: maximum likelihood, `rate = count / sum`.
    ///
    /// Needs at least two observations.
    pub fn fit(&self) -> Result<ScoreDistribution> {
        if self.count < 2 {
            return Err(Error::InsufficientData {
                observed: self.count,
            });
        }
        match self.shape {
            DistributionShape::Uniform => {
                let spread = (self.max - self.min) / (self.count - 1) as f64;
                let lower = (self.min - spread).max(0.0);
                let mut upper = self.max + spread;
                if upper <= lower {
                    // All observations identical; open a sliver of support.
                    upper = lower + (lower.abs() * 1e-9).max(1e-9);
                }
                ScoreDistribution::uniform(lower, upper)
            }
            DistributionShape::Exponential => {
                let rate = if self.sum > 0.0 {
                    self.count as f64 / self.sum
                } else {
                    1e12
                };
                ScoreDistribution::exponential(rate)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_uniform() -> ScoreDistribution {
        ScoreDistribution::uniform(0.0, 1.0).unwrap()
    }

    #[test]
    fn cdf_examples() {
        assert_eq!(unit_uniform().cdf(0.3), 0.3);
        assert_eq!(unit_uniform().cdf(-2.0), 0.0);
        assert_eq!(unit_uniform().cdf(7.0), 1.0);
        let e = ScoreDistribution::exponential(1.0).unwrap();
        assert!((e.cdf(1.0) - (1.0 - (-1.0f64).exp())).abs() < 1e-15);
    }

    #[test]
    fn discrete_cdf_is_right_continuous() {
        let d = ScoreDistribution::discrete(vec![(1.0, 0.5), (3.0, 0.5)]).unwrap();
        assert_eq!(d.cdf(0.999), 0.0);
        assert_eq!(d.cdf(1.0), 0.5);
        assert_eq!(d.cdf(2.999), 0.5);
        assert_eq!(d.cdf(3.0), 1.0);
    }

    #[test]
    fn mean_examples() {
        assert_eq!(unit_uniform().mean(), 0.5);
        assert_eq!(ScoreDistribution::exponential(2.0).unwrap().mean(), 0.5);
        let d = ScoreDistribution::discrete(vec![(1.0, 0.5), (3.0, 0.5)]).unwrap();
        assert_eq!(d.mean(), 2.0);
    }

    #[test]
    fn upper_partial_expectation_examples() {
        assert!((unit_uniform().upper_partial_expectation(0.5) - 0.375).abs() < 1e-15);
        let e = ScoreDistribution::exponential(1.0).unwrap();
        assert!((e.upper_partial_expectation(0.0) - 1.0).abs() < 1e-15);
        assert!((e.upper_partial_expectation(1.0) - 2.0 * (-1.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn partial_expectation_equals_mean_at_support_floor() {
        let cases = [
            ScoreDistribution::uniform(0.25, 2.0).unwrap(),
            ScoreDistribution::exponential(0.7).unwrap(),
        ];
        for d in cases {
            let (lower, _) = d.support();
            assert_eq!(d.upper_partial_expectation(lower), d.mean());
        }
        // The discrete kind puts mass *at* the floor, so the identity holds
        // strictly below it.
        let d = ScoreDistribution::discrete(vec![(0.5, 0.5), (1.5, 0.5)]).unwrap();
        assert_eq!(d.upper_partial_expectation(0.4999), d.mean());
        assert_eq!(d.upper_partial_expectation(0.5), 0.75);
    }

    #[test]
    fn sample_stream_is_deterministic_and_in_support() {
        let d = unit_uniform();
        let a = d.sample_stream(42, 10_000);
        let b = d.sample_stream(42, 10_000);
        assert_eq!(a, b);
        assert!(a.iter().all(|&x| (0.0..=1.0).contains(&x)));

        let e = ScoreDistribution::exponential(3.0).unwrap();
        assert!(e.sample_stream(5, 1000).iter().all(|&x| x >= 0.0));
    }

    #[test]
    fn sample_stream_mean_converges() {
        // 3 sigma / sqrt(m) for U(0,1) at m = 1e5 is about 0.0027.
        let d = unit_uniform();
        let xs = d.sample_stream(7, 100_000);
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        assert!((mean - 0.5).abs() < 0.01, "sample mean {mean}");
    }

    #[test]
    fn fit_uniform_examples() {
        let mut est = DistributionEstimator::new(DistributionShape::Uniform);
        est.observe(0.2);
        est.observe(0.9);
        let d = est.fit().unwrap();
        match d {
            ScoreDistribution::Uniform { lower, upper } => {
                assert_eq!(lower, 0.0); // clamped from -0.5
                assert!((upper - 1.6).abs() < 1e-12);
            }
            other => panic!("expected uniform, got {other}"),
        }

        let mut est = DistributionEstimator::new(DistributionShape::Uniform);
        for i in 1..=9 {
            est.observe(0.1 * i as f64);
        }
        match est.fit().unwrap() {
            ScoreDistribution::Uniform { lower, upper } => {
                assert!(lower.abs() < 1e-12);
                assert!((upper - 1.0).abs() < 1e-12);
            }
            other => panic!("expected uniform, got {other}"),
        }
    }

    #[test]
    fn fit_exponential_is_reciprocal_mean() {
        let mut est = DistributionEstimator::new(DistributionShape::Exponential);
        est.observe(1.0);
        est.observe(3.0);
        match est.fit().unwrap() {
            ScoreDistribution::Exponential { rate } => assert!((rate - 0.5).abs() < 1e-15),
            other => panic!("expected exponential, got {other}"),
        }
    }

    #[test]
    fn fit_requires_two_observations() {
        let mut est = DistributionEstimator::new(DistributionShape::Uniform);
        assert_eq!(est.fit(), Err(Error::InsufficientData { observed: 0 }));
        est.observe(0.5);
        assert_eq!(est.fit(), Err(Error::InsufficientData { observed: 1 }));
    }

    #[test]
    fn fit_handles_degenerate_observations() {
        let mut est = DistributionEstimator::new(DistributionShape::Uniform);
        est.observe(0.5);
        est.observe(0.5);
        let d = est.fit().unwrap();
        let (lower, upper) = d.support();
        assert!(lower < upper);

        let mut est = DistributionEstimator::new(DistributionShape::Exponential);
        est.observe(0.0);
        est.observe(0.0);
        assert!(est.fit().is_ok());
    }

    #[test]
    fn parse_round_trips() {
        for spec in ["uniform:0,1", "exp:1.5", "discrete:1:0.25,2:0.75"] {
            let d: ScoreDistribution = spec.parse().unwrap();
            assert_eq!(d.to_string(), spec);
        }
    }

    #[test]
    fn parse_rejects_malformed_specs() {
        for bad in [
            "uniform:1,0",
            "uniform:-1,1",
            "uniform:0",
            "exp:0",
            "exp:-2",
            "discrete:1:0.5,1:0.5",
            "discrete:1:0.5",
            "normal:0,1",
            "uniform",
        ] {
            assert!(bad.parse::<ScoreDistribution>().is_err(), "accepted {bad}");
        }
    }

    #[test]
    fn quantile_covers_discrete_atoms() {
        let d = ScoreDistribution::discrete(vec![(1.0, 0.25), (2.0, 0.5), (4.0, 0.25)]).unwrap();
        assert_eq!(d.quantile(0.0), 1.0);
        assert_eq!(d.quantile(0.2499), 1.0);
        assert_eq!(d.quantile(0.25), 2.0);
        assert_eq!(d.quantile(0.7499), 2.0);
        assert_eq!(d.quantile(0.75), 4.0);
        assert_eq!(d.quantile(0.999999), 4.0);
    }
}
