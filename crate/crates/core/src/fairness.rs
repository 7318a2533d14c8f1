//! Fairness targets and running-average bookkeeping.
//!
//! Counts are kept as integers and means are derived on demand, so long runs
//! never accumulate floating-point drift. Every module that needs "the
//! fairness value at time t" goes through [`RunningMeanState::mean`] or
//! [`TwoGroupState::fairness`], which keeps simulation, dynamic programming
//! and enumeration bit-for-bit consistent.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Range of admissible fairness values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Domain {
    /// `[0, 1]`: average outcome of a single decision stream.
    #[default]
    Unit,
    /// `[-1, 1]`: difference of two group acceptance rates.
    Signed,
}

impl Domain {
    pub fn lo(self) -> f64 {
        match self {
            Domain::Unit => 0.0,
            Domain::Signed => -1.0,
        }
    }

    pub fn hi(self) -> f64 {
        1.0
    }

    pub fn contains(self, x: f64) -> bool {
        x >= self.lo() && x <= self.hi()
    }

    pub fn check(self, x: f64) -> Result<()> {
        if self.contains(x) {
            Ok(())
        } else {
            Err(Error::Domain {
                value: x,
                lo: self.lo(),
                hi: self.hi(),
            })
        }
    }

    pub fn as_interval(self) -> Interval {
        Interval {
            lo: self.lo(),
            hi: self.hi(),
        }
    }
}

/// Closed interval `[lo, hi]`; `lo == hi` encodes a singleton.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite()) || lo > hi {
            return Err(Error::param(format!("invalid interval [{lo}, {hi}]")));
        }
        Ok(Self { lo, hi })
    }

    pub fn point(x: f64) -> Self {
        Self { lo: x, hi: x }
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lo && x <= self.hi
    }

    pub fn contains_interval(&self, other: &Interval) -> bool {
        other.lo >= self.lo && other.hi <= self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    /// Distance from `x` to the interval, 0 inside.
    pub fn distance(&self, x: f64) -> f64 {
        if x < self.lo {
            self.lo - x
        } else if x > self.hi {
            x - self.hi
        } else {
            0.0
        }
    }
}

impl Serialize for Interval {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        [self.lo, self.hi].serialize(s)
    }
}

impl<'de> Deserialize<'de> for Interval {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Point(f64),
            Pair([f64; 2]),
        }
        match Repr::deserialize(d)? {
            Repr::Point(x) => Interval::new(x, x),
            Repr::Pair([lo, hi]) => Interval::new(lo, hi),
        }
        .map_err(serde::de::Error::custom)
    }
}

/// Burn-in time, running interval `S = [L, U]` and limit set inside `S`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawTarget", into = "RawTarget")]
pub struct FairnessTarget {
    pub burn_in: u64,
    pub running: Interval,
    pub limit: Interval,
    pub domain: Domain,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTarget {
    burn_in: u64,
    running: Interval,
    limit: Interval,
    #[serde(default)]
    domain: Domain,
}

impl TryFrom<RawTarget> for FairnessTarget {
    type Error = Error;

    fn try_from(r: RawTarget) -> Result<Self> {
        FairnessTarget::new(r.burn_in, r.running, r.limit, r.domain)
    }
}

impl From<FairnessTarget> for RawTarget {
    fn from(t: FairnessTarget) -> Self {
        RawTarget {
            burn_in: t.burn_in,
            running: t.running,
            limit: t.limit,
            domain: t.domain,
        }
    }
}

impl FairnessTarget {
    pub fn new(burn_in: u64, running: Interval, limit: Interval, domain: Domain) -> Result<Self> {
        if !domain.as_interval().contains_interval(&running) {
            return Err(Error::param(format!(
                "running interval [{}, {}] leaves the fairness domain",
                running.lo, running.hi
            )));
        }
        if !running.contains_interval(&limit) {
            return Err(Error::param(format!(
                "limit set [{}, {}] is not contained in the running interval [{}, {}]",
                limit.lo, limit.hi, running.lo, running.hi
            )));
        }
        Ok(Self {
            burn_in,
            running,
            limit,
            domain,
        })
    }

    /// Single-group target on `[0, 1]`.
    pub fn unit(burn_in: u64, running: (f64, f64), limit: (f64, f64)) -> Result<Self> {
        Self::new(
            burn_in,
            Interval::new(running.0, running.1)?,
            Interval::new(limit.0, limit.1)?,
            Domain::Unit,
        )
    }

    /// Two-group target on `[-1, 1]`.
    pub fn signed(burn_in: u64, running: (f64, f64), limit: (f64, f64)) -> Result<Self> {
        Self::new(
            burn_in,
            Interval::new(running.0, running.1)?,
            Interval::new(limit.0, limit.1)?,
            Domain::Signed,
        )
    }

    pub fn with_burn_in(mut self, burn_in: u64) -> Self {
        self.burn_in = burn_in;
        self
    }

    pub fn lower(&self) -> f64 {
        self.running.lo
    }

    pub fn upper(&self) -> f64 {
        self.running.hi
    }
}

/// Point fairness: `value` lies in the running interval.
pub fn point_fair(value: f64, target: &FairnessTarget) -> bool {
    target.running.contains(value)
}

/// Ceiling that forgives representation error: values within a relative
/// `1e-9` of an integer round to that integer.
pub(crate) fn ceil_tolerant(x: f64) -> u64 {
    let r = x.round();
    if (x - r).abs() <= 1e-9 * x.abs().max(1.0) {
        r.max(0.0) as u64
    } else {
        x.ceil().max(0.0) as u64
    }
}

/// Burn-in from which the single-group tail bound applies:
/// `ceil(4 / min(|L - mu*|, |U - mu*|))`.
pub fn burn_in_tau_s(target: &FairnessTarget, mu_star: f64) -> Result<u64> {
    let (l, u) = (target.lower(), target.upper());
    if !(mu_star > l && mu_star < u) {
        return Err(Error::precondition(format!(
            "tail bounds inapplicable: mu* = {mu_star} is not strictly inside [{l}, {u}]"
        )));
    }
    let gap = (mu_star - l).abs().min((u - mu_star).abs());
    Ok(ceil_tolerant(4.0 / gap))
}

/// Running mean of a bit stream, stored as integer counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct RunningMeanState {
    pub t: u64,
    pub count_ones: u64,
}

impl RunningMeanState {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_counts(t: u64, count_ones: u64) -> Result<Self> {
        if count_ones > t {
            return Err(Error::param(format!("count {count_ones} exceeds time {t}")));
        }
        Ok(Self { t, count_ones })
    }

    /// `count_ones / t`, and 0 before the first observation.
    pub fn mean(&self) -> f64 {
        mean_of(self.count_ones, self.t)
    }

    pub fn update(self, z: bool) -> Self {
        Self {
            t: self.t + 1,
            count_ones: self.count_ones + u64::from(z),
        }
    }
}

/// The shared definition of "average of `count` ones over `t` steps".
#[inline]
pub fn mean_of(count: u64, t: u64) -> f64 {
    if t == 0 {
        0.0
    } else {
        count as f64 / t as f64
    }
}

/// `update_mean` as a free function.
pub fn update_mean(state: RunningMeanState, z: bool) -> RunningMeanState {
    state.update(z)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Group {
    A,
    B,
}

impl Group {
    pub fn as_str(self) -> &'static str {
        match self {
            Group::A => "A",
            Group::B => "B",
        }
    }
}

impl std::str::FromStr for Group {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "A" | "a" => Ok(Group::A),
            "B" | "b" => Ok(Group::B),
            other => Err(Error::param(format!("unknown group {other:?}"))),
        }
    }
}

/// Per-group counts and shielded acceptance sums.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct TwoGroupState {
    pub n_a: u64,
    pub s_a: u64,
    pub n_b: u64,
    pub s_b: u64,
}

impl TwoGroupState {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_counts(n_a: u64, s_a: u64, n_b: u64, s_b: u64) -> Result<Self> {
        if s_a > n_a || s_b > n_b {
            return Err(Error::param("acceptance sum exceeds group count"));
        }
        Ok(Self { n_a, s_a, n_b, s_b })
    }

    pub fn t(&self) -> u64 {
        self.n_a + self.n_b
    }

    pub fn group_mean(&self, g: Group) -> Option<f64> {
        match g {
            Group::A if self.n_a > 0 => Some(mean_of(self.s_a, self.n_a)),
            Group::B if self.n_b > 0 => Some(mean_of(self.s_b, self.n_b)),
            _ => None,
        }
    }

    /// `S_A/N_A - S_B/N_B`, undefined until both groups have been seen.
    pub fn fairness(&self) -> Option<f64> {
        two_group_value(self.n_a, self.s_a, self.n_b, self.s_b)
    }

    pub fn update(self, g: Group, z: bool) -> Self {
        let z = u64::from(z);
        match g {
            Group::A => Self {
                n_a: self.n_a + 1,
                s_a: self.s_a + z,
                ..self
            },
            Group::B => Self {
                n_b: self.n_b + 1,
                s_b: self.s_b + z,
                ..self
            },
        }
    }
}

#[inline]
pub fn two_group_value(n_a: u64, s_a: u64, n_b: u64, s_b: u64) -> Option<f64> {
    if n_a == 0 || n_b == 0 {
        None
    } else {
        Some(mean_of(s_a, n_a) - mean_of(s_b, n_b))
    }
}

pub fn update_two_group(state: TwoGroupState, g: Group, z: bool) -> TwoGroupState {
    state.update(g, z)
}
