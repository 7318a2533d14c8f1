//! Online shield engine.
//!
//! An engine consumes raw decisions one at a time, together with a uniform
//! draw supplied by the caller, and releases the shielded decision. It
//! never owns a random generator.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::energy::{required_energy_at_target, EnergyFunction};
use crate::error::{Error, Result};
use crate::fairness::{Domain, FairnessTarget, Group, RunningMeanState, TwoGroupState};
use crate::format::fmt_g12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Known,
    TwoGroup,
    AdaptiveUnknownP,
    Drift,
    NaiveBaseline,
    IdleBaseline,
}

impl Mode {
    pub fn is_two_group(self) -> bool {
        self == Mode::TwoGroup
    }
}

/// Default distance between the target and the pivot of the adaptively
/// recalibrated energy function.
pub const ADAPTIVE_PIVOT_OFFSET: f64 = 0.1;

/// Serializable description of an engine.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
pub enum ShieldSpec {
    Known {
        zeta: EnergyFunction,
    },
    TwoGroup {
        zeta: EnergyFunction,
    },
    Adaptive {
        mu_star: f64,
        #[serde(default = "default_offset")]
        pivot_offset: f64,
    },
    Drift {
        zeta: EnergyFunction,
    },
    Naive {
        target: FairnessTarget,
    },
    Idle {
        #[serde(default)]
        domain: Domain,
    },
}

fn default_offset() -> f64 {
    ADAPTIVE_PIVOT_OFFSET
}

impl ShieldSpec {
    pub fn build(&self) -> Result<ShieldEngine> {
        match *self {
            ShieldSpec::Known { zeta } => ShieldEngine::known(zeta),
            ShieldSpec::TwoGroup { zeta } => ShieldEngine::two_group(zeta),
            ShieldSpec::Adaptive { mu_star, pivot_offset } => ShieldEngine::adaptive(mu_star, pivot_offset),
            ShieldSpec::Drift { zeta } => ShieldEngine::drift(zeta),
            ShieldSpec::Naive { target } => ShieldEngine::naive(target),
            ShieldSpec::Idle { domain } => Ok(ShieldEngine::idle(domain)),
        }
    }

    pub fn mode(&self) -> Mode {
        match self {
            ShieldSpec::Known { .. } => Mode::Known,
            ShieldSpec::TwoGroup { .. } => Mode::TwoGroup,
            ShieldSpec::Adaptive { .. } => Mode::AdaptiveUnknownP,
            ShieldSpec::Drift { .. } => Mode::Drift,
            ShieldSpec::Naive { .. } => Mode::NaiveBaseline,
            ShieldSpec::Idle { .. } => Mode::IdleBaseline,
        }
    }
}

/// One raw input: a bit, or a group label with a bit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Input {
    Bit(bool),
    Grouped(Group, bool),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub t: u64,
    pub group: Option<Group>,
    pub x: bool,
    pub y: bool,
    pub z: bool,
    /// Fairness value after the step; `None` while a group is unseen.
    pub m: Option<f64>,
    pub nu: f64,
}

impl StepRecord {
    pub const CSV_HEADER: &'static str = "t,group,x,y,z,m,nu";

    pub fn csv_row(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for StepRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{},{},{},{},{},{},{}",
            self.t,
            self.group.map(Group::as_str).unwrap_or(""),
            u8::from(self.x),
            u8::from(self.y),
            u8::from(self.z),
            self.m.map(fmt_g12).unwrap_or_default(),
            fmt_g12(self.nu)
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum State {
    Single(RunningMeanState),
    Two(TwoGroupState),
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Adaptive {
    mu_star: f64,
    pivot_offset: f64,
    raw_t: u64,
    raw_ones: u64,
}

impl Adaptive {
    fn estimate(&self) -> f64 {
        (1.0 + self.raw_ones as f64) / (2.0 + self.raw_t as f64)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShieldEngine {
    mode: Mode,
    zeta: EnergyFunction,
    state: State,
    interventions: u64,
    target: Option<FairnessTarget>,
    adaptive: Option<Adaptive>,
}

impl ShieldEngine {
    fn with(mode: Mode, zeta: EnergyFunction) -> Self {
        let state = match zeta.domain() {
            Domain::Unit => State::Single(RunningMeanState::new()),
            Domain::Signed => State::Two(TwoGroupState::new()),
        };
        Self {
            mode,
            zeta,
            state,
            interventions: 0,
            target: None,
            adaptive: None,
        }
    }

    fn require_domain(zeta: &EnergyFunction, domain: Domain, mode: &str) -> Result<()> {
        if zeta.domain() == domain {
            Ok(())
        } else {
            Err(Error::param(format!("{mode} shield needs an energy function on the {domain:?} domain")))
        }
    }

    /// Single-group shield with a fixed energy function.
    pub fn known(zeta: EnergyFunction) -> Result<Self> {
        Self::require_domain(&zeta, Domain::Unit, "single-group")?;
        Ok(Self::with(Mode::Known, zeta))
    }

    /// Same rule as [`Self::known`]; the acceptance probability may drift.
    pub fn drift(zeta: EnergyFunction) -> Result<Self> {
        Self::require_domain(&zeta, Domain::Unit, "drift")?;
        Ok(Self::with(Mode::Drift, zeta))
    }

    pub fn two_group(zeta: EnergyFunction) -> Result<Self> {
        Self::require_domain(&zeta, Domain::Signed, "two-group")?;
        Ok(Self::with(Mode::TwoGroup, zeta))
    }

    /// Shield for an unknown acceptance probability. Each step recalibrates
    /// an exponential energy function to the current estimate so that its
    /// fixpoint is `mu_star`; the pivot sits `pivot_offset` beyond it.
    pub fn adaptive(mu_star: f64, pivot_offset: f64) -> Result<Self> {
        if !(mu_star > 0.0 && mu_star < 1.0) {
            return Err(Error::param(format!("mu* = {mu_star} must lie in (0, 1)")));
        }
        if !(pivot_offset > 0.0) {
            return Err(Error::param("pivot offset must be positive"));
        }
        let mut e = Self::with(Mode::AdaptiveUnknownP, EnergyFunction::idle(Domain::Unit));
        e.adaptive = Some(Adaptive {
            mu_star,
            pivot_offset,
            raw_t: 0,
            raw_ones: 0,
        });
        e.zeta = adaptive_energy(0.5, mu_star, pivot_offset);
        Ok(e)
    }

    /// Baseline that flips only when keeping the decision would leave the
    /// running interval.
    pub fn naive(target: FairnessTarget) -> Result<Self> {
        if target.domain != Domain::Unit {
            return Err(Error::param("the naive baseline is single-group"));
        }
        let mut e = Self::with(Mode::NaiveBaseline, EnergyFunction::idle(Domain::Unit));
        e.target = Some(target);
        Ok(e)
    }

    pub fn idle(domain: Domain) -> Self {
        Self::with(Mode::IdleBaseline, EnergyFunction::idle(domain))
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    /// Energy function in force for the next step.
    pub fn zeta(&self) -> &EnergyFunction {
        &self.zeta
    }

    pub fn t(&self) -> u64 {
        match self.state {
            State::Single(s) => s.t,
            State::Two(s) => s.t(),
        }
    }

    pub fn interventions(&self) -> u64 {
        self.interventions
    }

    /// Running intervention rate; 0 before the first step.
    pub fn nu(&self) -> f64 {
        crate::fairness::mean_of(self.interventions, self.t())
    }

    pub fn fairness(&self) -> Option<f64> {
        match self.state {
            State::Single(s) => Some(s.mean()),
            State::Two(s) => s.fairness(),
        }
    }

    pub fn single_state(&self) -> Option<RunningMeanState> {
        match self.state {
            State::Single(s) => Some(s),
            State::Two(_) => None,
        }
    }

    pub fn two_group_state(&self) -> Option<TwoGroupState> {
        match self.state {
            State::Two(s) => Some(s),
            State::Single(_) => None,
        }
    }

    /// Current estimate of the acceptance probability (adaptive mode).
    pub fn estimate(&self) -> Option<f64> {
        self.adaptive.map(|a| a.estimate())
    }

    /// Dispatches on the engine mode.
    pub fn step(&mut self, input: Input, rand: f64) -> Result<StepRecord> {
        match (self.mode, input) {
            (Mode::TwoGroup, Input::Grouped(g, x)) => Ok(self.step_two_group(g, x, rand)),
            (Mode::IdleBaseline, Input::Grouped(g, x)) if matches!(self.state, State::Two(_)) => {
                Ok(self.step_two_group(g, x, rand))
            }
            (Mode::TwoGroup, Input::Bit(_)) => Err(Error::param("two-group engine needs a group label")),
            (_, Input::Grouped(..)) => Err(Error::param("single-group engine got a group label")),
            (_, Input::Bit(_)) if matches!(self.state, State::Two(_)) => {
                Err(Error::param("two-group engine needs a group label"))
            }
            (Mode::AdaptiveUnknownP, Input::Bit(x)) => Ok(self.step_adaptive(x, rand)),
            (Mode::NaiveBaseline, Input::Bit(x)) => Ok(self.step_naive(x)),
            (_, Input::Bit(x)) => Ok(self.step_single(x, rand)),
        }
    }

    fn finish_single(&mut self, x: bool, y: bool) -> StepRecord {
        let State::Single(s) = &mut self.state else {
            panic!("single-group step on a two-group engine")
        };
        let z = x ^ y;
        *s = s.update(z);
        self.interventions += u64::from(y);
        let (t, m) = (s.t, s.mean());
        StepRecord {
            t,
            group: None,
            x,
            y,
            z,
            m: Some(m),
            nu: self.nu(),
        }
    }

    /// Single-group rule. At or below the pivot a raw 0 is flipped with
    /// probability `zeta(mu)`; above it a raw 1 is. The first step has no
    /// fairness value yet and passes through.
    pub fn step_single(&mut self, x: bool, rand: f64) -> StepRecord {
        let State::Single(s) = self.state else {
            panic!("single-group step on a two-group engine")
        };
        let y = if s.t == 0 {
            false
        } else {
            let mu = s.mean();
            let unfavourable = if mu <= self.zeta.decision_pivot() { !x } else { x };
            unfavourable && rand < self.zeta.value(mu)
        };
        self.finish_single(x, y)
    }

    /// Two-group rule. At or below the pivot the shield favours accepting
    /// group A and rejecting group B, above it the reverse; an unfavourable
    /// raw decision is flipped with probability `zeta(M)`. The shield idles
    /// while either group is unseen.
    pub fn step_two_group(&mut self, g: Group, x: bool, rand: f64) -> StepRecord {
        let State::Two(s) = &mut self.state else {
            panic!("two-group step on a single-group engine")
        };
        let y = match s.fairness() {
            None => false,
            Some(mu) => {
                let favour_accept = (mu <= self.zeta.decision_pivot()) == (g == Group::A);
                let unfavourable = x != favour_accept;
                unfavourable && rand < self.zeta.value(mu)
            }
        };
        let z = x ^ y;
        *s = s.update(g, z);
        let (t, m) = (s.t(), s.fairness());
        self.interventions += u64::from(y);
        StepRecord {
            t,
            group: Some(g),
            x,
            y,
            z,
            m,
            nu: self.nu(),
        }
    }

    /// Folds the raw decision into the estimate, recalibrates the energy
    /// function to it and applies the single-group rule.
    pub fn step_adaptive(&mut self, x: bool, rand: f64) -> StepRecord {
        let a = self.adaptive.as_mut().expect("adaptive step on a non-adaptive engine");
        a.raw_t += 1;
        a.raw_ones += u64::from(x);
        let (q, mu_star, off) = (a.estimate(), a.mu_star, a.pivot_offset);
        self.zeta = adaptive_energy(q, mu_star, off);
        self.step_single(x, rand)
    }

    /// Naive baseline: from the burn-in on, flips exactly when keeping the
    /// decision would leave the running interval and flipping would not.
    /// When both choices leave it, the one closer to it is released.
    pub fn step_naive(&mut self, x: bool) -> StepRecord {
        let target = self.target.expect("naive step on a non-naive engine");
        let State::Single(s) = self.state else {
            panic!("naive step on a two-group engine")
        };
        let t1 = s.t + 1;
        let y = if t1 < target.burn_in {
            false
        } else {
            let keep = (s.count_ones + u64::from(x)) as f64 / t1 as f64;
            let flip = (s.count_ones + u64::from(!x)) as f64 / t1 as f64;
            let (dk, df) = (target.running.distance(keep), target.running.distance(flip));
            dk > 0.0 && df < dk
        };
        self.finish_single(x, y)
    }
}

/// Exponential energy with unit amplitude calibrated so that a stream
/// accepting with probability `q` settles at `mu_star`.
pub fn adaptive_energy(q: f64, mu_star: f64, pivot_offset: f64) -> EnergyFunction {
    let need = required_energy_at_target(q, mu_star).min(1.0 - 1e-9);
    if need <= 0.0 || (q - mu_star).abs() < 1e-12 {
        return EnergyFunction::exponential(mu_star, 1.0, 128.0, Domain::Unit).expect("valid parameters");
    }
    // pivot on the far side of the target, kept inside the domain
    let room = if q < mu_star { 1.0 - mu_star } else { mu_star };
    let gap = pivot_offset.min(0.5 * room);
    let kappa = if q < mu_star { mu_star + gap } else { mu_star - gap };
    let sigma = -(1.0 - need).ln() / (gap * gap);
    EnergyFunction::exponential(kappa, 1.0, sigma, Domain::Unit).expect("valid parameters")
}

/// Runs an engine over a whole input sequence with draws from a generator
/// seeded by `seed`.
pub fn run_stream(engine: &mut ShieldEngine, xs: &[Input], seed: u64) -> Result<Vec<StepRecord>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let u: f64 = rng.gen();
            engine.step(x, u).map_err(|e| Error::Input {
                index: i,
                message: e.to_string(),
            })
        })
        .collect()
}

fn first_line(text: &str) -> usize {
    text.lines().position(|l| !l.trim().is_empty()).unwrap_or(0)
}

/// Parses raw decisions, one per line: `x` for a single stream or
/// `group,x` for two groups. Blank lines and a leading header are skipped.
pub fn parse_inputs(text: &str, two_group: bool) -> Result<Vec<Input>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        let is_header = out.is_empty() && i == first_line(text) && !matches!(fields.last(), Some(&"0") | Some(&"1"));
        if is_header {
            continue;
        }
        let bad = |message: String| Error::Input { index: out.len(), message };
        let bit = |s: &str| match s {
            "0" => Ok(false),
            "1" => Ok(true),
            other => Err(bad(format!("expected 0 or 1, got '{other}'"))),
        };
        let input = match (two_group, fields.as_slice()) {
            (false, [x]) => Input::Bit(bit(x)?),
            (true, [g, x]) => {
                let g: Group = g.parse().map_err(|_| bad(format!("unknown group '{g}'")))?;
                Input::Grouped(g, bit(x)?)
            }
            (false, _) => return Err(bad(format!("expected one field, got '{line}'"))),
            (true, _) => return Err(bad(format!("expected 'group,x', got '{line}'"))),
        };
        out.push(input);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pol(k: f64, a: f64, b: f64) -> EnergyFunction {
        EnergyFunction::polynomial(k, a, b, Domain::Unit).unwrap()
    }

    /// Feeds a fixed prefix with no interventions (draws of 1.0 never flip).
    fn warm(engine: &mut ShieldEngine, ones: u64, t: u64) {
        for i in 0..t {
            engine.step_single(i < ones, 1.0);
        }
    }

    #[test]
    fn boundary_accepts_ones() {
        let mut e = ShieldEngine::known(pol(0.5, 4.0, 2.0)).unwrap();
        warm(&mut e, 1, 2);
        assert_eq!(e.fairness(), Some(0.5));
        let r = e.step_single(true, 0.0);
        assert!(!r.y && r.z);
    }

    #[test]
    fn above_pivot_flips_ones() {
        let z = pol(0.4, 2.7, 2.0);
        assert!((z.value(0.6) - 0.108).abs() < 1e-12);
        let mut e = ShieldEngine::known(z).unwrap();
        warm(&mut e, 3, 5);
        assert!((e.fairness().unwrap() - 0.6).abs() < 1e-15);
        let r = e.step_single(true, 0.05);
        assert!(r.y && !r.z);
        assert_eq!(r.t, 6);
        assert!((r.m.unwrap() - 0.5).abs() < 1e-15);
        assert!((r.nu - 1.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn idle_passes_through() {
        let mut e = ShieldEngine::idle(Domain::Unit);
        let xs = [Input::Bit(true), Input::Bit(false), Input::Bit(true)];
        let recs = run_stream(&mut e, &xs, 3).unwrap();
        let zs: Vec<bool> = recs.iter().map(|r| r.z).collect();
        assert_eq!(zs, vec![true, false, true]);
        assert_eq!(recs[2].nu, 0.0);
    }

    #[test]
    fn two_group_rule_table() {
        let zeta = EnergyFunction::exponential(0.0, 1.0, -(0.8f64).ln() / 0.16, Domain::Signed).unwrap();
        assert!((zeta.value(0.4) - 0.2).abs() < 1e-12);
        // reach M = 0.4: A accepts 7 of 10, B accepts 3 of 10
        let mut e = ShieldEngine::two_group(zeta).unwrap();
        let feed = |e: &mut ShieldEngine, g, ones, n| {
            for i in 0..n {
                e.step_two_group(g, i < ones, 1.0);
            }
        };
        feed(&mut e, Group::A, 7, 10);
        feed(&mut e, Group::B, 3, 10);
        assert!((e.fairness().unwrap() - 0.4).abs() < 1e-12);
        let mut probe = e.clone();
        let r = probe.step_two_group(Group::A, true, 0.1);
        assert!(r.y && !r.z);
        // below the pivot a group-A acceptance is already favourable
        let mut low = ShieldEngine::two_group(zeta).unwrap();
        feed(&mut low, Group::A, 3, 10);
        feed(&mut low, Group::B, 7, 10);
        let mut probe = low.clone();
        assert!(!probe.step_two_group(Group::A, true, 0.0).y);
        // group B acceptance is unfavourable there, but the draw misses
        let mut probe = low.clone();
        let r = probe.step_two_group(Group::B, true, 0.99);
        assert!(!r.y && r.z);
    }

    #[test]
    fn two_group_idles_until_both_seen() {
        let zeta = EnergyFunction::polynomial(0.0, 1.0, 2.0, Domain::Signed).unwrap();
        let mut e = ShieldEngine::two_group(zeta).unwrap();
        for _ in 0..5 {
            let r = e.step_two_group(Group::A, false, 0.0);
            assert!(!r.y);
            assert_eq!(r.m, None);
        }
        let r = e.step_two_group(Group::B, true, 0.0);
        assert!(!r.y);
        assert_eq!(r.m, Some(-1.0));
        assert_eq!(r.to_string(), "6,B,1,0,1,-1,0");
    }

    #[test]
    fn naive_examples() {
        let target = FairnessTarget::unit(40, (0.4, 0.6), (0.5, 0.5)).unwrap();
        let mut e = ShieldEngine::naive(target).unwrap();
        assert!(!e.step_naive(false).y);
        let mut e = ShieldEngine::naive(target).unwrap();
        // keep the mean at the smallest value not below 0.4, ending at 40/100
        let mut ones = 0u64;
        for t in 0..100u64 {
            let x = (ones as f64) < 0.4 * (t + 1) as f64;
            let r = e.step_naive(x);
            assert!(!r.y, "step {t}");
            ones += u64::from(x);
        }
        assert_eq!(ones, 40);
        let r = e.step_naive(false);
        assert!(r.y && r.z);
        assert_eq!(r.t, 101);

        let mut e = ShieldEngine::naive(target).unwrap();
        for i in 0..100 {
            e.step_naive(i % 2 == 0);
        }
        assert!(!e.step_naive(true).y);
    }

    #[test]
    fn naive_picks_nearest_when_both_outside() {
        let target = FairnessTarget::unit(1, (0.4, 0.6), (0.5, 0.5)).unwrap();
        let mut e = ShieldEngine::naive(target).unwrap();
        // first decision: 0 and 1 are both outside and equally far; keep
        assert!(!e.step_naive(true).y);
        // mean 1 after one step; next raw 1 gives 1.0, flipping gives 0.5
        let r = e.step_naive(true);
        assert!(r.y && !r.z);
    }

    #[test]
    fn adaptive_starts_from_half() {
        let mut e = ShieldEngine::adaptive(0.5, 0.1).unwrap();
        assert_eq!(e.estimate(), Some(0.5));
        let r = e.step_adaptive(true, 0.0);
        assert!(!r.y);
        assert!((e.estimate().unwrap() - 2.0 / 3.0).abs() < 1e-15);
        for _ in 0..50 {
            e.step_adaptive(true, 1.0);
        }
        let q = e.estimate().unwrap();
        assert!((q - 52.0 / 53.0).abs() < 1e-15);
        assert!((e.zeta().value(0.5) - required_energy_at_target(q, 0.5)).abs() < 1e-12);
    }

    #[test]
    fn adaptive_energy_calibration() {
        for &(q, mu) in &[(0.65, 0.5), (0.2, 0.45), (0.999, 0.6), (0.5, 0.5)] {
            let z = adaptive_energy(q, mu, 0.1);
            let expect = required_energy_at_target(q, mu);
            assert!((z.value(mu) - expect).abs() < 1e-9);
        }
    }

    #[test]
    fn csv_rows() {
        let r = StepRecord {
            t: 3,
            group: None,
            x: true,
            y: false,
            z: true,
            m: Some(2.0 / 3.0),
            nu: 1.0 / 3.0,
        };
        assert_eq!(r.csv_row(), "3,,1,0,1,0.666666666667,0.333333333333");
        assert_eq!(StepRecord::CSV_HEADER, "t,group,x,y,z,m,nu");
    }

    #[test]
    fn stream_errors_carry_index() {
        let mut e = ShieldEngine::known(pol(0.5, 4.0, 2.0)).unwrap();
        let xs = [Input::Bit(true), Input::Grouped(Group::A, true)];
        match run_stream(&mut e, &xs, 0) {
            Err(Error::Input { index, .. }) => assert_eq!(index, 1),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_inputs("x\n1\n0\n2\n", false), Err(Error::Input { index: 2, .. })));
        let ok = parse_inputs("group,x\nA,1\nB,0\n", true).unwrap();
        assert_eq!(ok, vec![Input::Grouped(Group::A, true), Input::Grouped(Group::B, false)]);
    }

    #[test]
    fn deterministic_given_seed() {
        let xs: Vec<Input> = (0..500).map(|i| Input::Bit(i % 3 != 0)).collect();
        let z = pol(0.5, 4.0, 2.0);
        let a = run_stream(&mut ShieldEngine::known(z).unwrap(), &xs, 9).unwrap();
        let b = run_stream(&mut ShieldEngine::known(z).unwrap(), &xs, 9).unwrap();
        assert_eq!(a, b);
        for r in &a {
            assert_eq!(r.z, r.x ^ r.y);
        }
    }

    #[test]
    fn spec_round_trip() {
        let spec = ShieldSpec::Naive {
            target: FairnessTarget::unit(40, (0.4, 0.6), (0.5, 0.5)).unwrap(),
        };
        let text = serde_json::to_string(&spec).unwrap();
        let back: ShieldSpec = serde_json::from_str(&text).unwrap();
        assert_eq!(spec, back);
        let a: ShieldSpec = serde_json::from_str(r#"{"mode":"adaptive","mu_star":0.5}"#).unwrap();
        assert_eq!(a.mode(), Mode::AdaptiveUnknownP);
        assert!(serde_json::from_str::<ShieldSpec>(r#"{"mode":"idle","extra":1}"#).is_err());
    }
}
