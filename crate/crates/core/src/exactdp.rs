//! Exact finite-horizon violation measures.
//!
//! The shielded process is a Markov chain over states `(t, c)` (time and
//! number of accepted decisions) for one stream, or `(t, N_A, S_A, S_B)` for
//! two groups. Violations are counted at every `t` in `[max(tau, 1), T]`
//! where the fairness value lies outside the running interval. The
//! expectation measure counts them; the probability measure asks whether
//! any occurs.

use std::time::Instant;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::analysis::{CharacteristicModel, Setting};
use crate::error::{Error, Result};
use crate::fairness::{mean_of, two_group_value, FairnessTarget, Group};
use crate::seeding::stream_rng;

/// Which violation measure to compute.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Measure {
    /// Expected number of violating time steps.
    #[serde(alias = "E")]
    Expectation,
    /// Probability of at least one violating time step.
    #[serde(alias = "P")]
    Probability,
}

impl std::str::FromStr for Measure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "expectation" | "E" | "e" => Ok(Measure::Expectation),
            "probability" | "P" | "p" => Ok(Measure::Probability),
            other => Err(Error::param(format!("unknown measure '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainSpec {
    pub model: CharacteristicModel,
    pub target: FairnessTarget,
    pub horizon: u64,
    pub measure: Measure,
}

impl ChainSpec {
    pub fn new(model: CharacteristicModel, target: FairnessTarget, horizon: u64, measure: Measure) -> Result<Self> {
        if model.domain() != target.domain {
            return Err(Error::param("model and target live on different domains"));
        }
        Ok(Self {
            model,
            target,
            horizon,
            measure,
        })
    }

    /// First time step whose violation is counted.
    pub fn window_start(&self) -> u64 {
        self.target.burn_in.max(1)
    }
}

/// Budgets for the exact and sampled paths.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DpOptions {
    /// Maximum number of chain states an exact evaluation may touch.
    pub max_states: u64,
    /// Longest two-group horizon evaluated exactly.
    pub exact_limit: u64,
    /// Monte Carlo runs when the exact path is out of budget.
    pub mc_runs: u64,
    pub seed: u64,
}

impl Default for DpOptions {
    fn default() -> Self {
        Self {
            max_states: 1 << 34,
            exact_limit: 150,
            mc_runs: 100_000,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum Method {
    Exact,
    MonteCarlo { runs: u64, std_error: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DpResult {
    pub value: f64,
    /// Chain states visited (for sampled results, simulated steps).
    pub states: u64,
    pub elapsed_secs: f64,
    #[serde(flatten)]
    pub method: Method,
}

/// One row of the backward value table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValueRow {
    pub t: u64,
    pub c: u64,
    pub value: f64,
}

fn single_p(model: &CharacteristicModel) -> Result<f64> {
    match model.setting {
        Setting::Single { p } => Ok(p),
        Setting::TwoGroup { .. } => Err(Error::param("single-group evaluation requested for a two-group model")),
    }
}

fn single_state_count(horizon: u64) -> u64 {
    horizon.saturating_mul(horizon.saturating_add(1)) / 2
}

fn check_budget(states: u64, limit: u64) -> Result<()> {
    if states > limit {
        Err(Error::Resource {
            what: format!("dynamic program needs {states} states"),
            limit,
        })
    } else {
        Ok(())
    }
}

/// Probability of accepting at the step after state `(t, c)`.
#[inline]
fn step_probability(model: &CharacteristicModel, p: f64, t: u64, c: u64) -> f64 {
    if t == 0 {
        p
    } else {
        model.f(mean_of(c, t)).clamp(0.0, 1.0)
    }
}

/// Exact single-group value by forward propagation of probability mass.
pub fn dp_value(spec: &ChainSpec) -> Result<DpResult> {
    dp_value_with(spec, &DpOptions::default())
}

pub fn dp_value_with(spec: &ChainSpec, opts: &DpOptions) -> Result<DpResult> {
    let start = Instant::now();
    let p = single_p(&spec.model)?;
    let horizon = spec.horizon;
    check_budget(single_state_count(horizon), opts.max_states)?;
    let from = spec.window_start();
    let running = spec.target.running;
    let model = &spec.model;

    let n = horizon as usize;
    let mut mass = vec![0.0f64; n + 2];
    let mut next = vec![0.0f64; n + 2];
    mass[0] = 1.0;
    // inclusive range of possibly nonzero mass
    let (mut lo, mut hi) = (0usize, 0usize);
    let mut value = 0.0f64;
    let mut states = 0u64;

    for t in 0..horizon {
        for v in &mut next[lo..=hi + 1] {
            *v = 0.0;
        }
        for c in lo..=hi {
            let m = mass[c];
            if m == 0.0 {
                continue;
            }
            let q = step_probability(model, p, t, c as u64);
            next[c] += m * (1.0 - q);
            next[c + 1] += m * q;
        }
        states += (hi - lo + 1) as u64;
        let t1 = t + 1;
        let (mut nlo, mut nhi) = (lo, hi + 1);
        if t1 >= from {
            for c in nlo..=nhi {
                if next[c] != 0.0 && !running.contains(mean_of(c as u64, t1)) {
                    value += next[c];
                    if spec.measure == Measure::Probability {
                        next[c] = 0.0;
                    }
                }
            }
        }
        while nlo < nhi && next[nlo] == 0.0 {
            nlo += 1;
        }
        while nhi > nlo && next[nhi] == 0.0 {
            nhi -= 1;
        }
        std::mem::swap(&mut mass, &mut next);
        // clear the stale tail of the swapped-out buffer
        for v in &mut next[lo..=hi + 1] {
            *v = 0.0;
        }
        lo = nlo;
        hi = nhi;
        if spec.measure == Measure::Probability && mass[lo] == 0.0 && lo == hi {
            break;
        }
    }
    if spec.measure == Measure::Probability {
        value = value.min(1.0);
    }
    Ok(DpResult {
        value,
        states,
        elapsed_secs: start.elapsed().as_secs_f64(),
        method: Method::Exact,
    })
}

/// Backward recursion over the full chain. Returns the value at the root
/// and, when `keep_table` is set, every `(t, c, V)`.
pub fn dp_backward(spec: &ChainSpec, opts: &DpOptions, keep_table: bool) -> Result<(DpResult, Vec<ValueRow>)> {
    let start = Instant::now();
    let p = single_p(&spec.model)?;
    let horizon = spec.horizon;
    let total = single_state_count(horizon + 1);
    check_budget(total, opts.max_states)?;
    let from = spec.window_start();
    let running = spec.target.running;
    let violates = |t: u64, c: u64| t >= from && t >= 1 && !running.contains(mean_of(c, t));

    let mut table = Vec::new();
    let mut next: Vec<f64> = (0..=horizon)
        .map(|c| if violates(horizon, c) { 1.0 } else { 0.0 })
        .collect();
    if keep_table {
        table.extend(next.iter().enumerate().map(|(c, &v)| ValueRow {
            t: horizon,
            c: c as u64,
            value: v,
        }));
    }
    let mut layer_rows = Vec::new();
    for t in (0..horizon).rev() {
        let mut cur = vec![0.0; t as usize + 1];
        for c in 0..=t {
            let gamma = if violates(t, c) { 1.0 } else { 0.0 };
            let q = step_probability(&spec.model, p, t, c);
            let cont = q * next[c as usize + 1] + (1.0 - q) * next[c as usize];
            cur[c as usize] = match spec.measure {
                Measure::Expectation => gamma + cont,
                Measure::Probability => {
                    if gamma == 1.0 {
                        1.0
                    } else {
                        cont
                    }
                }
            };
        }
        if keep_table {
            layer_rows.clear();
            layer_rows.extend(cur.iter().enumerate().map(|(c, &v)| ValueRow {
                t,
                c: c as u64,
                value: v,
            }));
            table.extend_from_slice(&layer_rows);
        }
        next = cur;
    }
    if keep_table {
        table.sort_by_key(|r| (r.t, r.c));
    }
    Ok((
        DpResult {
            value: next[0],
            states: total,
            elapsed_secs: start.elapsed().as_secs_f64(),
            method: Method::Exact,
        },
        table,
    ))
}

/// Flat layout of the two-group states at one time step.
struct TwoGroupLayer {
    t: usize,
    offsets: Vec<usize>,
    len: usize,
}

impl TwoGroupLayer {
    fn new(t: usize) -> Self {
        let mut offsets = Vec::with_capacity(t + 2);
        let mut acc = 0usize;
        for n_a in 0..=t {
            offsets.push(acc);
            acc += (n_a + 1) * (t - n_a + 1);
        }
        Self { t, offsets, len: acc }
    }

    #[inline]
    fn index(&self, n_a: usize, s_a: usize, s_b: usize) -> usize {
        self.offsets[n_a] + s_a * (self.t - n_a + 1) + s_b
    }
}

fn two_group_state_count(horizon: u64) -> u64 {
    (0..=horizon)
        .map(|t| {
            let t = t as u128;
            // sum_{n=0}^{t} (n+1)(t-n+1)
            ((t + 1) * (t + 2) * (t + 3) / 6) as u64
        })
        .fold(0u64, |a, b| a.saturating_add(b))
}

/// Two-group value: exact when `T <= exact_limit` and within the state
/// budget, otherwise a seeded Monte Carlo estimate.
pub fn dp_value_two_group(
    model: &CharacteristicModel,
    target: &FairnessTarget,
    horizon: u64,
    measure: Measure,
    opts: &DpOptions,
) -> Result<DpResult> {
    let Setting::TwoGroup { .. } = model.setting else {
        return Err(Error::param("two-group evaluation requested for a single-group model"));
    };
    if model.domain() != target.domain {
        return Err(Error::param("model and target live on different domains"));
    }
    if horizon <= opts.exact_limit && two_group_state_count(horizon) <= opts.max_states {
        Ok(two_group_exact(model, target, horizon, measure))
    } else {
        monte_carlo_value(model, target, horizon, measure, opts.mc_runs, opts.seed)
    }
}

fn two_group_exact(model: &CharacteristicModel, target: &FairnessTarget, horizon: u64, measure: Measure) -> DpResult {
    let start = Instant::now();
    let Setting::TwoGroup { r_a, .. } = model.setting else {
        unreachable!()
    };
    let r_b = 1.0 - r_a;
    let from = target.burn_in.max(1);
    let mut layer = TwoGroupLayer::new(0);
    let mut mass = vec![1.0f64];
    let mut value = 0.0;
    let mut states = 0u64;
    for t in 0..horizon as usize {
        let nl = TwoGroupLayer::new(t + 1);
        let mut next = vec![0.0f64; nl.len];
        for n_a in 0..=t {
            let n_b = t - n_a;
            for s_a in 0..=n_a {
                for s_b in 0..=n_b {
                    let m = mass[layer.index(n_a, s_a, s_b)];
                    if m == 0.0 {
                        continue;
                    }
                    let (qa, qb) = match two_group_value(n_a as u64, s_a as u64, n_b as u64, s_b as u64) {
                        Some(mu) => (
                            model.accept_probability(Group::A, mu),
                            model.accept_probability(Group::B, mu),
                        ),
                        None => match model.setting {
                            Setting::TwoGroup { p_a, p_b, .. } => (p_a, p_b),
                            Setting::Single { .. } => unreachable!(),
                        },
                    };
                    let ma = m * r_a;
                    next[nl.index(n_a + 1, s_a + 1, s_b)] += ma * qa;
                    next[nl.index(n_a + 1, s_a, s_b)] += ma * (1.0 - qa);
                    let mb = m * r_b;
                    next[nl.index(n_a, s_a, s_b + 1)] += mb * qb;
                    next[nl.index(n_a, s_a, s_b)] += mb * (1.0 - qb);
                }
            }
        }
        states += layer.len as u64;
        let t1 = t + 1;
        if t1 as u64 >= from {
            for n_a in 1..t1 {
                let n_b = t1 - n_a;
                for s_a in 0..=n_a {
                    for s_b in 0..=n_b {
                        let i = nl.index(n_a, s_a, s_b);
                        if next[i] == 0.0 {
                            continue;
                        }
                        let mu = s_a as f64 / n_a as f64 - s_b as f64 / n_b as f64;
                        if !target.running.contains(mu) {
                            value += next[i];
                            if measure == Measure::Probability {
                                next[i] = 0.0;
                            }
                        }
                    }
                }
            }
        }
        layer = nl;
        mass = next;
    }
    states += layer.len as u64;
    if measure == Measure::Probability {
        value = value.min(1.0);
    }
    DpResult {
        value,
        states,
        elapsed_secs: start.elapsed().as_secs_f64(),
        method: Method::Exact,
    }
}

/// Seeded Monte Carlo estimate of a violation measure for either setting.
pub fn monte_carlo_value(
    model: &CharacteristicModel,
    target: &FairnessTarget,
    horizon: u64,
    measure: Measure,
    runs: u64,
    seed: u64,
) -> Result<DpResult> {
    if runs < 2 {
        return Err(Error::param("Monte Carlo needs at least two runs"));
    }
    let start = Instant::now();
    let from = target.burn_in.max(1);
    let (mut sum, mut sum_sq) = (0.0f64, 0.0f64);
    for run in 0..runs {
        let mut rng = stream_rng(seed, run, 0);
        let mut count = 0u64;
        match model.setting {
            Setting::Single { p } => {
                let mut ones = 0u64;
                for t in 0..horizon {
                    let q = step_probability(model, p, t, ones);
                    ones += u64::from(rng.gen::<f64>() < q);
                    let t1 = t + 1;
                    if t1 >= from && !target.running.contains(mean_of(ones, t1)) {
                        count += 1;
                        if measure == Measure::Probability {
                            break;
                        }
                    }
                }
            }
            Setting::TwoGroup { r_a, p_a, p_b } => {
                let (mut n_a, mut s_a, mut n_b, mut s_b) = (0u64, 0u64, 0u64, 0u64);
                for t in 0..horizon {
                    let g = if rng.gen::<f64>() < r_a { Group::A } else { Group::B };
                    let q = match two_group_value(n_a, s_a, n_b, s_b) {
                        Some(mu) => model.accept_probability(g, mu),
                        None => {
                            if g == Group::A {
                                p_a
                            } else {
                                p_b
                            }
                        }
                    };
                    let z = u64::from(rng.gen::<f64>() < q);
                    match g {
                        Group::A => {
                            n_a += 1;
                            s_a += z
                        }
                        Group::B => {
                            n_b += 1;
                            s_b += z
                        }
                    }
                    if t + 1 >= from {
                        if let Some(mu) = two_group_value(n_a, s_a, n_b, s_b) {
                            if !target.running.contains(mu) {
                                count += 1;
                                if measure == Measure::Probability {
                                    break;
                                }
                            }
                        }
                    }
                }
            }
        }
        let v = match measure {
            Measure::Expectation => count as f64,
            Measure::Probability => f64::from(count > 0),
        };
        sum += v;
        sum_sq += v * v;
    }
    let n = runs as f64;
    let mean = sum / n;
    let var = ((sum_sq - n * mean * mean) / (n - 1.0)).max(0.0);
    Ok(DpResult {
        value: mean,
        states: runs.saturating_mul(horizon),
        elapsed_secs: start.elapsed().as_secs_f64(),
        method: Method::MonteCarlo {
            runs,
            std_error: (var / n).sqrt(),
        },
    })
}

/// Largest horizons the enumeration oracle accepts.
pub const ENUM_LIMIT_SINGLE: u64 = 20;
pub const ENUM_LIMIT_TWO_GROUP: u64 = 12;

/// Exact value by summing over every decision path. Exponential in `T`;
/// used as an oracle.
pub fn enumerate_bruteforce(
    model: &CharacteristicModel,
    target: &FairnessTarget,
    horizon: u64,
    measure: Measure,
) -> Result<f64> {
    let from = target.burn_in.max(1);
    let mut acc = Enum {
        model,
        target,
        horizon,
        from,
        e: 0.0,
        p: 0.0,
    };
    match model.setting {
        Setting::Single { p } => {
            if horizon > ENUM_LIMIT_SINGLE {
                return Err(Error::Resource {
                    what: format!("enumeration over 2^{horizon} paths"),
                    limit: ENUM_LIMIT_SINGLE,
                });
            }
            acc.single(p, 0, 0, 1.0, 0);
        }
        Setting::TwoGroup { .. } => {
            if horizon > ENUM_LIMIT_TWO_GROUP {
                return Err(Error::Resource {
                    what: format!("enumeration over 4^{horizon} paths"),
                    limit: ENUM_LIMIT_TWO_GROUP,
                });
            }
            acc.two([0; 4], 0, 1.0, 0);
        }
    }
    Ok(match measure {
        Measure::Expectation => acc.e,
        Measure::Probability => acc.p,
    })
}

struct Enum<'a> {
    model: &'a CharacteristicModel,
    target: &'a FairnessTarget,
    horizon: u64,
    from: u64,
    e: f64,
    p: f64,
}

impl Enum<'_> {
    /// Probability that the released decision is 1, read off the shield
    /// rule: below the pivot a raw 0 is flipped, above it a raw 1.
    fn release_one(&self, raw_one: f64, mu: Option<f64>, favour_one: impl Fn(bool) -> bool) -> f64 {
        let Some(mu) = mu else { return raw_one };
        let zeta = self.model.zeta.value(mu);
        let low = mu <= self.model.pivot();
        if favour_one(low) {
            raw_one + (1.0 - raw_one) * zeta
        } else {
            raw_one * (1.0 - zeta)
        }
    }

    fn single(&mut self, p: f64, t: u64, ones: u64, prob: f64, violations: u64) {
        if prob == 0.0 {
            return;
        }
        if t == self.horizon {
            self.e += prob * violations as f64;
            self.p += prob * f64::from(violations > 0);
            return;
        }
        let mu = (t > 0).then(|| ones as f64 / t as f64);
        let q = self.release_one(p, mu, |low| low);
        for (z, pz) in [(1u64, q), (0u64, 1.0 - q)] {
            let ones2 = ones + z;
            let t2 = t + 1;
            let bad = t2 >= self.from && !self.target.running.contains(ones2 as f64 / t2 as f64);
            self.single(p, t2, ones2, prob * pz, violations + u64::from(bad));
        }
    }

    fn two(&mut self, counts: [u64; 4], t: u64, prob: f64, violations: u64) {
        if prob == 0.0 {
            return;
        }
        if t == self.horizon {
            self.e += prob * violations as f64;
            self.p += prob * f64::from(violations > 0);
            return;
        }
        let Setting::TwoGroup { r_a, p_a, p_b } = self.model.setting else {
            unreachable!()
        };
        let [n_a, s_a, n_b, s_b] = counts;
        let mu = (n_a > 0 && n_b > 0).then(|| s_a as f64 / n_a as f64 - s_b as f64 / n_b as f64);
        for (g, pg, raw) in [(Group::A, r_a, p_a), (Group::B, 1.0 - r_a, p_b)] {
            let q = self.release_one(raw, mu, |low| low == (g == Group::A));
            for (z, pz) in [(1u64, q), (0u64, 1.0 - q)] {
                let mut c = counts;
                match g {
                    Group::A => {
                        c[0] += 1;
                        c[1] += z
                    }
                    Group::B => {
                        c[2] += 1;
                        c[3] += z
                    }
                }
                let t2 = t + 1;
                let bad = t2 >= self.from
                    && c[0] > 0
                    && c[2] > 0
                    && !self
                        .target
                        .running
                        .contains(c[1] as f64 / c[0] as f64 - c[3] as f64 / c[2] as f64);
                self.two(c, t2, prob * pg * pz, violations + u64::from(bad));
            }
        }
    }
}

/// Writes the backward value table as CSV with header `t,c,V`.
pub fn write_value_table<W: std::io::Write>(rows: &[ValueRow], mut out: W) -> std::io::Result<()> {
    writeln!(out, "t,c,V")?;
    for r in rows {
        writeln!(out, "{},{},{}", r.t, r.c, crate::format::fmt_g12(r.value))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::energy::EnergyFunction;
    use crate::fairness::{Domain, Interval};

    fn single(p: f64, zeta: EnergyFunction, burn_in: u64, s: (f64, f64), t: u64, m: Measure) -> ChainSpec {
        let mid = 0.5 * (s.0 + s.1);
        let target = FairnessTarget::unit(burn_in, s, (mid, mid)).unwrap();
        ChainSpec::new(CharacteristicModel::single(p, zeta).unwrap(), target, t, m).unwrap()
    }

    fn idle() -> EnergyFunction {
        EnergyFunction::idle(Domain::Unit)
    }

    #[test]
    fn trivial_and_small_examples() {
        for m in [Measure::Expectation, Measure::Probability] {
            let s = single(0.5, idle(), 1, (0.0, 1.0), 10, m);
            assert_eq!(dp_value(&s).unwrap().value, 0.0);
        }
        let e = single(0.5, idle(), 1, (0.4, 0.6), 2, Measure::Expectation);
        assert!((dp_value(&e).unwrap().value - 1.5).abs() < 1e-15);
        let p = single(0.5, idle(), 1, (0.4, 0.6), 2, Measure::Probability);
        assert!((dp_value(&p).unwrap().value - 1.0).abs() < 1e-15);
        let e0 = single(0.5, idle(), 1, (0.4, 0.6), 0, Measure::Expectation);
        assert_eq!(dp_value(&e0).unwrap().value, 0.0);
    }

    #[test]
    fn forward_matches_backward_and_enumeration() {
        let zetas = [
            idle(),
            EnergyFunction::polynomial(0.5, 4.0, 2.0, Domain::Unit).unwrap(),
            EnergyFunction::naive(Interval::new(0.4, 0.6).unwrap(), Domain::Unit).unwrap(),
            EnergyFunction::calibrated_exponential(0.65, 0.5, 0.4, Domain::Unit).unwrap(),
        ];
        for z in zetas {
            for m in [Measure::Expectation, Measure::Probability] {
                for tau in [1, 3, 7] {
                    let s = single(0.65, z, tau, (0.4, 0.6), 14, m);
                    let f = dp_value(&s).unwrap().value;
                    let (b, _) = dp_backward(&s, &DpOptions::default(), false).unwrap();
                    let o = enumerate_bruteforce(&s.model, &s.target, 14, m).unwrap();
                    assert!((f - b.value).abs() < 1e-12, "{f} {}", b.value);
                    assert!((f - o).abs() < 1e-12, "{f} {o}");
                }
            }
        }
    }

    #[test]
    fn budget_is_enforced() {
        let s = single(0.5, idle(), 1, (0.4, 0.6), 1000, Measure::Probability);
        let opts = DpOptions {
            max_states: 1000,
            ..DpOptions::default()
        };
        match dp_value_with(&s, &opts) {
            Err(Error::Resource { limit, .. }) => assert_eq!(limit, 1000),
            other => panic!("{other:?}"),
        }
        let m = CharacteristicModel::single(0.5, idle()).unwrap();
        assert!(matches!(
            enumerate_bruteforce(&m, &s.target, 21, Measure::Expectation),
            Err(Error::Resource { .. })
        ));
    }

    #[test]
    fn value_table_rows() {
        let s = single(0.5, idle(), 1, (0.4, 0.6), 2, Measure::Expectation);
        let (r, rows) = dp_backward(&s, &DpOptions::default(), true).unwrap();
        assert_eq!(rows.len(), 6);
        assert_eq!(rows[0], ValueRow { t: 0, c: 0, value: r.value });
        let mut buf = Vec::new();
        write_value_table(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("t,c,V\n0,0,1.5\n"));
    }

    #[test]
    fn two_group_examples() {
        let target = FairnessTarget::signed(1, (-1.0, 1.0), (0.0, 0.0)).unwrap();
        let sym = CharacteristicModel::two_group(0.4, 0.6, 0.6, EnergyFunction::idle(Domain::Signed)).unwrap();
        let r = dp_value_two_group(&sym, &target, 8, Measure::Probability, &DpOptions::default()).unwrap();
        assert_eq!(r.value, 0.0);
        assert_eq!(r.method, Method::Exact);

        // p_A = 1 and p_B = 0 pinned to the open interval edges
        let eps = 1e-12;
        let m = CharacteristicModel::two_group(0.5, 1.0 - eps, eps, EnergyFunction::idle(Domain::Signed)).unwrap();
        let target = FairnessTarget::signed(2, (-0.5, 0.5), (0.0, 0.0)).unwrap();
        let v = dp_value_two_group(&m, &target, 2, Measure::Probability, &DpOptions::default())
            .unwrap()
            .value;
        // one of each group at t = 2 happens with probability 1/2 and then M = 1
        assert!((v - 0.5).abs() < 1e-9);
        let o = enumerate_bruteforce(&m, &target, 2, Measure::Probability).unwrap();
        assert!((v - o).abs() < 1e-12);
        let zero = dp_value_two_group(&m, &target, 0, Measure::Expectation, &DpOptions::default()).unwrap();
        assert_eq!(zero.value, 0.0);
    }

    #[test]
    fn two_group_matches_enumeration() {
        let z = EnergyFunction::calibrated_exponential(0.3, 0.1, -0.1, Domain::Signed).unwrap();
        let m = CharacteristicModel::two_group(0.6, 0.7, 0.4, z).unwrap();
        let target = FairnessTarget::signed(3, (-0.2, 0.4), (0.0, 0.2)).unwrap();
        for measure in [Measure::Expectation, Measure::Probability] {
            let d = dp_value_two_group(&m, &target, 8, measure, &DpOptions::default())
                .unwrap()
                .value;
            let o = enumerate_bruteforce(&m, &target, 8, measure).unwrap();
            assert!((d - o).abs() < 1e-12, "{d} {o}");
        }
    }

    #[test]
    fn two_group_falls_back_to_sampling() {
        let z = EnergyFunction::calibrated_exponential(0.3, 0.1, -0.1, Domain::Signed).unwrap();
        let m = CharacteristicModel::two_group(0.6, 0.7, 0.4, z).unwrap();
        let target = FairnessTarget::signed(3, (-0.2, 0.4), (0.0, 0.2)).unwrap();
        let opts = DpOptions {
            exact_limit: 10,
            mc_runs: 20_000,
            seed: 5,
            ..DpOptions::default()
        };
        let exact = dp_value_two_group(&m, &target, 10, Measure::Expectation, &opts).unwrap();
        let opts = DpOptions { exact_limit: 9, ..opts };
        let mc = dp_value_two_group(&m, &target, 10, Measure::Expectation, &opts).unwrap();
        let Method::MonteCarlo { std_error, runs } = mc.method else {
            panic!("expected sampling")
        };
        assert_eq!(runs, 20_000);
        assert!((mc.value - exact.value).abs() < 4.0 * std_error);
    }

    #[test]
    fn naive_energy_against_sampling() {
        let z = EnergyFunction::naive(Interval::new(0.4, 0.6).unwrap(), Domain::Unit).unwrap();
        let s = single(0.5, z, 40, (0.4, 0.6), 200, Measure::Probability);
        let d = dp_value(&s).unwrap().value;
        let mc = monte_carlo_value(&s.model, &s.target, 200, Measure::Probability, 40_000, 11).unwrap();
        let Method::MonteCarlo { std_error, .. } = mc.method else {
            unreachable!()
        };
        assert!((d - mc.value).abs() <= 3.0 * std_error.max(1e-4), "{d} {}", mc.value);
    }
}
