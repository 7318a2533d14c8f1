//! Search for the least invasive member of a monotone energy family that
//! keeps a violation measure within budget.
//!
//! The violation measure of a candidate is estimated by an exact dynamic
//! program on the prefix `[tau, T_DP]` plus the closed-form geometric tail
//! beyond `T_DP`. Since steeper members never violate more, the valid
//! indices form an upper interval and a bisection finds its left end.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{two_group_tau, CharacteristicModel, Setting, TailBoundParams, TAIL_K};
use crate::energy::{EnergyFunction, MonotonicFamily};
use crate::error::{Error, Result};
use crate::exactdp::{dp_value_two_group, dp_value_with, ChainSpec, DpOptions, Measure, Method};
use crate::fairness::{burn_in_tau_s, FairnessTarget};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SynthesisOptions {
    /// The search stops once the bracket is narrower than this.
    pub index_tol: f64,
    /// Searched index range `[lo, hi]` inside `(0, 1)`.
    pub index_lo: f64,
    pub index_hi: f64,
    /// Number of evenly spaced indices checked for monotonicity up front.
    pub probe_points: usize,
    /// Largest admissible `T_DP`.
    pub t_dp_cap: u64,
    pub dp: DpOptions,
}

impl Default for SynthesisOptions {
    fn default() -> Self {
        Self {
            index_tol: 1e-6,
            index_lo: 1e-6,
            index_hi: 1.0 - 1e-6,
            probe_points: 20,
            t_dp_cap: 1_000_000,
            dp: DpOptions::default(),
        }
    }
}

/// A synthesis problem. The family is built from the setting's bias and the
/// target's running and limit sets.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthesisInstance {
    pub measure: Measure,
    pub setting: Setting,
    pub target: FairnessTarget,
    /// Violation budget.
    pub delta: f64,
    /// Precision of the search and of the tail split.
    pub epsilon: f64,
    /// Failure probability of the group-count event; two groups only,
    /// defaults to `epsilon / 2`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
    #[serde(default)]
    pub options: SynthesisOptions,
}

impl SynthesisInstance {
    pub fn new(measure: Measure, setting: Setting, target: FairnessTarget, delta: f64, epsilon: f64) -> Result<Self> {
        let inst = Self {
            measure,
            setting,
            target,
            delta,
            epsilon,
            eta: None,
            options: SynthesisOptions::default(),
        };
        inst.validate()?;
        Ok(inst)
    }

    pub fn validate(&self) -> Result<()> {
        self.setting.validate()?;
        if self.setting.domain() != self.target.domain {
            return Err(Error::param("setting and target live on different domains"));
        }
        if !(self.delta > 0.0) {
            return Err(Error::param(format!("budget delta = {} must be positive", self.delta)));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::param(format!("epsilon = {} must lie in (0, 1)", self.epsilon)));
        }
        let o = &self.options;
        if !(o.index_lo > 0.0 && o.index_lo < o.index_hi && o.index_hi < 1.0) {
            return Err(Error::param("index range must satisfy 0 < lo < hi < 1"));
        }
        if !(o.index_tol > 0.0) || o.probe_points < 2 {
            return Err(Error::param("index tolerance must be positive and at least two probes are needed"));
        }
        if let Some(eta) = self.eta {
            if self.setting.r_min().is_none() {
                return Err(Error::param("eta applies to two-group instances only"));
            }
            if !(eta > 0.0 && eta < self.epsilon) {
                return Err(Error::param("eta must lie in (0, epsilon)"));
            }
        }
        self.family()?;
        Ok(())
    }

    pub fn family(&self) -> Result<MonotonicFamily> {
        MonotonicFamily::new(self.setting.bias(), self.target.running, self.target.limit, self.target.domain)
    }

    pub fn member(&self, r: f64) -> Result<EnergyFunction> {
        EnergyFunction::monotonic(r, self.family()?)
    }

    fn model(&self, zeta: EnergyFunction) -> Result<CharacteristicModel> {
        CharacteristicModel::new(self.setting, zeta)
    }

    /// Group-count failure probability (two groups).
    pub fn eta(&self) -> Option<f64> {
        self.setting.r_min().map(|_| self.eta.unwrap_or(0.5 * self.epsilon))
    }

    /// Tail share of the precision budget.
    fn tail_budget(&self) -> f64 {
        self.epsilon - self.eta().unwrap_or(0.0)
    }

    /// Tail parameters around `mu_star` (with `eta` for two groups).
    fn tail_params(&self, mu_star: f64) -> Result<TailBoundParams> {
        let (l, u) = (self.target.lower(), self.target.upper());
        match (self.setting.r_min(), self.eta()) {
            (Some(r_min), Some(eta)) => {
                TailBoundParams::from_parts(r_min / 32.0, two_group_tau(eta, r_min)?, l, u, mu_star, Some(eta))
            }
            _ => TailBoundParams::from_parts(TAIL_K, burn_in_tau_s(&self.target, mu_star)?, l, u, mu_star, None),
        }
    }
}

/// Smallest horizon from the burn-in on whose geometric tail, computed at
/// the fixpoint of the steepest member, fits the precision budget.
pub fn choose_t_dp(inst: &SynthesisInstance) -> Result<u64> {
    let steepest = inst.model(inst.member(inst.options.index_hi)?)?;
    let mu_star = steepest.fixpoint();
    let params = inst.tail_params(mu_star)?;
    let budget = inst.tail_budget();
    // the geometric tail without the group-count term
    let bound = |t: u64| -> Result<f64> { Ok(params.tail_sum(t)? - params.eta.unwrap_or(0.0)) };
    let lo = params.tau.max(inst.target.burn_in);
    if bound(lo)? <= budget {
        return Ok(lo);
    }
    let cap = inst.options.t_dp_cap.max(lo);
    let at_cap = bound(cap)?;
    if at_cap > budget {
        return Err(Error::Resource {
            what: format!("tail bound stays at {at_cap} > {budget}"),
            limit: cap,
        });
    }
    let (mut bad, mut good) = (lo, cap);
    while good - bad > 1 {
        let mid = bad + (good - bad) / 2;
        if bound(mid)? <= budget {
            good = mid;
        } else {
            bad = mid;
        }
    }
    Ok(good)
}

/// Split of a condition value into its parts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConditionValue {
    pub value: f64,
    pub prefix: f64,
    pub tail: f64,
    /// Standard error added by a sampled prefix (two groups past the exact limit).
    pub std_error: f64,
}

/// Violation estimate of `zeta`: exact prefix over `[tau, t_dp]` plus the
/// geometric tail from `t_dp + 1` at the candidate's own fixpoint. When the
/// tail bound does not apply the tail is taken as 1 for the probability
/// measure and infinite for the expectation.
pub fn condition(zeta: &EnergyFunction, t_dp: u64, inst: &SynthesisInstance) -> Result<ConditionValue> {
    let model = inst.model(*zeta)?;
    let (prefix, std_error) = match inst.setting {
        Setting::Single { .. } => {
            let spec = ChainSpec::new(model, inst.target, t_dp, inst.measure)?;
            (dp_value_with(&spec, &inst.options.dp)?.value, 0.0)
        }
        Setting::TwoGroup { .. } => {
            let r = dp_value_two_group(&model, &inst.target, t_dp, inst.measure, &inst.options.dp)?;
            match r.method {
                Method::Exact => (r.value, 0.0),
                Method::MonteCarlo { std_error, .. } => (r.value + std_error, std_error),
            }
        }
    };
    let vacuous = match inst.measure {
        Measure::Probability => 1.0,
        Measure::Expectation => f64::INFINITY,
    };
    let tail = match inst.tail_params(model.fixpoint()) {
        Ok(params) if t_dp + 1 >= params.tau => params.tail_sum(t_dp + 1)?,
        Ok(_) | Err(Error::Precondition(_)) => vacuous,
        Err(e) => return Err(e),
    };
    let value = match inst.measure {
        Measure::Probability => (prefix + tail).min(1.0),
        Measure::Expectation => prefix + tail,
    };
    Ok(ConditionValue {
        value,
        prefix,
        tail,
        std_error,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Found,
    Fail,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SynthesisOutcome {
    pub status: Status,
    /// Index of the returned member (the steepest one on failure).
    pub index: f64,
    pub zeta: EnergyFunction,
    pub condition: f64,
    pub t_dp: u64,
    /// Condition evaluations of the bisection (probes excluded).
    pub iterations: u64,
}

impl SynthesisOutcome {
    pub fn is_found(&self) -> bool {
        self.status == Status::Found
    }
}

pub fn synthesize(inst: &SynthesisInstance) -> Result<SynthesisOutcome> {
    inst.validate()?;
    let t_dp = choose_t_dp(inst)?;
    let opts = &inst.options;
    let eval = |r: f64| -> Result<f64> { Ok(condition(&inst.member(r)?, t_dp, inst)?.value) };

    let n = opts.probe_points;
    let grid: Vec<f64> = (0..n)
        .map(|i| opts.index_lo + (opts.index_hi - opts.index_lo) * i as f64 / (n - 1) as f64)
        .collect();
    let probes: Vec<f64> = grid.par_iter().map(|&r| eval(r)).collect::<Result<_>>()?;
    check_monotone(&grid, &probes)?;

    let outcome = |status, r: f64, d: f64, iterations| -> Result<SynthesisOutcome> {
        let zeta = inst.member(r)?;
        if status == Status::Found {
            check_limit(inst, &zeta)?;
        }
        Ok(SynthesisOutcome {
            status,
            index: r,
            zeta,
            condition: d,
            t_dp,
            iterations,
        })
    };

    let (d_hi, d_lo) = (probes[n - 1], probes[0]);
    if d_hi > inst.delta {
        return outcome(Status::Fail, opts.index_hi, d_hi, 0);
    }
    if d_lo <= inst.delta {
        return outcome(Status::Found, opts.index_lo, d_lo, 0);
    }
    // last invalid probe and the valid one after it
    let k = probes.iter().rposition(|&d| d > inst.delta).expect("first probe is invalid");
    let (mut l, mut u, mut d_u) = (grid[k], grid[k + 1], probes[k + 1]);
    let mut iterations = 0u64;
    while u - l >= opts.index_tol {
        let m = 0.5 * (l + u);
        let d = eval(m)?;
        iterations += 1;
        if (d - inst.delta).abs() < inst.epsilon {
            return outcome(Status::Found, m, d, iterations);
        }
        if d <= inst.delta {
            u = m;
            d_u = d;
        } else {
            l = m;
        }
    }
    outcome(Status::Found, u, d_u, iterations)
}

fn check_monotone(grid: &[f64], values: &[f64]) -> Result<()> {
    for i in 1..values.len() {
        let (a, b) = (values[i - 1], values[i]);
        let slack = 1e-9 * a.abs().max(1.0);
        if b > a + slack {
            return Err(Error::precondition(format!(
                "condition increases along the family: {a} at r = {} but {b} at r = {}",
                grid[i - 1],
                grid[i]
            )));
        }
    }
    Ok(())
}

/// The returned member must settle inside the limit set.
fn check_limit(inst: &SynthesisInstance, zeta: &EnergyFunction) -> Result<()> {
    let mu = inst.model(*zeta)?.fixpoint();
    let lim = inst.target.limit;
    if mu < lim.lo - 1e-9 || mu > lim.hi + 1e-9 {
        return Err(Error::precondition(format!(
            "fixpoint {mu} of the synthesized shield lies outside the limit set [{}, {}]",
            lim.lo, lim.hi
        )));
    }
    Ok(())
}
