//! Closed-form analysis of the shielded process: characteristic function,
//! expected cost, fixpoint, limit cost, tail bounds and burn-in times.

use serde::{Deserialize, Serialize};

use crate::energy::EnergyFunction;
use crate::error::{Error, Result};
use crate::fairness::{burn_in_tau_s, ceil_tolerant, Domain, FairnessTarget, Group};

/// Single-group tail constant. The general form is `4^beta / 32` with
/// `beta = sup f'`, which is 0 for every valid shield.
pub const TAIL_K: f64 = 1.0 / 32.0;
pub const SUP_SLOPE_BETA: f64 = 0.0;

/// Parameters of the environment that produces raw decisions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Setting {
    /// One stream, acceptance probability `p`.
    Single { p: f64 },
    /// Group `A` arrives with probability `r_a`; groups accept with `p_a`, `p_b`.
    TwoGroup { r_a: f64, p_a: f64, p_b: f64 },
}

impl Setting {
    pub fn validate(&self) -> Result<()> {
        let open = |v: f64, name: &str| {
            if v > 0.0 && v < 1.0 {
                Ok(())
            } else {
                Err(Error::param(format!("{name} = {v} must lie in (0, 1)")))
            }
        };
        match *self {
            Setting::Single { p } => open(p, "p"),
            Setting::TwoGroup { r_a, p_a, p_b } => {
                open(r_a, "r_a")?;
                open(p_a, "p_a")?;
                open(p_b, "p_b")
            }
        }
    }

    pub fn domain(&self) -> Domain {
        match self {
            Setting::Single { .. } => Domain::Unit,
            Setting::TwoGroup { .. } => Domain::Signed,
        }
    }

    /// `p`, or the disparity `d = p_A - p_B`.
    pub fn bias(&self) -> f64 {
        match *self {
            Setting::Single { p } => p,
            Setting::TwoGroup { p_a, p_b, .. } => p_a - p_b,
        }
    }

    /// Coefficients of the energy term below / above the pivot.
    pub fn coefficients(&self) -> (f64, f64) {
        match *self {
            Setting::Single { p } => (1.0 - p, p),
            Setting::TwoGroup { p_a, p_b, .. } => {
                let d = p_a - p_b;
                (1.0 - d, 1.0 + d)
            }
        }
    }

    pub fn r_min(&self) -> Option<f64> {
        match *self {
            Setting::Single { .. } => None,
            Setting::TwoGroup { r_a, .. } => Some(r_a.min(1.0 - r_a)),
        }
    }
}

/// A setting paired with the energy function of the shield.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CharacteristicModel {
    pub setting: Setting,
    pub zeta: EnergyFunction,
}

impl CharacteristicModel {
    pub fn new(setting: Setting, zeta: EnergyFunction) -> Result<Self> {
        setting.validate()?;
        if zeta.domain() != setting.domain() {
            return Err(Error::param(format!(
                "energy domain {:?} does not match the setting's domain {:?}",
                zeta.domain(),
                setting.domain()
            )));
        }
        Ok(Self { setting, zeta })
    }

    pub fn single(p: f64, zeta: EnergyFunction) -> Result<Self> {
        Self::new(Setting::Single { p }, zeta)
    }

    pub fn two_group(r_a: f64, p_a: f64, p_b: f64, zeta: EnergyFunction) -> Result<Self> {
        Self::new(Setting::TwoGroup { r_a, p_a, p_b }, zeta)
    }

    pub fn domain(&self) -> Domain {
        self.setting.domain()
    }

    pub fn pivot(&self) -> f64 {
        self.zeta.decision_pivot()
    }

    /// Next-step acceptance bias (single group) or drift target of the
    /// disparity (two groups) at fairness value `mu`.
    #[inline]
    pub fn f(&self, mu: f64) -> f64 {
        let z = self.zeta.value(mu);
        let d = self.setting.bias();
        let (below, above) = self.setting.coefficients();
        if mu <= self.pivot() {
            d + below * z
        } else {
            d - above * z
        }
    }

    /// Probability that a group-`g` arrival is released as 1 when the
    /// current disparity is `mu`. For the single setting `g` is ignored and
    /// the result equals [`Self::f`].
    #[inline]
    pub fn accept_probability(&self, g: Group, mu: f64) -> f64 {
        let z = self.zeta.value(mu);
        let low = mu <= self.pivot();
        match self.setting {
            Setting::Single { p } => {
                if low {
                    p + (1.0 - p) * z
                } else {
                    p * (1.0 - z)
                }
            }
            Setting::TwoGroup { p_a, p_b, .. } => {
                // below the pivot the shield favours accepting A and rejecting B
                let favour_accept = low == (g == Group::A);
                let pg = if g == Group::A { p_a } else { p_b };
                if favour_accept {
                    pg + (1.0 - pg) * z
                } else {
                    pg * (1.0 - z)
                }
            }
        }
    }

    /// Expected intervention probability at fairness value `mu`.
    pub fn h(&self, mu: f64) -> f64 {
        let z = self.zeta.value(mu);
        let low = mu <= self.pivot();
        match self.setting {
            Setting::Single { p } => {
                if low {
                    (1.0 - p) * z
                } else {
                    p * z
                }
            }
            Setting::TwoGroup { r_a, p_a, p_b } => {
                let r_b = 1.0 - r_a;
                if low {
                    (r_a * (1.0 - p_a) + r_b * p_b) * z
                } else {
                    (r_a * p_a + r_b * (1.0 - p_b)) * z
                }
            }
        }
    }

    /// Unique fixpoint of `f`, found by bisection on the non-increasing
    /// `g(mu) = f(mu) - mu` between the bias and the pivot.
    pub fn fixpoint(&self) -> f64 {
        let bias = self.setting.bias();
        let Some(kappa) = self.zeta.pivot() else {
            return bias;
        };
        let dom = self.domain();
        let mut lo = (bias.min(kappa) - 1e-9).max(dom.lo());
        let mut hi = (bias.max(kappa) + 1e-9).min(dom.hi());
        let g = |x: f64| self.f(x) - x;
        if g(lo) <= 0.0 {
            return lo;
        }
        if g(hi) >= 0.0 {
            return hi;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if g(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        if g(lo).abs() <= g(hi).abs() {
            lo
        } else {
            hi
        }
    }

    /// Long-run intervention rate `h(mu*)`.
    pub fn limit_cost(&self) -> f64 {
        self.h(self.fixpoint())
    }
}

pub fn characteristic_f(model: &CharacteristicModel, mu: f64) -> f64 {
    model.f(mu)
}

pub fn expected_cost_h(model: &CharacteristicModel, mu: f64) -> f64 {
    model.h(mu)
}

pub fn find_fixpoint(model: &CharacteristicModel) -> f64 {
    model.fixpoint()
}

pub fn limit_cost(model: &CharacteristicModel) -> f64 {
    model.limit_cost()
}

/// `ceil((8 / r_min) ln(4 / eta))`: from this time on both groups have
/// received at least half their expected share with probability `1 - eta`.
pub fn two_group_tau(eta: f64, r_min: f64) -> Result<u64> {
    if !(eta > 0.0 && eta < 1.0) {
        return Err(Error::param(format!("eta = {eta} must lie in (0, 1)")));
    }
    if !(r_min > 0.0 && r_min < 1.0) {
        return Err(Error::param(format!("r_min = {r_min} must lie in (0, 1)")));
    }
    Ok(ceil_tolerant(8.0 / r_min * (4.0 / eta).ln()))
}

/// Constants of the exponential tail bound around a fixpoint.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailBoundParams {
    pub k: f64,
    /// First time at which the bound holds.
    pub tau: u64,
    pub gap_lower: f64,
    pub gap_upper: f64,
    pub rate_lower: f64,
    pub rate_upper: f64,
    /// Additive failure probability of the group-count event (two groups).
    pub eta: Option<f64>,
}

/// A bound value clamped to `[0, 1]`; `vacuous` marks clamping.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundValue {
    pub value: f64,
    pub vacuous: bool,
}

impl TailBoundParams {
    /// Builds the parameters from raw pieces; `mu_star` must be strictly
    /// inside `[lower, upper]`.
    pub fn from_parts(k: f64, tau: u64, lower: f64, upper: f64, mu_star: f64, eta: Option<f64>) -> Result<Self> {
        if !(mu_star > lower && mu_star < upper) {
            return Err(Error::precondition(format!(
                "tail bounds inapplicable: mu* = {mu_star} is not strictly inside [{lower}, {upper}]"
            )));
        }
        if !(k > 0.0) {
            return Err(Error::param("tail constant must be positive"));
        }
        let gap_lower = mu_star - lower;
        let gap_upper = upper - mu_star;
        Ok(Self {
            k,
            tau,
            gap_lower,
            gap_upper,
            rate_lower: (-k * gap_lower * gap_lower).exp(),
            rate_upper: (-k * gap_upper * gap_upper).exp(),
            eta,
        })
    }

    /// Single-group parameters. Requires the pivot (if any) and `p` inside
    /// the running interval and `mu_star` strictly inside it.
    pub fn single_group(target: &FairnessTarget, model: &CharacteristicModel) -> Result<Self> {
        let Setting::Single { p } = model.setting else {
            return Err(Error::param("single-group bound requested for a two-group model"));
        };
        check_in_target(target, p, model.zeta.pivot())?;
        let mu_star = model.fixpoint();
        let tau = burn_in_tau_s(target, mu_star)?;
        Self::from_parts(TAIL_K, tau, target.lower(), target.upper(), mu_star, None)
    }

    /// Two-group parameters with caller-chosen `eta`.
    pub fn two_group(target: &FairnessTarget, model: &CharacteristicModel, eta: f64) -> Result<Self> {
        let Some(r_min) = model.setting.r_min() else {
            return Err(Error::param("two-group bound requested for a single-group model"));
        };
        check_in_target(target, model.setting.bias(), model.zeta.pivot())?;
        let mu_star = model.fixpoint();
        let tau = two_group_tau(eta, r_min)?;
        Self::from_parts(r_min / 32.0, tau, target.lower(), target.upper(), mu_star, Some(eta))
    }

    fn require(&self, t: u64) -> Result<()> {
        if t < self.tau {
            Err(Error::precondition(format!("below burn-in: t = {t} < {}", self.tau)))
        } else {
            Ok(())
        }
    }

    fn eta_term(&self) -> f64 {
        self.eta.unwrap_or(0.0)
    }

    /// Bound on `P[M_t outside S]`.
    pub fn tail_bound(&self, t: u64) -> Result<BoundValue> {
        self.require(t)?;
        let tf = t as f64;
        let raw = self.eta_term()
            + (-self.k * tf * self.gap_lower * self.gap_lower).exp()
            + (-self.k * tf * self.gap_upper * self.gap_upper).exp();
        Ok(BoundValue {
            value: raw.min(1.0),
            vacuous: raw >= 1.0,
        })
    }

    /// Geometric tail `sum_{t >= from} (r_L^t + r_U^t)`, a bound on the
    /// expected number of violations from `from` on and hence on their
    /// probability. Not clamped.
    pub fn tail_sum(&self, from: u64) -> Result<f64> {
        self.require(from)?;
        let f = from as f64;
        Ok(self.eta_term()
            + self.rate_lower.powf(f) / (1.0 - self.rate_lower)
            + self.rate_upper.powf(f) / (1.0 - self.rate_upper))
    }

    /// `sum_{t = from}^{to} (r_L^t + r_U^t)`.
    pub fn window_sum(&self, from: u64, to: u64) -> Result<f64> {
        self.require(from)?;
        if to < from {
            return Ok(0.0);
        }
        let n = (to - from + 1) as f64;
        let part = |r: f64| r.powf(from as f64) * (1.0 - r.powf(n)) / (1.0 - r);
        Ok(self.eta_term() + part(self.rate_lower) + part(self.rate_upper))
    }
}

fn check_in_target(target: &FairnessTarget, bias: f64, pivot: Option<f64>) -> Result<()> {
    if !target.running.contains(bias) {
        return Err(Error::precondition(format!(
            "tail bounds inapplicable: bias {bias} outside the running interval"
        )));
    }
    if let Some(k) = pivot {
        if !target.running.contains(k) {
            return Err(Error::precondition(format!(
                "tail bounds inapplicable: pivot {k} outside the running interval"
            )));
        }
    }
    Ok(())
}

pub fn tail_bound(t: u64, params: &TailBoundParams) -> Result<BoundValue> {
    params.tail_bound(t)
}

pub fn tail_sum(from: u64, params: &TailBoundParams) -> Result<f64> {
    params.tail_sum(from)
}

/// Band that a shield keeps the process in under an arbitrary drifting
/// acceptance probability. `None` on a side means no crossing exists there.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriftBand {
    pub lower: Option<f64>,
    pub upper: Option<f64>,
}

/// Solves `zeta(L) = L` left of the pivot and `zeta(R) = 1 - R` right of it.
pub fn drift_containment(zeta: &EnergyFunction) -> Result<DriftBand> {
    if zeta.domain() != Domain::Unit {
        return Err(Error::param("drift containment is defined on the unit domain"));
    }
    let Some(kappa) = zeta.pivot() else {
        return Ok(DriftBand { lower: None, upper: None });
    };
    if !(kappa > 0.0 && kappa < 1.0) {
        return Err(Error::param(format!("pivot {kappa} must lie in (0, 1)")));
    }
    // both functions are monotone on their side of the pivot
    let lower = bisect_root(|x| zeta.value(x) - x, 0.0, kappa, true);
    let upper = bisect_root(|x| zeta.value(x) - (1.0 - x), kappa, 1.0, false);
    Ok(DriftBand { lower, upper })
}

/// Root of a monotone function on `[a, b]`; `decreasing` gives its direction.
/// Requires a strict sign change across the bracket.
fn bisect_root(g: impl Fn(f64) -> f64, mut a: f64, mut b: f64, decreasing: bool) -> Option<f64> {
    let (ga, gb) = (g(a), g(b));
    let ok = if decreasing { ga > 0.0 && gb < 0.0 } else { ga < 0.0 && gb > 0.0 };
    if !ok {
        return None;
    }
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b || b - a < 1e-13 {
            break;
        }
        let gm = g(m);
        if (gm > 0.0) == decreasing {
            a = m;
        } else {
            b = m;
        }
    }
    Some(0.5 * (a + b))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundRow {
    pub t: u64,
    pub p_bound: f64,
}

/// Summary consumed by reports: fixpoint, limit cost, burn-in and a bound
/// table. `tau` and `bounds` are empty when the tail bound does not apply.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub mu_star: f64,
    pub limit_cost: f64,
    pub tau: Option<u64>,
    pub bounds: Vec<BoundRow>,
}

/// Builds a report over `times` (entries below the burn-in are skipped).
/// `eta` is required for two-group models.
pub fn analyze(
    model: &CharacteristicModel,
    target: &FairnessTarget,
    eta: Option<f64>,
    times: &[u64],
) -> Result<AnalysisReport> {
    let mu_star = model.fixpoint();
    let params = match model.setting {
        Setting::Single { .. } => TailBoundParams::single_group(target, model),
        Setting::TwoGroup { .. } => {
            let eta = eta.ok_or_else(|| Error::param("two-group analysis needs eta"))?;
            TailBoundParams::two_group(target, model, eta)
        }
    };
    let (tau, bounds) = match params {
        Ok(pr) => {
            let rows = times
                .iter()
                .filter(|&&t| t >= pr.tau)
                .map(|&t| BoundRow {
                    t,
                    p_bound: pr.tail_bound(t).map(|b| b.value).unwrap_or(1.0),
                })
                .collect();
            (Some(pr.tau), rows)
        }
        Err(Error::Precondition(_)) => (None, Vec::new()),
        Err(e) => return Err(e),
    };
    Ok(AnalysisReport {
        mu_star,
        limit_cost: model.limit_cost(),
        tau,
        bounds,
    })
}
