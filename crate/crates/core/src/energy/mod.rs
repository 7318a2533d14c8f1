//! Energy functions: bowl-shaped maps from fairness values to intervention
//! probabilities, zero at their pivot.
//!
//! All shields run through [`EnergyFunction`], including the two degenerate
//! baselines (`Idle`, identically zero, and `Naive`, a 0/1 step on the
//! running interval). Those two do not satisfy the regularity conditions of a
//! proper energy function; [`validate`] reports that instead of rejecting them.

pub mod monotonic;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fairness::{Domain, Interval};

pub use monotonic::{MonotonicCase, MonotonicEnergy, MonotonicFamily};

/// Relative slack on closed upper parameter bounds.
const BOUND_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Family {
    /// `alpha * |x - kappa|^beta`
    Polynomial { kappa: f64, alpha: f64, beta: f64 },
    /// `rho * (1 - exp(-sigma (x - kappa)^2))`
    Exponential { kappa: f64, rho: f64, sigma: f64 },
    Monotonic(MonotonicEnergy),
    /// Never intervenes.
    Idle,
    /// 0 strictly inside the running interval, 1 elsewhere.
    Naive { running: Interval },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyFunction {
    family: Family,
    domain: Domain,
}

impl EnergyFunction {
    pub fn polynomial(kappa: f64, alpha: f64, beta: f64, domain: Domain) -> Result<Self> {
        let (lo, hi) = (domain.lo(), domain.hi());
        if !(kappa > lo && kappa < hi) {
            return Err(Error::param(format!("pivot {kappa} must lie inside ({lo}, {hi})")));
        }
        if !(beta > 1.0 && beta.is_finite()) {
            return Err(Error::param(format!("beta = {beta} must exceed 1")));
        }
        let max_alpha = 1.0 / (kappa - lo).max(hi - kappa).powf(beta);
        if !(alpha > 0.0 && alpha <= max_alpha * (1.0 + BOUND_SLACK)) {
            return Err(Error::param(format!("alpha = {alpha} must lie in (0, {max_alpha}]")));
        }
        Ok(Self {
            family: Family::Polynomial { kappa, alpha, beta },
            domain,
        })
    }

    pub fn exponential(kappa: f64, rho: f64, sigma: f64, domain: Domain) -> Result<Self> {
        let (lo, hi) = (domain.lo(), domain.hi());
        if !(kappa > lo && kappa < hi) {
            return Err(Error::param(format!("pivot {kappa} must lie inside ({lo}, {hi})")));
        }
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::param(format!("sigma = {sigma} must be positive")));
        }
        let near = (kappa - lo).min(hi - kappa);
        let max_rho = 1.0 / (1.0 - (-sigma * near * near).exp());
        if !(rho > 0.0 && rho <= max_rho * (1.0 + BOUND_SLACK)) {
            return Err(Error::param(format!("rho = {rho} must lie in (0, {max_rho}]")));
        }
        Ok(Self {
            family: Family::Exponential { kappa, rho, sigma },
            domain,
        })
    }

    pub fn monotonic(r: f64, family: MonotonicFamily) -> Result<Self> {
        let member = family.member(r)?;
        Ok(Self {
            family: Family::Monotonic(member),
            domain: family.domain,
        })
    }

    pub fn idle(domain: Domain) -> Self {
        Self {
            family: Family::Idle,
            domain,
        }
    }

    pub fn naive(running: Interval, domain: Domain) -> Result<Self> {
        if !domain.as_interval().contains_interval(&running) {
            return Err(Error::param("running interval leaves the domain"));
        }
        Ok(Self {
            family: Family::Naive { running },
            domain,
        })
    }

    /// Exponential member with `rho = 1` whose value at `mu_star` is the
    /// energy required for the process to converge to `mu_star`.
    ///
    /// `bias` is `p` on the unit domain and `d = p_A - p_B` on the signed one.
    /// The pivot must sit on the far side of `mu_star` from the bias. When
    /// the bias already equals `mu_star` the pivot must equal it too and
    /// `sigma` defaults to 128.
    pub fn calibrated_exponential(bias: f64, mu_star: f64, kappa: f64, domain: Domain) -> Result<Self> {
        let need = required_energy(bias, mu_star, domain)?;
        if need == 0.0 {
            if (kappa - mu_star).abs() > 1e-12 {
                return Err(Error::param("bias equals the target; the pivot must equal it as well"));
            }
            return Self::exponential(mu_star, 1.0, 128.0, domain);
        }
        check_pivot_side(bias, mu_star, kappa)?;
        if need >= 1.0 {
            return Err(Error::param(format!(
                "target {mu_star} needs energy {need}, unreachable by an exponential shape"
            )));
        }
        let gap = mu_star - kappa;
        let sigma = -(1.0 - need).ln() / (gap * gap);
        Self::exponential(kappa, 1.0, sigma, domain)
    }

    /// Polynomial member with fixed `beta` calibrated at `mu_star`.
    pub fn calibrated_polynomial(
        bias: f64,
        mu_star: f64,
        kappa: f64,
        beta: f64,
        domain: Domain,
    ) -> Result<Self> {
        let need = required_energy(bias, mu_star, domain)?;
        if need == 0.0 {
            if (kappa - mu_star).abs() > 1e-12 {
                return Err(Error::param("bias equals the target; the pivot must equal it as well"));
            }
            let max_alpha = 1.0 / (kappa - domain.lo()).max(domain.hi() - kappa).powf(beta);
            return Self::polynomial(kappa, max_alpha, beta, domain);
        }
        check_pivot_side(bias, mu_star, kappa)?;
        let alpha = need / (mu_star - kappa).abs().powf(beta);
        Self::polynomial(kappa, alpha, beta, domain)
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    /// Pivot; `None` for the idle function, which has no preferred value.
    pub fn pivot(&self) -> Option<f64> {
        match self.family {
            Family::Polynomial { kappa, .. } | Family::Exponential { kappa, .. } => Some(kappa),
            Family::Monotonic(m) => Some(m.kappa),
            Family::Idle => None,
            Family::Naive { running } => Some(running.midpoint()),
        }
    }

    /// Pivot used by the shield's decision rule. The idle function never
    /// intervenes, so any value works; the domain midpoint is used.
    pub fn decision_pivot(&self) -> f64 {
        self.pivot()
            .unwrap_or_else(|| self.domain.as_interval().midpoint())
    }

    /// Checked evaluation.
    pub fn eval(&self, x: f64) -> Result<f64> {
        self.domain.check(x)?;
        Ok(self.value(x))
    }

    /// Evaluation without the domain check, clipped to `[0, 1]`.
    #[inline]
    pub fn value(&self, x: f64) -> f64 {
        let v = match self.family {
            Family::Polynomial { kappa, alpha, beta } => {
                let d = (x - kappa).abs();
                if beta == 2.0 {
                    alpha * d * d
                } else {
                    alpha * d.powf(beta)
                }
            }
            Family::Exponential { kappa, rho, sigma } => {
                let d = x - kappa;
                rho * (1.0 - (-sigma * d * d).exp())
            }
            Family::Monotonic(ref m) => m.raw(x),
            Family::Idle => 0.0,
            Family::Naive { running } => {
                if x > running.lo && x < running.hi {
                    0.0
                } else {
                    1.0
                }
            }
        };
        v.clamp(0.0, 1.0)
    }

    /// Points where the function may change shape (kinks, jumps, pivot).
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut pts = match self.family {
            Family::Polynomial { kappa, .. } | Family::Exponential { kappa, .. } => vec![kappa],
            Family::Monotonic(ref m) => m.breakpoints(),
            Family::Idle => vec![],
            Family::Naive { running } => vec![running.lo, running.midpoint(), running.hi],
        };
        pts.retain(|x| self.domain.contains(*x));
        pts
    }

    pub fn monotonic_member(&self) -> Option<&MonotonicEnergy> {
        match self.family {
            Family::Monotonic(ref m) => Some(m),
            _ => None,
        }
    }
}

fn check_pivot_side(bias: f64, mu_star: f64, kappa: f64) -> Result<()> {
    let ok = if bias < mu_star {
        kappa > mu_star
    } else {
        kappa < mu_star
    };
    if ok {
        Ok(())
    } else {
        Err(Error::param(format!(
            "pivot {kappa} must lie beyond the target {mu_star} as seen from the bias {bias}"
        )))
    }
}

/// Energy the shield must apply at `mu_star` for a single stream with
/// acceptance probability `p` to converge there.
pub fn required_energy_at_target(p: f64, mu_star: f64) -> f64 {
    if p < mu_star {
        (mu_star - p) / (1.0 - p)
    } else if p > mu_star {
        (p - mu_star) / p
    } else {
        0.0
    }
}

/// Two-group analogue with disparity `d = p_A - p_B`.
pub fn required_energy_two_group(d: f64, mu_star: f64) -> f64 {
    if d < mu_star {
        (mu_star - d) / (1.0 - d)
    } else if d > mu_star {
        (d - mu_star) / (1.0 + d)
    } else {
        0.0
    }
}

/// Dispatches on the domain: unit uses the single-stream formula, signed the
/// two-group one.
pub fn required_energy(bias: f64, mu_star: f64, domain: Domain) -> Result<f64> {
    let (lo, hi) = (domain.lo(), domain.hi());
    if !(bias > lo && bias < hi) {
        return Err(Error::param(format!("bias {bias} must lie inside ({lo}, {hi})")));
    }
    domain.check(mu_star)?;
    Ok(match domain {
        Domain::Unit => required_energy_at_target(bias, mu_star),
        Domain::Signed => required_energy_two_group(bias, mu_star),
    })
}

/// Free-function form of [`MonotonicFamily::member`] evaluation.
pub fn eval_monotonic(r: f64, family: &MonotonicFamily, x: f64) -> Result<f64> {
    EnergyFunction::monotonic(r, *family)?.eval(x)
}

// ---------------------------------------------------------------------------
// Steepness

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SteepnessOrder {
    FirstSteeper,
    SecondSteeper,
    Equal,
    /// Neither dominates; `first_above` is a point where the first function
    /// is strictly larger and `second_above` one where the second is.
    Incomparable { first_above: f64, second_above: f64 },
}

pub const DEFAULT_GRID: usize = 10_000;

fn comparison_grid(domain: Domain, grid_size: usize, extra: &[f64]) -> Vec<f64> {
    let (lo, hi) = (domain.lo(), domain.hi());
    let n = grid_size.max(1);
    let mut xs: Vec<f64> = (0..=n)
        .map(|i| lo + (hi - lo) * i as f64 / n as f64)
        .collect();
    for &b in extra {
        for x in [b, b - 1e-9, b + 1e-9] {
            if domain.contains(x) {
                xs.push(x);
            }
        }
    }
    xs.sort_by(|a, b| a.total_cmp(b));
    xs.dedup();
    xs
}

/// Pointwise comparison on a uniform grid of `grid_size + 1` points plus the
/// breakpoints of both functions.
pub fn compare_steepness(
    first: &EnergyFunction,
    second: &EnergyFunction,
    grid_size: usize,
) -> Result<SteepnessOrder> {
    if first.domain != second.domain {
        return Err(Error::param("energy functions live on different domains"));
    }
    if let (Some(a), Some(b)) = (first.pivot(), second.pivot()) {
        if (a - b).abs() > 1e-12 {
            return Err(Error::IncomparablePivots(a, b));
        }
    }
    let mut extra = first.breakpoints();
    extra.extend(second.breakpoints());
    let grid = comparison_grid(first.domain, grid_size, &extra);
    const TOL: f64 = 1e-12;
    let mut first_above = None;
    let mut second_above = None;
    for &x in &grid {
        let (a, b) = (first.value(x), second.value(x));
        if a > b + TOL && first_above.is_none() {
            first_above = Some(x);
        }
        if b > a + TOL && second_above.is_none() {
            second_above = Some(x);
        }
    }
    Ok(match (first_above, second_above) {
        (None, None) => SteepnessOrder::Equal,
        (Some(_), None) => SteepnessOrder::FirstSteeper,
        (None, Some(_)) => SteepnessOrder::SecondSteeper,
        (Some(f), Some(s)) => SteepnessOrder::Incomparable {
            first_above: f,
            second_above: s,
        },
    })
}

// ---------------------------------------------------------------------------
// Diagnostics

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Violation {
    /// Energy at the pivot is not zero.
    PivotNotZero { value: f64 },
    /// Increases left of the pivot or decreases right of it.
    NotUnimodal { at: f64 },
    /// Zero energy at a domain endpoint.
    EndpointNotPositive { at: f64 },
    /// Jump discontinuity.
    Discontinuous { at: f64 },
    /// Continuous but with a kink (one-sided slopes differ).
    NotSmooth { at: f64 },
}

impl Violation {
    fn kind(&self) -> u8 {
        match self {
            Violation::PivotNotZero { .. } => 0,
            Violation::NotUnimodal { .. } => 1,
            Violation::EndpointNotPositive { .. } => 2,
            Violation::Discontinuous { .. } => 3,
            Violation::NotSmooth { .. } => 4,
        }
    }
}

/// Numerically checks the defining conditions of an energy function. An
/// empty list means every check passed.
pub fn validate(zeta: &EnergyFunction) -> Vec<Violation> {
    let mut out: Vec<Violation> = Vec::new();
    let domain = zeta.domain;
    let (lo, hi) = (domain.lo(), domain.hi());
    let grid = comparison_grid(domain, DEFAULT_GRID, &zeta.breakpoints());
    let values: Vec<f64> = grid.iter().map(|&x| zeta.value(x)).collect();

    if let Some(k) = zeta.pivot() {
        let v = zeta.value(k);
        if v.abs() > 1e-12 {
            out.push(Violation::PivotNotZero { value: v });
        }
        for i in 1..grid.len() {
            let (x0, x1) = (grid[i - 1], grid[i]);
            let (v0, v1) = (values[i - 1], values[i]);
            let bad = (x1 <= k && v1 > v0 + 1e-12) || (x0 >= k && v1 < v0 - 1e-12);
            if bad {
                out.push(Violation::NotUnimodal { at: x1 });
                break;
            }
        }
    }

    for x in [lo, hi] {
        if zeta.value(x) <= 0.0 {
            out.push(Violation::EndpointNotPositive { at: x });
            break;
        }
    }

    let mut jumps: Vec<f64> = Vec::new();
    for i in 1..grid.len() {
        if (values[i] - values[i - 1]).abs() > 0.05 {
            if let Some(at) = locate_jump(zeta, grid[i - 1], grid[i]) {
                jumps.push(at);
            }
        }
    }
    for &b in &zeta.breakpoints() {
        let h = 1e-12;
        if (zeta.value(b - h) - zeta.value(b + h)).abs() > 1e-3
            && !jumps.iter().any(|j| (j - b).abs() < 1e-6)
        {
            jumps.push(b);
        }
    }
    if let Some(&at) = jumps.first() {
        out.push(Violation::Discontinuous { at });
    } else {
        for &b in &zeta.breakpoints() {
            if b - lo < 1e-6 || hi - b < 1e-6 {
                continue;
            }
            let h = 1e-7;
            let left = (zeta.value(b) - zeta.value(b - h)) / h;
            let right = (zeta.value(b + h) - zeta.value(b)) / h;
            if (left - right).abs() > 1e-3 * (1.0 + left.abs().max(right.abs())) {
                out.push(Violation::NotSmooth { at: b });
                break;
            }
        }
    }

    out.dedup_by_key(|v| v.kind());
    out
}

/// Bisects `[a, b]` toward the largest change; returns the location if the
/// change survives shrinking the bracket to machine resolution.
fn locate_jump(zeta: &EnergyFunction, mut a: f64, mut b: f64) -> Option<f64> {
    for _ in 0..80 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let (va, vm, vb) = (zeta.value(a), zeta.value(m), zeta.value(b));
        if (vm - va).abs() >= (vb - vm).abs() {
            b = m;
        } else {
            a = m;
        }
    }
    if (zeta.value(b) - zeta.value(a)).abs() > 0.01 {
        Some(0.5 * (a + b))
    } else {
        None
    }
}

// ---------------------------------------------------------------------------
// JSON form: {"family": "...", "params": {...}, "domain": "unit" | "signed"}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEnergy {
    family: String,
    #[serde(default = "empty_params")]
    params: serde_json::Value,
    #[serde(default)]
    domain: Domain,
}

fn empty_params() -> serde_json::Value {
    serde_json::Value::Object(Default::default())
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PolyParams {
    kappa: f64,
    alpha: f64,
    beta: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ExpParams {
    kappa: f64,
    rho: f64,
    sigma: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MonParams {
    r: f64,
    bias: f64,
    running: Interval,
    limit: Interval,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NaiveParams {
    running: Interval,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NoParams {}

impl EnergyFunction {
    fn to_raw(self) -> RawEnergy {
        let (family, params) = match self.family {
            Family::Polynomial { kappa, alpha, beta } => (
                "polynomial",
                serde_json::to_value(PolyParams { kappa, alpha, beta }),
            ),
            Family::Exponential { kappa, rho, sigma } => (
                "exponential",
                serde_json::to_value(ExpParams { kappa, rho, sigma }),
            ),
            Family::Monotonic(m) => (
                "monotonic",
                serde_json::to_value(MonParams {
                    r: m.r,
                    bias: m.family.bias,
                    running: m.family.running,
                    limit: m.family.limit,
                }),
            ),
            Family::Idle => ("idle", serde_json::to_value(NoParams {})),
            Family::Naive { running } => ("naive", serde_json::to_value(NaiveParams { running })),
        };
        RawEnergy {
            family: family.to_string(),
            params: params.expect("parameter structs serialize"),
            domain: self.domain,
        }
    }

    fn from_raw(raw: RawEnergy) -> Result<Self> {
        fn params<T: serde::de::DeserializeOwned>(v: serde_json::Value) -> Result<T> {
            serde_json::from_value(v).map_err(|e| Error::param(format!("params: {e}")))
        }
        let d = raw.domain;
        match raw.family.as_str() {
            "polynomial" => {
                let p: PolyParams = params(raw.params)?;
                Self::polynomial(p.kappa, p.alpha, p.beta, d)
            }
            "exponential" => {
                let p: ExpParams = params(raw.params)?;
                Self::exponential(p.kappa, p.rho, p.sigma, d)
            }
            "monotonic" => {
                let p: MonParams = params(raw.params)?;
                Self::monotonic(p.r, MonotonicFamily::new(p.bias, p.running, p.limit, d)?)
            }
            "idle" => {
                let _: NoParams = params(raw.params)?;
                Ok(Self::idle(d))
            }
            "naive" => {
                let p: NaiveParams = params(raw.params)?;
                Self::naive(p.running, d)
            }
            other => Err(Error::param(format!("unknown energy family {other:?}"))),
        }
    }
}

impl Serialize for EnergyFunction {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_raw().serialize(s)
    }
}

impl<'de> Deserialize<'de> for EnergyFunction {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = RawEnergy::deserialize(d)?;
        Self::from_raw(raw).map_err(serde::de::Error::custom)
    }
}
