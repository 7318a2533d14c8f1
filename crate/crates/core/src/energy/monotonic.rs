//! Family of energy functions that is pointwise monotone in its index.
//!
//! Members are indexed by `r` in `(0, 1)`; a larger index gives a steeper
//! function and every member has a fixpoint of its characteristic function
//! at `a_r`, inside the limit set. The construction depends on where the
//! natural bias sits relative to the limit set: below it, above it, or
//! inside it.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fairness::{Domain, Interval};

/// Fixed exponent of the quadratic pieces.
pub const EXPONENT: i32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MonotonicCase {
    /// Bias below the limit set; the shield pushes up.
    BiasBelow,
    /// Bias above the limit set; the shield pushes down.
    BiasAbove,
    /// Bias inside the limit set; the pivot is the bias itself.
    BiasInside,
}

/// Setting-independent description of the family (everything except `r`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonotonicFamily {
    /// Decision probability `p` (unit domain) or disparity `d = p_A - p_B`
    /// (signed domain).
    pub bias: f64,
    pub running: Interval,
    pub limit: Interval,
    #[serde(default)]
    pub domain: Domain,
}

impl MonotonicFamily {
    pub fn new(bias: f64, running: Interval, limit: Interval, domain: Domain) -> Result<Self> {
        let fam = Self {
            bias,
            running,
            limit,
            domain,
        };
        fam.check()?;
        Ok(fam)
    }

    fn check(&self) -> Result<()> {
        let (lo, hi) = (self.domain.lo(), self.domain.hi());
        if !(self.bias > lo && self.bias < hi) {
            return Err(Error::param(format!(
                "bias {} must lie strictly inside ({lo}, {hi})",
                self.bias
            )));
        }
        if !self.domain.as_interval().contains_interval(&self.running) {
            return Err(Error::param("running interval leaves the domain"));
        }
        if !self.running.contains_interval(&self.limit) {
            return Err(Error::param("limit set must be contained in the running interval"));
        }
        Ok(())
    }

    pub fn case(&self) -> MonotonicCase {
        if self.bias < self.limit.lo {
            MonotonicCase::BiasBelow
        } else if self.bias > self.limit.hi {
            MonotonicCase::BiasAbove
        } else {
            MonotonicCase::BiasInside
        }
    }

    /// Pivot shared by all members.
    pub fn pivot(&self) -> f64 {
        match self.case() {
            MonotonicCase::BiasBelow => 0.5 * (self.limit.hi + self.running.hi),
            MonotonicCase::BiasAbove => 0.5 * (self.running.lo + self.limit.lo),
            MonotonicCase::BiasInside => self.bias,
        }
    }

    pub fn member(&self, r: f64) -> Result<MonotonicEnergy> {
        MonotonicEnergy::new(r, *self)
    }
}

/// One member `zeta_r` with its derived constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonotonicEnergy {
    pub r: f64,
    pub family: MonotonicFamily,
    pub case: MonotonicCase,
    pub kappa: f64,
    /// Fixpoint of the characteristic function (equals the pivot when the
    /// bias is inside the limit set).
    pub a_r: f64,
    /// Energy at `a_r`.
    pub c_r: f64,
    pub alpha_r: f64,
    /// Plateau bounds of the central case (infinite otherwise).
    pub l_r: f64,
    pub u_r: f64,
}

impl MonotonicEnergy {
    pub fn new(r: f64, family: MonotonicFamily) -> Result<Self> {
        if !(r > 0.0 && r < 1.0) {
            return Err(Error::param(format!("family index r = {r} must lie in (0, 1)")));
        }
        family.check()?;
        let case = family.case();
        let kappa = family.pivot();
        let (lo, hi) = (family.domain.lo(), family.domain.hi());
        let p = family.bias;
        let lim = family.limit;
        let (a_r, c_r, alpha_r, l_r, u_r) = match case {
            MonotonicCase::BiasBelow => {
                let a = (1.0 - r) * lim.lo + r * lim.hi;
                let c = (a - p) / (hi - p);
                (a, c, (1.0 - r) / r, f64::NEG_INFINITY, f64::INFINITY)
            }
            MonotonicCase::BiasAbove => {
                let a = r * lim.lo + (1.0 - r) * lim.hi;
                let c = (p - a) / (p - lo);
                (a, c, (1.0 - r) / r, f64::NEG_INFINITY, f64::INFINITY)
            }
            MonotonicCase::BiasInside => {
                let alpha = r / (1.0 - r);
                let half = alpha.powf(-1.0 / f64::from(EXPONENT));
                (kappa, 0.0, alpha, kappa - half, kappa + half)
            }
        };
        Ok(Self {
            r,
            family,
            case,
            kappa,
            a_r,
            c_r,
            alpha_r,
            l_r,
            u_r,
        })
    }

    /// Unclipped piecewise value; callers clip.
    pub(crate) fn raw(&self, x: f64) -> f64 {
        let (k, a, c, al) = (self.kappa, self.a_r, self.c_r, self.alpha_r);
        match self.case {
            MonotonicCase::BiasBelow => {
                if x < a {
                    c + (1.0 - c) * (1.0 - ((x - a) / al).exp())
                } else if x <= k {
                    if k > a {
                        c * (1.0 - (x - a) / (k - a)).max(0.0).powf(al)
                    } else {
                        0.0
                    }
                } else {
                    1.0 - (-((x - k) / al).powi(EXPONENT)).exp()
                }
            }
            MonotonicCase::BiasAbove => {
                if x < k {
                    1.0 - (-((x - k) / al).powi(EXPONENT)).exp()
                } else if x <= a {
                    if a > k {
                        c * (1.0 - (a - x) / (a - k)).max(0.0).powf(al)
                    } else {
                        0.0
                    }
                } else {
                    c + (1.0 - c) * (1.0 - ((a - x) / al).exp())
                }
            }
            MonotonicCase::BiasInside => {
                if x >= self.l_r && x <= self.u_r {
                    al * (x - k).abs().powi(EXPONENT)
                } else {
                    1.0
                }
            }
        }
    }

    /// Points where the piecewise definition switches branches.
    pub fn breakpoints(&self) -> Vec<f64> {
        match self.case {
            MonotonicCase::BiasBelow | MonotonicCase::BiasAbove => vec![self.a_r, self.kappa],
            MonotonicCase::BiasInside => vec![self.l_r, self.kappa, self.u_r],
        }
    }
}
