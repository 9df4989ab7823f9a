//! Ordering policies and their closed-form discounted costs.

use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};
use crate::kernel::Kernel;
use crate::solver::{Regime, RegimeReport};

/// Order-up-to rule for a user-defined policy: ordering happens at or below
/// `trigger` and brings the level to `target(x)`.
#[derive(Clone)]
pub struct CustomPolicy {
    pub trigger: f64,
    pub target: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl fmt::Debug for CustomPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomPolicy").field("trigger", &self.trigger).finish_non_exhaustive()
    }
}

#[derive(Debug, Clone)]
pub enum Policy {
    /// Order up to `order_up_to` whenever the level is at or below `reorder`.
    Band {
        reorder: f64,
        order_up_to: f64,
    },
    /// Nothing above `s1`; up to `S1` on `(S1 - Q, s1]`; exactly `Q` on
    /// `[s_low, S1 - Q]`; up to `s_bar` below `s_low`.
    Generalized {
        s1: f64,
        big_s1: f64,
        threshold: f64,
        s_low: f64,
        s_bar: f64,
    },
    Custom(CustomPolicy),
}

/// Slack allowed when checking the ordering of generalized levels.
const LEVEL_TOL: f64 = 1e-9;

/// Sample points used to check that a custom target lies above the level.
const CUSTOM_CHECK_SPAN: f64 = 100.0;
const CUSTOM_CHECK_POINTS: usize = 2001;

impl Policy {
    pub fn band(reorder: f64, order_up_to: f64) -> Result<Self> {
        if !(reorder.is_finite() && order_up_to.is_finite() && reorder < order_up_to) {
            return Err(Error::DegenerateBand { reorder, order_up_to });
        }
        Ok(Policy::Band { reorder, order_up_to })
    }

    pub fn generalized(s1: f64, big_s1: f64, threshold: f64, s_low: f64, s_bar: f64) -> Result<Self> {
        let finite = [s1, big_s1, threshold, s_low, s_bar].iter().all(|v| v.is_finite());
        if !(finite && threshold > 0.0) {
            return Err(Error::InvalidInput("generalized policy levels must be finite with Q > 0"));
        }
        let tol = LEVEL_TOL * (1.0 + s1.abs().max(big_s1.abs()));
        let pivot = big_s1 - threshold;
        let ordered = s_low <= pivot + tol && pivot <= s1 + tol && s1 < big_s1 && big_s1 <= s_bar + tol;
        if !ordered {
            return Err(Error::InvalidInput("generalized policy needs s_low <= S1 - Q <= s1 < S1 <= s_bar"));
        }
        if s_low + threshold < s1 - tol {
            return Err(Error::InvalidInput("generalized policy needs s_low + Q >= s1"));
        }
        Ok(Policy::Generalized { s1, big_s1, threshold, s_low, s_bar })
    }

    /// Builds the generalized policy from a classification in that regime.
    pub fn from_report(report: &RegimeReport) -> Result<Self> {
        match (report.regime, report.generalized) {
            (Regime::S1PlusGeneralized, Some(g)) => {
                Policy::generalized(report.sol1.reorder, report.sol1.order_up_to, report.threshold, g.s_low, g.s_bar)
            }
            _ => Err(Error::RegimeError { a1: report.sol1.a_star, a2: report.sol2.a_star }),
        }
    }

    /// Custom rule; `target(x) > x` is checked on a grid below `trigger`.
    pub fn custom(trigger: f64, target: Arc<dyn Fn(f64) -> f64 + Send + Sync>) -> Result<Self> {
        if !trigger.is_finite() {
            return Err(Error::InvalidInput("custom policy trigger must be finite"));
        }
        let step = CUSTOM_CHECK_SPAN / (CUSTOM_CHECK_POINTS - 1) as f64;
        for i in 0..CUSTOM_CHECK_POINTS {
            let x = trigger - step * i as f64;
            let y = target(x);
            if !(y.is_finite() && y > x) {
                return Err(Error::InvalidInput("custom policy target must exceed the current level"));
            }
        }
        Ok(Policy::Custom(CustomPolicy { trigger, target }))
    }

    /// Level the policy orders up to from `x`, or `None` when it does not order.
    pub fn order_up_to(&self, x: f64) -> Option<f64> {
        match self {
            Policy::Band { reorder, order_up_to } => (x <= *reorder).then_some(*order_up_to),
            Policy::Generalized { s1, big_s1, threshold, s_low, s_bar } => {
                if x > *s1 {
                    None
                } else if x > big_s1 - threshold {
                    Some(*big_s1)
                } else if x >= *s_low {
                    Some(x + threshold)
                } else {
                    Some(*s_bar)
                }
            }
            Policy::Custom(c) => (x <= c.trigger).then(|| (c.target)(x)),
        }
    }

    /// Highest level at which the policy orders.
    pub fn trigger(&self) -> f64 {
        match self {
            Policy::Band { reorder, .. } => *reorder,
            Policy::Generalized { s1, .. } => *s1,
            Policy::Custom(c) => c.trigger,
        }
    }

    /// Largest level the policy can order up to from `x` or below.
    pub fn max_target(&self, x: f64) -> f64 {
        match self {
            Policy::Band { order_up_to, .. } => *order_up_to,
            Policy::Generalized { big_s1, s_bar, .. } => big_s1.max(*s_bar),
            Policy::Custom(c) => {
                let lo = x.min(c.trigger);
                let step = (c.trigger - lo).max(1.0) / 200.0;
                (0..=200).map(|i| (c.target)(c.trigger - step * i as f64)).fold(f64::NEG_INFINITY, f64::max)
            }
        }
    }

    pub fn tag(&self) -> &'static str {
        match self {
            Policy::Band { .. } => "band",
            Policy::Generalized { .. } => "generalized",
            Policy::Custom(_) => "custom",
        }
    }
}

/// Discounted cost of any band `(s, S)` started at `x`.
pub fn dc_band(kernel: &Kernel, reorder: f64, order_up_to: f64, x: f64) -> Result<f64> {
    let p = kernel.params();
    let a = kernel.big_a(reorder, order_up_to, p.setup_cost(order_up_to - reorder))?;
    if x > reorder {
        kernel.v(a, x)
    } else {
        let jump = order_up_to - x;
        Ok(kernel.v(a, order_up_to)? + p.order_cost(jump))
    }
}

fn generalized_cost(
    kernel: &Kernel,
    (s1, big_s1, threshold, s_low, s_bar): (f64, f64, f64, f64, f64),
    x: f64,
) -> Result<f64> {
    let p = kernel.params();
    let a = kernel.big_a(s1, big_s1, p.setup_low)?;
    let k = p.unit_cost;
    if x > s1 {
        kernel.v(a, x)
    } else if x > big_s1 - threshold {
        Ok(kernel.v(a, big_s1)? + p.setup_low + k * (big_s1 - x))
    } else if x >= s_low {
        Ok(kernel.v(a, x + threshold)? + p.setup_low + k * threshold)
    } else {
        Ok(kernel.v(a, s_bar)? + p.setup_high + k * (s_bar - x))
    }
}

/// Discounted cost of the generalized policy of a classification, started at `x`.
pub fn dc_generalized(kernel: &Kernel, report: &RegimeReport, x: f64) -> Result<f64> {
    match Policy::from_report(report)? {
        Policy::Generalized { s1, big_s1, threshold, s_low, s_bar } => {
            generalized_cost(kernel, (s1, big_s1, threshold, s_low, s_bar), x)
        }
        _ => Err(Error::RegimeError { a1: report.sol1.a_star, a2: report.sol2.a_star }),
    }
}

/// Closed-form discounted cost of a band or generalized policy.
pub fn dc_policy(kernel: &Kernel, policy: &Policy, x: f64) -> Result<f64> {
    match policy {
        Policy::Band { reorder, order_up_to } => dc_band(kernel, *reorder, *order_up_to, x),
        Policy::Generalized { s1, big_s1, threshold, s_low, s_bar } => {
            generalized_cost(kernel, (*s1, *big_s1, *threshold, *s_low, *s_bar), x)
        }
        Policy::Custom(_) => Err(Error::InvalidInput("custom policies have no closed-form cost")),
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CostCurve {
    pub policy_tag: &'static str,
    pub points: Vec<(f64, f64)>,
}

pub fn cost_curve(kernel: &Kernel, policy: &Policy, grid: &[f64]) -> Result<CostCurve> {
    let points = grid.iter().map(|&x| Ok((x, dc_policy(kernel, policy, x)?))).collect::<Result<Vec<_>>>()?;
    Ok(CostCurve { policy_tag: policy.tag(), points })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Best {
    Band1,
    Band2,
    Generalized,
}

impl Best {
    pub fn as_str(&self) -> &'static str {
        match self {
            Best::Band1 => "band1",
            Best::Band2 => "band2",
            Best::Generalized => "generalized",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CompareRow {
    pub x: f64,
    pub band1: f64,
    pub band2: f64,
    /// Absent when the floored band is optimal everywhere.
    pub generalized: Option<f64>,
    pub best: Best,
}

/// Costs of both optimal bands and (when defined) the generalized policy on a grid.
pub fn compare(kernel: &Kernel, report: &RegimeReport, grid: &[f64]) -> Result<Vec<CompareRow>> {
    let (s1, s2) = (&report.sol1, &report.sol2);
    grid.iter()
        .map(|&x| {
            let band1 = dc_band(kernel, s1.reorder, s1.order_up_to, x)?;
            let band2 = dc_band(kernel, s2.reorder, s2.order_up_to, x)?;
            let generalized = match report.regime {
                Regime::S1PlusGeneralized => Some(dc_generalized(kernel, report, x)?),
                Regime::S2Everywhere => None,
            };
            let mut best = if band2 < band1 { Best::Band2 } else { Best::Band1 };
            let best_value = band1.min(band2);
            if let Some(gv) = generalized {
                if gv < best_value {
                    best = Best::Generalized;
                }
            }
            Ok(CompareRow { x, band1, band2, generalized, best })
        })
        .collect()
}
