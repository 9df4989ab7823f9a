//! Model parameters, holding/backorder cost families, and assumption checks.

use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use crate::quadrature::PolyBound;

/// Relative slack when comparing an order quantity with the threshold `Q`.
pub const THRESHOLD_REL_TOL: f64 = 1e-12;

/// Drift, volatility, discounting and the two-step ordering cost.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ModelParams {
    /// Demand rate `mu` (items per unit time); inventory drifts down at this rate.
    pub drift: f64,
    /// Demand volatility `sigma` (items per square-root time).
    pub volatility: f64,
    /// Discount rate `beta`.
    pub discount: f64,
    /// Proportional cost `k` per item ordered.
    pub unit_cost: f64,
    /// Setup cost `K1` for orders of at most `Q` items.
    pub setup_low: f64,
    /// Setup cost `K2` for orders above `Q` items.
    pub setup_high: f64,
    /// Quantity threshold `Q`.
    pub threshold: f64,
}

impl ModelParams {
    /// Setup cost `K(xi)`; zero when nothing is ordered. Quantities within
    /// [`THRESHOLD_REL_TOL`] of `Q` count as `Q`, so an order computed as
    /// `(x + Q) - x` is charged `K1`.
    pub fn setup_cost(&self, quantity: f64) -> f64 {
        if quantity <= 0.0 {
            0.0
        } else if quantity <= self.threshold * (1.0 + THRESHOLD_REL_TOL) {
            self.setup_low
        } else {
            self.setup_high
        }
    }

    /// Full cost `K(xi) + k xi` of one order.
    pub fn order_cost(&self, quantity: f64) -> f64 {
        if quantity <= 0.0 {
            0.0
        } else {
            self.setup_cost(quantity) + self.unit_cost * quantity
        }
    }

    pub fn with_threshold(&self, threshold: f64) -> Self {
        ModelParams { threshold, ..*self }
    }
}

/// A user supplied convex holding/backorder cost together with everything the
/// solver cannot derive from samples.
#[derive(Clone)]
pub struct CustomCost {
    pub value: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    pub slope: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    pub curvature: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    /// `g(x) <= a + b |x|^n`.
    pub growth: PolyBound,
    /// `g'(0-)`.
    pub slope_left_of_zero: f64,
    /// `g'(0+)`.
    pub slope_right_of_zero: f64,
}

impl fmt::Debug for CustomCost {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomCost")
            .field("growth", &self.growth)
            .field("slope_left_of_zero", &self.slope_left_of_zero)
            .field("slope_right_of_zero", &self.slope_right_of_zero)
            .finish_non_exhaustive()
    }
}

/// Holding/backorder cost `g`.
#[derive(Debug, Clone)]
pub enum HoldingCost {
    /// `g(x) = h x` for `x >= 0`, `-p x` for `x < 0`.
    PiecewiseLinear {
        h: f64,
        p: f64,
    },
    /// `g(x) = alpha x^2`.
    Quadratic {
        alpha: f64,
    },
    Custom(CustomCost),
}

/// `g` restricted to each half-line as a polynomial of degree at most two,
/// `c0 + c1 x + c2 x^2`. Both built-in families have this form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct HalfLinePolys {
    pub left: [f64; 3],
    pub right: [f64; 3],
}

impl HoldingCost {
    pub fn value(&self, x: f64) -> f64 {
        match self {
            HoldingCost::PiecewiseLinear { h, p } => {
                if x >= 0.0 {
                    h * x
                } else {
                    -p * x
                }
            }
            HoldingCost::Quadratic { alpha } => alpha * x * x,
            HoldingCost::Custom(c) => (c.value)(x),
        }
    }

    /// `g'(x)`; at the kink `x = 0` this is the right derivative.
    pub fn slope(&self, x: f64) -> f64 {
        match self {
            HoldingCost::PiecewiseLinear { h, p } => {
                if x >= 0.0 {
                    *h
                } else {
                    -p
                }
            }
            HoldingCost::Quadratic { alpha } => 2.0 * alpha * x,
            HoldingCost::Custom(c) => {
                if x == 0.0 {
                    c.slope_right_of_zero
                } else {
                    (c.slope)(x)
                }
            }
        }
    }

    /// `g''(x)` away from the kink.
    pub fn curvature(&self, x: f64) -> f64 {
        match self {
            HoldingCost::PiecewiseLinear { .. } => 0.0,
            HoldingCost::Quadratic { alpha } => 2.0 * alpha,
            HoldingCost::Custom(c) => (c.curvature)(x),
        }
    }

    pub fn slope_left_of_zero(&self) -> f64 {
        match self {
            HoldingCost::PiecewiseLinear { p, .. } => -p,
            HoldingCost::Quadratic { .. } => 0.0,
            HoldingCost::Custom(c) => c.slope_left_of_zero,
        }
    }

    pub fn slope_right_of_zero(&self) -> f64 {
        match self {
            HoldingCost::PiecewiseLinear { h, .. } => *h,
            HoldingCost::Quadratic { .. } => 0.0,
            HoldingCost::Custom(c) => c.slope_right_of_zero,
        }
    }

    /// Polynomial growth witness `(a, b, n)`.
    pub fn growth_bound(&self) -> PolyBound {
        match self {
            HoldingCost::PiecewiseLinear { h, p } => PolyBound { a: 0.0, b: h.max(*p), n: 1 },
            HoldingCost::Quadratic { alpha } => PolyBound { a: 0.0, b: *alpha, n: 2 },
            HoldingCost::Custom(c) => c.growth,
        }
    }

    /// `lim_{x -> -inf} g'(x)` for the built-in families; `None` for custom costs.
    pub fn slope_at_minus_infinity(&self) -> Option<f64> {
        match self {
            HoldingCost::PiecewiseLinear { p, .. } => Some(-p),
            HoldingCost::Quadratic { .. } => Some(f64::NEG_INFINITY),
            HoldingCost::Custom(_) => None,
        }
    }

    pub(crate) fn half_line_polys(&self) -> Option<HalfLinePolys> {
        match self {
            HoldingCost::PiecewiseLinear { h, p } => {
                Some(HalfLinePolys { left: [0.0, -p, 0.0], right: [0.0, *h, 0.0] })
            }
            HoldingCost::Quadratic { alpha } => {
                Some(HalfLinePolys { left: [0.0, 0.0, *alpha], right: [0.0, 0.0, *alpha] })
            }
            HoldingCost::Custom(_) => None,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            HoldingCost::PiecewiseLinear { .. } => "piecewise_linear",
            HoldingCost::Quadratic { .. } => "quadratic",
            HoldingCost::Custom(_) => "custom",
        }
    }
}

/// Parameters plus holding cost: everything that defines one problem instance.
#[derive(Debug, Clone)]
pub struct Model {
    pub params: ModelParams,
    pub holding: HoldingCost,
}

impl Model {
    pub fn new(params: ModelParams, holding: HoldingCost) -> Self {
        Model { params, holding }
    }

    pub fn with_threshold(&self, threshold: f64) -> Self {
        Model { params: self.params.with_threshold(threshold), holding: self.holding.clone() }
    }

    pub fn validate(&self) -> ValidationReport {
        validate(&self.params, &self.holding)
    }
}

/// Which requirement a violation refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Assumption {
    /// Positivity of `mu`, `sigma`, `beta`, `Q`, `K1` and non-negativity of `k`.
    Parameters,
    /// Convexity and `g(0) = 0`.
    A1,
    /// Twice continuously differentiable away from zero.
    A2,
    /// `g' < 0` on the negative half-line and `g' > 0` on the positive one.
    A3,
    /// `lim g'(-inf) + beta k < -beta K1 / Q`.
    A4,
    /// Polynomial growth.
    A5,
    /// `K1 < K2 <= 2 K1`.
    SetupCosts,
}

impl fmt::Display for Assumption {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Assumption::Parameters => "parameters",
            Assumption::A1 => "A1",
            Assumption::A2 => "A2",
            Assumption::A3 => "A3",
            Assumption::A4 => "A4",
            Assumption::A5 => "A5",
            Assumption::SetupCosts => "setup-costs",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Violation {
    pub assumption: Assumption,
    pub detail: String,
    /// Offending value (a parameter, a sample point, or a limit).
    pub witness: f64,
    /// True when the check was done by sampling rather than analytically.
    pub sampled: bool,
}

#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
    /// Notes about checks that can only falsify (custom `g`).
    pub notes: Vec<String>,
}

impl ValidationReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }

    fn push(&mut self, assumption: Assumption, detail: String, witness: f64, sampled: bool) {
        self.violations.push(Violation { assumption, detail, witness, sampled });
    }
}

/// Probe used for `lim g'(-inf)` when `g` is user supplied.
pub const SLOPE_PROBE: f64 = -1e6;

fn sample_grid() -> impl Iterator<Item = f64> {
    (0..=400).map(|i| -100.0 + 0.5 * i as f64).chain([-1e-6, 1e-6])
}

/// Checks every assumption the solver relies on and returns all violations.
pub fn validate(params: &ModelParams, g: &HoldingCost) -> ValidationReport {
    let mut report = ValidationReport::default();
    let positive = [
        ("mu", params.drift),
        ("sigma", params.volatility),
        ("beta", params.discount),
        ("Q", params.threshold),
        ("K1", params.setup_low),
    ];
    for (name, value) in positive {
        if !(value > 0.0 && value.is_finite()) {
            report.push(
                Assumption::Parameters,
                format!("{name} must be positive and finite, got {value}"),
                value,
                false,
            );
        }
    }
    if !(params.unit_cost >= 0.0 && params.unit_cost.is_finite()) {
        report.push(
            Assumption::Parameters,
            format!("k must be non-negative, got {}", params.unit_cost),
            params.unit_cost,
            false,
        );
    }
    if !(params.setup_low < params.setup_high) {
        report.push(
            Assumption::SetupCosts,
            format!("need K1 < K2, got K1 = {}, K2 = {}", params.setup_low, params.setup_high),
            params.setup_high,
            false,
        );
    }
    if !(params.setup_high <= 2.0 * params.setup_low) {
        report.push(
            Assumption::SetupCosts,
            format!("need K2 <= 2 K1, got K1 = {}, K2 = {}", params.setup_low, params.setup_high),
            params.setup_high,
            false,
        );
    }

    match g {
        HoldingCost::PiecewiseLinear { h, p } => {
            if !(*h > 0.0) {
                report.push(Assumption::A3, format!("g'(x) = h must be positive for x > 0, got h = {h}"), *h, false);
            }
            if !(*p > 0.0) {
                report.push(Assumption::A3, format!("g'(x) = -p must be negative for x < 0, got p = {p}"), *p, false);
            }
        }
        HoldingCost::Quadratic { alpha } => {
            if !(*alpha > 0.0) {
                report.push(Assumption::A1, format!("alpha must be positive, got {alpha}"), *alpha, false);
            }
        }
        HoldingCost::Custom(c) => {
            check_custom_shape(g, c, &mut report);
        }
    }

    // A4
    let threshold_ok = params.threshold > 0.0 && params.discount > 0.0;
    if threshold_ok {
        let rhs = -params.discount * params.setup_low / params.threshold;
        let (limit, sampled) = match g.slope_at_minus_infinity() {
            Some(l) => (l, false),
            None => (g.slope(SLOPE_PROBE), true),
        };
        let lhs = limit + params.discount * params.unit_cost;
        if !(lhs < rhs) {
            report.push(
                Assumption::A4,
                format!("lim g'(-inf) + beta k = {lhs} is not below -beta K1 / Q = {rhs}"),
                lhs,
                sampled,
            );
        }
    }
    report
}

fn check_custom_shape(g: &HoldingCost, c: &CustomCost, report: &mut ValidationReport) {
    report.notes.push(String::from(
        "custom g: A1-A3 and A5 checked by sampling on [-100, 100]; sampling can falsify but not prove them",
    ));
    let g0 = (c.value)(0.0);
    if g0.abs() > 1e-12 {
        report.push(Assumption::A1, format!("g(0) = {g0}, expected 0"), g0, true);
    }
    let mut previous_slope: Option<(f64, f64)> = None;
    let mut points: Vec<f64> = sample_grid().collect();
    points.sort_by(|a, b| a.partial_cmp(b).unwrap_or(core::cmp::Ordering::Equal));
    for x in points {
        if x == 0.0 {
            continue;
        }
        let slope = g.slope(x);
        let curvature = g.curvature(x);
        if !(slope.is_finite() && curvature.is_finite()) {
            report.push(Assumption::A2, format!("g' or g'' not finite at {x}"), x, true);
            continue;
        }
        if curvature < -1e-12 {
            report.push(Assumption::A1, format!("g''({x}) = {curvature} < 0"), x, true);
        }
        if let Some((px, ps)) = previous_slope {
            if slope < ps - 1e-12 {
                report.push(Assumption::A1, format!("g' decreases between {px} and {x}"), x, true);
            }
        }
        previous_slope = Some((x, slope));
        if x < 0.0 && !(slope < 0.0) {
            report.push(Assumption::A3, format!("g'({x}) = {slope} is not negative"), x, true);
        }
        if x > 0.0 && !(slope > 0.0) {
            report.push(Assumption::A3, format!("g'({x}) = {slope} is not positive"), x, true);
        }
        let value = (c.value)(x);
        if value > c.growth.eval(x) {
            report.push(Assumption::A5, format!("g({x}) = {value} exceeds the growth witness"), x, true);
        }
    }
    if c.slope_left_of_zero > c.slope_right_of_zero {
        report.push(
            Assumption::A1,
            format!("g'(0-) = {} exceeds g'(0+) = {}", c.slope_left_of_zero, c.slope_right_of_zero),
            c.slope_left_of_zero,
            false,
        );
    }
    if !(c.growth.a > 0.0 && c.growth.b > 0.0 && c.growth.n >= 1) {
        report.push(
            Assumption::A5,
            format!("growth witness needs a > 0, b > 0, n >= 1, got ({}, {}, {})", c.growth.a, c.growth.b, c.growth.n),
            c.growth.b,
            false,
        );
    }
}
