//! Characteristic roots, the `Lambda` integrals, the band objective `A(s, S)`,
//! and the continuation value family `v_A` with its first three derivatives.
//!
//! Writing `c = 2 / (sigma^2 (lambda1 + lambda2))` and `e(x) = exp(-lambda2 x)`,
//!
//! ```text
//! v_A(x)    = c [Lambda1 + Lambda2 - A e / lambda2^2]
//! v_A'(x)   = c [lambda1 Lambda1 - lambda2 Lambda2 + A e / lambda2]
//! v_A''(x)  = c [lambda1^2 Lambda1 + lambda2^2 Lambda2 - (lambda1 + lambda2) g - A e]
//! v_A'''(x) = c [lambda1^3 Lambda1 - lambda2^3 Lambda2 - (lambda1^2 - lambda2^2) g
//!                - (lambda1 + lambda2) g' + lambda2 A e]
//! ```
//!
//! which follow from `Lambda1' = lambda1 Lambda1 - g` and `Lambda2' = g - lambda2 Lambda2`.

use crate::error::{Error, Result};
use crate::math::{exp, expm1, sqrt};
use crate::model::{HalfLinePolys, HoldingCost, Model, ModelParams};
use crate::quadrature::Quadrature;
use crate::roots::{bisect, expand, DEFAULT_XTOL};

/// Roots of `sigma^2/2 r^2 - mu r - beta = 0`, stored as `lambda1` and `lambda2`
/// with the root `-lambda2` taken positive.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Roots {
    pub lambda1: f64,
    pub lambda2: f64,
}

impl Roots {
    pub fn new(params: &ModelParams) -> Self {
        let (mu, s2, beta) = (params.drift, params.volatility * params.volatility, params.discount);
        let disc = sqrt(mu * mu + 2.0 * beta * s2);
        let lambda1 = (mu + disc) / s2;
        // Equal to (disc - mu) / s2 without the cancellation when mu >> beta sigma^2.
        let lambda2 = 2.0 * beta / (mu + disc);
        Roots { lambda1, lambda2 }
    }
}

/// `(A_low, A_high)`: every optimal band objective lies strictly between them.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ABounds {
    pub a_low: f64,
    pub a_high: f64,
}

impl ABounds {
    pub fn contains(&self, a: f64) -> bool {
        a > self.a_low && a < self.a_high
    }
}

/// How the `Lambda` integrals are evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Backend {
    /// Closed forms for the piecewise-polynomial built-in costs, quadrature otherwise.
    Auto,
    /// Always integrate numerically.
    Quadrature,
}

/// Smallest band width `big_a` accepts.
pub const MIN_BAND_WIDTH: f64 = 1e-12;

/// How far left `x_star` searches for a sign change of `v_A''`.
pub const X_STAR_SEARCH_LIMIT: f64 = 1e6;

/// Evaluator for every analytic function of one model.
#[derive(Debug, Clone)]
pub struct Kernel {
    model: Model,
    roots: Roots,
    c: f64,
    bounds: ABounds,
    quadrature: Quadrature,
    polys: Option<HalfLinePolys>,
}

impl Kernel {
    pub fn new(model: &Model) -> Result<Self> {
        Self::with_backend(model, Backend::Auto, Quadrature::default())
    }

    pub fn with_backend(model: &Model, backend: Backend, quadrature: Quadrature) -> Result<Self> {
        let roots = Roots::new(&model.params);
        let s2 = model.params.volatility * model.params.volatility;
        let c = 2.0 / (s2 * (roots.lambda1 + roots.lambda2));
        let polys = match backend {
            Backend::Auto => model.holding.half_line_polys(),
            Backend::Quadrature => None,
        };
        let mut kernel =
            Kernel { model: model.clone(), roots, c, bounds: ABounds { a_low: 0.0, a_high: 0.0 }, quadrature, polys };
        kernel.bounds = kernel.compute_bounds()?;
        Ok(kernel)
    }

    /// Same kernel for a different quantity threshold; nothing analytic depends on `Q`.
    pub fn with_threshold(&self, threshold: f64) -> Self {
        let mut k = self.clone();
        k.model.params.threshold = threshold;
        k
    }

    pub fn model(&self) -> &Model {
        &self.model
    }

    pub fn params(&self) -> &ModelParams {
        &self.model.params
    }

    pub fn holding(&self) -> &HoldingCost {
        &self.model.holding
    }

    pub fn roots(&self) -> Roots {
        self.roots
    }

    pub fn a_bounds(&self) -> ABounds {
        self.bounds
    }

    /// `2 / (sigma^2 (lambda1 + lambda2))`.
    pub fn scale(&self) -> f64 {
        self.c
    }

    fn compute_bounds(&self) -> Result<ABounds> {
        let Roots { lambda1: l1, lambda2: l2 } = self.roots;
        if let Some(p) = self.polys {
            // A_low = l2 int_{-inf}^0 e^{l2 y} g'(y) dy with g' = c1 + 2 c2 y on the left.
            let a_low = p.left[1] - 2.0 * p.left[2] / l2;
            let a_high = p.right[1] + 2.0 * p.right[2] / l1;
            return Ok(ABounds { a_low, a_high });
        }
        // Integrating by parts with g(0) = 0 turns both bounds into integrals of g itself,
        // which the growth witness controls.
        let g = &self.model.holding;
        let bound = g.growth_bound();
        let left = self.quadrature.integrate_tail(|y| exp(l2 * y) * g.value(y), 0.0, -1.0, l2, &bound, &[])?;
        let right = self.quadrature.integrate_tail(|y| exp(-l1 * y) * g.value(y), 0.0, 1.0, l1, &bound, &[])?;
        // `left` is oriented from 0 to -inf, hence the sign.
        Ok(ABounds { a_low: l2 * l2 * left, a_high: l1 * l1 * right })
    }

    /// `Lambda1(x) = int_x^inf e^{lambda1 (x - y)} g(y) dy`.
    pub fn cap_lambda1(&self, x: f64) -> Result<f64> {
        let l1 = self.roots.lambda1;
        match self.polys {
            Some(p) => Ok(closed_lambda1(&p, l1, x)),
            None => {
                let g = &self.model.holding;
                let bound = g.growth_bound();
                self.quadrature.integrate_tail(|y| exp(l1 * (x - y)) * g.value(y), x, 1.0, l1, &bound, &[0.0])
            }
        }
    }

    /// `Lambda2(x) = int_0^x e^{-lambda2 (x - y)} g(y) dy`, oriented (negative range for `x < 0`).
    pub fn cap_lambda2(&self, x: f64) -> Result<f64> {
        let l2 = self.roots.lambda2;
        match self.polys {
            Some(p) => Ok(closed_lambda2(&p, l2, x)),
            None => {
                let g = &self.model.holding;
                self.quadrature.integrate(|y| exp(-l2 * (x - y)) * g.value(y), 0.0, x)
            }
        }
    }

    fn lambdas(&self, x: f64) -> Result<(f64, f64)> {
        Ok((self.cap_lambda1(x)?, self.cap_lambda2(x)?))
    }

    /// Band objective `A(s, S)` for setup cost `setup`.
    pub fn big_a(&self, s: f64, big_s: f64, setup: f64) -> Result<f64> {
        if !(big_s - s >= MIN_BAND_WIDTH) {
            return Err(Error::DegenerateBand { reorder: s, order_up_to: big_s });
        }
        let (b1, b2) = self.lambdas(s)?;
        let (a1, a2) = self.lambdas(big_s)?;
        Ok(self.big_a_from_sums(s, b1 + b2, big_s, a1 + a2, setup))
    }

    /// `Lambda1 + Lambda2` at `x`.
    pub fn lambda_sum(&self, x: f64) -> Result<f64> {
        let (m1, m2) = self.lambdas(x)?;
        Ok(m1 + m2)
    }

    /// `big_a` given precomputed `lambda_sum` values at both edges; no width check.
    pub fn big_a_from_sums(&self, s: f64, sum_s: f64, big_s: f64, sum_big_s: f64, setup: f64) -> f64 {
        let l2 = self.roots.lambda2;
        let width = big_s - s;
        let numerator = sum_big_s - sum_s + (setup + self.model.params.unit_cost * width) / self.c;
        // e^{-l2 S} - e^{-l2 s} = -e^{-l2 S} (e^{l2 (S - s)} - 1)
        let denominator = -exp(-l2 * big_s) * expm1(l2 * width);
        l2 * l2 * numerator / denominator
    }

    pub fn v(&self, a: f64, x: f64) -> Result<f64> {
        let Roots { lambda2: l2, .. } = self.roots;
        let (m1, m2) = self.lambdas(x)?;
        Ok(self.c * (m1 + m2 - a * exp(-l2 * x) / (l2 * l2)))
    }

    pub fn dv(&self, a: f64, x: f64) -> Result<f64> {
        let Roots { lambda1: l1, lambda2: l2 } = self.roots;
        let (m1, m2) = self.lambdas(x)?;
        Ok(self.c * (l1 * m1 - l2 * m2 + a * exp(-l2 * x) / l2))
    }

    pub fn d2v(&self, a: f64, x: f64) -> Result<f64> {
        let Roots { lambda1: l1, lambda2: l2 } = self.roots;
        let (m1, m2) = self.lambdas(x)?;
        let g = self.model.holding.value(x);
        Ok(self.c * (l1 * l1 * m1 + l2 * l2 * m2 - (l1 + l2) * g - a * exp(-l2 * x)))
    }

    /// Third derivative; at the kink `x = 0` the right derivative `g'(0+)` is used.
    pub fn d3v(&self, a: f64, x: f64) -> Result<f64> {
        let Roots { lambda1: l1, lambda2: l2 } = self.roots;
        let (m1, m2) = self.lambdas(x)?;
        let g = self.model.holding.value(x);
        let dg = self.model.holding.slope(x);
        Ok(self.c
            * (l1 * l1 * l1 * m1 - l2 * l2 * l2 * m2 - (l1 * l1 - l2 * l2) * g - (l1 + l2) * dg
                + l2 * a * exp(-l2 * x)))
    }

    /// `(v, v', v'')` sharing one evaluation of the `Lambda` integrals.
    pub fn v_derivs(&self, a: f64, x: f64) -> Result<(f64, f64, f64)> {
        let Roots { lambda1: l1, lambda2: l2 } = self.roots;
        let (m1, m2) = self.lambdas(x)?;
        let e = a * exp(-l2 * x);
        let g = self.model.holding.value(x);
        let c = self.c;
        Ok((
            c * (m1 + m2 - e / (l2 * l2)),
            c * (l1 * m1 - l2 * m2 + e / l2),
            c * (l1 * l1 * m1 + l2 * l2 * m2 - (l1 + l2) * g - e),
        ))
    }

    /// `sigma^2/2 f'' - mu f' - beta f + g` for `f = v_A`.
    pub fn ode_residual(&self, a: f64, x: f64) -> Result<f64> {
        let p = &self.model.params;
        let (v, dv, d2v) = self.v_derivs(a, x)?;
        Ok(0.5 * p.volatility * p.volatility * d2v - p.drift * dv - p.discount * v + self.model.holding.value(x))
    }

    pub fn check_in_bounds(&self, a: f64) -> Result<()> {
        if self.bounds.contains(a) {
            Ok(())
        } else {
            Err(Error::OutOfRange { value: a, low: self.bounds.a_low, high: self.bounds.a_high })
        }
    }

    /// Unique minimiser of `v_A'`, the root of `v_A''` on the negative half-line.
    pub fn x_star(&self, a: f64) -> Result<f64> {
        self.check_in_bounds(a)?;
        let d2 = |x: f64| self.d2v(a, x);
        let (left, right) = expand("x_star bracket", |x| Ok(d2(x)? <= 0.0), 0.0, -1.0, X_STAR_SEARCH_LIMIT)?;
        bisect("x_star", d2, left, right, DEFAULT_XTOL)
    }
}

/// `sum_j p^{(j)}(x) / l^{j+1}` for `p = c0 + c1 x + c2 x^2`.
fn poly_series(p: &[f64; 3], x: f64, l: f64, alternating: bool) -> f64 {
    let d0 = p[0] + p[1] * x + p[2] * x * x;
    let d1 = p[1] + 2.0 * p[2] * x;
    let d2 = 2.0 * p[2];
    let sign = if alternating { -1.0 } else { 1.0 };
    d0 / l + sign * d1 / (l * l) + d2 / (l * l * l)
}

fn closed_lambda1(p: &HalfLinePolys, l1: f64, x: f64) -> f64 {
    if x >= 0.0 {
        poly_series(&p.right, x, l1, false)
    } else {
        let ex = exp(l1 * x);
        poly_series(&p.left, x, l1, false) - ex * poly_series(&p.left, 0.0, l1, false)
            + ex * poly_series(&p.right, 0.0, l1, false)
    }
}

fn closed_lambda2(p: &HalfLinePolys, l2: f64, x: f64) -> f64 {
    let side = if x >= 0.0 { &p.right } else { &p.left };
    poly_series(side, x, l2, true) - exp(-l2 * x) * poly_series(side, 0.0, l2, true)
}
