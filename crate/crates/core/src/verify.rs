//! Numerical verification of candidate value functions and of the band solver.
//!
//! A function `f` is a lower bound on the cost of every admissible policy when
//! `sigma^2/2 f'' - mu f' - beta f + g >= 0` off a finite kink set and
//! `f(x1) <= f(x2) + K(x2 - x1) + k (x2 - x1)` for all `x1 < x2`. The checks
//! here evaluate both conditions on grids and sampled pairs.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::kernel::Kernel;
use crate::solver::{Regime, RegimeReport, Subproblem};

/// Points closer than this to a declared kink are skipped by [`hjb_check`].
pub const KINK_RADIUS: f64 = 1e-6;
/// Tolerance on the generator inequality.
pub const HJB_TOL: f64 = 1e-7;
/// Tolerance on the intervention inequality.
pub const GAP_TOL: f64 = 1e-8;
/// Successive differences smaller than this count as flat.
pub const QUASICONVEX_TOL: f64 = 1e-10;
/// Seed of the default pair sampler.
pub const DEFAULT_PAIR_SEED: u64 = 0x5eed_ba5e;

const MAX_LISTED_VIOLATIONS: usize = 32;

/// A candidate value function with two derivatives off `kinks`.
pub trait ValueFunction {
    fn value(&self, x: f64) -> Result<f64>;
    fn slope(&self, x: f64) -> Result<f64>;
    fn curvature(&self, x: f64) -> Result<f64>;
    fn kinks(&self) -> Vec<f64>;
    /// Levels where the associated policy does not order.
    fn in_continuation(&self, x: f64) -> bool;
}

/// `v_A` on the whole line.
#[derive(Debug, Clone, Copy)]
pub struct ContinuationValue<'a> {
    pub kernel: &'a Kernel,
    pub a: f64,
}

impl ValueFunction for ContinuationValue<'_> {
    fn value(&self, x: f64) -> Result<f64> {
        self.kernel.v(self.a, x)
    }
    fn slope(&self, x: f64) -> Result<f64> {
        self.kernel.dv(self.a, x)
    }
    fn curvature(&self, x: f64) -> Result<f64> {
        self.kernel.d2v(self.a, x)
    }
    fn kinks(&self) -> Vec<f64> {
        alloc::vec![0.0]
    }
    fn in_continuation(&self, _x: f64) -> bool {
        true
    }
}

/// Discounted cost of a band policy.
#[derive(Debug, Clone, Copy)]
pub struct BandValue<'a> {
    kernel: &'a Kernel,
    reorder: f64,
    order_up_to: f64,
    a: f64,
}

impl<'a> BandValue<'a> {
    pub fn new(kernel: &'a Kernel, reorder: f64, order_up_to: f64) -> Result<Self> {
        let setup = kernel.params().setup_cost(order_up_to - reorder);
        let a = kernel.big_a(reorder, order_up_to, setup)?;
        Ok(BandValue { kernel, reorder, order_up_to, a })
    }
}

impl ValueFunction for BandValue<'_> {
    fn value(&self, x: f64) -> Result<f64> {
        if x > self.reorder {
            self.kernel.v(self.a, x)
        } else {
            let jump = self.order_up_to - x;
            Ok(self.kernel.v(self.a, self.order_up_to)? + self.kernel.params().order_cost(jump))
        }
    }
    fn slope(&self, x: f64) -> Result<f64> {
        if x > self.reorder {
            self.kernel.dv(self.a, x)
        } else {
            Ok(-self.kernel.params().unit_cost)
        }
    }
    fn curvature(&self, x: f64) -> Result<f64> {
        if x > self.reorder {
            self.kernel.d2v(self.a, x)
        } else {
            Ok(0.0)
        }
    }
    fn kinks(&self) -> Vec<f64> {
        alloc::vec![self.reorder, self.order_up_to - self.kernel.params().threshold, 0.0]
    }
    fn in_continuation(&self, x: f64) -> bool {
        x > self.reorder
    }
}

/// Discounted cost of the generalized policy.
#[derive(Debug, Clone, Copy)]
pub struct GeneralizedValue<'a> {
    kernel: &'a Kernel,
    s1: f64,
    big_s1: f64,
    s_low: f64,
    s_bar: f64,
    a: f64,
}

impl<'a> GeneralizedValue<'a> {
    pub fn new(kernel: &'a Kernel, report: &RegimeReport) -> Result<Self> {
        match (report.regime, report.generalized) {
            (Regime::S1PlusGeneralized, Some(g)) => Ok(GeneralizedValue {
                kernel,
                s1: report.sol1.reorder,
                big_s1: report.sol1.order_up_to,
                s_low: g.s_low,
                s_bar: g.s_bar,
                a: report.sol1.a_star,
            }),
            _ => Err(Error::RegimeError { a1: report.sol1.a_star, a2: report.sol2.a_star }),
        }
    }

    fn q(&self) -> f64 {
        self.kernel.params().threshold
    }
}

impl ValueFunction for GeneralizedValue<'_> {
    fn value(&self, x: f64) -> Result<f64> {
        let p = self.kernel.params();
        let (q, k) = (p.threshold, p.unit_cost);
        if x > self.s1 {
            self.kernel.v(self.a, x)
        } else if x > self.big_s1 - q {
            Ok(self.kernel.v(self.a, self.big_s1)? + p.setup_low + k * (self.big_s1 - x))
        } else if x >= self.s_low {
            Ok(self.kernel.v(self.a, x + q)? + p.setup_low + k * q)
        } else {
            Ok(self.kernel.v(self.a, self.s_bar)? + p.setup_high + k * (self.s_bar - x))
        }
    }
    fn slope(&self, x: f64) -> Result<f64> {
        let q = self.q();
        if x > self.s1 {
            self.kernel.dv(self.a, x)
        } else if x <= self.big_s1 - q && x >= self.s_low {
            self.kernel.dv(self.a, x + q)
        } else {
            Ok(-self.kernel.params().unit_cost)
        }
    }
    fn curvature(&self, x: f64) -> Result<f64> {
        let q = self.q();
        if x > self.s1 {
            self.kernel.d2v(self.a, x)
        } else if x <= self.big_s1 - q && x >= self.s_low {
            self.kernel.d2v(self.a, x + q)
        } else {
            Ok(0.0)
        }
    }
    fn kinks(&self) -> Vec<f64> {
        alloc::vec![self.s1, self.big_s1 - self.q(), self.s_low, 0.0, -self.q()]
    }
    fn in_continuation(&self, x: f64) -> bool {
        x > self.s1
    }
}

/// A value function given by closures; no continuation region is assumed.
pub struct ClosureValue<F, D, C> {
    pub f: F,
    pub df: D,
    pub d2f: C,
    pub kinks: Vec<f64>,
}

impl<F, D, C> ValueFunction for ClosureValue<F, D, C>
where
    F: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
    C: Fn(f64) -> f64,
{
    fn value(&self, x: f64) -> Result<f64> {
        Ok((self.f)(x))
    }
    fn slope(&self, x: f64) -> Result<f64> {
        Ok((self.df)(x))
    }
    fn curvature(&self, x: f64) -> Result<f64> {
        Ok((self.d2f)(x))
    }
    fn kinks(&self) -> Vec<f64> {
        self.kinks.clone()
    }
    fn in_continuation(&self, _x: f64) -> bool {
        false
    }
}

/// Outcome of one verification check.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CheckReport {
    pub check: String,
    pub pass: bool,
    pub evaluated: usize,
    pub violations: usize,
    /// Where the checked quantity is smallest (largest error for equalities).
    pub worst_point: f64,
    pub worst_value: f64,
    /// First few violating points, in evaluation order.
    pub violation_points: Vec<f64>,
    pub detail: String,
}

impl CheckReport {
    fn new(check: &str) -> Self {
        CheckReport {
            check: String::from(check),
            pass: true,
            evaluated: 0,
            violations: 0,
            worst_point: f64::NAN,
            worst_value: f64::INFINITY,
            violation_points: Vec::new(),
            detail: String::new(),
        }
    }

    fn violate(&mut self, x: f64) {
        self.pass = false;
        self.violations += 1;
        if self.violation_points.len() < MAX_LISTED_VIOLATIONS {
            self.violation_points.push(x);
        }
    }
}

/// Generator residual `sigma^2/2 f'' - mu f' - beta f + g` at `x`.
pub fn generator_residual<V: ValueFunction + ?Sized>(kernel: &Kernel, f: &V, x: f64) -> Result<f64> {
    let p = kernel.params();
    let half_var = 0.5 * p.volatility * p.volatility;
    Ok(half_var * f.curvature(x)? - p.drift * f.slope(x)? - p.discount * f.value(x)? + kernel.holding().value(x))
}

/// Checks the generator inequality on `grid`, and equality on the continuation region.
pub fn hjb_check<V: ValueFunction + ?Sized>(kernel: &Kernel, f: &V, grid: &[f64]) -> Result<CheckReport> {
    let mut report = CheckReport::new("hjb");
    let kinks = f.kinks();
    let mut worst_equality: f64 = 0.0;
    for &x in grid {
        if kinks.iter().any(|k| (x - k).abs() < KINK_RADIUS) {
            continue;
        }
        let r = generator_residual(kernel, f, x)?;
        report.evaluated += 1;
        if r < report.worst_value {
            report.worst_value = r;
            report.worst_point = x;
        }
        let continuation = f.in_continuation(x);
        if continuation {
            worst_equality = worst_equality.max(r.abs());
        }
        if r < -HJB_TOL || (continuation && r.abs() > HJB_TOL) || !r.is_finite() {
            report.violate(x);
        }
    }
    report.detail = format!(
        "min residual {:.3e}; max |residual| on continuation region {:.3e}",
        report.worst_value, worst_equality
    );
    Ok(report)
}

/// Deterministic generator of ordered pairs `x1 < x2`, concentrated around
/// `anchors` (branch points of the candidate) and around jumps of exactly `threshold`.
#[derive(Debug, Clone)]
pub struct PairSampler {
    pub seed: u64,
    pub anchors: Vec<f64>,
    pub spread: f64,
    pub threshold: f64,
}

impl PairSampler {
    pub fn new(anchors: Vec<f64>, spread: f64, threshold: f64) -> Self {
        PairSampler { seed: DEFAULT_PAIR_SEED, anchors, spread, threshold }
    }

    pub fn pairs(&self, n: usize) -> Vec<(f64, f64)> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let anchors: &[f64] = if self.anchors.is_empty() { &[0.0] } else { &self.anchors };
        let w = self.spread;
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            let anchor = anchors[(i / 4) % anchors.len()];
            let u: f64 = rng.random();
            let v: f64 = rng.random();
            let (x1, x2) = match i % 4 {
                0 => {
                    let x1 = anchor + w * (2.0 * u - 1.0);
                    (x1, x1 + 2.0 * w * v)
                }
                1 => {
                    // Jumps just below, at, and just above the threshold.
                    let x1 = anchor + 0.5 * w * (2.0 * u - 1.0);
                    (x1, x1 + self.threshold + 2e-3 * (v - 0.5))
                }
                2 => {
                    let x2 = anchor + w * (2.0 * u - 1.0);
                    (x2 - 2.0 * w * v, x2)
                }
                _ => {
                    let other = anchors[(i / 4 + 1 + (v * anchors.len() as f64) as usize) % anchors.len()];
                    let a = anchor + 1e-4 * (2.0 * u - 1.0);
                    (a.min(other), a.max(other))
                }
            };
            if x2 > x1 {
                out.push((x1, x2));
            } else {
                out.push((x1, x1 + w * (1.0 + u)));
            }
        }
        out
    }
}

/// Checks `f(x2) - f(x1) >= -K(x2 - x1) - k (x2 - x1)` on sampled pairs.
pub fn intervention_gap_check<V: ValueFunction + ?Sized>(
    kernel: &Kernel,
    f: &V,
    sampler: &PairSampler,
    n_pairs: usize,
) -> Result<CheckReport> {
    let p = kernel.params();
    let mut report = CheckReport::new("intervention-gap");
    for (x1, x2) in sampler.pairs(n_pairs) {
        let margin = f.value(x2)? - f.value(x1)? + p.order_cost(x2 - x1);
        report.evaluated += 1;
        if margin < report.worst_value {
            report.worst_value = margin;
            report.worst_point = x1;
        }
        if margin < -GAP_TOL || !margin.is_finite() {
            report.violate(x1);
        }
    }
    report.detail = format!("min of f(x2) - f(x1) + K(x2 - x1) + k(x2 - x1) is {:.3e}", report.worst_value);
    Ok(report)
}

/// Best lattice point of an exhaustive search.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct OracleResult {
    pub reorder: f64,
    pub order_up_to: f64,
    pub a: f64,
    pub evaluated: usize,
}

fn lattice(range: (f64, f64), step: f64) -> Vec<i64> {
    let lo = libm::ceil(range.0.min(range.1) / step - 1e-9) as i64;
    let hi = libm::floor(range.0.max(range.1) / step + 1e-9) as i64;
    (lo..=hi).collect()
}

/// Maximises `A(s, S)` over lattice points `s = i step`, `S = j step` in the
/// given ranges subject to the width constraint of `which`.
pub fn grid_oracle(
    kernel: &Kernel,
    which: Subproblem,
    s_range: (f64, f64),
    big_s_range: (f64, f64),
    step: f64,
) -> Result<OracleResult> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::InvalidInput("oracle step must be positive"));
    }
    let p = kernel.params();
    let q_steps = p.threshold / step;
    let setup = match which {
        Subproblem::Floored => p.setup_high,
        Subproblem::Capped | Subproblem::Unconstrained => p.setup_low,
    };
    let small = lattice(s_range, step);
    let large = lattice(big_s_range, step);
    let sums = |idx: &[i64]| -> Result<Vec<f64>> { idx.iter().map(|&i| kernel.lambda_sum(i as f64 * step)).collect() };
    let small_sums = sums(&small)?;
    let large_sums = sums(&large)?;
    let mut best: Option<OracleResult> = None;
    let mut evaluated = 0;
    for (i, &n) in small.iter().enumerate() {
        for (j, &m) in large.iter().enumerate() {
            let width = (m - n) as f64;
            let feasible = width > 0.0
                && match which {
                    Subproblem::Capped => width <= q_steps + 1e-9,
                    Subproblem::Floored => width >= q_steps - 1e-9,
                    Subproblem::Unconstrained => true,
                };
            if !feasible {
                continue;
            }
            let (s, big_s) = (n as f64 * step, m as f64 * step);
            let a = kernel.big_a_from_sums(s, small_sums[i], big_s, large_sums[j], setup);
            evaluated += 1;
            if best.is_none_or(|b| a > b.a) {
                best = Some(OracleResult { reorder: s, order_up_to: big_s, a, evaluated: 0 });
            }
        }
    }
    best.map(|b| OracleResult { evaluated, ..b }).ok_or(Error::InvalidInput("oracle ranges contain no feasible band"))
}

/// Checks that `v_A'` decreases and then increases across `grid` (sorted ascending).
pub fn quasiconvexity_check(kernel: &Kernel, a: f64, grid: &[f64]) -> Result<CheckReport> {
    kernel.check_in_bounds(a)?;
    let mut report = CheckReport::new("quasi-convexity");
    let values = grid.iter().map(|&x| kernel.dv(a, x)).collect::<Result<Vec<_>>>()?;
    report.evaluated = values.len();
    let mut increasing = false;
    let mut changes = 0;
    for (i, w) in values.windows(2).enumerate() {
        let d = w[1] - w[0];
        if d > QUASICONVEX_TOL && !increasing {
            increasing = true;
            changes += 1;
        } else if d < -QUASICONVEX_TOL && increasing {
            changes += 1;
            report.violate(grid[i]);
        }
    }
    if let Some((i, v)) = values.iter().enumerate().min_by(|x, y| x.1.total_cmp(y.1)) {
        report.worst_point = grid[i];
        report.worst_value = *v;
    }
    report.detail =
        format!("{changes} sign change(s) of successive differences; grid minimiser {}", report.worst_point);
    Ok(report)
}
