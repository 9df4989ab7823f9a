//! The two constrained band problems, the generalized-policy levels, regime
//! classification and threshold sweeps.
//!
//! Each band problem is solved through its scalar objective `A`. For a
//! candidate `A` the band is read off `v_A'`: an unconstrained band has both
//! edges on the level set `v_A' = -k`, a band pinned at width `Q` has equal
//! slopes at both edges. In both cases the setup cost the band would need,
//! `v_A(s) - v_A(S) - k (S - s)`, is strictly decreasing in `A`, so the
//! optimal `A` is found by bisection against the actual setup cost.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::kernel::Kernel;
use crate::roots::{bisect, expand, DEFAULT_XTOL};

/// Search limit for the edges of a band away from `x_star`.
pub const EDGE_SEARCH_LIMIT: f64 = 1e6;

/// Maximum bisection steps on `A`.
pub const MAX_A_ITERATIONS: usize = 200;

/// Relative gap kept between the `A` bracket and `(A_low, A_high)`.
pub const A_BRACKET_MARGIN: f64 = 1e-9;

/// How many times the lower margin may shrink by a factor of 1000.
pub const MAX_MARGIN_SHRINKS: usize = 6;

/// Which constrained problem a band solves.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Subproblem {
    /// Orders of at most `Q`, setup `K1`.
    Capped,
    /// Orders of at least `Q`, setup `K2`.
    Floored,
    /// No width constraint, setup `K1`.
    Unconstrained,
}

/// Optimal band of one subproblem.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BandSolution {
    pub subproblem: Subproblem,
    pub reorder: f64,
    pub order_up_to: f64,
    pub a_star: f64,
    /// The width constraint `S - s = Q` is active.
    pub boundary_tight: bool,
    /// `v'(s) = v'(S)` at the optimum.
    pub smooth_paste: f64,
    pub setup: f64,
}

impl BandSolution {
    pub fn width(&self) -> f64 {
        self.order_up_to - self.reorder
    }
}

/// A band implied by a candidate `A` together with the setup cost that makes it optimal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImpliedBand {
    pub reorder: f64,
    pub order_up_to: f64,
    pub implied_setup: f64,
}

/// Edges of `{v_A' <= -k}` around `x_star(A)`; `None` when the set is empty.
pub fn level_set_edges(kernel: &Kernel, a: f64) -> Result<Option<(f64, f64)>> {
    let k = kernel.params().unit_cost;
    let x_star = kernel.x_star(a)?;
    let f = |x: f64| Ok(kernel.dv(a, x)? + k);
    if f(x_star)? > 0.0 {
        return Ok(None);
    }
    let (out_left, in_left) = expand("reorder level", |x| Ok(f(x)? >= 0.0), x_star, -1.0, EDGE_SEARCH_LIMIT)?;
    let s = bisect("reorder level", f, out_left, in_left, DEFAULT_XTOL)?;
    let (out_right, in_right) = expand("order-up-to level", |x| Ok(f(x)? >= 0.0), x_star, 1.0, EDGE_SEARCH_LIMIT)?;
    let big_s = bisect("order-up-to level", f, in_right, out_right, DEFAULT_XTOL)?;
    Ok(Some((s, big_s)))
}

/// Unconstrained band for `A` and the setup cost `kappa(A)` it implies (zero when empty).
pub fn implied_setup(kernel: &Kernel, a: f64) -> Result<ImpliedBand> {
    let k = kernel.params().unit_cost;
    match level_set_edges(kernel, a)? {
        None => {
            let x = kernel.x_star(a)?;
            Ok(ImpliedBand { reorder: x, order_up_to: x, implied_setup: 0.0 })
        }
        Some((s, big_s)) => {
            let kappa = kernel.v(a, s)? - kernel.v(a, big_s)? - k * (big_s - s);
            Ok(ImpliedBand { reorder: s, order_up_to: big_s, implied_setup: kappa })
        }
    }
}

/// Width-`width` band for `A` with equal slopes at both edges, and the setup cost it implies.
pub fn implied_setup_fixed_width(kernel: &Kernel, a: f64, width: f64) -> Result<ImpliedBand> {
    let k = kernel.params().unit_cost;
    let x_star = kernel.x_star(a)?;
    let s = bisect(
        "equal-slope band",
        |s| Ok(kernel.dv(a, s + width)? - kernel.dv(a, s)?),
        x_star - width,
        x_star,
        DEFAULT_XTOL,
    )?;
    let kappa = kernel.v(a, s)? - kernel.v(a, s + width)? - k * width;
    Ok(ImpliedBand { reorder: s, order_up_to: s + width, implied_setup: kappa })
}

/// Bisection on `A` for a strictly decreasing `f` with a root in `(A_low, A_high)`.
///
/// The lower end starts `A_BRACKET_MARGIN` (relative) above `A_low` and moves
/// closer while `f` is still non-positive there; the stopping width never
/// exceeds a millionth of the distance from `A_low`.
fn bisect_a<F>(what: &'static str, kernel: &Kernel, mut f: F) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let bounds = kernel.a_bounds();
    let mut delta = A_BRACKET_MARGIN * (bounds.a_high - bounds.a_low);
    let mut hi = bounds.a_high - delta;
    if !(f(hi)? < 0.0) {
        return Err(Error::NoBracket { what, lo: bounds.a_low + delta, hi });
    }
    let mut lo = bounds.a_low + delta;
    let mut shrinks = 0;
    while !(f(lo)? > 0.0) {
        delta *= 1e-3;
        let next = bounds.a_low + delta;
        shrinks += 1;
        if shrinks > MAX_MARGIN_SHRINKS || next <= bounds.a_low || next == lo {
            return Err(Error::NoBracket { what, lo, hi });
        }
        hi = lo;
        lo = next;
    }
    for _ in 0..MAX_A_ITERATIONS {
        let mid = 0.5 * (lo + hi);
        let tol = (1e-12 * mid.abs().max(1.0)).min(1e-6 * (lo - bounds.a_low));
        if hi - lo < tol || mid <= lo || mid >= hi {
            return Ok(mid);
        }
        let fm = f(mid)?;
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Err(Error::ConvergenceFailure { what, iterations: MAX_A_ITERATIONS })
}

fn interior(kernel: &Kernel, setup: f64, subproblem: Subproblem) -> Result<BandSolution> {
    let a = bisect_a("interior band objective", kernel, |a| Ok(implied_setup(kernel, a)?.implied_setup - setup))?;
    let band = implied_setup(kernel, a)?;
    finish(kernel, subproblem, a, band, setup, false)
}

fn boundary(kernel: &Kernel, setup: f64, subproblem: Subproblem) -> Result<BandSolution> {
    let q = kernel.params().threshold;
    let a = bisect_a("width-Q band objective", kernel, |a| {
        Ok(implied_setup_fixed_width(kernel, a, q)?.implied_setup - setup)
    })?;
    let band = implied_setup_fixed_width(kernel, a, q)?;
    finish(kernel, subproblem, a, band, setup, true)
}

fn finish(
    kernel: &Kernel,
    subproblem: Subproblem,
    a: f64,
    band: ImpliedBand,
    setup: f64,
    boundary_tight: bool,
) -> Result<BandSolution> {
    if !(band.order_up_to > band.reorder) {
        return Err(Error::DegenerateBand { reorder: band.reorder, order_up_to: band.order_up_to });
    }
    Ok(BandSolution {
        subproblem,
        reorder: band.reorder,
        order_up_to: band.order_up_to,
        a_star: a,
        boundary_tight,
        smooth_paste: kernel.dv(a, band.reorder)?,
        setup,
    })
}

/// Best band among those with `0 < S - s <= Q`, setup `K1`.
pub fn solve_op1(kernel: &Kernel) -> Result<BandSolution> {
    let p = kernel.params();
    let free = interior(kernel, p.setup_low, Subproblem::Capped)?;
    if free.width() <= p.threshold {
        Ok(free)
    } else {
        boundary(kernel, p.setup_low, Subproblem::Capped)
    }
}

/// Best band among those with `S - s >= Q`, setup `K2`.
pub fn solve_op2(kernel: &Kernel) -> Result<BandSolution> {
    let p = kernel.params();
    let free = interior(kernel, p.setup_high, Subproblem::Floored)?;
    if free.width() >= p.threshold {
        Ok(free)
    } else {
        boundary(kernel, p.setup_high, Subproblem::Floored)
    }
}

/// Best band with setup `K1` and no width constraint (the capped problem with `Q = inf`).
pub fn solve_unconstrained(kernel: &Kernel) -> Result<BandSolution> {
    interior(kernel, kernel.params().setup_low, Subproblem::Unconstrained)
}

fn require_generalized(sol1: &BandSolution, sol2: &BandSolution) -> Result<()> {
    if sol1.a_star <= sol2.a_star {
        Err(Error::RegimeError { a1: sol1.a_star, a2: sol2.a_star })
    } else {
        Ok(())
    }
}

/// Order-up-to level used below `s_low`: the root of `v_1' = -k` on `[S1, inf)`.
pub fn s_bar(kernel: &Kernel, sol1: &BandSolution, sol2: &BandSolution) -> Result<f64> {
    require_generalized(sol1, sol2)?;
    if !sol1.boundary_tight {
        return Ok(sol1.order_up_to);
    }
    let k = kernel.params().unit_cost;
    let a = sol1.a_star;
    let f = |x: f64| Ok(kernel.dv(a, x)? + k);
    let start = sol1.order_up_to;
    if f(start)? >= 0.0 {
        return Ok(start);
    }
    let (out, inside) = expand("S-bar", |x| Ok(f(x)? >= 0.0), start, 1.0, EDGE_SEARCH_LIMIT)?;
    bisect("S-bar", f, inside, out, DEFAULT_XTOL)
}

/// `H(x) = v_1(x + Q) + K1 + kQ - (v_1(S-bar) + K2 + k (S-bar - x))`.
pub fn indifference(kernel: &Kernel, sol1: &BandSolution, s_bar: f64, x: f64) -> Result<f64> {
    let p = kernel.params();
    let a = sol1.a_star;
    let small = kernel.v(a, x + p.threshold)? + p.setup_low + p.unit_cost * p.threshold;
    let large = kernel.v(a, s_bar)? + p.setup_high + p.unit_cost * (s_bar - x);
    Ok(small - large)
}

/// Level below which ordering up to `S-bar` beats ordering exactly `Q`.
pub fn s_low(kernel: &Kernel, sol1: &BandSolution, sol2: &BandSolution, s_bar: f64) -> Result<f64> {
    require_generalized(sol1, sol2)?;
    let q = kernel.params().threshold;
    bisect("s-low", |x| indifference(kernel, sol1, s_bar, x), sol1.reorder - q, sol1.order_up_to - q, DEFAULT_XTOL)
}

/// `Xi(s_low) = mu k + g(s_low) - beta (v_1(S-bar) + K2 + k (S-bar - s_low))`.
pub fn xi(kernel: &Kernel, sol1: &BandSolution, sol2: &BandSolution, s_bar: f64, s_low: f64) -> Result<f64> {
    require_generalized(sol1, sol2)?;
    let p = kernel.params();
    let jump = kernel.v(sol1.a_star, s_bar)? + p.setup_high + p.unit_cost * (s_bar - s_low);
    Ok(p.drift * p.unit_cost + kernel.holding().value(s_low) - p.discount * jump)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Regime {
    /// The floored band is optimal from every starting level.
    S2Everywhere,
    /// The capped band above `S1 - Q`, the generalized policy below.
    S1PlusGeneralized,
}

/// Levels of the generalized policy.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GeneralizedLevels {
    pub s_bar: f64,
    pub s_low: f64,
    pub xi: f64,
    pub xi_nonneg: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RegimeReport {
    pub regime: Regime,
    pub threshold: f64,
    pub sol1: BandSolution,
    pub sol2: BandSolution,
    pub generalized: Option<GeneralizedLevels>,
}

/// Solves both band problems and decides which regime applies.
pub fn classify(kernel: &Kernel) -> Result<RegimeReport> {
    let sol1 = solve_op1(kernel)?;
    let sol2 = solve_op2(kernel)?;
    let q = kernel.params().threshold;
    if sol1.a_star <= sol2.a_star {
        if !sol1.boundary_tight || sol2.width() <= q {
            return Err(Error::Inconsistent("A1* <= A2* requires a tight capped band and a floored band wider than Q"));
        }
        return Ok(RegimeReport { regime: Regime::S2Everywhere, threshold: q, sol1, sol2, generalized: None });
    }
    if !(sol1.reorder > sol2.reorder) {
        return Err(Error::Inconsistent("A1* > A2* requires s1 > s2"));
    }
    let s_bar = s_bar(kernel, &sol1, &sol2)?;
    let s_low = s_low(kernel, &sol1, &sol2, s_bar)?;
    let xi = xi(kernel, &sol1, &sol2, s_bar, s_low)?;
    Ok(RegimeReport {
        regime: Regime::S1PlusGeneralized,
        threshold: q,
        sol1,
        sol2,
        generalized: Some(GeneralizedLevels { s_bar, s_low, xi, xi_nonneg: xi >= 0.0 }),
    })
}

/// One row of a threshold sweep, in table column order.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct QSweepRow {
    pub q: f64,
    pub s1: f64,
    pub big_s1: f64,
    pub a1_star: f64,
    pub s2: f64,
    pub big_s2: f64,
    pub a2_star: f64,
    pub s_bar: Option<f64>,
    pub s_low: Option<f64>,
    pub xi: Option<f64>,
}

impl From<&RegimeReport> for QSweepRow {
    fn from(r: &RegimeReport) -> Self {
        QSweepRow {
            q: r.threshold,
            s1: r.sol1.reorder,
            big_s1: r.sol1.order_up_to,
            a1_star: r.sol1.a_star,
            s2: r.sol2.reorder,
            big_s2: r.sol2.order_up_to,
            a2_star: r.sol2.a_star,
            s_bar: r.generalized.map(|g| g.s_bar),
            s_low: r.generalized.map(|g| g.s_low),
            xi: r.generalized.map(|g| g.xi),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct QSweep {
    pub rows: Vec<QSweepRow>,
    /// Width of the unconstrained `K1` band.
    pub q_dagger: f64,
    /// Smallest swept threshold with `Xi >= 0`.
    pub first_nonneg_q: Option<f64>,
}

/// Checks that thresholds are positive, finite and strictly increasing.
pub fn check_q_grid(q_values: &[f64]) -> Result<()> {
    if q_values.is_empty() {
        return Err(Error::InvalidInput("threshold grid is empty"));
    }
    if q_values.iter().any(|q| !(q.is_finite() && *q > 0.0)) {
        return Err(Error::InvalidInput("thresholds must be positive and finite"));
    }
    if q_values.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidInput("thresholds must be strictly increasing"));
    }
    Ok(())
}

/// Assembles a sweep from reports already computed in input order.
pub fn assemble_sweep(kernel: &Kernel, reports: &[RegimeReport]) -> Result<QSweep> {
    let q_dagger = solve_unconstrained(kernel)?.width();
    let rows: Vec<QSweepRow> = reports.iter().map(QSweepRow::from).collect();
    let first_nonneg_q = reports.iter().find(|r| r.generalized.is_some_and(|g| g.xi_nonneg)).map(|r| r.threshold);
    Ok(QSweep { rows, q_dagger, first_nonneg_q })
}

/// Classifies the model at every threshold in `q_values`.
pub fn sweep_q(kernel: &Kernel, q_values: &[f64]) -> Result<QSweep> {
    check_q_grid(q_values)?;
    let reports = q_values.iter().map(|&q| classify(&kernel.with_threshold(q))).collect::<Result<Vec<_>>>()?;
    assemble_sweep(kernel, &reports)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{HoldingCost, Model, ModelParams};

    fn params(k: f64, q: f64) -> ModelParams {
        ModelParams {
            drift: 0.2,
            volatility: 0.6,
            discount: 0.01,
            unit_cost: k,
            setup_low: 4.0,
            setup_high: 7.0,
            threshold: q,
        }
    }

    fn linear(q: f64) -> Kernel {
        Kernel::new(&Model::new(params(0.85, q), HoldingCost::PiecewiseLinear { h: 0.08, p: 0.12 })).unwrap()
    }

    fn quadratic(q: f64) -> Kernel {
        Kernel::new(&Model::new(params(0.85, q), HoldingCost::Quadratic { alpha: 0.01 })).unwrap()
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    fn check_band(kernel: &Kernel, sol: &BandSolution) {
        let k = kernel.params().unit_cost;
        let a_check = kernel.big_a(sol.reorder, sol.order_up_to, sol.setup).unwrap();
        assert!(close(a_check, sol.a_star, 1e-8), "{a_check} vs {}", sol.a_star);
        let x = kernel.x_star(sol.a_star).unwrap();
        assert!(sol.reorder < x && x < sol.order_up_to);
        assert!(kernel.a_bounds().contains(sol.a_star));
        let right = kernel.dv(sol.a_star, sol.order_up_to).unwrap();
        assert!(close(sol.smooth_paste, right, 1e-8));
        match (sol.boundary_tight, sol.subproblem) {
            (false, _) => assert!(close(sol.smooth_paste, -k, 1e-8)),
            (true, Subproblem::Capped) => assert!(sol.smooth_paste <= -k + 1e-8),
            (true, _) => assert!(sol.smooth_paste >= -k - 1e-8),
        }
    }

    #[test]
    fn quadratic_capped_band() {
        let kernel = quadratic(5.0);
        let sol = solve_op1(&kernel).unwrap();
        check_band(&kernel, &sol);
        assert!(close(sol.reorder, -4.1887, 2e-3), "{sol:?}");
        assert!(close(sol.order_up_to, 0.8112, 2e-3));
        assert!(close(sol.a_star, -0.0175, 2e-4));
    }

    #[test]
    fn quadratic_floored_band() {
        let kernel = quadratic(10.0);
        let sol = solve_op2(&kernel).unwrap();
        check_band(&kernel, &sol);
        assert!(close(sol.reorder, -6.6377, 2e-3), "{sol:?}");
        assert!(close(sol.order_up_to, 3.3623, 2e-3));
        assert!(close(sol.a_star, -0.0194, 2e-4));
    }

    #[test]
    fn quadratic_generalized_levels() {
        let r = classify(&quadratic(6.0)).unwrap();
        let g = r.generalized.unwrap();
        assert!(close(g.s_bar, 2.5584, 2e-3), "{g:?}");
        let r = classify(&quadratic(5.0)).unwrap();
        assert!(close(r.generalized.unwrap().xi, 0.2060, 5e-3));
        let r = classify(&quadratic(4.0)).unwrap();
        assert_eq!(r.regime, Regime::S1PlusGeneralized);
        let g = r.generalized.unwrap();
        assert!(!g.xi_nonneg && close(g.xi, -0.0197, 5e-3), "{g:?}");
    }

    #[test]
    fn bands_are_consistent_across_thresholds() {
        for q in [1.0, 2.5, 4.0, 7.0, 10.0] {
            for kernel in [linear(q), quadratic(q)] {
                let r = classify(&kernel).unwrap();
                check_band(&kernel, &r.sol1);
                check_band(&kernel, &r.sol2);
                assert!(r.sol1.width() <= q + 1e-9);
                assert!(r.sol2.width() >= q - 1e-9);
                if let Some(g) = r.generalized {
                    assert!(g.s_bar >= r.sol1.order_up_to);
                    assert!(g.s_low >= r.sol1.reorder - q && g.s_low <= r.sol1.order_up_to - q);
                    let h = indifference(&kernel, &r.sol1, g.s_bar, g.s_low).unwrap();
                    assert!(h.abs() < 1e-8, "H = {h}");
                }
            }
        }
    }

    #[test]
    fn implied_setup_decreases_in_a() {
        let kernel = linear(3.0);
        let b = kernel.a_bounds();
        let mut previous = f64::INFINITY;
        for i in 1..40 {
            let a = b.a_low + (b.a_high - b.a_low) * i as f64 / 40.0;
            let kappa = implied_setup(&kernel, a).unwrap().implied_setup;
            assert!(kappa <= previous);
            if previous > 0.0 && kappa > 0.0 {
                assert!(kappa < previous);
            }
            previous = kappa;
        }
    }

    #[test]
    fn regime_functions_reject_s2_regime() {
        let kernel = linear(1.0);
        let r = classify(&kernel).unwrap();
        assert_eq!(r.regime, Regime::S2Everywhere);
        assert!(matches!(s_bar(&kernel, &r.sol1, &r.sol2), Err(Error::RegimeError { .. })));
        assert!(matches!(s_low(&kernel, &r.sol1, &r.sol2, 0.0), Err(Error::RegimeError { .. })));
        assert!(matches!(xi(&kernel, &r.sol1, &r.sol2, 0.0, 0.0), Err(Error::RegimeError { .. })));
    }

    #[test]
    fn q_grid_validation() {
        assert!(check_q_grid(&[1.0, 2.0]).is_ok());
        assert!(check_q_grid(&[2.0, 1.0]).is_err());
        assert!(check_q_grid(&[0.0, 1.0]).is_err());
        assert!(check_q_grid(&[]).is_err());
    }

    #[test]
    fn sweep_reports_q_dagger_and_first_nonnegative_xi() {
        let kernel = linear(1.0);
        let qs: Vec<f64> = (1..=10).map(f64::from).collect();
        let sweep = sweep_q(&kernel, &qs).unwrap();
        assert_eq!(sweep.rows.len(), 10);
        assert!(close(sweep.q_dagger, 6.0138, 1e-3), "{}", sweep.q_dagger);
        assert_eq!(sweep.first_nonneg_q, Some(4.0));
    }
}
