//! Command implementations shared by the binary and the test suites.

use impulse_band_core::policy::{compare as compare_costs, dc_band, dc_policy, CompareRow};
use impulse_band_core::solver::{assemble_sweep, check_q_grid, classify};
use impulse_band_core::verify::{
    grid_oracle, hjb_check, intervention_gap_check, quasiconvexity_check, BandValue, CheckReport, GeneralizedValue,
    PairSampler, ValueFunction,
};
use impulse_band_core::{Kernel, Model, Policy, QSweep, Regime, RegimeReport, Subproblem};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::ModelConfig;
use crate::error::AppError;
use crate::simulate::{simulate_dc, SimConfig, SimEstimate};

/// Thresholds `min, min + step, ...` up to `max` (inclusive within rounding).
pub fn q_grid(min: f64, max: f64, step: f64) -> Result<Vec<f64>, AppError> {
    if !(step.is_finite() && step > 0.0) {
        return Err(AppError::Invalid(format!("q step must be positive, got {step}")));
    }
    if !(min.is_finite() && max.is_finite() && min > 0.0 && max >= min) {
        return Err(AppError::Invalid(format!("need 0 < q-min <= q-max, got {min}..{max}")));
    }
    let count = ((max - min) / step + 1e-9).floor() as usize + 1;
    Ok((0..count).map(|i| min + step * i as f64).collect())
}

/// Model at threshold `q`, rejected when it violates an assumption.
pub fn validated_model(cfg: &ModelConfig, q: Option<f64>) -> Result<Model, AppError> {
    let model = cfg.model(q)?;
    let report = model.validate();
    if report.ok() {
        Ok(model)
    } else {
        Err(AppError::Validation(report))
    }
}

pub fn solve(cfg: &ModelConfig, q: Option<f64>) -> Result<(Kernel, RegimeReport), AppError> {
    let kernel = Kernel::new(&validated_model(cfg, q)?)?;
    let report = classify(&kernel)?;
    Ok((kernel, report))
}

/// Flat summary of a classification.
#[derive(Debug, Clone, Serialize)]
pub struct SolveOutput {
    pub regime: Regime,
    #[serde(rename = "Q")]
    pub q: f64,
    pub s1: f64,
    #[serde(rename = "S1")]
    pub big_s1: f64,
    pub a1_star: f64,
    pub s1_tight: bool,
    pub s2: f64,
    #[serde(rename = "S2")]
    pub big_s2: f64,
    pub a2_star: f64,
    pub s2_tight: bool,
    #[serde(rename = "Sbar")]
    pub s_bar: Option<f64>,
    pub s_low: Option<f64>,
    pub xi: Option<f64>,
    pub xi_nonneg: Option<bool>,
}

impl From<&RegimeReport> for SolveOutput {
    fn from(r: &RegimeReport) -> Self {
        SolveOutput {
            regime: r.regime,
            q: r.threshold,
            s1: r.sol1.reorder,
            big_s1: r.sol1.order_up_to,
            a1_star: r.sol1.a_star,
            s1_tight: r.sol1.boundary_tight,
            s2: r.sol2.reorder,
            big_s2: r.sol2.order_up_to,
            a2_star: r.sol2.a_star,
            s2_tight: r.sol2.boundary_tight,
            s_bar: r.generalized.map(|g| g.s_bar),
            s_low: r.generalized.map(|g| g.s_low),
            xi: r.generalized.map(|g| g.xi),
            xi_nonneg: r.generalized.map(|g| g.xi_nonneg),
        }
    }
}

/// Classifies every threshold in `q_values`, in parallel, keeping input order.
pub fn table(cfg: &ModelConfig, q_values: &[f64]) -> Result<QSweep, AppError> {
    check_q_grid(q_values)?;
    let reports =
        q_values.par_iter().map(|&q| solve(cfg, Some(q)).map(|(_, report)| report)).collect::<Result<Vec<_>, _>>()?;
    let kernel = Kernel::new(&validated_model(cfg, Some(q_values[0]))?)?;
    Ok(assemble_sweep(&kernel, &reports)?)
}

pub fn compare(cfg: &ModelConfig, q: Option<f64>, grid: &[f64]) -> Result<(RegimeReport, Vec<CompareRow>), AppError> {
    let (kernel, report) = solve(cfg, q)?;
    let rows = compare_costs(&kernel, &report, grid)?;
    Ok((report, rows))
}

/// `points` evenly spaced values from `lo` to `hi`.
pub fn linspace(lo: f64, hi: f64, points: usize) -> Result<Vec<f64>, AppError> {
    if !(lo.is_finite() && hi.is_finite() && lo < hi && points >= 2) {
        return Err(AppError::Invalid(format!(
            "need x-min < x-max and at least 2 points, got {lo}..{hi} with {points}"
        )));
    }
    Ok((0..points).map(|i| lo + (hi - lo) * i as f64 / (points - 1) as f64).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Check {
    Hjb,
    Gap,
    Quasiconvex,
    Oracle,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifySettings {
    pub pairs: usize,
    pub grid_points: usize,
    pub oracle_step: f64,
}

impl Default for VerifySettings {
    fn default() -> Self {
        VerifySettings { pairs: 10_000, grid_points: 2001, oracle_step: 0.01 }
    }
}

/// Levels at which the candidate value function changes branch.
pub fn anchors(report: &RegimeReport) -> Vec<f64> {
    let (s1, s2) = (&report.sol1, &report.sol2);
    let mut levels = vec![s1.reorder, s1.order_up_to, s2.reorder, s2.order_up_to, 0.0];
    if let Some(g) = report.generalized {
        levels.extend([g.s_low, s1.order_up_to - report.threshold, g.s_bar]);
    }
    levels
}

/// Grid covering every branch of the candidate with 10 units of margin.
pub fn check_grid(report: &RegimeReport, points: usize) -> Result<Vec<f64>, AppError> {
    let levels = anchors(report);
    let lo = levels.iter().copied().fold(f64::INFINITY, f64::min) - 10.0;
    let hi = levels.iter().copied().fold(f64::NEG_INFINITY, f64::max) + 10.0;
    linspace(lo, hi, points)
}

/// Runs `checks` against the value function the classification marks optimal.
pub fn verify(
    cfg: &ModelConfig,
    q: Option<f64>,
    checks: &[Check],
    settings: VerifySettings,
) -> Result<Vec<CheckReport>, AppError> {
    let (kernel, report) = solve(cfg, q)?;
    let grid = check_grid(&report, settings.grid_points)?;
    let candidate: Box<dyn ValueFunction + '_> = match report.regime {
        Regime::S2Everywhere => Box::new(BandValue::new(&kernel, report.sol2.reorder, report.sol2.order_up_to)?),
        Regime::S1PlusGeneralized => Box::new(GeneralizedValue::new(&kernel, &report)?),
    };
    let mut reports = Vec::new();
    for check in checks {
        match check {
            Check::Hjb => reports.push(hjb_check(&kernel, candidate.as_ref(), &grid)?),
            Check::Gap => {
                let sampler = PairSampler::new(anchors(&report), 8.0, report.threshold);
                reports.push(intervention_gap_check(&kernel, candidate.as_ref(), &sampler, settings.pairs)?);
            }
            Check::Quasiconvex => {
                for sol in [&report.sol1, &report.sol2] {
                    reports.push(quasiconvexity_check(&kernel, sol.a_star, &grid)?);
                }
            }
            Check::Oracle => {
                for sol in [&report.sol1, &report.sol2] {
                    reports.push(oracle_check(
                        &kernel,
                        sol.subproblem,
                        sol.reorder,
                        sol.order_up_to,
                        sol.a_star,
                        settings.oracle_step,
                    )?);
                }
            }
        }
    }
    Ok(reports)
}

/// Compares a solver band with the lattice maximiser on a window of one unit around it.
pub fn oracle_check(
    kernel: &Kernel,
    which: Subproblem,
    reorder: f64,
    order_up_to: f64,
    a_star: f64,
    step: f64,
) -> Result<CheckReport, AppError> {
    let found =
        grid_oracle(kernel, which, (reorder - 1.0, reorder + 1.0), (order_up_to - 1.0, order_up_to + 1.0), step)?;
    let error = (found.reorder - reorder).abs().max((found.order_up_to - order_up_to).abs());
    let pass = error <= step + 1e-9 && found.a <= a_star + 1e-12 * a_star.abs().max(1.0);
    Ok(CheckReport {
        check: format!("grid_oracle_{which:?}").to_lowercase(),
        pass,
        evaluated: found.evaluated,
        violations: usize::from(!pass),
        worst_point: found.reorder,
        worst_value: error,
        violation_points: if pass { Vec::new() } else { vec![found.reorder, found.order_up_to] },
        detail: format!(
            "lattice maximiser ({}, {}) with A = {}; solver ({reorder}, {order_up_to}) with A = {a_star}",
            found.reorder, found.order_up_to, found.a
        ),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PolicyChoice {
    /// The capped optimal band.
    Band1,
    /// The floored optimal band.
    Band2,
    Generalized,
    Band {
        reorder: f64,
        order_up_to: f64,
    },
}

#[derive(Debug, Clone, Serialize)]
pub struct SimulationOutput {
    pub policy: &'static str,
    pub levels: Vec<f64>,
    pub x0: f64,
    pub config: SimConfig,
    pub estimate: SimEstimate,
    /// Closed-form cost when the model satisfies the assumptions.
    pub closed_form: Option<f64>,
}

pub fn simulate(
    cfg: &ModelConfig,
    q: Option<f64>,
    choice: PolicyChoice,
    x0: f64,
    sim: &SimConfig,
) -> Result<SimulationOutput, AppError> {
    let model = cfg.model(q)?;
    let (policy, closed_form, name) = match choice {
        PolicyChoice::Band { reorder, order_up_to } => {
            let policy = Policy::band(reorder, order_up_to)?;
            let closed_form = if model.validate().ok() {
                Some(dc_band(&Kernel::new(&model)?, reorder, order_up_to, x0)?)
            } else {
                None
            };
            (policy, closed_form, "band")
        }
        optimal => {
            let (kernel, report) = solve(cfg, q)?;
            let (policy, name) = match optimal {
                PolicyChoice::Band1 => (Policy::band(report.sol1.reorder, report.sol1.order_up_to)?, "band1"),
                PolicyChoice::Band2 => (Policy::band(report.sol2.reorder, report.sol2.order_up_to)?, "band2"),
                _ => (Policy::from_report(&report)?, "generalized"),
            };
            let closed_form = dc_policy(&kernel, &policy, x0)?;
            (policy, Some(closed_form), name)
        }
    };
    let levels = match &policy {
        Policy::Band { reorder, order_up_to } => vec![*reorder, *order_up_to],
        Policy::Generalized { s1, big_s1, threshold, s_low, s_bar } => vec![*s1, *big_s1, *threshold, *s_low, *s_bar],
        Policy::Custom(_) => Vec::new(),
    };
    let estimate = simulate_dc(&model, &policy, x0, sim)?;
    Ok(SimulationOutput { policy: name, levels, x0, config: *sim, estimate, closed_form })
}
