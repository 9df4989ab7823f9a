//! Monte Carlo estimate of the discounted cost of a policy.

use impulse_band_core::quadrature::Quadrature;
use impulse_band_core::{Model, Policy};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimConfig {
    pub dt: f64,
    pub horizon: f64,
    pub n_paths: usize,
    pub master_seed: u64,
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(SimError::InvalidConfig("dt must be positive and finite"));
        }
        if !(self.horizon.is_finite() && self.horizon > 0.0) {
            return Err(SimError::InvalidConfig("horizon must be positive and finite"));
        }
        if self.dt > self.horizon {
            return Err(SimError::InvalidConfig("dt must not exceed the horizon"));
        }
        if self.n_paths == 0 {
            return Err(SimError::InvalidConfig("at least one path is required"));
        }
        Ok(())
    }

    pub fn steps(&self) -> usize {
        (self.horizon / self.dt - 1e-9).ceil() as usize
    }
}

/// Sample statistics of the discounted cost over `[0, horizon]`.
///
/// `tail_bound` bounds the discounted holding cost after the horizon;
/// ordering costs after the horizon are not included in it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimEstimate {
    pub mean: f64,
    pub std_err: f64,
    pub n_paths: usize,
    /// `exp(-beta T)`.
    pub tail_factor: f64,
    pub tail_bound: f64,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SimError {
    #[error("invalid simulation config: {0}")]
    InvalidConfig(&'static str),
    #[error("invalid starting level: {0}")]
    InvalidStart(f64),
    #[error("tail bound integration failed: {0}")]
    Tail(impulse_band_core::Error),
}

/// Discounted cost of one path; path `index` draws from its own ChaCha stream.
///
/// A step that carries the level from above the trigger to at or below it
/// places the order the policy prescribes at the trigger, and the overshoot
/// below the trigger is carried over the jump.
pub fn simulate_path(model: &Model, policy: &Policy, x0: f64, cfg: &SimConfig, index: u64) -> f64 {
    let p = &model.params;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.master_seed);
    rng.set_stream(index);
    let decay = (-p.discount * cfg.dt).exp();
    let drift = p.drift * cfg.dt;
    let shock = p.volatility * cfg.dt.sqrt();
    let mut z = x0;
    let mut cost = 0.0;
    let mut discount = 1.0;
    if let Some(y) = policy.order_up_to(z) {
        cost += p.order_cost(y - z);
        z = y;
    }
    let trigger = policy.trigger();
    for _ in 0..cfg.steps() {
        cost += discount * model.holding.value(z) * cfg.dt;
        let n: f64 = StandardNormal.sample(&mut rng);
        let before = z;
        z += -drift + shock * n;
        discount *= decay;
        let level = if before > trigger && z <= trigger { trigger } else { z };
        if let Some(y) = policy.order_up_to(level) {
            cost += discount * p.order_cost(y - level);
            z = y + (z - level);
        }
    }
    cost
}

pub fn simulate_dc(model: &Model, policy: &Policy, x0: f64, cfg: &SimConfig) -> Result<SimEstimate, SimError> {
    cfg.validate()?;
    if !x0.is_finite() {
        return Err(SimError::InvalidStart(x0));
    }
    let costs: Vec<f64> =
        (0..cfg.n_paths as u64).into_par_iter().map(|i| simulate_path(model, policy, x0, cfg, i)).collect();
    let n = costs.len() as f64;
    let mean = pairwise_sum(&costs) / n;
    let deviations: Vec<f64> = costs.iter().map(|c| (c - mean) * (c - mean)).collect();
    let variance = if costs.len() > 1 { pairwise_sum(&deviations) / (n - 1.0) } else { 0.0 };
    Ok(SimEstimate {
        mean,
        std_err: (variance / n).sqrt(),
        n_paths: cfg.n_paths,
        tail_factor: (-model.params.discount * cfg.horizon).exp(),
        tail_bound: tail_bound(model, policy, x0, cfg.horizon)?,
    })
}

pub fn pairwise_sum(values: &[f64]) -> f64 {
    match values.len() {
        0 => 0.0,
        n if n <= 8 => values.iter().sum(),
        n => {
            let (left, right) = values.split_at(n / 2);
            pairwise_sum(left) + pairwise_sum(right)
        }
    }
}

/// `(E sup_{u <= t} |B_u|^n)^{1/n} <= c_n sqrt(t)` by Doob's inequality
/// (through the second moment when `n < 2`).
fn doob_constant(n: u32) -> f64 {
    if n < 2 {
        return 2.0;
    }
    // E|N|^n from E|N|^0 = 1, E|N| = sqrt(2/pi), E|N|^n = (n - 1) E|N|^(n-2).
    let even = n.is_multiple_of(2);
    let mut moment = if even { 1.0 } else { (2.0 / std::f64::consts::PI).sqrt() };
    let mut m = if even { 2 } else { 3 };
    while m <= n {
        moment *= (m - 1) as f64;
        m += 2;
    }
    let n = n as f64;
    n / (n - 1.0) * moment.powf(1.0 / n)
}

/// Bounds `|E int_T^inf e^{-beta t} g(Z_t) dt|` using `|g(x)| <= a + b |x|^n`.
///
/// Orders only raise the level and never above `U = max(x0, max_target)`, so
/// `|Z_t| <= R + mu t + 2 sigma sup_{u <= t} |B_u|` with `R = max(|x0|, |U|)`;
/// Minkowski and Doob then bound the `n`-th moment.
pub fn tail_bound(model: &Model, policy: &Policy, x0: f64, horizon: f64) -> Result<f64, SimError> {
    let p = &model.params;
    let bound = model.holding.growth_bound();
    let upper = x0.max(policy.max_target(x0));
    let radius = x0.abs().max(upper.abs());
    let c = doob_constant(bound.n);
    let moment = |t: f64| {
        let norm = radius + p.drift * t + 2.0 * p.volatility * c * t.sqrt();
        bound.a + bound.b * norm.powi(bound.n as i32)
    };
    // t = T + u / ((1 - u) beta) maps [0, 1) onto [T, inf).
    let beta = p.discount;
    let integrand = |u: f64| {
        let w = 1.0 - u;
        let t = horizon + u / (w * beta);
        (-beta * t).exp() * moment(t) / (beta * w * w)
    };
    Quadrature::default().integrate(integrand, 0.0, 1.0).map_err(SimError::Tail)
}
