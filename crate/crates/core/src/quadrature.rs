//! Globally adaptive Gauss-Kronrod (7/15) quadrature, with truncation of
//! semi-infinite integrals whose integrand is an exponential kernel times a
//! polynomially bounded function.

#![allow(clippy::excessive_precision)]

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math::{exp, powi};

// Kronrod abscissae on [0, 1] (symmetric), QUADPACK qk15.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.000_000_000_000_000_000_000_000_000_000_000,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

// Gauss weights for the odd-indexed Kronrod nodes (XGK[1], XGK[3], ...).
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Tolerances for adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for Quadrature {
    fn default() -> Self {
        Quadrature { rel_tol: 1e-10, abs_tol: 1e-12, max_subdivisions: 500 }
    }
}

/// `g(x) <= a + b |x|^n`, the growth witness used to truncate tails.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PolyBound {
    pub a: f64,
    pub b: f64,
    pub n: u32,
}

impl PolyBound {
    pub fn eval(&self, x: f64) -> f64 {
        self.a + self.b * powi(x.abs(), self.n)
    }
}

#[derive(Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(center - dx) + f(center + dx);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    let value = kronrod * half;
    let error = ((kronrod - gauss) * half).abs();
    (value, error)
}

impl Quadrature {
    /// Integral of `f` over `[a, b]` (oriented: `b < a` flips the sign).
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F, a: f64, b: f64) -> Result<f64> {
        if a == b {
            return Ok(0.0);
        }
        if b < a {
            return self.integrate(f, b, a).map(|v| -v);
        }
        let (value, error) = gk15(&f, a, b);
        let mut segments: Vec<Segment> = Vec::with_capacity(16);
        segments.push(Segment { a, b, value, error });
        let mut total = value;
        let mut total_error = error;
        while total_error > self.abs_tol.max(self.rel_tol * total.abs()) {
            if segments.len() >= self.max_subdivisions {
                return Err(Error::QuadratureFailure { lower: a, upper: b, error_estimate: total_error });
            }
            let (worst, _) = segments.iter().enumerate().fold((0, f64::NEG_INFINITY), |acc, (i, s)| {
                if s.error > acc.1 {
                    (i, s.error)
                } else {
                    acc
                }
            });
            let seg = segments.swap_remove(worst);
            let mid = 0.5 * (seg.a + seg.b);
            if mid <= seg.a || mid >= seg.b {
                return Err(Error::QuadratureFailure { lower: a, upper: b, error_estimate: total_error });
            }
            let (lv, le) = gk15(&f, seg.a, mid);
            let (rv, re) = gk15(&f, mid, seg.b);
            segments.push(Segment { a: seg.a, b: mid, value: lv, error: le });
            segments.push(Segment { a: mid, b: seg.b, value: rv, error: re });
            // Re-sum rather than update incrementally to avoid drift.
            total = segments.iter().map(|s| s.value).sum();
            total_error = segments.iter().map(|s| s.error).sum();
        }
        if !total.is_finite() {
            return Err(Error::QuadratureFailure { lower: a, upper: b, error_estimate: total_error });
        }
        Ok(total)
    }

    /// Integral over `[a, b]` split at the given interior breakpoints.
    pub fn integrate_with_breaks<F: Fn(f64) -> f64>(&self, f: F, a: f64, b: f64, breaks: &[f64]) -> Result<f64> {
        let (lo, hi, sign) = if a <= b { (a, b, 1.0) } else { (b, a, -1.0) };
        let mut cuts: Vec<f64> = Vec::with_capacity(breaks.len() + 2);
        cuts.push(lo);
        for &c in breaks {
            if c > lo && c < hi {
                cuts.push(c);
            }
        }
        cuts.push(hi);
        cuts.sort_by(|x, y| x.partial_cmp(y).unwrap_or(core::cmp::Ordering::Equal));
        let mut total = 0.0;
        for w in cuts.windows(2) {
            total += self.integrate(&f, w[0], w[1])?;
        }
        Ok(sign * total)
    }

    /// Length `L` past which `exp(-rate u) * bound(|start| + u)` stays below
    /// `abs_tol / 10`.
    pub fn tail_length(&self, rate: f64, start: f64, bound: &PolyBound) -> f64 {
        let cutoff = self.abs_tol / 10.0;
        let envelope = |u: f64| exp(-rate * u) * bound.eval(start.abs() + u);
        // The envelope is decreasing once u > n / rate.
        let mut u = (bound.n as f64 / rate).max(1.0);
        while envelope(u) >= cutoff && u < 1e9 {
            u *= 1.5;
        }
        u
    }

    /// Oriented `int_start^{start + direction * inf} f(y) dy` where `|f(y)| <= exp(-rate |y - start|) * bound(y)`,
    /// truncated by [`Quadrature::tail_length`]. `direction` is `+1.0` or `-1.0`.
    pub fn integrate_tail<F: Fn(f64) -> f64>(
        &self,
        f: F,
        start: f64,
        direction: f64,
        rate: f64,
        bound: &PolyBound,
        breaks: &[f64],
    ) -> Result<f64> {
        let length = self.tail_length(rate, start, bound);
        let end = start + direction * length;
        // Chop long ranges so the kernel's decay is resolved.
        let chunk = (4.0 / rate).max(1.0);
        let pieces = libm::ceil(length / chunk).clamp(1.0, 4096.0) as usize;
        let mut cuts: Vec<f64> = Vec::with_capacity(pieces + breaks.len());
        for i in 1..pieces {
            cuts.push(start + direction * (i as f64) * length / pieces as f64);
        }
        cuts.extend_from_slice(breaks);
        self.integrate_with_breaks(&f, start, end, &cuts)
    }
}
