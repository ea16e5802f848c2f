//! Power-law fits of norm histories, the `ℓᵖ` decay exponents of the lattice
//! kernel, and their measured counterparts.

use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::kernel::kernel_row;

/// Fewest samples a fit accepts inside its window.
pub const MIN_FIT_SAMPLES: usize = 8;

/// Largest kernel row (in sites) `alpha_p_empirical` evaluates by default.
pub const DEFAULT_KERNEL_SITES: usize = 1 << 24;

/// Largest accepted ratio of boundary-band norm to row norm.
pub const TAIL_TOLERANCE: f64 = 1e-10;

const TAIL_BAND: usize = 50;

/// Least-squares line through `(log t, log norm)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub window: (f64, f64),
    pub samples: usize,
    /// Exponent the slope is compared against, when one is known.
    pub theoretical: Option<f64>,
}

impl DecayFit {
    pub fn with_theoretical(mut self, exponent: f64) -> Self {
        self.theoretical = Some(exponent);
        self
    }

    /// `|slope − theoretical|`, if a theoretical exponent is attached.
    pub fn deviation(&self) -> Option<f64> {
        self.theoretical.map(|e| (self.slope - e).abs())
    }
}

/// Ordinary least squares of `log(norm)` against `log(t)` over the samples with
/// `t` inside `window` (inclusive).
pub fn fit_decay(times: &[f64], norms: &[f64], window: (f64, f64)) -> Result<DecayFit> {
    if times.len() != norms.len() {
        return Err(invalid("times and norms differ in length"));
    }
    let (lo, hi) = window;
    if !(lo > 0.0 && lo < hi && hi.is_finite()) {
        return Err(invalid(format!("degenerate fit window ({lo}, {hi})")));
    }
    if times.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(invalid("times must be strictly increasing"));
    }
    let points: Vec<(f64, f64)> = times
        .iter()
        .zip(norms)
        .filter(|(t, _)| **t >= lo && **t <= hi)
        .map(|(&t, &n)| (t, n))
        .collect();
    if points.len() < MIN_FIT_SAMPLES {
        return Err(invalid(format!(
            "{} samples in the window, at least {MIN_FIT_SAMPLES} needed",
            points.len()
        )));
    }
    if let Some((t, n)) = points.iter().find(|(_, n)| !(*n > 0.0) || !n.is_finite()) {
        return Err(invalid(format!("norm at t = {t} is not positive: {n}")));
    }
    let m = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|(t, _)| t.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|(_, n)| n.ln()).collect();
    let x_mean = xs.iter().sum::<f64>() / m;
    let y_mean = ys.iter().sum::<f64>() / m;
    let sxx: f64 = xs.iter().map(|x| (x - x_mean).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - x_mean) * (y - y_mean)).sum();
    let syy: f64 = ys.iter().map(|y| (y - y_mean).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = y_mean - slope * x_mean;
    let residual: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let r_squared = if syy <= f64::EPSILON * f64::EPSILON * m {
        1.0
    } else {
        (1.0 - residual / syy).clamp(0.0, 1.0)
    };
    Ok(DecayFit {
        slope,
        intercept,
        r_squared,
        window,
        samples: points.len(),
        theoretical: None,
    })
}

/// `count` points from `lo` to `hi` equally spaced in `log t`.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi > lo) || count < 2 {
        return Err(invalid(format!("log grid needs 0 < lo < hi and two points, got ({lo}, {hi}, {count})")));
    }
    let ratio = (hi / lo).ln();
    Ok((0..count)
        .map(|i| match i {
            0 => lo,
            i if i == count - 1 => hi,
            i => lo * (ratio * i as f64 / (count - 1) as f64).exp(),
        })
        .collect())
}

/// Rate `α_p` in `‖u(t)‖_{ℓᵖ} ≲ (1 + |t|)^{−α_p}‖φ‖_{ℓ^{p′}}`: `(p−2)/(2p)` below
/// `p = 4`, `(p−1)/(3p)` above, `1/4` at `p = 4` and `1/3` at `p = ∞`.
pub fn alpha_p_theory(p: f64) -> Result<f64> {
    if p.is_nan() || p < 2.0 {
        return Err(invalid(format!("p must be at least 2, got {p}")));
    }
    Ok(if p.is_infinite() {
        1.0 / 3.0
    } else if p < 4.0 {
        (p - 2.0) / (2.0 * p)
    } else if p == 4.0 {
        0.25
    } else {
        (p - 1.0) / (3.0 * p)
    })
}

/// `α_p` tabulated on a list of exponents.
#[derive(Debug, Clone, PartialEq)]
pub struct ExponentTable {
    pub entries: Vec<(f64, f64)>,
}

impl ExponentTable {
    pub fn new(ps: &[f64]) -> Result<Self> {
        let entries = ps
            .iter()
            .map(|&p| alpha_p_theory(p).map(|a| (p, a)))
            .collect::<Result<_>>()?;
        Ok(Self { entries })
    }
}

/// `‖K_t‖_{ℓᵖ}` over `|j| ≤ sites`, with the share carried by the outermost band.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelNorm {
    pub t: f64,
    pub norm: f64,
    pub tail_ratio: f64,
    pub sites: usize,
}

/// Sites kept on each side when summing the kernel at time `t`.
pub fn kernel_extent(t: f64) -> usize {
    2 * (2.0 * t.abs()).ceil() as usize + 200
}

/// `‖K_t‖_{ℓᵖ}`, failing when the outermost band carries more than
/// `TAIL_TOLERANCE` of the norm.
pub fn kernel_lp_norm(t: f64, p: f64, max_sites: usize) -> Result<KernelNorm> {
    if !t.is_finite() {
        return Err(invalid(format!("time must be finite, got {t}")));
    }
    if p.is_nan() || p < 1.0 {
        return Err(invalid(format!("p must be at least 1, got {p}")));
    }
    let jmax = kernel_extent(t);
    if 2 * jmax + 1 > max_sites {
        return Err(Error::ResourceLimit {
            what: "kernel sites",
            needed: 2 * jmax + 1,
            cap: max_sites,
        });
    }
    let row = kernel_row(t, jmax);
    // `row` holds j = 0..=jmax; the kernel is even in j.
    let moduli: Vec<f64> = row.iter().map(|z| z.norm()).collect();
    let (norm, tail) = if p.is_infinite() {
        let tail = moduli[jmax + 1 - TAIL_BAND..].iter().copied().fold(0.0, f64::max);
        (moduli.iter().copied().fold(0.0, f64::max), tail)
    } else {
        let power = |m: &[f64]| m.iter().map(|v| v.powf(p)).sum::<f64>();
        let total = moduli[0].powf(p) + 2.0 * power(&moduli[1..]);
        let tail = 2.0 * power(&moduli[jmax + 1 - TAIL_BAND..]);
        (total.powf(1.0 / p), tail.powf(1.0 / p))
    };
    let tail_ratio = tail / norm;
    if tail_ratio > TAIL_TOLERANCE {
        return Err(Error::AccuracyFailure {
            requested: TAIL_TOLERANCE,
            achieved: tail_ratio,
        });
    }
    Ok(KernelNorm {
        t,
        norm,
        tail_ratio,
        sites: 2 * jmax + 1,
    })
}

/// Kernel norms over `times`, evaluated in parallel and returned in order.
pub fn kernel_norms(times: &[f64], p: f64, max_sites: usize) -> Result<Vec<KernelNorm>> {
    times.par_iter().map(|&t| kernel_lp_norm(t, p, max_sites)).collect()
}

/// Measured decay of `‖K_t‖_{ℓᵖ}` over `times`, compared with `−α_p`.
pub fn alpha_p_empirical(p: f64, times: &[f64]) -> Result<(DecayFit, Vec<KernelNorm>)> {
    alpha_p_empirical_with(p, times, DEFAULT_KERNEL_SITES)
}

pub fn alpha_p_empirical_with(p: f64, times: &[f64], max_sites: usize) -> Result<(DecayFit, Vec<KernelNorm>)> {
    let theory = alpha_p_theory(p)?;
    let (first, last) = match (times.first(), times.last()) {
        (Some(&a), Some(&b)) => (a, b),
        _ => return Err(invalid("empty time grid")),
    };
    let norms = kernel_norms(times, p, max_sites)?;
    let values: Vec<f64> = norms.iter().map(|k| k.norm).collect();
    let fit = fit_decay(times, &values, (first, last))?.with_theoretical(-theory);
    Ok((fit, norms))
}

/// Slope of the naive interpolation bound `(p − 2)/(3p)` between `ℓ²` and `ℓ^∞`.
pub fn interpolation_exponent(p: f64) -> f64 {
    if p.is_infinite() {
        1.0 / 3.0
    } else {
        (p - 2.0) / (3.0 * p)
    }
}
