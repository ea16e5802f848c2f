//! Crank–Nicolson in Cayley form, `(W + i·dt/2·K) uⁿ⁺¹ = (W − i·dt/2·K) uⁿ`,
//! for a positive diagonal mass `W` and a real symmetric stiffness `K`. The
//! update is unitary in the weighted norm `Σ W|u|²`.

use std::ops::Range;

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};

/// Fixed part of the distance kept between a datum and a truncation wall.
pub const BUFFER_MARGIN: f64 = 10.0;

/// Smallest datum-to-wall distance accepted for a run to time `t` with largest
/// coefficient `sigma_max`.
pub fn minimum_buffer(sigma_max: f64, t: f64) -> f64 {
    24.0 * (sigma_max * t.abs()).sqrt() + BUFFER_MARGIN
}

/// Uniform nodes `start + k·h`, `k = 0..nodes`, with Dirichlet walls one
/// spacing beyond each end.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid1d {
    start: f64,
    spacing: f64,
    nodes: usize,
}

impl Grid1d {
    pub fn new(start: f64, spacing: f64, nodes: usize) -> Result<Self> {
        if !(spacing > 0.0) || !spacing.is_finite() || !start.is_finite() {
            return Err(invalid(format!("grid needs a finite start and positive spacing, got {start}, {spacing}")));
        }
        if nodes < 3 {
            return Err(invalid("grid needs at least three nodes"));
        }
        Ok(Self { start, spacing, nodes })
    }

    /// Nodes covering `[start, end]`.
    pub fn covering(start: f64, end: f64, spacing: f64) -> Result<Self> {
        if !(end > start) {
            return Err(invalid(format!("empty interval [{start}, {end}]")));
        }
        let nodes = ((end - start) / spacing).round() as usize + 1;
        Self::new(start, spacing, nodes)
    }

    pub fn start(&self) -> f64 {
        self.start
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }

    pub fn end(&self) -> f64 {
        self.x(self.nodes - 1)
    }

    pub fn x(&self, k: usize) -> f64 {
        self.start + k as f64 * self.spacing
    }

    /// Index of the node closest to `x`, if `x` lies on the grid.
    pub fn nearest(&self, x: f64) -> Option<usize> {
        let k = ((x - self.start) / self.spacing).round();
        (k >= 0.0 && (k as usize) < self.nodes).then_some(k as usize)
    }

    pub fn sample<F: Fn(f64) -> Complex64>(&self, f: F) -> Vec<Complex64> {
        (0..self.nodes).map(|k| f(self.x(k))).collect()
    }

    /// `h·Σ conj(a)·b`.
    pub fn inner(&self, a: &[Complex64], b: &[Complex64]) -> Complex64 {
        a.iter().zip(b).map(|(x, y)| x.conj() * y).sum::<Complex64>() * self.spacing
    }

    pub fn norm(&self, a: &[Complex64]) -> f64 {
        self.inner(a, a).re.max(0.0).sqrt()
    }

    /// Distance from the support of `values` to the nearer wall.
    pub fn buffer_of(&self, values: &[Complex64]) -> f64 {
        let (lo, hi) = support_range(values);
        let left = (lo + 1) as f64 * self.spacing;
        let right = (self.nodes - hi) as f64 * self.spacing;
        left.min(right)
    }
}

/// Indices of the first and last entries above `1e-12` of the peak.
pub(crate) fn support_range(values: &[Complex64]) -> (usize, usize) {
    let peak = values.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let floor = 1e-12 * peak;
    let lo = values.iter().position(|z| z.norm() > floor).unwrap_or(0);
    let hi = values.iter().rposition(|z| z.norm() > floor).unwrap_or(0);
    (lo, hi)
}

pub(crate) fn sup(values: &[Complex64]) -> f64 {
    values.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// `LDLᵀ` factors of a complex symmetric tridiagonal matrix, solved without
/// pivoting. The matrices met here have a positive definite Hermitian part.
#[derive(Debug, Clone, Default)]
pub(crate) struct TridiagonalFactor {
    inv_pivot: Vec<Complex64>,
    multiplier: Vec<Complex64>,
}

impl TridiagonalFactor {
    pub fn new(diag: &[Complex64], off: &[Complex64]) -> Result<Self> {
        let n = diag.len();
        let mut inv_pivot = Vec::with_capacity(n);
        let mut multiplier = Vec::with_capacity(n.saturating_sub(1));
        let mut pivot = diag[0];
        for k in 0..n {
            if pivot.norm() < 1e-300 || !pivot.is_finite() {
                return Err(Error::Numerical(format!("zero pivot at row {k} of a tridiagonal solve")));
            }
            inv_pivot.push(pivot.inv());
            if k + 1 < n {
                let l = off[k] / pivot;
                multiplier.push(l);
                pivot = diag[k + 1] - l * off[k];
            }
        }
        Ok(Self { inv_pivot, multiplier })
    }

    pub fn solve(&self, rhs: &mut [Complex64]) {
        let n = rhs.len();
        // Negligible operands are skipped so decaying tails never reach subnormal range.
        for k in 1..n {
            let prev = rhs[k - 1];
            if negligible(prev) {
                rhs[k - 1] = Complex64::new(0.0, 0.0);
            } else {
                rhs[k] -= self.multiplier[k - 1] * prev;
            }
        }
        rhs[n - 1] *= self.inv_pivot[n - 1];
        for k in (0..n - 1).rev() {
            let next = rhs[k + 1];
            rhs[k] *= self.inv_pivot[k];
            if negligible(next) {
                rhs[k + 1] = Complex64::new(0.0, 0.0);
            } else {
                rhs[k] -= self.multiplier[k] * next;
            }
        }
        if negligible(rhs[0]) {
            rhs[0] = Complex64::new(0.0, 0.0);
        }
    }
}

const NEGLIGIBLE: f64 = 1e-250;

fn negligible(z: Complex64) -> bool {
    z.re.abs() + z.im.abs() < NEGLIGIBLE
}

/// Real symmetric tridiagonal stiffness with its Cayley factorization.
#[derive(Debug, Clone)]
pub(crate) struct TridiagonalStiffness {
    pub weights: Vec<f64>,
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
    factor: TridiagonalFactor,
}

impl TridiagonalStiffness {
    pub fn new(weights: Vec<f64>, diag: Vec<f64>, off: Vec<f64>) -> Self {
        Self {
            weights,
            diag,
            off,
            factor: TridiagonalFactor::default(),
        }
    }

    pub fn apply(&self, u: &[Complex64], out: &mut [Complex64]) {
        let n = u.len();
        for k in 0..n {
            let mut s = u[k] * self.diag[k];
            if k > 0 {
                s += u[k - 1] * self.off[k - 1];
            }
            if k + 1 < n {
                s += u[k + 1] * self.off[k];
            }
            out[k] = s;
        }
    }

    /// Factor `W + i·c·K`.
    pub fn factor(&mut self, c: f64) -> Result<()> {
        let diag: Vec<Complex64> = self
            .weights
            .iter()
            .zip(&self.diag)
            .map(|(&w, &d)| Complex64::new(w, c * d))
            .collect();
        let off: Vec<Complex64> = self.off.iter().map(|&o| Complex64::new(0.0, c * o)).collect();
        self.factor = TridiagonalFactor::new(&diag, &off)?;
        Ok(())
    }

    pub fn solve(&self, rhs: &mut [Complex64]) {
        self.factor.solve(rhs);
    }
}

/// A discretized Hamiltonian the Cayley driver can step.
pub(crate) trait CayleySystem {
    fn weights(&self) -> &[f64];
    /// `out = K u`.
    fn stiffness(&self, u: &[Complex64], out: &mut [Complex64]);
    /// Prepares solves with `W + i·c·K`.
    fn factor(&mut self, c: f64) -> Result<()>;
    /// Overwrites `rhs` with `(W + i·c·K)⁻¹ rhs`.
    fn solve(&self, rhs: &mut [Complex64]);
    /// Largest violation of the vertex law over the step `old → new`.
    fn vertex_residual(&self, _old: &[Complex64], _new: &[Complex64], _dt: f64) -> f64 {
        0.0
    }
    /// Index ranges adjacent to the truncation walls.
    fn outer_band(&self) -> Vec<Range<usize>>;
}

/// Sampled history of a continuum evolution.
#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionTrace {
    pub times: Vec<f64>,
    pub sup_norms: Vec<f64>,
    /// Weighted ℓ² norm `(Σ W|u|²)^{1/2}` at each output time.
    pub masses: Vec<f64>,
    /// Full states at the output times, when requested.
    pub states: Vec<Vec<Complex64>>,
    pub final_state: Vec<Complex64>,
    pub steps: usize,
    /// Largest single-step change of the mass, relative to the initial mass.
    pub max_step_mass_change: f64,
    /// Largest `|mass(t) − mass(0)| / mass(0)` over the output times.
    pub mass_drift: f64,
    /// Largest modulus seen next to the walls at an output time, relative to
    /// the initial sup norm.
    pub contamination: f64,
    pub vertex_residual: f64,
}

/// Time stepping controls shared by the continuum solvers.
#[derive(Debug, Clone, PartialEq)]
pub struct StepControl {
    /// Largest time step; each output interval is split into equal substeps.
    pub dt: f64,
    /// Nondecreasing, nonnegative output times.
    pub times: Vec<f64>,
    pub keep_states: bool,
}

impl StepControl {
    pub fn new(dt: f64, times: Vec<f64>) -> Result<Self> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(invalid(format!("time step must be positive, got {dt}")));
        }
        if times.is_empty() {
            return Err(invalid("at least one output time is required"));
        }
        if times.iter().any(|t| !t.is_finite() || *t < 0.0) || times.windows(2).any(|w| w[1] < w[0]) {
            return Err(invalid("output times must be finite, nonnegative and nondecreasing"));
        }
        Ok(Self {
            dt,
            times,
            keep_states: false,
        })
    }

    pub fn keeping_states(mut self) -> Self {
        self.keep_states = true;
        self
    }

    pub fn final_time(&self) -> f64 {
        *self.times.last().expect("nonempty by construction")
    }

    pub(crate) fn check_spacing(&self, h: f64) -> Result<()> {
        if self.dt > h {
            return Err(invalid(format!("time step {} exceeds the grid spacing {h}", self.dt)));
        }
        Ok(())
    }
}

fn weighted_mass(w: &[f64], u: &[Complex64]) -> f64 {
    w.iter().zip(u).map(|(w, z)| w * z.norm_sqr()).sum::<f64>().sqrt()
}

pub(crate) fn run_cayley<S: CayleySystem>(sys: &mut S, u0: Vec<Complex64>, control: &StepControl) -> Result<EvolutionTrace> {
    let n = u0.len();
    if u0.iter().any(|z| !z.is_finite()) {
        return Err(invalid("initial datum has non-finite values"));
    }
    let mass0 = weighted_mass(sys.weights(), &u0);
    let sup0 = sup(&u0);
    let band = sys.outer_band();
    let mut trace = EvolutionTrace {
        times: Vec::with_capacity(control.times.len()),
        sup_norms: Vec::with_capacity(control.times.len()),
        masses: Vec::with_capacity(control.times.len()),
        states: Vec::new(),
        final_state: Vec::new(),
        steps: 0,
        max_step_mass_change: 0.0,
        mass_drift: 0.0,
        contamination: 0.0,
        vertex_residual: 0.0,
    };

    let mut u = u0;
    let mut ku = vec![Complex64::new(0.0, 0.0); n];
    let mut next = vec![Complex64::new(0.0, 0.0); n];
    let mut now = 0.0;
    let mut factored_step = f64::NAN;
    let relative = |m: f64| if mass0 > 0.0 { m / mass0 } else { m };
    for &target in &control.times {
        let span = target - now;
        if span > 0.0 {
            let substeps = ((span / control.dt) * (1.0 - 1e-12)).ceil().max(1.0) as usize;
            let step = span / substeps as f64;
            if step != factored_step {
                sys.factor(0.5 * step)?;
                factored_step = step;
            }
            let c = Complex64::new(0.0, 0.5 * step);
            let mut previous = weighted_mass(sys.weights(), &u);
            for _ in 0..substeps {
                sys.stiffness(&u, &mut ku);
                for (((out, &w), &x), &k) in next.iter_mut().zip(sys.weights()).zip(&u).zip(&ku) {
                    *out = x * w - c * k;
                }
                sys.solve(&mut next);
                if next.iter().any(|z| !z.is_finite()) {
                    return Err(Error::Numerical("Crank-Nicolson step produced non-finite values".into()));
                }
                trace.vertex_residual = trace.vertex_residual.max(sys.vertex_residual(&u, &next, step));
                let current = weighted_mass(sys.weights(), &next);
                trace.max_step_mass_change = trace.max_step_mass_change.max(relative((current - previous).abs()));
                previous = current;
                std::mem::swap(&mut u, &mut next);
            }
            trace.steps += substeps;
            now = target;
        }
        let mass = weighted_mass(sys.weights(), &u);
        trace.times.push(target);
        trace.sup_norms.push(sup(&u));
        trace.masses.push(mass);
        trace.mass_drift = trace.mass_drift.max(relative((mass - mass0).abs()));
        let edge = band
            .iter()
            .flat_map(|r| u[r.clone()].iter())
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        trace.contamination = trace.contamination.max(if sup0 > 0.0 { edge / sup0 } else { edge });
        if control.keep_states {
            trace.states.push(u.clone());
        }
    }
    trace.final_state = u;
    Ok(trace)
}

/// Width of the wall band used for contamination readings.
pub(crate) fn band_width(nodes: usize) -> usize {
    (nodes / 50).max(8).min(nodes)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tridiagonal_factor_solves() {
        let diag = vec![Complex64::new(2.0, 1.0), Complex64::new(3.0, -0.5), Complex64::new(1.5, 0.2), Complex64::new(2.0, 0.0)];
        let off = vec![Complex64::new(0.0, 0.7), Complex64::new(-0.3, 0.1), Complex64::new(0.5, 0.5)];
        let x = vec![Complex64::new(1.0, 2.0), Complex64::new(-1.0, 0.0), Complex64::new(0.5, -0.5), Complex64::new(0.0, 3.0)];
        let mut b: Vec<Complex64> = (0..4)
            .map(|k| {
                let mut s = diag[k] * x[k];
                if k > 0 {
                    s += off[k - 1] * x[k - 1];
                }
                if k < 3 {
                    s += off[k] * x[k + 1];
                }
                s
            })
            .collect();
        TridiagonalFactor::new(&diag, &off).unwrap().solve(&mut b);
        for (a, e) in b.iter().zip(&x) {
            assert!((a - e).norm() < 1e-14);
        }
    }

    #[test]
    fn grid_geometry() {
        let g = Grid1d::covering(-1.0, 1.0, 0.25).unwrap();
        assert_eq!(g.nodes(), 9);
        assert_eq!(g.nearest(0.1), Some(4));
        assert_eq!(g.nearest(5.0), None);
        assert!((g.end() - 1.0).abs() < 1e-15);
        let ones = vec![Complex64::new(1.0, 0.0); 9];
        assert!((g.norm(&ones) - 1.5).abs() < 1e-15);
    }

    #[test]
    fn control_validation() {
        assert!(StepControl::new(0.0, vec![1.0]).is_err());
        assert!(StepControl::new(0.1, vec![]).is_err());
        assert!(StepControl::new(0.1, vec![2.0, 1.0]).is_err());
        assert!(StepControl::new(0.1, vec![0.0, 1.0, 1.0]).is_ok());
    }
}
