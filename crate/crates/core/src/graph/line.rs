//! The line with a piecewise-constant coefficient, `i u_t + (σu_x)_x = 0`, and
//! the line with point interactions, `i u_t = −u_xx + Σ αⱼ δ(x − xⱼ) u`.

use std::ops::Range;

use num_complex::Complex64;

use super::cn::{band_width, minimum_buffer, run_cayley, CayleySystem, EvolutionTrace, Grid1d, StepControl, TridiagonalStiffness};
use crate::error::{invalid, Error, Result};

/// `σ(x) = values[i]` between consecutive breakpoints, with the outer values
/// extending to ±∞.
#[derive(Debug, Clone, PartialEq)]
pub struct StepCoefficient {
    breakpoints: Vec<f64>,
    values: Vec<f64>,
}

impl StepCoefficient {
    pub fn new(breakpoints: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if values.len() != breakpoints.len() + 1 {
            return Err(invalid(format!(
                "{} breakpoints need {} values, got {}",
                breakpoints.len(),
                breakpoints.len() + 1,
                values.len()
            )));
        }
        if breakpoints.iter().any(|x| !x.is_finite()) || breakpoints.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(invalid("breakpoints must be finite and strictly increasing"));
        }
        if values.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
            return Err(invalid("coefficient values must be positive and finite"));
        }
        Ok(Self { breakpoints, values })
    }

    pub fn constant(value: f64) -> Result<Self> {
        Self::new(Vec::new(), vec![value])
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Value at `x`; a breakpoint belongs to the interval on its right.
    pub fn at(&self, x: f64) -> f64 {
        self.values[self.breakpoints.partition_point(|&b| b <= x)]
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }
}

/// Point interactions of strengths `αⱼ` at increasing positions `xⱼ`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DeltaPotentialSpec {
    strengths: Vec<f64>,
    positions: Vec<f64>,
}

impl DeltaPotentialSpec {
    pub fn new(strengths: Vec<f64>, positions: Vec<f64>) -> Result<Self> {
        if strengths.len() != positions.len() {
            return Err(invalid("one position per strength is required"));
        }
        if strengths.iter().chain(&positions).any(|v| !v.is_finite()) {
            return Err(invalid("strengths and positions must be finite"));
        }
        if positions.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(invalid("positions must be strictly increasing"));
        }
        Ok(Self { strengths, positions })
    }

    pub fn single(strength: f64, position: f64) -> Result<Self> {
        Self::new(vec![strength], vec![position])
    }

    pub fn strengths(&self) -> &[f64] {
        &self.strengths
    }

    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    pub fn is_empty(&self) -> bool {
        self.strengths.is_empty()
    }
}

pub(crate) struct LineSystem {
    matrix: TridiagonalStiffness,
    band: usize,
}

impl LineSystem {
    /// Stiffness `Σ σ_{k+1/2}|u_{k+1} − u_k|²/h` including the bonds to both walls.
    pub fn step(sigma: &StepCoefficient, grid: &Grid1d) -> Self {
        let (n, h) = (grid.nodes(), grid.spacing());
        let bond = |k: isize| sigma.at(grid.start() + (k as f64 + 0.5) * h) / h;
        let diag = (0..n as isize).map(|k| bond(k - 1) + bond(k)).collect();
        let off = (0..n as isize - 1).map(|k| -bond(k)).collect();
        Self {
            matrix: TridiagonalStiffness::new(vec![h; n], diag, off),
            band: band_width(n),
        }
    }

    pub fn delta(spec: &DeltaPotentialSpec, grid: &Grid1d) -> Result<Self> {
        let mut sys = Self::step(&StepCoefficient::constant(1.0)?, grid);
        for (&alpha, &x) in spec.strengths.iter().zip(&spec.positions) {
            let k = grid
                .nearest(x)
                .ok_or_else(|| invalid(format!("point interaction at {x} lies outside the grid")))?;
            sys.matrix.diag[k] += alpha;
        }
        Ok(sys)
    }

    pub fn stiffness_diag(&self) -> &[f64] {
        &self.matrix.diag
    }

    pub fn stiffness_off(&self) -> &[f64] {
        &self.matrix.off
    }
}

impl CayleySystem for LineSystem {
    fn weights(&self) -> &[f64] {
        &self.matrix.weights
    }

    fn stiffness(&self, u: &[Complex64], out: &mut [Complex64]) {
        self.matrix.apply(u, out);
    }

    fn factor(&mut self, c: f64) -> Result<()> {
        self.matrix.factor(c)
    }

    fn solve(&self, rhs: &mut [Complex64]) {
        self.matrix.solve(rhs);
    }

    fn outer_band(&self) -> Vec<Range<usize>> {
        let n = self.matrix.weights.len();
        vec![0..self.band, n - self.band..n]
    }
}

pub(crate) fn check_datum(grid: &Grid1d, phi: &[Complex64], sigma_max: f64, control: &StepControl) -> Result<()> {
    if phi.len() != grid.nodes() {
        return Err(invalid(format!("datum has {} samples for {} grid nodes", phi.len(), grid.nodes())));
    }
    control.check_spacing(grid.spacing())?;
    let required = minimum_buffer(sigma_max, control.final_time());
    let available = grid.buffer_of(phi);
    if available < required {
        return Err(Error::Truncation {
            required: (required / grid.spacing()).ceil() as usize,
            available: (available / grid.spacing()).floor() as usize,
        });
    }
    Ok(())
}

/// Crank–Nicolson evolution of `i u_t + (σu_x)_x = 0` with `σ` sampled at
/// cell midpoints.
pub fn evolve_stepline(
    sigma: &StepCoefficient,
    grid: &Grid1d,
    phi: &[Complex64],
    control: &StepControl,
) -> Result<EvolutionTrace> {
    check_datum(grid, phi, sigma.max_value(), control)?;
    run_cayley(&mut LineSystem::step(sigma, grid), phi.to_vec(), control)
}

/// Crank–Nicolson evolution of `i u_t = H_α u`, each interaction adding
/// `αⱼ/h` at the grid node nearest to `xⱼ`.
pub fn evolve_delta_line(
    spec: &DeltaPotentialSpec,
    grid: &Grid1d,
    phi: &[Complex64],
    control: &StepControl,
) -> Result<EvolutionTrace> {
    check_datum(grid, phi, 1.0, control)?;
    run_cayley(&mut LineSystem::delta(spec, grid)?, phi.to_vec(), control)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn gaussian(grid: &Grid1d, center: f64, width: f64, k0: f64) -> Vec<Complex64> {
        grid.sample(|x| {
            let s = (x - center) / width;
            Complex64::from_polar((-0.5 * s * s).exp(), k0 * x)
        })
    }

    #[test]
    fn coefficient_lookup() {
        let s = StepCoefficient::new(vec![0.0, 2.0], vec![1.0, 4.0, 9.0]).unwrap();
        assert_eq!(s.at(-1.0), 1.0);
        assert_eq!(s.at(0.0), 4.0);
        assert_eq!(s.at(1.0), 4.0);
        assert_eq!(s.at(3.0), 9.0);
        assert_eq!(s.max_value(), 9.0);
        assert!(StepCoefficient::new(vec![1.0, 0.0], vec![1.0, 1.0, 1.0]).is_err());
        assert!(StepCoefficient::new(vec![0.0], vec![1.0, -1.0]).is_err());
        assert!(StepCoefficient::new(vec![0.0], vec![1.0]).is_err());
    }

    #[test]
    fn time_zero_returns_datum() {
        let grid = Grid1d::covering(-40.0, 40.0, 0.1).unwrap();
        let phi = gaussian(&grid, 0.0, 1.0, 0.0);
        let trace = evolve_stepline(
            &StepCoefficient::constant(1.0).unwrap(),
            &grid,
            &phi,
            &StepControl::new(0.05, vec![0.0]).unwrap().keeping_states(),
        )
        .unwrap();
        assert_eq!(trace.states[0], phi);
        assert_eq!(trace.steps, 0);
    }

    #[test]
    fn free_gaussian_matches_closed_form() {
        // u(t,x) = (1 + 2it)^{-1/2} exp(−x²/(2(1 + 2it))) for σ = 1.
        let grid = Grid1d::covering(-60.0, 60.0, 0.02).unwrap();
        let phi = gaussian(&grid, 0.0, 1.0, 0.0);
        let t = 2.0;
        let trace = evolve_stepline(
            &StepCoefficient::constant(1.0).unwrap(),
            &grid,
            &phi,
            &StepControl::new(0.005, vec![t]).unwrap(),
        )
        .unwrap();
        let a = Complex64::new(1.0, 2.0 * t);
        let worst = (0..grid.nodes())
            .map(|k| {
                let x = grid.x(k);
                let exact = (-x * x / (2.0 * a)).exp() / a.sqrt();
                (trace.final_state[k] - exact).norm()
            })
            .fold(0.0, f64::max);
        assert!(worst < 2e-4, "max error {worst}");
    }

    #[test]
    fn cayley_steps_conserve_mass_on_random_data() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let grid = Grid1d::covering(-60.0, 60.0, 0.05).unwrap();
        let sigma = StepCoefficient::new(vec![-1.3, 0.7], vec![1.0, 3.0, 0.5]).unwrap();
        let phi: Vec<Complex64> = (0..grid.nodes())
            .map(|k| {
                if grid.x(k).abs() < 2.0 {
                    Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
                } else {
                    Complex64::new(0.0, 0.0)
                }
            })
            .collect();
        let trace = evolve_stepline(&sigma, &grid, &phi, &StepControl::new(0.05, vec![0.5, 1.0]).unwrap()).unwrap();
        assert!(trace.max_step_mass_change < 1e-13);
        assert!(trace.mass_drift < 1e-12);
    }

    #[test]
    fn empty_potential_is_the_free_line() {
        let grid = Grid1d::covering(-60.0, 60.0, 0.05).unwrap();
        let phi = gaussian(&grid, 1.0, 1.5, 0.3);
        let control = StepControl::new(0.02, vec![0.5, 1.5]).unwrap();
        let a = evolve_delta_line(&DeltaPotentialSpec::default(), &grid, &phi, &control).unwrap();
        let b = evolve_stepline(&StepCoefficient::constant(1.0).unwrap(), &grid, &phi, &control).unwrap();
        let d = a
            .final_state
            .iter()
            .zip(&b.final_state)
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max);
        assert!(d <= 1e-12);
    }

    #[test]
    fn rejects_bad_setups() {
        let grid = Grid1d::covering(-20.0, 20.0, 0.05).unwrap();
        let phi = gaussian(&grid, 0.0, 1.0, 0.0);
        let one = StepCoefficient::constant(1.0).unwrap();
        let err = evolve_stepline(&one, &grid, &phi, &StepControl::new(0.1, vec![1.0]).unwrap()).unwrap_err();
        assert!(matches!(err, Error::InvalidInput(_)));
        let err = evolve_stepline(&one, &grid, &phi, &StepControl::new(0.01, vec![5.0]).unwrap()).unwrap_err();
        assert!(matches!(err, Error::Truncation { .. }));
        let outside = DeltaPotentialSpec::single(-1.0, 50.0).unwrap();
        assert!(evolve_delta_line(&outside, &grid, &phi, &StepControl::new(0.01, vec![0.1]).unwrap()).is_err());
    }
}
