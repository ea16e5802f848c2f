//! Exact-in-time propagators for `i u_t + Δu = 0` on ℤ, on the half-lattice
//! `j ≥ 1` with Dirichlet or Neumann closure, and for the two-speed junction
//! system `i U_t + A U = 0`.
//!
//! * Whole line: the Fourier multiplier `e^{−4it sin²(ξ/2)}` applied on a ring
//!   large enough that nothing wraps around into the returned window.
//! * Half line: odd (Dirichlet) or even-about-½ (Neumann) extension, evolved on
//!   the whole line and restricted.
//! * Junction: `U(t) = Z diag(e^{itλ}) Zᵀ U(0)` from the eigendecomposition of
//!   the truncated operator; decompositions are shared across threads.

use std::cell::RefCell;
use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::eigen::{self, TridiagonalEigen};
use crate::error::{invalid, Error, Result};
use crate::kernel::PhaseFunction;
use crate::lattice::{build_coupled_operator, lp_norm_slice, CoupledLatticeSpec, LatticeState};

/// Default cap on ring sizes.
pub const DEFAULT_MAX_SITES: usize = 1 << 24;

/// Sites at the window edges inspected for leftover amplitude.
const EDGE_SITES: usize = 8;

/// Amplitudes below this fraction of the peak count as zero when locating the
/// support of a junction datum.
const SUPPORT_FLOOR: f64 = 1e-13;

#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionResult {
    pub state: LatticeState,
    pub time: f64,
    /// `|‖u(t)‖₂ − ‖φ‖₂|`.
    pub mass_drift: f64,
    /// Buffer sites left between the light cone and the truncation.
    pub truncation_margin: usize,
    /// Largest modulus found in the outermost sites of the window.
    pub contamination: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundaryCondition {
    /// `u(t, 0) = 0`.
    Dirichlet,
    /// `u(t, 0) = u(t, 1)`.
    Neumann,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EvolutionOptions {
    pub max_sites: usize,
}

impl Default for EvolutionOptions {
    fn default() -> Self {
        Self {
            max_sites: DEFAULT_MAX_SITES,
        }
    }
}

/// Distance a lattice signal travels in scaled time `tau`, plus the Airy
/// transition layer and a fixed buffer; beyond it the kernel is below ~1e-12.
pub fn lattice_reach(tau: f64) -> usize {
    let tau = tau.abs();
    (2.0 * tau).ceil() as usize + (12.0 * tau.cbrt()).ceil() as usize + 32
}

fn fast_fft_size(min: usize) -> usize {
    let mut n = min.max(1);
    loop {
        let mut m = n;
        for p in [2, 3, 5] {
            while m.is_multiple_of(p) {
                m /= p;
            }
        }
        if m == 1 {
            return n;
        }
        n += 1;
    }
}

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn edge_amplitude(values: &[Complex64]) -> f64 {
    let k = EDGE_SITES.min(values.len());
    values[..k]
        .iter()
        .chain(&values[values.len() - k..])
        .map(|z| z.norm())
        .fold(0.0, f64::max)
}

fn mass(values: &[Complex64]) -> f64 {
    lp_norm_slice(values, 2.0).expect("p = 2 is valid")
}

/// Whole-line evolution by the exact Fourier multiplier.
pub fn evolve_line(phi: &LatticeState, t: f64) -> Result<EvolutionResult> {
    evolve_line_with(phi, t, &EvolutionOptions::default())
}

pub fn evolve_line_with(phi: &LatticeState, t: f64, opts: &EvolutionOptions) -> Result<EvolutionResult> {
    if !t.is_finite() {
        return Err(invalid(format!("time must be finite, got {t}")));
    }
    let reach = lattice_reach(t);
    let first = phi.offset() - reach as i64;
    let last = phi.last() + reach as i64;
    let window = (last - first + 1) as usize;
    let ring = fast_fft_size(window + reach);
    if ring > opts.max_sites {
        return Err(Error::ResourceLimit {
            what: "lattice ring sites",
            needed: ring,
            cap: opts.max_sites,
        });
    }

    let mut buf = vec![Complex64::new(0.0, 0.0); ring];
    buf[reach..reach + phi.len()].copy_from_slice(phi.values());
    if t != 0.0 {
        let (fwd, inv) = PLANNER.with(|p| {
            let mut p = p.borrow_mut();
            (p.plan_fft_forward(ring), p.plan_fft_inverse(ring))
        });
        fwd.process(&mut buf);
        let psi = PhaseFunction;
        let scale = 1.0 / ring as f64;
        for (k, z) in buf.iter_mut().enumerate() {
            let xi = 2.0 * std::f64::consts::PI * k as f64 / ring as f64;
            *z *= Complex64::from_polar(scale, -t * psi.value(xi));
        }
        inv.process(&mut buf);
    }
    buf.truncate(window);

    let drift = (mass(&buf) - mass(phi.values())).abs();
    let contamination = edge_amplitude(&buf);
    Ok(EvolutionResult {
        state: LatticeState::new(first, buf)?,
        time: t,
        mass_drift: drift,
        truncation_margin: reach - (2.0 * t.abs()).ceil() as usize,
        contamination,
    })
}

/// Half-lattice solution together with the boundary site `u(t, 0)` of the
/// extended problem.
#[derive(Debug, Clone, PartialEq)]
pub struct HalfLineEvolution {
    pub evolution: EvolutionResult,
    pub boundary_value: Complex64,
}

impl HalfLineEvolution {
    /// `u(t,0)` for Dirichlet, `u(t,0) − u(t,1)` for Neumann.
    pub fn boundary_residual(&self, bc: BoundaryCondition) -> f64 {
        match bc {
            BoundaryCondition::Dirichlet => self.boundary_value.norm(),
            BoundaryCondition::Neumann => (self.boundary_value - self.evolution.state.get(1)).norm(),
        }
    }
}

/// Odd or even extension of a half-lattice datum to ℤ.
pub fn image_extension(phi: &LatticeState, bc: BoundaryCondition) -> Result<LatticeState> {
    if let Some((lo, _)) = phi.support(0.0) {
        if lo < 1 {
            return Err(invalid(format!(
                "half-line datum must vanish for j <= 0, found a value at site {lo}"
            )));
        }
    }
    let top = phi.last().max(1);
    match bc {
        BoundaryCondition::Dirichlet => {
            let values = (-top..=top)
                .map(|j| match j {
                    0 => Complex64::new(0.0, 0.0),
                    j if j > 0 => phi.get(j),
                    j => -phi.get(-j),
                })
                .collect();
            LatticeState::new(-top, values)
        }
        BoundaryCondition::Neumann => {
            let values = (1 - top..=top)
                .map(|j| if j >= 1 { phi.get(j) } else { phi.get(1 - j) })
                .collect();
            LatticeState::new(1 - top, values)
        }
    }
}

/// Half-lattice evolution by the method of images.
pub fn evolve_halfline(phi: &LatticeState, t: f64, bc: BoundaryCondition) -> Result<HalfLineEvolution> {
    let extended = image_extension(phi, bc)?;
    let full = evolve_line(&extended, t)?;
    let last = full.state.last();
    let restricted = full.state.window(1, last)?;
    let source = phi.window(1, phi.last().max(1))?;
    let drift = (mass(restricted.values()) - mass(source.values())).abs();
    Ok(HalfLineEvolution {
        boundary_value: full.state.get(0),
        evolution: EvolutionResult {
            state: restricted,
            time: t,
            mass_drift: drift,
            truncation_margin: full.truncation_margin,
            contamination: full.contamination,
        },
    })
}

type CacheKey = (u64, u64, usize);

fn decomposition_cache() -> &'static RwLock<HashMap<CacheKey, Arc<TridiagonalEigen>>> {
    static CACHE: OnceLock<RwLock<HashMap<CacheKey, Arc<TridiagonalEigen>>>> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(HashMap::new()))
}

/// Margin (sites per side) the junction datum needs for time `t`.
pub fn required_coupled_margin(spec: &CoupledLatticeSpec, t: f64) -> usize {
    lattice_reach(spec.max_coefficient() * t.abs())
}

/// `e^{itA_M}` for a fixed junction specification.
#[derive(Debug, Clone)]
pub struct CoupledPropagator {
    spec: CoupledLatticeSpec,
    eig: Arc<TridiagonalEigen>,
}

impl CoupledPropagator {
    /// Decomposes `A_M`, reusing a cached decomposition for the same `(b1, b2, M)`.
    pub fn new(spec: CoupledLatticeSpec) -> Result<Self> {
        let key = (spec.b1().to_bits(), spec.b2().to_bits(), spec.truncation());
        if let Some(eig) = decomposition_cache()
            .read()
            .expect("decomposition cache poisoned")
            .get(&key)
        {
            return Ok(Self {
                spec,
                eig: Arc::clone(eig),
            });
        }
        let eig = Arc::new(eigen::decompose(&build_coupled_operator(&spec))?);
        let eig = decomposition_cache()
            .write()
            .expect("decomposition cache poisoned")
            .entry(key)
            .or_insert(eig)
            .clone();
        Ok(Self { spec, eig })
    }

    pub fn spec(&self) -> &CoupledLatticeSpec {
        &self.spec
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eig.values
    }

    fn unknowns(&self, phi: &LatticeState, t_max: f64) -> Result<(Vec<Complex64>, usize)> {
        if phi.get(0) != Complex64::new(0.0, 0.0) {
            return Err(invalid("junction datum must not carry a value at site 0"));
        }
        let m = self.spec.truncation() as i64;
        let required = required_coupled_margin(&self.spec, t_max);
        let peak = lp_norm_slice(phi.values(), f64::INFINITY)?;
        let (lo, hi) = phi.support(SUPPORT_FLOOR * peak).unwrap_or((-1, -1));
        let available = (lo + m).min(m - hi).max(0) as usize;
        if available < required {
            return Err(Error::Truncation {
                required,
                available,
            });
        }
        let x: Vec<Complex64> = (0..self.spec.dimension())
            .map(|k| phi.get(self.spec.site_of(k)))
            .collect();
        Ok((x, available - required))
    }

    fn spectral_coefficients(&self, x: &[Complex64]) -> Vec<Complex64> {
        let n = self.eig.dimension;
        (0..n)
            .map(|k| {
                self.eig
                    .vector(k)
                    .iter()
                    .zip(x)
                    .map(|(&z, &v)| v * z)
                    .sum()
            })
            .collect()
    }

    fn synthesize(&self, coeffs: &[Complex64], t: f64) -> Vec<Complex64> {
        let n = self.eig.dimension;
        let mut y = vec![Complex64::new(0.0, 0.0); n];
        for (k, (&c, &lambda)) in coeffs.iter().zip(&self.eig.values).enumerate() {
            let w = c * Complex64::from_polar(1.0, t * lambda);
            for (yi, &z) in y.iter_mut().zip(self.eig.vector(k)) {
                *yi += w * z;
            }
        }
        y
    }

    fn assemble(&self, y: Vec<Complex64>, x_mass: f64, t: f64, margin: usize) -> Result<EvolutionResult> {
        let m = self.spec.truncation();
        let drift = (mass(&y) - x_mass).abs();
        let junction = self.spec.junction_value(y[m - 1], y[m]);
        let contamination = edge_amplitude(&y);
        let mut values = Vec::with_capacity(2 * m + 1);
        values.extend_from_slice(&y[..m]);
        values.push(junction);
        values.extend_from_slice(&y[m..]);
        Ok(EvolutionResult {
            state: LatticeState::new(-(m as i64), values)?,
            time: t,
            mass_drift: drift,
            truncation_margin: margin,
            contamination,
        })
    }

    /// State at time `t`; site 0 of the result holds the reconstructed junction
    /// value, and the mass excludes it.
    pub fn evolve(&self, phi: &LatticeState, t: f64) -> Result<EvolutionResult> {
        Ok(self.evolve_many(phi, &[t])?.remove(0))
    }

    /// Several times sharing one spectral projection of the datum.
    pub fn evolve_many(&self, phi: &LatticeState, times: &[f64]) -> Result<Vec<EvolutionResult>> {
        if times.iter().any(|t| !t.is_finite()) {
            return Err(invalid("times must be finite"));
        }
        let t_max = times.iter().fold(0.0f64, |a, t| a.max(t.abs()));
        let (x, margin) = self.unknowns(phi, t_max)?;
        let x_mass = mass(&x);
        let coeffs = self.spectral_coefficients(&x);
        times
            .iter()
            .map(|&t| self.assemble(self.synthesize(&coeffs, t), x_mass, t, margin))
            .collect()
    }
}

/// Junction evolution `e^{itA_M}φ` for one time.
pub fn evolve_coupled(spec: &CoupledLatticeSpec, phi: &LatticeState, t: f64) -> Result<EvolutionResult> {
    CoupledPropagator::new(*spec)?.evolve(phi, t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{kernel_bessel, KernelRequest};
    use crate::lattice::lp_norm;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_state(rng: &mut ChaCha8Rng, lo: i64, hi: i64) -> LatticeState {
        let offset = rng.gen_range(lo..hi);
        let len = rng.gen_range(1..12usize);
        let values = (0..len)
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        LatticeState::new(offset, values).unwrap()
    }

    #[test]
    fn line_delta_reproduces_kernel() {
        for t in [0.5, 3.0, 40.0, 250.0] {
            let r = evolve_line(&LatticeState::delta(0), t).unwrap();
            for j in (r.state.offset()..=r.state.last()).step_by(7) {
                let k = kernel_bessel(KernelRequest::new(t, j).unwrap());
                assert!((r.state.get(j) - k).norm() < 1e-9, "t={t} j={j}");
            }
            assert!(r.mass_drift < 1e-10);
            assert!(r.contamination < 1e-12, "t={t}: {}", r.contamination);
        }
    }

    #[test]
    fn line_time_zero_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let phi = random_state(&mut rng, -10, 10);
        let r = evolve_line(&phi, 0.0).unwrap();
        assert!(r.state.max_distance(&phi) < 1e-13);
    }

    #[test]
    fn line_group_law_and_time_reversal() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10 {
            let phi = random_state(&mut rng, -30, 30);
            let (t1, t2) = (rng.gen_range(-20.0..20.0), rng.gen_range(-20.0..20.0));
            let two_step = evolve_line(&evolve_line(&phi, t1).unwrap().state, t2).unwrap();
            let one_step = evolve_line(&phi, t1 + t2).unwrap();
            assert!(two_step.state.max_distance(&one_step.state) < 1e-9);

            let forward = evolve_line(&phi, t1).unwrap();
            let back = evolve_line(&forward.state.conj(), t1).unwrap();
            assert!(back.state.max_distance(&phi.conj()) < 1e-9);
        }
    }

    #[test]
    fn line_is_linear() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let u = random_state(&mut rng, -10, 10);
        let v = random_state(&mut rng, -10, 10);
        let (a, b) = (Complex64::new(0.3, -1.2), Complex64::new(2.0, 0.5));
        let t = 17.0;
        let combo = u.combine(a, &v, b);
        let lhs = evolve_line(&combo, t).unwrap().state;
        let rhs = evolve_line(&u, t)
            .unwrap()
            .state
            .combine(a, &evolve_line(&v, t).unwrap().state, b);
        let scale = lp_norm(&lhs, f64::INFINITY).unwrap();
        assert!(lhs.max_distance(&rhs) <= 1e-12 * scale.max(1.0));
    }

    #[test]
    fn ring_cap_is_enforced() {
        let opts = EvolutionOptions { max_sites: 1000 };
        let err = evolve_line_with(&LatticeState::delta(0), 1e4, &opts).unwrap_err();
        assert!(matches!(err, Error::ResourceLimit { .. }));
    }

    #[test]
    fn halfline_boundary_identities() {
        for t in [0.7, 13.0, 90.0] {
            let d = evolve_halfline(&LatticeState::delta(1), t, BoundaryCondition::Dirichlet).unwrap();
            assert!(d.boundary_residual(BoundaryCondition::Dirichlet) < 1e-10);
            let n = evolve_halfline(&LatticeState::delta(1), t, BoundaryCondition::Neumann).unwrap();
            assert!(n.boundary_residual(BoundaryCondition::Neumann) < 1e-10);
            assert!(d.evolution.mass_drift < 1e-10 && n.evolution.mass_drift < 1e-10);
        }
    }

    #[test]
    fn halfline_rejects_data_on_nonpositive_sites() {
        let phi = LatticeState::from_real(0, &[1.0, 1.0]).unwrap();
        assert!(evolve_halfline(&phi, 1.0, BoundaryCondition::Dirichlet).is_err());
        // Explicit zeros at j <= 0 are fine.
        let phi = LatticeState::from_real(-1, &[0.0, 0.0, 1.0]).unwrap();
        assert!(evolve_halfline(&phi, 1.0, BoundaryCondition::Neumann).is_ok());
    }

    #[test]
    fn neumann_image_is_even_about_half() {
        let phi = LatticeState::from_real(1, &[1.0, 2.0, 3.0]).unwrap();
        let ext = image_extension(&phi, BoundaryCondition::Neumann).unwrap();
        for j in 1..=3 {
            assert_eq!(ext.get(1 - j), ext.get(j));
        }
    }

    #[test]
    fn coupled_equal_speeds_odd_data_is_dirichlet() {
        let spec = CoupledLatticeSpec::new(1.0, 1.0, 300).unwrap();
        let half = LatticeState::from_real(1, &[0.3, -1.0, 0.5, 0.25]).unwrap();
        let odd = image_extension(&half, BoundaryCondition::Dirichlet).unwrap();
        let prop = CoupledPropagator::new(spec).unwrap();
        for t in [0.0, 5.0, 60.0] {
            let c = prop.evolve(&odd, t).unwrap();
            let d = evolve_halfline(&half, t, BoundaryCondition::Dirichlet).unwrap();
            let hi = d.evolution.state.last().min(300);
            for j in 1..=hi {
                assert!((c.state.get(j) - d.evolution.state.get(j)).norm() < 1e-8, "t={t} j={j} {} {}", c.state.get(j), d.evolution.state.get(j));
            }
            assert!(c.state.get(0).norm() < 1e-12);
            assert!(c.mass_drift < 1e-9);
        }
        let c0 = prop.evolve(&odd, 0.0).unwrap();
        assert!(c0.state.max_distance(&odd) < 1e-12);
    }

    #[test]
    fn coupled_spectrum_is_nonpositive() {
        let spec = CoupledLatticeSpec::new(1.0, 2.0, 200).unwrap();
        let prop = CoupledPropagator::new(spec).unwrap();
        let bound = 4.0 * spec.max_coefficient().max(spec.junction_weight());
        for &l in prop.eigenvalues() {
            assert!(l <= 1e-12 && l >= -bound - 1e-12);
        }
    }

    #[test]
    fn coupled_truncation_is_reported() {
        let spec = CoupledLatticeSpec::new(1.0, 2.0, 100).unwrap();
        let err = evolve_coupled(&spec, &LatticeState::delta(-3), 80.0).unwrap_err();
        assert!(matches!(err, Error::Truncation { .. }));
        let err = evolve_coupled(&spec, &LatticeState::delta(0), 1.0).unwrap_err();
        assert!(matches!(err, Error::InvalidInput(_)));
    }

    #[test]
    fn coupled_group_law_and_time_reversal() {
        let spec = CoupledLatticeSpec::new(1.0, 2.0, 250).unwrap();
        let prop = CoupledPropagator::new(spec).unwrap();
        let phi = LatticeState::from_real(-4, &[0.5, 0.0, -1.0, 0.0, 0.0, 2.0, 1.0]).unwrap();
        let (t1, t2) = (12.0, -7.5);
        let strip = |s: &LatticeState| {
            // Drop the reconstructed junction site before feeding a state back in.
            let mut v = s.values().to_vec();
            let k = (0 - s.offset()) as usize;
            v[k] = Complex64::new(0.0, 0.0);
            LatticeState::new(s.offset(), v).unwrap()
        };
        let a = prop.evolve(&strip(&prop.evolve(&phi, t1).unwrap().state), t2).unwrap();
        let b = prop.evolve(&phi, t1 + t2).unwrap();
        assert!(a.state.max_distance(&b.state) < 1e-9);
        let fwd = strip(&prop.evolve(&phi, t1).unwrap().state);
        let back = strip(&prop.evolve(&fwd.conj(), t1).unwrap().state);
        assert!(back.max_distance(&phi.conj()) < 1e-9);
    }
}
