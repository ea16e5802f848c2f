//! Negative-energy eigenstates of the discretized `H_α` and the projection
//! onto their orthogonal complement.

use num_complex::Complex64;

use super::cn::Grid1d;
use super::line::{DeltaPotentialSpec, LineSystem};
use crate::eigen;
use crate::error::{invalid, Result};

/// Eigenvalues above `−BOUND_STATE_THRESHOLD` are not reported.
pub const BOUND_STATE_THRESHOLD: f64 = 1e-8;

const ORTHOGONALITY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct BoundState {
    pub energy: f64,
    /// Samples on the solver grid, unit norm in `h·Σ|·|²`.
    pub profile: Vec<Complex64>,
}

/// All eigenpairs of the grid Hamiltonian `W⁻¹K` with `E < −1e-8`, lowest first.
pub fn bound_states(spec: &DeltaPotentialSpec, grid: &Grid1d) -> Result<Vec<BoundState>> {
    let sys = LineSystem::delta(spec, grid)?;
    let h = grid.spacing();
    let diag: Vec<f64> = sys.stiffness_diag().iter().map(|d| d / h).collect();
    let off: Vec<f64> = sys.stiffness_off().iter().map(|o| o / h).collect();
    let lower = diag
        .iter()
        .enumerate()
        .map(|(k, d)| {
            let left = if k > 0 { off[k - 1].abs() } else { 0.0 };
            let right = off.get(k).map_or(0.0, |o| o.abs());
            d - left - right
        })
        .fold(f64::INFINITY, f64::min)
        - 1.0;
    if lower >= -BOUND_STATE_THRESHOLD {
        return Ok(Vec::new());
    }
    let pairs = eigen::eigenpairs_in(&diag, &off, lower, -BOUND_STATE_THRESHOLD)?;
    let scale = h.sqrt().recip();
    Ok((0..pairs.values.len())
        .map(|k| BoundState {
            energy: pairs.values[k],
            profile: pairs.vector(k).iter().map(|&v| Complex64::new(v * scale, 0.0)).collect(),
        })
        .collect())
}

/// `φ − Σ ⟨b, φ⟩ b` in the grid inner product.
pub fn project_continuous(grid: &Grid1d, phi: &[Complex64], states: &[BoundState]) -> Result<Vec<Complex64>> {
    if phi.len() != grid.nodes() {
        return Err(invalid("datum does not match the grid"));
    }
    for (i, a) in states.iter().enumerate() {
        if a.profile.len() != grid.nodes() {
            return Err(invalid("bound state does not match the grid"));
        }
        for (j, b) in states.iter().enumerate() {
            let want = if i == j { 1.0 } else { 0.0 };
            let got = grid.inner(&a.profile, &b.profile);
            if (got - want).norm() > ORTHOGONALITY_TOL {
                return Err(invalid(format!(
                    "bound states {i} and {j} are not orthonormal: inner product {got}"
                )));
            }
        }
    }
    let mut out = phi.to_vec();
    for b in states {
        let c = grid.inner(&b.profile, phi);
        for (o, p) in out.iter_mut().zip(&b.profile) {
            *o -= c * p;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Grid bound state of one interaction on an unbounded grid:
    /// `u_k = e^{−κh|k|}` with `2 sinh(κh) = −αh` and `E = −4 sinh²(κh/2)/h²`.
    fn discrete_energy(alpha: f64, h: f64) -> f64 {
        let kh = (-alpha * h / 2.0).asinh();
        -4.0 * (kh / 2.0).sinh().powi(2) / (h * h)
    }

    #[test]
    fn attractive_interaction_has_one_state() {
        let grid = Grid1d::covering(-40.0, 40.0, 1e-2).unwrap();
        let spec = DeltaPotentialSpec::single(-2.0, 0.0).unwrap();
        let states = bound_states(&spec, &grid).unwrap();
        assert_eq!(states.len(), 1);
        let e = states[0].energy;
        assert!((e - discrete_energy(-2.0, 1e-2)).abs() < 1e-10, "{e}");
        assert!((grid.norm(&states[0].profile) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn no_states_without_attraction() {
        let grid = Grid1d::covering(-20.0, 20.0, 0.02).unwrap();
        assert!(bound_states(&DeltaPotentialSpec::default(), &grid).unwrap().is_empty());
        let rep = DeltaPotentialSpec::single(2.0, 0.0).unwrap();
        assert!(bound_states(&rep, &grid).unwrap().is_empty());
    }

    #[test]
    fn count_matches_sign_of_strength() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let grid = Grid1d::covering(-30.0, 30.0, 0.02).unwrap();
        for _ in 0..20 {
            let mut alpha: f64 = rng.gen_range(-5.0..5.0);
            if alpha.abs() < 0.2 {
                alpha += alpha.signum() * 0.2;
            }
            let n = bound_states(&DeltaPotentialSpec::single(alpha, 0.3).unwrap(), &grid)
                .unwrap()
                .len();
            assert_eq!(n, usize::from(alpha < 0.0), "alpha = {alpha}");
        }
    }

    #[test]
    fn projection_properties() {
        let grid = Grid1d::covering(-30.0, 30.0, 0.02).unwrap();
        let spec = DeltaPotentialSpec::new(vec![-2.0, -1.3], vec![-0.7, 1.1]).unwrap();
        let states = bound_states(&spec, &grid).unwrap();
        assert!(!states.is_empty());
        let phi = grid.sample(|x| Complex64::new((-(x - 0.4) * (x - 0.4)).exp(), 0.3 * x));
        let once = project_continuous(&grid, &phi, &states).unwrap();
        for b in &states {
            assert!(grid.inner(&b.profile, &once).norm() < 1e-10);
        }
        let twice = project_continuous(&grid, &once, &states).unwrap();
        let d = once.iter().zip(&twice).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(d < 1e-12);
        let gone = project_continuous(&grid, &states[0].profile, &states).unwrap();
        assert!(grid.norm(&gone) < 1e-10);
        assert_eq!(project_continuous(&grid, &phi, &[]).unwrap(), phi);
    }

    #[test]
    fn rejects_non_orthogonal_states() {
        let grid = Grid1d::covering(-10.0, 10.0, 0.1).unwrap();
        let states = bound_states(&DeltaPotentialSpec::single(-2.0, 0.0).unwrap(), &grid).unwrap();
        let doubled = vec![states[0].clone(), states[0].clone()];
        let phi = vec![Complex64::new(1.0, 0.0); grid.nodes()];
        assert!(project_continuous(&grid, &phi, &doubled).is_err());
    }
}
