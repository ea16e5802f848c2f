//! The lattice fundamental solution `K_t(j)` and the junction oscillatory
//! integral, each with an independent evaluation path.
//!
//! `K_t(j) = (1/2π) ∫_{−π}^{π} e^{−4it sin²(ξ/2)} e^{ijξ} dξ`, normalized so that
//! `K_0 = δ₀` and `u(t) = K_t ∗ φ` solves `i u_t + Δu = 0`. Writing
//! `4 sin²(ξ/2) = 2 − 2cos ξ` and expanding with Jacobi–Anger gives the closed
//! form `K_t(j) = e^{−2it} iʲ J_j(2t)`.

pub mod bessel;
mod oscint;
mod phase;
pub mod quadrature;

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{invalid, Result};

pub use oscint::{coupled_oscillatory_integral, OscIntegralParams};
pub use phase::{phase_vdc_margin, PhaseFunction};
pub use quadrature::QuadratureResult;

/// Smallest and largest tolerance accepted by the quadrature evaluators.
pub const TOL_RANGE: (f64, f64) = (1e-13, 1e-4);

/// A point `(t, j)` at which to evaluate the kernel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelRequest {
    pub t: f64,
    pub j: i64,
}

impl KernelRequest {
    pub fn new(t: f64, j: i64) -> Result<Self> {
        if !t.is_finite() {
            return Err(invalid(format!("kernel time must be finite, got {t}")));
        }
        Ok(Self { t, j })
    }
}

pub(crate) fn check_tol(tol: f64) -> Result<()> {
    if !(TOL_RANGE.0..=TOL_RANGE.1).contains(&tol) {
        return Err(invalid(format!(
            "tolerance {tol:e} outside [{:e}, {:e}]",
            TOL_RANGE.0, TOL_RANGE.1
        )));
    }
    Ok(())
}

/// `iⁿ` for any integer `n`.
pub fn i_pow(n: i64) -> Complex64 {
    match n.rem_euclid(4) {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

/// `K_t(j)` by Gauss panels over `[−π, π]`, panel count proportional to `1 + |t| + |j|`.
pub fn kernel_quadrature(req: KernelRequest, tol: f64) -> Result<QuadratureResult> {
    kernel_quadrature_with_budget(req, tol, quadrature::DEFAULT_PANEL_BUDGET)
}

pub fn kernel_quadrature_with_budget(
    req: KernelRequest,
    tol: f64,
    panel_budget: usize,
) -> Result<QuadratureResult> {
    check_tol(tol)?;
    let KernelRequest { t, j } = req;
    let jf = j as f64;
    let psi = PhaseFunction;
    let panels = (1.0 + t.abs() + jf.abs()).ceil() as usize;
    quadrature::integrate_panels(
        |xi| Complex64::from_polar(1.0 / (2.0 * PI), jf * xi - t * psi.value(xi)),
        -PI,
        PI,
        panels,
        tol,
        panel_budget,
    )
}

/// `K_t(j) = e^{−2it} iʲ J_j(2t)`.
pub fn kernel_bessel(req: KernelRequest) -> Complex64 {
    Complex64::from_polar(1.0, -2.0 * req.t) * i_pow(req.j) * bessel::bessel_j(req.j, 2.0 * req.t)
}

/// `[K_t(0), …, K_t(jmax)]`; negative sites follow from `K_t(−j) = K_t(j)`.
pub fn kernel_row(t: f64, jmax: usize) -> Vec<Complex64> {
    let phase = Complex64::from_polar(1.0, -2.0 * t);
    bessel::bessel_j_sequence(jmax, 2.0 * t)
        .into_iter()
        .enumerate()
        .map(|(j, v)| phase * i_pow(j as i64) * v)
        .collect()
}
