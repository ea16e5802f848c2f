//! `I(t; y, z, a) = ∫₀^π exp(it[2cos θ + 2z·arcsin(a sin(θ/2))]) · e^{ityθ} · sin θ dθ`,
//! the oscillatory integral that controls the two-speed junction problem.

use num_complex::Complex64;

use super::quadrature::{self, QuadratureResult};
use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OscIntegralParams {
    pub t: f64,
    pub y: f64,
    pub z: f64,
    pub a: f64,
}

impl OscIntegralParams {
    pub fn new(t: f64, y: f64, z: f64, a: f64) -> Result<Self> {
        if !(t.is_finite() && y.is_finite() && z.is_finite()) {
            return Err(invalid("t, y and z must be finite"));
        }
        if !(a > 0.0 && a <= 1.0) {
            return Err(invalid(format!("a must lie in (0, 1], got {a}")));
        }
        Ok(Self { t, y, z, a })
    }

    /// Real phase `t(2cos θ + 2z·arcsin(a sin(θ/2)) + yθ)`.
    pub fn phase(&self, theta: f64) -> f64 {
        // a·sin(θ/2) ∈ [0, a] ⊆ [0, 1]; the principal arcsin branch is unambiguous.
        let s = (self.a * (0.5 * theta).sin()).min(1.0);
        self.t * (2.0 * theta.cos() + 2.0 * self.z * s.asin() + self.y * theta)
    }
}

/// Panel count grows like `1 + |t|(1 + |y| + |z|)`, which bounds the phase derivative.
pub fn coupled_oscillatory_integral(params: OscIntegralParams, tol: f64) -> Result<QuadratureResult> {
    super::check_tol(tol)?;
    let p = params;
    let panels = (1.0 + p.t.abs() * (1.0 + p.y.abs() + p.z.abs())).ceil() as usize;
    quadrature::integrate_panels(
        |theta| Complex64::from_polar(theta.sin(), p.phase(theta)),
        0.0,
        std::f64::consts::PI,
        panels,
        tol,
        quadrature::DEFAULT_PANEL_BUDGET,
    )
}
