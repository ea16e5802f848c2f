//! The lattice dispersion relation `ψ(ξ) = 4 sin²(ξ/2)` and its derivatives.

use std::f64::consts::PI;

use crate::error::{invalid, Result};

/// Symbol of `−Δ` on ℤ. Stateless; the methods are the closed forms.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PhaseFunction;

impl PhaseFunction {
    pub fn value(&self, xi: f64) -> f64 {
        let s = (0.5 * xi).sin();
        4.0 * s * s
    }

    /// Group velocity `ψ′(ξ) = 2 sin ξ`.
    pub fn d1(&self, xi: f64) -> f64 {
        2.0 * xi.sin()
    }

    pub fn d2(&self, xi: f64) -> f64 {
        2.0 * xi.cos()
    }

    pub fn d3(&self, xi: f64) -> f64 {
        -2.0 * xi.sin()
    }

    /// `|ψ″(ξ)| + |ψ‴(ξ)|`, the quantity whose positivity gives the cube-root decay.
    pub fn vdc_margin_at(&self, xi: f64) -> f64 {
        self.d2(xi).abs() + self.d3(xi).abs()
    }
}

/// Minimum of `|ψ″| + |ψ‴|` over `grid_size` equispaced points of `[−π, π]`
/// (both endpoints included).
pub fn phase_vdc_margin(grid_size: usize) -> Result<f64> {
    if grid_size < 1000 {
        return Err(invalid(format!("grid_size must be at least 1000, got {grid_size}")));
    }
    let psi = PhaseFunction;
    let step = 2.0 * PI / (grid_size - 1) as f64;
    Ok((0..grid_size)
        .map(|k| psi.vdc_margin_at(-PI + step * k as f64))
        .fold(f64::INFINITY, f64::min))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_forms() {
        let psi = PhaseFunction;
        assert_eq!(psi.value(0.0), 0.0);
        assert!((psi.value(PI) - 4.0).abs() < 1e-15);
        assert!((psi.value(-PI) - 4.0).abs() < 1e-15);
        for k in 0..50 {
            let xi = -3.0 + 0.12 * k as f64;
            assert!((psi.value(xi) - psi.value(-xi)).abs() < 1e-15);
            // ψ = 2 − 2cos ξ, so the derivatives follow.
            assert!((psi.value(xi) - (2.0 - 2.0 * xi.cos())).abs() < 1e-14);
            let h = 1e-5;
            let fd = (psi.value(xi + h) - psi.value(xi - h)) / (2.0 * h);
            assert!((fd - psi.d1(xi)).abs() < 1e-8);
            let fd2 = (psi.d1(xi + h) - psi.d1(xi - h)) / (2.0 * h);
            assert!((fd2 - psi.d2(xi)).abs() < 1e-8);
            let fd3 = (psi.d2(xi + h) - psi.d2(xi - h)) / (2.0 * h);
            assert!((fd3 - psi.d3(xi)).abs() < 1e-8);
        }
    }

    #[test]
    fn margin_examples() {
        let psi = PhaseFunction;
        assert_eq!(psi.vdc_margin_at(0.0), 2.0);
        assert!((psi.vdc_margin_at(PI / 4.0) - 2.0 * 2f64.sqrt()).abs() < 1e-14);
        let m = phase_vdc_margin(1_000_000).unwrap();
        assert!((m - 2.0).abs() < 1e-5, "margin {m}");
        assert!(m >= 2.0 - 1e-12);
        assert!(phase_vdc_margin(999).is_err());
    }
}
