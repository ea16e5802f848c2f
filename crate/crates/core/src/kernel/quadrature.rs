//! Composite Gauss–Legendre quadrature on equal panels, with the error
//! estimated by comparing `P` against `2P` panels.

use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};

/// Nodes per panel.
pub const GAUSS_ORDER: usize = 20;

/// Upper limit on the number of panels tried before giving up.
pub const DEFAULT_PANEL_BUDGET: usize = 1 << 22;

/// Nodes and weights on `[−1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// Newton iteration on `P_n` from the usual cosine initial guesses.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n.div_ceil(2) {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    pub fn standard() -> &'static GaussLegendre {
        static RULE: OnceLock<GaussLegendre> = OnceLock::new();
        RULE.get_or_init(|| GaussLegendre::new(GAUSS_ORDER))
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let (p, pm1) = if n == 0 { (1.0, 0.0) } else { (p1, p0) };
    let d = n as f64 * (x * p - pm1) / (x * x - 1.0);
    (p, d)
}

/// Value with its estimated absolute error and the panel count used.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureResult {
    pub value: Complex64,
    pub error_estimate: f64,
    pub panels: usize,
}

/// Composite rule with `panels` equal panels on `[a, b]`.
pub fn composite<F>(f: &F, a: f64, b: f64, panels: usize) -> Complex64
where
    F: Fn(f64) -> Complex64,
{
    let rule = GaussLegendre::standard();
    let width = (b - a) / panels as f64;
    let half = 0.5 * width;
    let mut total = Complex64::new(0.0, 0.0);
    for p in 0..panels {
        let mid = a + (p as f64 + 0.5) * width;
        let mut panel = Complex64::new(0.0, 0.0);
        for (x, w) in rule.nodes.iter().zip(&rule.weights) {
            panel += f(mid + half * x) * *w;
        }
        total += panel * half;
    }
    total
}

/// Doubles the panel count from `initial_panels` until two successive
/// composite values agree to `tol`.
pub fn integrate_panels<F>(
    f: F,
    a: f64,
    b: f64,
    initial_panels: usize,
    tol: f64,
    panel_budget: usize,
) -> Result<QuadratureResult>
where
    F: Fn(f64) -> Complex64,
{
    if !(tol > 0.0) {
        return Err(invalid(format!("tolerance must be positive, got {tol}")));
    }
    let mut panels = initial_panels.max(1);
    let mut coarse = composite(&f, a, b, panels);
    let mut last_error = f64::INFINITY;
    while 2 * panels <= panel_budget {
        let fine = composite(&f, a, b, 2 * panels);
        let error = (fine - coarse).norm();
        panels *= 2;
        if error <= tol {
            return Ok(QuadratureResult {
                value: fine,
                error_estimate: error,
                panels,
            });
        }
        last_error = error;
        coarse = fine;
    }
    Err(Error::AccuracyFailure {
        requested: tol,
        achieved: last_error,
    })
}
