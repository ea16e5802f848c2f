//! Trigonometric polynomials `Σ_{|k|≤N} a_k e^{i(tk² + kx)}` on the circle:
//! their sup norm at a given time and the `L¹` norm of the datum.

use std::cell::RefCell;
use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{invalid, Error, Result};

/// Default cap on sample points per evaluation.
pub const DEFAULT_MAX_POINTS: usize = 1 << 24;

/// Relative change between successive `L¹` grid doublings accepted as converged.
pub const L1_TOLERANCE: f64 = 1e-7;

const GOLDEN_ITERATIONS: usize = 80;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// Coefficients `a_{−N}, …, a_N`.
#[derive(Debug, Clone, PartialEq)]
pub struct TorusData {
    cutoff: usize,
    coefficients: Vec<Complex64>,
}

impl TorusData {
    pub fn new(cutoff: usize, coefficients: Vec<Complex64>) -> Result<Self> {
        if cutoff == 0 {
            return Err(invalid("frequency cutoff must be positive"));
        }
        if coefficients.len() != 2 * cutoff + 1 {
            return Err(invalid(format!(
                "cutoff {cutoff} needs {} coefficients, got {}",
                2 * cutoff + 1,
                coefficients.len()
            )));
        }
        if coefficients.iter().any(|z| !z.is_finite()) {
            return Err(invalid("coefficients must be finite"));
        }
        if coefficients.iter().all(|z| *z == Complex64::new(0.0, 0.0)) {
            return Err(invalid("at least one coefficient must be nonzero"));
        }
        Ok(Self { cutoff, coefficients })
    }

    /// `a_k = 1` for every `|k| ≤ N`.
    pub fn uniform(cutoff: usize) -> Result<Self> {
        Self::new(cutoff, vec![Complex64::new(1.0, 0.0); 2 * cutoff + 1])
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn coefficient(&self, k: i64) -> Complex64 {
        let idx = k + self.cutoff as i64;
        if idx < 0 || idx as usize >= self.coefficients.len() {
            Complex64::new(0.0, 0.0)
        } else {
            self.coefficients[idx as usize]
        }
    }

    fn modes(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        let n = self.cutoff as i64;
        self.coefficients.iter().enumerate().map(move |(i, &a)| (i as i64 - n, a))
    }

    /// Direct evaluation of `Σ a_k e^{i(tk² + kx)}`.
    pub fn evaluate(&self, t: f64, x: f64) -> Complex64 {
        self.modes()
            .map(|(k, a)| {
                let kf = k as f64;
                a * Complex64::from_polar(1.0, t * kf * kf + kf * x)
            })
            .sum()
    }

    /// Values at `x_m = 2πm/points` by one inverse FFT.
    fn samples(&self, t: f64, points: usize) -> Vec<Complex64> {
        let mut buf = vec![Complex64::new(0.0, 0.0); points];
        for (k, a) in self.modes() {
            let kf = k as f64;
            buf[k.rem_euclid(points as i64) as usize] += a * Complex64::from_polar(1.0, t * kf * kf);
        }
        let plan = PLANNER.with(|p| p.borrow_mut().plan_fft_inverse(points));
        plan.process(&mut buf);
        buf
    }
}

/// Largest modulus found and where.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TorusPeak {
    pub value: f64,
    pub location: f64,
}

fn check_points(points: usize, cap: usize) -> Result<()> {
    if points > cap {
        return Err(Error::ResourceLimit {
            what: "torus sample points",
            needed: points,
            cap,
        });
    }
    Ok(())
}

/// Golden-section search for the largest `|f|` on `[a, b]`.
fn refine(data: &TorusData, t: f64, mut a: f64, mut b: f64) -> TorusPeak {
    let ratio = 0.5 * (5f64.sqrt() - 1.0);
    let f = |x: f64| data.evaluate(t, x).norm();
    let mut c = b - ratio * (b - a);
    let mut d = a + ratio * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..GOLDEN_ITERATIONS {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - ratio * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + ratio * (b - a);
            fd = f(d);
        }
    }
    if fc >= fd {
        TorusPeak { value: fc, location: c }
    } else {
        TorusPeak { value: fd, location: d }
    }
}

fn peak_from_samples(data: &TorusData, t: f64, values: impl Iterator<Item = f64>, points: usize) -> TorusPeak {
    let (m, grid_max) = values
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |(bm, bv), (m, v)| if v > bv { (m, v) } else { (bm, bv) });
    let step = 2.0 * PI / points as f64;
    let x = m as f64 * step;
    let refined = refine(data, t, x - step, x + step);
    if refined.value >= grid_max {
        refined
    } else {
        TorusPeak { value: grid_max, location: x }
    }
}

/// `‖Σ a_k e^{i(tk² + kx)}‖_∞` from `oversample·(2N+1)` FFT samples followed by
/// a golden-section refinement around the largest sample.
pub fn torus_supnorm(data: &TorusData, t: f64, oversample: usize) -> Result<TorusPeak> {
    torus_supnorm_with(data, t, oversample, DEFAULT_MAX_POINTS)
}

pub fn torus_supnorm_with(data: &TorusData, t: f64, oversample: usize, max_points: usize) -> Result<TorusPeak> {
    if oversample < 8 {
        return Err(invalid(format!("oversampling factor must be at least 8, got {oversample}")));
    }
    if !t.is_finite() {
        return Err(invalid(format!("time must be finite, got {t}")));
    }
    let points = oversample * (2 * data.cutoff + 1);
    check_points(points, max_points)?;
    let values = data.samples(t, points);
    Ok(peak_from_samples(data, t, values.iter().map(|z| z.norm()), points))
}

/// The same maximum by direct summation at every grid point, `O(N·points)`.
pub fn torus_supnorm_dense(data: &TorusData, t: f64, points: usize) -> Result<TorusPeak> {
    if points < 2 * data.cutoff + 1 {
        return Err(invalid("dense evaluation needs at least 2N+1 points"));
    }
    let step = 2.0 * PI / points as f64;
    let values = (0..points).map(|m| data.evaluate(t, m as f64 * step).norm());
    Ok(peak_from_samples(data, t, values, points))
}

/// `(1/2π)∫|Σ a_k e^{ikx}| dx` with its grid-doubling change.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct L1Norm {
    pub value: f64,
    pub doubling_change: f64,
    pub points: usize,
}

/// Trapezoidal `L¹` norm of the datum under the normalized measure, doubling
/// the grid from `64·(2N+1)` points until two successive values agree to
/// `L1_TOLERANCE` relative.
pub fn torus_l1_norm(data: &TorusData, max_points: usize) -> Result<L1Norm> {
    let mean_modulus = |points: usize| data.samples(0.0, points).iter().map(|z| z.norm()).sum::<f64>() / points as f64;
    let mut points = 64 * (2 * data.cutoff + 1);
    check_points(points, max_points)?;
    let mut value = mean_modulus(points);
    loop {
        let doubled = 2 * points;
        if doubled > max_points {
            return Err(Error::AccuracyFailure {
                requested: L1_TOLERANCE,
                achieved: f64::NAN,
            });
        }
        let next = mean_modulus(doubled);
        let change = (next - value).abs() / next;
        points = doubled;
        value = next;
        if change <= L1_TOLERANCE {
            return Ok(L1Norm {
                value,
                doubling_change: change,
                points,
            });
        }
    }
}

/// `|t|^{1/2}·sup/‖φ‖_{L¹}` at one time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TorusSample {
    pub t: f64,
    pub supnorm: f64,
    pub scaled: f64,
}

/// The scaled sup norm over `times`, sharing one `L¹` evaluation.
pub fn torus_scaled_sweep(data: &TorusData, times: &[f64], oversample: usize) -> Result<(L1Norm, Vec<TorusSample>)> {
    let l1 = torus_l1_norm(data, DEFAULT_MAX_POINTS)?;
    let samples = times
        .iter()
        .map(|&t| {
            let peak = torus_supnorm(data, t, oversample)?;
            Ok(TorusSample {
                t,
                supnorm: peak.value,
                scaled: t.abs().sqrt() * peak.value / l1.value,
            })
        })
        .collect::<Result<_>>()?;
    Ok((l1, samples))
}

/// Times `1/(16N²) … 1/N`, log-spaced.
pub fn small_time_grid(cutoff: usize, count: usize) -> Result<Vec<f64>> {
    let n = cutoff as f64;
    crate::decay::log_grid(1.0 / (16.0 * n * n), 1.0 / n, count)
}
