//! Integer-order Bessel functions of the first kind.
//!
//! Power series for `|x| ≤ SERIES_LIMIT`, Miller backward recurrence normalized
//! by `J₀ + 2ΣJ₂ₖ = 1` beyond. Negative orders and arguments use
//! `J₋ₙ(x) = (−1)ⁿJₙ(x)` and `Jₙ(−x) = (−1)ⁿJₙ(x)`.

/// Arguments up to this magnitude are summed from the power series.
/// Past this point cancellation in the alternating series costs more than
/// 1e-14 absolute (about 6e-10 by x = 20).
pub const SERIES_LIMIT: f64 = 8.0;

const RESCALE_ABOVE: f64 = 1e250;
const RESCALE_BY: f64 = 1e-250;

fn parity(n: u64) -> f64 {
    if n.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// `Jₙ(x)` for any integer order and real argument.
pub fn bessel_j(n: i64, x: f64) -> f64 {
    let order = n.unsigned_abs();
    let mut sign = if n < 0 { parity(order) } else { 1.0 };
    if x < 0.0 {
        sign *= parity(order);
    }
    let ax = x.abs();
    let value = if ax <= SERIES_LIMIT {
        series(order, ax)
    } else {
        miller(order as usize, ax)[order as usize]
    };
    sign * value
}

/// `[J₀(x), J₁(x), …, J_nmax(x)]` in one pass.
pub fn bessel_j_sequence(nmax: usize, x: f64) -> Vec<f64> {
    let ax = x.abs();
    let mut out = if ax <= SERIES_LIMIT {
        (0..=nmax as u64).map(|n| series(n, ax)).collect()
    } else {
        miller(nmax, ax)
    };
    if x < 0.0 {
        for v in out.iter_mut().skip(1).step_by(2) {
            *v = -*v;
        }
    }
    out
}

/// `Σ (−1)ᵏ (x/2)^{2k+n} / (k!(k+n)!)` for `x ≥ 0`.
fn series(n: u64, x: f64) -> f64 {
    if x == 0.0 {
        return if n == 0 { 1.0 } else { 0.0 };
    }
    let half = 0.5 * x;
    let mut term = 1.0;
    for i in 1..=n {
        term *= half / i as f64;
        if term == 0.0 {
            return 0.0;
        }
    }
    let q = -half * half;
    let mut sum = term;
    let nf = n as f64;
    for k in 1..600u32 {
        let kf = k as f64;
        term *= q / (kf * (kf + nf));
        sum += term;
        if kf > half && term.abs() <= 1e-17 * sum.abs() {
            break;
        }
    }
    sum
}

/// Backward recurrence `J_{k−1} = (2k/x)J_k − J_{k+1}` from an order well past
/// both `nmax` and the turning point `k ≈ x`, for `x > 0`.
fn miller(nmax: usize, x: f64) -> Vec<f64> {
    let top = (nmax as f64).max(x.ceil());
    let extra = 20.0 + 12.0 * x.cbrt();
    let mut start = (top + extra).ceil() as usize;
    start += start % 2;

    let mut out = vec![0.0; nmax + 1];
    let mut above = 0.0; // J_{k+1}
    let mut current = 1e-30; // J_k
    let mut norm = 0.0;
    // Stored entries with index >= lowest_stored may need rescaling.
    let mut lowest_stored = nmax + 1;
    for k in (1..=start).rev() {
        let below = (2.0 * k as f64 / x) * current - above;
        above = current;
        current = below;
        let idx = k - 1;
        if idx <= nmax {
            out[idx] = current;
            lowest_stored = idx;
        }
        if idx % 2 == 0 && idx > 0 {
            norm += 2.0 * current;
        }
        if current.abs() > RESCALE_ABOVE {
            current *= RESCALE_BY;
            above *= RESCALE_BY;
            norm *= RESCALE_BY;
            if lowest_stored <= nmax {
                for v in &mut out[lowest_stored..] {
                    *v *= RESCALE_BY;
                }
            }
        }
    }
    norm += current;
    for v in &mut out {
        *v /= norm;
    }
    out
}
