//! Finitely supported lattice functions, the second difference on ℤ, and the
//! tridiagonal operator of two lattices with different speeds joined at a site.
//!
//! The coupled operator acts on the unknowns `u(j)`, `j ≤ -1` (left lattice,
//! coefficient `b1⁻²`) and `v(j)`, `j ≥ 1` (right lattice, coefficient `b2⁻²`).
//! The shared junction value at `j = 0` is eliminated through the two
//! coupling identities (continuity and flux balance), which leaves a
//! symmetric matrix whose junction rows carry the mixed weight
//! `1/(b1² + b2²)`.

use num_complex::Complex64;

use crate::error::{invalid, Result};

/// A complex-valued function on ℤ that vanishes outside
/// `[offset, offset + values.len() - 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeState {
    offset: i64,
    values: Vec<Complex64>,
}

impl LatticeState {
    pub fn new(offset: i64, values: Vec<Complex64>) -> Result<Self> {
        if values.is_empty() {
            return Err(invalid("lattice state needs at least one stored site"));
        }
        if values.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(invalid("lattice state contains a non-finite value"));
        }
        Ok(Self { offset, values })
    }

    pub fn from_real(offset: i64, values: &[f64]) -> Result<Self> {
        Self::new(offset, values.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    /// Unit mass at `site`.
    pub fn delta(site: i64) -> Self {
        Self {
            offset: site,
            values: vec![Complex64::new(1.0, 0.0)],
        }
    }

    pub fn offset(&self) -> i64 {
        self.offset
    }

    /// Last stored site (inclusive).
    pub fn last(&self) -> i64 {
        self.offset + self.values.len() as i64 - 1
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn get(&self, site: i64) -> Complex64 {
        let k = site - self.offset;
        if k < 0 || k >= self.values.len() as i64 {
            Complex64::new(0.0, 0.0)
        } else {
            self.values[k as usize]
        }
    }

    /// Sites carrying a value with modulus above `threshold`, as an inclusive range.
    pub fn support(&self, threshold: f64) -> Option<(i64, i64)> {
        let first = self.values.iter().position(|z| z.norm() > threshold)?;
        let last = self.values.iter().rposition(|z| z.norm() > threshold)?;
        Some((self.offset + first as i64, self.offset + last as i64))
    }

    /// Copy of the state restricted to (or zero-padded onto) `[first, last]`.
    pub fn window(&self, first: i64, last: i64) -> Result<Self> {
        if last < first {
            return Err(invalid(format!("empty window [{first}, {last}]")));
        }
        let values = (first..=last).map(|j| self.get(j)).collect();
        Ok(Self { offset: first, values })
    }

    pub fn conj(&self) -> Self {
        Self {
            offset: self.offset,
            values: self.values.iter().map(|z| z.conj()).collect(),
        }
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self {
            offset: self.offset,
            values: self.values.iter().map(|z| z * c).collect(),
        }
    }

    /// Pointwise `a·self + b·other` on the union of both windows.
    pub fn combine(&self, a: Complex64, other: &Self, b: Complex64) -> Self {
        let first = self.offset.min(other.offset);
        let last = self.last().max(other.last());
        let values = (first..=last)
            .map(|j| a * self.get(j) + b * other.get(j))
            .collect();
        Self { offset: first, values }
    }

    /// Largest pointwise difference to `other` over the union of both windows.
    pub fn max_distance(&self, other: &Self) -> f64 {
        let first = self.offset.min(other.offset);
        let last = self.last().max(other.last());
        (first..=last)
            .map(|j| (self.get(j) - other.get(j)).norm())
            .fold(0.0, f64::max)
    }

    pub fn sum(&self) -> Complex64 {
        self.values.iter().sum()
    }
}

/// `(Δ u)(j) = u(j+1) − 2u(j) + u(j−1)`; the result has one more site on each side.
pub fn discrete_laplacian(state: &LatticeState) -> LatticeState {
    let first = state.offset - 1;
    let last = state.last() + 1;
    let values = (first..=last)
        .map(|j| state.get(j + 1) - 2.0 * state.get(j) + state.get(j - 1))
        .collect();
    LatticeState {
        offset: first,
        values,
    }
}

/// ℓᵖ norm for `p ∈ [1, ∞]`; pass `f64::INFINITY` for the sup norm.
pub fn lp_norm(state: &LatticeState, p: f64) -> Result<f64> {
    lp_norm_slice(state.values(), p)
}

pub(crate) fn lp_norm_slice(values: &[Complex64], p: f64) -> Result<f64> {
    if p.is_nan() || p < 1.0 {
        return Err(invalid(format!("lp norm needs p >= 1, got {p}")));
    }
    if p.is_infinite() {
        return Ok(values.iter().map(|z| z.norm()).fold(0.0, f64::max));
    }
    // Scale by the maximum so large p does not overflow.
    let peak = values.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if peak == 0.0 {
        return Ok(0.0);
    }
    let sum: f64 = values.iter().map(|z| (z.norm() / peak).powf(p)).sum();
    Ok(peak * sum.powf(1.0 / p))
}

/// Speeds and truncation of the two-lattice junction problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoupledLatticeSpec {
    b1: f64,
    b2: f64,
    m: usize,
}

impl CoupledLatticeSpec {
    /// `m` sites are kept on each side of the junction.
    pub fn new(b1: f64, b2: f64, m: usize) -> Result<Self> {
        if !(b1.is_finite() && b1 > 0.0 && b2.is_finite() && b2 > 0.0) {
            return Err(invalid(format!("speeds must be positive, got b1={b1}, b2={b2}")));
        }
        if m < 2 {
            return Err(invalid(format!("truncation must keep at least 2 sites per side, got {m}")));
        }
        Ok(Self { b1, b2, m })
    }

    pub fn b1(&self) -> f64 {
        self.b1
    }

    pub fn b2(&self) -> f64 {
        self.b2
    }

    pub fn truncation(&self) -> usize {
        self.m
    }

    pub fn dimension(&self) -> usize {
        2 * self.m
    }

    /// Weight `1/(b1² + b2²)` linking the two sites next to the junction.
    pub fn junction_weight(&self) -> f64 {
        1.0 / (self.b1 * self.b1 + self.b2 * self.b2)
    }

    /// Largest single-side coefficient `max(b1⁻², b2⁻²)`.
    pub fn max_coefficient(&self) -> f64 {
        (self.b1 * self.b1).recip().max((self.b2 * self.b2).recip())
    }

    /// Lattice site stored at unknown index `k` (the junction site 0 is skipped).
    pub fn site_of(&self, k: usize) -> i64 {
        let m = self.m as i64;
        let k = k as i64;
        if k < m {
            k - m
        } else {
            k - m + 1
        }
    }

    /// Unknown index for a site, `None` for the junction or outside the truncation.
    pub fn index_of(&self, site: i64) -> Option<usize> {
        let m = self.m as i64;
        match site {
            0 => None,
            j if (-m..0).contains(&j) => Some((j + m) as usize),
            j if (1..=m).contains(&j) => Some((j + m - 1) as usize),
            _ => None,
        }
    }

    /// Junction value `u(0) = (b2²u(−1) + b1²v(1)) / (b1² + b2²)`, the unique value
    /// satisfying both continuity and flux balance.
    pub fn junction_value(&self, left: Complex64, right: Complex64) -> Complex64 {
        let (b1s, b2s) = (self.b1 * self.b1, self.b2 * self.b2);
        (left * b2s + right * b1s) / (b1s + b2s)
    }
}

/// Real symmetric tridiagonal matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricOperator {
    diag: Vec<f64>,
    off: Vec<f64>,
}

impl SymmetricOperator {
    pub fn new(diag: Vec<f64>, off: Vec<f64>) -> Result<Self> {
        if diag.is_empty() || off.len() + 1 != diag.len() {
            return Err(invalid(format!(
                "tridiagonal shape mismatch: {} diagonal, {} off-diagonal entries",
                diag.len(),
                off.len()
            )));
        }
        Ok(Self { diag, off })
    }

    pub fn dimension(&self) -> usize {
        self.diag.len()
    }

    pub fn diagonal(&self) -> &[f64] {
        &self.diag
    }

    pub fn off_diagonal(&self) -> &[f64] {
        &self.off
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        match i.abs_diff(j) {
            0 => self.diag[i],
            1 => self.off[i.min(j)],
            _ => 0.0,
        }
    }

    pub fn row_sum(&self, i: usize) -> f64 {
        let mut s = self.diag[i];
        if i > 0 {
            s += self.off[i - 1];
        }
        if i + 1 < self.diag.len() {
            s += self.off[i];
        }
        s
    }

    pub fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        let n = self.diag.len();
        assert_eq!(x.len(), n, "operator/vector dimension mismatch");
        (0..n)
            .map(|i| {
                let mut y = x[i] * self.diag[i];
                if i > 0 {
                    y += x[i - 1] * self.off[i - 1];
                }
                if i + 1 < n {
                    y += x[i + 1] * self.off[i];
                }
                y
            })
            .collect()
    }

    /// Union of Gershgorin discs as an interval `[lo, hi]`.
    pub fn gershgorin_bounds(&self) -> (f64, f64) {
        let n = self.diag.len();
        (0..n).fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), i| {
            let mut r = 0.0;
            if i > 0 {
                r += self.off[i - 1].abs();
            }
            if i + 1 < n {
                r += self.off[i].abs();
            }
            (lo.min(self.diag[i] - r), hi.max(self.diag[i] + r))
        })
    }
}

/// Truncated junction operator of size `2M`, closed by cutting the end rows.
pub fn build_coupled_operator(spec: &CoupledLatticeSpec) -> SymmetricOperator {
    let m = spec.m;
    let n = 2 * m;
    let c1 = (spec.b1 * spec.b1).recip();
    let c2 = (spec.b2 * spec.b2).recip();
    let w = spec.junction_weight();

    let mut diag = vec![0.0; n];
    let mut off = vec![0.0; n - 1];
    for k in 0..m {
        diag[k] = -2.0 * c1;
        diag[m + k] = -2.0 * c2;
    }
    for k in 0..m - 1 {
        off[k] = c1;
        off[m + k] = c2;
    }
    diag[m - 1] = -c1 - w;
    diag[m] = -w - c2;
    off[m - 1] = w;
    SymmetricOperator { diag, off }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn laplacian_of_delta() {
        let out = discrete_laplacian(&LatticeState::delta(0));
        assert_eq!(out.offset(), -1);
        assert_eq!(out.values(), &[c(1.0, 0.0), c(-2.0, 0.0), c(1.0, 0.0)]);
    }

    #[test]
    fn laplacian_kills_constants_and_ramps() {
        let constant = LatticeState::new(-5, vec![c(2.5, -1.0); 11]).unwrap();
        let out = discrete_laplacian(&constant);
        for j in -4..=4 {
            assert_eq!(out.get(j), c(0.0, 0.0));
        }
        let ramp = LatticeState::from_real(-5, &(-5..=5).map(|j| j as f64).collect::<Vec<_>>())
            .unwrap();
        let out = discrete_laplacian(&ramp);
        for j in -4..=4 {
            assert_eq!(out.get(j), c(0.0, 0.0));
        }
    }

    #[test]
    fn norm_examples() {
        let delta = LatticeState::delta(3);
        for p in [1.0, 1.5, 2.0, 7.0, f64::INFINITY] {
            assert!((lp_norm(&delta, p).unwrap() - 1.0).abs() < 1e-15);
        }
        let ones = LatticeState::from_real(0, &[1.0, 1.0]).unwrap();
        assert!((lp_norm(&ones, 2.0).unwrap() - 2f64.sqrt()).abs() < 1e-15);
        let s = LatticeState::new(0, vec![c(3.0, 0.0), c(0.0, -4.0)]).unwrap();
        assert_eq!(lp_norm(&s, f64::INFINITY).unwrap(), 4.0);
        assert!(lp_norm(&s, 0.5).is_err());
        assert!(lp_norm(&s, f64::NAN).is_err());
    }

    #[test]
    fn state_rejects_bad_values() {
        assert!(LatticeState::new(0, vec![]).is_err());
        assert!(LatticeState::new(0, vec![c(f64::NAN, 0.0)]).is_err());
        assert!(LatticeState::new(0, vec![c(0.0, f64::INFINITY)]).is_err());
    }

    #[test]
    fn coupled_spec_validation() {
        assert!(CoupledLatticeSpec::new(0.0, 1.0, 10).is_err());
        assert!(CoupledLatticeSpec::new(1.0, -1.0, 10).is_err());
        assert!(CoupledLatticeSpec::new(1.0, 1.0, 1).is_err());
        let spec = CoupledLatticeSpec::new(1.0, 2.0, 5).unwrap();
        for k in 0..spec.dimension() {
            assert_eq!(spec.index_of(spec.site_of(k)), Some(k));
        }
        assert_eq!(spec.index_of(0), None);
        assert_eq!(spec.index_of(6), None);
        assert_eq!(spec.index_of(-6), None);
    }

    #[test]
    fn coupled_operator_junction_entry_for_equal_speeds() {
        let spec = CoupledLatticeSpec::new(1.0, 1.0, 4).unwrap();
        let a = build_coupled_operator(&spec);
        assert_eq!(a.entry(3, 4), 0.5);
        assert_eq!(a.entry(4, 3), 0.5);
        assert_eq!(a.entry(3, 3), -1.5);
        assert_eq!(a.entry(4, 4), -1.5);
    }

    #[test]
    fn coupled_operator_rows_match_displayed_matrix() {
        let (b1, b2) = (1.3, 0.7);
        let spec = CoupledLatticeSpec::new(b1, b2, 6).unwrap();
        let a = build_coupled_operator(&spec);
        let w = 1.0 / (b1 * b1 + b2 * b2);
        // Left junction row: (b1⁻², −b1⁻² − w, w); right junction row: (w, −w − b2⁻², b2⁻²).
        assert_eq!(a.entry(5, 4), 1.0 / (b1 * b1));
        assert_eq!(a.entry(5, 5), -1.0 / (b1 * b1) - w);
        assert_eq!(a.entry(5, 6), w);
        assert_eq!(a.entry(6, 6), -w - 1.0 / (b2 * b2));
        assert_eq!(a.entry(6, 7), 1.0 / (b2 * b2));
        assert_eq!(a.entry(2, 2), -2.0 / (b1 * b1));
        assert_eq!(a.entry(9, 9), -2.0 / (b2 * b2));
    }

    #[test]
    fn eliminated_junction_reproduces_laplacian_rows() {
        // Applying A to U equals b⁻²Δ evaluated with the reconstructed u(0).
        let spec = CoupledLatticeSpec::new(1.0, 2.0, 6).unwrap();
        let a = build_coupled_operator(&spec);
        let x: Vec<Complex64> = (0..12).map(|k| c((k as f64).sin(), (k as f64 * 0.3).cos())).collect();
        let y = a.apply(&x);
        let u0 = spec.junction_value(x[5], x[6]);
        let left = (x[4] - 2.0 * x[5] + u0) / (spec.b1() * spec.b1());
        let right = (u0 - 2.0 * x[6] + x[7]) / (spec.b2() * spec.b2());
        assert!((y[5] - left).norm() < 1e-14);
        assert!((y[6] - right).norm() < 1e-14);
        // Flux balance: b1⁻²(u(−1) − u(0)) = b2⁻²(u(0) − v(1)).
        let flux_l = (x[5] - u0) / (spec.b1() * spec.b1());
        let flux_r = (u0 - x[6]) / (spec.b2() * spec.b2());
        assert!((flux_l - flux_r).norm() < 1e-14);
    }

    fn small_state() -> impl Strategy<Value = LatticeState> {
        (-20i64..20, prop::collection::vec((-3.0f64..3.0, -3.0f64..3.0), 1..24)).prop_map(
            |(offset, v)| {
                LatticeState::new(offset, v.into_iter().map(|(a, b)| c(a, b)).collect()).unwrap()
            },
        )
    }

    proptest! {
        #[test]
        fn laplacian_is_linear(u in small_state(), v in small_state(), a in -2.0f64..2.0, b in -2.0f64..2.0) {
            let (a, b) = (c(a, 0.5 * b), c(b, -a));
            let lhs = discrete_laplacian(&u.combine(a, &v, b));
            let rhs = discrete_laplacian(&u).combine(a, &discrete_laplacian(&v), b);
            let scale = 1.0 + lp_norm(&lhs, f64::INFINITY).unwrap();
            prop_assert!(lhs.max_distance(&rhs) <= 1e-13 * scale);
        }

        #[test]
        fn laplacian_telescopes(u in small_state()) {
            let total = discrete_laplacian(&u).sum();
            let l1 = lp_norm(&u, 1.0).unwrap();
            prop_assert!(total.norm() <= 1e-13 * l1.max(1.0));
        }

        #[test]
        fn norms_nest(u in small_state(), p in 1.0f64..12.0) {
            let inf = lp_norm(&u, f64::INFINITY).unwrap();
            let mid = lp_norm(&u, p).unwrap();
            let one = lp_norm(&u, 1.0).unwrap();
            prop_assert!(inf <= mid * (1.0 + 1e-12));
            prop_assert!(mid <= one * (1.0 + 1e-12));
            let bigger = lp_norm(&u.scale(c(1.5, 0.0)), p).unwrap();
            prop_assert!(bigger >= mid);
        }

        #[test]
        fn coupled_operator_symmetric_zero_row_sums(b1 in 0.2f64..5.0, b2 in 0.2f64..5.0, m in 2usize..40) {
            let spec = CoupledLatticeSpec::new(b1, b2, m).unwrap();
            let a = build_coupled_operator(&spec);
            let n = a.dimension();
            for i in 0..n {
                for j in 0..n {
                    prop_assert_eq!(a.entry(i, j), a.entry(j, i));
                }
            }
            for i in 1..n - 1 {
                prop_assert!(a.row_sum(i).abs() <= 1e-15 * (1.0 + spec.max_coefficient()));
            }
            let (_, hi) = a.gershgorin_bounds();
            prop_assert!(hi <= 1e-12);
        }
    }
}
