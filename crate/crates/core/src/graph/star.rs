//! Star graphs: `N` half-lines joined at one vertex, truncated at a common
//! length with Dirichlet walls.
//!
//! Edge nodes sit at distances `k·h`, `k = 0..=n`, from the vertex. With a
//! continuous vertex condition the `k = 0` node is shared by all edges and
//! carries the mass weight `N·h/2`; with `DeltaPrime` every edge keeps its own
//! end node of weight `h/2` and the edges interact only through the rank-one
//! term `|Σ_e u_e(0)|²/β` of the quadratic form.

use std::ops::Range;

use num_complex::Complex64;

use super::cn::{band_width, minimum_buffer, run_cayley, CayleySystem, EvolutionTrace, StepControl, TridiagonalFactor};
use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum VertexCondition {
    /// Continuity and zero sum of inward derivatives.
    Kirchhoff,
    /// Continuity and `Σ_e u_e′(v) = α·u(v)`.
    Delta(f64),
    /// Equal inward derivatives `u′(v)` and `Σ_e u_e(v) = β·u′(v)`; `β ≠ 0`.
    DeltaPrime(f64),
}

impl VertexCondition {
    fn is_continuous(&self) -> bool {
        !matches!(self, VertexCondition::DeltaPrime(_))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StarGraphSpec {
    edge_count: usize,
    edge_length: f64,
    vertex: VertexCondition,
}

impl StarGraphSpec {
    pub fn new(edge_count: usize, edge_length: f64, vertex: VertexCondition) -> Result<Self> {
        if edge_count < 2 {
            return Err(invalid(format!("a star needs at least two edges, got {edge_count}")));
        }
        if !(edge_length > 0.0) || !edge_length.is_finite() {
            return Err(invalid(format!("edge length must be positive, got {edge_length}")));
        }
        match vertex {
            VertexCondition::Delta(a) if !a.is_finite() => return Err(invalid("delta strength must be finite")),
            VertexCondition::DeltaPrime(b) if !b.is_finite() || b == 0.0 => {
                return Err(invalid("delta-prime strength must be finite and nonzero"))
            }
            _ => {}
        }
        Ok(Self {
            edge_count,
            edge_length,
            vertex,
        })
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn edge_length(&self) -> f64 {
        self.edge_length
    }

    pub fn vertex(&self) -> VertexCondition {
        self.vertex
    }
}

/// Node layout of a discretized star.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StarGrid {
    spec: StarGraphSpec,
    spacing: f64,
    /// Nodes per edge past the vertex node.
    interior: usize,
}

impl StarGrid {
    pub fn new(spec: StarGraphSpec, spacing: f64) -> Result<Self> {
        if !(spacing > 0.0) || !spacing.is_finite() {
            return Err(invalid(format!("grid spacing must be positive, got {spacing}")));
        }
        let cells = (spec.edge_length / spacing).round() as usize;
        if cells < 3 {
            return Err(invalid("edges need at least three cells"));
        }
        Ok(Self {
            spec,
            spacing,
            interior: cells - 1,
        })
    }

    pub fn spec(&self) -> &StarGraphSpec {
        &self.spec
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    /// Nodes per edge, the vertex end included.
    pub fn edge_nodes(&self) -> usize {
        self.interior + 1
    }

    pub fn len(&self) -> usize {
        if self.spec.vertex.is_continuous() {
            1 + self.spec.edge_count * self.interior
        } else {
            self.spec.edge_count * (self.interior + 1)
        }
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Storage index of node `k` (distance `k·h`) on `edge`.
    pub fn index(&self, edge: usize, k: usize) -> usize {
        assert!(edge < self.spec.edge_count && k <= self.interior, "node ({edge}, {k}) is outside the star");
        if self.spec.vertex.is_continuous() {
            if k == 0 {
                0
            } else {
                1 + edge * self.interior + (k - 1)
            }
        } else {
            edge * (self.interior + 1) + k
        }
    }

    /// Samples `f(edge, distance)`. With a continuous vertex condition all
    /// edges must agree at the vertex.
    pub fn sample<F: Fn(usize, f64) -> Complex64>(&self, f: F) -> Result<Vec<Complex64>> {
        let mut out = vec![Complex64::new(0.0, 0.0); self.len()];
        for e in 0..self.spec.edge_count {
            for k in 0..=self.interior {
                out[self.index(e, k)] = f(e, k as f64 * self.spacing);
            }
        }
        if self.spec.vertex.is_continuous() {
            let at_vertex: Vec<Complex64> = (0..self.spec.edge_count).map(|e| f(e, 0.0)).collect();
            let scale = at_vertex.iter().map(|z| z.norm()).fold(1e-300, f64::max);
            if at_vertex.iter().any(|z| (z - at_vertex[0]).norm() > 1e-12 * scale) {
                return Err(invalid("datum is discontinuous at the vertex"));
            }
        }
        Ok(out)
    }

    /// Values along one edge, vertex end first.
    pub fn edge_values(&self, state: &[Complex64], edge: usize) -> Vec<Complex64> {
        (0..=self.interior).map(|k| state[self.index(edge, k)]).collect()
    }

    /// Smallest distance from the support of `state` to an edge end.
    fn buffer_of(&self, state: &[Complex64]) -> f64 {
        let floor = 1e-12 * state.iter().map(|z| z.norm()).fold(0.0, f64::max);
        (0..self.spec.edge_count)
            .map(|e| {
                let last = (0..=self.interior)
                    .rev()
                    .find(|&k| state[self.index(e, k)].norm() > floor)
                    .unwrap_or(0);
                (self.interior + 1 - last) as f64 * self.spacing
            })
            .fold(f64::INFINITY, f64::min)
    }
}

/// Edge block shared by every edge (identical lengths), with the solves the
/// vertex elimination needs.
struct EdgeBlock {
    weights: Vec<f64>,
    diag: Vec<f64>,
    factor: TridiagonalFactor,
    /// `T⁻¹e₀`, the response to the vertex coupling.
    response: Vec<Complex64>,
}

impl EdgeBlock {
    fn new(weights: Vec<f64>, diag: Vec<f64>) -> Self {
        Self {
            weights,
            diag,
            factor: TridiagonalFactor::default(),
            response: Vec::new(),
        }
    }

    fn factor(&mut self, c: f64, h: f64) -> Result<()> {
        let n = self.weights.len();
        let diag: Vec<Complex64> = self
            .weights
            .iter()
            .zip(&self.diag)
            .map(|(&w, &d)| Complex64::new(w, c * d))
            .collect();
        let off = vec![Complex64::new(0.0, -c / h); n - 1];
        self.factor = TridiagonalFactor::new(&diag, &off)?;
        let mut e0 = vec![Complex64::new(0.0, 0.0); n];
        e0[0] = Complex64::new(1.0, 0.0);
        self.factor.solve(&mut e0);
        self.response = e0;
        Ok(())
    }

    /// `K_e u` on one edge, without the vertex terms.
    fn apply(&self, u: &[Complex64], out: &mut [Complex64], h: f64) {
        let n = u.len();
        for k in 0..n {
            let mut s = u[k] * self.diag[k];
            if k > 0 {
                s -= u[k - 1] / h;
            }
            if k + 1 < n {
                s -= u[k + 1] / h;
            }
            out[k] = s;
        }
    }
}

struct ContinuousStar {
    edges: usize,
    interior: usize,
    h: f64,
    alpha: f64,
    weights: Vec<f64>,
    block: EdgeBlock,
    vertex_pivot: Complex64,
    coupling: Complex64,
}

impl ContinuousStar {
    fn new(edges: usize, interior: usize, h: f64, alpha: f64) -> Self {
        let mut weights = vec![h; 1 + edges * interior];
        weights[0] = 0.5 * edges as f64 * h;
        Self {
            edges,
            interior,
            h,
            alpha,
            weights,
            block: EdgeBlock::new(vec![h; interior], vec![2.0 / h; interior]),
            vertex_pivot: Complex64::new(0.0, 0.0),
            coupling: Complex64::new(0.0, 0.0),
        }
    }

    fn edge(&self, e: usize) -> Range<usize> {
        1 + e * self.interior..1 + (e + 1) * self.interior
    }
}

impl CayleySystem for ContinuousStar {
    fn weights(&self) -> &[f64] {
        &self.weights
    }

    fn stiffness(&self, u: &[Complex64], out: &mut [Complex64]) {
        let h = self.h;
        let mut vertex = u[0] * (self.edges as f64 / h + self.alpha);
        for e in 0..self.edges {
            let r = self.edge(e);
            self.block.apply(&u[r.clone()], &mut out[r.clone()], h);
            out[r.start] -= u[0] / h;
            vertex -= u[r.start] / h;
        }
        out[0] = vertex;
    }

    fn factor(&mut self, c: f64) -> Result<()> {
        self.block.factor(c, self.h)?;
        let n = self.edges as f64;
        self.coupling = Complex64::new(0.0, -c / self.h);
        let own = Complex64::new(self.weights[0], c * (n / self.h + self.alpha));
        self.vertex_pivot = own - self.coupling * self.coupling * self.block.response[0] * n;
        if self.vertex_pivot.norm() < 1e-300 {
            return Err(Error::Numerical("singular vertex equation".into()));
        }
        Ok(())
    }

    fn solve(&self, rhs: &mut [Complex64]) {
        let mut first_sum = Complex64::new(0.0, 0.0);
        for e in 0..self.edges {
            let r = self.edge(e);
            self.block.factor.solve(&mut rhs[r.clone()]);
            first_sum += rhs[r.start];
        }
        let vertex = (rhs[0] - self.coupling * first_sum) / self.vertex_pivot;
        rhs[0] = vertex;
        for e in 0..self.edges {
            let r = self.edge(e);
            for (x, z) in rhs[r].iter_mut().zip(&self.block.response) {
                *x -= self.coupling * vertex * z;
            }
        }
    }

    /// `Σ_e[(ū_{e,1} − ū_v)/h + i(h/2)·D_t u_v] − α·ū_v`.
    fn vertex_residual(&self, old: &[Complex64], new: &[Complex64], dt: f64) -> f64 {
        let mean = |i: usize| 0.5 * (old[i] + new[i]);
        let rate = (new[0] - old[0]) / dt;
        let correction = Complex64::new(0.0, 0.5 * self.h) * rate;
        let mut law = -mean(0) * self.alpha;
        for e in 0..self.edges {
            law += (mean(self.edge(e).start) - mean(0)) / self.h + correction;
        }
        law.norm()
    }

    fn outer_band(&self) -> Vec<Range<usize>> {
        let b = band_width(self.interior);
        (0..self.edges).map(|e| self.edge(e).end - b..self.edge(e).end).collect()
    }
}

struct DeltaPrimeStar {
    edges: usize,
    nodes: usize,
    h: f64,
    beta: f64,
    weights: Vec<f64>,
    block: EdgeBlock,
    rank_one: Complex64,
    denominator: Complex64,
}

impl DeltaPrimeStar {
    fn new(edges: usize, interior: usize, h: f64, beta: f64) -> Self {
        let nodes = interior + 1;
        let mut edge_weights = vec![h; nodes];
        edge_weights[0] = 0.5 * h;
        let mut edge_diag = vec![2.0 / h; nodes];
        edge_diag[0] = 1.0 / h;
        let weights = (0..edges).flat_map(|_| edge_weights.iter().copied()).collect();
        Self {
            edges,
            nodes,
            h,
            beta,
            weights,
            block: EdgeBlock::new(edge_weights, edge_diag),
            rank_one: Complex64::new(0.0, 0.0),
            denominator: Complex64::new(1.0, 0.0),
        }
    }

    fn edge(&self, e: usize) -> Range<usize> {
        e * self.nodes..(e + 1) * self.nodes
    }

    fn end_sum(&self, u: &[Complex64]) -> Complex64 {
        (0..self.edges).map(|e| u[e * self.nodes]).sum()
    }
}

impl CayleySystem for DeltaPrimeStar {
    fn weights(&self) -> &[f64] {
        &self.weights
    }

    fn stiffness(&self, u: &[Complex64], out: &mut [Complex64]) {
        let coupled = self.end_sum(u) / self.beta;
        for e in 0..self.edges {
            let r = self.edge(e);
            self.block.apply(&u[r.clone()], &mut out[r.clone()], self.h);
            out[r.start] += coupled;
        }
    }

    fn factor(&mut self, c: f64) -> Result<()> {
        self.block.factor(c, self.h)?;
        self.rank_one = Complex64::new(0.0, c / self.beta);
        self.denominator = 1.0 + self.rank_one * self.block.response[0] * self.edges as f64;
        if self.denominator.norm() < 1e-300 {
            return Err(Error::Numerical("singular rank-one update at the vertex".into()));
        }
        Ok(())
    }

    fn solve(&self, rhs: &mut [Complex64]) {
        for e in 0..self.edges {
            let r = self.edge(e);
            self.block.factor.solve(&mut rhs[r]);
        }
        let shift = self.rank_one * self.end_sum(rhs) / self.denominator;
        for e in 0..self.edges {
            let r = self.edge(e);
            for (x, z) in rhs[r].iter_mut().zip(&self.block.response) {
                *x -= shift * z;
            }
        }
    }

    /// Largest `|d_e − S̄/β|` with `d_e = (ū_{e,1} − ū_{e,0})/h + i(h/2)·D_t u_{e,0}`.
    fn vertex_residual(&self, old: &[Complex64], new: &[Complex64], dt: f64) -> f64 {
        let mean = |i: usize| 0.5 * (old[i] + new[i]);
        let target = (0..self.edges).map(|e| mean(e * self.nodes)).sum::<Complex64>() / self.beta;
        (0..self.edges)
            .map(|e| {
                let end = e * self.nodes;
                let d = (mean(end + 1) - mean(end)) / self.h
                    + Complex64::new(0.0, 0.5 * self.h) * (new[end] - old[end]) / dt;
                (d - target).norm()
            })
            .fold(0.0, f64::max)
    }

    fn outer_band(&self) -> Vec<Range<usize>> {
        let b = band_width(self.nodes);
        (0..self.edges).map(|e| self.edge(e).end - b..self.edge(e).end).collect()
    }
}

/// Crank–Nicolson evolution of `i u_t + Δ_Γ u = 0` on a star graph.
pub fn evolve_star(grid: &StarGrid, phi: &[Complex64], control: &StepControl) -> Result<EvolutionTrace> {
    if phi.len() != grid.len() {
        return Err(invalid(format!("datum has {} samples for {} star nodes", phi.len(), grid.len())));
    }
    control.check_spacing(grid.spacing)?;
    let required = minimum_buffer(1.0, control.final_time());
    let available = grid.buffer_of(phi);
    if available < required {
        return Err(Error::Truncation {
            required: (required / grid.spacing).ceil() as usize,
            available: (available / grid.spacing).floor() as usize,
        });
    }
    let spec = grid.spec;
    let (n, h) = (spec.edge_count, grid.spacing);
    match spec.vertex {
        VertexCondition::Kirchhoff => run_cayley(&mut ContinuousStar::new(n, grid.interior, h, 0.0), phi.to_vec(), control),
        VertexCondition::Delta(alpha) => {
            run_cayley(&mut ContinuousStar::new(n, grid.interior, h, alpha), phi.to_vec(), control)
        }
        VertexCondition::DeltaPrime(beta) => {
            run_cayley(&mut DeltaPrimeStar::new(n, grid.interior, h, beta), phi.to_vec(), control)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::cn::Grid1d;
    use crate::graph::line::{evolve_stepline, StepCoefficient};

    /// `(1 − s²)⁴` on `|x − center| < 3`, with a travelling phase.
    fn bump(x: f64, center: f64) -> Complex64 {
        let s = (x - center) / 3.0;
        let envelope = if s.abs() < 1.0 { (1.0 - s * s).powi(4) } else { 0.0 };
        Complex64::from_polar(envelope, 0.4 * x)
    }

    #[test]
    fn two_edge_kirchhoff_star_is_the_line() {
        let (h, length) = (0.05, 80.0);
        let spec = StarGraphSpec::new(2, length, VertexCondition::Kirchhoff).unwrap();
        let star = StarGrid::new(spec, h).unwrap();
        // Edge 0 is the negative half-line, edge 1 the positive one.
        let profile = |x: f64| bump(x, 3.0);
        let phi = star.sample(|e, d| if e == 0 { profile(-d) } else { profile(d) }).unwrap();
        let line = Grid1d::covering(-length + h, length - h, h).unwrap();
        let line_phi = line.sample(profile);
        let control = StepControl::new(0.02, vec![1.0, 3.0]).unwrap();
        let a = evolve_star(&star, &phi, &control).unwrap();
        let b = evolve_stepline(&StepCoefficient::constant(1.0).unwrap(), &line, &line_phi, &control).unwrap();
        let mid = line.nearest(0.0).unwrap();
        let mut worst = 0.0f64;
        for k in 0..star.edge_nodes() {
            worst = worst.max((a.final_state[star.index(1, k)] - b.final_state[mid + k]).norm());
            worst = worst.max((a.final_state[star.index(0, k)] - b.final_state[mid - k]).norm());
        }
        assert!(worst < 1e-12, "{worst}");
    }

    #[test]
    fn vertex_laws_and_mass_hold() {
        for vertex in [
            VertexCondition::Kirchhoff,
            VertexCondition::Delta(1.0),
            VertexCondition::Delta(-0.7),
            VertexCondition::DeltaPrime(0.8),
            VertexCondition::DeltaPrime(-2.0),
        ] {
            let spec = StarGraphSpec::new(3, 70.0, vertex).unwrap();
            let grid = StarGrid::new(spec, 0.05).unwrap();
            let phi = grid
                .sample(|e, d| if e == 1 { bump(d, 4.0) } else { Complex64::new(0.0, 0.0) })
                .unwrap();
            let trace = evolve_star(&grid, &phi, &StepControl::new(0.02, vec![0.5, 2.0]).unwrap()).unwrap();
            assert!(trace.vertex_residual < 1e-8, "{vertex:?}: {}", trace.vertex_residual);
            assert!(trace.mass_drift < 1e-12, "{vertex:?}: {}", trace.mass_drift);
            assert!(trace.max_step_mass_change < 1e-13);
        }
    }

    #[test]
    fn invalid_specs_are_rejected() {
        assert!(StarGraphSpec::new(1, 10.0, VertexCondition::Kirchhoff).is_err());
        assert!(StarGraphSpec::new(3, -1.0, VertexCondition::Kirchhoff).is_err());
        assert!(StarGraphSpec::new(3, 10.0, VertexCondition::DeltaPrime(0.0)).is_err());
        let spec = StarGraphSpec::new(3, 40.0, VertexCondition::Kirchhoff).unwrap();
        let grid = StarGrid::new(spec, 0.1).unwrap();
        assert!(grid.sample(|e, _| Complex64::new(e as f64, 0.0)).is_err());
    }
}
