//! One function per subcommand, each producing a result table and diagnostics.

use std::path::Path;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use dispersim_core::decay::{alpha_p_theory, fit_decay, kernel_norms, DecayFit};
use dispersim_core::evolution::{
    evolve_halfline, evolve_line_with, BoundaryCondition, CoupledPropagator, EvolutionOptions,
};
use dispersim_core::graph::{
    bound_states, evolve_delta_line, evolve_star, evolve_stepline, project_continuous, validate_coupling,
    DeltaPotentialSpec, EvolutionTrace, Grid1d, StarGraphSpec, StarGrid, StepCoefficient, StepControl,
    VertexCondition, VertexCoupling,
};
use dispersim_core::kernel::{
    coupled_oscillatory_integral, kernel_bessel, kernel_quadrature_with_budget, KernelRequest, OscIntegralParams,
    PhaseFunction,
};
use dispersim_core::lattice::{lp_norm, CoupledLatticeSpec, LatticeState};
use dispersim_core::torus::{torus_l1_norm, torus_supnorm_with, TorusData};

use crate::config::*;
use crate::error::CliError;
use crate::output::{Diagnostics, Table};
use crate::Experiment;

/// Threshold on relative mass drift for multiplier and Crank–Nicolson runs.
pub const MASS_TOLERANCE: f64 = 1e-10;
/// Threshold on relative mass drift for eigendecomposition runs.
pub const EIGEN_MASS_TOLERANCE: f64 = 1e-9;
/// Threshold on amplitude reaching the truncation, relative to the datum.
pub const CONTAMINATION_TOLERANCE: f64 = 1e-3;
/// Largest tolerated `|slope − theoretical|` before a fit is flagged.
pub const EXPONENT_TOLERANCE: f64 = 0.06;

pub struct Outcome {
    pub table: Table,
    pub diagnostics: Diagnostics,
    /// Line printed on stdout after a successful run.
    pub summary: Option<String>,
}

impl Outcome {
    fn new(table: Table, diagnostics: Diagnostics) -> Self {
        Self {
            table,
            diagnostics,
            summary: None,
        }
    }
}

pub fn execute(experiment: Experiment, config: &ConfigFile, base: &Path) -> Result<Outcome, CliError> {
    match experiment {
        Experiment::Kernel => kernel(section(&config.kernel, experiment)?),
        Experiment::Line => line(section(&config.line, experiment)?),
        Experiment::Halfline => halfline(section(&config.halfline, experiment)?),
        Experiment::Coupled => coupled(section(&config.coupled, experiment)?),
        Experiment::Stepline => stepline(section(&config.stepline, experiment)?),
        Experiment::Star => star(section(&config.star, experiment)?),
        Experiment::DeltaLine => delta_line(section(&config.delta_line, experiment)?),
        Experiment::Torus => torus(section(&config.torus, experiment)?),
        Experiment::Alphap => alphap(section(&config.alphap, experiment)?),
        Experiment::Fit => fit(section(&config.fit, experiment)?, base),
        Experiment::Vdc => vdc(section(&config.vdc, experiment)?),
        Experiment::Oscint => oscint(section(&config.oscint, experiment)?),
        Experiment::CouplingCheck => coupling_check(section(&config.coupling_check, experiment)?),
    }
}

fn kernel(c: &KernelConfig) -> Result<Outcome, CliError> {
    let times = TimeGrid {
        t_min: c.t_min,
        t_max: c.t_max,
        t_count: c.t_count,
        t_spacing: c.t_spacing,
    }
    .times()?;
    if c.j_max < c.j_min {
        return Err(CliError::config_field("j_max", "j_max must be at least j_min"));
    }
    let points: Vec<(f64, i64)> = times.iter().flat_map(|&t| (c.j_min..=c.j_max).map(move |j| (t, j))).collect();
    let values: Vec<(Complex64, f64, f64)> = points
        .par_iter()
        .map(|&(t, j)| {
            let req = KernelRequest::new(t, j)?;
            let exact = kernel_bessel(req);
            Ok(match c.method {
                KernelMethod::Bessel => (exact, 0.0, 0.0),
                KernelMethod::Quadrature => {
                    let q = kernel_quadrature_with_budget(req, c.tolerance, c.max_panels)?;
                    (q.value, q.error_estimate, (q.value - exact).norm())
                }
            })
        })
        .collect::<Result<_, dispersim_core::Error>>()
        .map_err(|e| CliError::from(e).at("tolerance"))?;

    let mut table = Table::new("kernel", &["t", "j", "re", "im", "modulus"]);
    let mut worst_error = 0.0f64;
    let mut worst_deviation = 0.0f64;
    for (&(t, j), &(z, err, dev)) in points.iter().zip(&values) {
        table.push(vec![t.into(), j.into(), z.re.into(), z.im.into(), z.norm().into()]);
        worst_error = worst_error.max(err);
        worst_deviation = worst_deviation.max(dev);
    }
    let mut d = Diagnostics::default();
    d.set("points", points.len() as i64);
    if c.method == KernelMethod::Quadrature {
        d.bounded("max_error_estimate", worst_error, c.tolerance);
        d.bounded("max_deviation_from_closed_form", worst_deviation, 1e-8);
    }
    Ok(Outcome::new(table, d))
}

fn lattice_datum(d: &LatticeDatum) -> Result<LatticeState, CliError> {
    match d.datum {
        LatticeDatumKind::Delta => Ok(LatticeState::delta(d.datum_site)),
        LatticeDatumKind::Gaussian => {
            if !(d.datum_width > 0.0 && d.datum_width.is_finite()) {
                return Err(CliError::config_field("datum_width", "width must be positive"));
            }
            let reach = (8.0 * d.datum_width).ceil() as i64;
            let values: Vec<f64> = (-reach..=reach)
                .map(|k| (-(k as f64).powi(2) / (2.0 * d.datum_width * d.datum_width)).exp())
                .collect();
            LatticeState::from_real(d.datum_site - reach, &values).map_err(|e| CliError::from(e).at("datum"))
        }
        LatticeDatumKind::Random => {
            if d.datum_last < d.datum_first {
                return Err(CliError::config_field("datum_last", "random support is empty"));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(d.datum_seed);
            let values = (d.datum_first..=d.datum_last)
                .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect();
            LatticeState::new(d.datum_first, values).map_err(|e| CliError::from(e).at("datum"))
        }
    }
}

/// Least-squares fit of the norm history over the positive times in the window.
fn decay_fit(
    d: &mut Diagnostics,
    times: &[f64],
    norms: &[f64],
    window: FitWindow,
    theoretical: f64,
) -> Result<Option<DecayFit>, CliError> {
    let positive: Vec<usize> = (0..times.len()).filter(|&i| times[i] > 0.0).collect();
    let (Some(&first), Some(&last)) = (positive.first(), positive.last()) else {
        d.set("fit", "skipped");
        return Ok(None);
    };
    let lo = window.fit_t_min.unwrap_or(times[first]);
    let hi = window.fit_t_max.unwrap_or(times[last]);
    let inside = positive.iter().filter(|&&i| times[i] >= lo && times[i] <= hi).count();
    if inside < dispersim_core::decay::MIN_FIT_SAMPLES {
        if window.fit_t_min.is_some() || window.fit_t_max.is_some() {
            return Err(CliError::config_field("fit_t_min", format!("only {inside} output times inside the fit window")));
        }
        d.set("fit", "skipped");
        return Ok(None);
    }
    let t: Vec<f64> = positive.iter().map(|&i| times[i]).collect();
    let n: Vec<f64> = positive.iter().map(|&i| norms[i]).collect();
    let fit = fit_decay(&t, &n, (lo, hi))
        .map_err(|e| CliError::from(e).at("fit_t_min"))?
        .with_theoretical(theoretical);
    d.set("fit_slope", fit.slope);
    d.set("fit_intercept", fit.intercept);
    d.set("fit_r_squared", fit.r_squared);
    d.set("fit_window_min", lo);
    d.set("fit_window_max", hi);
    d.set("fit_samples", fit.samples as i64);
    d.set("theoretical_slope", theoretical);
    d.bounded("fit_deviation", fit.deviation().unwrap_or(0.0), EXPONENT_TOLERANCE);
    Ok(Some(fit))
}

fn relative(drift: f64, mass: f64) -> f64 {
    if mass > 0.0 {
        drift / mass
    } else {
        drift
    }
}

fn line(c: &LineConfig) -> Result<Outcome, CliError> {
    let times = c.time_grid().times()?;
    let phi = lattice_datum(&c.lattice_datum())?;
    let mass0 = lp_norm(&phi, 2.0)?;
    let opts = EvolutionOptions { max_sites: c.max_sites };
    let results = times
        .par_iter()
        .map(|&t| evolve_line_with(&phi, t, &opts))
        .collect::<Result<Vec<_>, _>>()?;
    let mut table = Table::new(
        "line",
        &["t", "sup_norm", "mass", "mass_drift", "truncation_margin", "contamination"],
    )
    .with_reference_slope(-1.0 / 3.0);
    let mut sup = Vec::with_capacity(times.len());
    let (mut drift, mut contamination, mut margin) = (0.0f64, 0.0f64, usize::MAX);
    for r in &results {
        let s = lp_norm(&r.state, f64::INFINITY)?;
        let m = lp_norm(&r.state, 2.0)?;
        let rel = relative(r.mass_drift, mass0);
        table.push(vec![
            r.time.into(),
            s.into(),
            m.into(),
            rel.into(),
            r.truncation_margin.into(),
            r.contamination.into(),
        ]);
        sup.push(s);
        drift = drift.max(rel);
        contamination = contamination.max(relative(r.contamination, lp_norm(&phi, f64::INFINITY)?));
        margin = margin.min(r.truncation_margin);
    }
    let mut d = Diagnostics::default();
    d.bounded("max_mass_drift", drift, MASS_TOLERANCE);
    d.bounded("max_contamination", contamination, 1e-10);
    d.set("min_truncation_margin", margin as i64);
    decay_fit(&mut d, &times, &sup, c.fit_window(), -1.0 / 3.0)?;
    Ok(Outcome::new(table, d))
}

fn halfline(c: &HalfLineConfig) -> Result<Outcome, CliError> {
    let times = c.time_grid().times()?;
    let phi = lattice_datum(&c.lattice_datum())?;
    let bc = match c.boundary {
        Boundary::Dirichlet => BoundaryCondition::Dirichlet,
        Boundary::Neumann => BoundaryCondition::Neumann,
    };
    let mass0 = lp_norm(&phi, 2.0)?;
    let results = times
        .par_iter()
        .map(|&t| evolve_halfline(&phi, t, bc))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| CliError::from(e).at("datum"))?;
    let mut table = Table::new("halfline", &["t", "sup_norm", "mass", "mass_drift", "boundary_residual"])
        .with_reference_slope(-1.0 / 3.0);
    let mut sup = Vec::with_capacity(times.len());
    let (mut drift, mut residual) = (0.0f64, 0.0f64);
    for r in &results {
        let s = lp_norm(&r.evolution.state, f64::INFINITY)?;
        let rel = relative(r.evolution.mass_drift, mass0);
        let res = r.boundary_residual(bc);
        table.push(vec![
            r.evolution.time.into(),
            s.into(),
            lp_norm(&r.evolution.state, 2.0)?.into(),
            rel.into(),
            res.into(),
        ]);
        sup.push(s);
        drift = drift.max(rel);
        residual = residual.max(res);
    }
    let mut d = Diagnostics::default();
    d.bounded("max_mass_drift", drift, MASS_TOLERANCE);
    d.bounded("max_boundary_residual", residual, 1e-10);
    decay_fit(&mut d, &times, &sup, c.fit_window(), -1.0 / 3.0)?;
    Ok(Outcome::new(table, d))
}

fn coupled(c: &CoupledConfig) -> Result<Outcome, CliError> {
    let times = c.time_grid().times()?;
    let phi = lattice_datum(&c.lattice_datum())?;
    let spec = CoupledLatticeSpec::new(c.b1, c.b2, c.truncation).map_err(|e| CliError::from(e).at("b1"))?;
    let propagator = CoupledPropagator::new(spec)?;
    let results = propagator.evolve_many(&phi, &times)?;
    let mass0 = lp_norm(&phi, 2.0)?;
    let mut table = Table::new("coupled", &["t", "sup_norm", "mass", "mass_drift", "truncation_margin"])
        .with_reference_slope(-1.0 / 3.0);
    let mut sup = Vec::with_capacity(times.len());
    let mut drift = 0.0f64;
    for r in &results {
        let s = lp_norm(&r.state, f64::INFINITY)?;
        let rel = relative(r.mass_drift, mass0);
        table.push(vec![
            r.time.into(),
            s.into(),
            lp_norm(&r.state, 2.0)?.into(),
            rel.into(),
            r.truncation_margin.into(),
        ]);
        sup.push(s);
        drift = drift.max(rel);
    }
    let mut d = Diagnostics::default();
    d.set("dimension", spec.dimension() as i64);
    d.bounded("max_mass_drift", drift, EIGEN_MASS_TOLERANCE);
    decay_fit(&mut d, &times, &sup, c.fit_window(), -1.0 / 3.0)?;
    Ok(Outcome::new(table, d))
}

fn gaussian(center: f64, width: f64) -> Result<impl Fn(f64) -> Complex64, CliError> {
    if !(width > 0.0 && width.is_finite()) {
        return Err(CliError::config_field("datum_width", "width must be positive"));
    }
    Ok(move |x: f64| Complex64::new((-(x - center).powi(2) / (2.0 * width * width)).exp(), 0.0))
}

fn trace_table(schema: &'static str, trace: &EvolutionTrace, reference: f64) -> Table {
    let mut table = Table::new(schema, &["t", "sup_norm", "mass"]).with_reference_slope(reference);
    for ((&t, &s), &m) in trace.times.iter().zip(&trace.sup_norms).zip(&trace.masses) {
        table.push(vec![t.into(), s.into(), m.into()]);
    }
    table
}

fn trace_diagnostics(trace: &EvolutionTrace) -> Diagnostics {
    let mut d = Diagnostics::default();
    d.set("steps", trace.steps as i64);
    d.bounded("mass_drift", trace.mass_drift, MASS_TOLERANCE);
    d.set("max_step_mass_change", trace.max_step_mass_change);
    d.bounded("contamination", trace.contamination, CONTAMINATION_TOLERANCE);
    d
}

fn step_control(dt: f64, times: Vec<f64>) -> Result<StepControl, CliError> {
    StepControl::new(dt, times).map_err(|e| CliError::from(e).at("dt"))
}

fn stepline(c: &StepLineConfig) -> Result<Outcome, CliError> {
    let times = c.time_grid().times()?;
    let sigma = StepCoefficient::new(c.breakpoints.clone(), c.values.clone()).map_err(|e| CliError::from(e).at("values"))?;
    let grid = Grid1d::covering(c.x_min, c.x_max, c.h).map_err(|e| CliError::from(e).at("h"))?;
    let phi = grid.sample(gaussian(c.datum_center, c.datum_width)?);
    let trace = evolve_stepline(&sigma, &grid, &phi, &step_control(c.dt, times.clone())?).map_err(|e| CliError::from(e).at("dt"))?;
    let mut d = trace_diagnostics(&trace);
    d.set("nodes", grid.nodes() as i64);
    decay_fit(&mut d, &times, &trace.sup_norms, c.fit_window(), -0.5)?;
    Ok(Outcome::new(trace_table("stepline", &trace, -0.5), d))
}

fn star(c: &StarConfig) -> Result<Outcome, CliError> {
    let times = c.time_grid().times()?;
    let vertex = match c.vertex {
        VertexKind::Kirchhoff => VertexCondition::Kirchhoff,
        VertexKind::Delta => VertexCondition::Delta(c.strength),
        VertexKind::DeltaPrime => VertexCondition::DeltaPrime(c.strength),
    };
    let spec = StarGraphSpec::new(c.edges, c.edge_length, vertex).map_err(|e| CliError::from(e).at("edges"))?;
    let grid = StarGrid::new(spec, c.h).map_err(|e| CliError::from(e).at("h"))?;
    let phi = match c.datum {
        StarDatumKind::Gaussian => {
            let g = gaussian(c.datum_center, c.datum_width)?;
            grid.sample(|_, dist| g(dist))
        }
        StarDatumKind::Bump => {
            if c.datum_edge >= c.edges {
                return Err(CliError::config_field("datum_edge", format!("edge {} does not exist", c.datum_edge)));
            }
            if !(c.datum_width > 0.0) {
                return Err(CliError::config_field("datum_width", "width must be positive"));
            }
            grid.sample(|edge, dist| {
                let s = (dist - c.datum_center) / c.datum_width;
                if edge == c.datum_edge && s.abs() < 1.0 {
                    Complex64::new((1.0 - s * s).powi(4), 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            })
        }
    }
    .map_err(|e| CliError::from(e).at("datum"))?;
    let trace = evolve_star(&grid, &phi, &step_control(c.dt, times.clone())?).map_err(|e| CliError::from(e).at("dt"))?;
    let mut d = trace_diagnostics(&trace);
    d.set("nodes", grid.len() as i64);
    d.bounded("vertex_residual", trace.vertex_residual, 1e-8);
    decay_fit(&mut d, &times, &trace.sup_norms, c.fit_window(), -0.5)?;
    Ok(Outcome::new(trace_table("star", &trace, -0.5), d))
}

fn delta_line(c: &DeltaLineConfig) -> Result<Outcome, CliError> {
    let times = c.time_grid().times()?;
    let spec = DeltaPotentialSpec::new(c.strengths.clone(), c.positions.clone()).map_err(|e| CliError::from(e).at("strengths"))?;
    let grid = Grid1d::covering(c.x_min, c.x_max, c.h).map_err(|e| CliError::from(e).at("h"))?;
    let mut phi = grid.sample(gaussian(c.datum_center, c.datum_width)?);
    let states = bound_states(&spec, &grid)?;
    let mut d = Diagnostics::default();
    d.set("bound_states", states.len() as i64);
    d.set(
        "bound_energies",
        toml::Value::Array(states.iter().map(|b| toml::Value::Float(b.energy)).collect()),
    );
    if c.project {
        let projected = project_continuous(&grid, &phi, &states)?;
        let removed: Vec<Complex64> = phi.iter().zip(&projected).map(|(a, b)| a - b).collect();
        d.set("removed_norm", grid.norm(&removed));
        phi = projected;
    }
    let trace = evolve_delta_line(&spec, &grid, &phi, &step_control(c.dt, times.clone())?).map_err(|e| CliError::from(e).at("dt"))?;
    for (k, v) in trace_diagnostics(&trace).values {
        d.values.insert(k, v);
    }
    d.flags.extend(trace_diagnostics(&trace).flags);
    d.set("nodes", grid.nodes() as i64);
    if c.project || states.is_empty() {
        decay_fit(&mut d, &times, &trace.sup_norms, c.fit_window(), -0.5)?;
    }
    Ok(Outcome::new(trace_table("delta-line", &trace, -0.5), d))
}

fn torus(c: &TorusConfig) -> Result<Outcome, CliError> {
    let times = TimeGrid {
        t_min: c.t_min,
        t_max: c.t_max,
        t_count: c.t_count,
        t_spacing: c.t_spacing,
    }
    .times()?;
    let n = 2 * c.cutoff + 1;
    let coefficients = match c.coefficients {
        TorusCoefficients::Uniform => vec![Complex64::new(1.0, 0.0); n],
        TorusCoefficients::Random => {
            let mut rng = ChaCha8Rng::seed_from_u64(c.seed);
            (0..n)
                .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect()
        }
    };
    let data = TorusData::new(c.cutoff, coefficients).map_err(|e| CliError::from(e).at("cutoff"))?;
    let l1 = torus_l1_norm(&data, c.max_points)?;
    let peaks = times
        .par_iter()
        .map(|&t| torus_supnorm_with(&data, t, c.oversample, c.max_points))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| CliError::from(e).at("oversample"))?;
    let mut table = Table::new("torus", &["t", "sup_norm", "location", "scaled"]);
    let mut max_scaled = 0.0f64;
    for (&t, p) in times.iter().zip(&peaks) {
        let scaled = t.abs().sqrt() * p.value / l1.value;
        max_scaled = max_scaled.max(scaled);
        table.push(vec![t.into(), p.value.into(), p.location.into(), scaled.into()]);
    }
    let mut d = Diagnostics::default();
    d.set("l1_norm", l1.value);
    d.bounded("l1_doubling_change", l1.doubling_change, 1e-6);
    d.set("l1_points", l1.points as i64);
    d.set("max_scaled", max_scaled);
    Ok(Outcome::new(table, d))
}

fn alphap(c: &AlphaPConfig) -> Result<Outcome, CliError> {
    let times = TimeGrid {
        t_min: c.t_min,
        t_max: c.t_max,
        t_count: c.t_count,
        t_spacing: c.t_spacing,
    }
    .times()?;
    let theory = alpha_p_theory(c.p).map_err(|e| CliError::from(e).at("p"))?;
    let norms = kernel_norms(&times, c.p, c.max_sites)?;
    let mut table = Table::new("alphap", &["t", "norm", "tail_ratio", "sites"]).with_reference_slope(-theory);
    for k in &norms {
        table.push(vec![k.t.into(), k.norm.into(), k.tail_ratio.into(), k.sites.into()]);
    }
    let mut d = Diagnostics::default();
    d.set("p", c.p);
    d.set("alpha_theory", theory);
    d.set("max_tail_ratio", norms.iter().map(|k| k.tail_ratio).fold(0.0, f64::max));
    let values: Vec<f64> = norms.iter().map(|k| k.norm).collect();
    decay_fit(&mut d, &times, &values, FitWindow::default(), -theory)?;
    Ok(Outcome::new(table, d))
}

/// Reads two named columns of a CSV written by this tool.
pub fn read_columns(path: &Path, x: &str, y: &str) -> Result<(Vec<f64>, Vec<f64>), CliError> {
    let bad = |m: String| CliError::config_field("input", m);
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_path(path)
        .map_err(|e| bad(format!("cannot read {}: {e}", path.display())))?;
    let headers = reader.headers().map_err(|e| bad(e.to_string()))?.clone();
    let find = |name: &str, field: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| CliError::config_field(field, format!("no column named {name:?}")))
    };
    let (ix, iy) = (find(x, "t_column")?, find(y, "norm_column")?);
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(|e| bad(e.to_string()))?;
        let parse = |i: usize| {
            record[i]
                .parse::<f64>()
                .map_err(|_| bad(format!("row {}: {:?} is not a number", row + 1, &record[i])))
        };
        xs.push(parse(ix)?);
        ys.push(parse(iy)?);
    }
    Ok((xs, ys))
}

fn fit(c: &FitConfig, base: &Path) -> Result<Outcome, CliError> {
    let path = base.join(&c.input);
    let (t, n) = read_columns(&path, &c.t_column, &c.norm_column)?;
    let mut result = fit_decay(&t, &n, (c.window_min, c.window_max)).map_err(|e| CliError::from(e).at("window_min"))?;
    if let Some(th) = c.theoretical {
        result = result.with_theoretical(th);
    }
    let mut table = Table::new(
        "fit",
        &["slope", "intercept", "r_squared", "window_min", "window_max", "samples", "theoretical"],
    );
    table.push(vec![
        result.slope.into(),
        result.intercept.into(),
        result.r_squared.into(),
        c.window_min.into(),
        c.window_max.into(),
        result.samples.into(),
        result.theoretical.unwrap_or(f64::NAN).into(),
    ]);
    let mut d = Diagnostics::default();
    d.set("slope", result.slope);
    d.set("r_squared", result.r_squared);
    if let Some(dev) = result.deviation() {
        d.bounded("deviation", dev, EXPONENT_TOLERANCE);
    }
    Ok(Outcome::new(table, d))
}

fn vdc(c: &VdcConfig) -> Result<Outcome, CliError> {
    let margin = dispersim_core::kernel::phase_vdc_margin(c.grid_size).map_err(|e| CliError::from(e).at("grid_size"))?;
    let psi = PhaseFunction;
    let step = 2.0 * std::f64::consts::PI / (c.grid_size - 1) as f64;
    let mut table = Table::new("vdc", &["xi", "psi", "d1", "d2", "d3", "margin"]);
    for k in 0..c.grid_size {
        let xi = -std::f64::consts::PI + step * k as f64;
        table.push(vec![
            xi.into(),
            psi.value(xi).into(),
            psi.d1(xi).into(),
            psi.d2(xi).into(),
            psi.d3(xi).into(),
            psi.vdc_margin_at(xi).into(),
        ]);
    }
    let mut d = Diagnostics::default();
    d.set("min_margin", margin);
    if !(margin > 0.0) {
        d.bounded("min_margin_positive", margin, 0.0);
    }
    Ok(Outcome::new(table, d))
}

/// Per-`a` maxima of the scaled modulus at each time level.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelProfile {
    pub a: f64,
    pub level_max: Vec<f64>,
    /// Largest `level_max[k] / max_{i<k} level_max[i]` over `k ≥ 1`.
    pub worst_growth: f64,
    /// Largest `1 − level_max[k] / max_i level_max[i]`.
    pub level_spread: f64,
}

/// Groups `(a, t, scaled)` samples by `a` and time level, in the given orders.
pub fn level_profiles(a_values: &[f64], t_values: &[f64], samples: &[(f64, f64, f64)]) -> Vec<LevelProfile> {
    a_values
        .iter()
        .map(|&a| {
            let level_max: Vec<f64> = t_values
                .iter()
                .map(|&t| {
                    samples
                        .iter()
                        .filter(|s| s.0 == a && s.1 == t)
                        .map(|s| s.2)
                        .fold(0.0, f64::max)
                })
                .collect();
            let mut running = level_max.first().copied().unwrap_or(0.0);
            let mut worst = 1.0f64;
            for &m in level_max.iter().skip(1) {
                worst = worst.max(m / running);
                running = running.max(m);
            }
            let spread = if running > 0.0 {
                level_max.iter().map(|m| 1.0 - m / running).fold(0.0, f64::max)
            } else {
                0.0
            };
            LevelProfile {
                a,
                level_max,
                worst_growth: worst,
                level_spread: spread,
            }
        })
        .collect()
}

fn oscint(c: &OscIntConfig) -> Result<Outcome, CliError> {
    for (name, v) in [("a", &c.a), ("y", &c.y), ("z", &c.z), ("t", &c.t)] {
        if v.is_empty() {
            return Err(CliError::config_field(name, "list must be nonempty"));
        }
    }
    let points: Vec<(f64, f64, f64, f64)> = c
        .a
        .iter()
        .flat_map(|&a| {
            c.t.iter()
                .flat_map(move |&t| c.y.iter().flat_map(move |&y| c.z.iter().map(move |&z| (a, t, y, z))))
        })
        .collect();
    let values = points
        .par_iter()
        .map(|&(a, t, y, z)| {
            let params = OscIntegralParams::new(t, y, z, a)?;
            coupled_oscillatory_integral(params, c.tolerance)
        })
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| CliError::from(e).at("tolerance"))?;
    let mut table = Table::new(
        "oscint",
        &["a", "t", "y", "z", "re", "im", "modulus", "scaled", "error_estimate"],
    );
    let mut samples = Vec::with_capacity(points.len());
    let mut worst_error = 0.0f64;
    for (&(a, t, y, z), q) in points.iter().zip(&values) {
        let scaled = q.value.norm() * (1.0 + t.abs()).cbrt();
        samples.push((a, t, scaled));
        worst_error = worst_error.max(q.error_estimate);
        table.push(vec![
            a.into(),
            t.into(),
            y.into(),
            z.into(),
            q.value.re.into(),
            q.value.im.into(),
            q.value.norm().into(),
            scaled.into(),
            q.error_estimate.into(),
        ]);
    }
    let mut d = Diagnostics::default();
    d.set("points", points.len() as i64);
    d.bounded("max_error_estimate", worst_error, c.tolerance);
    for p in level_profiles(&c.a, &c.t, &samples) {
        let key = format!("a_{}", p.a);
        d.set(
            &format!("{key}_level_max"),
            toml::Value::Array(p.level_max.iter().map(|&m| toml::Value::Float(m)).collect()),
        );
        d.set(&format!("{key}_growth"), p.worst_growth);
        d.bounded(&format!("{key}_level_spread"), p.level_spread, c.level_tolerance);
    }
    Ok(Outcome::new(table, d))
}

fn coupling_check(c: &CouplingCheckConfig) -> Result<Outcome, CliError> {
    let field = |e: dispersim_core::Error| CliError::from(e).at("degree");
    let vc = match c.preset {
        Some(CouplingPreset::Kirchhoff) => VertexCoupling::kirchhoff(c.degree),
        Some(CouplingPreset::Delta) => VertexCoupling::delta(c.degree, c.strength),
        Some(CouplingPreset::DeltaPrime) => VertexCoupling::delta_prime(c.degree, c.strength),
        Some(CouplingPreset::Dirichlet) => VertexCoupling::dirichlet(c.degree),
        Some(CouplingPreset::Neumann) => VertexCoupling::neumann(c.degree),
        None => VertexCoupling::from_rows(c.degree, &c.a, &c.b),
    }
    .map_err(field)?;
    let report = validate_coupling(&vc);
    let status = if report.is_valid() { "valid" } else { "invalid" };
    let defect = report.defect.map(|d| d.to_string()).unwrap_or_default();
    let mut table = Table::new("coupling-check", &["degree", "rank", "symmetry_deviation", "status", "defect"]);
    table.push(vec![
        c.degree.into(),
        report.rank.into(),
        report.symmetry_deviation.into(),
        status.into(),
        defect.clone().into(),
    ]);
    let mut d = Diagnostics::default();
    d.set("status", status);
    d.set("rank", report.rank as i64);
    d.set("symmetry_deviation", report.symmetry_deviation);
    if !defect.is_empty() {
        d.set("defect", defect.clone());
    }
    let summary = if defect.is_empty() {
        status.to_owned()
    } else {
        format!("{status}: {defect}")
    };
    Ok(Outcome {
        table,
        diagnostics: d,
        summary: Some(summary),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn level_growth() {
        let samples = [(1.0, 1.0, 2.0), (1.0, 10.0, 2.1), (1.0, 100.0, 1.0), (1.0, 100.0, 2.5)];
        let p = &level_profiles(&[1.0], &[1.0, 10.0, 100.0], &samples)[0];
        assert_eq!(p.level_max, vec![2.0, 2.1, 2.5]);
        assert!((p.worst_growth - 2.5 / 2.1).abs() < 1e-15);
        assert!((p.level_spread - (1.0 - 2.0 / 2.5)).abs() < 1e-15);
    }
}
