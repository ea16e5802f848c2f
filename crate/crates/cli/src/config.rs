//! Experiment configuration files.
//!
//! A config is TOML with optional top-level `name` and `threads` keys and one
//! flat section per experiment. Only the section named by the subcommand is
//! read; any other section present must still parse.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::CliError;
use crate::Experiment;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kernel: Option<KernelConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub line: Option<LineConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub halfline: Option<HalfLineConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coupled: Option<CoupledConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stepline: Option<StepLineConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub star: Option<StarConfig>,
    #[serde(default, rename = "delta-line", skip_serializing_if = "Option::is_none")]
    pub delta_line: Option<DeltaLineConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub torus: Option<TorusConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alphap: Option<AlphaPConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fit: Option<FitConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vdc: Option<VdcConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oscint: Option<OscIntConfig>,
    #[serde(default, rename = "coupling-check", skip_serializing_if = "Option::is_none")]
    pub coupling_check: Option<CouplingCheckConfig>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    #[default]
    Linear,
    Log,
}

/// `t_count` times from `t_min` to `t_max`, both included.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    pub t_min: f64,
    pub t_max: f64,
    pub t_count: usize,
    pub t_spacing: Spacing,
}

fn one() -> usize {
    1
}

impl TimeGrid {
    pub fn times(&self) -> Result<Vec<f64>, CliError> {
        let field = |m: String| CliError::config_field("t_min", m);
        if !(self.t_min.is_finite() && self.t_max.is_finite()) {
            return Err(field("time bounds must be finite".into()));
        }
        if self.t_count == 0 {
            return Err(CliError::config_field("t_count", "time grid must be nonempty"));
        }
        if self.t_count == 1 {
            return Ok(vec![self.t_min]);
        }
        if !(self.t_max > self.t_min) {
            return Err(field(format!("t_max = {} must exceed t_min = {}", self.t_max, self.t_min)));
        }
        let n = self.t_count - 1;
        Ok(match self.t_spacing {
            Spacing::Linear => (0..=n)
                .map(|i| match i {
                    0 => self.t_min,
                    i if i == n => self.t_max,
                    i => self.t_min + (self.t_max - self.t_min) * i as f64 / n as f64,
                })
                .collect(),
            Spacing::Log => {
                if !(self.t_min > 0.0) {
                    return Err(field("log spacing needs t_min > 0".into()));
                }
                dispersim_core::decay::log_grid(self.t_min, self.t_max, self.t_count)
                    .map_err(|e| field(e.to_string()))?
            }
        })
    }
}

/// Optional least-squares window for the decay fit written to the manifest.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FitWindow {
    pub fit_t_min: Option<f64>,
    pub fit_t_max: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum KernelMethod {
    #[default]
    Bessel,
    Quadrature,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelConfig {
    pub t_min: f64,
    pub t_max: f64,
    #[serde(default = "one")]
    pub t_count: usize,
    #[serde(default)]
    pub t_spacing: Spacing,
    #[serde(default)]
    pub j_min: i64,
    #[serde(default)]
    pub j_max: i64,
    #[serde(default)]
    pub method: KernelMethod,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    #[serde(default = "default_panels")]
    pub max_panels: usize,
}

fn default_tolerance() -> f64 {
    1e-10
}

fn default_panels() -> usize {
    dispersim_core::kernel::quadrature::DEFAULT_PANEL_BUDGET
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum LatticeDatumKind {
    #[default]
    Delta,
    Gaussian,
    Random,
}

/// Initial data on ℤ.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeDatum {
    pub datum: LatticeDatumKind,
    /// Site of a delta, or centre of a Gaussian.
    pub datum_site: i64,
    pub datum_width: f64,
    /// Support of a random datum.
    pub datum_first: i64,
    pub datum_last: i64,
    pub datum_seed: u64,
}

fn unit() -> f64 {
    1.0
}

fn default_sites() -> usize {
    dispersim_core::evolution::DEFAULT_MAX_SITES
}

macro_rules! lattice_section {
    ($(#[$meta:meta])* $name:ident { $($(#[$fmeta:meta])* $field:ident : $ty:ty),* $(,)? }) => {
        $(#[$meta])*
        #[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
        #[serde(deny_unknown_fields)]
        pub struct $name {
            pub t_min: f64,
            pub t_max: f64,
            #[serde(default = "one")]
            pub t_count: usize,
            #[serde(default)]
            pub t_spacing: Spacing,
            #[serde(default, skip_serializing_if = "Option::is_none")]
            pub fit_t_min: Option<f64>,
            #[serde(default, skip_serializing_if = "Option::is_none")]
            pub fit_t_max: Option<f64>,
            #[serde(default)]
            pub datum: LatticeDatumKind,
            #[serde(default)]
            pub datum_site: i64,
            #[serde(default = "unit")]
            pub datum_width: f64,
            #[serde(default)]
            pub datum_first: i64,
            #[serde(default)]
            pub datum_last: i64,
            #[serde(default)]
            pub datum_seed: u64,
            $($(#[$fmeta])* pub $field: $ty,)*
        }

        impl $name {
            pub fn time_grid(&self) -> TimeGrid {
                TimeGrid { t_min: self.t_min, t_max: self.t_max, t_count: self.t_count, t_spacing: self.t_spacing }
            }

            pub fn fit_window(&self) -> FitWindow {
                FitWindow { fit_t_min: self.fit_t_min, fit_t_max: self.fit_t_max }
            }

            pub fn lattice_datum(&self) -> LatticeDatum {
                LatticeDatum {
                    datum: self.datum,
                    datum_site: self.datum_site,
                    datum_width: self.datum_width,
                    datum_first: self.datum_first,
                    datum_last: self.datum_last,
                    datum_seed: self.datum_seed,
                }
            }
        }
    };
}

lattice_section!(LineConfig {
    #[serde(default = "default_sites")]
    max_sites: usize,
});

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    #[default]
    Dirichlet,
    Neumann,
}

lattice_section!(HalfLineConfig {
    #[serde(default)]
    boundary: Boundary,
});

lattice_section!(CoupledConfig {
    b1: f64,
    b2: f64,
    truncation: usize,
});

macro_rules! continuum_section {
    ($(#[$meta:meta])* $name:ident { $($(#[$fmeta:meta])* $field:ident : $ty:ty),* $(,)? }) => {
        $(#[$meta])*
        #[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
        #[serde(deny_unknown_fields)]
        pub struct $name {
            pub t_min: f64,
            pub t_max: f64,
            #[serde(default = "one")]
            pub t_count: usize,
            #[serde(default)]
            pub t_spacing: Spacing,
            #[serde(default, skip_serializing_if = "Option::is_none")]
            pub fit_t_min: Option<f64>,
            #[serde(default, skip_serializing_if = "Option::is_none")]
            pub fit_t_max: Option<f64>,
            pub h: f64,
            pub dt: f64,
            #[serde(default)]
            pub datum_center: f64,
            #[serde(default = "unit")]
            pub datum_width: f64,
            $($(#[$fmeta])* pub $field: $ty,)*
        }

        impl $name {
            pub fn time_grid(&self) -> TimeGrid {
                TimeGrid { t_min: self.t_min, t_max: self.t_max, t_count: self.t_count, t_spacing: self.t_spacing }
            }

            pub fn fit_window(&self) -> FitWindow {
                FitWindow { fit_t_min: self.fit_t_min, fit_t_max: self.fit_t_max }
            }
        }
    };
}

continuum_section!(StepLineConfig {
    x_min: f64,
    x_max: f64,
    breakpoints: Vec<f64>,
    values: Vec<f64>,
});

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum VertexKind {
    #[default]
    Kirchhoff,
    Delta,
    DeltaPrime,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum StarDatumKind {
    /// The same Gaussian of the distance to the vertex on every edge.
    #[default]
    Gaussian,
    /// A compactly supported bump on one edge.
    Bump,
}

continuum_section!(StarConfig {
    edges: usize,
    edge_length: f64,
    #[serde(default)]
    vertex: VertexKind,
    #[serde(default)]
    strength: f64,
    #[serde(default)]
    datum: StarDatumKind,
    #[serde(default)]
    datum_edge: usize,
});

continuum_section!(DeltaLineConfig {
    x_min: f64,
    x_max: f64,
    strengths: Vec<f64>,
    positions: Vec<f64>,
    #[serde(default)]
    project: bool,
});

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum TorusCoefficients {
    #[default]
    Uniform,
    Random,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TorusConfig {
    pub t_min: f64,
    pub t_max: f64,
    #[serde(default = "one")]
    pub t_count: usize,
    #[serde(default)]
    pub t_spacing: Spacing,
    pub cutoff: usize,
    #[serde(default)]
    pub coefficients: TorusCoefficients,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_oversample")]
    pub oversample: usize,
    #[serde(default = "default_torus_points")]
    pub max_points: usize,
}

fn default_oversample() -> usize {
    8
}

fn default_torus_points() -> usize {
    dispersim_core::torus::DEFAULT_MAX_POINTS
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlphaPConfig {
    pub t_min: f64,
    pub t_max: f64,
    #[serde(default = "one")]
    pub t_count: usize,
    #[serde(default)]
    pub t_spacing: Spacing,
    /// Lebesgue exponent; `inf` for the sup norm.
    pub p: f64,
    #[serde(default = "default_kernel_sites")]
    pub max_sites: usize,
}

fn default_kernel_sites() -> usize {
    dispersim_core::decay::DEFAULT_KERNEL_SITES
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitConfig {
    /// CSV to read, relative to the config file.
    pub input: String,
    #[serde(default = "default_t_column")]
    pub t_column: String,
    #[serde(default = "default_norm_column")]
    pub norm_column: String,
    pub window_min: f64,
    pub window_max: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theoretical: Option<f64>,
}

fn default_t_column() -> String {
    "t".into()
}

fn default_norm_column() -> String {
    "sup_norm".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VdcConfig {
    #[serde(default = "default_vdc_grid")]
    pub grid_size: usize,
}

fn default_vdc_grid() -> usize {
    100_001
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OscIntConfig {
    pub a: Vec<f64>,
    pub y: Vec<f64>,
    pub z: Vec<f64>,
    pub t: Vec<f64>,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    /// Allowed relative gap between any level maximum and the overall maximum.
    #[serde(default = "default_level_tolerance")]
    pub level_tolerance: f64,
}

fn default_level_tolerance() -> f64 {
    0.1
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CouplingPreset {
    Kirchhoff,
    Delta,
    DeltaPrime,
    Dirichlet,
    Neumann,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CouplingCheckConfig {
    pub degree: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<CouplingPreset>,
    #[serde(default)]
    pub strength: f64,
    /// Row-major entries of `A`, used when no preset is given.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub a: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub b: Vec<f64>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| {
            let line = e.span().map(|s| text[..s.start.min(text.len())].matches('\n').count() + 1);
            CliError::config_parse(e.message().trim(), line)
        })
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Copy holding only the section `experiment` reads.
    pub fn restricted_to(&self, experiment: Experiment) -> Self {
        let mut out = Self {
            name: self.name.clone(),
            threads: self.threads,
            ..Self::default()
        };
        match experiment {
            Experiment::Kernel => out.kernel = self.kernel.clone(),
            Experiment::Line => out.line = self.line.clone(),
            Experiment::Halfline => out.halfline = self.halfline.clone(),
            Experiment::Coupled => out.coupled = self.coupled.clone(),
            Experiment::Stepline => out.stepline = self.stepline.clone(),
            Experiment::Star => out.star = self.star.clone(),
            Experiment::DeltaLine => out.delta_line = self.delta_line.clone(),
            Experiment::Torus => out.torus = self.torus.clone(),
            Experiment::Alphap => out.alphap = self.alphap.clone(),
            Experiment::Fit => out.fit = self.fit.clone(),
            Experiment::Vdc => out.vdc = self.vdc.clone(),
            Experiment::Oscint => out.oscint = self.oscint.clone(),
            Experiment::CouplingCheck => out.coupling_check = self.coupling_check.clone(),
        }
        out
    }
}

pub(crate) fn section<T>(section: &Option<T>, experiment: Experiment) -> Result<&T, CliError> {
    section
        .as_ref()
        .ok_or_else(|| CliError::config_field(experiment.name(), format!("config has no [{}] section", experiment.name())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_keys_are_rejected_with_a_line() {
        let err = ConfigFile::parse("[kernel]\nt_min = 0.0\nt_max = 0.0\nj_maxx = 3\n").unwrap_err();
        assert_eq!(err.line, Some(4));
        assert!(err.message.contains("j_maxx"), "{}", err.message);
    }

    #[test]
    fn round_trip() {
        let text = "name = \"demo\"\n[alphap]\nt_min = 10.0\nt_max = 1e4\nt_count = 20\nt_spacing = \"log\"\np = inf\n";
        let config = ConfigFile::parse(text).unwrap();
        assert_eq!(config.alphap.as_ref().unwrap().p, f64::INFINITY);
        assert_eq!(ConfigFile::parse(&config.to_toml()).unwrap(), config);
    }

    #[test]
    fn time_grids() {
        let grid = TimeGrid { t_min: 1.0, t_max: 100.0, t_count: 3, t_spacing: Spacing::Log };
        let t = grid.times().unwrap();
        assert_eq!(t[0], 1.0);
        assert!((t[1] - 10.0).abs() < 1e-12);
        assert_eq!(t[2], 100.0);
        let bad = TimeGrid { t_min: 0.0, t_max: 1.0, t_count: 3, t_spacing: Spacing::Log };
        assert!(bad.times().is_err());
        let flat = TimeGrid { t_min: 2.0, t_max: 2.0, t_count: 2, t_spacing: Spacing::Linear };
        assert!(flat.times().is_err());
    }
}
