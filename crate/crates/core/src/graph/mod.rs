//! Continuum models on metric graphs: the line with a step coefficient, star
//! graphs with Kirchhoff, δ and δ′ vertices, the line with point
//! interactions, and validation of general vertex couplings.
//!
//! All evolutions use Crank–Nicolson on a second-order finite-volume grid with
//! Dirichlet walls at the truncation.

pub mod bound;
pub mod cn;
pub mod coupling;
pub mod line;
pub mod star;

pub use bound::{bound_states, project_continuous, BoundState};
pub use cn::{minimum_buffer, EvolutionTrace, Grid1d, StepControl};
pub use coupling::{validate_coupling, CouplingDefect, CouplingReport, VertexCoupling};
pub use line::{evolve_delta_line, evolve_stepline, DeltaPotentialSpec, StepCoefficient};
pub use star::{evolve_star, StarGraphSpec, StarGrid, VertexCondition};
