//! Discrete and metric-graph Schrödinger evolutions, and the tools to measure
//! how fast their solutions decay.

pub mod decay;
pub mod eigen;
pub mod error;
pub mod evolution;
pub mod graph;
pub mod kernel;
pub mod lattice;
pub mod torus;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/kernel.md")]
    mod kernel {}
    #[doc = include_str!("../../../book/src/lattice.md")]
    mod lattice {}
    #[doc = include_str!("../../../book/src/junction.md")]
    mod junction {}
    #[doc = include_str!("../../../book/src/decay.md")]
    mod decay {}
    #[doc = include_str!("../../../book/src/graphs.md")]
    mod graphs {}
    #[doc = include_str!("../../../book/src/torus.md")]
    mod torus {}
}
