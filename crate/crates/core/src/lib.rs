//! Geometric inhomogeneous random graphs: generation, connectivity
//! analysis and reproducible statistical experiments.

pub mod bundle;
pub mod cli;
pub mod connectivity;
pub mod error;
pub mod experiments;
pub mod generator;
pub mod geometry;
pub mod model;

pub use error::{Error, Result};
pub use generator::{generate, Engine, Graph};
pub use geometry::{CellSpec, GroundSpace, Region};
pub use model::{GirgParams, WeightedPoint};
