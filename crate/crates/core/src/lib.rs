mod kernel;

pub mod covariance;
pub mod graph;
pub mod linalg;
pub mod nodal;
pub mod quadrature;
pub mod seeding;
pub mod spectral;
pub mod stats;

/// Crate version, recorded in experiment outputs.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
