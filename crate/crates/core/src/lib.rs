//! Discrete Monge–Ampère measures, Dirichlet solvers, and the eigenvalue
//! machinery for singular Borel measures on bounded convex domains.

pub mod checks;
pub mod convex_core;
pub mod dirichlet;
pub mod eigen;
pub mod error;
pub mod geometry;
pub mod measures;
pub mod oracles;
pub mod polygon;

pub use convex_core::{
    canonical_approximation, convex_envelope, energy, lipschitz_decompose, ma_measure, mixed_energy,
    mixed_ma_measure, Backend, ConvexFn, DiscreteMeasure, SubgradientCell,
};
pub use error::{MaError, Result};
pub use geometry::{ConvexDomain, Mesh, MeshKind};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
