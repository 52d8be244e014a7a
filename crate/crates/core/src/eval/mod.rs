//! Graph-set comparison by squared MMD over degree, clustering and 4-node
//! orbit statistics.

pub mod mmd;
pub mod orbits;
pub mod stats;

pub use mmd::{evaluate_sets, kernel_rbf, kernel_w, mmd_squared, wasserstein1, EvalParams, MmdReport, SetSummary};
pub use orbits::{node_orbit_counts, orbit_counts, OrbitVector, NUM_ORBITS};
pub use stats::{clustering_coefficients, clustering_hist, degree_hist, Histogram};
