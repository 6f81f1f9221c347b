//! Run configurations, the problem registry and the experiment drivers behind the CLI.

pub mod commands;
pub mod config;
pub mod registry;

pub use commands::*;
pub use config::{MeshConfig, OutputConfig, ProblemConfig, QuadratureConfig, RunConfig, SolverConfig, SpaceConfig, TimeConfig};
pub use registry::{lookup, RegistryEntry, REGISTRY};
