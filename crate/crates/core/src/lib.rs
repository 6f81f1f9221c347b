//! Space-time discontinuous Galerkin solver for the Allen-Cahn equation
//! `u_t − Δu + ε⁻²(u³ − u) = f` with homogeneous Dirichlet data, together with the
//! companion problems and diagnostics used to verify it.

pub mod checkpoint;
pub mod companion;
pub mod diagnostics;
pub mod error;
pub mod experiments;
pub mod forward;
pub mod linalg;
pub mod mesh;
pub mod problem;
pub mod quadrature;
pub mod slab;
pub mod space;
pub mod time;

pub use error::{Error, Result};
pub use forward::{l2_project, solve_forward, DgSolution, Direction, NewtonConfig, SlabSolution};
pub use mesh::{build_interval_mesh, build_square_mesh, Mesh};
pub use problem::{ExactSolution, Forcing, ProblemSpec};
pub use space::{build_space, FeSpace};
pub use time::{make_time_basis, TimeBasis, TimePartition};
