//! All-at-once space-time solvers for incompressible flow.
//!
//! Taylor-Hood P2/P1 in space, implicit Euler in time, and the whole time
//! history solved as one linear system by GMRES with a block
//! upper-triangular preconditioner whose pressure Schur complement is
//! approximated by `M_p^{-1} F_p A_p^{-1}`.

pub mod error;
pub mod experiments;
pub mod fem;
pub mod linalg;
pub mod mesh;
pub mod picard;
pub mod problems;
pub mod spacetime;

pub use error::{Error, Result};
pub use experiments::{ExperimentReport, SolverMode};
pub use fem::{build_spaces, FESpaces, SpatialOperators, Wind};
pub use linalg::{DenseMatrix, KrylovConfig, SolveReport, SparseLu, SparseMatrix};
pub use mesh::{backstep_mesh, mesh_stats, unit_square_mesh, BoundaryTag, TriMesh};
pub use picard::{picard_solve, PicardConfig, PicardReport};
pub use problems::{make_problem, ProblemId, ProblemSpec};
pub use spacetime::{
    preconditioned_schur_eigs, sequential_time_stepping, solve_all_at_once, PrecondConfig,
    SpaceTimeSystem, SpaceTimeVector,
};
