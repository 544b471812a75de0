//! Space-time system, block preconditioner and solvers.

pub mod eigs;
pub mod precond;
pub mod solve;
pub mod system;

pub use eigs::preconditioned_schur_eigs;
pub use precond::{
    LaplacianSolver, MassSolver, PrecondConfig, SchurForm, SpaceTimePreconditioner, VelocitySolver,
    MASS_JACOBI_BOUNDS,
};
pub use solve::{
    sequential_time_stepping, solve_all_at_once, solve_with_preconditioner, SequentialReport,
    SpaceTimeSolution,
};
pub use system::{apply_spacetime_operator, SpaceTimeSystem, SpaceTimeVector};
