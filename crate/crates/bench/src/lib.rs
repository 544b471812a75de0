//! Shared fixtures for the kernel benchmarks in `benches/`.

use stflow::{make_problem, ProblemId, SpaceTimeSystem};

/// Lid-driven cavity space-time system at refinement `r` with `n_t` steps.
pub fn cavity_system(r: u32, n_t: usize) -> SpaceTimeSystem {
    let p = make_problem(ProblemId::Cavity, None).expect("cavity takes no Peclet number");
    SpaceTimeSystem::for_problem(&p, r, n_t).expect("assembly")
}

/// Deterministic test vector.
pub fn ramp(n: usize) -> Vec<f64> {
    (0..n).map(|i| ((i * 7919) % 113) as f64 / 113.0 - 0.5).collect()
}
