//! Fibered IBVP solver for the quasi-periodic Schrödinger equation
//! (-i d_t - Laplace + V) v = 0 on Q' and the reduced boundary operator
//! Lambda_{V,theta} : (v0, h) -> (d_nu v on Sigma, v(T)).

mod potential;
mod probe;
mod solver;
mod boundary;

pub use potential::{Potential, PotentialFlags};
pub use probe::{BoundaryTrace, ProbeInput, ProxyNorm};
pub use solver::{
    solve_cylinder_ibvp, solve_fiber_ibvp, solve_fiber_ibvp_with_report, SolveReport,
    SolverOptions,
};
pub use boundary::{boundary_operator, operator_norm_estimate, BoundaryData};
