//! Small dense semidefinite programs and the quantum instances built on them.

mod complex;
mod problem;
mod quantum;
mod solver;

pub use complex::{extract_hermitian, ComplexSdp, ComplexSolution, LinearCoefficients};
pub use problem::{
    Constraint, Entry, IterateSummary, SdpProblem, SdpSolution, SolverOptions, Status,
};
pub use quantum::{
    fidelity_of_recovery, fidelity_of_recovery_unital_form, fidelity_of_recovery_unital_form_with,
    fidelity_of_recovery_with, fidelity_sdp, fidelity_sdp_with, RecoveryOptimum, RecoverySummary,
    MAX_CHOI_DIM,
};
pub use solver::{solve_sdp, MAX_TOTAL_DIM};
