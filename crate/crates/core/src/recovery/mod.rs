//! Recovery channels `B → B ⊗ C` and the bounds they achieve.

mod channel;
mod petz;
mod report;

pub use channel::{
    apply, apply_to_matrix, channel_from_kraus, project_to_tpcp, validate_tpcp, Channel,
    ChannelFile, TpcpReport, TPCP_TOL,
};
pub use petz::{
    averaged_rotated_petz, cosh_density, petz_transpose, rotated_petz, unital_form_check,
    AveragingScheme, Node, UnitalFormCheck, WeightLaw, DEFAULT_HALFWIDTH, DEFAULT_NODES,
};
pub use report::{extended_float, extended_float_opt, recover, recovery_report, RecoveryReport};

use crate::error::Result;
use crate::linalg::{diag_real, DimVector};
use crate::states::DensityMatrix;

/// Measure-and-prepare map on a qubit `B`:
/// `|0⟩⟨0| ↦ |00⟩⟨00|`, `|1⟩⟨1| ↦ ⅓(|01⟩⟨01| + |10⟩⟨10| + |11⟩⟨11|)`.
pub fn counterexample_map() -> Channel {
    let third = 1.0 / 3.0;
    Channel::measure_and_prepare(
        &[
            diag_real(&[1.0, 0.0, 0.0, 0.0]),
            diag_real(&[0.0, third, third, third]),
        ],
        DimVector::new(vec![2, 2]).unwrap(),
    )
    .expect("valid prepared states")
}

/// Exact recovery map of a state with classical `B`:
/// `|b⟩⟨b| ↦ |b⟩⟨b| ⊗ ρ_{C,b}`, given the conditional `C` states.
pub fn classical_b_recovery(rho_c_given_b: &[DensityMatrix]) -> Result<Channel> {
    let d_b = rho_c_given_b.len();
    let d_c = rho_c_given_b.first().map(|r| r.dim()).unwrap_or(1);
    let outputs: Vec<_> = rho_c_given_b
        .iter()
        .enumerate()
        .map(|(b, rho_c)| crate::linalg::tensor(&crate::linalg::unit(d_b, b, b), rho_c.matrix()))
        .collect();
    Channel::measure_and_prepare(&outputs, DimVector::new(vec![d_b, d_c])?)
}
