use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::{write_json, Meta};
use crate::error::Result;
use crate::recovery::{counterexample_map, petz_transpose, recovery_report};
use crate::sdp::{fidelity_of_recovery, RecoverySummary};
use crate::states::{counterexample_state, TripartiteLabels};

/// The three-qubit state on which a measure-and-prepare map beats the
/// square root of the transpose-map fidelity.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CounterexampleReport {
    pub f_given: f64,
    pub f_transpose: f64,
    pub sqrt_f_transpose: f64,
    pub fidelity_of_recovery: RecoverySummary,
    pub given_above_0_9829: bool,
    pub sqrt_transpose_below_0_9696: bool,
    /// `F(R_given) > √F(T)`.
    pub ordering_holds: bool,
    /// `F(R_given) ≤ F(A;C|B)`.
    pub dominated_by_optimum: bool,
    pub meta: Meta,
}

impl CounterexampleReport {
    pub fn passed(&self) -> bool {
        self.given_above_0_9829
            && self.sqrt_transpose_below_0_9696
            && self.ordering_holds
            && self.dominated_by_optimum
    }
}

pub fn cmd_counterexample(out: Option<&Path>) -> Result<CounterexampleReport> {
    let start = Instant::now();
    let rho = counterexample_state();
    let labels = TripartiteLabels::standard();
    let f_given = recovery_report(&rho, &labels, &counterexample_map(), false)?.fid;
    let t = petz_transpose(&rho.marginal(&[1, 2])?)?;
    let f_transpose = recovery_report(&rho, &labels, &t, false)?.fid;
    let optimum = fidelity_of_recovery(&rho, &labels)?;
    let sqrt_f_transpose = f_transpose.sqrt();
    let report = CounterexampleReport {
        f_given,
        f_transpose,
        sqrt_f_transpose,
        given_above_0_9829: f_given > 0.9829 && f_given < 1.0,
        sqrt_transpose_below_0_9696: sqrt_f_transpose > 0.0 && sqrt_f_transpose < 0.9696,
        ordering_holds: f_given > sqrt_f_transpose,
        dominated_by_optimum: f_given <= optimum.dual_bound.max(optimum.value) + 1e-9,
        fidelity_of_recovery: optimum.summary(),
        meta: Meta::stamp(start),
    };
    if let Some(path) = out {
        write_json(&report, path)?;
    }
    Ok(report)
}
