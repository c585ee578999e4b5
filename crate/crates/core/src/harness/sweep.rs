use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::AveragingConfig;
use crate::error::{Error, Result};
use crate::recovery::{averaged_rotated_petz, petz_transpose, recovery_report, rotated_petz};
use crate::sdp::{fidelity_of_recovery, MAX_CHOI_DIM};
use crate::states::{DensityMatrix, TripartiteLabels};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub t_min: f64,
    pub t_max: f64,
    pub steps: usize,
    pub averaging: AveragingConfig,
    /// Adds the SDP optimum as a reference row.
    pub with_optimum: bool,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            t_min: -5.0,
            t_max: 5.0,
            steps: 41,
            averaging: AveragingConfig::default(),
            with_optimum: true,
        }
    }
}

/// One line of the sweep table. `kind` is `rotated`, `petz`, `averaged`
/// or `optimal`; only `rotated` rows carry a `t`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub kind: String,
    pub t: Option<f64>,
    pub fidelity: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("kind,t,fidelity\n");
        for r in &self.rows {
            let t = r.t.map(|t| format!("{t:.12}")).unwrap_or_default();
            let _ = writeln!(s, "{},{},{:.15}", r.kind, t, r.fidelity);
        }
        s
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv())?;
        Ok(())
    }

    pub fn rotated(&self) -> impl Iterator<Item = &SweepRow> {
        self.rows.iter().filter(|r| r.kind == "rotated")
    }

    pub fn find(&self, kind: &str) -> Option<&SweepRow> {
        self.rows.iter().find(|r| r.kind == kind)
    }
}

/// `F(ρ_ABC, R_t(ρ_AB))` on a uniform grid of `t`, plus reference rows.
pub fn cmd_sweep(rho: &DensityMatrix, cfg: &SweepConfig) -> Result<SweepTable> {
    if cfg.steps == 0 || !(cfg.t_min <= cfg.t_max) {
        return Err(Error::InvalidArgument(format!(
            "sweep needs steps >= 1 and t_min <= t_max (got {}, [{}, {}])",
            cfg.steps, cfg.t_min, cfg.t_max
        )));
    }
    let labels = TripartiteLabels::standard();
    let rho = labels.canonicalize(rho)?;
    let rho_bc = rho.marginal(&[1, 2])?;
    let fid_of = |chan: &crate::recovery::Channel| -> Result<f64> {
        Ok(recovery_report(&rho, &labels, chan, false)?.fid)
    };

    let ts: Vec<f64> = (0..cfg.steps)
        .map(|k| {
            if cfg.steps == 1 {
                cfg.t_min
            } else {
                cfg.t_min + (cfg.t_max - cfg.t_min) * k as f64 / (cfg.steps - 1) as f64
            }
        })
        .collect();
    let mut rows: Vec<SweepRow> = ts
        .par_iter()
        .map(|&t| {
            Ok(SweepRow {
                kind: "rotated".into(),
                t: Some(t),
                fidelity: fid_of(&rotated_petz(&rho_bc, t)?)?,
            })
        })
        .collect::<Result<_>>()?;
    rows.push(SweepRow {
        kind: "petz".into(),
        t: None,
        fidelity: fid_of(&petz_transpose(&rho_bc)?)?,
    });
    rows.push(SweepRow {
        kind: "averaged".into(),
        t: None,
        fidelity: fid_of(&averaged_rotated_petz(&rho_bc, &cfg.averaging.scheme()?)?)?,
    });
    let dims = rho.dims();
    if cfg.with_optimum && dims.get(1) * dims.get(1) * dims.get(2) <= MAX_CHOI_DIM {
        rows.push(SweepRow {
            kind: "optimal".into(),
            t: None,
            fidelity: fidelity_of_recovery(&rho, &labels)?.value,
        });
    }
    Ok(SweepTable { rows })
}
