use std::collections::BTreeMap;
use std::time::Instant;

use log::warn;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    aggregate_maps, write_json, Certified, Ensemble, ExperimentConfig, MapAggregate, Meta,
};
use crate::error::{Error, Result};
use crate::linalg::{trace_norm, DimVector};
use crate::recovery::{
    averaged_rotated_petz, extended_float, petz_transpose, recovery_report, unital_form_check,
    validate_tpcp, Channel, RecoveryReport, TpcpReport, UnitalFormCheck,
};
use crate::sdp::{fidelity_of_recovery, RecoverySummary};
use crate::states::{
    random_density_with, random_extension, random_markov_state, random_pure_state, rng_for_sample,
    rng_from_seed, DensityMatrix, TripartiteLabels,
};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleReport {
    pub index: usize,
    /// Keyed by map name: `petz`, `averaged`, `optimal`.
    pub reports: BTreeMap<String, RecoveryReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sdp: Option<RecoverySummary>,
    /// `‖ρ_BC(extension) − ρ_BC‖₁`, for campaigns over a fixed marginal.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub marginal_error: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl SampleReport {
    fn failed(index: usize, err: Error) -> Self {
        warn!("sample {index} failed: {err}");
        SampleReport {
            index,
            reports: BTreeMap::new(),
            sdp: None,
            marginal_error: None,
            error: Some(err.to_string()),
        }
    }
}

/// Properties of the single channel used by `universal`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelStructure {
    pub tpcp: TpcpReport,
    /// `‖R(ρ_B) − ρ_BC‖₁`.
    pub marginal_image_error: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unital_form: Option<UnitalFormCheck>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CampaignReport {
    pub command: String,
    pub config: ExperimentConfig,
    /// Map whose deltas decide the exit status.
    pub certified_map: String,
    pub samples: Vec<SampleReport>,
    pub aggregates: BTreeMap<String, MapAggregate>,
    pub violations: usize,
    pub failures: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub channel: Option<ChannelStructure>,
    pub meta: Meta,
}

impl CampaignReport {
    pub fn passed(&self) -> bool {
        self.violations == 0 && self.failures == 0
    }

    fn assemble(
        command: &str,
        cfg: &ExperimentConfig,
        certified_map: &str,
        certified: Certified,
        samples: Vec<SampleReport>,
        channel: Option<ChannelStructure>,
        start: Instant,
    ) -> Result<Self> {
        let mut cert = BTreeMap::new();
        cert.insert(certified_map, certified);
        let aggregates = aggregate_maps(&samples, &cert, cfg.tolerance);
        let violations = aggregates.get(certified_map).map_or(0, |a| a.violations);
        let failures = samples.iter().filter(|s| s.error.is_some()).count();
        let report = CampaignReport {
            command: command.to_string(),
            config: cfg.clone(),
            certified_map: certified_map.to_string(),
            samples,
            aggregates,
            violations,
            failures,
            channel,
            meta: Meta::stamp(start),
        };
        if let Some(path) = &cfg.out {
            write_json(&report, path)?;
        }
        Ok(report)
    }
}

fn dims_of(cfg: &ExperimentConfig) -> DimVector {
    DimVector::new(cfg.dims.to_vec()).expect("validated dims")
}

fn draw_state(cfg: &ExperimentConfig, index: usize) -> Result<DensityMatrix> {
    let mut rng = rng_for_sample(cfg.seed, index as u64);
    let [d_a, d_b, d_c] = cfg.dims;
    match cfg.ensemble {
        Ensemble::Random => random_density_with(&dims_of(cfg), d_a * d_b * d_c, &mut rng),
        Ensemble::Markov => random_markov_state(d_a, d_b, d_c, &mut rng),
    }
}

fn verify_sample(
    cfg: &ExperimentConfig,
    index: usize,
    rho: &DensityMatrix,
) -> Result<SampleReport> {
    let labels = TripartiteLabels::standard();
    let rho = labels.canonicalize(rho)?;
    let rho_bc = rho.marginal(&[1, 2])?;
    let petz = petz_transpose(&rho_bc)?;
    let averaged = averaged_rotated_petz(&rho_bc, &cfg.averaging.scheme()?)?;
    let optimum = fidelity_of_recovery(&rho, &labels)?;
    let mut reports = BTreeMap::new();
    for (name, chan) in [
        ("petz", &petz),
        ("averaged", &averaged),
        ("optimal", &optimum.witness),
    ] {
        reports.insert(
            name.to_string(),
            recovery_report(&rho, &labels, chan, cfg.compute_dm)?,
        );
    }
    Ok(SampleReport {
        index,
        reports,
        sdp: Some(optimum.summary()),
        marginal_error: None,
        error: None,
    })
}

/// Checks the recovery bounds on random states. The certified map is the
/// SDP-optimal channel, for which `I ≥ −2 log₂ F` and
/// `F ≥ 1 − (ln 2/2) I` must hold; `D_M` deltas are reported only.
///
/// With `cfg.state` set, that single state is evaluated instead.
pub fn cmd_verify(cfg: &ExperimentConfig) -> Result<CampaignReport> {
    cfg.validate()?;
    let start = Instant::now();
    let samples: Vec<SampleReport> = match cfg.load_state()? {
        Some(state) => {
            vec![verify_sample(cfg, 0, &state).unwrap_or_else(|e| SampleReport::failed(0, e))]
        }
        None => (0..cfg.samples)
            .into_par_iter()
            .map(|i| {
                draw_state(cfg, i)
                    .and_then(|rho| verify_sample(cfg, i, &rho))
                    .unwrap_or_else(|e| SampleReport::failed(i, e))
            })
            .collect(),
    };
    let cert = Certified {
        thm1: true,
        meas: false,
        cor3: true,
    };
    CampaignReport::assemble("verify", cfg, "optimal", cert, samples, None, start)
}

fn universal_marginal(cfg: &ExperimentConfig) -> Result<DensityMatrix> {
    match cfg.load_state()? {
        Some(state) => match state.dims().len() {
            2 => Ok(state),
            3 => state.marginal(&[1, 2]),
            n => Err(Error::InvalidArgument(format!(
                "universal needs a state on BC or ABC, got {n} subsystems"
            ))),
        },
        None => {
            let [_, d_b, d_c] = cfg.dims;
            let dims = DimVector::new(vec![d_b, d_c])?;
            random_density_with(&dims, d_b * d_c, &mut rng_from_seed(cfg.seed))
        }
    }
}

fn channel_structure(chan: &Channel, rho_bc: &DensityMatrix) -> Result<ChannelStructure> {
    let image = chan.apply_matrix(rho_bc.marginal(&[0])?.matrix())?;
    Ok(ChannelStructure {
        tpcp: validate_tpcp(chan),
        marginal_image_error: trace_norm(&(image - rho_bc.matrix())),
        unital_form: unital_form_check(chan, rho_bc).ok(),
    })
}

/// One averaged rotated-Petz map, built from `ρ_BC` alone, evaluated on
/// random extensions of that marginal. All deltas of the averaged map count.
pub fn cmd_universal(cfg: &ExperimentConfig) -> Result<CampaignReport> {
    cfg.validate()?;
    let start = Instant::now();
    let rho_bc = universal_marginal(cfg)?;
    let averaged = averaged_rotated_petz(&rho_bc, &cfg.averaging.scheme()?)?;
    let petz = petz_transpose(&rho_bc)?;
    let structure = channel_structure(&averaged, &rho_bc)?;
    let d_a = cfg.dims[0];
    let labels = TripartiteLabels::standard();
    let samples: Vec<SampleReport> = (0..cfg.samples)
        .into_par_iter()
        .map(|i| {
            let run = || -> Result<SampleReport> {
                let mut rng = rng_for_sample(cfg.seed, i as u64);
                let ext = random_extension(&rho_bc, d_a, &mut rng)?;
                let marginal = ext.marginal(&[1, 2])?;
                let mut reports = BTreeMap::new();
                for (name, chan) in [("averaged", &averaged), ("petz", &petz)] {
                    reports.insert(
                        name.to_string(),
                        recovery_report(&ext, &labels, chan, cfg.compute_dm)?,
                    );
                }
                Ok(SampleReport {
                    index: i,
                    reports,
                    sdp: None,
                    marginal_error: Some(trace_norm(&(marginal.matrix() - rho_bc.matrix()))),
                    error: None,
                })
            };
            run().unwrap_or_else(|e| SampleReport::failed(i, e))
        })
        .collect();
    let cert = Certified {
        thm1: true,
        meas: true,
        cor3: true,
    };
    CampaignReport::assemble(
        "universal",
        cfg,
        "averaged",
        cert,
        samples,
        Some(structure),
        start,
    )
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BkSample {
    pub index: usize,
    #[serde(with = "extended_float")]
    pub f_transpose: f64,
    #[serde(with = "extended_float")]
    pub sqrt_f_transpose: f64,
    /// Fidelity of recovery (closed form of the repaired SDP witness).
    #[serde(with = "extended_float")]
    pub f_recovery: f64,
    #[serde(with = "extended_float")]
    pub dual_bound: f64,
    /// `F(A;C|B) − F(T)`.
    #[serde(with = "extended_float")]
    pub lower_slack: f64,
    /// `√F(T) − dual bound`.
    #[serde(with = "extended_float")]
    pub upper_slack: f64,
    pub violation: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BkReport {
    pub command: String,
    pub config: ExperimentConfig,
    pub samples: Vec<BkSample>,
    /// Inputs skipped because they are not pure.
    pub excluded: Vec<String>,
    #[serde(with = "extended_float")]
    pub min_lower_slack: f64,
    #[serde(with = "extended_float")]
    pub min_upper_slack: f64,
    pub violations: usize,
    pub failures: usize,
    pub meta: Meta,
}

impl BkReport {
    pub fn passed(&self) -> bool {
        self.violations == 0 && self.failures == 0
    }
}

const PURITY_TOL: f64 = 1e-8;

fn bk_sample(index: usize, rho: &DensityMatrix, tol: f64) -> Result<BkSample> {
    let labels = TripartiteLabels::standard();
    let rho_bc = rho.marginal(&[1, 2])?;
    let f_t = recovery_report(rho, &labels, &petz_transpose(&rho_bc)?, false)?.fid;
    let opt = fidelity_of_recovery(rho, &labels)?;
    let upper = if opt.dual_bound.is_finite() {
        opt.dual_bound.max(opt.value)
    } else {
        opt.value
    };
    let lower_slack = opt.value - f_t;
    let upper_slack = f_t.sqrt() - upper;
    Ok(BkSample {
        index,
        f_transpose: f_t,
        sqrt_f_transpose: f_t.sqrt(),
        f_recovery: opt.value,
        dual_bound: opt.dual_bound,
        lower_slack,
        upper_slack,
        violation: lower_slack < -tol || upper_slack < -tol,
        error: None,
    })
}

/// `F(T) ≤ F(A;C|B) ≤ √F(T)` on pure states. With `cfg.state` set, only
/// that state is checked, and it is excluded when mixed.
pub fn cmd_bk(cfg: &ExperimentConfig) -> Result<BkReport> {
    cfg.validate()?;
    let start = Instant::now();
    let tol = cfg.tolerance;
    let failed = |index: usize, e: Error| {
        warn!("sample {index} failed: {e}");
        BkSample {
            index,
            f_transpose: f64::NAN,
            sqrt_f_transpose: f64::NAN,
            f_recovery: f64::NAN,
            dual_bound: f64::NAN,
            lower_slack: f64::NAN,
            upper_slack: f64::NAN,
            violation: false,
            error: Some(e.to_string()),
        }
    };
    let mut excluded = Vec::new();
    let samples: Vec<BkSample> = match cfg.load_state()? {
        Some(state) => {
            let labels = TripartiteLabels::standard();
            let state = labels.canonicalize(&state)?;
            if state.is_pure(PURITY_TOL) {
                vec![bk_sample(0, &state, tol).unwrap_or_else(|e| failed(0, e))]
            } else {
                let msg = format!(
                    "input state has rank {} and is not pure; excluded",
                    state.rank()
                );
                warn!("{msg}");
                excluded.push(msg);
                Vec::new()
            }
        }
        None => (0..cfg.samples)
            .into_par_iter()
            .map(|i| {
                let mut rng = rng_for_sample(cfg.seed, i as u64);
                let rho = random_pure_state(&dims_of(cfg), &mut rng);
                bk_sample(i, &rho, tol).unwrap_or_else(|e| failed(i, e))
            })
            .collect(),
    };
    let ok: Vec<&BkSample> = samples.iter().filter(|s| s.error.is_none()).collect();
    let report = BkReport {
        command: "bk".into(),
        config: cfg.clone(),
        min_lower_slack: ok
            .iter()
            .map(|s| s.lower_slack)
            .fold(f64::INFINITY, f64::min),
        min_upper_slack: ok
            .iter()
            .map(|s| s.upper_slack)
            .fold(f64::INFINITY, f64::min),
        violations: ok.iter().filter(|s| s.violation).count(),
        failures: samples.len() - ok.len(),
        samples,
        excluded,
        meta: Meta::stamp(start),
    };
    if let Some(path) = &cfg.out {
        write_json(&report, path)?;
    }
    Ok(report)
}
