//! Seeded experiment campaigns behind the `qrecovery` binary.
//!
//! Every campaign returns a serialisable report whose `meta` section holds
//! the only run-dependent fields (timestamp, runtime); everything else is a
//! deterministic function of the configuration.

mod campaigns;
mod counterexample;
mod sweep;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::recovery::{extended_float, AveragingScheme, RecoveryReport, WeightLaw};
use crate::states::DensityMatrix;

pub use campaigns::{
    cmd_bk, cmd_universal, cmd_verify, BkReport, BkSample, CampaignReport, SampleReport,
};
pub use counterexample::{cmd_counterexample, CounterexampleReport};
pub use sweep::{cmd_sweep, SweepConfig, SweepRow, SweepTable};

pub const DEFAULT_TOLERANCE: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Ensemble {
    /// Full-rank states from the induced (Haar purification) measure.
    Random,
    /// Random quantum Markov chains with a classical `B`.
    Markov,
}

impl FromStr for Ensemble {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "random" => Ok(Ensemble::Random),
            "markov" => Ok(Ensemble::Markov),
            other => Err(Error::InvalidArgument(format!(
                "unknown ensemble {other:?} (expected random or markov)"
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AveragingConfig {
    pub nodes: usize,
    pub halfwidth: f64,
    pub weights: WeightLaw,
}

impl Default for AveragingConfig {
    fn default() -> Self {
        AveragingConfig {
            nodes: crate::recovery::DEFAULT_NODES,
            halfwidth: crate::recovery::DEFAULT_HALFWIDTH,
            weights: WeightLaw::Cosh,
        }
    }
}

impl AveragingConfig {
    pub fn scheme(&self) -> Result<AveragingScheme> {
        AveragingScheme::grid(self.nodes, self.halfwidth, self.weights)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    /// `(d_A, d_B, d_C)`.
    pub dims: [usize; 3],
    pub samples: usize,
    pub seed: u64,
    pub tolerance: f64,
    pub compute_dm: bool,
    pub averaging: AveragingConfig,
    pub ensemble: Ensemble,
    #[serde(skip)]
    pub out: Option<PathBuf>,
    #[serde(skip)]
    pub state: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            dims: [2, 2, 2],
            samples: 100,
            seed: 0,
            tolerance: DEFAULT_TOLERANCE,
            compute_dm: false,
            averaging: AveragingConfig::default(),
            ensemble: Ensemble::Random,
            out: None,
            state: None,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.dims.contains(&0) {
            return Err(Error::InvalidArgument(format!(
                "dims must be >= 1, got {:?}",
                self.dims
            )));
        }
        if self.samples == 0 {
            return Err(Error::InvalidArgument("samples must be >= 1".into()));
        }
        if !(self.tolerance > 0.0) || !self.tolerance.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "tolerance must be positive, got {}",
                self.tolerance
            )));
        }
        self.averaging.scheme()?;
        Ok(())
    }

    pub(crate) fn load_state(&self) -> Result<Option<DensityMatrix>> {
        self.state
            .as_deref()
            .map(DensityMatrix::load_json)
            .transpose()
    }
}

/// Parses `"2,3,2"`.
pub fn parse_dims(s: &str) -> Result<[usize; 3]> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(Error::InvalidArgument(format!(
            "expected dA,dB,dC, got {s:?}"
        )));
    }
    let mut dims = [0; 3];
    for (d, p) in dims.iter_mut().zip(parts) {
        *d = p
            .parse()
            .map_err(|_| Error::InvalidArgument(format!("bad dimension {p:?}")))?;
    }
    Ok(dims)
}

/// Run-dependent fields, excluded from determinism comparisons.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Meta {
    pub timestamp: String,
    pub runtime_seconds: f64,
    pub version: String,
}

impl Meta {
    pub(crate) fn stamp(start: std::time::Instant) -> Meta {
        Meta {
            timestamp: chrono::Utc::now().to_rfc3339(),
            runtime_seconds: start.elapsed().as_secs_f64(),
            version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }
}

/// Minima over the samples of one recovery map.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MapAggregate {
    pub samples: usize,
    #[serde(with = "extended_float")]
    pub min_delta_thm1: f64,
    #[serde(with = "crate::recovery::extended_float_opt", default)]
    pub min_delta_meas: Option<f64>,
    #[serde(with = "extended_float")]
    pub min_delta_cor3: f64,
    #[serde(with = "extended_float")]
    pub min_fid: f64,
    /// Samples with a counted delta below `−tolerance`.
    pub violations: usize,
}

/// Which deltas of a report count towards violations.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) struct Certified {
    pub thm1: bool,
    pub meas: bool,
    pub cor3: bool,
}

impl Certified {
    pub(crate) const NONE: Certified = Certified {
        thm1: false,
        meas: false,
        cor3: false,
    };

    pub(crate) fn violates(&self, r: &RecoveryReport, tol: f64) -> bool {
        (self.thm1 && r.delta_thm1 < -tol)
            || (self.cor3 && r.delta_cor3 < -tol)
            || (self.meas && r.delta_meas.is_some_and(|d| d < -tol))
    }
}

pub(crate) fn aggregate<'a>(
    reports: impl Iterator<Item = &'a RecoveryReport>,
    certified: Certified,
    tol: f64,
) -> MapAggregate {
    let mut agg = MapAggregate {
        samples: 0,
        min_delta_thm1: f64::INFINITY,
        min_delta_meas: None,
        min_delta_cor3: f64::INFINITY,
        min_fid: f64::INFINITY,
        violations: 0,
    };
    for r in reports {
        agg.samples += 1;
        agg.min_delta_thm1 = agg.min_delta_thm1.min(r.delta_thm1);
        agg.min_delta_cor3 = agg.min_delta_cor3.min(r.delta_cor3);
        agg.min_fid = agg.min_fid.min(r.fid);
        if let Some(d) = r.delta_meas {
            agg.min_delta_meas = Some(agg.min_delta_meas.map_or(d, |m: f64| m.min(d)));
        }
        if certified.violates(r, tol) {
            agg.violations += 1;
        }
    }
    agg
}

pub(crate) fn aggregate_maps(
    samples: &[SampleReport],
    certified: &BTreeMap<&str, Certified>,
    tol: f64,
) -> BTreeMap<String, MapAggregate> {
    let mut names: Vec<&String> = samples.iter().flat_map(|s| s.reports.keys()).collect();
    names.sort();
    names.dedup();
    names
        .into_iter()
        .map(|name| {
            let cert = certified
                .get(name.as_str())
                .copied()
                .unwrap_or(Certified::NONE);
            let agg = aggregate(
                samples.iter().filter_map(|s| s.reports.get(name)),
                cert,
                tol,
            );
            (name.clone(), agg)
        })
        .collect()
}

pub(crate) fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

/// JSON text of a report without its `meta` section.
pub fn deterministic_json<T: Serialize>(value: &T) -> Result<String> {
    let mut v = serde_json::to_value(value)?;
    if let Some(obj) = v.as_object_mut() {
        obj.remove("meta");
    }
    Ok(serde_json::to_string(&v)?)
}
