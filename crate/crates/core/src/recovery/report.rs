use serde::{Deserialize, Serialize};

use super::channel::{apply, Channel};
use crate::entropy::{cmi, measured_relative_entropy};
use crate::error::{Error, Result};
use crate::linalg::fidelity;
use crate::states::{DensityMatrix, TripartiteLabels};

/// Quantities of one recovery-bound check; information in bits.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecoveryReport {
    pub i_bits: f64,
    pub fid: f64,
    /// `−2 log₂ fid`; `+∞` when `fid = 0`.
    #[serde(with = "extended_float")]
    pub neg2logf: f64,
    #[serde(with = "extended_float_opt", default)]
    pub dm_bits: Option<f64>,
    /// `I − (−2 log₂ F)`.
    #[serde(with = "extended_float")]
    pub delta_thm1: f64,
    /// `I − D_M`.
    #[serde(with = "extended_float_opt", default)]
    pub delta_meas: Option<f64>,
    /// `F − 1 + (ln 2 / 2)·I`.
    pub delta_cor3: f64,
}

impl RecoveryReport {
    /// Smallest of the computed deltas.
    pub fn min_delta(&self) -> f64 {
        let mut m = self.delta_thm1.min(self.delta_cor3);
        if let Some(d) = self.delta_meas {
            m = m.min(d);
        }
        m
    }

    pub fn from_parts(i_bits: f64, fid: f64, dm_bits: Option<f64>) -> Self {
        let neg2logf = if fid > 0.0 {
            -2.0 * fid.log2()
        } else {
            f64::INFINITY
        };
        RecoveryReport {
            i_bits,
            fid,
            neg2logf,
            dm_bits,
            delta_thm1: i_bits - neg2logf,
            delta_meas: dm_bits.map(|d| i_bits - d),
            delta_cor3: fid - 1.0 + std::f64::consts::LN_2 / 2.0 * i_bits,
        }
    }
}

/// `(id_A ⊗ R)(ρ_AB)` for a state already in canonical `A ⊗ B ⊗ C` form.
pub fn recover(rho_abc: &DensityMatrix, chan: &Channel) -> Result<DensityMatrix> {
    let dims = rho_abc.dims();
    if dims.len() != 3 {
        return Err(Error::InvalidArgument(
            "recover expects a state on A ⊗ B ⊗ C".into(),
        ));
    }
    let (d_b, d_c) = (dims.get(1), dims.get(2));
    if chan.dim_in() != d_b || chan.dim_out() != d_b * d_c {
        return Err(Error::DimensionMismatch(format!(
            "channel maps {} -> {}, state needs {d_b} -> {}",
            chan.dim_in(),
            chan.dim_out(),
            d_b * d_c
        )));
    }
    let rho_ab = rho_abc.marginal(&[0, 1])?;
    let out = apply(chan, &rho_ab, 1)?;
    out.regroup(dims.clone())
}

/// Evaluates the recovery bounds of `chan` on `rho_abc`.
///
/// `D_M` is only computed when `with_dm` is set; it dominates the cost.
pub fn recovery_report(
    rho_abc: &DensityMatrix,
    labels: &TripartiteLabels,
    chan: &Channel,
    with_dm: bool,
) -> Result<RecoveryReport> {
    let canon = labels.canonicalize(rho_abc)?;
    let i_bits = cmi(&canon, &TripartiteLabels::standard())?.i_ac_given_b;
    let recovered = recover(&canon, chan)?;
    let fid = fidelity(canon.matrix(), recovered.matrix())?.min(1.0);
    let dm = if with_dm {
        Some(measured_relative_entropy(&canon, &recovered)?)
    } else {
        None
    };
    Ok(RecoveryReport::from_parts(i_bits, fid, dm))
}

/// Serialises non-finite floats as the strings `"inf"`, `"-inf"`, `"nan"`.
pub mod extended_float {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else if v.is_nan() {
            s.serialize_str("nan")
        } else if *v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Str(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Str(s) => match s.as_str() {
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                "nan" => Ok(f64::NAN),
                other => Err(serde::de::Error::custom(format!("bad float {other:?}"))),
            },
        }
    }
}

pub mod extended_float_opt {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
        match v {
            Some(x) => super::extended_float::serialize(x, s),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<f64>, D::Error> {
        #[derive(Deserialize)]
        struct Wrap(#[serde(with = "super::extended_float")] f64);
        Ok(Option::<Wrap>::deserialize(d)?.map(|w| w.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::recovery::{counterexample_map, petz_transpose};
    use crate::states::counterexample_state;

    #[test]
    fn infinite_fields_roundtrip() {
        let r = RecoveryReport::from_parts(0.5, 0.0, None);
        assert_eq!(r.neg2logf, f64::INFINITY);
        let text = serde_json::to_string(&r).unwrap();
        assert!(text.contains("\"inf\""));
        let back: RecoveryReport = serde_json::from_str(&text).unwrap();
        assert_eq!(back.neg2logf, f64::INFINITY);
        assert_eq!(back.delta_thm1, f64::NEG_INFINITY);
        assert_eq!(back.dm_bits, None);
    }

    #[test]
    fn counterexample_values() {
        let rho = counterexample_state();
        let labels = TripartiteLabels::standard();
        let given = recovery_report(&rho, &labels, &counterexample_map(), false).unwrap();
        // ½ + √(1/32) + 3·√(1/96)
        let expected = 0.5 + (1.0f64 / 32.0).sqrt() + 3.0 * (1.0f64 / 96.0).sqrt();
        assert!((given.fid - expected).abs() < 1e-12);
        assert!(given.fid > 0.9829);
        let t = petz_transpose(&rho.marginal(&[1, 2]).unwrap()).unwrap();
        let petz = recovery_report(&rho, &labels, &t, false).unwrap();
        // √(5/24) + √(5/192) + √(1/192) + 2·√(1/64)
        let expected = (5.0f64 / 24.0).sqrt()
            + (5.0f64 / 192.0).sqrt()
            + (1.0f64 / 192.0).sqrt()
            + 2.0 * (1.0f64 / 64.0).sqrt();
        assert!((petz.fid - expected).abs() < 1e-12);
        assert!(petz.fid.sqrt() < 0.9696);
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let rho = counterexample_state();
        let wrong = crate::recovery::Channel::identity(2);
        assert!(recovery_report(&rho, &TripartiteLabels::standard(), &wrong, false).is_err());
    }
}
