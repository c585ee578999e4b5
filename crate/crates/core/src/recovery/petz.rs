//! Petz transpose map, its rotated versions and their averages.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::channel::{choi_of_kraus, Channel};
use crate::error::{Error, Result};
use crate::linalg::{
    self, herm_eig, identity, spectral::func_on_support, tensor, ComplexMatrix, DimVector, RANK_TOL,
};
use crate::states::DensityMatrix;

/// Discrete probability measure over rotation parameters `t`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AveragingScheme {
    nodes: Vec<Node>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub t: f64,
    pub weight: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WeightLaw {
    /// Density `(π/2)·(cosh(πt) + 1)⁻¹`.
    Cosh,
    Uniform,
}

impl std::str::FromStr for WeightLaw {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cosh" => Ok(WeightLaw::Cosh),
            "uniform" => Ok(WeightLaw::Uniform),
            other => Err(Error::InvalidArgument(format!(
                "unknown weight law {other:?} (expected cosh or uniform)"
            ))),
        }
    }
}

pub const DEFAULT_NODES: usize = 41;
pub const DEFAULT_HALFWIDTH: f64 = 8.0;

/// Density of the default averaging measure.
pub fn cosh_density(t: f64) -> f64 {
    std::f64::consts::FRAC_PI_2 / ((std::f64::consts::PI * t).cosh() + 1.0)
}

impl AveragingScheme {
    /// Normalises the weights; rejects negative or all-zero weights.
    pub fn new(nodes: Vec<Node>) -> Result<Self> {
        if nodes.is_empty() {
            return Err(Error::InvalidArgument(
                "averaging scheme has no nodes".into(),
            ));
        }
        if nodes
            .iter()
            .any(|n| !n.t.is_finite() || !n.weight.is_finite() || n.weight < 0.0)
        {
            return Err(Error::InvalidArgument(
                "averaging nodes need finite t and non-negative weights".into(),
            ));
        }
        let total: f64 = nodes.iter().map(|n| n.weight).sum();
        if total <= 0.0 {
            return Err(Error::InvalidArgument(
                "averaging weights sum to zero".into(),
            ));
        }
        Ok(AveragingScheme {
            nodes: nodes
                .into_iter()
                .map(|n| Node {
                    t: n.t,
                    weight: n.weight / total,
                })
                .collect(),
        })
    }

    /// Uniform grid on `[−halfwidth, halfwidth]` with weights from `law`.
    pub fn grid(n_nodes: usize, halfwidth: f64, law: WeightLaw) -> Result<Self> {
        if n_nodes == 0 || !(halfwidth >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "grid needs at least one node and halfwidth >= 0 (got {n_nodes}, {halfwidth})"
            )));
        }
        let nodes = (0..n_nodes)
            .map(|k| {
                let t = if n_nodes == 1 {
                    0.0
                } else {
                    -halfwidth + 2.0 * halfwidth * k as f64 / (n_nodes - 1) as f64
                };
                let weight = match law {
                    WeightLaw::Cosh => cosh_density(t),
                    WeightLaw::Uniform => 1.0,
                };
                Node { t, weight }
            })
            .collect();
        AveragingScheme::new(nodes)
    }

    pub fn single(t: f64) -> Self {
        AveragingScheme {
            nodes: vec![Node { t, weight: 1.0 }],
        }
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }
}

impl Default for AveragingScheme {
    fn default() -> Self {
        AveragingScheme::grid(DEFAULT_NODES, DEFAULT_HALFWIDTH, WeightLaw::Cosh)
            .expect("default grid is valid")
    }
}

/// Operators shared by every member of the Petz family for a given `ρ_BC`.
struct PetzData {
    d_b: usize,
    d_c: usize,
    rho_bc: ComplexMatrix,
    bc: linalg::Spectrum,
    b: linalg::Spectrum,
    /// `id − Π_B`, the complement of `supp ρ_B`.
    off_support_b: ComplexMatrix,
}

impl PetzData {
    fn new(rho_bc: &DensityMatrix) -> Result<Self> {
        if rho_bc.dims().len() != 2 {
            return Err(Error::InvalidArgument(format!(
                "ρ_BC must be bipartite, got dims {:?}",
                rho_bc.dims().as_slice()
            )));
        }
        let d_b = rho_bc.dims().get(0);
        let d_c = rho_bc.dims().get(1);
        let rho_b = rho_bc.marginal(&[0])?;
        let b = herm_eig(rho_b.matrix())?;
        let proj_b = func_on_support(&b, |_| linalg::ONE, RANK_TOL)?;
        Ok(PetzData {
            d_b,
            d_c,
            rho_bc: rho_bc.matrix().clone(),
            bc: herm_eig(rho_bc.matrix())?,
            b,
            off_support_b: identity(d_b) - proj_b,
        })
    }

    fn out_dims(&self) -> DimVector {
        DimVector::new(vec![self.d_b, self.d_c]).expect("positive dims")
    }

    /// `ρ_BC^{1/2+it} (ρ_B^{−1/2−it} ⊗ id_C)`.
    fn kraus_core(&self, t: f64) -> Result<ComplexMatrix> {
        let left = func_on_support(&self.bc, |l| rotated_power(l, 0.5, t), RANK_TOL)?;
        let right = func_on_support(&self.b, |l| rotated_power(l, -0.5, -t), RANK_TOL)?;
        Ok(left * tensor(&right, &identity(self.d_c)))
    }

    /// Choi matrix of `X ↦ K(ΠXΠ ⊗ id)K† + tr((id−Π)X) ρ_BC`.
    fn choi(&self, t: f64) -> Result<ComplexMatrix> {
        let core = self.kraus_core(t)?;
        let d_bc = self.d_b * self.d_c;
        let kraus: Vec<ComplexMatrix> = (0..self.d_c)
            .map(|c| ComplexMatrix::from_fn(d_bc, self.d_b, |row, b| core[(row, b * self.d_c + c)]))
            .collect();
        let mut choi = choi_of_kraus(&kraus);
        if self.off_support_b.norm() > 0.0 {
            choi += tensor(&self.off_support_b.transpose(), &self.rho_bc);
        }
        Ok(linalg::hermitize(&choi))
    }
}

/// `λ^a · λ^{it}` computed as `λ^a · e^{i t ln λ}`.
fn rotated_power(lambda: f64, a: f64, t: f64) -> Complex64 {
    let modulus = if a == 0.5 {
        lambda.sqrt()
    } else if a == -0.5 {
        1.0 / lambda.sqrt()
    } else {
        lambda.powf(a)
    };
    Complex64::cis(t * lambda.ln()) * modulus
}

/// The transpose (Petz) map `X ↦ ρ_BC^{1/2}(ρ_B^{−1/2} X ρ_B^{−1/2} ⊗ id_C)ρ_BC^{1/2}`.
///
/// On the complement of `supp ρ_B` the input's weight is sent to `ρ_BC`,
/// which makes the map trace preserving everywhere.
pub fn petz_transpose(rho_bc: &DensityMatrix) -> Result<Channel> {
    rotated_petz(rho_bc, 0.0)
}

/// `X ↦ ρ_BC^{1/2+it}(ρ_B^{−1/2−it} X ρ_B^{−1/2+it} ⊗ id_C)ρ_BC^{1/2−it}`.
pub fn rotated_petz(rho_bc: &DensityMatrix, t: f64) -> Result<Channel> {
    let data = PetzData::new(rho_bc)?;
    Channel::from_choi(data.choi(t)?, data.d_b, data.out_dims())
}

/// Convex mixture `Σ_k w_k R_{t_k}` of rotated Petz maps.
pub fn averaged_rotated_petz(rho_bc: &DensityMatrix, scheme: &AveragingScheme) -> Result<Channel> {
    let data = PetzData::new(rho_bc)?;
    let mut choi = ComplexMatrix::zeros(
        data.d_b * data.d_b * data.d_c,
        data.d_b * data.d_b * data.d_c,
    );
    for node in scheme.nodes() {
        if node.weight == 0.0 {
            continue;
        }
        choi += data.choi(node.t)? * Complex64::new(node.weight, 0.0);
    }
    Channel::from_choi(linalg::hermitize(&choi), data.d_b, data.out_dims())
}

/// Deviations of the inner map `U(Y ⊗ id_C) = ρ_BC^{−1/2} R(ρ_B^{1/2} Y ρ_B^{1/2}) ρ_BC^{−1/2}`
/// from being trace preserving and unital, on operators `Y` supported on
/// `supp ρ_B`. Meaningful for full-rank `ρ_BC`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UnitalFormCheck {
    pub trace_deviation: f64,
    pub unital_deviation: f64,
}

pub fn unital_form_check(chan: &Channel, rho_bc: &DensityMatrix) -> Result<UnitalFormCheck> {
    let data = PetzData::new(rho_bc)?;
    if chan.dim_in() != data.d_b || chan.dim_out() != data.d_b * data.d_c {
        return Err(Error::DimensionMismatch(
            "channel does not map B to B ⊗ C".into(),
        ));
    }
    let sqrt_b = func_on_support(&data.b, |l| Complex64::new(l.sqrt(), 0.0), RANK_TOL)?;
    let inv_sqrt_bc = func_on_support(&data.bc, |l| Complex64::new(1.0 / l.sqrt(), 0.0), RANK_TOL)?;
    let proj_bc = func_on_support(&data.bc, |_| linalg::ONE, RANK_TOL)?;
    let support = data.b.support_basis(RANK_TOL);
    let inner = |y: &ComplexMatrix| -> Result<ComplexMatrix> {
        let x = &sqrt_b * y * &sqrt_b;
        Ok(&inv_sqrt_bc * chan.apply_matrix(&x)? * &inv_sqrt_bc)
    };

    let r = support.ncols();
    let mut trace_deviation = 0.0f64;
    for p in 0..r {
        for q in 0..r {
            let y = support.column(p) * support.column(q).adjoint();
            let expected = linalg::trace(&(&proj_bc * tensor(&y, &identity(data.d_c))));
            let got = linalg::trace(&inner(&y)?);
            trace_deviation = trace_deviation.max((got - expected).norm());
        }
    }
    let proj_b = &support * support.adjoint();
    let unital_deviation = (inner(&proj_b)? - &proj_bc).norm();
    Ok(UnitalFormCheck {
        trace_deviation,
        unital_deviation,
    })
}
