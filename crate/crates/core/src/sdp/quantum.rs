//! Fidelity and fidelity of recovery as semidefinite programs.

use log::warn;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::complex::{ComplexSdp, LinearCoefficients};
use super::problem::{SolverOptions, Status};
use crate::error::{Error, Result};
use crate::linalg::{
    self, fidelity, herm_eig, identity, partial_trace, tensor, ComplexMatrix, DimVector, RANK_TOL,
};
use crate::recovery::{project_to_tpcp, recover, Channel};
use crate::states::{DensityMatrix, TripartiteLabels};

/// Largest `d_B² d_C` accepted by the recovery SDPs.
pub const MAX_CHOI_DIM: usize = 128;

/// Optimal recovery channel found by an SDP.
#[derive(Clone, Debug)]
pub struct RecoveryOptimum {
    /// `F(ρ_ABC, R(ρ_AB))` for the repaired witness, in closed form.
    pub value: f64,
    pub sdp_value: f64,
    pub dual_bound: f64,
    pub status: Status,
    pub witness: Channel,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecoverySummary {
    pub value: f64,
    pub sdp_value: f64,
    pub dual_bound: f64,
    pub status: Status,
}

impl RecoveryOptimum {
    pub fn summary(&self) -> RecoverySummary {
        RecoverySummary {
            value: self.value,
            sdp_value: self.sdp_value,
            dual_bound: self.dual_bound,
            status: self.status,
        }
    }
}

/// `(id_A ⊗ Φ)(ρ)` for the map `Φ` with Choi matrix `j` on `in ⊗ out`.
fn apply_choi_second(
    j: &ComplexMatrix,
    d_a: usize,
    d_in: usize,
    rho: &ComplexMatrix,
) -> ComplexMatrix {
    let d_out = j.nrows() / d_in;
    let n = d_a * d_out;
    let mut out = ComplexMatrix::zeros(n, n);
    for a in 0..d_a {
        for a2 in 0..d_a {
            for i in 0..d_in {
                for k in 0..d_in {
                    let r = rho[(a * d_in + i, a2 * d_in + k)];
                    if r == linalg::ZERO {
                        continue;
                    }
                    for x in 0..d_out {
                        for x2 in 0..d_out {
                            out[(a * d_out + x, a2 * d_out + x2)] +=
                                r * j[(i * d_out + x, k * d_out + x2)];
                        }
                    }
                }
            }
        }
    }
    out
}

/// Isometry onto the support and the compressed matrix `V†ρV`.
fn compress(m: &ComplexMatrix) -> Result<(ComplexMatrix, ComplexMatrix)> {
    let spec = herm_eig(m)?;
    let v = spec.support_basis(RANK_TOL);
    let compressed = linalg::hermitize(&(v.adjoint() * m * &v));
    Ok((v, compressed))
}

/// Coefficients of the sub-block `Z[off.., off..]` of an `n × n` variable.
fn sub_block(n: usize, off: usize, size: usize) -> LinearCoefficients {
    LinearCoefficients::of_map(n, |z| z.view((off, off), (size, size)).into_owned())
}

/// `Re tr(K X')` where `X'` is the top-right `r × s` block of an `(r+s)`-square variable.
fn off_diagonal_objective(r: usize, k: &ComplexMatrix) -> ComplexMatrix {
    let s = k.nrows();
    let mut f = ComplexMatrix::zeros(r + s, r + s);
    f.view_mut((r, 0), (s, r)).copy_from(k);
    f
}

fn require_solution(status: Status, what: &str) -> Result<()> {
    match status {
        Status::Optimal => Ok(()),
        Status::Inaccurate => {
            warn!("{what}: solver stopped at relaxed tolerance");
            Ok(())
        }
        other => Err(Error::Solver(format!("{what}: solver status {other:?}"))),
    }
}

/// `F(ρ, σ) = max Re tr X  s.t.  [[ρ, X], [X†, σ]] ⪰ 0`, with both states
/// compressed to their supports.
pub fn fidelity_sdp(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    fidelity_sdp_with(rho.matrix(), sigma.matrix(), &SolverOptions::default())
}

pub fn fidelity_sdp_with(
    rho: &ComplexMatrix,
    sigma: &ComplexMatrix,
    opts: &SolverOptions,
) -> Result<f64> {
    if rho.shape() != sigma.shape() {
        return Err(Error::DimensionMismatch(
            "fidelity needs operators of equal size".into(),
        ));
    }
    let (v_rho, rho_s) = compress(rho)?;
    let (v_sigma, sigma_s) = compress(sigma)?;
    let (r, s) = (rho_s.nrows(), sigma_s.nrows());
    let mut sdp = ComplexSdp::new();
    let z = sdp.add_block(r + s);
    sdp.add_objective(z, &off_diagonal_objective(r, &(v_sigma.adjoint() * &v_rho)));
    sdp.add_hermitian_equality(&[(z, &sub_block(r + s, 0, r), 1.0)], &rho_s)?;
    sdp.add_hermitian_equality(&[(z, &sub_block(r + s, r, s), 1.0)], &sigma_s)?;
    let sol = sdp.solve(opts)?;
    require_solution(sol.status, "fidelity SDP")?;
    Ok(sol.value)
}

struct RecoveryLayout {
    canon: DensityMatrix,
    d_a: usize,
    d_b: usize,
    d_c: usize,
    rho_ab: ComplexMatrix,
    v: ComplexMatrix,
    rho_s: ComplexMatrix,
}

impl RecoveryLayout {
    fn new(rho: &DensityMatrix, labels: &TripartiteLabels) -> Result<Self> {
        let canon = labels.canonicalize(rho)?;
        let dims = canon.dims().clone();
        let (d_a, d_b, d_c) = (dims.get(0), dims.get(1), dims.get(2));
        if d_b * d_b * d_c > MAX_CHOI_DIM {
            return Err(Error::InvalidArgument(format!(
                "d_B²·d_C = {} exceeds {MAX_CHOI_DIM}",
                d_b * d_b * d_c
            )));
        }
        let rho_ab = canon.marginal(&[0, 1])?.into_matrix();
        let (v, rho_s) = compress(canon.matrix())?;
        Ok(RecoveryLayout {
            canon,
            d_a,
            d_b,
            d_c,
            rho_ab,
            v,
            rho_s,
        })
    }

    fn n(&self) -> usize {
        self.d_a * self.d_b * self.d_c
    }

    /// Block `Z = [[ρ_s, X'], [X'†, σ]]` with `σ` left to the caller.
    fn fidelity_block(&self, sdp: &mut ComplexSdp) -> Result<(usize, LinearCoefficients)> {
        let (r, n) = (self.rho_s.nrows(), self.n());
        let z = sdp.add_block(r + n);
        sdp.add_objective(z, &off_diagonal_objective(r, &self.v));
        sdp.add_hermitian_equality(&[(z, &sub_block(r + n, 0, r), 1.0)], &self.rho_s)?;
        Ok((z, sub_block(r + n, r, n)))
    }

    fn finish(
        &self,
        witness: Channel,
        value: f64,
        bound: f64,
        status: Status,
    ) -> Result<RecoveryOptimum> {
        let witness = project_to_tpcp(&witness)?;
        let recovered = recover(&self.canon, &witness)?;
        let fid = fidelity(self.canon.matrix(), recovered.matrix())?.min(1.0);
        Ok(RecoveryOptimum {
            value: fid,
            sdp_value: value,
            dual_bound: bound,
            status,
            witness,
        })
    }

    fn out_dims(&self) -> DimVector {
        DimVector::new(vec![self.d_b, self.d_c]).expect("positive dims")
    }
}

/// `max_R F(ρ_ABC, R(ρ_AB))` over channels `R: B → BC`.
///
/// The returned witness is repaired to an exact channel and `value` is its
/// closed-form fidelity, so `value ≤ dual_bound` up to solver accuracy.
pub fn fidelity_of_recovery(
    rho: &DensityMatrix,
    labels: &TripartiteLabels,
) -> Result<RecoveryOptimum> {
    fidelity_of_recovery_with(rho, labels, &SolverOptions::default())
}

pub fn fidelity_of_recovery_with(
    rho: &DensityMatrix,
    labels: &TripartiteLabels,
    opts: &SolverOptions,
) -> Result<RecoveryOptimum> {
    let lay = RecoveryLayout::new(rho, labels)?;
    let (d_a, d_b, d_c) = (lay.d_a, lay.d_b, lay.d_c);
    let d_bc = d_b * d_c;
    let mut sdp = ComplexSdp::new();
    let (z, sigma_block) = lay.fidelity_block(&mut sdp)?;
    let j = sdp.add_block(d_b * d_bc);

    let recovered = LinearCoefficients::of_map(d_b * d_bc, |jm| {
        apply_choi_second(jm, d_a, d_b, &lay.rho_ab)
    });
    sdp.add_hermitian_equality(
        &[(z, &sigma_block, 1.0), (j, &recovered, -1.0)],
        &ComplexMatrix::zeros(lay.n(), lay.n()),
    )?;
    let choi_dims = DimVector::new(vec![d_b, d_bc])?;
    let tp = LinearCoefficients::of_map(d_b * d_bc, |jm| {
        partial_trace(jm, &choi_dims, &[0]).expect("consistent dims")
    });
    sdp.add_hermitian_equality(&[(j, &tp, 1.0)], &identity(d_b))?;

    let sol = sdp.solve(opts)?;
    require_solution(sol.status, "fidelity of recovery")?;
    let witness = Channel::from_choi(linalg::hermitize(&sol.blocks[j]), d_b, lay.out_dims())?;
    lay.finish(witness, sol.value, sol.bound, sol.status)
}

/// Operators defining the unital-form family
/// `R(X) = ρ_BC^{1/2} U(ρ_B^{−1/2} X ρ_B^{−1/2} ⊗ id_C) ρ_BC^{1/2} + tr((id − Π_B)X) ρ_BC`.
struct UnitalForm {
    d_b: usize,
    d_c: usize,
    rho_bc: ComplexMatrix,
    sqrt_bc: ComplexMatrix,
    inv_sqrt_b: ComplexMatrix,
    proj_b: ComplexMatrix,
}

impl UnitalForm {
    fn new(rho_bc: &DensityMatrix) -> Result<Self> {
        let d_b = rho_bc.dims().get(0);
        let d_c = rho_bc.dims().get(1);
        let rho_b = rho_bc.marginal(&[0])?;
        let spec_b = herm_eig(rho_b.matrix())?;
        let inv_sqrt_b = spec_b.reconstruct_with(|l| {
            if l > spec_b.support_threshold(RANK_TOL) {
                Complex64::new(1.0 / l.sqrt(), 0.0)
            } else {
                linalg::ZERO
            }
        });
        let proj_b = linalg::support_projector(rho_b.matrix())?;
        Ok(UnitalForm {
            d_b,
            d_c,
            rho_bc: rho_bc.matrix().clone(),
            sqrt_bc: linalg::psd_sqrt(rho_bc.matrix())?,
            inv_sqrt_b,
            proj_b,
        })
    }

    fn d_bc(&self) -> usize {
        self.d_b * self.d_c
    }

    /// Part of `R(X)` that depends on `U`, for the Choi matrix `ju` of `U`.
    fn inner_part(&self, ju: &ComplexMatrix, x: &ComplexMatrix) -> ComplexMatrix {
        let y = tensor(
            &(&self.inv_sqrt_b * x * &self.inv_sqrt_b),
            &identity(self.d_c),
        );
        let u_y = apply_choi_second(ju, 1, self.d_bc(), &y);
        &self.sqrt_bc * u_y * &self.sqrt_bc
    }

    /// `(id_A ⊗ R_U)(ρ_AB)` without the off-support term.
    fn inner_on_extension(
        &self,
        ju: &ComplexMatrix,
        rho_ab: &ComplexMatrix,
        d_a: usize,
    ) -> ComplexMatrix {
        let lift_a = |m: &ComplexMatrix| tensor(&identity(d_a), m);
        let w = lift_a(&self.inv_sqrt_b);
        let y = tensor(&(&w * rho_ab * &w), &identity(self.d_c));
        let u_y = apply_choi_second(ju, d_a, self.d_bc(), &y);
        let s = lift_a(&self.sqrt_bc);
        &s * u_y * &s
    }

    /// `(id_A ⊗ off-support term)(ρ_AB)`.
    fn off_support_on_extension(
        &self,
        rho_ab: &ComplexMatrix,
        d_a: usize,
    ) -> Result<ComplexMatrix> {
        let comp = tensor(&identity(d_a), &(identity(self.d_b) - &self.proj_b));
        let dims = DimVector::new(vec![d_a, self.d_b])?;
        let rho_a = partial_trace(&(comp * rho_ab), &dims, &[0])?;
        Ok(tensor(&rho_a, &self.rho_bc))
    }

    fn channel(&self, ju: &ComplexMatrix) -> Result<Channel> {
        let d_out = self.d_bc();
        let off = identity(self.d_b) - &self.proj_b;
        let mut choi = ComplexMatrix::zeros(self.d_b * d_out, self.d_b * d_out);
        for i in 0..self.d_b {
            for k in 0..self.d_b {
                let e = linalg::unit(self.d_b, i, k);
                let out = self.inner_part(ju, &e) + &self.rho_bc * off[(k, i)];
                choi.view_mut((i * d_out, k * d_out), (d_out, d_out))
                    .copy_from(&out);
            }
        }
        Channel::from_choi(
            linalg::hermitize(&choi),
            self.d_b,
            DimVector::new(vec![self.d_b, self.d_c])?,
        )
    }
}

/// `max F(ρ_ABC, R(ρ_AB))` over `R` of the form
/// `X ↦ ρ_BC^{1/2} U(ρ_B^{−1/2} X ρ_B^{−1/2} ⊗ id_C) ρ_BC^{1/2}` with `U` unital
/// and trace preserving on `BC`, and `R` trace preserving on `supp ρ_B`.
pub fn fidelity_of_recovery_unital_form(
    rho: &DensityMatrix,
    labels: &TripartiteLabels,
) -> Result<RecoveryOptimum> {
    fidelity_of_recovery_unital_form_with(rho, labels, &SolverOptions::default())
}

pub fn fidelity_of_recovery_unital_form_with(
    rho: &DensityMatrix,
    labels: &TripartiteLabels,
    opts: &SolverOptions,
) -> Result<RecoveryOptimum> {
    let lay = RecoveryLayout::new(rho, labels)?;
    let rho_bc = lay.canon.marginal(&[1, 2])?;
    let form = UnitalForm::new(&rho_bc)?;
    let d_bc = form.d_bc();
    let mut sdp = ComplexSdp::new();
    let (z, sigma_block) = lay.fidelity_block(&mut sdp)?;
    let ju = sdp.add_block(d_bc * d_bc);

    let recovered = LinearCoefficients::of_map(d_bc * d_bc, |m| {
        form.inner_on_extension(m, &lay.rho_ab, lay.d_a)
    });
    let constant = form.off_support_on_extension(&lay.rho_ab, lay.d_a)?;
    sdp.add_hermitian_equality(&[(z, &sigma_block, 1.0), (ju, &recovered, -1.0)], &constant)?;

    let dims = DimVector::new(vec![d_bc, d_bc])?;
    let tp = LinearCoefficients::of_map(d_bc * d_bc, |m| {
        partial_trace(m, &dims, &[0]).expect("dims")
    });
    sdp.add_hermitian_equality(&[(ju, &tp, 1.0)], &identity(d_bc))?;
    let unital = LinearCoefficients::of_map(d_bc * d_bc, |m| {
        partial_trace(m, &dims, &[1]).expect("dims")
    });
    sdp.add_hermitian_equality(&[(ju, &unital, 1.0)], &identity(d_bc))?;

    // tr R(X) = tr X on supp ρ_B: tr(ρ_BC U(Y ⊗ id)) = tr(ρ_B Y) for Y = v_p v_q†.
    let support = herm_eig(&form.proj_b)?.support_basis(0.5);
    let rho_b = rho_bc.marginal(&[0])?.into_matrix();
    let r_b = support.ncols();
    let trace_map = LinearCoefficients::of_map(d_bc * d_bc, |m| {
        ComplexMatrix::from_fn(r_b, r_b, |q, p| {
            let y = support.column(p) * support.column(q).adjoint();
            let u_y = apply_choi_second(m, 1, d_bc, &tensor(&y, &identity(form.d_c)));
            (&form.rho_bc * u_y).trace()
        })
    });
    let target = support.adjoint() * &rho_b * &support;
    sdp.add_hermitian_equality(&[(ju, &trace_map, 1.0)], &target)?;

    let sol = sdp.solve(opts)?;
    require_solution(sol.status, "unital-form fidelity of recovery")?;
    let spec = herm_eig(&linalg::hermitize(&sol.blocks[ju]))?;
    let ju_psd = spec.reconstruct_with(|l| Complex64::new(l.max(0.0), 0.0));
    let witness = form.channel(&ju_psd)?;
    lay.finish(witness, sol.value, sol.bound, sol.status)
}
