use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, herm_eig, partial_trace, ComplexMatrix, DimVector, ZERO};
use crate::states::DensityMatrix;

/// Pass threshold of [`validate_tpcp`].
pub const TPCP_TOL: f64 = 1e-8;

/// A linear map stored as its Choi matrix `J = Σ_ij |i⟩⟨j| ⊗ Φ(|i⟩⟨j|)`
/// on `in ⊗ out`.
#[derive(Clone, Debug, PartialEq)]
pub struct Channel {
    choi: ComplexMatrix,
    dim_in: usize,
    out_dims: DimVector,
}

impl Channel {
    /// Wraps a Choi matrix. `out_dims` factorises the output space, which
    /// lets [`apply`] expand one subsystem into several.
    pub fn from_choi(choi: ComplexMatrix, dim_in: usize, out_dims: DimVector) -> Result<Self> {
        let side = dim_in * out_dims.total();
        if choi.nrows() != side || choi.ncols() != side {
            return Err(Error::DimensionMismatch(format!(
                "Choi matrix is {}x{}, expected {side}x{side}",
                choi.nrows(),
                choi.ncols()
            )));
        }
        if !linalg::is_finite(&choi) {
            return Err(Error::NonFinite);
        }
        Ok(Channel {
            choi,
            dim_in,
            out_dims,
        })
    }

    pub fn identity(dim: usize) -> Self {
        channel_from_kraus(&[linalg::identity(dim)], DimVector::new(vec![dim]).unwrap())
            .expect("identity is complete")
    }

    /// `X ↦ Σ_b ⟨b|X|b⟩ σ_b`.
    pub fn measure_and_prepare(outputs: &[ComplexMatrix], out_dims: DimVector) -> Result<Self> {
        let d_in = outputs.len();
        let d_out = out_dims.total();
        let mut choi = ComplexMatrix::zeros(d_in * d_out, d_in * d_out);
        for (b, sigma) in outputs.iter().enumerate() {
            if sigma.nrows() != d_out || sigma.ncols() != d_out {
                return Err(Error::DimensionMismatch(format!(
                    "prepared state {b} has side {}, expected {d_out}",
                    sigma.nrows()
                )));
            }
            choi.view_mut((b * d_out, b * d_out), (d_out, d_out))
                .copy_from(sigma);
        }
        Channel::from_choi(choi, d_in, out_dims)
    }

    pub fn choi(&self) -> &ComplexMatrix {
        &self.choi
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.out_dims.total()
    }

    pub fn out_dims(&self) -> &DimVector {
        &self.out_dims
    }

    /// `Φ(|i⟩⟨j|)`.
    pub fn block(&self, i: usize, j: usize) -> ComplexMatrix {
        let d = self.dim_out();
        self.choi.view((i * d, j * d), (d, d)).into_owned()
    }

    /// `Φ(X)` for an operator on the input space.
    pub fn apply_matrix(&self, x: &ComplexMatrix) -> Result<ComplexMatrix> {
        if x.nrows() != self.dim_in || x.ncols() != self.dim_in {
            return Err(Error::DimensionMismatch(format!(
                "channel input is {}-dimensional, operator is {}x{}",
                self.dim_in,
                x.nrows(),
                x.ncols()
            )));
        }
        let d = self.dim_out();
        let mut out = ComplexMatrix::zeros(d, d);
        for i in 0..self.dim_in {
            for j in 0..self.dim_in {
                let xij = x[(i, j)];
                if xij != ZERO {
                    out += self.choi.view((i * d, j * d), (d, d)) * xij;
                }
            }
        }
        Ok(out)
    }

    /// Convex combination of channels with identical shapes.
    pub fn mixture(parts: &[(f64, &Channel)]) -> Result<Self> {
        let (_, first) = parts
            .first()
            .ok_or_else(|| Error::InvalidArgument("empty channel mixture".into()))?;
        let mut choi = ComplexMatrix::zeros(first.choi.nrows(), first.choi.ncols());
        for (w, ch) in parts {
            if ch.dim_in != first.dim_in || ch.out_dims != first.out_dims {
                return Err(Error::DimensionMismatch(
                    "mixing channels of different shapes".into(),
                ));
            }
            choi += &ch.choi * Complex64::new(*w, 0.0);
        }
        Channel::from_choi(choi, first.dim_in, first.out_dims.clone())
    }

    pub fn to_file(&self) -> ChannelFile {
        ChannelFile {
            dim_in: self.dim_in,
            dim_out: self.dim_out(),
            out_dims: Some(self.out_dims.as_slice().to_vec()),
            choi: self.choi.transpose().iter().map(|z| [z.re, z.im]).collect(),
        }
    }

    pub fn save_json(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(&self.to_file())?)?;
        Ok(())
    }

    pub fn load_json(path: &Path) -> Result<Self> {
        let file: ChannelFile = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        file.into_channel()
    }
}

/// On-disk channel: `{"dim_in", "dim_out", "choi": [[re, im], ...]}` with the
/// Choi matrix row-major. `out_dims` is optional.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelFile {
    pub dim_in: usize,
    pub dim_out: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out_dims: Option<Vec<usize>>,
    pub choi: Vec<[f64; 2]>,
}

impl ChannelFile {
    pub fn into_channel(self) -> Result<Channel> {
        let out_dims = DimVector::new(self.out_dims.unwrap_or_else(|| vec![self.dim_out]))?;
        if out_dims.total() != self.dim_out {
            return Err(Error::DimensionMismatch(format!(
                "out_dims {:?} do not multiply to dim_out {}",
                out_dims.as_slice(),
                self.dim_out
            )));
        }
        let side = self.dim_in * self.dim_out;
        if self.choi.len() != side * side {
            return Err(Error::DimensionMismatch(format!(
                "channel file has {} Choi entries, expected {}",
                self.choi.len(),
                side * side
            )));
        }
        let choi = ComplexMatrix::from_row_iterator(
            side,
            side,
            self.choi.iter().map(|&[re, im]| Complex64::new(re, im)),
        );
        Channel::from_choi(choi, self.dim_in, out_dims)
    }
}

/// Builds `Φ(X) = Σ_k K_k X K_k†` after checking `Σ K_k† K_k = id`.
pub fn channel_from_kraus(kraus: &[ComplexMatrix], out_dims: DimVector) -> Result<Channel> {
    let first = kraus
        .first()
        .ok_or_else(|| Error::InvalidArgument("empty Kraus list".into()))?;
    let (d_out, d_in) = first.shape();
    if d_out != out_dims.total() || kraus.iter().any(|k| k.shape() != (d_out, d_in)) {
        return Err(Error::DimensionMismatch(format!(
            "Kraus operators must all be {}x{d_in}",
            out_dims.total()
        )));
    }
    let completeness: ComplexMatrix = kraus.iter().map(|k| k.adjoint() * k).sum();
    let deviation = (completeness - linalg::identity(d_in)).norm();
    if deviation > 1e-8 {
        return Err(Error::KrausIncomplete { deviation });
    }
    Channel::from_choi(choi_of_kraus(kraus), d_in, out_dims)
}

/// Choi matrix of `X ↦ Σ_k K_k X K_k†` with no completeness check.
pub(crate) fn choi_of_kraus(kraus: &[ComplexMatrix]) -> ComplexMatrix {
    let (d_out, d_in) = kraus[0].shape();
    let mut choi = ComplexMatrix::zeros(d_in * d_out, d_in * d_out);
    for k in kraus {
        // Column (i, o) of the vectorised operator is K[o, i].
        let v = nalgebra::DVector::from_fn(d_in * d_out, |n, _| k[(n % d_out, n / d_out)]);
        choi += &v * v.adjoint();
    }
    choi
}

/// Applies `chan` to subsystem `target` of `rho`; the output factor replaces
/// `target` with the channel's output factors.
pub fn apply(chan: &Channel, rho: &DensityMatrix, target: usize) -> Result<DensityMatrix> {
    let (m, dims) = apply_to_matrix(chan, rho.matrix(), rho.dims(), target)?;
    Ok(DensityMatrix::from_parts_unchecked(m, dims))
}

/// As [`apply`] but on an arbitrary operator.
pub fn apply_to_matrix(
    chan: &Channel,
    m: &ComplexMatrix,
    dims: &DimVector,
    target: usize,
) -> Result<(ComplexMatrix, DimVector)> {
    dims.check_matrix(m)?;
    if target >= dims.len() {
        return Err(Error::SubsystemOutOfRange {
            index: target,
            count: dims.len(),
        });
    }
    let d_in = dims.get(target);
    if d_in != chan.dim_in {
        return Err(Error::DimensionMismatch(format!(
            "subsystem {target} has dimension {d_in}, channel expects {}",
            chan.dim_in
        )));
    }
    let pre: usize = dims.as_slice()[..target].iter().product();
    let post: usize = dims.as_slice()[target + 1..].iter().product();
    let d_out = chan.dim_out();
    let n_out = pre * d_out * post;
    let in_index = |p: usize, i: usize, q: usize| (p * d_in + i) * post + q;
    let out_index = |p: usize, o: usize, q: usize| (p * d_out + o) * post + q;

    let mut out = ComplexMatrix::zeros(n_out, n_out);
    for i in 0..d_in {
        for j in 0..d_in {
            let block = chan.choi.view((i * d_out, j * d_out), (d_out, d_out));
            for p in 0..pre {
                for q in 0..post {
                    for p2 in 0..pre {
                        for q2 in 0..post {
                            let coeff = m[(in_index(p, i, q), in_index(p2, j, q2))];
                            if coeff == ZERO {
                                continue;
                            }
                            for o in 0..d_out {
                                let row = out_index(p, o, q);
                                for o2 in 0..d_out {
                                    out[(row, out_index(p2, o2, q2))] += coeff * block[(o, o2)];
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    let mut new_dims = dims.as_slice()[..target].to_vec();
    new_dims.extend_from_slice(chan.out_dims.as_slice());
    new_dims.extend_from_slice(&dims.as_slice()[target + 1..]);
    Ok((out, DimVector::new(new_dims)?))
}

/// Complete positivity and trace preservation of a channel.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TpcpReport {
    pub choi_min_eigenvalue: f64,
    /// `‖tr_out J − id‖` (Frobenius).
    pub tp_deviation: f64,
    pub completely_positive: bool,
    pub trace_preserving: bool,
}

impl TpcpReport {
    pub fn passed(&self) -> bool {
        self.completely_positive && self.trace_preserving
    }
}

pub fn validate_tpcp(chan: &Channel) -> TpcpReport {
    let min_eig = herm_eig(&linalg::hermitize(&chan.choi))
        .map(|s| s.min())
        .unwrap_or(f64::NEG_INFINITY);
    let dims = DimVector::new(vec![chan.dim_in, chan.dim_out()]).expect("positive dims");
    let tp_deviation = partial_trace(&chan.choi, &dims, &[0])
        .map(|t| (t - linalg::identity(chan.dim_in)).norm())
        .unwrap_or(f64::INFINITY);
    TpcpReport {
        choi_min_eigenvalue: min_eig,
        tp_deviation,
        completely_positive: min_eig >= -TPCP_TOL,
        trace_preserving: tp_deviation <= TPCP_TOL,
    }
}

/// Nearest-TPCP repair used on numerically produced Choi matrices:
/// Hermitise, clamp negative eigenvalues, then rescale the input so that
/// `tr_out J = id`.
pub fn project_to_tpcp(chan: &Channel) -> Result<Channel> {
    let spec = herm_eig(&chan.choi)?;
    let clamped = spec.reconstruct_with(|l| Complex64::new(l.max(0.0), 0.0));
    let d_in = chan.dim_in;
    let dims = DimVector::new(vec![d_in, chan.dim_out()])?;
    let t = partial_trace(&clamped, &dims, &[0])?;
    let t_spec = herm_eig(&t)?;
    if t_spec.min() <= 1e-14 {
        return Err(Error::Solver(
            "Choi matrix has a degenerate input marginal".into(),
        ));
    }
    let t_inv_sqrt = t_spec.reconstruct_with(|l| Complex64::new(l.powf(-0.5), 0.0));
    let scale = linalg::tensor(&t_inv_sqrt, &linalg::identity(chan.dim_out()));
    let choi = linalg::hermitize(&(&scale * clamped * scale.adjoint()));
    Channel::from_choi(choi, d_in, chan.out_dims.clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{diag_real, max_abs_diff, unit};
    use crate::states::{random_density, random_unitary, rng_from_seed};

    fn dims(d: &[usize]) -> DimVector {
        DimVector::new(d.to_vec()).unwrap()
    }

    #[test]
    fn unitary_channel_conjugates() {
        let u = random_unitary(3, &mut rng_from_seed(5));
        let chan = channel_from_kraus(std::slice::from_ref(&u), dims(&[3])).unwrap();
        assert!(validate_tpcp(&chan).passed());
        let rho = random_density(&dims(&[3]), 3, 1).unwrap();
        let out = apply(&chan, &rho, 0).unwrap();
        assert!(max_abs_diff(out.matrix(), &(&u * rho.matrix() * u.adjoint())) < 1e-13);
    }

    #[test]
    fn dephasing_choi_is_diagonal_rank_two() {
        let chan = channel_from_kraus(&[unit(2, 0, 0), unit(2, 1, 1)], dims(&[2])).unwrap();
        let expected = diag_real(&[1.0, 0.0, 0.0, 1.0]);
        assert!(max_abs_diff(chan.choi(), &expected) < 1e-15);
        assert!(validate_tpcp(&chan).passed());
    }

    #[test]
    fn kraus_errors() {
        assert!(channel_from_kraus(&[], dims(&[2])).is_err());
        let half = linalg::identity(2) * Complex64::new(0.5, 0.0);
        assert!(matches!(
            channel_from_kraus(&[half], dims(&[2])),
            Err(Error::KrausIncomplete { .. })
        ));
    }

    #[test]
    fn identity_channel_leaves_state_unchanged() {
        let rho = random_density(&dims(&[2, 3]), 6, 3).unwrap();
        let out = apply(&Channel::identity(3), &rho, 1).unwrap();
        assert!(max_abs_diff(out.matrix(), rho.matrix()) < 1e-15);
        assert!(validate_tpcp(&Channel::identity(3)).passed());
    }

    #[test]
    fn apply_checks_dimensions() {
        let rho = random_density(&dims(&[2, 3]), 6, 3).unwrap();
        assert!(apply(&Channel::identity(2), &rho, 1).is_err());
        assert!(apply(&Channel::identity(2), &rho, 2).is_err());
    }

    #[test]
    fn scaled_choi_fails_trace_preservation() {
        let id = Channel::identity(2);
        let scaled =
            Channel::from_choi(id.choi() * Complex64::new(0.9, 0.0), 2, dims(&[2])).unwrap();
        let report = validate_tpcp(&scaled);
        assert!(report.completely_positive);
        assert!(!report.trace_preserving);
    }

    #[test]
    fn apply_on_middle_factor_expands_dims() {
        // Appending a fixed state is X ↦ X ⊗ τ.
        let tau = random_density(&dims(&[2]), 2, 8).unwrap();
        let outputs: Vec<ComplexMatrix> = (0..2).map(|_| tau.matrix().clone()).collect();
        let kraus: Vec<ComplexMatrix> = {
            let spec = herm_eig(tau.matrix()).unwrap();
            (0..2)
                .map(|k| {
                    let v = spec.vectors.column(k) * Complex64::new(spec.values[k].sqrt(), 0.0);
                    let v = ComplexMatrix::from_column_slice(2, 1, v.as_slice());
                    linalg::tensor(&linalg::identity(2), &v)
                })
                .collect()
        };
        let chan = channel_from_kraus(&kraus, dims(&[2, 2])).unwrap();
        let rho = random_density(&dims(&[3, 2]), 6, 2).unwrap();
        let out = apply(&chan, &rho, 1).unwrap();
        assert_eq!(out.dims().as_slice(), &[3, 2, 2]);
        assert!(max_abs_diff(out.matrix(), &linalg::tensor(rho.matrix(), tau.matrix())) < 1e-13);
        // measure-and-prepare with a constant output agrees on diagonal inputs
        let mp = Channel::measure_and_prepare(&outputs, dims(&[2])).unwrap();
        assert!(validate_tpcp(&mp).passed());
    }

    #[test]
    fn channel_file_roundtrip() {
        let u = random_unitary(2, &mut rng_from_seed(9));
        let chan = channel_from_kraus(&[u], dims(&[2])).unwrap();
        let text = serde_json::to_string(&chan.to_file()).unwrap();
        let back: ChannelFile = serde_json::from_str(&text).unwrap();
        assert_eq!(back.into_channel().unwrap(), chan);
        let bare = r#"{"dim_in":1,"dim_out":1,"choi":[[1.0,0.0]]}"#;
        let ch: ChannelFile = serde_json::from_str(bare).unwrap();
        assert_eq!(ch.into_channel().unwrap().dim_out(), 1);
    }

    #[test]
    fn projection_repairs_small_violations() {
        let id = Channel::identity(2);
        let mut choi = id.choi() * Complex64::new(1.0 + 1e-6, 0.0);
        choi[(1, 1)] = Complex64::new(-1e-9, 0.0);
        let noisy = Channel::from_choi(choi, 2, dims(&[2])).unwrap();
        assert!(!validate_tpcp(&noisy).passed());
        let fixed = project_to_tpcp(&noisy).unwrap();
        let r = validate_tpcp(&fixed);
        assert!(r.passed(), "{r:?}");
        assert!(r.tp_deviation < 1e-12);
    }
}
