//! Density operators: validation, canonical examples, random ensembles,
//! purifications and flag extensions.

use std::path::Path;

use nalgebra::DVector;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    self, herm_eig, hermitize, identity, partial_trace, partial_trace_vec, permute_subsystems,
    permute_vector, tensor, unit, ComplexMatrix, DimVector,
};

/// Tolerances applied when validating a density operator.
const PSD_TOL: f64 = 1e-10;
const TRACE_TOL: f64 = 1e-8;
const HERMITIAN_TOL: f64 = 1e-8;
/// Deviations below this are left untouched so valid inputs keep their bits.
const ROUNDING_SLACK: f64 = 1e-13;

#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
    dims: DimVector,
}

impl DensityMatrix {
    /// Validates `m` as a density operator on the composite system `dims`.
    ///
    /// Small non-Hermitian parts are symmetrised away, negative eigenvalues
    /// down to `-1e-10` are clamped, and a trace within `1e-8` of one is
    /// renormalised.
    pub fn new(m: ComplexMatrix, dims: DimVector) -> Result<Self> {
        dims.check_matrix(&m)?;
        if !linalg::is_finite(&m) {
            return Err(Error::NonFinite);
        }
        let herm_err = linalg::hermiticity_error(&m);
        if herm_err > HERMITIAN_TOL {
            return Err(Error::InvalidArgument(format!(
                "matrix is not Hermitian (deviation {herm_err:e})"
            )));
        }
        let mut matrix = if herm_err > 0.0 { hermitize(&m) } else { m };

        let spec = herm_eig(&matrix)?;
        if spec.min() < -PSD_TOL {
            return Err(Error::NotPsd {
                min_eigenvalue: spec.min(),
            });
        }
        if spec.min() < -ROUNDING_SLACK {
            matrix = spec.reconstruct_with(|l| Complex64::new(l.max(0.0), 0.0));
        }

        let tr = linalg::trace(&matrix).re;
        if (tr - 1.0).abs() > TRACE_TOL {
            return Err(Error::BadTrace {
                trace: tr,
                tolerance: TRACE_TOL,
            });
        }
        if (tr - 1.0).abs() > ROUNDING_SLACK {
            matrix /= Complex64::new(tr, 0.0);
        }
        Ok(DensityMatrix { matrix, dims })
    }

    /// Wraps a matrix already known to be a valid state.
    pub(crate) fn from_parts_unchecked(matrix: ComplexMatrix, dims: DimVector) -> Self {
        DensityMatrix { matrix, dims }
    }

    pub fn from_dims(m: ComplexMatrix, dims: &[usize]) -> Result<Self> {
        Self::new(m, DimVector::new(dims.to_vec())?)
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn dims(&self) -> &DimVector {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn trace(&self) -> f64 {
        linalg::trace(&self.matrix).re
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        herm_eig(&self.matrix).map(|s| s.values).unwrap_or_default()
    }

    pub fn rank(&self) -> usize {
        herm_eig(&self.matrix)
            .map(|s| s.rank(linalg::RANK_TOL))
            .unwrap_or(0)
    }

    pub fn is_pure(&self, tol: f64) -> bool {
        let purity = (&self.matrix * &self.matrix).trace().re;
        (purity - 1.0).abs() <= tol
    }

    /// Reduced state on the listed subsystems, in the order given.
    pub fn marginal(&self, keep: &[usize]) -> Result<DensityMatrix> {
        let m = partial_trace(&self.matrix, &self.dims, keep)?;
        let dims = if keep.is_empty() {
            DimVector::new(vec![1])?
        } else {
            DimVector::new(self.dims.select(keep))?
        };
        Ok(DensityMatrix::from_parts_unchecked(m, dims))
    }

    pub fn permute(&self, perm: &[usize]) -> Result<DensityMatrix> {
        let (m, dims) = permute_subsystems(&self.matrix, &self.dims, perm)?;
        Ok(DensityMatrix::from_parts_unchecked(m, dims))
    }

    /// Same matrix, different factorisation of the same total dimension.
    pub fn regroup(&self, dims: DimVector) -> Result<DensityMatrix> {
        dims.check_matrix(&self.matrix)?;
        Ok(DensityMatrix::from_parts_unchecked(
            self.matrix.clone(),
            dims,
        ))
    }

    /// Convex combination `p·self + (1-p)·other`.
    pub fn mix(&self, other: &DensityMatrix, p: f64) -> Result<DensityMatrix> {
        if self.dims != other.dims {
            return Err(Error::DimensionMismatch(format!(
                "cannot mix states on {:?} and {:?}",
                self.dims.as_slice(),
                other.dims.as_slice()
            )));
        }
        check_probability(p)?;
        let m =
            &self.matrix * Complex64::new(p, 0.0) + &other.matrix * Complex64::new(1.0 - p, 0.0);
        Ok(DensityMatrix::from_parts_unchecked(m, self.dims.clone()))
    }

    pub fn tensor(&self, other: &DensityMatrix) -> DensityMatrix {
        let mut dims: Vec<usize> = self.dims.as_slice().to_vec();
        dims.extend_from_slice(other.dims.as_slice());
        DensityMatrix::from_parts_unchecked(
            tensor(&self.matrix, &other.matrix),
            DimVector::new(dims).expect("dims of valid states are positive"),
        )
    }

    pub fn to_file(&self) -> StateFile {
        StateFile {
            dims: self.dims.as_slice().to_vec(),
            matrix: self
                .matrix
                .transpose()
                .iter()
                .map(|z| [z.re, z.im])
                .collect(),
        }
    }

    pub fn save_json(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(&self.to_file())?)?;
        Ok(())
    }

    pub fn load_json(path: &Path) -> Result<Self> {
        let file: StateFile = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        file.into_state()
    }
}

/// On-disk state: `{"dims": [..], "matrix": [[re, im], ...]}`, row-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateFile {
    pub dims: Vec<usize>,
    pub matrix: Vec<[f64; 2]>,
}

impl StateFile {
    pub fn into_state(self) -> Result<DensityMatrix> {
        let dims = DimVector::new(self.dims)?;
        let n = dims.total();
        if self.matrix.len() != n * n {
            return Err(Error::DimensionMismatch(format!(
                "state file has {} entries, expected {}",
                self.matrix.len(),
                n * n
            )));
        }
        let m = ComplexMatrix::from_row_iterator(
            n,
            n,
            self.matrix.iter().map(|&[re, im]| Complex64::new(re, im)),
        );
        DensityMatrix::new(m, dims)
    }
}

/// Which subsystems of a composite state form `A`, `B` and `C`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TripartiteLabels {
    pub a: Vec<usize>,
    pub b: Vec<usize>,
    pub c: Vec<usize>,
}

impl TripartiteLabels {
    /// `A = 0`, `B = 1`, `C = 2`.
    pub fn standard() -> Self {
        TripartiteLabels {
            a: vec![0],
            b: vec![1],
            c: vec![2],
        }
    }

    pub fn new(a: Vec<usize>, b: Vec<usize>, c: Vec<usize>) -> Self {
        TripartiteLabels { a, b, c }
    }

    pub fn validate(&self, dims: &DimVector) -> Result<()> {
        let mut all: Vec<usize> = self
            .a
            .iter()
            .chain(&self.b)
            .chain(&self.c)
            .copied()
            .collect();
        all.sort_unstable();
        let expected: Vec<usize> = (0..dims.len()).collect();
        if all != expected {
            return Err(Error::InvalidArgument(format!(
                "labels A={:?} B={:?} C={:?} do not partition {} subsystems",
                self.a,
                self.b,
                self.c,
                dims.len()
            )));
        }
        Ok(())
    }

    pub fn dim_a(&self, dims: &DimVector) -> usize {
        dims.select(&self.a).iter().product()
    }

    pub fn dim_b(&self, dims: &DimVector) -> usize {
        dims.select(&self.b).iter().product()
    }

    pub fn dim_c(&self, dims: &DimVector) -> usize {
        dims.select(&self.c).iter().product()
    }

    /// Reorders `rho` to `A ⊗ B ⊗ C` and merges each group into one factor.
    pub fn canonicalize(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        self.validate(rho.dims())?;
        let perm: Vec<usize> = self
            .a
            .iter()
            .chain(&self.b)
            .chain(&self.c)
            .copied()
            .collect();
        let permuted = rho.permute(&perm)?;
        let dims = rho.dims();
        permuted.regroup(DimVector::new(vec![
            self.dim_a(dims),
            self.dim_b(dims),
            self.dim_c(dims),
        ])?)
    }
}

fn check_probability(p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) || p.is_nan() {
        return Err(Error::InvalidArgument(format!("p = {p} is outside [0, 1]")));
    }
    Ok(())
}

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent stream `index` derived from a master seed.
pub fn rng_for_sample(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index.wrapping_add(1));
    rng
}

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn ginibre<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(rows, cols);
    for j in 0..cols {
        for i in 0..rows {
            m[(i, j)] = gaussian(rng);
        }
    }
    m
}

/// Haar-random unit vector.
pub fn random_pure_vector<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> DVector<Complex64> {
    let v = DVector::from_fn(dim, |_, _| gaussian(rng));
    let norm = v.norm();
    v / Complex64::new(norm, 0.0)
}

/// Haar-random unitary via QR of a Ginibre matrix with phase correction.
pub fn random_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> ComplexMatrix {
    let qr = ginibre(dim, dim, rng).qr();
    let (mut q, r) = qr.unpack();
    for j in 0..dim {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 {
            d / d.norm()
        } else {
            linalg::ONE
        };
        for i in 0..dim {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Partial trace of a Haar-random pure state on `system ⊗ ancilla(rank)`.
pub fn random_density_with<R: Rng + ?Sized>(
    dims: &DimVector,
    rank: usize,
    rng: &mut R,
) -> Result<DensityMatrix> {
    let n = dims.total();
    if rank == 0 || rank > n {
        return Err(Error::InvalidArgument(format!(
            "rank {rank} outside 1..={n}"
        )));
    }
    let g = ginibre(n, rank, rng);
    let mut m = &g * g.adjoint();
    let tr = linalg::trace(&m).re;
    m /= Complex64::new(tr, 0.0);
    Ok(DensityMatrix::from_parts_unchecked(
        hermitize(&m),
        dims.clone(),
    ))
}

pub fn random_density(dims: &DimVector, rank: usize, seed: u64) -> Result<DensityMatrix> {
    random_density_with(dims, rank, &mut rng_from_seed(seed))
}

pub fn random_pure_state<R: Rng + ?Sized>(dims: &DimVector, rng: &mut R) -> DensityMatrix {
    let psi = random_pure_vector(dims.total(), rng);
    DensityMatrix::from_parts_unchecked(linalg::ket_to_density(&psi), dims.clone())
}

pub fn pure_state(psi: &DVector<Complex64>, dims: &DimVector) -> Result<DensityMatrix> {
    let norm = psi.norm();
    if norm == 0.0 || psi.len() != dims.total() {
        return Err(Error::InvalidArgument(
            "state vector must be non-zero and match dims".into(),
        ));
    }
    let psi = psi / Complex64::new(norm, 0.0);
    Ok(DensityMatrix::from_parts_unchecked(
        linalg::ket_to_density(&psi),
        dims.clone(),
    ))
}

/// `½|000⟩⟨000| + ⅛|1⟩⟨1| ⊗ id_BC` on three qubits.
pub fn counterexample_state() -> DensityMatrix {
    let m = linalg::diag_real(&[0.5, 0.0, 0.0, 0.0, 0.125, 0.125, 0.125, 0.125]);
    DensityMatrix::from_parts_unchecked(m, DimVector::new(vec![2, 2, 2]).unwrap())
}

/// `(|0…0⟩ + |1…1⟩)/√2` on `n` qubits.
pub fn ghz_state(n: usize) -> DensityMatrix {
    let dim = 1usize << n;
    let mut psi = DVector::zeros(dim);
    psi[0] = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    psi[dim - 1] = psi[0];
    DensityMatrix::from_parts_unchecked(
        linalg::ket_to_density(&psi),
        DimVector::new(vec![2; n]).unwrap(),
    )
}

/// `½(|000⟩⟨000| + |111⟩⟨111|)`: a classical copy chain.
pub fn classical_chain_state() -> DensityMatrix {
    let mut diag = vec![0.0; 8];
    diag[0] = 0.5;
    diag[7] = 0.5;
    DensityMatrix::from_parts_unchecked(
        linalg::diag_real(&diag),
        DimVector::new(vec![2, 2, 2]).unwrap(),
    )
}

/// `Σ_b P(b) |b⟩⟨b|_B ⊗ ρ_{AC,b}`, stored in `A ⊗ B ⊗ C` order.
///
/// Each block must carry dims `[d_A, d_C]`.
pub fn qcq_state(probs: &[f64], blocks: &[DensityMatrix]) -> Result<DensityMatrix> {
    if probs.len() != blocks.len() || probs.is_empty() {
        return Err(Error::DimensionMismatch(format!(
            "{} probabilities for {} blocks",
            probs.len(),
            blocks.len()
        )));
    }
    if probs.iter().any(|&p| !(p >= 0.0)) || (probs.iter().sum::<f64>() - 1.0).abs() > 1e-10 {
        return Err(Error::InvalidArgument(format!(
            "{probs:?} is not a probability distribution"
        )));
    }
    let ac_dims = blocks[0].dims().clone();
    if ac_dims.len() != 2 || blocks.iter().any(|b| b.dims() != &ac_dims) {
        return Err(Error::DimensionMismatch(
            "every block must live on the same A ⊗ C pair".into(),
        ));
    }
    let d_b = probs.len();
    let bac = DimVector::new(vec![d_b, ac_dims.get(0), ac_dims.get(1)])?;
    let mut m = ComplexMatrix::zeros(bac.total(), bac.total());
    for (b, (p, block)) in probs.iter().zip(blocks).enumerate() {
        m += tensor(&unit(d_b, b, b), block.matrix()) * Complex64::new(*p, 0.0);
    }
    let (m, dims) = permute_subsystems(&m, &bac, &[1, 0, 2])?;
    DensityMatrix::new(m, dims)
}

/// Random quantum Markov chain `Σ_b p_b |b⟩⟨b|_B ⊗ ρ_{A,b} ⊗ ρ_{C,b}`.
pub fn random_markov_state<R: Rng + ?Sized>(
    d_a: usize,
    d_b: usize,
    d_c: usize,
    rng: &mut R,
) -> Result<DensityMatrix> {
    let weights = random_pure_vector(d_b, rng);
    let probs: Vec<f64> = weights.iter().map(|z| z.norm_sqr()).collect();
    let total: f64 = probs.iter().sum();
    let probs: Vec<f64> = probs.iter().map(|p| p / total).collect();
    let da = DimVector::new(vec![d_a])?;
    let dc = DimVector::new(vec![d_c])?;
    let blocks = (0..d_b)
        .map(|_| {
            let rho_a = random_density_with(&da, d_a, rng)?;
            let rho_c = random_density_with(&dc, d_c, rng)?;
            rho_a
                .tensor(&rho_c)
                .regroup(DimVector::new(vec![d_a, d_c])?)
        })
        .collect::<Result<Vec<_>>>()?;
    qcq_state(&probs, &blocks)
}

/// `(1-p)|0⟩⟨0| ⊗ ρ⁰ + p|1⟩⟨1| ⊗ ρ` with the flag as the leftmost factor.
pub fn flag_extension(rho0: &DensityMatrix, rho1: &DensityMatrix, p: f64) -> Result<DensityMatrix> {
    check_probability(p)?;
    if rho0.dims() != rho1.dims() {
        return Err(Error::DimensionMismatch(format!(
            "flag extension of states on {:?} and {:?}",
            rho0.dims().as_slice(),
            rho1.dims().as_slice()
        )));
    }
    let m = tensor(&unit(2, 0, 0), rho0.matrix()) * Complex64::new(1.0 - p, 0.0)
        + tensor(&unit(2, 1, 1), rho1.matrix()) * Complex64::new(p, 0.0);
    let mut dims = vec![2];
    dims.extend_from_slice(rho0.dims().as_slice());
    Ok(DensityMatrix::from_parts_unchecked(
        m,
        DimVector::new(dims)?,
    ))
}

/// Labels for a flag extension of a tripartite state: the flag joins `A`.
pub fn flag_labels(inner: &TripartiteLabels) -> TripartiteLabels {
    let shift = |v: &Vec<usize>| v.iter().map(|i| i + 1).collect::<Vec<_>>();
    let mut a = vec![0];
    a.extend(shift(&inner.a));
    TripartiteLabels::new(a, shift(&inner.b), shift(&inner.c))
}

/// Purification vector on `system ⊗ ancilla`, ancilla dimension = rank.
pub fn purify_vector(rho: &DensityMatrix) -> Result<(DVector<Complex64>, DimVector)> {
    let spec = herm_eig(rho.matrix())?;
    let r = spec.rank(linalg::RANK_TOL).max(1);
    let n = rho.dim();
    let mut psi = DVector::zeros(n * r);
    for k in 0..r {
        let w = spec.values[k].max(0.0).sqrt();
        for i in 0..n {
            psi[i * r + k] = spec.vectors[(i, k)] * w;
        }
    }
    let norm = psi.norm();
    psi /= Complex64::new(norm, 0.0);
    let mut dims = rho.dims().as_slice().to_vec();
    dims.push(r);
    Ok((psi, DimVector::new(dims)?))
}

pub fn purify(rho: &DensityMatrix) -> Result<DensityMatrix> {
    let (psi, dims) = purify_vector(rho)?;
    Ok(DensityMatrix::from_parts_unchecked(
        linalg::ket_to_density(&psi),
        dims,
    ))
}

/// Random extension `ρ_ABC` of a fixed `ρ_BC`.
///
/// Purifies `ρ_BC` onto an ancilla `R`, applies a Haar-random isometry
/// `R → A ⊗ E` and discards `E`. The `BC` marginal is exactly `ρ_BC`.
pub fn random_extension<R: Rng + ?Sized>(
    rho_bc: &DensityMatrix,
    d_a: usize,
    rng: &mut R,
) -> Result<DensityMatrix> {
    if rho_bc.dims().len() != 2 || d_a == 0 {
        return Err(Error::InvalidArgument(
            "extension needs a bipartite ρ_BC and d_A >= 1".into(),
        ));
    }
    let (psi, dims) = purify_vector(rho_bc)?;
    let d_bc = rho_bc.dim();
    let r = dims.get(2);
    // Large enough that extensions are generically full rank.
    let d_e = d_a * d_bc;
    let u = random_unitary(d_a * d_e, rng);
    let iso = u.columns(0, r);
    // |ψ⟩ = Σ_{bc,k} ψ[bc,k] |bc⟩|k⟩  ↦  Σ ψ[bc,k] |bc⟩ V|k⟩
    let psi_mat = ComplexMatrix::from_fn(d_bc, r, |i, k| psi[i * r + k]);
    let out = psi_mat * iso.transpose();
    let d_ae = d_a * d_e;
    let out_vec = DVector::from_fn(d_bc * d_ae, |n, _| out[(n / d_ae, n % d_ae)]);
    let bcae = DimVector::new(vec![rho_bc.dims().get(0), rho_bc.dims().get(1), d_a, d_e])?;
    let (abce, abce_dims) = permute_vector(&out_vec, &bcae, &[2, 0, 1, 3])?;
    let m = partial_trace_vec(&abce, &abce_dims, &[0, 1, 2])?;
    Ok(DensityMatrix::from_parts_unchecked(
        hermitize(&m),
        DimVector::new(vec![d_a, rho_bc.dims().get(0), rho_bc.dims().get(1)])?,
    ))
}

/// Maximally mixed state on `dims`.
pub fn maximally_mixed(dims: &DimVector) -> DensityMatrix {
    let n = dims.total();
    DensityMatrix::from_parts_unchecked(identity(n) / Complex64::new(n as f64, 0.0), dims.clone())
}
