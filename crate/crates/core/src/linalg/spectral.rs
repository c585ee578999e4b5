use nalgebra::linalg::{SymmetricEigen, SVD};
use num_complex::Complex64;

use super::{is_finite, ComplexMatrix, RANK_TOL};
use crate::error::{Error, Result};

/// Eigen-decomposition of a Hermitian matrix, eigenvalues descending.
#[derive(Clone, Debug)]
pub struct Spectrum {
    pub values: Vec<f64>,
    /// Eigenvectors as columns, in the order of `values`.
    pub vectors: ComplexMatrix,
}

impl Spectrum {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn max(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    pub fn min(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }

    /// `Σ g(λ_i) v_i v_i†` over all eigenpairs.
    pub fn reconstruct_with(&self, mut g: impl FnMut(f64) -> Complex64) -> ComplexMatrix {
        let n = self.dim();
        let mut scaled = self.vectors.clone();
        for (k, &lambda) in self.values.iter().enumerate() {
            let w = g(lambda);
            for i in 0..n {
                scaled[(i, k)] *= w;
            }
        }
        scaled * self.vectors.adjoint()
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        self.reconstruct_with(|l| Complex64::new(l, 0.0))
    }

    /// Cutoff below which eigenvalues are treated as zero.
    pub fn support_threshold(&self, rank_tol: f64) -> f64 {
        rank_tol * self.max().max(0.0)
    }

    pub fn rank(&self, rank_tol: f64) -> usize {
        let cut = self.support_threshold(rank_tol);
        self.values.iter().filter(|&&l| l > cut).count()
    }

    /// Isometry whose columns span the support.
    pub fn support_basis(&self, rank_tol: f64) -> ComplexMatrix {
        let r = self.rank(rank_tol);
        self.vectors.columns(0, r).into_owned()
    }
}

pub fn hermitize(m: &ComplexMatrix) -> ComplexMatrix {
    (m + m.adjoint()) * Complex64::new(0.5, 0.0)
}

pub fn herm_eig(h: &ComplexMatrix) -> Result<Spectrum> {
    if h.nrows() != h.ncols() {
        return Err(Error::NotSquare {
            rows: h.nrows(),
            cols: h.ncols(),
        });
    }
    if !is_finite(h) {
        return Err(Error::NonFinite);
    }
    let n = h.nrows();
    if n == 0 {
        return Ok(Spectrum {
            values: vec![],
            vectors: ComplexMatrix::zeros(0, 0),
        });
    }
    let eig = SymmetricEigen::new(hermitize(h));
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    Ok(Spectrum { values, vectors })
}

/// Applies `f` to the eigenvalues of a PSD matrix, restricted to its support.
///
/// Eigenvalues at or below `rank_tol·λ_max` map to zero whatever `f` is.
/// Negative eigenvalues down to `-rank_tol·λ_max` are rounding noise; anything
/// further below is rejected.
pub fn matrix_func_on_support(
    h: &ComplexMatrix,
    f: impl Fn(f64) -> Complex64,
    rank_tol: f64,
) -> Result<ComplexMatrix> {
    let spec = herm_eig(h)?;
    func_on_support(&spec, f, rank_tol)
}

pub(crate) fn func_on_support(
    spec: &Spectrum,
    f: impl Fn(f64) -> Complex64,
    rank_tol: f64,
) -> Result<ComplexMatrix> {
    check_psd(spec, rank_tol)?;
    let cut = spec.support_threshold(rank_tol);
    let mut err = None;
    let out = spec.reconstruct_with(|l| {
        if l > cut {
            let v = f(l);
            if !(v.re.is_finite() && v.im.is_finite()) {
                err.get_or_insert(Error::FunctionNotFinite { eigenvalue: l });
            }
            v
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    match err {
        Some(e) => Err(e),
        None => Ok(out),
    }
}

pub(crate) fn check_psd(spec: &Spectrum, rank_tol: f64) -> Result<()> {
    let cut = spec.support_threshold(rank_tol);
    if spec.min() < -cut {
        return Err(Error::NotPsd {
            min_eigenvalue: spec.min(),
        });
    }
    Ok(())
}

/// Complex power `H^p` on the support of a PSD matrix.
pub fn psd_power(h: &ComplexMatrix, p: Complex64) -> Result<ComplexMatrix> {
    matrix_func_on_support(h, |l| Complex64::new(l, 0.0).powc(p), RANK_TOL)
}

pub fn psd_sqrt(h: &ComplexMatrix) -> Result<ComplexMatrix> {
    matrix_func_on_support(h, |l| Complex64::new(l.sqrt(), 0.0), RANK_TOL)
}

pub fn support_projector(h: &ComplexMatrix) -> Result<ComplexMatrix> {
    matrix_func_on_support(h, |_| Complex64::new(1.0, 0.0), RANK_TOL)
}

/// Sum of singular values.
pub fn trace_norm(m: &ComplexMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    SVD::new(m.clone(), false, false).singular_values.sum()
}

/// `‖√ρ √σ‖₁`, for arbitrary PSD operators (not necessarily unit trace).
pub fn fidelity(rho: &ComplexMatrix, sigma: &ComplexMatrix) -> Result<f64> {
    if rho.shape() != sigma.shape() {
        return Err(Error::DimensionMismatch(format!(
            "fidelity of {:?} and {:?} matrices",
            rho.shape(),
            sigma.shape()
        )));
    }
    Ok(trace_norm(&(psd_sqrt(rho)? * psd_sqrt(sigma)?)))
}
