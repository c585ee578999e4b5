//! Dense complex matrix kernel.
//!
//! Matrices are `nalgebra::DMatrix<Complex64>`. Composite systems use a
//! big-endian ordering: in `A ⊗ B ⊗ C` the first factor varies slowest.

pub(crate) mod spectral;
mod tensor;

pub use spectral::{
    fidelity, herm_eig, hermitize, matrix_func_on_support, psd_power, psd_sqrt, support_projector,
    trace_norm, Spectrum,
};
pub use tensor::{
    block_diag, ket_to_density, partial_trace, partial_trace_vec, permute_subsystems,
    permute_vector, tensor, tensor_all,
};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type ComplexMatrix = DMatrix<Complex64>;

/// Eigenvalues at or below `RANK_TOL * λ_max` count as zero.
pub const RANK_TOL: f64 = 1e-10;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Ordered subsystem dimensions of a composite system.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DimVector(Vec<usize>);

impl DimVector {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::InvalidArgument("empty dimension vector".into()));
        }
        if dims.contains(&0) {
            return Err(Error::InvalidArgument(format!(
                "subsystem dimensions must be >= 1, got {dims:?}"
            )));
        }
        Ok(DimVector(dims))
    }

    pub fn total(&self) -> usize {
        self.0.iter().product()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn get(&self, i: usize) -> usize {
        self.0[i]
    }

    /// Dimensions of the listed subsystems, in the order given.
    pub fn select(&self, indices: &[usize]) -> Vec<usize> {
        indices.iter().map(|&i| self.0[i]).collect()
    }

    pub(crate) fn check_matrix(&self, m: &ComplexMatrix) -> Result<()> {
        if m.nrows() != m.ncols() {
            return Err(Error::NotSquare {
                rows: m.nrows(),
                cols: m.ncols(),
            });
        }
        if m.nrows() != self.total() {
            return Err(Error::DimensionMismatch(format!(
                "matrix side {} does not match dims {:?} (product {})",
                m.nrows(),
                self.0,
                self.total()
            )));
        }
        Ok(())
    }
}

impl From<DimVector> for Vec<usize> {
    fn from(d: DimVector) -> Self {
        d.0
    }
}

pub fn identity(n: usize) -> ComplexMatrix {
    ComplexMatrix::identity(n, n)
}

/// `|i⟩⟨j|` in dimension `n`.
pub fn unit(n: usize, i: usize, j: usize) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(n, n);
    m[(i, j)] = ONE;
    m
}

pub fn diag_real(values: &[f64]) -> ComplexMatrix {
    let n = values.len();
    ComplexMatrix::from_fn(n, n, |i, j| {
        if i == j {
            Complex64::new(values[i], 0.0)
        } else {
            ZERO
        }
    })
}

pub fn trace(m: &ComplexMatrix) -> Complex64 {
    m.diagonal().iter().sum()
}

pub fn is_finite(m: &ComplexMatrix) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// Frobenius norm of `a - b`.
pub fn frobenius_distance(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    (a - b).norm()
}

/// Largest entrywise modulus of `a - b`.
pub fn max_abs_diff(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

pub fn hermiticity_error(m: &ComplexMatrix) -> f64 {
    max_abs_diff(m, &m.adjoint())
}
