use nalgebra::DVector;
use num_complex::Complex64;

use super::{ComplexMatrix, DimVector, ZERO};
use crate::error::{Error, Result};

/// Kronecker product; the left factor is the most significant index.
pub fn tensor(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kronecker(b)
}

pub fn tensor_all<'a>(factors: impl IntoIterator<Item = &'a ComplexMatrix>) -> ComplexMatrix {
    factors
        .into_iter()
        .fold(ComplexMatrix::identity(1, 1), |acc, f| acc.kronecker(f))
}

pub fn ket_to_density(psi: &DVector<Complex64>) -> ComplexMatrix {
    psi * psi.adjoint()
}

/// Direct sum `a ⊕ b`.
pub fn block_diag(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (n, m) = (a.nrows(), b.nrows());
    let mut out = ComplexMatrix::zeros(n + m, a.ncols() + b.ncols());
    out.view_mut((0, 0), a.shape()).copy_from(a);
    out.view_mut((n, a.ncols()), b.shape()).copy_from(b);
    out
}

fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1; dims.len()];
    for i in (0..dims.len().saturating_sub(1)).rev() {
        s[i] = s[i + 1] * dims[i + 1];
    }
    s
}

fn check_indices(dims: &DimVector, idx: &[usize]) -> Result<()> {
    for &k in idx {
        if k >= dims.len() {
            return Err(Error::SubsystemOutOfRange {
                index: k,
                count: dims.len(),
            });
        }
    }
    let mut sorted = idx.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != idx.len() {
        return Err(Error::InvalidArgument(format!(
            "repeated subsystem index in {idx:?}"
        )));
    }
    Ok(())
}

/// For each full basis index, its position in the kept and traced factors.
fn split_indices(dims: &[usize], keep: &[usize]) -> Vec<(usize, usize)> {
    let traced: Vec<usize> = (0..dims.len()).filter(|k| !keep.contains(k)).collect();
    let full_strides = strides(dims);
    let keep_strides = strides(&keep.iter().map(|&k| dims[k]).collect::<Vec<_>>());
    let trace_strides = strides(&traced.iter().map(|&k| dims[k]).collect::<Vec<_>>());
    let total: usize = dims.iter().product();
    (0..total)
        .map(|n| {
            let digit = |k: usize| (n / full_strides[k]) % dims[k];
            let kept = keep
                .iter()
                .zip(&keep_strides)
                .map(|(&k, &s)| digit(k) * s)
                .sum();
            let tr = traced
                .iter()
                .zip(&trace_strides)
                .map(|(&k, &s)| digit(k) * s)
                .sum();
            (kept, tr)
        })
        .collect()
}

/// Traces out every subsystem not listed in `keep`. The kept factors appear
/// in the order given by `keep`.
pub fn partial_trace(m: &ComplexMatrix, dims: &DimVector, keep: &[usize]) -> Result<ComplexMatrix> {
    dims.check_matrix(m)?;
    check_indices(dims, keep)?;
    let kept_dim: usize = keep.iter().map(|&k| dims.get(k)).product();
    let traced_dim = dims.total() / kept_dim;
    let split = split_indices(dims.as_slice(), keep);

    let mut groups: Vec<Vec<(usize, usize)>> = vec![Vec::with_capacity(kept_dim); traced_dim];
    for (full, &(kept, tr)) in split.iter().enumerate() {
        groups[tr].push((full, kept));
    }
    let mut out = ComplexMatrix::from_element(kept_dim, kept_dim, ZERO);
    for group in &groups {
        for &(a, ka) in group {
            for &(b, kb) in group {
                out[(ka, kb)] += m[(a, b)];
            }
        }
    }
    Ok(out)
}

/// Reduced density matrix of a pure state vector.
pub fn partial_trace_vec(
    psi: &DVector<Complex64>,
    dims: &DimVector,
    keep: &[usize],
) -> Result<ComplexMatrix> {
    if psi.len() != dims.total() {
        return Err(Error::DimensionMismatch(format!(
            "vector length {} vs dims {:?}",
            psi.len(),
            dims.as_slice()
        )));
    }
    check_indices(dims, keep)?;
    let kept_dim: usize = keep.iter().map(|&k| dims.get(k)).product();
    let traced_dim = dims.total() / kept_dim;
    let split = split_indices(dims.as_slice(), keep);
    // Reshape to kept × traced, then contract.
    let mut mat = ComplexMatrix::zeros(kept_dim, traced_dim);
    for (full, &(kept, tr)) in split.iter().enumerate() {
        mat[(kept, tr)] = psi[full];
    }
    Ok(&mat * mat.adjoint())
}

/// Index map for reordering factors: new factor `i` is old factor `perm[i]`.
fn permutation_map(dims: &DimVector, perm: &[usize]) -> Result<(Vec<usize>, DimVector)> {
    if perm.len() != dims.len() {
        return Err(Error::InvalidArgument(format!(
            "permutation {perm:?} does not match {} subsystems",
            dims.len()
        )));
    }
    check_indices(dims, perm)?;
    let new_dims: Vec<usize> = dims.select(perm);
    let old_strides = strides(dims.as_slice());
    let new_strides = strides(&new_dims);
    let map = (0..dims.total())
        .map(|n| {
            (0..perm.len())
                .map(|i| ((n / new_strides[i]) % new_dims[i]) * old_strides[perm[i]])
                .sum()
        })
        .collect();
    Ok((map, DimVector::new(new_dims)?))
}

/// Reorders tensor factors; returns the permuted matrix and its dims.
pub fn permute_subsystems(
    m: &ComplexMatrix,
    dims: &DimVector,
    perm: &[usize],
) -> Result<(ComplexMatrix, DimVector)> {
    dims.check_matrix(m)?;
    let (map, new_dims) = permutation_map(dims, perm)?;
    let n = dims.total();
    Ok((
        ComplexMatrix::from_fn(n, n, |i, j| m[(map[i], map[j])]),
        new_dims,
    ))
}

pub fn permute_vector(
    psi: &DVector<Complex64>,
    dims: &DimVector,
    perm: &[usize],
) -> Result<(DVector<Complex64>, DimVector)> {
    if psi.len() != dims.total() {
        return Err(Error::DimensionMismatch(format!(
            "vector length {} vs dims {:?}",
            psi.len(),
            dims.as_slice()
        )));
    }
    let (map, new_dims) = permutation_map(dims, perm)?;
    Ok((DVector::from_fn(psi.len(), |i, _| psi[map[i]]), new_dims))
}
