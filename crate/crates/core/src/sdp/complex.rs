//! Hermitian SDPs, solved through the real embedding
//! `P + iQ ↦ [[P, −Q], [Q, P]]`.

use num_complex::Complex64;

use super::problem::{Entry, SdpProblem, SdpSolution, SolverOptions, Status};
use super::solver::solve_sdp;
use crate::error::{Error, Result};
use crate::linalg::{unit, ComplexMatrix};

/// `f(X)_pq = tr(G_pq X)` for a complex-linear map `f`.
#[derive(Clone, Debug)]
pub struct LinearCoefficients {
    pub rows: usize,
    pub cols: usize,
    g: Vec<ComplexMatrix>,
}

impl LinearCoefficients {
    /// Probes `f` on the matrix units of an `n_in × n_in` input.
    pub fn of_map(n_in: usize, f: impl Fn(&ComplexMatrix) -> ComplexMatrix) -> Self {
        let mut g: Vec<ComplexMatrix> = Vec::new();
        let (mut rows, mut cols) = (0, 0);
        for a in 0..n_in {
            for b in 0..n_in {
                let out = f(&unit(n_in, a, b));
                if g.is_empty() {
                    rows = out.nrows();
                    cols = out.ncols();
                    g = vec![ComplexMatrix::zeros(n_in, n_in); rows * cols];
                }
                for p in 0..rows {
                    for q in 0..cols {
                        g[p * cols + q][(b, a)] = out[(p, q)];
                    }
                }
            }
        }
        LinearCoefficients { rows, cols, g }
    }

    pub fn get(&self, p: usize, q: usize) -> &ComplexMatrix {
        &self.g[p * self.cols + q]
    }
}

/// `maximize Σ_k Re tr(F_k X_k)` over Hermitian `X_k ⪰ 0` subject to
/// `Σ_k Re tr(G_k X_k) = b`.
#[derive(Clone, Debug, Default)]
pub struct ComplexSdp {
    blocks: Vec<usize>,
    objective: Vec<ComplexMatrix>,
    constraints: Vec<(Vec<(usize, ComplexMatrix)>, f64)>,
}

#[derive(Clone, Debug)]
pub struct ComplexSolution {
    pub status: Status,
    /// Primal objective of the maximisation.
    pub value: f64,
    /// Dual objective; an upper bound when the dual iterate is feasible.
    pub bound: f64,
    pub blocks: Vec<ComplexMatrix>,
    pub real: SdpSolution,
}

impl ComplexSdp {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_block(&mut self, n: usize) -> usize {
        self.blocks.push(n);
        self.objective.push(ComplexMatrix::zeros(n, n));
        self.blocks.len() - 1
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    pub fn add_objective(&mut self, block: usize, f: &ComplexMatrix) {
        self.objective[block] += f;
    }

    pub fn add_constraint(&mut self, terms: Vec<(usize, ComplexMatrix)>, rhs: f64) {
        self.constraints.push((terms, rhs));
    }

    /// `Σ_t scale_t · f_t(X_{block_t}) = target` for Hermitian-valued maps,
    /// one real constraint per independent real parameter.
    pub fn add_hermitian_equality(
        &mut self,
        terms: &[(usize, &LinearCoefficients, f64)],
        target: &ComplexMatrix,
    ) -> Result<()> {
        let n = target.nrows();
        if terms.iter().any(|(_, c, _)| c.rows != n || c.cols != n) {
            return Err(Error::DimensionMismatch(
                "equality terms and target differ in shape".into(),
            ));
        }
        let minus_i = Complex64::new(0.0, -1.0);
        for p in 0..n {
            for q in p..n {
                let re = terms
                    .iter()
                    .map(|&(blk, c, s)| (blk, c.get(p, q) * Complex64::new(s, 0.0)))
                    .collect();
                self.add_constraint(re, target[(p, q)].re);
                if p < q {
                    let im = terms
                        .iter()
                        .map(|&(blk, c, s)| (blk, c.get(p, q) * (minus_i * s)))
                        .collect();
                    self.add_constraint(im, target[(p, q)].im);
                }
            }
        }
        Ok(())
    }

    /// Real standard form; the objective is negated so that it is minimised.
    pub fn to_real(&self) -> SdpProblem {
        let mut p = SdpProblem::new(self.blocks.iter().map(|n| 2 * n).collect());
        for (k, f) in self.objective.iter().enumerate() {
            for e in embedded_entries(k, f) {
                p.add_objective(e.block, e.row, e.col, -e.value);
            }
        }
        for (terms, rhs) in &self.constraints {
            let entries = terms
                .iter()
                .flat_map(|(k, f)| embedded_entries(*k, f))
                .collect();
            p.add_constraint(entries, *rhs);
        }
        p
    }

    pub fn solve(&self, opts: &SolverOptions) -> Result<ComplexSolution> {
        let real = solve_sdp(&self.to_real(), opts)?;
        let blocks = real.x.iter().map(extract_hermitian).collect();
        Ok(ComplexSolution {
            status: real.status,
            value: -real.primal_objective,
            bound: -real.dual_objective,
            blocks,
            real,
        })
    }
}

/// Upper-triangle entries of `½ embed((F + F†)/2)`, so that
/// `⟨E, embed(X)⟩ = Re tr(F X)` for Hermitian `X`.
fn embedded_entries(block: usize, f: &ComplexMatrix) -> Vec<Entry> {
    let n = f.nrows();
    let h = (f + f.adjoint()) * Complex64::new(0.5, 0.0);
    let at = |r: usize, c: usize| -> f64 {
        let (i, j) = (r % n, c % n);
        let z = h[(i, j)];
        0.5 * match (r < n, c < n) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        }
    };
    let mut out = Vec::new();
    for r in 0..2 * n {
        for c in r..2 * n {
            let v = at(r, c);
            if v != 0.0 {
                out.push(Entry {
                    block,
                    row: r,
                    col: c,
                    value: v,
                });
            }
        }
    }
    out
}

/// Projects a real `2n × 2n` matrix onto the embedded Hermitian form.
pub fn extract_hermitian(y: &nalgebra::DMatrix<f64>) -> ComplexMatrix {
    let n = y.nrows() / 2;
    ComplexMatrix::from_fn(n, n, |i, j| {
        Complex64::new(
            0.5 * (y[(i, j)] + y[(n + i, n + j)]),
            0.5 * (y[(n + i, j)] - y[(i, n + j)]),
        )
    })
}
