use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One coefficient of a symmetric matrix: `value` sits at `(row, col)` and,
/// when `row != col`, also at `(col, row)`. Only `row <= col` is stored.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Entry {
    pub block: usize,
    pub row: usize,
    pub col: usize,
    pub value: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Constraint {
    pub entries: Vec<Entry>,
    pub rhs: f64,
}

/// `minimize ⟨C, X⟩  s.t.  ⟨A_i, X⟩ = b_i,  X ⪰ 0`, with `X` block diagonal
/// and real symmetric. The dual is `maximize bᵀy  s.t.  Σ y_i A_i + S = C,  S ⪰ 0`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SdpProblem {
    pub blocks: Vec<usize>,
    pub objective: Vec<Entry>,
    pub constraints: Vec<Constraint>,
}

impl SdpProblem {
    pub fn new(blocks: Vec<usize>) -> Self {
        SdpProblem {
            blocks,
            objective: Vec::new(),
            constraints: Vec::new(),
        }
    }

    pub fn total_dim(&self) -> usize {
        self.blocks.iter().sum()
    }

    /// Adds `value` at `(row, col)` of the objective, normalising to `row <= col`.
    pub fn add_objective(&mut self, block: usize, row: usize, col: usize, value: f64) {
        let (row, col) = (row.min(col), row.max(col));
        self.objective.push(Entry {
            block,
            row,
            col,
            value,
        });
    }

    pub fn add_constraint(&mut self, entries: Vec<Entry>, rhs: f64) {
        let entries = entries
            .into_iter()
            .map(|e| Entry {
                row: e.row.min(e.col),
                col: e.row.max(e.col),
                ..e
            })
            .collect();
        self.constraints.push(Constraint { entries, rhs });
    }

    pub fn validate(&self) -> Result<()> {
        if self.blocks.is_empty() || self.blocks.contains(&0) {
            return Err(Error::InvalidArgument(
                "SDP needs at least one block, all of positive size".into(),
            ));
        }
        let check = |e: &Entry| -> Result<()> {
            if e.block >= self.blocks.len() || e.col >= self.blocks[e.block] || e.row > e.col {
                return Err(Error::InvalidArgument(format!(
                    "SDP entry ({}, {}, {}) is outside the block structure {:?}",
                    e.block, e.row, e.col, self.blocks
                )));
            }
            if !e.value.is_finite() {
                return Err(Error::NonFinite);
            }
            Ok(())
        };
        for e in &self.objective {
            check(e)?;
        }
        for c in &self.constraints {
            if !c.rhs.is_finite() {
                return Err(Error::NonFinite);
            }
            for e in &c.entries {
                check(e)?;
            }
        }
        Ok(())
    }

    pub fn save_json(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }

    pub fn load_json(path: &Path) -> Result<Self> {
        let p: SdpProblem = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        p.validate()?;
        Ok(p)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Optimal,
    /// A dual ray certifies that no feasible `X` exists.
    PrimalInfeasible,
    /// A primal ray certifies that the objective is unbounded below.
    DualInfeasible,
    /// Stopped early but within the relaxed tolerances.
    Inaccurate,
    MaxIter,
}

impl Status {
    pub fn is_infeasible(self) -> bool {
        matches!(self, Status::PrimalInfeasible | Status::DualInfeasible)
    }

    /// `Optimal` or `Inaccurate`.
    pub fn has_solution(self) -> bool {
        matches!(self, Status::Optimal | Status::Inaccurate)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    pub max_iter: usize,
    /// Target for relative gap and relative residuals.
    pub tol: f64,
    /// Relaxed target accepted when progress stalls.
    pub inaccurate_tol: f64,
    pub infeasibility_tol: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            max_iter: 100,
            tol: 1e-10,
            inaccurate_tol: 1e-7,
            infeasibility_tol: 1e-8,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterateSummary {
    pub iter: usize,
    pub primal_objective: f64,
    pub dual_objective: f64,
    /// `⟨X, S⟩`.
    pub complementarity: f64,
    pub primal_infeasibility: f64,
    pub dual_infeasibility: f64,
    pub step_primal: f64,
    pub step_dual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SdpSolution {
    pub status: Status,
    pub x: Vec<DMatrix<f64>>,
    pub s: Vec<DMatrix<f64>>,
    /// One entry per original constraint; constraints removed in presolve get 0.
    pub y: Vec<f64>,
    pub primal_objective: f64,
    pub dual_objective: f64,
    /// `|pobj − dobj| / (1 + |pobj| + |dobj|)`.
    pub relative_gap: f64,
    /// `‖b − A(X)‖ / (1 + ‖b‖)`.
    pub primal_infeasibility: f64,
    /// `‖C − Aᵀy − S‖ / (1 + ‖C‖)`.
    pub dual_infeasibility: f64,
    pub iterations: usize,
    pub removed_constraints: Vec<usize>,
    pub history: Vec<IterateSummary>,
}

impl SdpSolution {
    pub fn save_json(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }
}
