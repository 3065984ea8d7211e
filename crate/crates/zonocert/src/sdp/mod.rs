//! Block-structured semidefinite programming.
//!
//! Problems are stated in the standard primal form
//!
//! ```text
//!   minimize    <C, X>
//!   subject to  <A_i, X> = b_i   for i = 1..m,
//!               X in K
//! ```
//!
//! where `K` is a product of dense positive-semidefinite blocks and
//! nonnegative diagonal (linear) blocks. The solver is a primal-dual
//! path-following interior-point method on the homogeneous self-dual
//! embedding with Nesterov-Todd scaling and a Mehrotra predictor-corrector;
//! see [`solve`]. Problems round-trip through the SDPA sparse file format
//! via [`export_sdpa`] and [`parse_sdpa`].

mod sdpa;
mod solver;

pub use sdpa::{export_sdpa, parse_sdpa, write_sdpa};
pub use solver::solve;

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SdpError {
    #[error("matrix entry references block {block} outside the {nblocks} declared blocks")]
    BadBlock { block: usize, nblocks: usize },
    #[error("matrix entry ({row},{col}) outside block of dimension {dim}")]
    BadIndex { row: usize, col: usize, dim: usize },
    #[error("off-diagonal entry ({row},{col}) in a diagonal block")]
    OffDiagonal { row: usize, col: usize },
    #[error("non-finite value in problem data")]
    NonFinite,
    #[error("right-hand side length {got} does not match constraint count {expected}")]
    RhsLength { got: usize, expected: usize },
    #[error("SDPA parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// Cone kind of one block.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum BlockKind {
    /// Dense symmetric positive-semidefinite block.
    Psd,
    /// Nonnegative diagonal block (a bundle of scalar inequalities).
    Diag,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct BlockSpec {
    pub dim: usize,
    pub kind: BlockKind,
}

/// One entry of a symmetric block matrix, stored on the upper triangle
/// (`row <= col`); the mirrored entry is implied.
#[derive(Clone, Copy, PartialEq, Debug)]
pub struct MatEntry {
    pub block: usize,
    pub row: usize,
    pub col: usize,
    pub value: f64,
}

impl MatEntry {
    pub fn new(block: usize, row: usize, col: usize, value: f64) -> Self {
        let (row, col) = if row <= col { (row, col) } else { (col, row) };
        Self { block, row, col, value }
    }
}

/// A block-structured SDP in canonical form. Construction sorts entries,
/// merges duplicates, and drops explicit zeros, so structurally equal
/// problems compare equal.
#[derive(Clone, PartialEq, Debug)]
pub struct SdpProblem {
    blocks: Vec<BlockSpec>,
    objective: Vec<MatEntry>,
    constraints: Vec<Vec<MatEntry>>,
    rhs: Vec<f64>,
}

impl SdpProblem {
    pub fn new(
        blocks: Vec<BlockSpec>,
        objective: Vec<MatEntry>,
        constraints: Vec<Vec<MatEntry>>,
        rhs: Vec<f64>,
    ) -> Result<Self, SdpError> {
        if rhs.len() != constraints.len() {
            return Err(SdpError::RhsLength { got: rhs.len(), expected: constraints.len() });
        }
        if rhs.iter().any(|v| !v.is_finite()) {
            return Err(SdpError::NonFinite);
        }
        let canon = |entries: Vec<MatEntry>| -> Result<Vec<MatEntry>, SdpError> {
            let mut es: Vec<MatEntry> =
                entries.into_iter().map(|e| MatEntry::new(e.block, e.row, e.col, e.value)).collect();
            for e in &es {
                let spec = blocks.get(e.block).ok_or(SdpError::BadBlock {
                    block: e.block,
                    nblocks: blocks.len(),
                })?;
                if e.row >= spec.dim || e.col >= spec.dim {
                    return Err(SdpError::BadIndex { row: e.row, col: e.col, dim: spec.dim });
                }
                if spec.kind == BlockKind::Diag && e.row != e.col {
                    return Err(SdpError::OffDiagonal { row: e.row, col: e.col });
                }
                if !e.value.is_finite() {
                    return Err(SdpError::NonFinite);
                }
            }
            es.sort_by_key(|e| (e.block, e.row, e.col));
            let mut merged: Vec<MatEntry> = Vec::with_capacity(es.len());
            for e in es {
                match merged.last_mut() {
                    Some(last) if (last.block, last.row, last.col) == (e.block, e.row, e.col) => {
                        last.value += e.value;
                    }
                    _ => merged.push(e),
                }
            }
            merged.retain(|e| e.value != 0.0);
            Ok(merged)
        };
        Ok(Self {
            objective: canon(objective)?,
            constraints: constraints.into_iter().map(canon).collect::<Result<_, _>>()?,
            blocks,
            rhs,
        })
    }

    /// Feasibility problem: zero objective over the given blocks.
    pub fn feasibility(
        blocks: Vec<BlockSpec>,
        constraints: Vec<Vec<MatEntry>>,
        rhs: Vec<f64>,
    ) -> Result<Self, SdpError> {
        Self::new(blocks, Vec::new(), constraints, rhs)
    }

    pub fn blocks(&self) -> &[BlockSpec] {
        &self.blocks
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    pub fn objective(&self) -> &[MatEntry] {
        &self.objective
    }

    pub fn constraint(&self, i: usize) -> &[MatEntry] {
        &self.constraints[i]
    }

    pub fn rhs(&self) -> &[f64] {
        &self.rhs
    }

    /// Sum of block dimensions (the barrier degree of the cone).
    pub fn cone_degree(&self) -> usize {
        self.blocks.iter().map(|b| b.dim).sum()
    }

    pub fn largest_psd_block(&self) -> usize {
        self.blocks
            .iter()
            .filter(|b| b.kind == BlockKind::Psd)
            .map(|b| b.dim)
            .max()
            .unwrap_or(0)
    }
}

/// Value of one cone block in a primal or dual point.
#[derive(Clone, Debug)]
pub enum BlockValue {
    Dense(DMatrix<f64>),
    Diag(DVector<f64>),
}

impl BlockValue {
    pub fn identity(spec: BlockSpec) -> Self {
        match spec.kind {
            BlockKind::Psd => BlockValue::Dense(DMatrix::identity(spec.dim, spec.dim)),
            BlockKind::Diag => BlockValue::Diag(DVector::from_element(spec.dim, 1.0)),
        }
    }

    pub fn zeros(spec: BlockSpec) -> Self {
        match spec.kind {
            BlockKind::Psd => BlockValue::Dense(DMatrix::zeros(spec.dim, spec.dim)),
            BlockKind::Diag => BlockValue::Diag(DVector::zeros(spec.dim)),
        }
    }

    pub fn scale(&self, s: f64) -> Self {
        match self {
            BlockValue::Dense(m) => BlockValue::Dense(m * s),
            BlockValue::Diag(v) => BlockValue::Diag(v * s),
        }
    }

    /// Entry with symmetric mirroring.
    pub fn get(&self, row: usize, col: usize) -> f64 {
        match self {
            BlockValue::Dense(m) => m[(row, col)],
            BlockValue::Diag(v) => {
                if row == col {
                    v[row]
                } else {
                    0.0
                }
            }
        }
    }

    /// Smallest eigenvalue (for diagonal blocks, the smallest entry).
    pub fn min_eigenvalue(&self) -> f64 {
        match self {
            BlockValue::Dense(m) => {
                if m.nrows() == 0 {
                    return 0.0;
                }
                m.clone().symmetric_eigen().eigenvalues.min()
            }
            BlockValue::Diag(v) => v.min(),
        }
    }
}

/// Outcome classification of a solve.
#[derive(Clone, Copy, PartialEq, Eq, Debug, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    /// Converged with a nonzero objective.
    Optimal,
    /// Converged on a pure feasibility problem.
    Feasible,
    /// A dual improving ray certifies primal infeasibility.
    Infeasible,
    /// Iteration cap, resource guard, or numerical breakdown.
    Indeterminate,
}

/// Solver result: the (scaled-back) primal/dual iterates plus the achieved
/// tolerances. On `Infeasible` the certificate ray and its residual are set.
#[derive(Clone, Debug)]
pub struct SdpSolution {
    pub status: SolveStatus,
    pub x: Vec<BlockValue>,
    pub y: DVector<f64>,
    pub s: Vec<BlockValue>,
    pub primal_objective: f64,
    pub dual_objective: f64,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub rel_gap: f64,
    pub iterations: usize,
    /// Smallest eigenvalue across primal cone blocks.
    pub min_eigenvalue: f64,
    /// Normalized dual improving ray `y / (b'y)` and its residual
    /// `||A*(y) + S|| / b'y`, present when status is `Infeasible`.
    pub infeasibility_certificate: Option<(DVector<f64>, f64)>,
    pub message: Option<String>,
}

/// Interior-point options. Defaults: residual and gap tolerances `1e-7`,
/// at most 200 iterations.
#[derive(Clone, Debug, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct SolverOptions {
    pub tol_primal: f64,
    pub tol_dual: f64,
    pub tol_gap: f64,
    pub tol_infeasible: f64,
    pub max_iterations: usize,
    /// Dense Schur-complement guard: problems with more equality
    /// constraints than this come back `Indeterminate` instead of
    /// exhausting memory.
    pub max_schur_dim: usize,
    /// Largest admissible PSD block.
    pub max_block_dim: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol_primal: 1e-7,
            tol_dual: 1e-7,
            tol_gap: 1e-7,
            tol_infeasible: 1e-7,
            max_iterations: 200,
            max_schur_dim: 6000,
            max_block_dim: 600,
        }
    }
}

// --- shared linear operators over block values --------------------------

pub(crate) fn entries_inner(entries: &[MatEntry], x: &[BlockValue]) -> f64 {
    let mut acc = 0.0;
    for e in entries {
        let xv = x[e.block].get(e.row, e.col);
        acc += if e.row == e.col { e.value * xv } else { 2.0 * e.value * xv };
    }
    acc
}

/// `A(X)`: evaluates every constraint functional at `X`.
pub(crate) fn apply_a(p: &SdpProblem, x: &[BlockValue]) -> DVector<f64> {
    DVector::from_iterator(
        p.constraints.len(),
        p.constraints.iter().map(|c| entries_inner(c, x)),
    )
}

/// `A*(y) = sum_i y_i A_i` accumulated into dense block values.
pub(crate) fn apply_at(p: &SdpProblem, y: &DVector<f64>) -> Vec<BlockValue> {
    let mut out: Vec<BlockValue> = p.blocks.iter().map(|b| BlockValue::zeros(*b)).collect();
    for (i, cons) in p.constraints.iter().enumerate() {
        let yi = y[i];
        if yi == 0.0 {
            continue;
        }
        add_entries(&mut out, cons, yi);
    }
    out
}

pub(crate) fn add_entries(target: &mut [BlockValue], entries: &[MatEntry], scale: f64) {
    for e in entries {
        match &mut target[e.block] {
            BlockValue::Dense(m) => {
                m[(e.row, e.col)] += scale * e.value;
                if e.row != e.col {
                    m[(e.col, e.row)] += scale * e.value;
                }
            }
            BlockValue::Diag(v) => v[e.row] += scale * e.value,
        }
    }
}

pub(crate) fn block_inner(a: &[BlockValue], b: &[BlockValue]) -> f64 {
    let mut acc = 0.0;
    for (ba, bb) in a.iter().zip(b) {
        match (ba, bb) {
            (BlockValue::Dense(ma), BlockValue::Dense(mb)) => acc += ma.dot(mb),
            (BlockValue::Diag(va), BlockValue::Diag(vb)) => acc += va.dot(vb),
            _ => unreachable!("mismatched block kinds"),
        }
    }
    acc
}

pub(crate) fn block_norm(a: &[BlockValue]) -> f64 {
    block_inner(a, a).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonicalization_merges_and_sorts() {
        let blocks = vec![BlockSpec { dim: 2, kind: BlockKind::Psd }];
        let p = SdpProblem::new(
            blocks.clone(),
            vec![],
            vec![vec![
                MatEntry::new(0, 1, 0, 2.0), // lower triangle flips to upper
                MatEntry::new(0, 0, 1, 1.0),
                MatEntry::new(0, 0, 0, 0.0), // dropped
            ]],
            vec![1.0],
        )
        .unwrap();
        assert_eq!(p.constraint(0), &[MatEntry { block: 0, row: 0, col: 1, value: 3.0 }]);
    }

    #[test]
    fn diag_block_rejects_off_diagonal() {
        let blocks = vec![BlockSpec { dim: 2, kind: BlockKind::Diag }];
        let err = SdpProblem::new(
            blocks,
            vec![],
            vec![vec![MatEntry::new(0, 0, 1, 1.0)]],
            vec![0.0],
        );
        assert!(matches!(err, Err(SdpError::OffDiagonal { .. })));
    }

    #[test]
    fn inner_counts_mirrored_entries() {
        let blocks = vec![BlockSpec { dim: 2, kind: BlockKind::Psd }];
        let x = vec![BlockValue::Dense(DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 5.0]))];
        let entries = vec![MatEntry::new(0, 0, 1, 1.0)];
        let _ = blocks;
        assert_eq!(entries_inner(&entries, &x), 4.0);
    }
}
