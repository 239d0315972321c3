//! Block symbols `sigma_P(xi)` of `m x n` systems of left-invariant operators.

use crate::error::{Error, Result};
use crate::group::{rep_meta, GroupId, RepIndex, RepMeta};
use crate::linalg::{is_numerical_zero, ComplexMatrix, C64};
use crate::symbol::ScalarSymbol;

/// An `m x n` grid of scalar symbols; `grid[j][i]` is `P_{ji}`, acting from
/// component `i` of the input to component `j` of the output.
#[derive(Clone, Debug)]
pub struct SystemSymbol {
    group: GroupId,
    grid: Vec<Vec<ScalarSymbol>>,
}

impl SystemSymbol {
    pub fn new(group: GroupId, grid: Vec<Vec<ScalarSymbol>>) -> Result<Self> {
        let m = grid.len();
        let n = grid.first().map_or(0, Vec::len);
        if m == 0 || n == 0 {
            return Err(Error::Shape("system must have at least one row and column".into()));
        }
        if grid.iter().any(|row| row.len() != n) {
            return Err(Error::Shape("ragged system grid".into()));
        }
        Ok(Self { group, grid })
    }

    pub fn single(group: GroupId, symbol: ScalarSymbol) -> Self {
        Self {
            group,
            grid: vec![vec![symbol]],
        }
    }

    pub fn column(group: GroupId, symbols: Vec<ScalarSymbol>) -> Result<Self> {
        Self::new(group, symbols.into_iter().map(|s| vec![s]).collect())
    }

    pub fn group(&self) -> &GroupId {
        &self.group
    }

    pub fn m(&self) -> usize {
        self.grid.len()
    }

    pub fn n(&self) -> usize {
        self.grid[0].len()
    }

    pub fn is_square(&self) -> bool {
        self.m() == self.n()
    }

    pub fn entry(&self, j: usize, i: usize) -> &ScalarSymbol {
        &self.grid[j][i]
    }

    pub fn grid(&self) -> &[Vec<ScalarSymbol>] {
        &self.grid
    }

    /// Multiply every entry by `c`.
    pub fn scaled(&self, c: C64) -> SystemSymbol {
        SystemSymbol {
            group: self.group,
            grid: self
                .grid
                .iter()
                .map(|row| row.iter().map(|s| s.clone().scaled(c)).collect())
                .collect(),
        }
    }

    /// Evaluate every entry at `xi`: `blocks[j][i] = sigma_{P_ji}(xi)`.
    pub fn blocks(&self, xi: &RepIndex) -> Result<Vec<Vec<ComplexMatrix>>> {
        let meta = rep_meta(&self.group, xi)?;
        self.blocks_with_meta(xi, &meta)
    }

    fn blocks_with_meta(&self, xi: &RepIndex, meta: &RepMeta) -> Result<Vec<Vec<ComplexMatrix>>> {
        self.grid
            .iter()
            .map(|row| {
                row.iter()
                    .map(|s| s.eval_with_meta(&self.group, xi, meta))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()
            .map_err(|e| match e {
                Error::AtIndex { .. } => e,
                other => Error::at_index(xi, other),
            })
    }

    pub fn assemble(&self, xi: &RepIndex) -> Result<ComplexMatrix> {
        let meta = rep_meta(&self.group, xi)?;
        Ok(assemble_blocks(&self.blocks_with_meta(xi, &meta)?, meta.dim))
    }

    /// Apply the symbol to an `n x 1` stack of `d_xi x d_xi` blocks.
    pub fn apply(&self, xi: &RepIndex, u: &[ComplexMatrix]) -> Result<Vec<ComplexMatrix>> {
        let meta = rep_meta(&self.group, xi)?;
        if u.len() != self.n() {
            return Err(Error::Shape(format!("expected {} blocks, got {}", self.n(), u.len())));
        }
        let p = u.first().map_or(0, ComplexMatrix::cols);
        if u.iter().any(|b| b.rows() != meta.dim || b.cols() != p) {
            return Err(Error::Shape(format!(
                "coefficient blocks must have {} rows and a common width",
                meta.dim
            )));
        }
        let blocks = self.blocks_with_meta(xi, &meta)?;
        blocks
            .iter()
            .map(|row| {
                row.iter().zip(u).try_fold(ComplexMatrix::zeros(meta.dim, p), |acc, (s, ui)| {
                    acc.add(&s.matmul(ui)?)
                })
            })
            .collect()
    }

    pub fn evaluate(&self, xi: &RepIndex) -> Result<BlockEvaluation> {
        let meta = rep_meta(&self.group, xi)?;
        let blocks = self.blocks_with_meta(xi, &meta)?;
        BlockEvaluation::from_blocks(xi.clone(), meta, blocks).map_err(|e| match e {
            Error::AtIndex { .. } => e,
            other => Error::at_index(xi, other),
        })
    }
}

pub fn assemble_blocks(blocks: &[Vec<ComplexMatrix>], d: usize) -> ComplexMatrix {
    let m = blocks.len();
    let n = blocks.first().map_or(0, Vec::len);
    let mut out = ComplexMatrix::zeros(m * d, n * d);
    for (j, row) in blocks.iter().enumerate() {
        for (i, b) in row.iter().enumerate() {
            out.set_block(j * d, i * d, b);
        }
    }
    out
}

/// `min ||A v||_2` over unit `v`.
pub fn smallest_singular_value(a: &ComplexMatrix) -> Result<f64> {
    a.smallest_singular_value()
}

/// Everything computed from `sigma_P(xi)` at one representation.
#[derive(Clone, Debug)]
pub struct BlockEvaluation {
    pub xi: RepIndex,
    pub meta: RepMeta,
    pub blocks: Vec<Vec<ComplexMatrix>>,
    pub matrix: ComplexMatrix,
    /// Smallest singular value; exactly zero when `numerical_zero` is set.
    pub lambda_min: f64,
    pub numerical_zero: bool,
    pub hs_norm: f64,
    pub op_norm: f64,
    pub det: Option<C64>,
    /// `ln |det|`, kept separately because `det` underflows for large blocks.
    pub log_abs_det: Option<f64>,
}

impl BlockEvaluation {
    pub fn from_blocks(xi: RepIndex, meta: RepMeta, blocks: Vec<Vec<ComplexMatrix>>) -> Result<Self> {
        let matrix = assemble_blocks(&blocks, meta.dim);
        let sv = matrix.singular_values()?;
        let hs_norm = matrix.hs_norm();
        let op_norm = sv.first().copied().unwrap_or(0.0);
        let raw_min = if matrix.cols() > matrix.rows() {
            0.0
        } else {
            sv.last().copied().unwrap_or(0.0)
        };
        let numerical_zero = is_numerical_zero(raw_min, hs_norm);
        let (det, log_abs_det) = if matrix.is_square() {
            (Some(matrix.determinant()?), Some(matrix.log_abs_determinant()?))
        } else {
            (None, None)
        };
        Ok(Self {
            xi,
            meta,
            blocks,
            matrix,
            lambda_min: if numerical_zero { 0.0 } else { raw_min },
            numerical_zero,
            hs_norm,
            op_norm,
            det,
            log_abs_det,
        })
    }

    pub fn m(&self) -> usize {
        self.blocks.len()
    }

    pub fn n(&self) -> usize {
        self.blocks[0].len()
    }
}
