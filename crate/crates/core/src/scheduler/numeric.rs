//! Block operations of the four task kinds on a shared [`LayoutMatrix`].

use std::sync::OnceLock;

use crate::dag::{Task, TaskKind};
use crate::error::{CaluError, Result};
use crate::kernels::{self, PanelSwaps, PermutationVector, SwapDirection};
use crate::layout::LayoutMatrix;
use crate::tslu;

/// Shared state of a numeric factorization.
pub struct Numeric<'m> {
    pub mat: &'m LayoutMatrix,
    pub leaves: usize,
    pub cutoff: usize,
    pivots: Vec<OnceLock<PanelSwaps>>,
}

impl<'m> Numeric<'m> {
    pub fn new(mat: &'m LayoutMatrix, leaves: usize, cutoff: usize) -> Self {
        let steps = mat.partition().steps();
        Self {
            mat,
            leaves: leaves.max(1),
            cutoff: cutoff.max(1),
            pivots: (0..steps).map(|_| OnceLock::new()).collect(),
        }
    }

    fn singular(step: usize, col: usize) -> impl Fn(CaluError) -> CaluError {
        move |e| match e {
            CaluError::SingularPanel { column }
            | CaluError::StructurallySingular { found: column, .. } => CaluError::SingularMatrix {
                step: step + 1,
                column: col + column,
            },
            CaluError::SingularU { index } => CaluError::SingularMatrix {
                step: step + 1,
                column: col + index,
            },
            other => other,
        }
    }

    pub fn execute(&self, task: &Task) -> Result<()> {
        let p = self.mat.partition();
        let k = task.step;
        let col0 = k * p.b;
        let err = Self::singular(k, col0);
        match task.kind {
            TaskKind::P => {
                let mut strip = self.mat.read_column_strip(k, k)?;
                let selected = tslu::tournament_pivots(&strip, self.leaves, self.cutoff)?;
                let swaps = tslu::swaps_for_selection(strip.rows(), &selected);
                kernels::apply_row_swaps(&mut strip, 0, &swaps)?;
                let col_ref: Vec<f64> = (0..strip.cols())
                    .map(|j| strip.col(j).iter().fold(0.0_f64, |m, v| m.max(v.abs())))
                    .collect();
                let h = p.block_height(k);
                let mut diag = strip.submatrix(0, 0, h, strip.cols());
                kernels::lu_nopivot(&mut diag, &col_ref, self.cutoff).map_err(&err)?;
                strip.set_submatrix(0, 0, &diag);
                self.mat.write_column_strip(k, k, &strip)?;
                let piv = PanelSwaps {
                    row_offset: col0,
                    panel_cols: col0..col0 + p.block_width(k),
                    swaps,
                };
                self.pivots[k]
                    .set(piv)
                    .map_err(|_| CaluError::Config(format!("panel {} factored twice", k + 1)))?;
            }
            TaskKind::L => {
                let diag = self.mat.read_tile(k, k)?;
                let a = self.mat.read_tile(task.row, k)?;
                let l = kernels::compute_l(&a, &diag).map_err(&err)?;
                self.mat.write_tile(task.row, k, &l)?;
            }
            TaskKind::U => {
                let j = task.col;
                let c0 = j * p.b;
                kernels::apply_swaps(
                    self.mat,
                    self.pivots(k)?,
                    c0..c0 + p.block_width(j),
                    SwapDirection::Right,
                )?;
                let diag = self.mat.read_tile(k, k)?;
                let a = self.mat.read_tile(k, j)?;
                let u = kernels::compute_u(&diag, &a)?;
                self.mat.write_tile(k, j, &u)?;
            }
            TaskKind::S => {
                let mut a = self.mat.read_tile(task.row, task.col)?;
                let l = self.mat.read_tile(task.row, k)?;
                let u = self.mat.read_tile(k, task.col)?;
                kernels::update(&mut a, &l, &u)?;
                self.mat.write_tile(task.row, task.col, &a)?;
            }
        }
        Ok(())
    }

    fn pivots(&self, step: usize) -> Result<&PanelSwaps> {
        self.pivots
            .get(step)
            .and_then(OnceLock::get)
            .ok_or_else(|| {
                CaluError::Config(format!("pivots of panel {} are not available", step + 1))
            })
    }

    /// Applies each panel's swaps to the columns left of it and returns all
    /// pivots plus the global row permutation.
    pub fn finish(&self) -> Result<(Vec<PanelSwaps>, PermutationVector)> {
        let p = self.mat.partition();
        let mut all = Vec::with_capacity(self.pivots.len());
        let mut perm: Vec<usize> = (0..p.m).collect();
        for k in 0..self.pivots.len() {
            let piv = self.pivots(k)?.clone();
            if piv.panel_cols.start > 0 {
                kernels::apply_swaps(self.mat, &piv, 0..piv.panel_cols.start, SwapDirection::Left)?;
            }
            for (i, &s) in piv.swaps.iter().enumerate() {
                perm.swap(piv.row_offset + i, piv.row_offset + s);
            }
            all.push(piv);
        }
        Ok((all, PermutationVector(perm)))
    }
}
