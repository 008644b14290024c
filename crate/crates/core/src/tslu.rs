//! Tournament pivoting for tall-skinny panels.
//!
//! The panel rows are cut into contiguous chunks (the leaves). Each leaf
//! ranks its rows with GEPP and keeps its first `k` pivot rows; pairs of
//! candidate sets are stacked (left above right) and ranked again, level by
//! level, until one set of `k` rows remains. Those rows are moved to the top
//! of the panel, which is then factored without pivoting.

use std::ops::Range;

use crate::error::{CaluError, Result};
use crate::kernels::{self, PanelLU, PermutationVector};
use crate::matrix::DenseMatrix;

/// Fixed binary reduction tree over `leaves.len()` contiguous row chunks.
///
/// The shape depends only on the panel height, width and requested leaf
/// count, never on which worker runs which node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReductionTree {
    pub leaves: Vec<Range<usize>>,
}

impl ReductionTree {
    /// Splits `rows` into `leaves` near-equal chunks. The leaf count is
    /// reduced to `floor(rows / width)` (at least 1) so no chunk is shorter
    /// than the panel width.
    pub fn new(rows: usize, width: usize, leaves: usize) -> Self {
        let cap = rows.checked_div(width).map_or(1, |c| c.max(1));
        let t = leaves.clamp(1, cap);
        let leaves = (0..t)
            .map(|i| (i * rows / t)..((i + 1) * rows / t))
            .collect();
        Self { leaves }
    }

    pub fn leaf_count(&self) -> usize {
        self.leaves.len()
    }

    /// Number of merge levels above the leaves.
    pub fn depth(&self) -> usize {
        let mut n = self.leaves.len();
        let mut d = 0;
        while n > 1 {
            n = n.div_ceil(2);
            d += 1;
        }
        d
    }
}

/// Factored panel: pivots, the stacked `L` factor and the `U` head.
#[derive(Debug, Clone, PartialEq)]
pub struct PanelResult {
    pub pivots: PermutationVector,
    /// Swap sequence equivalent to `pivots`.
    pub swaps: Vec<usize>,
    /// Combined factors of the permuted panel (`L` below, `U` on and above the diagonal).
    pub lu: DenseMatrix,
}

impl PanelResult {
    pub fn l_panel(&self) -> DenseMatrix {
        self.lu.split_lu().0
    }

    pub fn u_head(&self) -> DenseMatrix {
        self.lu.split_lu().1
    }

    /// Same data in the shape [`kernels::gepp`] returns.
    pub fn as_panel_lu(&self) -> PanelLU {
        PanelLU {
            lu: self.lu.clone(),
            swaps: self.swaps.clone(),
            perm: self.pivots.clone(),
        }
    }
}

fn stack_rows(panel: &DenseMatrix, rows: &[usize]) -> DenseMatrix {
    DenseMatrix::from_fn(rows.len(), panel.cols(), |i, j| panel[(rows[i], j)])
}

/// Selects `min(rows, cols)` pivot rows of `panel` by tournament over
/// `leaves` chunks. Returns original row indices in pivot order.
pub fn tournament_pivots(panel: &DenseMatrix, leaves: usize, cutoff: usize) -> Result<Vec<usize>> {
    if panel.rows() == 0 || panel.cols() == 0 {
        return Err(CaluError::InvalidDimension("empty panel".into()));
    }
    let tree = ReductionTree::new(panel.rows(), panel.cols(), leaves);
    let mut level: Vec<Vec<usize>> = tree
        .leaves
        .iter()
        .map(|chunk| {
            let ids: Vec<usize> = chunk.clone().collect();
            kernels::select_pivot_rows(&stack_rows(panel, &ids), &ids, cutoff)
        })
        .collect();
    while level.len() > 1 {
        let mut next = Vec::with_capacity(level.len().div_ceil(2));
        let mut it = level.into_iter();
        while let Some(left) = it.next() {
            match it.next() {
                Some(right) => {
                    let mut ids = left;
                    ids.extend(right);
                    next.push(kernels::select_pivot_rows(
                        &stack_rows(panel, &ids),
                        &ids,
                        cutoff,
                    ));
                }
                None => next.push(left),
            }
        }
        level = next;
    }
    Ok(level.pop().unwrap_or_default())
}

/// Swap sequence moving `selected` rows (in order) to the top of an `n`-row panel.
pub fn swaps_for_selection(n: usize, selected: &[usize]) -> Vec<usize> {
    let mut current: Vec<usize> = (0..n).collect();
    let mut position: Vec<usize> = (0..n).collect();
    let mut swaps = Vec::with_capacity(selected.len());
    for (i, &row) in selected.iter().enumerate() {
        let p = position[row];
        swaps.push(p);
        let (ri, rp) = (current[i], current[p]);
        current.swap(i, p);
        position[ri] = p;
        position[rp] = i;
    }
    swaps
}

/// Full panel factorization: tournament pivots, then LU without pivoting of
/// the permuted panel.
pub fn tslu_factor(panel: &DenseMatrix, leaves: usize, cutoff: usize) -> Result<PanelResult> {
    let selected = tournament_pivots(panel, leaves, cutoff)?;
    let k = selected.len();
    let swaps = swaps_for_selection(panel.rows(), &selected);
    let mut lu = panel.clone();
    kernels::apply_row_swaps(&mut lu, 0, &swaps)?;
    let col_ref: Vec<f64> = (0..panel.cols())
        .map(|j| panel.col(j).iter().fold(0.0_f64, |m, v| m.max(v.abs())))
        .collect();
    kernels::lu_nopivot(&mut lu, &col_ref, cutoff).map_err(|e| match e {
        CaluError::SingularPanel { column } => CaluError::StructurallySingular {
            needed: k,
            found: column,
        },
        other => other,
    })?;
    let pivots = PermutationVector::from_swaps(panel.rows(), &swaps)?;
    Ok(PanelResult { pivots, swaps, lu })
}
