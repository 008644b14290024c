//! Benchmark fixtures.

use calu_core::dag::TaskGraph;
use calu_core::kernels::{compute_l, compute_u, lu_nopivot, DEFAULT_RECURSION_CUTOFF};
use calu_core::matrix::random_gaussian;
use calu_core::{DenseMatrix, LayoutKind, LayoutMatrix, Partition, SchedulerConfig};

/// Tall panel of `rows x cols` Gaussian entries.
pub fn panel(rows: usize, cols: usize) -> DenseMatrix {
    random_gaussian(rows, cols, 42)
}

/// Factored diagonal tile with an `L` block below it and a `U` block to its
/// right, ready for an update of a `b x b` tile.
pub fn update_operands(b: usize) -> (DenseMatrix, DenseMatrix, DenseMatrix) {
    let mut diag = random_gaussian(b, b, 1);
    for i in 0..b {
        diag[(i, i)] += b as f64;
    }
    let col_ref = vec![diag.max_abs(); b];
    lu_nopivot(&mut diag, &col_ref, DEFAULT_RECURSION_CUTOFF).expect("dominant tile");
    let l = compute_l(&random_gaussian(b, b, 2), &diag).expect("square tiles");
    let u = compute_u(&diag, &random_gaussian(b, b, 3)).expect("square tiles");
    (random_gaussian(b, b, 4), l, u)
}

/// `n x n` matrix stored in `kind` for the grid of `cfg`.
pub fn layout_matrix(n: usize, b: usize, kind: LayoutKind, cfg: &SchedulerConfig) -> LayoutMatrix {
    LayoutMatrix::from_dense(&random_gaussian(n, n, 7), b, kind, cfg.grid()).expect("valid layout")
}

/// Task graph of an `nb x nb` tile grid under `cfg`.
pub fn graph(nb: usize, cfg: &SchedulerConfig) -> TaskGraph {
    TaskGraph::build(&Partition::new(nb, nb, 1).expect("valid"), cfg.n_static(nb)).expect("acyclic")
}

#[cfg(test)]
mod tests {
    use super::*;
    use calu_core::scheduler::Policy;

    #[test]
    fn fixtures_are_consistent() {
        let (a, l, u) = update_operands(16);
        assert_eq!((a.rows(), l.cols(), u.rows()), (16, 16, 16));
        let cfg = SchedulerConfig::new(Policy::Hybrid, 4, 0.25);
        assert_eq!(
            layout_matrix(32, 8, LayoutKind::BlockCyclic, &cfg)
                .partition()
                .block_cols,
            4
        );
        assert_eq!(graph(4, &cfg).n_static(), 3);
    }
}
