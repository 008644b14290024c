//! Sequential dense kernels executed by the factorization tasks.
//!
//! Every kernel applies the same per-element recurrence: an entry receives
//! its rank-one corrections `a -= l * u` one term at a time in increasing
//! elimination index, and entries below the diagonal are then divided by the
//! pivot. Because that order never depends on blocking, recursion depth or
//! the order in which *other* tiles are processed, a factorization computed
//! tile by tile under any schedule is bitwise identical to the same
//! factorization computed in one piece.

use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{CaluError, Result};
use crate::layout::LayoutMatrix;
use crate::matrix::DenseMatrix;

/// Default column count below which recursive GEPP switches to right-looking elimination.
pub const DEFAULT_RECURSION_CUTOFF: usize = 8;

/// A pivot is treated as zero when `|pivot| <= SINGULAR_TOL_FACTOR * eps * max|column|`.
pub const SINGULAR_TOL_FACTOR: f64 = 64.0;

/// `perm[i]` is the original row placed at position `i`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PermutationVector(pub Vec<usize>);

impl PermutationVector {
    pub fn identity(n: usize) -> Self {
        Self((0..n).collect())
    }

    /// Permutation produced by applying LAPACK-style swaps (`row i <-> row swaps[i]`) in order.
    pub fn from_swaps(n: usize, swaps: &[usize]) -> Result<Self> {
        let mut perm: Vec<usize> = (0..n).collect();
        for (i, &s) in swaps.iter().enumerate() {
            if s >= n || i >= n {
                return Err(CaluError::PermutationOutOfRange {
                    entry: s.max(i),
                    len: n,
                });
            }
            perm.swap(i, s);
        }
        Ok(Self(perm))
    }

    /// Swap sequence realising this permutation.
    pub fn to_swaps(&self) -> Result<Vec<usize>> {
        if !self.is_bijection() {
            return Err(CaluError::PermutationOutOfRange {
                entry: self.0.iter().copied().max().unwrap_or(0),
                len: self.0.len(),
            });
        }
        let n = self.0.len();
        let mut current: Vec<usize> = (0..n).collect();
        let mut position: Vec<usize> = (0..n).collect();
        let mut swaps = Vec::with_capacity(n);
        for i in 0..n {
            let p = position[self.0[i]];
            swaps.push(p);
            let (ri, rp) = (current[i], current[p]);
            current.swap(i, p);
            position[ri] = p;
            position[rp] = i;
        }
        Ok(swaps)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_bijection(&self) -> bool {
        let mut seen = vec![false; self.0.len()];
        for &p in &self.0 {
            if p >= seen.len() || seen[p] {
                return false;
            }
            seen[p] = true;
        }
        true
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }
}

/// Output of a pivoted panel factorization: combined `L\U` factors in place,
/// the swap sequence and the resulting permutation.
#[derive(Debug, Clone, PartialEq)]
pub struct PanelLU {
    pub lu: DenseMatrix,
    pub swaps: Vec<usize>,
    pub perm: PermutationVector,
}

impl PanelLU {
    /// Unit-lower factor, `rows x min(rows, cols)`.
    pub fn l(&self) -> DenseMatrix {
        self.lu.split_lu().0
    }

    pub fn u(&self) -> DenseMatrix {
        self.lu.split_lu().1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Pivoting {
    /// Partial pivoting; fail on a pivot below the singularity threshold.
    Strict,
    /// Partial pivoting used only to rank rows; zero columns are skipped.
    Selection,
    /// Diagonal pivots; fail on a pivot below the threshold.
    None,
}

struct Elimination<'a> {
    a: &'a mut DenseMatrix,
    ids: &'a mut [usize],
    swaps: Vec<usize>,
    col_ref: Vec<f64>,
    cutoff: usize,
    mode: Pivoting,
}

impl Elimination<'_> {
    fn threshold(&self, j: usize) -> f64 {
        SINGULAR_TOL_FACTOR * f64::EPSILON * self.col_ref[j]
    }

    /// Factor columns `start..start + ncols`, rows `start..`.
    fn factor(&mut self, start: usize, ncols: usize) -> Result<()> {
        if ncols <= self.cutoff.max(1) {
            return self.right_looking(start, ncols);
        }
        let n1 = ncols / 2;
        let n2 = ncols - n1;
        self.factor(start, n1)?;
        // A12 <- L11^{-1} A12
        let mid = start + n1;
        for j in mid..mid + n2 {
            for k in start..mid {
                let ukj = self.a[(k, j)];
                for i in k + 1..mid {
                    let lik = self.a[(i, k)];
                    self.a[(i, j)] -= lik * ukj;
                }
            }
        }
        // A22 <- A22 - L21 A12
        let m = self.a.rows();
        for j in mid..mid + n2 {
            for k in start..mid {
                let ukj = self.a[(k, j)];
                for i in mid..m {
                    let lik = self.a[(i, k)];
                    self.a[(i, j)] -= lik * ukj;
                }
            }
        }
        self.factor(mid, n2)
    }

    fn pick_pivot(&self, j: usize) -> usize {
        let m = self.a.rows();
        let col = self.a.col(j);
        let mut best = j;
        let mut best_abs = col[j].abs();
        for (i, v) in col.iter().enumerate().take(m).skip(j + 1) {
            let mag = v.abs();
            if mag > best_abs || (mag == best_abs && self.ids[i] < self.ids[best]) {
                best = i;
                best_abs = mag;
            }
        }
        best
    }

    fn right_looking(&mut self, start: usize, ncols: usize) -> Result<()> {
        let m = self.a.rows();
        let end = start + ncols;
        for j in start..end {
            let p = match self.mode {
                Pivoting::None => j,
                Pivoting::Strict | Pivoting::Selection => self.pick_pivot(j),
            };
            if p != j {
                self.a.swap_rows(j, p);
                self.ids.swap(j, p);
            }
            self.swaps.push(p);
            let pivot = self.a[(j, j)];
            match self.mode {
                Pivoting::Selection => {
                    if pivot == 0.0 {
                        continue;
                    }
                }
                Pivoting::Strict | Pivoting::None => {
                    if pivot == 0.0 || pivot.abs() <= self.threshold(j) || !pivot.is_finite() {
                        return Err(CaluError::SingularPanel { column: j });
                    }
                }
            }
            for i in j + 1..m {
                self.a[(i, j)] /= pivot;
            }
            for jj in j + 1..end {
                let ujj = self.a[(j, jj)];
                for i in j + 1..m {
                    let lij = self.a[(i, j)];
                    self.a[(i, jj)] -= lij * ujj;
                }
            }
        }
        Ok(())
    }
}

fn column_max(a: &DenseMatrix) -> Vec<f64> {
    (0..a.cols())
        .map(|j| a.col(j).iter().fold(0.0_f64, |m, v| m.max(v.abs())))
        .collect()
}

fn eliminate(
    a: &mut DenseMatrix,
    ids: &mut [usize],
    cutoff: usize,
    mode: Pivoting,
    col_ref: Vec<f64>,
) -> Result<Vec<usize>> {
    let (m, n) = (a.rows(), a.cols());
    let k = m.min(n);
    let mut e = Elimination {
        a,
        ids,
        swaps: Vec::with_capacity(k),
        col_ref,
        cutoff,
        mode,
    };
    e.factor(0, k)?;
    // Wide panels: the columns past k only need the unit-lower solve.
    for j in k..n {
        for kk in 0..k {
            let ukj = e.a[(kk, j)];
            for i in kk + 1..k {
                let lik = e.a[(i, kk)];
                e.a[(i, j)] -= lik * ukj;
            }
        }
    }
    Ok(e.swaps)
}

/// Recursive LU with partial pivoting on an `r x c` panel.
///
/// Columns are split in half down to `cutoff`, below which right-looking
/// elimination takes over. Ties in pivot magnitude go to the lowest row index.
pub fn gepp(panel: &DenseMatrix, cutoff: usize) -> Result<PanelLU> {
    let mut lu = panel.clone();
    let mut ids: Vec<usize> = (0..panel.rows()).collect();
    let col_ref = column_max(panel);
    let swaps = eliminate(&mut lu, &mut ids, cutoff, Pivoting::Strict, col_ref)?;
    Ok(PanelLU {
        lu,
        swaps,
        perm: PermutationVector(ids),
    })
}

/// Ranks the rows of `candidates` by GEPP and returns the ids of the first
/// `min(rows, cols)` pivot rows in pivot order. `ids[i]` names row `i` and
/// breaks magnitude ties. Zero columns do not fail; they keep the lowest id.
pub fn select_pivot_rows(candidates: &DenseMatrix, ids: &[usize], cutoff: usize) -> Vec<usize> {
    debug_assert_eq!(candidates.rows(), ids.len());
    let mut work = candidates.clone();
    let mut ids = ids.to_vec();
    let col_ref = column_max(candidates);
    eliminate(&mut work, &mut ids, cutoff, Pivoting::Selection, col_ref)
        .expect("selection elimination never fails");
    let k = candidates.rows().min(candidates.cols());
    ids.truncate(k);
    ids
}

/// LU without pivoting, in place. `col_ref[j]` is the magnitude the
/// singularity threshold of column `j` is scaled by.
pub fn lu_nopivot(a: &mut DenseMatrix, col_ref: &[f64], cutoff: usize) -> Result<()> {
    let mut ids: Vec<usize> = (0..a.rows()).collect();
    eliminate(a, &mut ids, cutoff, Pivoting::None, col_ref.to_vec()).map(|_| ())
}

/// `U_KJ = L_KK^{-1} A_KJ`, forward substitution with the unit-lower part of
/// the leading `r x r` block of `l`, where `r = a.rows()`.
pub fn compute_u(l: &DenseMatrix, a: &DenseMatrix) -> Result<DenseMatrix> {
    let r = a.rows();
    if l.rows() < r || l.cols() < r {
        return Err(CaluError::ShapeMismatch(format!(
            "L block {}x{} cannot solve {} rows",
            l.rows(),
            l.cols(),
            r
        )));
    }
    let mut u = a.clone();
    for j in 0..u.cols() {
        for k in 0..r {
            let ukj = u[(k, j)];
            for i in k + 1..r {
                let lik = l[(i, k)];
                u[(i, j)] -= lik * ukj;
            }
        }
    }
    Ok(u)
}

/// `L_IK = A_IK U_KK^{-1}`, substitution from the right with the upper part of
/// the leading `c x c` block of `u`, where `c = a.cols()`.
pub fn compute_l(a: &DenseMatrix, u: &DenseMatrix) -> Result<DenseMatrix> {
    let c = a.cols();
    if u.rows() < c || u.cols() < c {
        return Err(CaluError::ShapeMismatch(format!(
            "U block {}x{} cannot solve {} columns",
            u.rows(),
            u.cols(),
            c
        )));
    }
    let mut l = a.clone();
    let m = l.rows();
    for j in 0..c {
        let ujj = u[(j, j)];
        if ujj == 0.0 {
            return Err(CaluError::SingularU { index: j });
        }
        for k in 0..j {
            let ukj = u[(k, j)];
            for i in 0..m {
                let lik = l[(i, k)];
                l[(i, j)] -= lik * ukj;
            }
        }
        for v in l.col_mut(j) {
            *v /= ujj;
        }
    }
    Ok(l)
}

/// Trailing update `A_IJ -= L_IK U_KJ`.
///
/// Each entry of the result receives the products for `l = 0, 1, ...` in
/// that order, whatever the loop nest looks like in memory.
pub fn update(a: &mut DenseMatrix, l: &DenseMatrix, u: &DenseMatrix) -> Result<()> {
    if a.rows() != l.rows() || a.cols() != u.cols() || l.cols() != u.rows() {
        return Err(CaluError::ShapeMismatch(format!(
            "{}x{} -= {}x{} * {}x{}",
            a.rows(),
            a.cols(),
            l.rows(),
            l.cols(),
            u.rows(),
            u.cols()
        )));
    }
    let inner = l.cols();
    for j in 0..a.cols() {
        for k in 0..inner {
            let ukj = u[(k, j)];
            let lk = l.col(k);
            let aj = a.col_mut(j);
            for (av, lv) in aj.iter_mut().zip(lk) {
                *av -= lv * ukj;
            }
        }
    }
    Ok(())
}

/// Applies one update call to a group of tiles sharing `U_KJ`. Per-tile
/// results are bitwise identical to calling [`update`] on each tile.
pub fn update_group(tiles: &mut [DenseMatrix], ls: &[&DenseMatrix], u: &DenseMatrix) -> Result<()> {
    if tiles.len() != ls.len() {
        return Err(CaluError::ShapeMismatch(format!(
            "{} tiles with {} L blocks",
            tiles.len(),
            ls.len()
        )));
    }
    for (t, l) in tiles.iter_mut().zip(ls) {
        update(t, l, u)?;
    }
    Ok(())
}

/// Applies a swap sequence to a dense matrix, starting at `row_offset`.
pub fn apply_row_swaps(a: &mut DenseMatrix, row_offset: usize, swaps: &[usize]) -> Result<()> {
    let m = a.rows();
    for (i, &s) in swaps.iter().enumerate() {
        let (r1, r2) = (row_offset + i, row_offset + s);
        if r1 >= m || r2 >= m {
            return Err(CaluError::PermutationOutOfRange {
                entry: r2.max(r1),
                len: m,
            });
        }
        a.swap_rows(r1, r2);
    }
    Ok(())
}

/// Which side of the panel a swap pass targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SwapDirection {
    /// Columns right of the panel, applied during step `K`.
    Right,
    /// Already-computed `L` columns left of the panel, applied at the end.
    Left,
}

/// Pivots of one panel step in global row coordinates.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PanelSwaps {
    /// First global row of the panel.
    pub row_offset: usize,
    /// Global column range of the panel.
    pub panel_cols: Range<usize>,
    /// `swaps[i]`: local row exchanged with local row `i`, applied in order.
    pub swaps: Vec<usize>,
}

/// Exchanges rows of `mat` per `pivots` inside the column range `cols` only.
pub fn apply_swaps(
    mat: &LayoutMatrix,
    pivots: &PanelSwaps,
    cols: Range<usize>,
    direction: SwapDirection,
) -> Result<()> {
    let p = mat.partition();
    if cols.end > p.n {
        return Err(CaluError::ShapeMismatch(format!(
            "column range {cols:?} beyond {} columns",
            p.n
        )));
    }
    let ok = match direction {
        SwapDirection::Right => cols.start >= pivots.panel_cols.end || cols.is_empty(),
        SwapDirection::Left => cols.end <= pivots.panel_cols.start || cols.is_empty(),
    };
    if !ok {
        return Err(CaluError::ShapeMismatch(format!(
            "{direction:?} swaps on columns {cols:?} overlap panel {:?}",
            pivots.panel_cols
        )));
    }
    for (i, &s) in pivots.swaps.iter().enumerate() {
        let (r1, r2) = (pivots.row_offset + i, pivots.row_offset + s);
        if r1 >= p.m || r2 >= p.m {
            return Err(CaluError::PermutationOutOfRange {
                entry: r1.max(r2),
                len: p.m,
            });
        }
        if r1 == r2 {
            continue;
        }
        for c in cols.clone() {
            let (x, y) = (mat.get(r1, c), mat.get(r2, c));
            mat.set(r1, c, y);
            mat.set(r2, c, x);
        }
    }
    Ok(())
}

/// Growth of a panel factorization: max|U| / max|A|.
pub fn panel_growth(panel: &DenseMatrix, lu: &DenseMatrix) -> f64 {
    crate::matrix::growth_factor(panel, lu)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::layout::{LayoutKind, ThreadGrid};
    use crate::matrix::{random_gaussian, relative_residual};

    /// Textbook right-looking GEPP with explicit row exchanges, no recursion.
    fn naive_gepp(a: &DenseMatrix) -> (DenseMatrix, Vec<usize>) {
        let mut a = a.clone();
        let (m, n) = (a.rows(), a.cols());
        let mut perm: Vec<usize> = (0..m).collect();
        for j in 0..m.min(n) {
            let mut p = j;
            for i in j + 1..m {
                if a[(i, j)].abs() > a[(p, j)].abs() {
                    p = i;
                }
            }
            a.swap_rows(j, p);
            perm.swap(j, p);
            for i in j + 1..m {
                a[(i, j)] /= a[(j, j)];
            }
            for jj in j + 1..n {
                for i in j + 1..m {
                    let t = a[(i, j)] * a[(j, jj)];
                    a[(i, jj)] -= t;
                }
            }
        }
        (a, perm)
    }

    #[test]
    fn gepp_permutation_matrix() {
        let a = DenseMatrix::from_rows(&[&[0.0, 1.0], &[1.0, 0.0]]);
        let f = gepp(&a, 8).unwrap();
        assert_eq!(f.perm.0, vec![1, 0]);
        assert_eq!(f.l(), DenseMatrix::identity(2));
        assert_eq!(f.u(), DenseMatrix::identity(2));
    }

    #[test]
    fn gepp_small_example_matches_naive() {
        let a = DenseMatrix::from_rows(&[&[2.0, 1.0], &[4.0, 3.0]]);
        let f = gepp(&a, 8).unwrap();
        let (naive, perm) = naive_gepp(&a);
        assert_eq!(f.perm.0, perm);
        assert!(f.lu.bitwise_eq(&naive));
        assert_eq!(f.perm.0, vec![1, 0]);
        assert_eq!(f.l(), DenseMatrix::from_rows(&[&[1.0, 0.0], &[0.5, 1.0]]));
        assert_eq!(f.u(), DenseMatrix::from_rows(&[&[4.0, 3.0], &[0.0, -0.5]]));
    }

    #[test]
    fn gepp_recursive_equals_right_looking_bitwise() {
        for seed in 0..20 {
            let a = random_gaussian(64, 16, seed);
            let rec = gepp(&a, 2).unwrap();
            let flat = gepp(&a, 64).unwrap();
            let (naive, perm) = naive_gepp(&a);
            assert!(rec.lu.bitwise_eq(&flat.lu));
            assert!(rec.lu.bitwise_eq(&naive));
            assert_eq!(rec.perm.0, perm);
        }
    }

    #[test]
    fn gepp_residual_on_random_panel() {
        let a = random_gaussian(64, 8, 3);
        let f = gepp(&a, DEFAULT_RECURSION_CUTOFF).unwrap();
        let res = relative_residual(&a, &f.lu, &f.perm.0).unwrap();
        assert!(res <= 32.0 * f64::EPSILON, "residual {res}");
        for j in 0..8 {
            for i in j + 1..64 {
                assert!(f.lu[(i, j)].abs() <= 1.0);
            }
        }
    }

    #[test]
    fn gepp_wide_panel() {
        let a = random_gaussian(3, 7, 4);
        let f = gepp(&a, 2).unwrap();
        let res = relative_residual(&a, &f.lu, &f.perm.0).unwrap();
        assert!(res <= 32.0 * f64::EPSILON);
        let (naive, _) = naive_gepp(&a);
        assert!(f.lu.bitwise_eq(&naive));
    }

    #[test]
    fn gepp_reports_singular_column() {
        let a = DenseMatrix::from_rows(&[&[1.0, 2.0, 0.0], &[2.0, 4.0, 1.0], &[3.0, 6.0, 5.0]]);
        assert_eq!(gepp(&a, 8), Err(CaluError::SingularPanel { column: 1 }));
    }

    #[test]
    fn gepp_tie_goes_to_lowest_row() {
        let a = DenseMatrix::from_rows(&[&[1.0], &[-3.0], &[3.0]]);
        assert_eq!(gepp(&a, 8).unwrap().perm.0[0], 1);
    }

    #[test]
    fn gepp_growth_is_modest_for_gaussian() {
        let a = random_gaussian(64, 64, 17);
        let f = gepp(&a, DEFAULT_RECURSION_CUTOFF).unwrap();
        let g = panel_growth(&a, &f.lu);
        assert!(g.is_finite() && g < 64.0, "growth {g}");
    }

    #[test]
    fn compute_u_examples() {
        let a = random_gaussian(4, 4, 1);
        assert_eq!(compute_u(&DenseMatrix::identity(4), &a).unwrap(), a);
        let l = DenseMatrix::from_rows(&[&[1.0, 0.0], &[0.5, 1.0]]);
        let a = DenseMatrix::from_rows(&[&[4.0, 3.0], &[2.0, 1.5]]);
        assert_eq!(
            compute_u(&l, &a).unwrap(),
            DenseMatrix::from_rows(&[&[4.0, 3.0], &[0.0, 0.0]])
        );
    }

    fn unit_lower(n: usize, seed: u64) -> DenseMatrix {
        let r = random_gaussian(n, n, seed);
        DenseMatrix::from_fn(n, n, |i, j| match i.cmp(&j) {
            std::cmp::Ordering::Greater => r[(i, j)] * 0.5,
            std::cmp::Ordering::Equal => 1.0,
            std::cmp::Ordering::Less => 0.0,
        })
    }

    fn upper(n: usize, seed: u64) -> DenseMatrix {
        let r = random_gaussian(n, n, seed);
        DenseMatrix::from_fn(n, n, |i, j| match i.cmp(&j) {
            std::cmp::Ordering::Less => r[(i, j)],
            std::cmp::Ordering::Equal => 2.0 + r[(i, j)].abs(),
            std::cmp::Ordering::Greater => 0.0,
        })
    }

    #[test]
    fn compute_u_residual() {
        let l = unit_lower(8, 5);
        let a = random_gaussian(8, 8, 6);
        let u = compute_u(&l, &a).unwrap();
        let back = l.matmul(&u).unwrap();
        let mut diff = 0.0;
        for (x, y) in back.as_slice().iter().zip(a.as_slice()) {
            diff += (x - y).powi(2);
        }
        assert!(diff.sqrt() <= 16.0 * f64::EPSILON * a.frobenius_norm());
    }

    #[test]
    fn compute_l_examples_and_residual() {
        let a = random_gaussian(8, 8, 7);
        assert_eq!(compute_l(&a, &DenseMatrix::identity(8)).unwrap(), a);
        let two = DenseMatrix::from_fn(8, 8, |i, j| if i == j { 2.0 } else { 0.0 });
        let half = DenseMatrix::from_fn(8, 8, |i, j| a[(i, j)] * 0.5);
        assert_eq!(compute_l(&a, &two).unwrap(), half);

        let u = upper(8, 9);
        let l = compute_l(&a, &u).unwrap();
        let back = l.matmul(&u).unwrap();
        let mut diff = 0.0;
        for (x, y) in back.as_slice().iter().zip(a.as_slice()) {
            diff += (x - y).powi(2);
        }
        assert!(diff.sqrt() <= 16.0 * f64::EPSILON * a.frobenius_norm());
    }

    #[test]
    fn compute_l_reports_zero_pivot() {
        let a = random_gaussian(3, 3, 1);
        let mut u = DenseMatrix::identity(3);
        u[(1, 1)] = 0.0;
        assert_eq!(compute_l(&a, &u), Err(CaluError::SingularU { index: 1 }));
    }

    #[test]
    fn update_examples() {
        let a0 = random_gaussian(4, 4, 2);
        let mut a = a0.clone();
        update(&mut a, &DenseMatrix::zeros(4, 4), &random_gaussian(4, 4, 3)).unwrap();
        assert_eq!(a, a0);

        let mut id = DenseMatrix::identity(2);
        update(
            &mut id,
            &DenseMatrix::identity(2),
            &DenseMatrix::identity(2),
        )
        .unwrap();
        assert_eq!(id, DenseMatrix::zeros(2, 2));
    }

    #[test]
    fn grouped_update_is_bitwise_identical() {
        let u = random_gaussian(5, 5, 100);
        let ls: Vec<DenseMatrix> = (0..3).map(|s| random_gaussian(5, 5, 200 + s)).collect();
        let tiles: Vec<DenseMatrix> = (0..3).map(|s| random_gaussian(5, 5, 300 + s)).collect();

        let mut one_by_one = tiles.clone();
        for (t, l) in one_by_one.iter_mut().zip(&ls) {
            update(t, l, &u).unwrap();
        }
        let mut grouped = tiles;
        let lrefs: Vec<&DenseMatrix> = ls.iter().collect();
        update_group(&mut grouped, &lrefs, &u).unwrap();
        for (a, b) in one_by_one.iter().zip(&grouped) {
            assert!(a.bitwise_eq(b));
        }
    }

    #[test]
    fn update_order_matches_textbook_i_j_l() {
        let mut a = random_gaussian(6, 5, 1);
        let l = random_gaussian(6, 4, 2);
        let u = random_gaussian(4, 5, 3);
        let mut reference = a.clone();
        for i in 0..6 {
            for j in 0..5 {
                for k in 0..4 {
                    reference[(i, j)] -= l[(i, k)] * u[(k, j)];
                }
            }
        }
        update(&mut a, &l, &u).unwrap();
        assert!(a.bitwise_eq(&reference));
    }

    #[test]
    fn permutation_vector_swaps_round_trip() {
        let p = PermutationVector(vec![2, 0, 3, 1]);
        let swaps = p.to_swaps().unwrap();
        assert_eq!(PermutationVector::from_swaps(4, &swaps).unwrap(), p);
        assert!(!PermutationVector(vec![0, 0]).is_bijection());
    }

    #[test]
    fn apply_swaps_on_layout() {
        let g = ThreadGrid::new(1, 1).unwrap();
        let id = LayoutMatrix::from_dense(&DenseMatrix::identity(2), 1, LayoutKind::ColumnMajor, g)
            .unwrap();
        let unchanged = PanelSwaps {
            row_offset: 0,
            panel_cols: 0..0,
            swaps: vec![0, 1],
        };
        apply_swaps(&id, &unchanged, 0..2, SwapDirection::Right).unwrap();
        assert_eq!(id.to_dense(), DenseMatrix::identity(2));

        let perm = PermutationVector(vec![1, 0]);
        let swap = PanelSwaps {
            row_offset: 0,
            panel_cols: 0..0,
            swaps: perm.to_swaps().unwrap(),
        };
        apply_swaps(&id, &swap, 0..2, SwapDirection::Right).unwrap();
        assert_eq!(
            id.to_dense(),
            DenseMatrix::from_rows(&[&[0.0, 1.0], &[1.0, 0.0]])
        );

        let bad = PanelSwaps {
            row_offset: 1,
            panel_cols: 0..0,
            swaps: vec![3],
        };
        assert!(matches!(
            apply_swaps(&id, &bad, 0..2, SwapDirection::Right),
            Err(CaluError::PermutationOutOfRange { .. })
        ));
        let left = PanelSwaps {
            row_offset: 0,
            panel_cols: 0..1,
            swaps: vec![1],
        };
        assert!(apply_swaps(&id, &left, 0..2, SwapDirection::Left).is_err());
    }

    #[test]
    fn lu_nopivot_flags_zero_diagonal() {
        let mut a = DenseMatrix::from_rows(&[&[0.0, 1.0], &[1.0, 0.0]]);
        let r = column_max(&a);
        assert_eq!(
            lu_nopivot(&mut a, &r, 8),
            Err(CaluError::SingularPanel { column: 0 })
        );
    }

    #[test]
    fn selection_tolerates_zero_columns() {
        let a = DenseMatrix::zeros(3, 2);
        assert_eq!(select_pivot_rows(&a, &[5, 6, 7], 8), vec![5, 6]);
    }
}
