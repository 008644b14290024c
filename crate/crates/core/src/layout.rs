//! Matrix storage under three physical layouts with uniform tile addressing.
//!
//! Block indices are 0-based here; block `(I, J)` in 1-based notation is
//! `(I - 1, J - 1)`. Every layout keeps each tile column contiguous, so tile
//! copies move one run of `height` elements per column.

use std::fmt;
use std::str::FromStr;
use std::sync::atomic::{AtomicU64, Ordering};

use serde::{Deserialize, Serialize};

use crate::error::{CaluError, Result};
use crate::matrix::DenseMatrix;

/// Decomposition of an `m x n` matrix into `b x b` tiles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Partition {
    pub m: usize,
    pub n: usize,
    pub b: usize,
    /// Block rows, `ceil(m / b)`.
    pub block_rows: usize,
    /// Block columns, `ceil(n / b)`.
    pub block_cols: usize,
}

impl Partition {
    pub fn new(m: usize, n: usize, b: usize) -> Result<Self> {
        if m == 0 || n == 0 || b == 0 {
            return Err(CaluError::InvalidDimension(format!(
                "m={m}, n={n}, b={b}: all must be positive"
            )));
        }
        if b > m.min(n) {
            return Err(CaluError::InvalidDimension(format!(
                "block size {b} exceeds min(m, n) = {}",
                m.min(n)
            )));
        }
        Ok(Self {
            m,
            n,
            b,
            block_rows: m.div_ceil(b),
            block_cols: n.div_ceil(b),
        })
    }

    /// Number of panel steps, `min(M, N)`.
    pub fn steps(&self) -> usize {
        self.block_rows.min(self.block_cols)
    }

    pub fn block_height(&self, bi: usize) -> usize {
        debug_assert!(bi < self.block_rows);
        (self.m - bi * self.b).min(self.b)
    }

    pub fn block_width(&self, bj: usize) -> usize {
        debug_assert!(bj < self.block_cols);
        (self.n - bj * self.b).min(self.b)
    }

    pub fn block_of(&self, row: usize, col: usize) -> (usize, usize) {
        (row / self.b, col / self.b)
    }

    pub fn check_block(&self, bi: usize, bj: usize) -> Result<()> {
        if bi >= self.block_rows || bj >= self.block_cols {
            return Err(CaluError::BlockOutOfRange {
                row: bi,
                col: bj,
                block_rows: self.block_rows,
                block_cols: self.block_cols,
            });
        }
        Ok(())
    }
}

/// A `rows x cols` grid of workers for the 2D block-cyclic distribution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ThreadGrid {
    pub rows: usize,
    pub cols: usize,
}

impl ThreadGrid {
    pub fn new(rows: usize, cols: usize) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(CaluError::Config(format!(
                "thread grid {rows}x{cols} must be at least 1x1"
            )));
        }
        Ok(Self { rows, cols })
    }

    /// Near-square grid: `rows` is the largest divisor of `workers` not above its square root.
    pub fn for_workers(workers: usize) -> Self {
        let workers = workers.max(1);
        let mut rows = 1;
        let mut d = 1;
        while d * d <= workers {
            if workers.is_multiple_of(d) {
                rows = d;
            }
            d += 1;
        }
        Self {
            rows,
            cols: workers / rows,
        }
    }

    pub fn workers(&self) -> usize {
        self.rows * self.cols
    }

    /// Block-cyclic owner of block `(bi, bj)`.
    #[inline]
    pub fn owner(&self, bi: usize, bj: usize) -> usize {
        (bi % self.rows) * self.cols + (bj % self.cols)
    }
}

impl fmt::Display for ThreadGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}", self.rows, self.cols)
    }
}

impl FromStr for ThreadGrid {
    type Err = CaluError;

    fn from_str(s: &str) -> Result<Self> {
        let (r, c) = s
            .split_once(['x', 'X'])
            .ok_or_else(|| CaluError::Config(format!("grid '{s}' is not of the form RxC")))?;
        let parse = |t: &str| {
            t.trim()
                .parse::<usize>()
                .map_err(|_| CaluError::Config(format!("grid '{s}' is not of the form RxC")))
        };
        ThreadGrid::new(parse(r)?, parse(c)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LayoutKind {
    #[serde(rename = "cm")]
    ColumnMajor,
    #[serde(rename = "bcl")]
    BlockCyclic,
    #[serde(rename = "2l-bl")]
    TwoLevelBlock,
}

impl LayoutKind {
    pub const ALL: [LayoutKind; 3] = [
        LayoutKind::ColumnMajor,
        LayoutKind::BlockCyclic,
        LayoutKind::TwoLevelBlock,
    ];

    pub fn name(self) -> &'static str {
        match self {
            LayoutKind::ColumnMajor => "cm",
            LayoutKind::BlockCyclic => "bcl",
            LayoutKind::TwoLevelBlock => "2l-bl",
        }
    }
}

impl fmt::Display for LayoutKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for LayoutKind {
    type Err = CaluError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "cm" | "column-major" | "colmajor" => Ok(LayoutKind::ColumnMajor),
            "bcl" | "block-cyclic" => Ok(LayoutKind::BlockCyclic),
            "2l-bl" | "2lbl" | "two-level" | "two-level-block" => Ok(LayoutKind::TwoLevelBlock),
            other => Err(CaluError::Config(format!("unknown layout '{other}'"))),
        }
    }
}

/// Dense storage in one of the three layouts.
///
/// Elements live in relaxed atomics so that workers may read and write
/// disjoint tiles through a shared reference. The scheduler orders
/// conflicting tile accesses through its own synchronization; the atomics
/// only make the shared access well defined.
pub struct LayoutMatrix {
    partition: Partition,
    kind: LayoutKind,
    grid: ThreadGrid,
    data: Box<[AtomicU64]>,
    /// Start of each worker's region (BCL / 2l-BL).
    region_offset: Vec<usize>,
    /// Rows held by grid row `pr` across its block rows.
    local_rows: Vec<usize>,
    local_cols: Vec<usize>,
}

impl LayoutMatrix {
    pub fn zeros(partition: Partition, kind: LayoutKind, grid: ThreadGrid) -> Self {
        let local_rows = (0..grid.rows)
            .map(|pr| {
                (pr..partition.block_rows)
                    .step_by(grid.rows)
                    .map(|bi| partition.block_height(bi))
                    .sum()
            })
            .collect::<Vec<usize>>();
        let local_cols = (0..grid.cols)
            .map(|pc| {
                (pc..partition.block_cols)
                    .step_by(grid.cols)
                    .map(|bj| partition.block_width(bj))
                    .sum()
            })
            .collect::<Vec<usize>>();
        let mut region_offset = Vec::with_capacity(grid.workers());
        let mut acc = 0;
        for pr in 0..grid.rows {
            for pc in 0..grid.cols {
                region_offset.push(acc);
                acc += local_rows[pr] * local_cols[pc];
            }
        }
        debug_assert_eq!(acc, partition.m * partition.n);
        let data = (0..partition.m * partition.n)
            .map(|_| AtomicU64::new(0f64.to_bits()))
            .collect();
        Self {
            partition,
            kind,
            grid,
            data,
            region_offset,
            local_rows,
            local_cols,
        }
    }

    pub fn from_dense(
        a: &DenseMatrix,
        b: usize,
        kind: LayoutKind,
        grid: ThreadGrid,
    ) -> Result<Self> {
        let partition = Partition::new(a.rows(), a.cols(), b)?;
        let out = Self::zeros(partition, kind, grid);
        for bj in 0..partition.block_cols {
            for bi in 0..partition.block_rows {
                let (r0, c0) = (bi * b, bj * b);
                let tile = a.submatrix(
                    r0,
                    c0,
                    partition.block_height(bi),
                    partition.block_width(bj),
                );
                out.write_tile(bi, bj, &tile)?;
            }
        }
        Ok(out)
    }

    pub fn partition(&self) -> Partition {
        self.partition
    }

    pub fn kind(&self) -> LayoutKind {
        self.kind
    }

    pub fn grid(&self) -> ThreadGrid {
        self.grid
    }

    /// Storage position of element `(row, col)`.
    pub fn index_of(&self, row: usize, col: usize) -> usize {
        let p = &self.partition;
        debug_assert!(row < p.m && col < p.n);
        match self.kind {
            LayoutKind::ColumnMajor => col * p.m + row,
            LayoutKind::BlockCyclic => {
                let (bi, bj) = p.block_of(row, col);
                let (pr, pc) = (bi % self.grid.rows, bj % self.grid.cols);
                let lr = (bi / self.grid.rows) * p.b + row % p.b;
                let lc = (bj / self.grid.cols) * p.b + col % p.b;
                self.region_offset[pr * self.grid.cols + pc] + lc * self.local_rows[pr] + lr
            }
            LayoutKind::TwoLevelBlock => {
                let (bi, bj) = p.block_of(row, col);
                let (pr, pc) = (bi % self.grid.rows, bj % self.grid.cols);
                let (lbi, lbj) = (bi / self.grid.rows, bj / self.grid.cols);
                let h = p.block_height(bi);
                let w = p.block_width(bj);
                self.region_offset[pr * self.grid.cols + pc]
                    + lbj * p.b * self.local_rows[pr]
                    + lbi * p.b * w
                    + (col % p.b) * h
                    + row % p.b
            }
        }
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        f64::from_bits(self.data[self.index_of(row, col)].load(Ordering::Relaxed))
    }

    #[inline]
    pub fn set(&self, row: usize, col: usize, value: f64) {
        self.data[self.index_of(row, col)].store(value.to_bits(), Ordering::Relaxed);
    }

    /// Reads tile `(bi, bj)` at its true extent.
    pub fn read_tile(&self, bi: usize, bj: usize) -> Result<DenseMatrix> {
        self.partition.check_block(bi, bj)?;
        let p = &self.partition;
        let (h, w) = (p.block_height(bi), p.block_width(bj));
        let mut out = DenseMatrix::zeros(h, w);
        self.copy_tile_out(bi, bj, &mut out, 0);
        Ok(out)
    }

    /// Writes tile `(bi, bj)`. Accepts a tile at true extent or zero-padded to `b x b`;
    /// padding is never stored.
    pub fn write_tile(&self, bi: usize, bj: usize, tile: &DenseMatrix) -> Result<()> {
        self.partition.check_block(bi, bj)?;
        let p = &self.partition;
        let (h, w) = (p.block_height(bi), p.block_width(bj));
        if tile.rows() < h || tile.cols() < w || tile.rows() > p.b || tile.cols() > p.b {
            return Err(CaluError::ShapeMismatch(format!(
                "tile {}x{} for block ({bi}, {bj}) of extent {h}x{w}",
                tile.rows(),
                tile.cols()
            )));
        }
        self.copy_tile_in(bi, bj, tile, 0);
        Ok(())
    }

    /// Reads tile `(bi, bj)` zero-padded to `b x b`.
    pub fn read_block(&self, bi: usize, bj: usize) -> Result<DenseMatrix> {
        self.partition.check_block(bi, bj)?;
        let b = self.partition.b;
        let mut out = DenseMatrix::zeros(b, b);
        self.copy_tile_out(bi, bj, &mut out, 0);
        Ok(out)
    }

    pub fn write_block(&self, bi: usize, bj: usize, tile: &DenseMatrix) -> Result<()> {
        self.write_tile(bi, bj, tile)
    }

    /// Reads block column `bj` from block row `bi0` to the bottom as one matrix.
    pub fn read_column_strip(&self, bi0: usize, bj: usize) -> Result<DenseMatrix> {
        self.partition.check_block(bi0, bj)?;
        let p = &self.partition;
        let rows = p.m - bi0 * p.b;
        let mut out = DenseMatrix::zeros(rows, p.block_width(bj));
        for bi in bi0..p.block_rows {
            self.copy_tile_out(bi, bj, &mut out, (bi - bi0) * p.b);
        }
        Ok(out)
    }

    pub fn write_column_strip(&self, bi0: usize, bj: usize, strip: &DenseMatrix) -> Result<()> {
        self.partition.check_block(bi0, bj)?;
        let p = &self.partition;
        if strip.rows() != p.m - bi0 * p.b || strip.cols() != p.block_width(bj) {
            return Err(CaluError::ShapeMismatch(format!(
                "strip {}x{} for block column {bj} from block row {bi0}",
                strip.rows(),
                strip.cols()
            )));
        }
        for bi in bi0..p.block_rows {
            self.copy_tile_in(bi, bj, strip, (bi - bi0) * p.b);
        }
        Ok(())
    }

    fn copy_tile_out(&self, bi: usize, bj: usize, out: &mut DenseMatrix, row_offset: usize) {
        let p = &self.partition;
        let (h, w) = (p.block_height(bi), p.block_width(bj));
        let (r0, c0) = (bi * p.b, bj * p.b);
        for j in 0..w {
            let start = self.index_of(r0, c0 + j);
            let dst = &mut out.col_mut(j)[row_offset..row_offset + h];
            for (d, s) in dst.iter_mut().zip(&self.data[start..start + h]) {
                *d = f64::from_bits(s.load(Ordering::Relaxed));
            }
        }
    }

    fn copy_tile_in(&self, bi: usize, bj: usize, src: &DenseMatrix, row_offset: usize) {
        let p = &self.partition;
        let (h, w) = (p.block_height(bi), p.block_width(bj));
        let (r0, c0) = (bi * p.b, bj * p.b);
        for j in 0..w {
            let start = self.index_of(r0, c0 + j);
            let s = &src.col(j)[row_offset..row_offset + h];
            for (d, v) in self.data[start..start + h].iter().zip(s) {
                d.store(v.to_bits(), Ordering::Relaxed);
            }
        }
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let p = &self.partition;
        let mut out = DenseMatrix::zeros(p.m, p.n);
        for bj in 0..p.block_cols {
            for bi in 0..p.block_rows {
                let mut tile = DenseMatrix::zeros(p.block_height(bi), p.block_width(bj));
                self.copy_tile_out(bi, bj, &mut tile, 0);
                out.set_submatrix(bi * p.b, bj * p.b, &tile);
            }
        }
        out
    }

    /// Raw storage in layout order.
    pub fn storage(&self) -> Vec<f64> {
        self.data
            .iter()
            .map(|v| f64::from_bits(v.load(Ordering::Relaxed)))
            .collect()
    }

    /// Element-for-element copy in another layout.
    pub fn convert(&self, target: LayoutKind, grid: ThreadGrid) -> LayoutMatrix {
        let p = &self.partition;
        let out = LayoutMatrix::zeros(self.partition, target, grid);
        for bj in 0..p.block_cols {
            for bi in 0..p.block_rows {
                let mut tile = DenseMatrix::zeros(p.block_height(bi), p.block_width(bj));
                self.copy_tile_out(bi, bj, &mut tile, 0);
                out.copy_tile_in(bi, bj, &tile, 0);
            }
        }
        out
    }

    /// Block-cyclic owner of every block, indexed `[bi][bj]`.
    pub fn owner_map(&self) -> Vec<Vec<usize>> {
        let p = &self.partition;
        (0..p.block_rows)
            .map(|bi| {
                (0..p.block_cols)
                    .map(|bj| self.grid.owner(bi, bj))
                    .collect()
            })
            .collect()
    }

    pub fn dump(&self) -> LayoutDump {
        LayoutDump {
            partition: self.partition,
            kind: self.kind,
            grid: self.grid,
            owner_map: self.owner_map(),
            data: self.storage(),
        }
    }

    /// Rebuilds a matrix from a dump, checking that the storage length matches.
    pub fn from_dump(dump: &LayoutDump) -> Result<Self> {
        let p = dump.partition;
        let check = Partition::new(p.m, p.n, p.b)?;
        if check != p {
            return Err(CaluError::ShapeMismatch(
                "inconsistent partition in dump".into(),
            ));
        }
        if dump.data.len() != p.m * p.n {
            return Err(CaluError::ShapeMismatch(format!(
                "{} stored values for a {}x{} matrix",
                dump.data.len(),
                p.m,
                p.n
            )));
        }
        let out = LayoutMatrix::zeros(p, dump.kind, dump.grid);
        for (slot, v) in out.data.iter().zip(&dump.data) {
            slot.store(v.to_bits(), Ordering::Relaxed);
        }
        Ok(out)
    }
}

impl Clone for LayoutMatrix {
    fn clone(&self) -> Self {
        Self {
            partition: self.partition,
            kind: self.kind,
            grid: self.grid,
            data: self
                .data
                .iter()
                .map(|v| AtomicU64::new(v.load(Ordering::Relaxed)))
                .collect(),
            region_offset: self.region_offset.clone(),
            local_rows: self.local_rows.clone(),
            local_cols: self.local_cols.clone(),
        }
    }
}

impl fmt::Debug for LayoutMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LayoutMatrix")
            .field("partition", &self.partition)
            .field("kind", &self.kind)
            .field("grid", &self.grid)
            .finish_non_exhaustive()
    }
}

/// JSON-friendly snapshot of a layout, for tooling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayoutDump {
    pub partition: Partition,
    pub kind: LayoutKind,
    pub grid: ThreadGrid,
    pub owner_map: Vec<Vec<usize>>,
    pub data: Vec<f64>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::random_gaussian;

    #[test]
    fn partition_examples() {
        let p = Partition::new(8, 8, 2).unwrap();
        assert_eq!((p.block_rows, p.block_cols), (4, 4));
        let p = Partition::new(5, 5, 5).unwrap();
        assert_eq!((p.block_rows, p.block_cols), (1, 1));
        let p = Partition::new(10, 7, 3).unwrap();
        assert_eq!((p.block_rows, p.block_cols), (4, 3));
    }

    #[test]
    fn partition_ceiling_matches_enumeration() {
        for m in 1..=12 {
            for n in 1..=12 {
                for b in 1..=m.min(n) {
                    let p = Partition::new(m, n, b).unwrap();
                    // count distinct block starts by walking every row
                    let mut starts = 0;
                    let mut r = 0;
                    while r < m {
                        starts += 1;
                        r += b;
                    }
                    assert_eq!(p.block_rows, starts);
                    assert!((p.block_rows - 1) * b < m && m <= p.block_rows * b);
                    assert!((p.block_cols - 1) * b < n && n <= p.block_cols * b);
                }
            }
        }
    }

    #[test]
    fn partition_rejects_bad_dimensions() {
        assert!(Partition::new(0, 4, 1).is_err());
        assert!(Partition::new(4, 4, 0).is_err());
        assert!(Partition::new(4, 3, 4).is_err());
    }

    #[test]
    fn owner_examples() {
        let g = ThreadGrid::new(2, 2).unwrap();
        // 1-based (1,1), (3,4), (2,1)
        assert_eq!(g.owner(0, 0), 0);
        assert_eq!(g.owner(2, 3), 1);
        assert_eq!(g.owner(1, 0), 2);
    }

    #[test]
    fn owner_matches_brute_force_cyclic_deal() {
        // Deal block rows round-robin to grid rows and block columns to grid
        // columns, then read the owner off the deal.
        let g = ThreadGrid::new(3, 2).unwrap();
        let mut row_deal = vec![0; 9];
        let mut next = 0;
        for slot in row_deal.iter_mut() {
            *slot = next;
            next = (next + 1) % g.rows;
        }
        let mut col_deal = vec![0; 7];
        next = 0;
        for slot in col_deal.iter_mut() {
            *slot = next;
            next = (next + 1) % g.cols;
        }
        for bi in 0..9 {
            for bj in 0..7 {
                assert_eq!(g.owner(bi, bj), row_deal[bi] * g.cols + col_deal[bj]);
            }
        }
    }

    #[test]
    fn grid_for_workers() {
        assert_eq!(ThreadGrid::for_workers(1), ThreadGrid { rows: 1, cols: 1 });
        assert_eq!(ThreadGrid::for_workers(4), ThreadGrid { rows: 2, cols: 2 });
        assert_eq!(ThreadGrid::for_workers(6), ThreadGrid { rows: 2, cols: 3 });
        assert_eq!(ThreadGrid::for_workers(7), ThreadGrid { rows: 1, cols: 7 });
        assert_eq!(ThreadGrid::for_workers(16), ThreadGrid { rows: 4, cols: 4 });
        assert_eq!(
            "3x5".parse::<ThreadGrid>().unwrap(),
            ThreadGrid { rows: 3, cols: 5 }
        );
    }

    #[test]
    fn edge_tile_is_zero_padded() {
        let a = random_gaussian(5, 5, 1);
        for kind in LayoutKind::ALL {
            let lm = LayoutMatrix::from_dense(&a, 2, kind, ThreadGrid::new(2, 1).unwrap()).unwrap();
            let tile = lm.read_block(2, 1).unwrap();
            assert_eq!((tile.rows(), tile.cols()), (2, 2));
            for j in 0..2 {
                assert_eq!(tile[(0, j)].to_bits(), lm.get(4, 2 + j).to_bits());
                assert_eq!(tile[(1, j)], 0.0);
            }
            // padding is not written back
            let mut padded = tile.clone();
            padded[(1, 0)] = 99.0;
            lm.write_block(2, 1, &padded).unwrap();
            assert!(lm.to_dense().bitwise_eq(&a));
        }
    }

    #[test]
    fn block_write_then_read() {
        let p = Partition::new(6, 6, 3).unwrap();
        let lm = LayoutMatrix::zeros(p, LayoutKind::TwoLevelBlock, ThreadGrid::new(2, 2).unwrap());
        let t = random_gaussian(3, 3, 9);
        lm.write_block(1, 0, &t).unwrap();
        assert!(lm.read_block(1, 0).unwrap().bitwise_eq(&t));
        assert!(matches!(
            lm.read_block(2, 0),
            Err(CaluError::BlockOutOfRange { .. })
        ));
    }

    #[test]
    fn bcl_owner_zero_region() {
        // 8x8 matrix, b=2, 2x2 grid: worker 0 owns blocks (1,1),(1,3),(3,1),(3,3) in 1-based terms.
        let a = DenseMatrix::from_fn(8, 8, |i, j| (i * 8 + j) as f64);
        let bcl = LayoutMatrix::from_dense(
            &a,
            2,
            LayoutKind::BlockCyclic,
            ThreadGrid::new(2, 2).unwrap(),
        )
        .unwrap();
        let storage = bcl.storage();
        let region: Vec<f64> = storage[..16].to_vec();
        // owner-0 submatrix = rows {0,1,4,5} x cols {0,1,4,5}, column-major
        let rows = [0, 1, 4, 5];
        let cols = [0, 1, 4, 5];
        let expect: Vec<f64> = cols
            .iter()
            .flat_map(|&c| rows.iter().map(move |&r| (r * 8 + c) as f64))
            .collect();
        assert_eq!(region, expect);
    }

    #[test]
    fn degenerate_grid_bcl_is_column_major() {
        let a = random_gaussian(7, 5, 2);
        let g = ThreadGrid::new(1, 1).unwrap();
        let cm = LayoutMatrix::from_dense(&a, 2, LayoutKind::ColumnMajor, g).unwrap();
        let bcl = cm.convert(LayoutKind::BlockCyclic, g);
        assert_eq!(cm.storage(), bcl.storage());
        assert_eq!(cm.storage(), a.as_slice());
    }

    #[test]
    fn two_level_tiles_are_contiguous() {
        let a = DenseMatrix::from_fn(6, 6, |i, j| (i * 6 + j) as f64);
        let g = ThreadGrid::new(1, 1).unwrap();
        let lm = LayoutMatrix::from_dense(&a, 3, LayoutKind::TwoLevelBlock, g).unwrap();
        let s = lm.storage();
        // first tile (rows 0..3, cols 0..3) column-major
        let expect: Vec<f64> = (0..3)
            .flat_map(|c| (0..3).map(move |r| (r * 6 + c) as f64))
            .collect();
        assert_eq!(&s[..9], &expect[..]);
    }

    #[test]
    fn layouts_agree_and_round_trip() {
        let a = random_gaussian(11, 9, 5);
        let g = ThreadGrid::new(2, 3).unwrap();
        let cm = LayoutMatrix::from_dense(&a, 3, LayoutKind::ColumnMajor, g).unwrap();
        for kind in LayoutKind::ALL {
            let other = cm.convert(kind, g);
            for i in 0..11 {
                for j in 0..9 {
                    assert_eq!(other.get(i, j).to_bits(), a[(i, j)].to_bits());
                }
            }
            let back = other.convert(LayoutKind::ColumnMajor, g);
            assert_eq!(
                back.storage()
                    .iter()
                    .map(|v| v.to_bits())
                    .collect::<Vec<_>>(),
                cm.storage().iter().map(|v| v.to_bits()).collect::<Vec<_>>()
            );
        }
    }

    #[test]
    fn dump_round_trip() {
        let a = random_gaussian(5, 4, 8);
        let lm = LayoutMatrix::from_dense(
            &a,
            2,
            LayoutKind::BlockCyclic,
            ThreadGrid::new(2, 1).unwrap(),
        )
        .unwrap();
        let json = serde_json::to_string(&lm.dump()).unwrap();
        let dump: LayoutDump = serde_json::from_str(&json).unwrap();
        assert_eq!(dump.owner_map[2][1], 0);
        let back = LayoutMatrix::from_dump(&dump).unwrap();
        assert!(back.to_dense().bitwise_eq(&a));
    }
}
