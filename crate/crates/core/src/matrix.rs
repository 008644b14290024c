//! Column-major dense matrices, seeded generators and MatrixMarket I/O.

use std::fmt::Write as _;
use std::io::{BufRead, Write};
use std::ops::{Index, IndexMut};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{CaluError, Result};

/// A dense `rows x cols` matrix stored column-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    /// Builds a matrix from column-major data.
    pub fn from_col_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(CaluError::ShapeMismatch(format!(
                "{} values for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix from row slices. Panics on ragged input; meant for tests and fixtures.
    pub fn from_rows(rows: &[&[f64]]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        let mut m = Self::zeros(r, c);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), c, "ragged row {i}");
            for (j, &v) in row.iter().enumerate() {
                m[(i, j)] = v;
            }
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(rows, cols);
        for j in 0..cols {
            for i in 0..rows {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn col(&self, j: usize) -> &[f64] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn col_mut(&mut self, j: usize) -> &mut [f64] {
        &mut self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(j * self.rows + a, j * self.rows + b);
        }
    }

    /// Copies the `rows x cols` submatrix starting at `(r0, c0)`.
    pub fn submatrix(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> DenseMatrix {
        DenseMatrix::from_fn(rows, cols, |i, j| self[(r0 + i, c0 + j)])
    }

    pub fn set_submatrix(&mut self, r0: usize, c0: usize, src: &DenseMatrix) {
        for j in 0..src.cols {
            for i in 0..src.rows {
                self[(r0 + i, c0 + j)] = src[(i, j)];
            }
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Plain triple-loop product, used for residual checks.
    pub fn matmul(&self, rhs: &DenseMatrix) -> Result<DenseMatrix> {
        if self.cols != rhs.rows {
            return Err(CaluError::ShapeMismatch(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut out = DenseMatrix::zeros(self.rows, rhs.cols);
        for j in 0..rhs.cols {
            for l in 0..self.cols {
                let r = rhs[(l, j)];
                if r == 0.0 {
                    continue;
                }
                let a = self.col(l);
                let o = out.col_mut(j);
                for i in 0..a.len() {
                    o[i] += a[i] * r;
                }
            }
        }
        Ok(out)
    }

    /// Rows reordered so that row `i` of the result is row `perm[i]` of `self`.
    pub fn permute_rows(&self, perm: &[usize]) -> Result<DenseMatrix> {
        if perm.len() != self.rows {
            return Err(CaluError::ShapeMismatch(format!(
                "permutation of length {} for {} rows",
                perm.len(),
                self.rows
            )));
        }
        if let Some(&bad) = perm.iter().find(|&&p| p >= self.rows) {
            return Err(CaluError::PermutationOutOfRange {
                entry: bad,
                len: self.rows,
            });
        }
        Ok(DenseMatrix::from_fn(self.rows, self.cols, |i, j| {
            self[(perm[i], j)]
        }))
    }

    /// Splits a combined `L\U` factor of an `m x n` matrix into unit-lower `L` (m x k)
    /// and upper `U` (k x n), `k = min(m, n)`.
    pub fn split_lu(&self) -> (DenseMatrix, DenseMatrix) {
        let k = self.rows.min(self.cols);
        let l = DenseMatrix::from_fn(self.rows, k, |i, j| match i.cmp(&j) {
            std::cmp::Ordering::Greater => self[(i, j)],
            std::cmp::Ordering::Equal => 1.0,
            std::cmp::Ordering::Less => 0.0,
        });
        let u = DenseMatrix::from_fn(k, self.cols, |i, j| if i <= j { self[(i, j)] } else { 0.0 });
        (l, u)
    }

    /// Bitwise equality including signed zeros and NaN payloads.
    pub fn bitwise_eq(&self, other: &DenseMatrix) -> bool {
        self.rows == other.rows
            && self.cols == other.cols
            && self
                .data
                .iter()
                .zip(&other.data)
                .all(|(a, b)| a.to_bits() == b.to_bits())
    }
}

impl Index<(usize, usize)> for DenseMatrix {
    type Output = f64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[j * self.rows + i]
    }
}

impl IndexMut<(usize, usize)> for DenseMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[j * self.rows + i]
    }
}

/// ||P·A − L·U||_F / ||A||_F for a combined `L\U` factor and a row permutation
/// with `(P·A)[i] = A[perm[i]]`.
pub fn relative_residual(a: &DenseMatrix, lu: &DenseMatrix, perm: &[usize]) -> Result<f64> {
    let pa = a.permute_rows(perm)?;
    let (l, u) = lu.split_lu();
    let prod = l.matmul(&u)?;
    let mut diff = 0.0;
    for (x, y) in pa.as_slice().iter().zip(prod.as_slice()) {
        diff += (x - y) * (x - y);
    }
    let norm = a.frobenius_norm();
    Ok(if norm == 0.0 {
        diff.sqrt()
    } else {
        diff.sqrt() / norm
    })
}

/// max|U| / max|A|.
pub fn growth_factor(a: &DenseMatrix, lu: &DenseMatrix) -> f64 {
    let (_, u) = lu.split_lu();
    let amax = a.max_abs();
    if amax == 0.0 {
        return 1.0;
    }
    u.max_abs() / amax
}

/// Seeded matrix generators. ChaCha is counter-based, so a seed yields the same
/// matrix on every platform.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Generator {
    RandomGaussian,
    DiagDominant,
    Identity,
}

impl std::str::FromStr for Generator {
    type Err = CaluError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "random-gaussian" | "gaussian" | "random" => Ok(Generator::RandomGaussian),
            "diag-dominant" => Ok(Generator::DiagDominant),
            "identity" => Ok(Generator::Identity),
            other => Err(CaluError::Config(format!("unknown generator '{other}'"))),
        }
    }
}

impl Generator {
    pub fn generate(self, m: usize, n: usize, seed: u64) -> DenseMatrix {
        match self {
            Generator::RandomGaussian => random_gaussian(m, n, seed),
            Generator::DiagDominant => {
                let mut a = random_gaussian(m, n, seed);
                let shift = m.max(n) as f64;
                for i in 0..m.min(n) {
                    a[(i, i)] += shift;
                }
                a
            }
            Generator::Identity => {
                DenseMatrix::from_fn(m, n, |i, j| if i == j { 1.0 } else { 0.0 })
            }
        }
    }
}

pub fn random_gaussian(m: usize, n: usize, seed: u64) -> DenseMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data = (0..m * n)
        .map(|_| rng.sample::<f64, _>(StandardNormal))
        .collect();
    DenseMatrix {
        rows: m,
        cols: n,
        data,
    }
}

/// Writes `a` in MatrixMarket array format (real, general). Values use the
/// shortest representation that parses back to the same bits.
pub fn write_matrix_market<W: Write>(mut out: W, a: &DenseMatrix) -> Result<()> {
    let mut buf = String::with_capacity(a.data.len() * 24 + 64);
    buf.push_str("%%MatrixMarket matrix array real general\n");
    let _ = writeln!(buf, "{} {}", a.rows, a.cols);
    for v in &a.data {
        let _ = writeln!(buf, "{v:e}");
    }
    out.write_all(buf.as_bytes())?;
    Ok(())
}

/// Reads a MatrixMarket file. The array format is the primary target; the
/// coordinate format is accepted for general real matrices as a convenience.
pub fn read_matrix_market<R: BufRead>(input: R) -> Result<DenseMatrix> {
    let mut lines = input.lines();
    let header = lines
        .next()
        .ok_or_else(|| CaluError::MatrixMarket("empty input".into()))??;
    let tokens: Vec<String> = header.split_whitespace().map(str::to_lowercase).collect();
    if tokens.len() < 5 || tokens[0] != "%%matrixmarket" || tokens[1] != "matrix" {
        return Err(CaluError::MatrixMarket(format!("bad header '{header}'")));
    }
    let format = tokens[2].as_str();
    if tokens[3] != "real" && tokens[3] != "integer" {
        return Err(CaluError::MatrixMarket(format!(
            "unsupported field '{}'",
            tokens[3]
        )));
    }
    if tokens[4] != "general" {
        return Err(CaluError::MatrixMarket(format!(
            "unsupported symmetry '{}'",
            tokens[4]
        )));
    }

    let mut body = Vec::new();
    for line in lines {
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('%') {
            continue;
        }
        body.push(t.to_string());
    }
    let mut it = body.iter();
    let size_line = it
        .next()
        .ok_or_else(|| CaluError::MatrixMarket("missing size line".into()))?;
    let dims: Vec<usize> = size_line
        .split_whitespace()
        .map(|s| s.parse::<usize>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| CaluError::MatrixMarket(format!("size line: {e}")))?;

    let parse = |s: &str| {
        s.parse::<f64>()
            .map_err(|e| CaluError::MatrixMarket(format!("value '{s}': {e}")))
    };

    match format {
        "array" => {
            if dims.len() != 2 {
                return Err(CaluError::MatrixMarket(
                    "array size line needs 2 entries".into(),
                ));
            }
            let (m, n) = (dims[0], dims[1]);
            let mut data = Vec::with_capacity(m * n);
            for line in it {
                for tok in line.split_whitespace() {
                    data.push(parse(tok)?);
                }
            }
            if data.len() != m * n {
                return Err(CaluError::MatrixMarket(format!(
                    "expected {} values, found {}",
                    m * n,
                    data.len()
                )));
            }
            Ok(DenseMatrix {
                rows: m,
                cols: n,
                data,
            })
        }
        "coordinate" => {
            if dims.len() != 3 {
                return Err(CaluError::MatrixMarket(
                    "coordinate size line needs 3 entries".into(),
                ));
            }
            let (m, n, nnz) = (dims[0], dims[1], dims[2]);
            let mut a = DenseMatrix::zeros(m, n);
            let mut count = 0;
            for line in it {
                let f: Vec<&str> = line.split_whitespace().collect();
                if f.len() != 3 {
                    return Err(CaluError::MatrixMarket(format!("bad entry '{line}'")));
                }
                let i: usize = f[0]
                    .parse()
                    .map_err(|_| CaluError::MatrixMarket(format!("bad row '{}'", f[0])))?;
                let j: usize = f[1]
                    .parse()
                    .map_err(|_| CaluError::MatrixMarket(format!("bad col '{}'", f[1])))?;
                if i == 0 || j == 0 || i > m || j > n {
                    return Err(CaluError::MatrixMarket(format!(
                        "entry ({i}, {j}) out of range"
                    )));
                }
                a[(i - 1, j - 1)] += parse(f[2])?;
                count += 1;
            }
            if count != nnz {
                return Err(CaluError::MatrixMarket(format!(
                    "expected {nnz} entries, found {count}"
                )));
            }
            Ok(a)
        }
        other => Err(CaluError::MatrixMarket(format!(
            "unsupported format '{other}'"
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matrix_market_round_trip_is_bitwise() {
        let a = random_gaussian(7, 5, 11);
        let mut buf = Vec::new();
        write_matrix_market(&mut buf, &a).unwrap();
        let back = read_matrix_market(buf.as_slice()).unwrap();
        assert!(a.bitwise_eq(&back));
    }

    #[test]
    fn matrix_market_rejects_short_body() {
        let text = "%%MatrixMarket matrix array real general\n2 2\n1\n2\n3\n";
        assert!(matches!(
            read_matrix_market(text.as_bytes()),
            Err(CaluError::MatrixMarket(_))
        ));
    }

    #[test]
    fn matrix_market_coordinate() {
        let text = "%%MatrixMarket matrix coordinate real general\n% c\n2 3 2\n1 1 4.5\n2 3 -1\n";
        let a = read_matrix_market(text.as_bytes()).unwrap();
        assert_eq!(a[(0, 0)], 4.5);
        assert_eq!(a[(1, 2)], -1.0);
        assert_eq!(a[(0, 1)], 0.0);
    }

    #[test]
    fn generators_are_seed_stable() {
        let a = Generator::RandomGaussian.generate(4, 4, 3);
        let b = Generator::RandomGaussian.generate(4, 4, 3);
        let c = Generator::RandomGaussian.generate(4, 4, 4);
        assert!(a.bitwise_eq(&b));
        assert!(!a.bitwise_eq(&c));
    }

    #[test]
    fn residual_of_exact_factorization_is_zero() {
        let a = DenseMatrix::from_rows(&[&[2.0, 1.0], &[4.0, 3.0]]);
        let lu = DenseMatrix::from_rows(&[&[4.0, 3.0], &[0.5, -0.5]]);
        assert_eq!(relative_residual(&a, &lu, &[1, 0]).unwrap(), 0.0);
        assert_eq!(growth_factor(&a, &lu), 1.0);
    }
}
