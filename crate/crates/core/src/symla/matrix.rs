use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative asymmetry tolerated (and averaged away) at construction.
pub const SYMMETRY_TOL: f64 = 1e-12;

/// Dense real symmetric matrix stored row-major.
///
/// Construction symmetrizes the input as `(M + Mᵀ)/2` when the asymmetry is
/// at most `SYMMETRY_TOL · ‖M‖_F` and rejects it otherwise, so every value of
/// this type satisfies `entries[i][j] == entries[j][i]` bit for bit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct SymMatrix {
    dim: usize,
    entries: Vec<f64>,
}

/// Dense square matrix with no symmetry assumption.
///
/// Products such as `(A − B)(f(A) − f(B))` land here.
#[derive(Clone, Debug, PartialEq)]
pub struct SquareMatrix {
    dim: usize,
    entries: Vec<f64>,
}

fn check_finite(dim: usize, entries: &[f64]) -> Result<()> {
    match entries.iter().position(|x| !x.is_finite()) {
        Some(i) => Err(Error::NonFinite {
            row: i / dim,
            col: i % dim,
        }),
        None => Ok(()),
    }
}

fn flatten_rows(rows: &[Vec<f64>]) -> Result<(usize, Vec<f64>)> {
    let dim = rows.len();
    if dim == 0 {
        return Err(Error::Empty);
    }
    let mut entries = Vec::with_capacity(dim * dim);
    for (row, r) in rows.iter().enumerate() {
        if r.len() != dim {
            return Err(Error::NotSquare {
                row,
                len: r.len(),
                dim,
            });
        }
        entries.extend_from_slice(r);
    }
    Ok((dim, entries))
}

impl SymMatrix {
    /// Builds a symmetric matrix from `dim × dim` row-major entries.
    pub fn new(dim: usize, mut entries: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Empty);
        }
        if entries.len() != dim * dim {
            return Err(Error::NotSquare {
                row: 0,
                len: entries.len(),
                dim: dim * dim,
            });
        }
        check_finite(dim, &entries)?;
        let norm = entries.iter().map(|x| x * x).sum::<f64>().sqrt();
        let mut asym = 0.0;
        for i in 0..dim {
            for j in (i + 1)..dim {
                let d = entries[i * dim + j] - entries[j * dim + i];
                asym += 2.0 * d * d;
            }
        }
        let asym = asym.sqrt();
        let limit = SYMMETRY_TOL * norm;
        if asym > limit {
            return Err(Error::NotSymmetric {
                asymmetry: asym,
                limit,
            });
        }
        for i in 0..dim {
            for j in (i + 1)..dim {
                let avg = 0.5 * (entries[i * dim + j] + entries[j * dim + i]);
                entries[i * dim + j] = avg;
                entries[j * dim + i] = avg;
            }
        }
        Ok(SymMatrix { dim, entries })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let (dim, entries) = flatten_rows(rows)?;
        Self::new(dim, entries)
    }

    /// Builds from a closure over the upper triangle; the result is symmetric
    /// by construction.
    pub(crate) fn from_upper(dim: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut entries = vec![0.0; dim * dim];
        for i in 0..dim {
            for j in i..dim {
                let v = f(i, j);
                entries[i * dim + j] = v;
                entries[j * dim + i] = v;
            }
        }
        SymMatrix { dim, entries }
    }

    pub fn zeros(dim: usize) -> Self {
        SymMatrix {
            dim,
            entries: vec![0.0; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::diag(&vec![1.0; dim])
    }

    pub fn diag(values: &[f64]) -> Self {
        let dim = values.len();
        let mut m = Self::zeros(dim);
        for (i, &v) in values.iter().enumerate() {
            m.entries[i * dim + i] = v;
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.dim + j]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.entries.chunks(self.dim).map(|r| r.to_vec()).collect()
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn scale(&self, factor: f64) -> Self {
        SymMatrix {
            dim: self.dim,
            entries: self.entries.iter().map(|x| x * factor).collect(),
        }
    }

    /// `M + s·I`.
    pub fn shifted(&self, s: f64) -> Self {
        let mut m = self.clone();
        for i in 0..self.dim {
            m.entries[i * self.dim + i] += s;
        }
        m
    }

    pub fn to_square(&self) -> SquareMatrix {
        SquareMatrix {
            dim: self.dim,
            entries: self.entries.clone(),
        }
    }

    /// General (nonsymmetric) product `self · other`.
    pub fn matmul(&self, other: &SymMatrix) -> SquareMatrix {
        assert_eq!(self.dim, other.dim, "dimension mismatch in matmul");
        SquareMatrix {
            dim: self.dim,
            entries: matmul_raw(self.dim, &self.entries, &other.entries),
        }
    }

    pub(crate) fn check_same_dim(&self, other: &SymMatrix) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                left: self.dim,
                right: other.dim,
            });
        }
        Ok(())
    }

    fn zip_with(&self, other: &SymMatrix, f: impl Fn(f64, f64) -> f64) -> SymMatrix {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        SymMatrix {
            dim: self.dim,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }
}

fn matmul_raw(n: usize, a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; n * n];
    for i in 0..n {
        for k in 0..n {
            let aik = a[i * n + k];
            if aik == 0.0 {
                continue;
            }
            for j in 0..n {
                out[i * n + j] += aik * b[k * n + j];
            }
        }
    }
    out
}

impl Add for &SymMatrix {
    type Output = SymMatrix;
    fn add(self, rhs: &SymMatrix) -> SymMatrix {
        self.zip_with(rhs, |a, b| a + b)
    }
}

impl Sub for &SymMatrix {
    type Output = SymMatrix;
    fn sub(self, rhs: &SymMatrix) -> SymMatrix {
        self.zip_with(rhs, |a, b| a - b)
    }
}

impl Neg for &SymMatrix {
    type Output = SymMatrix;
    fn neg(self) -> SymMatrix {
        self.scale(-1.0)
    }
}

impl TryFrom<Vec<Vec<f64>>> for SymMatrix {
    type Error = Error;
    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self> {
        SymMatrix::from_rows(&rows)
    }
}

impl From<SymMatrix> for Vec<Vec<f64>> {
    fn from(m: SymMatrix) -> Self {
        m.to_rows()
    }
}

/// Matrix text format: one row per line, whitespace-separated decimals.
/// Blank lines and lines starting with `#` are skipped.
impl FromStr for SymMatrix {
    type Err = Error;
    fn from_str(text: &str) -> Result<Self> {
        let mut rows = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let row = line
                .split_whitespace()
                .map(|tok| {
                    tok.parse::<f64>().map_err(|e| {
                        Error::Parse(format!("line {}: `{}`: {}", lineno + 1, tok, e))
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            rows.push(row);
        }
        SymMatrix::from_rows(&rows)
    }
}

impl fmt::Display for SymMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for row in self.entries.chunks(self.dim) {
            let line: Vec<String> = row.iter().map(|x| format!("{x:e}")).collect();
            writeln!(f, "{}", line.join(" "))?;
        }
        Ok(())
    }
}

impl SquareMatrix {
    pub fn new(dim: usize, entries: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Empty);
        }
        if entries.len() != dim * dim {
            return Err(Error::NotSquare {
                row: 0,
                len: entries.len(),
                dim: dim * dim,
            });
        }
        check_finite(dim, &entries)?;
        Ok(SquareMatrix { dim, entries })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let (dim, entries) = flatten_rows(rows)?;
        Self::new(dim, entries)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.dim + j]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.entries.chunks(self.dim).map(|r| r.to_vec()).collect()
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn transpose(&self) -> SquareMatrix {
        let n = self.dim;
        let mut entries = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                entries[j * n + i] = self.entries[i * n + j];
            }
        }
        SquareMatrix { dim: n, entries }
    }

    pub fn matmul(&self, other: &SquareMatrix) -> SquareMatrix {
        assert_eq!(self.dim, other.dim, "dimension mismatch in matmul");
        SquareMatrix {
            dim: self.dim,
            entries: matmul_raw(self.dim, &self.entries, &other.entries),
        }
    }

    pub fn scale(&self, factor: f64) -> SquareMatrix {
        SquareMatrix {
            dim: self.dim,
            entries: self.entries.iter().map(|x| x * factor).collect(),
        }
    }

    /// Symmetric Jordan–Wielandt embedding `[[0, M], [Mᵀ, 0]]` of size `2n`,
    /// whose eigenvalues are `±σᵢ(M)`.
    pub(crate) fn jordan_wielandt(&self) -> SymMatrix {
        let n = self.dim;
        SymMatrix::from_upper(2 * n, |i, j| {
            if i < n && j >= n {
                self.get(i, j - n)
            } else {
                0.0
            }
        })
    }
}

impl Mul for &SquareMatrix {
    type Output = SquareMatrix;
    fn mul(self, rhs: &SquareMatrix) -> SquareMatrix {
        self.matmul(rhs)
    }
}

impl Sub for &SquareMatrix {
    type Output = SquareMatrix;
    fn sub(self, rhs: &SquareMatrix) -> SquareMatrix {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        SquareMatrix {
            dim: self.dim,
            entries: self
                .entries
                .iter()
                .zip(&rhs.entries)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetrizes_small_asymmetry() {
        let m = SymMatrix::from_rows(&[vec![2.0, 1.0 + 1e-14], vec![1.0, 2.0]]).unwrap();
        assert_eq!(m.get(0, 1), m.get(1, 0));
        assert!((m.get(0, 1) - 1.0).abs() < 1e-13);
    }

    #[test]
    fn rejects_real_asymmetry() {
        let err = SymMatrix::from_rows(&[vec![2.0, 1.0], vec![0.5, 2.0]]).unwrap_err();
        assert!(matches!(err, Error::NotSymmetric { .. }));
    }

    #[test]
    fn rejects_non_finite_and_ragged() {
        assert!(matches!(
            SymMatrix::from_rows(&[vec![f64::NAN, 0.0], vec![0.0, 1.0]]),
            Err(Error::NonFinite { row: 0, col: 0 })
        ));
        assert!(matches!(
            SymMatrix::from_rows(&[vec![1.0, 0.0], vec![0.0]]),
            Err(Error::NotSquare { row: 1, .. })
        ));
        assert!(matches!(SymMatrix::from_rows(&[]), Err(Error::Empty)));
    }

    #[test]
    fn parses_text_format() {
        let m: SymMatrix = "# comment\n2 1\n\n1   2\n".parse().unwrap();
        assert_eq!(m.to_rows(), vec![vec![2.0, 1.0], vec![1.0, 2.0]]);
        assert!("1 x\nx 1".parse::<SymMatrix>().is_err());
        let back: SymMatrix = m.to_string().parse().unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn jordan_wielandt_layout() {
        let m = SquareMatrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        let jw = m.jordan_wielandt();
        assert_eq!(jw.get(0, 2), 1.0);
        assert_eq!(jw.get(1, 2), 3.0);
        assert_eq!(jw.get(2, 1), 3.0);
        assert_eq!(jw.get(0, 1), 0.0);
        assert_eq!(jw.get(3, 3), 0.0);
    }
}
