//! Dense linear algebra over a prime field `F_p`.
//!
//! Entries are stored as `u32` residues. Since `p <= 97`, a product of two
//! residues is below 2^14, and elimination can defer reductions: a row that
//! receives at most `R` updates `a += c * b` (with `b` reduced) stays below
//! `p + R * (p - 1)^2 < 2^32` for any `R < 466_000`. Every matrix in this crate
//! is far smaller than that, so the inner loops are plain multiply-adds.

use std::fmt;

use crate::error::{Error, Result};

pub const MIN_PRIME: u32 = 5;
pub const MAX_PRIME: u32 = 97;

/// Checks that `p` is a prime in the supported range `[5, 97]`.
pub fn validate_prime(p: u64) -> Result<u32> {
    if p < MIN_PRIME as u64 || p > MAX_PRIME as u64 {
        return Err(Error::Domain(format!(
            "prime must lie in [{MIN_PRIME}, {MAX_PRIME}], got {p}"
        )));
    }
    if !is_prime(p) {
        return Err(Error::Domain(format!("{p} is not prime")));
    }
    Ok(p as u32)
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

pub fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * base % m;
        }
        base = base * base % m;
        exp >>= 1;
    }
    acc
}

/// Inverse of a nonzero residue modulo the prime `p`.
pub fn inv_mod(a: u32, p: u32) -> u32 {
    debug_assert!(!a.is_multiple_of(p));
    pow_mod(a as u64, (p - 2) as u64, p as u64) as u32
}

/// Reduces a signed integer into `[0, p)`.
pub fn reduce_signed(v: i128, p: u32) -> u32 {
    v.rem_euclid(p as i128) as u32
}

/// A single element of `F_p`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Fp {
    p: u32,
    value: u32,
}

impl Fp {
    pub fn new(p: u32, value: i64) -> Result<Self> {
        let p = validate_prime(p as u64)?;
        Ok(Fp {
            p,
            value: reduce_signed(value as i128, p),
        })
    }

    pub fn modulus(self) -> u32 {
        self.p
    }

    pub fn value(self) -> u32 {
        self.value
    }

    pub fn is_zero(self) -> bool {
        self.value == 0
    }

    pub fn inv(self) -> Result<Self> {
        if self.value == 0 {
            return Err(Error::Domain("zero has no inverse".into()));
        }
        Ok(Fp {
            p: self.p,
            value: inv_mod(self.value, self.p),
        })
    }
}

impl fmt::Display for Fp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (mod {})", self.value, self.p)
    }
}

/// Dense row-major matrix over `F_p`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct FpMatrix {
    p: u32,
    rows: usize,
    cols: usize,
    data: Vec<u32>,
}

/// Reduced row echelon form together with its pivot columns.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rref {
    pub matrix: FpMatrix,
    pub pivots: Vec<usize>,
}

impl Rref {
    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    /// Columns that carry no pivot, in increasing order.
    pub fn free_columns(&self) -> Vec<usize> {
        let mut is_pivot = vec![false; self.matrix.cols];
        for &c in &self.pivots {
            is_pivot[c] = true;
        }
        (0..self.matrix.cols).filter(|&c| !is_pivot[c]).collect()
    }
}

impl FpMatrix {
    pub fn zeros(p: u32, rows: usize, cols: usize) -> Self {
        FpMatrix {
            p,
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    pub fn identity(p: u32, n: usize) -> Self {
        let mut m = Self::zeros(p, n, n);
        for i in 0..n {
            m.data[i * n + i] = 1;
        }
        m
    }

    /// Builds a matrix from raw residues. Entries are reduced mod `p`.
    pub fn from_vec(p: u32, rows: usize, cols: usize, data: Vec<u32>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::MalformedInput(format!(
                "expected {} entries for a {rows}x{cols} matrix, got {}",
                rows * cols,
                data.len()
            )));
        }
        let data = data.into_iter().map(|v| v % p).collect();
        Ok(FpMatrix {
            p,
            rows,
            cols,
            data,
        })
    }

    /// Builds a matrix from signed integer rows, reducing each entry.
    pub fn from_rows(p: u32, rows: &[Vec<i64>]) -> Result<Self> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != ncols) {
            return Err(Error::MalformedInput("ragged rows".into()));
        }
        let data = rows
            .iter()
            .flatten()
            .map(|&v| reduce_signed(v as i128, p))
            .collect();
        Ok(FpMatrix {
            p,
            rows: nrows,
            cols: ncols,
            data,
        })
    }

    /// Builds a matrix from field elements, which must all share one modulus.
    pub fn from_scalars(rows: usize, cols: usize, entries: &[Fp]) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::MalformedInput(format!(
                "expected {} entries, got {}",
                rows * cols,
                entries.len()
            )));
        }
        let Some(first) = entries.first() else {
            return Err(Error::MalformedInput(
                "cannot infer the modulus of an empty scalar list".into(),
            ));
        };
        let p = first.modulus();
        if let Some(bad) = entries.iter().find(|e| e.modulus() != p) {
            return Err(Error::MalformedInput(format!(
                "mixed moduli: {} and {}",
                p,
                bad.modulus()
            )));
        }
        Ok(FpMatrix {
            p,
            rows,
            cols,
            data: entries.iter().map(|e| e.value()).collect(),
        })
    }

    pub fn from_fn(p: u32, rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> u32) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j) % p);
            }
        }
        FpMatrix {
            p,
            rows,
            cols,
            data,
        }
    }

    /// Column matrix from a vector of residues.
    pub fn column(p: u32, v: &[u32]) -> Self {
        FpMatrix {
            p,
            rows: v.len(),
            cols: 1,
            data: v.iter().map(|&x| x % p).collect(),
        }
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[u32] {
        &self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> u32 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: u32) {
        self.data[i * self.cols + j] = v % self.p;
    }

    pub fn row(&self, i: usize) -> &[u32] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn col_vec(&self, j: usize) -> Vec<u32> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&x| x == 0)
    }

    pub fn is_identity(&self) -> bool {
        self.is_square()
            && (0..self.rows).all(|i| (0..self.cols).all(|j| self.get(i, j) == u32::from(i == j)))
    }

    fn check_same_modulus(&self, other: &FpMatrix) -> Result<()> {
        if self.p != other.p {
            return Err(Error::MalformedInput(format!(
                "modulus mismatch: {} vs {}",
                self.p, other.p
            )));
        }
        Ok(())
    }

    pub fn transpose(&self) -> FpMatrix {
        let mut t = FpMatrix::zeros(self.p, self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.data[j * self.rows + i] = self.data[i * self.cols + j];
            }
        }
        t
    }

    pub fn mul(&self, other: &FpMatrix) -> Result<FpMatrix> {
        self.check_same_modulus(other)?;
        if self.cols != other.rows {
            return Err(Error::MalformedInput(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let p = self.p;
        let n = other.cols;
        let mut out = FpMatrix::zeros(p, self.rows, n);
        // u32 accumulators hold up to 466k unreduced products; flush every 2^16.
        let mut acc = vec![0u32; n];
        for i in 0..self.rows {
            acc.iter_mut().for_each(|x| *x = 0);
            let mut pending = 0usize;
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == 0 {
                    continue;
                }
                let b = &other.data[k * n..(k + 1) * n];
                for (x, &y) in acc.iter_mut().zip(b) {
                    *x = x.wrapping_add(a.wrapping_mul(y));
                }
                pending += 1;
                if pending == 1 << 16 {
                    acc.iter_mut().for_each(|x| *x %= p);
                    pending = 0;
                }
            }
            for (o, &x) in out.data[i * n..(i + 1) * n].iter_mut().zip(&acc) {
                *o = x % p;
            }
        }
        Ok(out)
    }

    pub fn add(&self, other: &FpMatrix) -> Result<FpMatrix> {
        self.check_same_modulus(other)?;
        if (self.rows, self.cols) != (other.rows, other.cols) {
            return Err(Error::MalformedInput("shape mismatch in addition".into()));
        }
        let p = self.p;
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| (a + b) % p)
            .collect();
        Ok(FpMatrix {
            p,
            rows: self.rows,
            cols: self.cols,
            data,
        })
    }

    pub fn sub(&self, other: &FpMatrix) -> Result<FpMatrix> {
        self.add(&other.scale(other.p - 1))
    }

    pub fn scale(&self, c: u32) -> FpMatrix {
        let p = self.p;
        let c = c % p;
        FpMatrix {
            p,
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&a| a * c % p).collect(),
        }
    }

    /// `self - c * I` for a square matrix.
    pub fn sub_scalar_identity(&self, c: u32) -> Result<FpMatrix> {
        if !self.is_square() {
            return Err(Error::MalformedInput("matrix is not square".into()));
        }
        let mut m = self.clone();
        let c = c % self.p;
        for i in 0..self.rows {
            let e = &mut m.data[i * self.cols + i];
            *e = (*e + self.p - c) % self.p;
        }
        Ok(m)
    }

    pub fn pow(&self, mut e: u64) -> Result<FpMatrix> {
        if !self.is_square() {
            return Err(Error::MalformedInput("matrix is not square".into()));
        }
        let mut acc = FpMatrix::identity(self.p, self.rows);
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base)?;
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base)?;
            }
        }
        Ok(acc)
    }

    pub fn hstack(&self, other: &FpMatrix) -> Result<FpMatrix> {
        self.check_same_modulus(other)?;
        if self.rows != other.rows {
            return Err(Error::MalformedInput("row count mismatch in hstack".into()));
        }
        let cols = self.cols + other.cols;
        let mut out = FpMatrix::zeros(self.p, self.rows, cols);
        for i in 0..self.rows {
            out.data[i * cols..i * cols + self.cols].copy_from_slice(self.row(i));
            out.data[i * cols + self.cols..(i + 1) * cols].copy_from_slice(other.row(i));
        }
        Ok(out)
    }

    pub fn vstack(&self, other: &FpMatrix) -> Result<FpMatrix> {
        self.check_same_modulus(other)?;
        if self.cols != other.cols {
            return Err(Error::MalformedInput("column count mismatch in vstack".into()));
        }
        let mut data = self.data.clone();
        data.extend_from_slice(&other.data);
        Ok(FpMatrix {
            p: self.p,
            rows: self.rows + other.rows,
            cols: self.cols,
            data,
        })
    }

    pub fn select_columns(&self, cols: &[usize]) -> FpMatrix {
        FpMatrix::from_fn(self.p, self.rows, cols.len(), |i, j| self.get(i, cols[j]))
    }

    pub fn select_rows(&self, rows: &[usize]) -> FpMatrix {
        let mut out = FpMatrix::zeros(self.p, rows.len(), self.cols);
        for (k, &i) in rows.iter().enumerate() {
            out.data[k * self.cols..(k + 1) * self.cols].copy_from_slice(self.row(i));
        }
        out
    }

    /// Sub-block `rows x cols` starting at `(r0, c0)`.
    pub fn block(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> FpMatrix {
        FpMatrix::from_fn(self.p, rows, cols, |i, j| self.get(r0 + i, c0 + j))
    }

    /// Reduced row echelon form. The pivot in each column is the first row
    /// (at or below the current pivot row) with a nonzero entry.
    pub fn rref(&self) -> Rref {
        let mut m = self.clone();
        let pivots = m.rref_in_place();
        Rref { matrix: m, pivots }
    }

    fn rref_in_place(&mut self) -> Vec<usize> {
        let p = self.p;
        let (rows, cols) = (self.rows, self.cols);
        let mut pivots = Vec::new();
        let mut prow = 0;
        let mut pivot_buf = vec![0u32; cols];
        for col in 0..cols {
            if prow == rows {
                break;
            }
            let Some(found) = (prow..rows).find(|&i| !self.data[i * cols + col].is_multiple_of(p)) else {
                continue;
            };
            if found != prow {
                for j in col..cols {
                    self.data.swap(found * cols + j, prow * cols + j);
                }
            }
            let lead = self.data[prow * cols + col] % p;
            let inv = inv_mod(lead, p);
            let pivot_row = &mut self.data[prow * cols + col..(prow + 1) * cols];
            for (e, b) in pivot_row.iter_mut().zip(&mut pivot_buf[col..cols]) {
                *e = (*e % p) * inv % p;
                *b = *e;
            }
            let piv = &pivot_buf[col..cols];
            for i in 0..rows {
                if i == prow {
                    continue;
                }
                let row = &mut self.data[i * cols + col..(i + 1) * cols];
                let f = row[0] % p;
                if f == 0 {
                    continue;
                }
                let c = p - f;
                for (a, &b) in row.iter_mut().zip(piv) {
                    *a = a.wrapping_add(c.wrapping_mul(b));
                }
            }
            pivots.push(col);
            prow += 1;
        }
        self.data.iter_mut().for_each(|x| *x %= p);
        pivots
    }

    pub fn rank(&self) -> usize {
        self.rref().rank()
    }

    /// Kernel basis, one vector per column (`cols x (cols - rank)`).
    pub fn nullspace(&self) -> FpMatrix {
        nullspace_from_rref(&self.rref())
    }

    /// Orthonormal-free basis of the column space: the pivot columns of `self`.
    pub fn column_basis(&self) -> FpMatrix {
        let pivots = self.rref().pivots;
        self.select_columns(&pivots)
    }

    /// Inverse of a square matrix, if it exists.
    pub fn inverse(&self) -> Result<FpMatrix> {
        if !self.is_square() {
            return Err(Error::MalformedInput("matrix is not square".into()));
        }
        let n = self.rows;
        let aug = self.hstack(&FpMatrix::identity(self.p, n))?;
        let r = aug.rref();
        if r.pivots.len() < n || r.pivots[n - 1] != n - 1 {
            return Err(Error::Domain("matrix is singular".into()));
        }
        Ok(r.matrix.block(0, n, n, n))
    }
}

impl fmt::Debug for FpMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "FpMatrix(p={}, {}x{})", self.p, self.rows, self.cols)?;
        if self.rows * self.cols <= 400 {
            for i in 0..self.rows {
                writeln!(f, "  {:?}", self.row(i))?;
            }
        }
        Ok(())
    }
}

pub fn nullspace_from_rref(r: &Rref) -> FpMatrix {
    let m = &r.matrix;
    let p = m.p;
    let free = r.free_columns();
    let mut basis = FpMatrix::zeros(p, m.cols, free.len());
    for (k, &f) in free.iter().enumerate() {
        basis.data[f * free.len() + k] = 1;
        for (row, &pc) in r.pivots.iter().enumerate() {
            let v = m.get(row, f);
            if v != 0 {
                basis.data[pc * free.len() + k] = p - v;
            }
        }
    }
    basis
}

/// Basis (as columns) of the common kernel of the given square matrices,
/// shifted by the identity when `shifted` is set: `∩ ker(M_i - 1)`.
///
/// With an empty list the result is the whole space `F_p^dim`.
pub fn intersect_kernels(p: u32, dim: usize, mats: &[FpMatrix], shifted: bool) -> Result<FpMatrix> {
    kernels_in_subspace(mats, &FpMatrix::identity(p, dim), shifted)
}

/// Vectors of the column span of `basis` killed by every `M_i` (or every
/// `M_i - 1` when `shifted`). Returned as columns in ambient coordinates.
///
/// `basis` must have linearly independent columns.
pub fn kernels_in_subspace(mats: &[FpMatrix], basis: &FpMatrix, shifted: bool) -> Result<FpMatrix> {
    let dim = basis.rows;
    for m in mats {
        basis.check_same_modulus(m)?;
        if m.rows != dim || m.cols != dim {
            return Err(Error::MalformedInput(format!(
                "expected {dim}x{dim} matrices, got {}x{}",
                m.rows, m.cols
            )));
        }
    }
    let mut current = basis.clone();
    for m in mats {
        if current.cols == 0 {
            break;
        }
        let image = m.mul(&current)?;
        let image = if shifted { image.sub(&current)? } else { image };
        if image.is_zero() {
            continue;
        }
        let coeffs = image.nullspace();
        current = current.mul(&coeffs)?;
    }
    Ok(current)
}

/// Kronecker product `A ⊗ B`.
pub fn kron(a: &FpMatrix, b: &FpMatrix) -> Result<FpMatrix> {
    a.check_same_modulus(b)?;
    let p = a.p;
    let rows = a.rows * b.rows;
    let cols = a.cols * b.cols;
    let mut out = FpMatrix::zeros(p, rows, cols);
    for i in 0..a.rows {
        for j in 0..a.cols {
            let x = a.get(i, j);
            if x == 0 {
                continue;
            }
            for k in 0..b.rows {
                let base = (i * b.rows + k) * cols + j * b.cols;
                for l in 0..b.cols {
                    out.data[base + l] = x * b.get(k, l) % p;
                }
            }
        }
    }
    Ok(out)
}

/// Dimension of the span of the columns of `a` and `b` together.
pub fn span_dim(a: &FpMatrix, b: &FpMatrix) -> Result<usize> {
    Ok(a.hstack(b)?.rank())
}

/// True when every column of `v` lies in the column span of `basis`.
pub fn columns_in_span(basis: &FpMatrix, v: &FpMatrix) -> Result<bool> {
    if v.cols == 0 {
        return Ok(true);
    }
    Ok(span_dim(basis, v)? == basis.rank())
}

/// Basis of the intersection of the column spans of `a` and `b`.
pub fn intersect_spans(a: &FpMatrix, b: &FpMatrix) -> Result<FpMatrix> {
    let a = a.column_basis();
    let b = b.column_basis();
    let stacked = a.hstack(&b.scale(b.p - 1))?;
    let kernel = stacked.nullspace();
    let coeffs = kernel.block(0, 0, a.cols, kernel.cols);
    Ok(a.mul(&coeffs)?.column_basis())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn m(p: u32, rows: &[&[i64]]) -> FpMatrix {
        FpMatrix::from_rows(p, &rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn validate_prime_range() {
        assert_eq!(validate_prime(5).unwrap(), 5);
        assert_eq!(validate_prime(97).unwrap(), 97);
        assert!(validate_prime(3).is_err());
        assert!(validate_prime(4).is_err());
        assert!(validate_prime(9).is_err());
        assert!(validate_prime(101).is_err());
    }

    #[test]
    fn rref_dependent_rows() {
        let r = m(5, &[&[2, 4], &[1, 2]]).rref();
        assert_eq!(r.rank(), 1);
        assert_eq!(r.pivots, vec![0]);
        assert_eq!(r.matrix, m(5, &[&[1, 2], &[0, 0]]));
    }

    #[test]
    fn rref_zero_and_identity() {
        let z = FpMatrix::zeros(5, 3, 3);
        let r = z.rref();
        assert_eq!(r.rank(), 0);
        assert!(r.matrix.is_zero());
        let id = FpMatrix::identity(7, 4);
        let r = id.rref();
        assert_eq!(r.pivots, vec![0, 1, 2, 3]);
        assert_eq!(r.matrix, id);
    }

    #[test]
    fn mixed_moduli_rejected() {
        let entries = [Fp::new(5, 1).unwrap(), Fp::new(7, 2).unwrap()];
        assert!(matches!(
            FpMatrix::from_scalars(1, 2, &entries),
            Err(Error::MalformedInput(_))
        ));
        let a = FpMatrix::identity(5, 2);
        let b = FpMatrix::identity(7, 2);
        assert!(a.mul(&b).is_err());
        assert!(kron(&a, &b).is_err());
    }

    #[test]
    fn nullspace_examples() {
        assert_eq!(FpMatrix::zeros(5, 2, 2).nullspace().cols(), 2);
        assert_eq!(FpMatrix::identity(5, 3).nullspace().cols(), 0);
        let k = m(5, &[&[1, 1]]).nullspace();
        assert_eq!(k.cols(), 1);
        assert_eq!(k.col_vec(0), vec![4, 1]);
    }

    #[test]
    fn intersect_kernel_examples() {
        let full = intersect_kernels(5, 3, &[], true).unwrap();
        assert_eq!(full.cols(), 3);
        let id = intersect_kernels(5, 2, &[FpMatrix::identity(5, 2)], true).unwrap();
        assert_eq!(id.cols(), 2);
        let a = m(5, &[&[2, 0], &[0, 1]]);
        let b = m(5, &[&[1, 0], &[0, 3]]);
        assert_eq!(intersect_kernels(5, 2, &[a, b], true).unwrap().cols(), 0);
        let bad = FpMatrix::identity(5, 3);
        assert!(intersect_kernels(5, 2, &[bad], true).is_err());
    }

    #[test]
    fn kron_examples() {
        assert_eq!(
            kron(&FpMatrix::identity(5, 2), &FpMatrix::identity(5, 3)).unwrap(),
            FpMatrix::identity(5, 6)
        );
        let a = m(5, &[&[1, 2], &[2, 4]]);
        let b = m(5, &[&[1, 0, 0], &[0, 1, 0], &[0, 0, 0]]);
        let k = kron(&a, &b).unwrap();
        assert_eq!((k.rows(), k.cols()), (6, 6));
        assert_eq!(k.rank(), 2);
    }

    #[test]
    fn inverse_round_trip() {
        let a = m(7, &[&[1, 2, 3], &[0, 1, 4], &[5, 6, 0]]);
        let inv = a.inverse().unwrap();
        assert!(a.mul(&inv).unwrap().is_identity());
        assert!(m(5, &[&[1, 2], &[2, 4]]).inverse().is_err());
    }

    #[test]
    fn span_helpers() {
        let u = m(5, &[&[1, 0], &[0, 1], &[0, 0]]);
        let v = m(5, &[&[1, 0], &[0, 0], &[0, 1]]);
        let w = intersect_spans(&u, &v).unwrap();
        assert_eq!(w.cols(), 1);
        assert!(columns_in_span(&u, &w).unwrap());
        assert!(columns_in_span(&v, &w).unwrap());
        assert!(!columns_in_span(&u, &v).unwrap());
    }

    #[test]
    fn large_rank_no_overflow() {
        // Deferred reduction must survive hundreds of updates per row.
        let p = 97;
        let n = 300;
        let a = FpMatrix::from_fn(p, n, n, |i, j| ((i * 31 + j * 17 + i * j) % 97) as u32);
        let r = a.rref();
        let null = nullspace_from_rref(&r);
        assert!(a.mul(&null).unwrap().is_zero());
        assert_eq!(r.rank() + null.cols(), n);
    }

    fn arb_matrix(p: u32, max: usize) -> impl Strategy<Value = FpMatrix> {
        (1..=max, 1..=max).prop_flat_map(move |(r, c)| {
            proptest::collection::vec(0..p, r * c)
                .prop_map(move |d| FpMatrix::from_vec(p, r, c, d).unwrap())
        })
    }

    proptest! {
        #[test]
        fn rank_nullity(a in arb_matrix(7, 8)) {
            let r = a.rref();
            let null = nullspace_from_rref(&r);
            prop_assert_eq!(r.rank() + null.cols(), a.cols());
            prop_assert!(a.mul(&null).unwrap().is_zero());
            prop_assert_eq!(null.rank(), null.cols());
        }

        #[test]
        fn rref_idempotent_and_row_space(a in arb_matrix(5, 7)) {
            let r = a.rref();
            prop_assert_eq!(&r.matrix.rref().matrix, &r.matrix);
            // Same row space: stacking adds no rank.
            prop_assert_eq!(a.vstack(&r.matrix).unwrap().rank(), r.rank());
        }

        #[test]
        fn kernel_intersection_is_fixed(a in arb_matrix(5, 5), b in arb_matrix(5, 5)) {
            let n = a.rows().min(a.cols()).min(b.rows()).min(b.cols());
            let a = a.block(0, 0, n, n);
            let b = b.block(0, 0, n, n);
            let k = intersect_kernels(5, n, &[a.clone(), b.clone()], true).unwrap();
            prop_assert_eq!(&a.mul(&k).unwrap(), &k);
            prop_assert_eq!(&b.mul(&k).unwrap(), &k);
        }

        #[test]
        fn kron_rank_and_bilinear(a in arb_matrix(7, 4), b in arb_matrix(7, 4), c in arb_matrix(7, 4)) {
            let k = kron(&a, &b).unwrap();
            prop_assert_eq!(k.rank(), a.rank() * b.rank());
            if (a.rows(), a.cols()) == (c.rows(), c.cols()) {
                let lhs = kron(&a.add(&c).unwrap(), &b).unwrap();
                let rhs = k.add(&kron(&c, &b).unwrap()).unwrap();
                prop_assert_eq!(lhs, rhs);
            }
        }
    }
}
