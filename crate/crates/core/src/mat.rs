//! Dense square matrices over GF(p) and the exact elimination kernels
//! (rank, reduced row-echelon form, inverse, determinant, diagonal
//! factorization) that everything else is built on.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{FieldSpec, Scalar};

/// A square `n x n` matrix with entries reduced into `[0, p)`, row-major.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Mat {
    n: usize,
    field: FieldSpec,
    data: Vec<u32>,
}

/// Output of [`Mat::rref`]: `transform * a` is the reduced row-echelon form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rref {
    pub rank: usize,
    pub pivots: Vec<usize>,
    pub transform: Mat,
    pub reduced: Mat,
}

/// `a = v * diag(I_r, 0) * w` with `v`, `w` invertible.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiagFactorization {
    pub v: Mat,
    pub r: usize,
    pub w: Mat,
}

impl DiagFactorization {
    /// `x = w^-1 diag(I_r,0) v^-1`, which satisfies `a x a = a`.
    pub fn inner_inverse(&self) -> Mat {
        let d = Mat::diag_projection(self.v.field, self.v.n, self.r);
        &(&self.w.inverse().expect("w invertible") * &d) * &self.v.inverse().expect("v invertible")
    }
}

impl Mat {
    pub fn zero(field: FieldSpec, n: usize) -> Self {
        Mat {
            n,
            field,
            data: vec![0; n * n],
        }
    }

    pub fn identity(field: FieldSpec, n: usize) -> Self {
        Self::scalar(field, n, 1)
    }

    pub fn scalar(field: FieldSpec, n: usize, c: u32) -> Self {
        let mut m = Self::zero(field, n);
        let c = c % field.p();
        for i in 0..n {
            m.data[i * n + i] = c;
        }
        m
    }

    /// `diag(1^r, 0^(n-r))`
    pub fn diag_projection(field: FieldSpec, n: usize, r: usize) -> Self {
        let mut m = Self::zero(field, n);
        for i in 0..r.min(n) {
            m.data[i * n + i] = 1;
        }
        m
    }

    pub fn diag(field: FieldSpec, entries: &[i64]) -> Self {
        let n = entries.len();
        let mut m = Self::zero(field, n);
        for (i, &c) in entries.iter().enumerate() {
            m.data[i * n + i] = field.reduce(c);
        }
        m
    }

    /// The elementary matrix unit `E_ij`.
    pub fn unit(field: FieldSpec, n: usize, i: usize, j: usize) -> Self {
        let mut m = Self::zero(field, n);
        m.data[i * n + j] = 1;
        m
    }

    pub fn from_rows(field: FieldSpec, rows: &[Vec<i64>]) -> Result<Self> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for row in rows {
            if row.len() != n {
                return Err(Error::Parse(format!(
                    "row of length {} in a {n}x{n} matrix",
                    row.len()
                )));
            }
            data.extend(row.iter().map(|&v| field.reduce(v)));
        }
        Ok(Mat { n, field, data })
    }

    pub fn from_raw(field: FieldSpec, n: usize, data: Vec<u32>) -> Self {
        assert_eq!(data.len(), n * n, "data length must be n^2");
        let p = field.p();
        Mat {
            n,
            field,
            data: data.into_iter().map(|v| v % p).collect(),
        }
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_columns(field: FieldSpec, cols: &[Vec<u32>]) -> Self {
        let n = cols.len();
        let mut m = Self::zero(field, n);
        for (j, c) in cols.iter().enumerate() {
            assert_eq!(c.len(), n, "need n columns of length n");
            for i in 0..n {
                m.data[i * n + j] = c[i];
            }
        }
        m
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn field(&self) -> FieldSpec {
        self.field
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> u32 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: u32) {
        self.data[i * self.n + j] = v % self.field.p();
    }

    pub fn entry(&self, i: usize, j: usize) -> Scalar {
        Scalar::new(self.field, self.get(i, j))
    }

    pub fn data(&self) -> &[u32] {
        &self.data
    }

    pub fn rows(&self) -> Vec<Vec<u32>> {
        self.data.chunks(self.n.max(1)).map(|r| r.to_vec()).take(self.n).collect()
    }

    pub fn column(&self, j: usize) -> Vec<u32> {
        (0..self.n).map(|i| self.get(i, j)).collect()
    }

    pub fn transpose(&self) -> Mat {
        let n = self.n;
        let mut t = Self::zero(self.field, n);
        for i in 0..n {
            for j in 0..n {
                t.data[j * n + i] = self.data[i * n + j];
            }
        }
        t
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&v| v == 0)
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::identity(self.field, self.n)
    }

    /// `Some(c)` if the matrix equals `c * I`.
    pub fn as_scalar(&self) -> Option<u32> {
        let c = if self.n == 0 { 0 } else { self.get(0, 0) };
        (*self == Self::scalar(self.field, self.n, c)).then_some(c)
    }

    pub fn is_upper_triangular(&self) -> bool {
        (0..self.n).all(|i| (0..i).all(|j| self.get(i, j) == 0))
    }

    pub fn scale(&self, c: u32) -> Mat {
        let f = self.field;
        Mat {
            n: self.n,
            field: f,
            data: self.data.iter().map(|&v| f.mul(v, c % f.p())).collect(),
        }
    }

    /// `self + c I`
    pub fn add_scalar(&self, c: u32) -> Mat {
        let mut m = self.clone();
        let f = self.field;
        for i in 0..self.n {
            let k = i * self.n + i;
            m.data[k] = f.add(m.data[k], c % f.p());
        }
        m
    }

    pub fn mul_vec(&self, v: &[u32]) -> Vec<u32> {
        let p = self.field.p() as u64;
        (0..self.n)
            .map(|i| {
                let row = &self.data[i * self.n..(i + 1) * self.n];
                (row.iter().zip(v).map(|(&a, &b)| a as u64 * b as u64).sum::<u64>() % p) as u32
            })
            .collect()
    }

    pub fn pow(&self, mut e: u64) -> Mat {
        let mut base = self.clone();
        let mut acc = Self::identity(self.field, self.n);
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            e >>= 1;
        }
        acc
    }

    /// Block-diagonal sum of square blocks over a common field.
    pub fn block_diag(blocks: &[Mat]) -> Mat {
        assert!(!blocks.is_empty(), "block_diag needs at least one block");
        let field = blocks[0].field;
        let n: usize = blocks.iter().map(|b| b.n).sum();
        let mut m = Self::zero(field, n);
        let mut off = 0;
        for b in blocks {
            assert_eq!(b.field, field, "blocks over different fields");
            for i in 0..b.n {
                for j in 0..b.n {
                    m.data[(off + i) * n + off + j] = b.get(i, j);
                }
            }
            off += b.n;
        }
        m
    }

    /// The `size x size` block starting at `(off, off)`.
    pub fn diagonal_block(&self, off: usize, size: usize) -> Mat {
        let mut b = Self::zero(self.field, size);
        for i in 0..size {
            for j in 0..size {
                b.data[i * size + j] = self.get(off + i, off + j);
            }
        }
        b
    }

    pub fn ensure_compatible(&self, other: &Mat) -> Result<()> {
        if self.field != other.field {
            return Err(Error::FieldMismatch(self.field.p(), other.field.p()));
        }
        if self.n != other.n {
            return Err(Error::DimensionMismatch(self.n, other.n));
        }
        Ok(())
    }

    /// Reduced row-echelon form with its row transform. Pivots are chosen
    /// as the first nonzero entry scanning rows downward from the current
    /// position.
    pub fn rref(&self) -> Rref {
        let n = self.n;
        let w = 2 * n;
        let mut buf = vec![0u32; n * w];
        for i in 0..n {
            buf[i * w..i * w + n].copy_from_slice(&self.data[i * n..(i + 1) * n]);
            buf[i * w + n + i] = 1;
        }
        let pivots = row_reduce(self.field, &mut buf, n, w, n);
        let mut reduced = Self::zero(self.field, n);
        let mut transform = Self::zero(self.field, n);
        for i in 0..n {
            reduced.data[i * n..(i + 1) * n].copy_from_slice(&buf[i * w..i * w + n]);
            transform.data[i * n..(i + 1) * n].copy_from_slice(&buf[i * w + n..(i + 1) * w]);
        }
        Rref {
            rank: pivots.len(),
            pivots,
            transform,
            reduced,
        }
    }

    pub fn rank(&self) -> usize {
        let mut buf = self.data.clone();
        row_reduce(self.field, &mut buf, self.n, self.n, self.n).len()
    }

    pub fn is_invertible(&self) -> bool {
        self.rank() == self.n
    }

    pub fn inverse(&self) -> Result<Mat> {
        let r = self.rref();
        if r.rank < self.n {
            return Err(Error::NotInvertible);
        }
        Ok(r.transform)
    }

    pub fn det(&self) -> u32 {
        let f = self.field;
        let n = self.n;
        let mut a = self.data.clone();
        let mut det = 1u32;
        for col in 0..n {
            let Some(piv) = (col..n).find(|&r| a[r * n + col] != 0) else {
                return 0;
            };
            if piv != col {
                for j in 0..n {
                    a.swap(piv * n + j, col * n + j);
                }
                det = f.neg(det);
            }
            let pv = a[col * n + col];
            det = f.mul(det, pv);
            let inv = f.inv(pv).expect("pivot nonzero");
            for r in col + 1..n {
                let factor = f.mul(a[r * n + col], inv);
                if factor == 0 {
                    continue;
                }
                for j in col..n {
                    a[r * n + j] = f.sub(a[r * n + j], f.mul(factor, a[col * n + j]));
                }
            }
        }
        det
    }

    /// `a = v diag(I_r, 0) w`. Built from the row reduction: `T a = R`,
    /// `R = diag(I_r,0) W` where `W` stacks the nonzero rows of `R` over
    /// unit rows for the non-pivot columns.
    pub fn diag_factorize(&self) -> DiagFactorization {
        let n = self.n;
        let rr = self.rref();
        let mut w = Self::zero(self.field, n);
        for i in 0..rr.rank {
            w.data[i * n..(i + 1) * n].copy_from_slice(&rr.reduced.data[i * n..(i + 1) * n]);
        }
        let free = (0..n).filter(|c| !rr.pivots.contains(c));
        for (k, c) in free.enumerate() {
            w.data[(rr.rank + k) * n + c] = 1;
        }
        DiagFactorization {
            v: rr.transform.inverse().expect("row transform is invertible"),
            r: rr.rank,
            w,
        }
    }

    /// Basis of the column space, as the pivot columns of the matrix.
    pub fn column_basis(&self) -> Vec<Vec<u32>> {
        let r = self.rref();
        r.pivots.iter().map(|&j| self.column(j)).collect()
    }

    /// Basis of the right kernel `{x : a x = 0}`.
    pub fn kernel_basis(&self) -> Vec<Vec<u32>> {
        null_space(self.field, &self.data, self.n, self.n)
    }

    /// Plain-text form `p=<prime>; <row>; <row>; ...`.
    pub fn to_text(&self) -> String {
        let mut s = format!("p={}", self.field.p());
        for row in self.rows() {
            s.push_str("; ");
            let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            s.push_str(&cells.join(" "));
        }
        s
    }

    /// Parses either the text form or the JSON form `{"p":3,"rows":[[..]]}`.
    /// Entries are reduced mod p, so negative integers are accepted.
    pub fn parse(input: &str) -> Result<Mat> {
        let t = input.trim();
        if t.starts_with('{') {
            let j: MatJson =
                serde_json::from_str(t).map_err(|e| Error::Parse(e.to_string()))?;
            return j.try_into();
        }
        let mut parts = t.split(';').map(str::trim).filter(|s| !s.is_empty());
        let head = parts
            .next()
            .ok_or_else(|| Error::Parse("empty matrix text".into()))?;
        let p = head
            .strip_prefix("p=")
            .or_else(|| head.strip_prefix("p ="))
            .ok_or_else(|| Error::Parse(format!("expected `p=<prime>`, got `{head}`")))?
            .trim()
            .parse::<u64>()
            .map_err(|e| Error::Parse(format!("bad modulus: {e}")))?;
        let field = FieldSpec::new(p).map_err(|e| Error::Parse(e.to_string()))?;
        let rows = parts
            .map(|row| {
                row.split_whitespace()
                    .map(|v| {
                        v.parse::<i64>()
                            .map_err(|e| Error::Parse(format!("bad entry `{v}`: {e}")))
                    })
                    .collect::<Result<Vec<i64>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        if rows.is_empty() {
            return Err(Error::Parse("matrix has no rows".into()));
        }
        Mat::from_rows(field, &rows)
    }

    pub fn to_json(&self) -> MatJson {
        MatJson {
            p: self.field.p(),
            rows: self
                .rows()
                .into_iter()
                .map(|r| r.into_iter().map(i64::from).collect())
                .collect(),
        }
    }
}

/// JSON carrier `{"p":3,"rows":[[2,1],[0,1]]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatJson {
    pub p: u32,
    pub rows: Vec<Vec<i64>>,
}

impl TryFrom<MatJson> for Mat {
    type Error = Error;
    fn try_from(j: MatJson) -> Result<Mat> {
        let field = FieldSpec::new(j.p as u64).map_err(|e| Error::Parse(e.to_string()))?;
        if j.rows.is_empty() {
            return Err(Error::Parse("matrix has no rows".into()));
        }
        Mat::from_rows(field, &j.rows)
    }
}

impl fmt::Display for Mat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

impl<'a> Add<&'a Mat> for &'a Mat {
    type Output = Mat;
    fn add(self, rhs: &Mat) -> Mat {
        self.ensure_compatible(rhs).expect("incompatible matrices");
        let f = self.field;
        Mat {
            n: self.n,
            field: f,
            data: self.data.iter().zip(&rhs.data).map(|(&a, &b)| f.add(a, b)).collect(),
        }
    }
}

impl<'a> Sub<&'a Mat> for &'a Mat {
    type Output = Mat;
    fn sub(self, rhs: &Mat) -> Mat {
        self.ensure_compatible(rhs).expect("incompatible matrices");
        let f = self.field;
        Mat {
            n: self.n,
            field: f,
            data: self.data.iter().zip(&rhs.data).map(|(&a, &b)| f.sub(a, b)).collect(),
        }
    }
}

impl Neg for &Mat {
    type Output = Mat;
    fn neg(self) -> Mat {
        let f = self.field;
        Mat {
            n: self.n,
            field: f,
            data: self.data.iter().map(|&a| f.neg(a)).collect(),
        }
    }
}

impl<'a> Mul<&'a Mat> for &'a Mat {
    type Output = Mat;
    fn mul(self, rhs: &Mat) -> Mat {
        self.ensure_compatible(rhs).expect("incompatible matrices");
        let n = self.n;
        let p = self.field.p() as u64;
        let mut acc = vec![0u64; n * n];
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k] as u64;
                if a == 0 {
                    continue;
                }
                let row = &rhs.data[k * n..(k + 1) * n];
                let out = &mut acc[i * n..(i + 1) * n];
                for (o, &b) in out.iter_mut().zip(row) {
                    *o += a * b as u64;
                }
            }
        }
        Mat {
            n,
            field: self.field,
            data: acc.into_iter().map(|v| (v % p) as u32).collect(),
        }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr<Mat> for Mat {
            type Output = Mat;
            fn $m(self, rhs: Mat) -> Mat {
                (&self).$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

/// Gauss-Jordan elimination in place on a row-major `rows x cols` buffer,
/// choosing pivots only among the first `pivot_cols` columns. Returns the
/// pivot columns in order.
pub(crate) fn row_reduce(
    f: FieldSpec,
    buf: &mut [u32],
    rows: usize,
    cols: usize,
    pivot_cols: usize,
) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..pivot_cols {
        if r == rows {
            break;
        }
        let Some(pr) = (r..rows).find(|&i| buf[i * cols + c] != 0) else {
            continue;
        };
        if pr != r {
            for j in 0..cols {
                buf.swap(pr * cols + j, r * cols + j);
            }
        }
        let inv = f.inv(buf[r * cols + c]).expect("pivot nonzero");
        for j in 0..cols {
            buf[r * cols + j] = f.mul(buf[r * cols + j], inv);
        }
        for i in 0..rows {
            if i == r {
                continue;
            }
            let factor = buf[i * cols + c];
            if factor == 0 {
                continue;
            }
            for j in 0..cols {
                let v = f.mul(factor, buf[r * cols + j]);
                buf[i * cols + j] = f.sub(buf[i * cols + j], v);
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

/// Right null space of a row-major `rows x cols` matrix.
pub(crate) fn null_space(f: FieldSpec, data: &[u32], rows: usize, cols: usize) -> Vec<Vec<u32>> {
    let mut buf = data.to_vec();
    let pivots = row_reduce(f, &mut buf, rows, cols, cols);
    let mut basis = Vec::new();
    for free in (0..cols).filter(|c| !pivots.contains(c)) {
        let mut v = vec![0u32; cols];
        v[free] = 1;
        for (k, &pc) in pivots.iter().enumerate() {
            v[pc] = f.neg(buf[k * cols + free]);
        }
        basis.push(v);
    }
    basis
}

/// Rank of a list of vectors of length `len`.
pub(crate) fn vectors_rank(f: FieldSpec, vecs: &[Vec<u32>], len: usize) -> usize {
    let mut buf: Vec<u32> = vecs.iter().flat_map(|v| v.iter().copied()).collect();
    row_reduce(f, &mut buf, vecs.len(), len, len).len()
}

/// Extends independent vectors to a basis of GF(p)^len with unit vectors,
/// lowest index first.
pub(crate) fn extend_to_basis(f: FieldSpec, vecs: &[Vec<u32>], len: usize) -> Vec<Vec<u32>> {
    let mut out = vecs.to_vec();
    for j in 0..len {
        if out.len() == len {
            break;
        }
        let mut e = vec![0u32; len];
        e[j] = 1;
        out.push(e);
        if vectors_rank(f, &out, len) < out.len() {
            out.pop();
        }
    }
    out
}

pub fn rref(a: &Mat) -> Rref {
    a.rref()
}

pub fn inverse(a: &Mat) -> Result<Mat> {
    a.inverse()
}

pub fn diag_factorize(a: &Mat) -> DiagFactorization {
    a.diag_factorize()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gf(p: u64) -> FieldSpec {
        FieldSpec::new(p).unwrap()
    }

    #[test]
    fn rref_examples() {
        let f2 = gf(2);
        assert_eq!(Mat::identity(f2, 3).rref().rank, 3);
        assert_eq!(Mat::zero(f2, 3).rref().rank, 0);
        let ones = Mat::from_rows(f2, &[vec![1, 1], vec![1, 1]]).unwrap();
        let r = ones.rref();
        assert_eq!(r.rank, 1);
        assert_eq!(r.pivots, vec![0]);
        assert_eq!(&r.transform * &ones, r.reduced);
    }

    #[test]
    fn inverse_examples() {
        let f3 = gf(3);
        assert_eq!(
            Mat::identity(f3, 4).inverse().unwrap(),
            Mat::identity(f3, 4)
        );
        let d = Mat::diag(f3, &[2, 1]);
        assert_eq!(d.inverse().unwrap(), d);
        let ones = Mat::from_rows(gf(2), &[vec![1, 1], vec![1, 1]]).unwrap();
        assert_eq!(ones.inverse(), Err(Error::NotInvertible));
    }

    #[test]
    fn diag_factorize_examples() {
        let f2 = gf(2);
        let id = Mat::identity(f2, 3);
        let df = id.diag_factorize();
        assert_eq!((df.r, &df.v, &df.w), (3, &id, &id));
        let z = Mat::zero(f2, 2).diag_factorize();
        assert_eq!(z.r, 0);
        assert!(z.v.is_invertible() && z.w.is_invertible());
        let ones = Mat::from_rows(f2, &[vec![1, 1], vec![1, 1]]).unwrap();
        let df = ones.diag_factorize();
        assert_eq!(df.r, 1);
        let d = Mat::diag_projection(f2, 2, 1);
        assert_eq!(&(&df.v * &d) * &df.w, ones);
        let x = df.inner_inverse();
        assert_eq!(&(&ones * &x) * &ones, ones);
    }

    #[test]
    fn det_small_cases() {
        let f5 = gf(5);
        let a = Mat::from_rows(f5, &[vec![1, 2], vec![3, 4]]).unwrap();
        assert_eq!(a.det(), f5.reduce(-2));
        let b = Mat::from_rows(f5, &[vec![0, 1, 0], vec![1, 0, 0], vec![0, 0, 3]]).unwrap();
        assert_eq!(b.det(), f5.reduce(-3));
    }

    #[test]
    fn text_and_json_formats() {
        let a = Mat::parse("p=3; 2 1; 0 1").unwrap();
        assert_eq!(a, Mat::parse(r#"{"p":3,"rows":[[2,1],[0,1]]}"#).unwrap());
        assert_eq!(a.to_text(), "p=3; 2 1; 0 1");
        assert_eq!(Mat::parse(&a.to_text()).unwrap(), a);
        assert_eq!(Mat::parse("p=3; -1 4; 0 1").unwrap(), a);
        assert!(matches!(Mat::parse("p=4; 1"), Err(Error::Parse(_))));
        assert!(matches!(Mat::parse("p=3; 1 2; 3"), Err(Error::Parse(_))));
        assert!(matches!(Mat::parse("q=3; 1"), Err(Error::Parse(_))));
        let j = serde_json::to_string(&a.to_json()).unwrap();
        assert_eq!(j, r#"{"p":3,"rows":[[2,1],[0,1]]}"#);
    }

    #[test]
    fn kernel_and_column_basis() {
        let f3 = gf(3);
        let a = Mat::from_rows(f3, &[vec![1, 2, 0], vec![2, 1, 0], vec![0, 0, 0]]).unwrap();
        let ker = a.kernel_basis();
        assert_eq!(ker.len(), 3 - a.rank());
        for v in &ker {
            assert!(a.mul_vec(v).iter().all(|&x| x == 0));
        }
        assert_eq!(a.column_basis().len(), a.rank());
    }
}
