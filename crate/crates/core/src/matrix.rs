//! Dense row-major matrices over a [`Scalar`], with Gauss-Jordan elimination,
//! full-rank factorization and 2x2 block assembly.
//!
//! Shapes with zero rows or columns are valid; an `m x 0` times `0 x n`
//! product is the `m x n` zero matrix.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};
use crate::scalar::{Backend, ExactComplex, Scalar, Tolerance};

#[derive(Clone, PartialEq)]
pub struct Matrix<S> {
    rows: usize,
    cols: usize,
    data: Vec<S>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatOp {
    Add,
    Sub,
    Mul,
}

impl<S: Scalar> Matrix<S> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![S::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = S::one();
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<S>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::InvalidArgument(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> S) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds a matrix from integer entries in row-major order.
    ///
    /// Panics if `vals.len() != rows * cols`.
    pub fn from_ints(rows: usize, cols: usize, vals: &[i64]) -> Self {
        assert_eq!(vals.len(), rows * cols, "from_ints: wrong entry count");
        Self {
            rows,
            cols,
            data: vals.iter().map(|&v| S::from_i64(v)).collect(),
        }
    }

    pub fn diag(entries: &[S]) -> Self {
        let n = entries.len();
        let mut m = Self::zeros(n, n);
        for (i, e) in entries.iter().enumerate() {
            m.data[i * n + i] = e.clone();
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn entries(&self) -> &[S] {
        &self.data
    }

    pub fn get(&self, i: usize, j: usize) -> &S {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: S) {
        self.data[i * self.cols + j] = v;
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i).clone())
    }

    pub fn map<T: Scalar>(&self, f: impl Fn(&S) -> T) -> Matrix<T> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect(),
        }
    }

    pub fn require_square(&self, op: &'static str) -> Result<usize> {
        if self.is_square() {
            Ok(self.rows)
        } else {
            Err(Error::NotSquare {
                op,
                rows: self.rows,
                cols: self.cols,
            })
        }
    }

    fn ensure_finite(self, op: &'static str) -> Result<Self> {
        if self.data.iter().all(Scalar::is_finite) {
            Ok(self)
        } else {
            Err(Error::NonFinite(op))
        }
    }

    pub fn checked_add(&self, rhs: &Self) -> Result<Self> {
        self.same_shape(rhs, "add")?;
        let data = self
            .data
            .iter()
            .zip(&rhs.data)
            .map(|(x, y)| x.add(y))
            .collect();
        Self::from_vec(self.rows, self.cols, data)?.ensure_finite("add")
    }

    pub fn checked_sub(&self, rhs: &Self) -> Result<Self> {
        self.same_shape(rhs, "sub")?;
        let data = self
            .data
            .iter()
            .zip(&rhs.data)
            .map(|(x, y)| x.sub(y))
            .collect();
        Self::from_vec(self.rows, self.cols, data)?.ensure_finite("sub")
    }

    pub fn checked_mul(&self, rhs: &Self) -> Result<Self> {
        if self.cols != rhs.rows {
            return Err(Error::DimensionMismatch {
                op: "mul",
                left: self.shape(),
                right: rhs.shape(),
            });
        }
        let (m, k, n) = (self.rows, self.cols, rhs.cols);
        let mut out = vec![S::zero(); m * n];
        for i in 0..m {
            let row = &mut out[i * n..(i + 1) * n];
            for l in 0..k {
                let x = &self.data[i * k + l];
                if x.is_zero() {
                    continue;
                }
                let rrow = &rhs.data[l * n..(l + 1) * n];
                for (acc, y) in row.iter_mut().zip(rrow) {
                    if !y.is_zero() {
                        *acc = acc.add(&x.mul(y));
                    }
                }
            }
        }
        Self::from_vec(m, n, out)?.ensure_finite("mul")
    }

    fn same_shape(&self, rhs: &Self, op: &'static str) -> Result<()> {
        if self.shape() != rhs.shape() {
            return Err(Error::DimensionMismatch {
                op,
                left: self.shape(),
                right: rhs.shape(),
            });
        }
        Ok(())
    }

    pub fn scale(&self, s: &S) -> Self {
        self.map(|x| x.mul(s))
    }

    /// `self^k`; `k = 0` gives the identity.
    pub fn pow(&self, k: usize) -> Self {
        assert!(self.is_square(), "pow of non-square matrix");
        let mut acc = Self::identity(self.rows);
        for _ in 0..k {
            acc = &acc * self;
        }
        acc
    }

    /// Exactly zero (exact backend) or all entries literally zero (floating).
    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Scalar::is_zero)
    }

    /// Zero within the tolerance policy, with absolute threshold.
    pub fn is_negligible(&self, tol: &Tolerance) -> bool {
        self.data.iter().all(|x| x.is_negligible(1.0, tol))
    }

    /// Largest entry modulus, the residual norm used throughout the crate.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(Scalar::modulus).fold(0.0, f64::max)
    }

    pub fn submatrix(&self, r0: usize, c0: usize, h: usize, w: usize) -> Self {
        assert!(
            r0 + h <= self.rows && c0 + w <= self.cols,
            "submatrix out of range"
        );
        Self::from_fn(h, w, |i, j| self.get(r0 + i, c0 + j).clone())
    }

    pub fn select_columns(&self, cols: &[usize]) -> Self {
        Self::from_fn(self.rows, cols.len(), |i, j| self.get(i, cols[j]).clone())
    }

    pub fn hstack(&self, rhs: &Self) -> Result<Self> {
        if self.rows != rhs.rows {
            return Err(Error::DimensionMismatch {
                op: "hstack",
                left: self.shape(),
                right: rhs.shape(),
            });
        }
        Ok(Self::from_fn(self.rows, self.cols + rhs.cols, |i, j| {
            if j < self.cols {
                self.get(i, j).clone()
            } else {
                rhs.get(i, j - self.cols).clone()
            }
        }))
    }

    pub fn vstack(&self, rhs: &Self) -> Result<Self> {
        if self.cols != rhs.cols {
            return Err(Error::DimensionMismatch {
                op: "vstack",
                left: self.shape(),
                right: rhs.shape(),
            });
        }
        let mut data = self.data.clone();
        data.extend(rhs.data.iter().cloned());
        Self::from_vec(self.rows + rhs.rows, self.cols, data)
    }

    /// `[[a, b], [c, d]]`.
    pub fn block2(a: &Self, b: &Self, c: &Self, d: &Self) -> Result<Self> {
        a.hstack(b)?.vstack(&c.hstack(d)?)
    }

    /// Block-diagonal `diag(a, b)`.
    pub fn block_diag(a: &Self, b: &Self) -> Self {
        let z12 = Self::zeros(a.rows, b.cols);
        let z21 = Self::zeros(b.rows, a.cols);
        Self::block2(a, &z12, &z21, b).expect("block_diag shapes are consistent")
    }

    pub fn direct_sum(parts: &[Self]) -> Self {
        parts
            .iter()
            .fold(Self::zeros(0, 0), |acc, p| Self::block_diag(&acc, p))
    }

    pub fn split(&self, spec: &BlockSpec) -> Result<Vec<Vec<Self>>> {
        spec.check(self.rows, self.cols)?;
        let mut out = Vec::with_capacity(spec.row_parts.len());
        let mut r0 = 0;
        for &h in &spec.row_parts {
            let mut row = Vec::with_capacity(spec.col_parts.len());
            let mut c0 = 0;
            for &w in &spec.col_parts {
                row.push(self.submatrix(r0, c0, h, w));
                c0 += w;
            }
            out.push(row);
            r0 += h;
        }
        Ok(out)
    }

    pub fn compose(blocks: &[Vec<Self>]) -> Result<Self> {
        let mut acc: Option<Self> = None;
        for row in blocks {
            let mut it = row.iter();
            let Some(first) = it.next() else {
                return Err(Error::InvalidArgument("empty block row".into()));
            };
            let mut strip = first.clone();
            for b in it {
                strip = strip.hstack(b)?;
            }
            acc = Some(match acc {
                None => strip,
                Some(a) => a.vstack(&strip)?,
            });
        }
        acc.ok_or_else(|| Error::InvalidArgument("no blocks".into()))
    }

    /// Splits a `2n x 2n` matrix into its four `n x n` blocks.
    pub fn quarters(&self) -> Result<[Self; 4]> {
        let n2 = self.require_square("quarters")?;
        if n2 % 2 != 0 {
            return Err(Error::InvalidArgument(format!(
                "odd dimension {n2} has no 2x2 split"
            )));
        }
        let n = n2 / 2;
        Ok([
            self.submatrix(0, 0, n, n),
            self.submatrix(0, n, n, n),
            self.submatrix(n, 0, n, n),
            self.submatrix(n, n, n, n),
        ])
    }

    // -----------------------------------------------------------------------
    // Elimination

    /// Reduced row echelon form by Gauss-Jordan elimination.
    ///
    /// Floating backend: partial pivoting, and a pivot counts as zero when its
    /// modulus is at most `tol.zero` times the largest entry of the input.
    pub fn rref(&self, tol: &Tolerance) -> Rref<S> {
        let mut m = self.clone();
        let scale = self.max_abs();
        let exact = S::BACKEND == Backend::Exact;
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..m.cols {
            if r == m.rows {
                break;
            }
            let candidate = if exact {
                (r..m.rows).find(|&i| !m.get(i, c).is_zero())
            } else {
                (r..m.rows)
                    .max_by(|&i, &j| m.get(i, c).modulus().total_cmp(&m.get(j, c).modulus()))
                    .filter(|&i| !m.get(i, c).is_negligible(scale, tol))
            };
            let Some(p) = candidate else {
                if !exact {
                    for i in r..m.rows {
                        m.set(i, c, S::zero());
                    }
                }
                continue;
            };
            m.swap_rows(r, p);
            let inv = S::one()
                .checked_div(m.get(r, c), tol)
                .expect("pivot is nonzero");
            for j in c..m.cols {
                let v = m.get(r, j).mul(&inv);
                m.set(r, j, v);
            }
            m.set(r, c, S::one());
            for i in 0..m.rows {
                if i == r {
                    continue;
                }
                let f = m.get(i, c).clone();
                if f.is_zero() {
                    continue;
                }
                for j in c..m.cols {
                    let v = m.get(i, j).sub(&f.mul(m.get(r, j)));
                    m.set(i, j, v);
                }
                m.set(i, c, S::zero());
            }
            pivots.push(c);
            r += 1;
        }
        Rref { reduced: m, pivots }
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    pub fn rank(&self, tol: &Tolerance) -> usize {
        self.rref(tol).pivots.len()
    }

    /// Full-rank factorization `X = B·C` with `B` the pivot columns of `X` and
    /// `C` the nonzero rows of its reduced echelon form.
    pub fn rank_factorize(&self, tol: &Tolerance) -> RankFactorization<S> {
        let Rref { reduced, pivots } = self.rref(tol);
        let r = pivots.len();
        RankFactorization {
            left: self.select_columns(&pivots),
            right: reduced.submatrix(0, 0, r, self.cols),
            rank: r,
        }
    }

    pub fn inverse(&self, tol: &Tolerance) -> Result<Self> {
        let n = self.require_square("inverse")?;
        let aug = self.hstack(&Self::identity(n))?;
        let Rref { reduced, pivots } = aug.rref(tol);
        if pivots.len() < n || pivots.iter().take(n).enumerate().any(|(i, &p)| p != i) {
            return Err(Error::Singular);
        }
        reduced.submatrix(0, n, n, n).ensure_finite("inverse")
    }

    /// Columns spanning `{x : X·x = 0}`; shape `cols x k`.
    pub fn nullspace(&self, tol: &Tolerance) -> Self {
        let Rref { reduced, pivots } = self.rref(tol);
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        let mut basis = Self::zeros(self.cols, free.len());
        for (k, &f) in free.iter().enumerate() {
            basis.set(f, k, S::one());
            for (i, &p) in pivots.iter().enumerate() {
                basis.set(p, k, reduced.get(i, f).neg());
            }
        }
        basis
    }

    /// Rows spanning `{y : y·X = 0}`; shape `k x rows`.
    pub fn left_nullspace(&self, tol: &Tolerance) -> Self {
        self.transpose().nullspace(tol).transpose()
    }
}

impl Matrix<ExactComplex> {
    pub fn to_backend<T: Scalar>(&self) -> Matrix<T> {
        self.map(T::from_exact)
    }
}

/// Dimension-checked add, sub or product.
pub fn mat_arith<S: Scalar>(x: &Matrix<S>, y: &Matrix<S>, op: MatOp) -> Result<Matrix<S>> {
    match op {
        MatOp::Add => x.checked_add(y),
        MatOp::Sub => x.checked_sub(y),
        MatOp::Mul => x.checked_mul(y),
    }
}

pub struct Rref<S: Scalar> {
    pub reduced: Matrix<S>,
    pub pivots: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankFactorization<S: Scalar> {
    pub left: Matrix<S>,
    pub right: Matrix<S>,
    pub rank: usize,
}

/// Row and column partition of a matrix into blocks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockSpec {
    pub row_parts: Vec<usize>,
    pub col_parts: Vec<usize>,
}

impl BlockSpec {
    pub fn new(row_parts: Vec<usize>, col_parts: Vec<usize>) -> Self {
        Self {
            row_parts,
            col_parts,
        }
    }

    /// The even 2x2 split of a `2n x 2n` matrix.
    pub fn halves(n: usize) -> Self {
        Self::new(vec![n, n], vec![n, n])
    }

    fn check(&self, rows: usize, cols: usize) -> Result<()> {
        let (r, c) = (
            self.row_parts.iter().sum::<usize>(),
            self.col_parts.iter().sum::<usize>(),
        );
        if (r, c) != (rows, cols) {
            return Err(Error::DimensionMismatch {
                op: "block split",
                left: (rows, cols),
                right: (r, c),
            });
        }
        Ok(())
    }
}

impl<S: fmt::Display> fmt::Debug for Matrix<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for i in 0..self.rows {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "[")?;
            for j in 0..self.cols {
                if j > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{}", self.data[i * self.cols + j])?;
            }
            write!(f, "]")?;
        }
        write!(f, "]")
    }
}

macro_rules! binop {
    ($tr:ident, $method:ident, $checked:ident) => {
        impl<S: Scalar> $tr<&Matrix<S>> for &Matrix<S> {
            type Output = Matrix<S>;

            fn $method(self, rhs: &Matrix<S>) -> Matrix<S> {
                match self.$checked(rhs) {
                    Ok(m) => m,
                    Err(e) => panic!("{e}"),
                }
            }
        }

        impl<S: Scalar> $tr<Matrix<S>> for Matrix<S> {
            type Output = Matrix<S>;

            fn $method(self, rhs: Matrix<S>) -> Matrix<S> {
                (&self).$method(&rhs)
            }
        }

        impl<S: Scalar> $tr<&Matrix<S>> for Matrix<S> {
            type Output = Matrix<S>;

            fn $method(self, rhs: &Matrix<S>) -> Matrix<S> {
                (&self).$method(rhs)
            }
        }

        impl<S: Scalar> $tr<Matrix<S>> for &Matrix<S> {
            type Output = Matrix<S>;

            fn $method(self, rhs: Matrix<S>) -> Matrix<S> {
                self.$method(&rhs)
            }
        }
    };
}

binop!(Add, add, checked_add);
binop!(Sub, sub, checked_sub);
binop!(Mul, mul, checked_mul);

impl<S: Scalar> Neg for &Matrix<S> {
    type Output = Matrix<S>;

    fn neg(self) -> Matrix<S> {
        self.map(Scalar::neg)
    }
}

impl<S: Scalar> Neg for Matrix<S> {
    type Output = Matrix<S>;

    fn neg(self) -> Matrix<S> {
        -&self
    }
}
