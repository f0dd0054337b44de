//! Ground-truth Drazin inverses and the primitive notions built on them.
//!
//! [`drazin`] uses the recursive full-rank factorization
//! `A = B1·C1`, `C1·B1 = B2·C2`, ... which stops at the first core `Ck·Bk`
//! that is either nonsingular (index `k`,
//! `A^d = B1···Bk·(Ck·Bk)^-(k+1)·Ck···C1`) or zero (index `k+1`, `A^d = 0`).
//! No spectral factorization is involved, so the result is exact over the
//! Gaussian rationals and independent of every representation formula in
//! [`crate::formulas`].

use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalar::{Scalar, Tolerance};

/// Drazin inverse, index and spectral idempotent `I - A·A^d` of a square matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DrazinData<S: Scalar> {
    pub inverse: Matrix<S>,
    pub index: usize,
    pub projector: Matrix<S>,
}

pub fn drazin<S: Scalar>(a: &Matrix<S>, tol: &Tolerance) -> Result<DrazinData<S>> {
    let n = a.require_square("drazin")?;
    let assemble = |inverse: Matrix<S>, index: usize| {
        let projector = spectral_projector(a, &inverse);
        DrazinData {
            inverse,
            index,
            projector,
        }
    };
    if n == 0 {
        return Ok(assemble(Matrix::zeros(0, 0), 0));
    }
    let first = a.rank_factorize(tol);
    if first.rank == n {
        return Ok(assemble(a.inverse(tol)?, 0));
    }
    if first.rank == 0 {
        return Ok(assemble(Matrix::zeros(n, n), 1));
    }

    let mut lefts = vec![first.left];
    let mut rights = vec![first.right];
    loop {
        let k = lefts.len();
        let core = &rights[k - 1] * &lefts[k - 1];
        let width = core.rows();
        let next = core.rank_factorize(tol);
        if next.rank == width {
            let core_inv = core.inverse(tol)?;
            let mut acc = lefts.iter().fold(Matrix::identity(n), |acc, b| &acc * b);
            acc = &acc * &core_inv.pow(k + 1);
            acc = rights.iter().rev().fold(acc, |acc, c| &acc * c);
            return Ok(assemble(acc, k));
        }
        if next.rank == 0 {
            return Ok(assemble(Matrix::zeros(n, n), k + 1));
        }
        lefts.push(next.left);
        rights.push(next.right);
    }
}

/// `I - A·X`.
pub fn spectral_projector<S: Scalar>(a: &Matrix<S>, x: &Matrix<S>) -> Matrix<S> {
    Matrix::identity(a.rows()) - a * x
}

/// Nilpotence test `A^n = 0` standing in for spectral radius zero.
pub fn is_quasinilpotent<S: Scalar>(a: &Matrix<S>, tol: &Tolerance) -> Result<bool> {
    let n = a.require_square("is_quasinilpotent")?;
    Ok(power_vanishes(a, n, tol))
}

fn power_vanishes<S: Scalar>(a: &Matrix<S>, k: usize, tol: &Tolerance) -> bool {
    let p = a.pow(k);
    let scale = a.max_abs().max(1.0).powi(k as i32);
    p.entries().iter().all(|x| x.is_negligible(scale, tol))
}

/// Group inverse `A^#`, which exists exactly when the Drazin index is at most 1.
pub fn group_inverse<S: Scalar>(a: &Matrix<S>, tol: &Tolerance) -> Result<Matrix<S>> {
    let d = drazin(a, tol)?;
    if d.index > 1 {
        return Err(Error::NoGroupInverse { index: d.index });
    }
    Ok(d.inverse)
}

/// Cline's formula: given `(a·b)^d`, returns `(b·a)^d = b·((a·b)^d)²·a`.
pub fn cline_transport<S: Scalar>(
    a: &Matrix<S>,
    b: &Matrix<S>,
    abd: &Matrix<S>,
) -> Result<Matrix<S>> {
    let (m, n) = a.shape();
    if b.shape() != (n, m) {
        return Err(Error::DimensionMismatch {
            op: "cline_transport",
            left: a.shape(),
            right: b.shape(),
        });
    }
    if abd.shape() != (m, m) {
        return Err(Error::DimensionMismatch {
            op: "cline_transport",
            left: (m, m),
            right: abd.shape(),
        });
    }
    b.checked_mul(abd)?.checked_mul(abd)?.checked_mul(a)
}

/// Given `(N²)^d`, returns `N^d = N·(N²)^d`.
pub fn square_transport<S: Scalar>(n: &Matrix<S>, nsqd: &Matrix<S>) -> Result<Matrix<S>> {
    n.require_square("square_transport")?;
    if nsqd.shape() != n.shape() {
        return Err(Error::DimensionMismatch {
            op: "square_transport",
            left: n.shape(),
            right: nsqd.shape(),
        });
    }
    n.checked_mul(nsqd)
}

/// Residuals of the three defining identities for a candidate `x = a^d`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AxiomCheck {
    /// `max |x·a·x - x|`
    pub reflexive: f64,
    /// `max |a·x - x·a|`
    pub commuting: f64,
    /// `max |(a - a²·x)^k|` with `k` the supplied nilpotency bound
    pub nilpotent: f64,
    pub satisfied: bool,
}

/// Checks `x·a·x = x`, `a·x = x·a` and `(a - a²x)^k = 0`.
///
/// `k = None` uses the matrix dimension, which is the weakest bound that
/// still certifies nilpotence.
pub fn check_axioms<S: Scalar>(
    a: &Matrix<S>,
    x: &Matrix<S>,
    k: Option<usize>,
    tol: &Tolerance,
) -> Result<AxiomCheck> {
    let n = a.require_square("check_axioms")?;
    if x.shape() != a.shape() {
        return Err(Error::DimensionMismatch {
            op: "check_axioms",
            left: a.shape(),
            right: x.shape(),
        });
    }
    let k = k.unwrap_or(n);
    let ax = a * x;
    let refl = &(x * &ax) - x;
    let comm = &ax - &(x * a);
    let nil_part = a - &(a * &ax);
    let nil_pow = nil_part.pow(k);
    let scale = nil_part.max_abs().max(1.0).powi(k as i32);
    let satisfied = refl.is_negligible(tol)
        && comm.is_negligible(tol)
        && nil_pow
            .entries()
            .iter()
            .all(|v| v.is_negligible(scale, tol));
    Ok(AxiomCheck {
        reflexive: refl.max_abs(),
        commuting: comm.max_abs(),
        nilpotent: nil_pow.max_abs(),
        satisfied,
    })
}
