//! `(a + b)^d` through the anti-triangular matrix `[[a, I], [ab, 0]]`.

use super::anti_triangular::{anti_triangular_traced, thm22_core};
use super::{blk, prod, Family, RouteId, RouteOptions, Trace};
use crate::error::{Error, Result};
use crate::hypotheses::{HypothesisId, Instance};
use crate::matrix::Matrix;
use crate::oracle::{cline_transport, drazin};
use crate::scalar::{Scalar, Tolerance};

/// `Σ_{i<terms} b^i b^π (a^d)^(i+1) + Σ_{i<terms} (b^d)^(i+1) a^i a^π`,
/// which is `(a + b)^d` when `ab = 0` and `terms` is at least the dimension.
pub(crate) fn lemma21_series<S: Scalar>(
    a: &Matrix<S>,
    ad: &Matrix<S>,
    b: &Matrix<S>,
    bd: &Matrix<S>,
    terms: usize,
) -> Matrix<S> {
    let n = a.rows();
    let id = Matrix::identity(n);
    let api = &id - &(a * ad);
    let bpi = &id - &(b * bd);
    let mut out = Matrix::zeros(n, n);
    let mut b_pow = bpi;
    let mut ad_pow = ad.clone();
    let mut bd_pow = bd.clone();
    let mut a_pow = api;
    for _ in 0..terms {
        out = &out + &(&b_pow * &ad_pow);
        out = &out + &(&bd_pow * &a_pow);
        b_pow = b * &b_pow;
        ad_pow = &ad_pow * ad;
        bd_pow = &bd_pow * bd;
        a_pow = a * &a_pow;
    }
    out
}

/// `(a + b)^d` for `ab = 0` by the two-series formula.
pub fn additive_series_l21<S: Scalar>(
    a: &Matrix<S>,
    b: &Matrix<S>,
    opts: &RouteOptions,
) -> Result<Matrix<S>> {
    let n = Instance::pair(a.clone(), b.clone()).dim()?;
    let ab = a * b;
    if !ab.is_negligible(&opts.tol) && !opts.force {
        return Err(Error::PreconditionViolated {
            what: "a b = 0".into(),
            residual: ab.max_abs(),
        });
    }
    let ad = drazin(a, &opts.tol)?.inverse;
    let bd = drazin(b, &opts.tol)?.inverse;
    Ok(lemma21_series(a, &ad, b, &bd, n))
}

/// The first omitted terms `(b^n b^π (a^d)^(n+1), (b^d)^(n+1) a^n a^π)` of
/// the truncated series; both vanish for `n x n` inputs.
pub fn lemma21_tail<S: Scalar>(
    a: &Matrix<S>,
    b: &Matrix<S>,
    tol: &Tolerance,
) -> Result<(Matrix<S>, Matrix<S>)> {
    let n = Instance::pair(a.clone(), b.clone()).dim()?;
    let da = drazin(a, tol)?;
    let db = drazin(b, tol)?;
    let first = prod(&[&b.pow(n), &db.projector, &da.inverse.pow(n + 1)]);
    let second = prod(&[&db.inverse.pow(n + 1), &a.pow(n), &da.projector]);
    Ok((first, second))
}

/// `(a + b)^d` by one of the additive routes.
pub fn additive_d<S: Scalar>(
    a: &Matrix<S>,
    b: &Matrix<S>,
    route: RouteId,
    opts: &RouteOptions,
) -> Result<Matrix<S>> {
    if route.family() != Family::Additive {
        return Err(Error::InvalidArgument(format!(
            "{route} is not an additive route"
        )));
    }
    Ok(super::run_route(route, &Instance::pair(a.clone(), b.clone()), opts)?.inverse)
}

pub(crate) fn additive_traced<S: Scalar>(
    a: &Matrix<S>,
    b: &Matrix<S>,
    route: RouteId,
    opts: &RouteOptions,
    tr: &mut Trace,
) -> Result<Matrix<S>> {
    match route {
        RouteId::L21 => {
            let ad = tr.oracle("a^d", a, &opts.tol)?.inverse;
            let bd = tr.oracle("b^d", b, &opts.tol)?.inverse;
            tr.formula("(a+b)^d", "Σ b^i b^π (a^d)^(i+1) + Σ (b^d)^(i+1) a^i a^π");
            Ok(lemma21_series(a, &ad, b, &bd, a.rows()))
        }
        RouteId::T31 => additive_core(a, b, Kernel::Index, None, None, opts, tr),
        RouteId::T33 | RouteId::C35 => additive_core(a, b, Kernel::Square, None, None, opts, tr),
        RouteId::C32 | RouteId::C34 => {
            let kernel = if route == RouteId::C32 {
                Kernel::Index
            } else {
                Kernel::Square
            };
            let (at, bt) = (b.transpose(), a.transpose());
            let out = tr.scoped("transpose", |tr| {
                additive_core(&at, &bt, kernel, None, None, opts, tr)
            })?;
            tr.formula("(a+b)^d", "transpose of the primal route on (bᵀ, aᵀ)");
            Ok(out.transpose())
        }
        _ => Err(Error::InvalidArgument(format!(
            "{route} is not an additive route"
        ))),
    }
}

/// How `H^d`, `H = [[a, I], [ab, 0]]`, is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Kernel {
    /// `(ab)^π a (ab)^d = 0`: the general construction, with `N^d` from the
    /// `ab² = 0, aba = 0` route on `((ab)^π a, (ab)^π ab)`.
    Index,
    /// `(ab)^π a² b a = 0`: the square-split route on `(a, ab)`.
    Square,
}

/// `(a + b)^d` for `ab² = 0`, from `M = [[a, ab], [I, b]] = K + L` with
/// `KL = 0`, `K = [[a, I], [I, 0]]·diag(I, ab)` and `a + b = (I, b)·col(a, I)`.
///
/// `abd` and `bd` may be supplied when the caller derived them by formula.
pub(crate) fn additive_core<S: Scalar>(
    a: &Matrix<S>,
    b: &Matrix<S>,
    kernel: Kernel,
    abd: Option<Matrix<S>>,
    bd: Option<Matrix<S>>,
    opts: &RouteOptions,
    tr: &mut Trace,
) -> Result<Matrix<S>> {
    let n = a.rows();
    let id = Matrix::identity(n);
    let z = Matrix::zeros(n, n);
    let ab = a * b;
    let abd = match abd {
        Some(x) => x,
        None => tr.oracle("(ab)^d", &ab, &opts.tol)?.inverse,
    };

    let hd = match kernel {
        Kernel::Index => {
            let abpi = &id - &(&ab * &abd);
            let a2 = &abpi * a;
            let b2 = &abpi * &ab;
            tr.identity("(ab)^π a [(ab)^π ab]²", &[&a2, &b2, &b2], opts)?;
            tr.identity("(ab)^π a [(ab)^π ab] (ab)^π a", &[&a2, &b2, &a2], opts)?;
            let nd = tr.scoped("N", |tr| {
                tr.gate(
                    HypothesisId::H27,
                    &Instance::pair(a2.clone(), b2.clone()),
                    opts,
                )?;
                tr.formula("((ab)^π ab)^d", "0, since (ab)^π ab is nilpotent");
                anti_triangular_traced(&a2, &b2, Some(z.clone()), RouteId::C27, opts, tr)
            })?;
            tr.scoped("H", |tr| {
                tr.gate(
                    HypothesisId::H22,
                    &Instance::pair(a.clone(), ab.clone()),
                    opts,
                )?;
                thm22_core(a, &ab, &abd, &nd, opts, tr)
            })?
        }
        Kernel::Square => tr.scoped("H", |tr| {
            tr.gate(
                HypothesisId::H26,
                &Instance::pair(a.clone(), ab.clone()),
                opts,
            )?;
            anti_triangular_traced(a, &ab, Some(abd.clone()), RouteId::T26, opts, tr)
        })?,
    };

    let g = blk(a, &id, &id, &z);
    let f = Matrix::block_diag(&id, &ab);
    let kd = cline_transport(&f, &g, &hd)?;
    tr.formula("K^d", "G·(H^d)²·F with H = F·G, K = G·F");

    let bd = match bd {
        Some(x) => x,
        None => tr.oracle("b^d", b, &opts.tol)?.inverse,
    };
    let k = &g * &f;
    let l = Matrix::block_diag(&z, b);
    let ld = Matrix::block_diag(&z, &bd);
    tr.formula("L^d", "diag(0, b^d)");
    tr.identity("K·L", &[&k, &l], opts)?;
    let md = lemma21_series(&k, &kd, &l, &ld, 2 * n);
    tr.formula("M^d", "Σ L^i L^π (K^d)^(i+1) + Σ (L^d)^(i+1) K^i K^π");

    let col = a.vstack(&id)?;
    let row = id.hstack(b)?;
    let out = cline_transport(&col, &row, &md)?;
    tr.formula("(a+b)^d", "(I, b)·(M^d)²·col(a, I)");
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::ExactComplex;

    type M = Matrix<ExactComplex>;

    fn opts() -> RouteOptions {
        RouteOptions::default()
    }

    #[test]
    fn series_examples() {
        let t = opts();
        let b = M::from_ints(2, 2, &[2, 1, 0, 0]);
        let bd = drazin(&b, &t.tol).unwrap().inverse;
        assert_eq!(additive_series_l21(&M::zeros(2, 2), &b, &t).unwrap(), bd);
        assert_eq!(additive_series_l21(&b, &M::zeros(2, 2), &t).unwrap(), bd);

        let a = M::from_ints(2, 2, &[0, 1, 0, 0]);
        let b = M::from_ints(2, 2, &[1, 0, 0, 0]);
        assert_eq!(
            additive_series_l21(&a, &b, &t).unwrap(),
            M::from_ints(2, 2, &[1, 1, 0, 0])
        );
    }

    #[test]
    fn series_precondition() {
        let one = M::identity(1);
        let err = additive_series_l21(&one, &one, &opts()).unwrap_err();
        assert!(matches!(err, Error::PreconditionViolated { residual, .. } if residual == 1.0));
    }

    #[test]
    fn route_examples() {
        let t = opts();
        let one = M::identity(1);
        let zero = M::zeros(1, 1);
        assert_eq!(additive_d(&one, &zero, RouteId::T31, &t).unwrap(), one);

        let a = M::from_ints(2, 2, &[0, 1, 0, 0]);
        let b = M::from_ints(2, 2, &[1, 0, 0, 0]);
        let want = M::from_ints(2, 2, &[1, 1, 0, 0]);
        assert_eq!(additive_d(&a, &b, RouteId::T33, &t).unwrap(), want);
        assert_eq!(additive_d(&a, &b, RouteId::L21, &t).unwrap(), want);
        assert!(additive_d(&a, &b, RouteId::T22, &t).is_err());
    }

    #[test]
    fn tail_vanishes() {
        let a = M::from_ints(2, 2, &[0, 1, 0, 0]);
        let b = M::from_ints(2, 2, &[1, 0, 0, 0]);
        let (x, y) = lemma21_tail(&a, &b, &Tolerance::default()).unwrap();
        assert!(x.is_zero() && y.is_zero());
    }
}
