//! `M = [[A, B], [C, D]]` split as `P + Q` and fed to the additive routes.

use super::additive::{additive_core, Kernel};
use super::{blk, prod, BlockInput, Family, RouteId, RouteOptions, Trace};
use crate::error::{Error, Result};
use crate::hypotheses::{HypothesisId, Instance};
use crate::matrix::Matrix;
use crate::oracle::{check_axioms, drazin};
use crate::scalar::{Scalar, Tolerance};

/// `(PQ)^d` and `(PQ)^π` for `P = [[A, B], [0, D]]`, `Q = [[0, 0], [C, 0]]`,
/// where `PQ = [[BC, 0], [DC, 0]]`.
pub fn pq_block_formula<S: Scalar>(
    inp: &BlockInput<S>,
    tol: &Tolerance,
) -> Result<(Matrix<S>, Matrix<S>)> {
    let bcd = drazin(&(&inp.b * &inp.c), tol)?.inverse;
    Ok(pq_lower(&inp.b, &inp.c, &inp.d, &bcd))
}

fn pq_lower<S: Scalar>(
    b: &Matrix<S>,
    c: &Matrix<S>,
    d: &Matrix<S>,
    bcd: &Matrix<S>,
) -> (Matrix<S>, Matrix<S>) {
    let n = b.rows();
    let id = Matrix::identity(n);
    let z = Matrix::zeros(n, n);
    let dc = d * c;
    let pqd = blk(bcd, &z, &prod(&[&dc, bcd, bcd]), &z);
    let pqpi = blk(&(&id - &prod(&[b, c, bcd])), &z, &-(&dc * bcd), &id);
    (pqd, pqpi)
}

/// `(PQ)^d` and `(PQ)^π` for `P = [[A, 0], [C, 0]]`, `Q = [[0, B], [0, D]]`,
/// where `PQ = [[0, AB], [0, CB]]`.
pub fn pq_column_formula<S: Scalar>(
    inp: &BlockInput<S>,
    tol: &Tolerance,
) -> Result<(Matrix<S>, Matrix<S>)> {
    let cbd = drazin(&(&inp.c * &inp.b), tol)?.inverse;
    Ok(pq_upper(&inp.a, &inp.b, &inp.c, &cbd))
}

fn pq_upper<S: Scalar>(
    a: &Matrix<S>,
    b: &Matrix<S>,
    c: &Matrix<S>,
    cbd: &Matrix<S>,
) -> (Matrix<S>, Matrix<S>) {
    let n = a.rows();
    let id = Matrix::identity(n);
    let z = Matrix::zeros(n, n);
    let ab = a * b;
    let pqd = blk(&z, &prod(&[&ab, cbd, cbd]), &z, cbd);
    let pqpi = blk(&id, &-(&ab * cbd), &z, &(&id - &prod(&[c, b, cbd])));
    (pqd, pqpi)
}

/// `M^d` for `M = [[A, B], [C, D]]` by one of the operator-matrix routes.
pub fn operator_matrix_d<S: Scalar>(
    inp: &BlockInput<S>,
    route: RouteId,
    opts: &RouteOptions,
) -> Result<Matrix<S>> {
    if route.family() != Family::Operator {
        return Err(Error::InvalidArgument(format!(
            "{route} is not an operator-matrix route"
        )));
    }
    Ok(super::run_route(route, &inp.instance(), opts)?.inverse)
}

pub(crate) fn operator_traced<S: Scalar>(
    a: &Matrix<S>,
    b: &Matrix<S>,
    c: &Matrix<S>,
    d: &Matrix<S>,
    route: RouteId,
    opts: &RouteOptions,
    tr: &mut Trace,
) -> Result<Matrix<S>> {
    let n = a.rows();
    let z = Matrix::zeros(n, n);
    match route {
        RouteId::T41 | RouteId::T43 => {
            let p = blk(a, b, &z, d);
            let q = blk(&z, &z, c, &z);
            let bcd = tr.oracle("(BC)^d", &(b * c), &opts.tol)?.inverse;
            let (pqd, pqpi) = pq_lower(b, c, d, &bcd);
            tr.formula("(PQ)^d", "[[(BC)^d, 0], [DC((BC)^d)², 0]]");
            tr.formula("(PQ)^π", "[[(BC)^π, 0], [-DC(BC)^d, I]]");
            let (kernel, inner) = if route == RouteId::T41 {
                tr.identity("(PQ)^π P² Q P", &[&pqpi, &p, &p, &q, &p], opts)?;
                (Kernel::Square, HypothesisId::H33)
            } else {
                (Kernel::Index, HypothesisId::H31)
            };
            tr.formula("Q^d", "0, since Q² = 0");
            let qd = Matrix::zeros(2 * n, 2 * n);
            tr.scoped("P+Q", |tr| {
                tr.gate(inner, &Instance::pair(p.clone(), q.clone()), opts)?;
                additive_core(&p, &q, kernel, Some(pqd), Some(qd), opts, tr)
            })
        }
        RouteId::T45 => {
            let p = blk(a, &z, c, &z);
            let q = blk(&z, b, &z, d);
            let cbd = tr.oracle("(CB)^d", &(c * b), &opts.tol)?.inverse;
            let (pqd, _) = pq_upper(a, b, c, &cbd);
            tr.formula("(PQ)^d", "[[0, AB((CB)^d)²], [0, (CB)^d]]");
            tr.formula("(PQ)^π", "[[I, -AB(CB)^d], [0, (CB)^π]]");
            let dd = tr.oracle("D^d", d, &opts.tol)?.inverse;
            let qd = blk(&z, &prod(&[b, &dd, &dd]), &z, &dd);
            tr.formula("Q^d", "[[0, B(D^d)²], [0, D^d]]");
            tr.scoped("P+Q", |tr| {
                tr.gate(
                    HypothesisId::H33,
                    &Instance::pair(p.clone(), q.clone()),
                    opts,
                )?;
                additive_core(&p, &q, Kernel::Square, Some(pqd), Some(qd), opts, tr)
            })
        }
        RouteId::C42 | RouteId::C44 | RouteId::C46 => {
            let sub = match route {
                RouteId::C42 => RouteId::T41,
                RouteId::C44 => RouteId::T43,
                _ => RouteId::T45,
            };
            let p = blk(a, b, c, &z);
            let q = Matrix::block_diag(&z, d);
            // P = [[A, B], [C, 0]] is inverted by the matching theorem; the
            // result is certified by the axioms, not by the oracle.
            let pd = tr.scoped("P", |tr| {
                tr.gate(
                    sub.hypothesis(),
                    &Instance::blocks(a.clone(), b.clone(), c.clone(), z.clone()),
                    opts,
                )?;
                operator_traced(a, b, c, &z, sub, opts, tr)
            })?;
            let ax = check_axioms(&p, &pd, None, &opts.tol)?;
            let worst = ax.reflexive.max(ax.commuting).max(ax.nilpotent);
            tr.record("P^d satisfies the axioms", worst, ax.satisfied, opts)?;
            tr.identity("P·Q²", &[&p, &q, &q], opts)?;
            tr.identity("P·Q·P", &[&p, &q, &p], opts)?;
            tr.formula("(PQ)^d", "0, since PQ = [[0, BD], [0, 0]] is nilpotent");
            let pqd = Matrix::zeros(2 * n, 2 * n);
            let dd = tr.oracle("D^d", d, &opts.tol)?.inverse;
            let qd = Matrix::block_diag(&z, &dd);
            tr.formula("Q^d", "diag(0, D^d)");
            tr.scoped("P+Q", |tr| {
                tr.gate(
                    HypothesisId::H35,
                    &Instance::pair(p.clone(), q.clone()),
                    opts,
                )?;
                additive_core(&p, &q, Kernel::Square, Some(pqd), Some(qd), opts, tr)
            })
        }
        _ => Err(Error::InvalidArgument(format!(
            "{route} is not an operator-matrix route"
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::ExactComplex;

    type M = Matrix<ExactComplex>;

    fn s(v: i64) -> M {
        M::from_ints(1, 1, &[v])
    }

    fn blocks(a: i64, b: i64, c: i64, d: i64) -> BlockInput<ExactComplex> {
        BlockInput::new(s(a), s(b), s(c), s(d)).unwrap()
    }

    #[test]
    fn pq_examples() {
        let t = Tolerance::default();
        let (d, pi) = pq_block_formula(&blocks(0, 1, 1, 0), &t).unwrap();
        assert_eq!(d, M::from_ints(2, 2, &[1, 0, 0, 0]));
        assert_eq!(pi, M::from_ints(2, 2, &[0, 0, 0, 1]));

        let (d, pi) = pq_block_formula(&blocks(0, 0, 0, 0), &t).unwrap();
        assert!(d.is_zero());
        assert_eq!(pi, M::identity(2));

        let (d, pi) = pq_block_formula(&blocks(0, 0, 1, 1), &t).unwrap();
        assert!(d.is_zero());
        assert_eq!(pi, M::identity(2));
    }

    #[test]
    fn route_examples() {
        let o = RouteOptions::default();
        assert!(operator_matrix_d(&blocks(0, 0, 0, 0), RouteId::T41, &o)
            .unwrap()
            .is_zero());

        let inp = BlockInput::new(s(2), s(0), s(0), s(3)).unwrap();
        let got = operator_matrix_d(&inp, RouteId::T41, &o).unwrap();
        let half = ExactComplex::ratio(1, 2).unwrap();
        let third = ExactComplex::ratio(1, 3).unwrap();
        assert_eq!(got, M::diag(&[half, third]));

        let got = operator_matrix_d(&blocks(1, 1, 0, 0), RouteId::T41, &o).unwrap();
        assert_eq!(got, M::from_ints(2, 2, &[1, 1, 0, 0]));
    }
}
