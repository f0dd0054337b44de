//! `M = [[a, I], [b, 0]]` under `b^π a b^d = 0` and its corollaries.

use super::{blk, prod, AntiTriInput, Family, RouteId, RouteOptions, Trace};
use crate::error::{Error, Result};
use crate::hypotheses::{HypothesisId, Instance};
use crate::matrix::Matrix;
use crate::oracle::{cline_transport, drazin, square_transport};
use crate::scalar::{Scalar, Tolerance};

/// `[[a, I], [b, 0]]`.
pub fn anti_triangular<S: Scalar>(a: &Matrix<S>, b: &Matrix<S>) -> Matrix<S> {
    let n = a.rows();
    blk(a, &Matrix::identity(n), b, &Matrix::zeros(n, n))
}

/// The three equivalent anti-triangular forms.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Form {
    /// `[[a, I], [b, 0]]`
    One,
    /// `[[b^π a, I], [b^π b, 0]]`
    Two,
    /// `[[a b^π, I], [b b^π, 0]]`
    Three,
}

pub fn form_matrix<S: Scalar>(
    a: &Matrix<S>,
    b: &Matrix<S>,
    form: Form,
    tol: &Tolerance,
) -> Result<Matrix<S>> {
    Instance::pair(a.clone(), b.clone()).dim()?;
    let bpi = drazin(b, tol)?.projector;
    Ok(match form {
        Form::One => anti_triangular(a, b),
        Form::Two => anti_triangular(&(&bpi * a), &(&bpi * b)),
        Form::Three => anti_triangular(&(a * &bpi), &(b * &bpi)),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// From `M^d` to `N^d`.
    OneToTwo,
    /// From `N^d` to `M^d`.
    TwoToOne,
    /// From `N^d` to the inverse of form three.
    TwoToThree,
    /// From the inverse of form three to `N^d`.
    ThreeToTwo,
}

impl Direction {
    pub fn source(self) -> Form {
        match self {
            Self::OneToTwo => Form::One,
            Self::TwoToOne | Self::TwoToThree => Form::Two,
            Self::ThreeToTwo => Form::Three,
        }
    }

    pub fn target(self) -> Form {
        match self {
            Self::OneToTwo | Self::ThreeToTwo => Form::Two,
            Self::TwoToOne => Form::One,
            Self::TwoToThree => Form::Three,
        }
    }
}

/// Group inverse of `α = [[bb^d a bb^d, bb^d], [b²b^d, 0]]`:
/// `[[0, b^d], [bb^d, -bb^d a b^d]]`.
pub fn alpha_group_inverse<S: Scalar>(a: &Matrix<S>, b: &Matrix<S>, bd: &Matrix<S>) -> Matrix<S> {
    let n = a.rows();
    let bbd = b * bd;
    blk(&Matrix::zeros(n, n), bd, &bbd, &-prod(&[&bbd, a, bd]))
}

/// Every intermediate of the `M = α + (β + γ + δ)` construction.
#[derive(Debug, Clone)]
pub struct Thm22Pieces<S: Scalar> {
    pub alpha: Matrix<S>,
    pub beta: Matrix<S>,
    pub gamma: Matrix<S>,
    pub delta: Matrix<S>,
    pub alpha_group: Matrix<S>,
    pub alpha_pi: Matrix<S>,
    /// `β + γ + δ`
    pub rest: Matrix<S>,
    pub rest_d: Matrix<S>,
    pub rest_pi: Matrix<S>,
    /// `diag(b^π, b^π)`
    pub p: Matrix<S>,
    pub inverse: Matrix<S>,
}

/// Assembles `M^d` from `b^d` and `N^d`, `N = [[b^π a, I], [b^π b, 0]]`.
pub fn thm22_pieces<S: Scalar>(
    a: &Matrix<S>,
    b: &Matrix<S>,
    bd: &Matrix<S>,
    nd: &Matrix<S>,
    tol: &Tolerance,
) -> Thm22Pieces<S> {
    let n = a.rows();
    let id = Matrix::identity(n);
    let z = Matrix::zeros(n, n);
    let bbd = b * bd;
    let bpi = &id - &bbd;

    let alpha = blk(&prod(&[&bbd, a, &bbd]), &bbd, &(b * &bbd), &z);
    let beta = blk(&prod(&[&bbd, a, &bpi]), &z, &(b * &bpi), &z);
    let gamma = blk(&z, &bpi, &z, &z);
    let delta = blk(&(&bpi * a), &z, &z, &z);
    let alpha_group = alpha_group_inverse(a, b, bd);
    let p = Matrix::block_diag(&bpi, &bpi);
    let alpha_pi = p.clone();
    let rest = &(&beta + &gamma) + &delta;

    // (β+γ+δ)^d = X·N^d·diag(I, b^π)·N^d·diag(b^π, b^π), X = [[bb^d a + b^π a, I], [b, 0]]
    let x = blk(&(&(&bbd * a) + &(&bpi * a)), &id, b, &z);
    let e = Matrix::block_diag(&id, &bpi);
    let rest_d = prod(&[&x, nd, &e, nd, &p]);
    let rest_pi = &Matrix::identity(2 * n) - &(&rest * &rest_d);

    // (β+γ+δ)^i (β+γ+δ)^π vanishes from the index on; stopping there keeps
    // floating round-off from being amplified by high powers of α^#.
    let mut inverse = &alpha_pi * &rest_d;
    let mut g_pow = alpha_group.clone();
    let mut r_pow_pi = rest_pi.clone();
    let mut scale = rest_pi.max_abs().max(1.0);
    let rest_scale = rest.max_abs().max(1.0);
    for _ in 0..2 * n {
        if r_pow_pi
            .entries()
            .iter()
            .all(|x| x.is_negligible(scale, tol))
        {
            break;
        }
        inverse = &inverse + &(&g_pow * &r_pow_pi);
        g_pow = &g_pow * &alpha_group;
        r_pow_pi = &rest * &r_pow_pi;
        scale *= rest_scale;
    }

    Thm22Pieces {
        alpha,
        beta,
        gamma,
        delta,
        alpha_group,
        alpha_pi,
        rest,
        rest_d,
        rest_pi,
        p,
        inverse,
    }
}

pub(crate) fn thm22_core<S: Scalar>(
    a: &Matrix<S>,
    b: &Matrix<S>,
    bd: &Matrix<S>,
    nd: &Matrix<S>,
    opts: &RouteOptions,
    tr: &mut Trace,
) -> Result<Matrix<S>> {
    let pc = thm22_pieces(a, b, bd, nd, &opts.tol);
    let m = anti_triangular(a, b);
    let one_minus_p = &Matrix::identity(m.rows()) - &pc.p;
    tr.identity("p·M·(1-p)", &[&pc.p, &m, &one_minus_p], opts)?;
    tr.identity("(β+γ+δ)·α", &[&pc.rest, &pc.alpha], opts)?;
    tr.formula("α^#", "[[0, b^d], [bb^d, -bb^d a b^d]]");
    tr.formula("α^π", "diag(b^π, b^π)");
    tr.formula("(β+γ+δ)^d", "M·N^d·diag(I, b^π)·N^d·diag(b^π, b^π)");
    tr.formula("M^d", "α^π(β+γ+δ)^d + Σ (α^#)^(i+1)(β+γ+δ)^i(β+γ+δ)^π");
    Ok(pc.inverse)
}

/// `M^d` for `M = [[a, I], [b, 0]]` by one of the anti-triangular routes.
pub fn anti_triangular_d<S: Scalar>(
    inp: &AntiTriInput<S>,
    route: RouteId,
    opts: &RouteOptions,
) -> Result<Matrix<S>> {
    if route.family() != Family::AntiTriangular {
        return Err(Error::InvalidArgument(format!(
            "{route} is not an anti-triangular route"
        )));
    }
    Ok(super::run_route(route, &inp.instance(), opts)?.inverse)
}

/// Shared body of the anti-triangular routes. `bd` may be supplied by a
/// caller that already derived `b^d` by formula.
pub(crate) fn anti_triangular_traced<S: Scalar>(
    a: &Matrix<S>,
    b: &Matrix<S>,
    bd: Option<Matrix<S>>,
    route: RouteId,
    opts: &RouteOptions,
    tr: &mut Trace,
) -> Result<Matrix<S>> {
    let n = a.rows();
    let id = Matrix::identity(n);
    let bd = match bd {
        Some(x) => x,
        None => tr.oracle("b^d", b, &opts.tol)?.inverse,
    };
    let bpi = &id - &(b * &bd);
    let nmat = anti_triangular(&(&bpi * a), &(&bpi * b));
    let nd = match route {
        RouteId::T22 | RouteId::C23 | RouteId::C24 | RouteId::C28 => {
            tr.oracle("N^d", &nmat, &opts.tol)?.inverse
        }
        RouteId::C25 => cor25_nd(a, b, &bpi, &nmat, opts, tr)?,
        RouteId::T26 | RouteId::C27 => thm26_nd(a, b, &bpi, &nmat, opts, tr)?,
        _ => {
            return Err(Error::InvalidArgument(format!(
                "{route} is not an anti-triangular route"
            )))
        }
    };
    thm22_core(a, b, &bd, &nd, opts, tr)
}

/// `N² = P + Q` with the data the idempotent-splitting argument uses.
#[derive(Debug, Clone)]
pub struct Cor25Split<S: Scalar> {
    pub p: Matrix<S>,
    pub q: Matrix<S>,
    pub pd: Matrix<S>,
    pub ppi: Matrix<S>,
}

pub fn cor25_split<S: Scalar>(
    a: &Matrix<S>,
    b: &Matrix<S>,
    opts: &RouteOptions,
) -> Result<Cor25Split<S>> {
    let mut tr = Trace::default();
    tr.gate(
        HypothesisId::H25,
        &Instance::pair(a.clone(), b.clone()),
        opts,
    )?;
    let bpi = drazin(b, &opts.tol)?.projector;
    cor25_split_traced(a, b, &bpi, opts, &mut tr)
}

fn cor25_split_traced<S: Scalar>(
    a: &Matrix<S>,
    b: &Matrix<S>,
    bpi: &Matrix<S>,
    opts: &RouteOptions,
    tr: &mut Trace,
) -> Result<Cor25Split<S>> {
    let n = a.rows();
    let id = Matrix::identity(n);
    let z = Matrix::zeros(n, n);
    let t = bpi * a;
    let s = bpi * b;
    let td = tr.oracle("(b^π a)^d", &t, &opts.tol)?.inverse;
    let td2 = &td * &td;
    let p = blk(&(&t * &t), &t, &z, &z);
    let q = blk(&s, &z, &(&s * &t), &s);
    let pd = blk(&td2, &(&td2 * &td), &z, &z);
    let ppi = blk(&(&id - &(&t * &td)), &-&td, &z, &id);
    tr.formula("P^d", "[[((b^π a)^d)², ((b^π a)^d)³], [0, 0]]");
    tr.formula("P^π", "[[(b^π a)^π, -(b^π a)^d], [0, I]]");
    tr.identity("P^d·Q", &[&pd, &q], opts)?;
    tr.claim("P·Q·P^π", &[&p, &q, &ppi], &opts.tol);
    Ok(Cor25Split { p, q, pd, ppi })
}

/// `N^d` from the split `N² = N²p + N²(1-p)`, `p = PP^d`, both pieces
/// inverted by formula and recombined with the `ab = 0` series.
fn cor25_nd<S: Scalar>(
    a: &Matrix<S>,
    b: &Matrix<S>,
    bpi: &Matrix<S>,
    nmat: &Matrix<S>,
    opts: &RouteOptions,
    tr: &mut Trace,
) -> Result<Matrix<S>> {
    let sp = cor25_split_traced(a, b, bpi, opts, tr)?;
    let m = nmat.rows();
    let id = Matrix::identity(m);
    let n2 = nmat * nmat;
    let proj = &sp.p * &sp.pd;
    let u = &n2 * &proj;
    let v = &n2 * &(&id - &proj);
    tr.identity("N²p·N²(1-p)", &[&u, &v], opts)?;

    let ud = &sp.pd + &prod(&[&sp.q, &sp.pd, &sp.pd]);
    tr.formula("(N²p)^d", "P^d + Q(P^d)²");
    let qd = tr.oracle("Q^d", &sp.q, &opts.tol)?.inverse;
    let qppi_d = &qd * &sp.ppi;
    tr.formula("(QP^π)^d", "Q^d P^π");
    let pppi = &sp.p * &sp.ppi;
    let mut vd = Matrix::zeros(m, m);
    let mut left = qppi_d.clone();
    let mut right = Matrix::identity(m);
    for _ in 0..m {
        vd = &vd + &(&left * &right);
        left = &left * &qppi_d;
        right = &right * &pppi;
    }
    tr.formula("(N²(1-p))^d", "Σ ((QP^π)^d)^(i+1) (PP^π)^i");
    let n2d = super::additive::lemma21_series(&u, &ud, &v, &vd, m);
    tr.formula("(N²)^d", "ab = 0 series on N²p + N²(1-p)");
    let nd = square_transport(nmat, &n2d)?;
    tr.formula("N^d", "N·(N²)^d");
    Ok(nd)
}

/// `N² = P + Q` with `PQ² = 0` and `PQP = 0`.
#[derive(Debug, Clone)]
pub struct SquareSplit<S: Scalar> {
    pub p: Matrix<S>,
    pub q: Matrix<S>,
}

pub fn thm26_square_split<S: Scalar>(
    a: &Matrix<S>,
    b: &Matrix<S>,
    opts: &RouteOptions,
) -> Result<SquareSplit<S>> {
    let mut tr = Trace::default();
    tr.gate(
        HypothesisId::H26,
        &Instance::pair(a.clone(), b.clone()),
        opts,
    )?;
    let bpi = drazin(b, &opts.tol)?.projector;
    thm26_split_traced(a, b, &bpi, opts, &mut tr)
}

fn thm26_split_traced<S: Scalar>(
    a: &Matrix<S>,
    b: &Matrix<S>,
    bpi: &Matrix<S>,
    opts: &RouteOptions,
    tr: &mut Trace,
) -> Result<SquareSplit<S>> {
    let z = Matrix::zeros(a.rows(), a.rows());
    let t = bpi * a;
    let s = bpi * b;
    tr.identity("b^π a (b^π b)²", &[&t, &s, &s], opts)?;
    tr.identity("b^π a (b^π b) b^π a", &[&t, &s, &t], opts)?;
    let p = blk(&(&t * &t), &t, &z, &z);
    let q = blk(&s, &z, &(&s * &t), &s);
    tr.identity("P·Q²", &[&p, &q, &q], opts)?;
    tr.identity("P·Q·P", &[&p, &q, &p], opts)?;
    Ok(SquareSplit { p, q })
}

fn thm26_nd<S: Scalar>(
    a: &Matrix<S>,
    b: &Matrix<S>,
    bpi: &Matrix<S>,
    nmat: &Matrix<S>,
    opts: &RouteOptions,
    tr: &mut Trace,
) -> Result<Matrix<S>> {
    let sp = thm26_split_traced(a, b, bpi, opts, tr)?;
    let n2 = &sp.p + &sp.q;
    let n2d = tr.oracle("(N²)^d", &n2, &opts.tol)?.inverse;
    let nd = square_transport(nmat, &n2d)?;
    tr.formula("N^d", "N·(N²)^d");
    Ok(nd)
}

/// Transports a Drazin inverse between the three equivalent forms using
/// only the factorizations `pM = N·diag(I, b^π)`, `Mp = N₃·diag(I, b^π)`
/// and Cline's formula. `source` is the inverse of `direction.source()`.
pub fn thm22_transforms<S: Scalar>(
    inp: &AntiTriInput<S>,
    direction: Direction,
    source: &Matrix<S>,
    opts: &RouteOptions,
) -> Result<Matrix<S>> {
    let (a, b) = (&inp.a, &inp.b);
    let n = inp.dim();
    if source.shape() != (2 * n, 2 * n) {
        return Err(Error::DimensionMismatch {
            op: "thm22_transforms",
            left: (2 * n, 2 * n),
            right: source.shape(),
        });
    }
    let mut tr = Trace::default();
    tr.gate(HypothesisId::H22, &inp.instance(), opts)?;
    let bd = drazin(b, &opts.tol)?.inverse;
    let id = Matrix::identity(n);
    let bpi = &id - &(b * &bd);

    let m = anti_triangular(a, b);
    let nmat = anti_triangular(&(&bpi * a), &(&bpi * b));
    let n3 = anti_triangular(&(a * &bpi), &(b * &bpi));
    let e = Matrix::block_diag(&id, &bpi);
    let p = Matrix::block_diag(&bpi, &bpi);

    // W = pM = N·E with E·N = N;  V = Mp = N₃·E with E·N₃ = N₃.
    let n_from_w = |wd: &Matrix<S>| cline_transport(&nmat, &e, wd);
    let w_from_n = |nd: &Matrix<S>| cline_transport(&e, &nmat, nd);
    Ok(match direction {
        Direction::OneToTwo => {
            // pM(1-p) = 0 makes pM^dp the inverse of pMp = pM.
            let wd = prod(&[&p, source, &p]);
            n_from_w(&wd)?
        }
        Direction::TwoToOne => thm22_core(a, b, &bd, source, opts, &mut tr)?,
        Direction::TwoToThree => {
            let wd = w_from_n(source)?;
            let vd = cline_transport(&p, &m, &wd)?;
            cline_transport(&n3, &e, &vd)?
        }
        Direction::ThreeToTwo => {
            let vd = cline_transport(&e, &n3, source)?;
            let wd = cline_transport(&m, &p, &vd)?;
            n_from_w(&wd)?
        }
    })
}
