//! Residual-reporting predicates, one per condition set.
//!
//! Every auxiliary Drazin inverse or spectral idempotent a predicate needs
//! (`b^d`, `(ab)^π`, `(BC)^d`, ...) is taken from [`crate::oracle`], never from
//! a representation route, so a predicate cannot inherit a bug from the code it
//! gates.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::formulas::RouteId;
use crate::matrix::Matrix;
use crate::oracle::drazin;
use crate::scalar::{Backend, Scalar, Tolerance};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum HypothesisId {
    H21,
    H22,
    H23,
    H24,
    H25,
    H26,
    H27,
    H28,
    H31,
    H32,
    H33,
    H34,
    H35,
    H41,
    H42,
    H43,
    H44,
    H45,
    H46,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Arity {
    /// Two square matrices `a`, `b` of equal size.
    Pair,
    /// Four square blocks `A`, `B`, `C`, `D` of equal size.
    Blocks,
}

impl HypothesisId {
    pub const ALL: [HypothesisId; 19] = [
        Self::H21,
        Self::H22,
        Self::H23,
        Self::H24,
        Self::H25,
        Self::H26,
        Self::H27,
        Self::H28,
        Self::H31,
        Self::H32,
        Self::H33,
        Self::H34,
        Self::H35,
        Self::H41,
        Self::H42,
        Self::H43,
        Self::H44,
        Self::H45,
        Self::H46,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::H21 => "H21",
            Self::H22 => "H22",
            Self::H23 => "H23",
            Self::H24 => "H24",
            Self::H25 => "H25",
            Self::H26 => "H26",
            Self::H27 => "H27",
            Self::H28 => "H28",
            Self::H31 => "H31",
            Self::H32 => "H32",
            Self::H33 => "H33",
            Self::H34 => "H34",
            Self::H35 => "H35",
            Self::H41 => "H41",
            Self::H42 => "H42",
            Self::H43 => "H43",
            Self::H44 => "H44",
            Self::H45 => "H45",
            Self::H46 => "H46",
        }
    }

    pub fn route(self) -> RouteId {
        match self {
            Self::H21 => RouteId::L21,
            Self::H22 => RouteId::T22,
            Self::H23 => RouteId::C23,
            Self::H24 => RouteId::C24,
            Self::H25 => RouteId::C25,
            Self::H26 => RouteId::T26,
            Self::H27 => RouteId::C27,
            Self::H28 => RouteId::C28,
            Self::H31 => RouteId::T31,
            Self::H32 => RouteId::C32,
            Self::H33 => RouteId::T33,
            Self::H34 => RouteId::C34,
            Self::H35 => RouteId::C35,
            Self::H41 => RouteId::T41,
            Self::H42 => RouteId::C42,
            Self::H43 => RouteId::T43,
            Self::H44 => RouteId::C44,
            Self::H45 => RouteId::T45,
            Self::H46 => RouteId::C46,
        }
    }

    pub fn arity(self) -> Arity {
        match self {
            Self::H41 | Self::H42 | Self::H43 | Self::H44 | Self::H45 | Self::H46 => Arity::Blocks,
            _ => Arity::Pair,
        }
    }

    /// Condition strings in the order the residuals are reported.
    ///
    /// H22 also presumes `b^π a` is Drazin invertible, which every square
    /// complex matrix is; it carries no checkable condition.
    pub fn labels(self) -> &'static [&'static str] {
        match self {
            Self::H21 => &["a b = 0"],
            Self::H22 => &["b^π a b^d = 0"],
            Self::H23 => &["b^π a b^d = 0", "a b b^π = b^π b a"],
            Self::H24 => &["b^π a b^d = 0", "b^π a b = b^π b a"],
            Self::H25 => &[
                "b^π a b^d = 0",
                "(b^π a)^d b^π a b = 0",
                "b^π a b (b^π a)^π = 0",
            ],
            Self::H26 => &["b^π a b² = 0", "b^π a b a = 0"],
            Self::H27 => &["a b² = 0", "a b a = 0"],
            Self::H28 => &["b^π a b = 0"],
            Self::H31 => &["a b² = 0", "(ab)^π a (ab)^d = 0", "(ab)^π a b a = 0"],
            Self::H32 => &["a² b = 0", "(ab)^d b (ab)^π = 0", "b a b (ab)^π = 0"],
            Self::H33 => &["a b² = 0", "(ab)^π a² b a = 0"],
            Self::H34 => &["a² b = 0", "b a b² (ab)^π = 0"],
            Self::H35 => &["a b² = 0", "a² b a = 0"],
            Self::H41 => &[
                "(BC)^π A B C A = 0",
                "(BC)^π A B C B = 0",
                "D C A = 0",
                "D C B = 0",
            ],
            Self::H42 => &[
                "(BC)^π A B C A = 0",
                "(BC)^π A B C B = 0",
                "B D C = 0",
                "B D² = 0",
            ],
            Self::H43 => &[
                "(BC)^π A (BC)^d = 0",
                "(BC)^π B C A = 0",
                "(BC)^π B C B = 0",
                "D C A = 0",
                "D C B = 0",
            ],
            Self::H44 => &[
                "(BC)^π A (BC)^d = 0",
                "(BC)^π B C A = 0",
                "(BC)^π B C B = 0",
                "B D C = 0",
                "B D² = 0",
            ],
            Self::H45 => &[
                "(CB)^π C A B C = 0",
                "A (BC)^π A B C = 0",
                "A B D = 0",
                "C B D = 0",
            ],
            Self::H46 => &[
                "(CB)^π C A B C = 0",
                "A (BC)^π A B C = 0",
                "B D C = 0",
                "B D² = 0",
            ],
        }
    }

    pub fn condition_count(self) -> usize {
        self.labels().len()
    }
}

impl fmt::Display for HypothesisId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for HypothesisId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|h| h.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::Parse(format!("unknown hypothesis id '{s}'")))
    }
}

/// The matrices a condition set is evaluated on.
#[derive(Debug, Clone, PartialEq)]
pub enum Instance<S: Scalar> {
    Pair {
        a: Matrix<S>,
        b: Matrix<S>,
    },
    Blocks {
        a: Matrix<S>,
        b: Matrix<S>,
        c: Matrix<S>,
        d: Matrix<S>,
    },
}

impl<S: Scalar> Instance<S> {
    pub fn pair(a: Matrix<S>, b: Matrix<S>) -> Self {
        Self::Pair { a, b }
    }

    pub fn blocks(a: Matrix<S>, b: Matrix<S>, c: Matrix<S>, d: Matrix<S>) -> Self {
        Self::Blocks { a, b, c, d }
    }

    pub fn arity(&self) -> Arity {
        match self {
            Self::Pair { .. } => Arity::Pair,
            Self::Blocks { .. } => Arity::Blocks,
        }
    }

    pub fn matrices(&self) -> Vec<&Matrix<S>> {
        match self {
            Self::Pair { a, b } => vec![a, b],
            Self::Blocks { a, b, c, d } => vec![a, b, c, d],
        }
    }

    pub fn from_matrices(arity: Arity, mut mats: Vec<Matrix<S>>) -> Result<Self> {
        let want = match arity {
            Arity::Pair => 2,
            Arity::Blocks => 4,
        };
        if mats.len() != want {
            return Err(Error::InvalidArgument(format!(
                "expected {want} matrices, got {}",
                mats.len()
            )));
        }
        let inst = match arity {
            Arity::Pair => {
                let b = mats.pop().unwrap();
                let a = mats.pop().unwrap();
                Self::Pair { a, b }
            }
            Arity::Blocks => {
                let d = mats.pop().unwrap();
                let c = mats.pop().unwrap();
                let b = mats.pop().unwrap();
                let a = mats.pop().unwrap();
                Self::Blocks { a, b, c, d }
            }
        };
        inst.dim()?;
        Ok(inst)
    }

    /// Common block size `n`; errors unless every matrix is `n x n`.
    pub fn dim(&self) -> Result<usize> {
        let mats = self.matrices();
        let n = mats[0].require_square("instance")?;
        for m in &mats[1..] {
            if m.shape() != (n, n) {
                return Err(Error::DimensionMismatch {
                    op: "instance",
                    left: (n, n),
                    right: m.shape(),
                });
            }
        }
        Ok(n)
    }

    pub fn map<T: Scalar>(&self, f: impl Fn(&Matrix<S>) -> Matrix<T>) -> Instance<T> {
        match self {
            Self::Pair { a, b } => Instance::Pair { a: f(a), b: f(b) },
            Self::Blocks { a, b, c, d } => Instance::Blocks {
                a: f(a),
                b: f(b),
                c: f(c),
                d: f(d),
            },
        }
    }

    pub fn is_zero(&self) -> bool {
        self.matrices().iter().all(|m| m.is_zero())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionResult {
    pub label: String,
    pub residual: f64,
    pub satisfied: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HypothesisReport {
    pub id: HypothesisId,
    pub backend: Backend,
    pub conditions: Vec<ConditionResult>,
    pub satisfied: bool,
}

impl HypothesisReport {
    pub fn max_residual(&self) -> f64 {
        self.conditions
            .iter()
            .map(|c| c.residual)
            .fold(0.0, f64::max)
    }

    /// 1-based positions of the violated conditions.
    pub fn violated(&self) -> Vec<usize> {
        self.conditions
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.satisfied)
            .map(|(k, _)| k + 1)
            .collect()
    }
}

/// Exact verdicts are exact zero tests; floating ones compare each entry with
/// the zero threshold scaled by the product of the factor magnitudes.
pub fn check_hypothesis<S: Scalar>(
    id: HypothesisId,
    inst: &Instance<S>,
    tol: &Tolerance,
) -> Result<HypothesisReport> {
    let exprs = condition_expressions(id, inst, tol)?;
    let conditions: Vec<ConditionResult> = id
        .labels()
        .iter()
        .zip(&exprs)
        .map(|(label, e)| ConditionResult {
            label: (*label).to_string(),
            residual: e.value.max_abs(),
            satisfied: e.is_negligible(tol),
        })
        .collect();
    let satisfied = conditions.iter().all(|c| c.satisfied);
    Ok(HypothesisReport {
        id,
        backend: S::BACKEND,
        conditions,
        satisfied,
    })
}

/// A condition's matrix expression with the product of its factor
/// magnitudes, against which floating-point zero tests are scaled.
#[derive(Debug, Clone)]
pub struct Expr<S: Scalar> {
    pub value: Matrix<S>,
    pub scale: f64,
}

impl<S: Scalar> Expr<S> {
    fn chain(factors: &[&Matrix<S>]) -> Self {
        let (first, rest) = factors.split_first().expect("non-empty product");
        let value = rest.iter().fold((*first).clone(), |acc, m| &acc * *m);
        let scale = factors.iter().map(|f| f.max_abs().max(1.0)).product();
        Self { value, scale }
    }

    fn minus(self, other: Self) -> Self {
        Self {
            value: &self.value - &other.value,
            scale: self.scale.max(other.scale),
        }
    }

    pub fn is_negligible(&self, tol: &Tolerance) -> bool {
        self.value
            .entries()
            .iter()
            .all(|x| x.is_negligible(self.scale, tol))
    }
}

/// The matrix expressions whose vanishing the conditions of `id` assert.
pub fn condition_expressions<S: Scalar>(
    id: HypothesisId,
    inst: &Instance<S>,
    tol: &Tolerance,
) -> Result<Vec<Expr<S>>> {
    if inst.arity() != id.arity() {
        return Err(Error::InvalidArgument(format!(
            "{id} expects {:?} input",
            id.arity()
        )));
    }
    inst.dim()?;
    match inst {
        Instance::Pair { a, b } => pair_conditions(id, a, b, tol),
        Instance::Blocks { a, b, c, d } => block_conditions(id, a, b, c, d, tol),
    }
}

fn pair_conditions<S: Scalar>(
    id: HypothesisId,
    a: &Matrix<S>,
    b: &Matrix<S>,
    tol: &Tolerance,
) -> Result<Vec<Expr<S>>> {
    use HypothesisId::*;
    let e = Expr::chain;
    Ok(match id {
        H21 => vec![e(&[a, b])],
        H22 | H23 | H24 | H25 | H28 => {
            let bd = drazin(b, tol)?;
            let bpi = &bd.projector;
            let first = e(&[bpi, a, &bd.inverse]);
            match id {
                H22 => vec![first],
                H23 => vec![first, e(&[a, b, bpi]).minus(e(&[bpi, b, a]))],
                H24 => vec![first, e(&[bpi, a, b]).minus(e(&[bpi, b, a]))],
                H25 => {
                    let t = drazin(&(bpi * a), tol)?;
                    vec![
                        first,
                        e(&[&t.inverse, bpi, a, b]),
                        e(&[bpi, a, b, &t.projector]),
                    ]
                }
                _ => vec![e(&[bpi, a, b])],
            }
        }
        H26 => {
            let bpi = drazin(b, tol)?.projector;
            vec![e(&[&bpi, a, b, b]), e(&[&bpi, a, b, a])]
        }
        H27 => vec![e(&[a, b, b]), e(&[a, b, a])],
        H31 => {
            let d = drazin(&(a * b), tol)?;
            vec![
                e(&[a, b, b]),
                e(&[&d.projector, a, &d.inverse]),
                e(&[&d.projector, a, b, a]),
            ]
        }
        H32 => {
            let d = drazin(&(a * b), tol)?;
            vec![
                e(&[a, a, b]),
                e(&[&d.inverse, b, &d.projector]),
                e(&[b, a, b, &d.projector]),
            ]
        }
        H33 => {
            let d = drazin(&(a * b), tol)?;
            vec![e(&[a, b, b]), e(&[&d.projector, a, a, b, a])]
        }
        H34 => {
            let d = drazin(&(a * b), tol)?;
            vec![e(&[a, a, b]), e(&[b, a, b, b, &d.projector])]
        }
        H35 => vec![e(&[a, b, b]), e(&[a, a, b, a])],
        _ => unreachable!("block hypothesis routed to pair conditions"),
    })
}

fn block_conditions<S: Scalar>(
    id: HypothesisId,
    a: &Matrix<S>,
    b: &Matrix<S>,
    c: &Matrix<S>,
    d: &Matrix<S>,
    tol: &Tolerance,
) -> Result<Vec<Expr<S>>> {
    use HypothesisId::*;
    let e = Expr::chain;
    let bc = drazin(&(b * c), tol)?;
    let bcpi = &bc.projector;
    let tail = |diag_kind: bool| {
        if diag_kind {
            [e(&[d, c, a]), e(&[d, c, b])]
        } else {
            [e(&[b, d, c]), e(&[b, d, d])]
        }
    };
    let mut out = Vec::new();
    match id {
        H41 | H42 => {
            out.push(e(&[bcpi, a, b, c, a]));
            out.push(e(&[bcpi, a, b, c, b]));
            out.extend(tail(id == H41));
        }
        H43 | H44 => {
            out.push(e(&[bcpi, a, &bc.inverse]));
            out.push(e(&[bcpi, b, c, a]));
            out.push(e(&[bcpi, b, c, b]));
            out.extend(tail(id == H43));
        }
        H45 | H46 => {
            let cb = drazin(&(c * b), tol)?;
            out.push(e(&[&cb.projector, c, a, b, c]));
            out.push(e(&[a, bcpi, a, b, c]));
            if id == H45 {
                out.push(e(&[a, b, d]));
                out.push(e(&[c, b, d]));
            } else {
                out.extend(tail(false));
            }
        }
        _ => unreachable!("pair hypothesis routed to block conditions"),
    }
    Ok(out)
}
