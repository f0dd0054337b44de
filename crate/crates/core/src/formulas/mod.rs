//! Representation routes: each turns a hypothesis-checked input into a
//! candidate Drazin inverse by the constructions of the corresponding proof.
//!
//! Every route records, step by step, whether an intermediate quantity came
//! from a closed-form formula or from the oracle, so callers can tell a
//! verified formula from an echoed oracle value.

mod additive;
mod anti_triangular;
mod operator;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use additive::{additive_d, additive_series_l21, lemma21_tail};
pub use anti_triangular::{
    alpha_group_inverse, anti_triangular, anti_triangular_d, cor25_split, form_matrix,
    thm22_pieces, thm22_transforms, thm26_square_split, Cor25Split, Direction, Form, SquareSplit,
    Thm22Pieces,
};
pub use operator::{operator_matrix_d, pq_block_formula, pq_column_formula};

use crate::error::{Error, Result};
use crate::hypotheses::{check_hypothesis, HypothesisId, HypothesisReport, Instance};
use crate::matrix::Matrix;
use crate::oracle::{drazin, DrazinData};
use crate::scalar::{Scalar, Tolerance};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum RouteId {
    L21,
    T22,
    C23,
    C24,
    C25,
    T26,
    C27,
    C28,
    T31,
    C32,
    T33,
    C34,
    C35,
    T41,
    C42,
    T43,
    C44,
    T45,
    C46,
}

/// Which matrix a route inverts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    /// `a + b`
    Additive,
    /// `[[a, I], [b, 0]]`
    AntiTriangular,
    /// `[[A, B], [C, D]]`
    Operator,
}

impl RouteId {
    pub const ALL: [RouteId; 19] = [
        Self::L21,
        Self::T22,
        Self::C23,
        Self::C24,
        Self::C25,
        Self::T26,
        Self::C27,
        Self::C28,
        Self::T31,
        Self::C32,
        Self::T33,
        Self::C34,
        Self::C35,
        Self::T41,
        Self::C42,
        Self::T43,
        Self::C44,
        Self::T45,
        Self::C46,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::L21 => "L2.1",
            Self::T22 => "T2.2",
            Self::C23 => "C2.3",
            Self::C24 => "C2.4",
            Self::C25 => "C2.5",
            Self::T26 => "T2.6",
            Self::C27 => "C2.7",
            Self::C28 => "C2.8",
            Self::T31 => "T3.1",
            Self::C32 => "C3.2",
            Self::T33 => "T3.3",
            Self::C34 => "C3.4",
            Self::C35 => "C3.5",
            Self::T41 => "T4.1",
            Self::C42 => "C4.2",
            Self::T43 => "T4.3",
            Self::C44 => "C4.4",
            Self::T45 => "T4.5",
            Self::C46 => "C4.6",
        }
    }

    pub fn hypothesis(self) -> HypothesisId {
        use HypothesisId as H;
        match self {
            Self::L21 => H::H21,
            Self::T22 => H::H22,
            Self::C23 => H::H23,
            Self::C24 => H::H24,
            Self::C25 => H::H25,
            Self::T26 => H::H26,
            Self::C27 => H::H27,
            Self::C28 => H::H28,
            Self::T31 => H::H31,
            Self::C32 => H::H32,
            Self::T33 => H::H33,
            Self::C34 => H::H34,
            Self::C35 => H::H35,
            Self::T41 => H::H41,
            Self::C42 => H::H42,
            Self::T43 => H::H43,
            Self::C44 => H::H44,
            Self::T45 => H::H45,
            Self::C46 => H::H46,
        }
    }

    pub fn family(self) -> Family {
        match self {
            Self::L21 | Self::T31 | Self::C32 | Self::T33 | Self::C34 | Self::C35 => {
                Family::Additive
            }
            Self::T41 | Self::C42 | Self::T43 | Self::C44 | Self::T45 | Self::C46 => {
                Family::Operator
            }
            _ => Family::AntiTriangular,
        }
    }
}

impl fmt::Display for RouteId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RouteId {
    type Err = Error;

    /// Accepts `T2.2`, `t22` and similar spellings.
    fn from_str(s: &str) -> Result<Self> {
        let key: String = s.trim().chars().filter(|c| *c != '.').collect();
        Self::ALL
            .into_iter()
            .find(|r| r.as_str().replace('.', "").eq_ignore_ascii_case(&key))
            .ok_or_else(|| Error::Parse(format!("unknown route '{s}'")))
    }
}

/// Input of the anti-triangular routes: `M = [[a, I], [b, 0]]`.
#[derive(Debug, Clone, PartialEq)]
pub struct AntiTriInput<S: Scalar> {
    pub a: Matrix<S>,
    pub b: Matrix<S>,
}

impl<S: Scalar> AntiTriInput<S> {
    pub fn new(a: Matrix<S>, b: Matrix<S>) -> Result<Self> {
        Instance::pair(a.clone(), b.clone()).dim()?;
        Ok(Self { a, b })
    }

    pub fn dim(&self) -> usize {
        self.a.rows()
    }

    pub fn instance(&self) -> Instance<S> {
        Instance::pair(self.a.clone(), self.b.clone())
    }
}

/// Input of the operator-matrix routes: `M = [[A, B], [C, D]]`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockInput<S: Scalar> {
    pub a: Matrix<S>,
    pub b: Matrix<S>,
    pub c: Matrix<S>,
    pub d: Matrix<S>,
}

impl<S: Scalar> BlockInput<S> {
    pub fn new(a: Matrix<S>, b: Matrix<S>, c: Matrix<S>, d: Matrix<S>) -> Result<Self> {
        Instance::blocks(a.clone(), b.clone(), c.clone(), d.clone()).dim()?;
        Ok(Self { a, b, c, d })
    }

    pub fn dim(&self) -> usize {
        self.a.rows()
    }

    pub fn instance(&self) -> Instance<S> {
        Instance::blocks(
            self.a.clone(),
            self.b.clone(),
            self.c.clone(),
            self.d.clone(),
        )
    }

    pub fn assemble(&self) -> Matrix<S> {
        blk(&self.a, &self.b, &self.c, &self.d)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RouteOptions {
    /// Run the construction even when a hypothesis gate fails.
    pub force: bool,
    pub tol: Tolerance,
}

impl RouteOptions {
    pub fn forced(tol: Tolerance) -> Self {
        Self { force: true, tol }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    /// Closed-form expression in previously obtained quantities.
    Formula,
    /// Direct call to the rank-factorization oracle.
    Oracle,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Step {
    pub quantity: String,
    pub source: Source,
    pub via: String,
}

/// An identity a proof asserts along the way, evaluated on the instance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityCheck {
    pub label: String,
    pub residual: f64,
    pub holds: bool,
    /// Whether the construction relies on it; a failing required identity
    /// stops the route unless forced.
    pub required: bool,
}

#[derive(Debug, Clone)]
pub struct RouteOutput<S: Scalar> {
    pub route: RouteId,
    /// The matrix whose Drazin inverse was computed.
    pub target: Matrix<S>,
    pub inverse: Matrix<S>,
    pub hypothesis: HypothesisReport,
    pub steps: Vec<Step>,
    pub identities: Vec<IdentityCheck>,
}

impl<S: Scalar> RouteOutput<S> {
    /// Whether any step of the route fell back to the oracle.
    pub fn uses_oracle(&self) -> bool {
        self.steps.iter().any(|s| s.source == Source::Oracle)
    }

    /// The step that produced `quantity` (last one wins on repeats).
    pub fn step(&self, quantity: &str) -> Option<&Step> {
        self.steps.iter().rev().find(|s| s.quantity == quantity)
    }
}

/// Collects provenance and proof-identity checks while a route runs.
#[derive(Debug, Default)]
pub(crate) struct Trace {
    steps: Vec<Step>,
    identities: Vec<IdentityCheck>,
    scope: Vec<String>,
}

impl Trace {
    fn name(&self, q: &str) -> String {
        if self.scope.is_empty() {
            q.to_string()
        } else {
            format!("{}/{q}", self.scope.join("/"))
        }
    }

    pub(crate) fn formula(&mut self, quantity: &str, via: &str) {
        let quantity = self.name(quantity);
        self.steps.push(Step {
            quantity,
            source: Source::Formula,
            via: via.to_string(),
        });
    }

    pub(crate) fn oracle<S: Scalar>(
        &mut self,
        quantity: &str,
        m: &Matrix<S>,
        tol: &Tolerance,
    ) -> Result<DrazinData<S>> {
        let quantity = self.name(quantity);
        self.steps.push(Step {
            quantity,
            source: Source::Oracle,
            via: "rank factorization".to_string(),
        });
        drazin(m, tol)
    }

    pub(crate) fn scoped<T>(&mut self, scope: &str, f: impl FnOnce(&mut Self) -> T) -> T {
        self.scope.push(scope.to_string());
        let out = f(self);
        self.scope.pop();
        out
    }

    /// Records that the product of `factors` should vanish; errors unless
    /// forced. In floating point the threshold scales with the factors.
    pub(crate) fn identity<S: Scalar>(
        &mut self,
        label: &str,
        factors: &[&Matrix<S>],
        opts: &RouteOptions,
    ) -> Result<()> {
        let (residual, holds) = product_residual(factors, &opts.tol);
        self.record(label, residual, holds, opts)
    }

    /// Records a stated identity the construction does not depend on; a
    /// failure is reported but never stops the route.
    pub(crate) fn claim<S: Scalar>(
        &mut self,
        label: &str,
        factors: &[&Matrix<S>],
        tol: &Tolerance,
    ) {
        let (residual, holds) = product_residual(factors, tol);
        self.identities.push(IdentityCheck {
            label: self.name(label),
            residual,
            holds,
            required: false,
        });
    }

    pub(crate) fn record(
        &mut self,
        label: &str,
        residual: f64,
        holds: bool,
        opts: &RouteOptions,
    ) -> Result<()> {
        self.identities.push(IdentityCheck {
            label: self.name(label),
            residual,
            holds,
            required: true,
        });
        if !holds && !opts.force {
            return Err(Error::PreconditionViolated {
                what: label.to_string(),
                residual,
            });
        }
        Ok(())
    }

    /// Checks `id` on `inst`; a failing report is an error unless forced.
    pub(crate) fn gate<S: Scalar>(
        &mut self,
        id: HypothesisId,
        inst: &Instance<S>,
        opts: &RouteOptions,
    ) -> Result<HypothesisReport> {
        let report = check_hypothesis(id, inst, &opts.tol)?;
        if !report.satisfied && !opts.force {
            return Err(Error::HypothesisViolated(Box::new(report)));
        }
        Ok(report)
    }
}

/// The matrix a route computes the Drazin inverse of.
pub fn route_target<S: Scalar>(route: RouteId, inst: &Instance<S>) -> Result<Matrix<S>> {
    inst.dim()?;
    match (route.family(), inst) {
        (Family::Additive, Instance::Pair { a, b }) => Ok(a + b),
        (Family::AntiTriangular, Instance::Pair { a, b }) => Ok(anti_triangular(a, b)),
        (Family::Operator, Instance::Blocks { a, b, c, d }) => Ok(blk(a, b, c, d)),
        _ => Err(Error::InvalidArgument(format!(
            "route {route} expects {:?} input",
            route.hypothesis().arity()
        ))),
    }
}

/// Runs `route` on `inst`, gated by the route's hypothesis set.
pub fn run_route<S: Scalar>(
    route: RouteId,
    inst: &Instance<S>,
    opts: &RouteOptions,
) -> Result<RouteOutput<S>> {
    let target = route_target(route, inst)?;
    let mut tr = Trace::default();
    let hypothesis = tr.gate(route.hypothesis(), inst, opts)?;
    let inverse = match (route.family(), inst) {
        (Family::Additive, Instance::Pair { a, b }) => {
            additive::additive_traced(a, b, route, opts, &mut tr)?
        }
        (Family::AntiTriangular, Instance::Pair { a, b }) => {
            anti_triangular::anti_triangular_traced(a, b, None, route, opts, &mut tr)?
        }
        (Family::Operator, Instance::Blocks { a, b, c, d }) => {
            operator::operator_traced(a, b, c, d, route, opts, &mut tr)?
        }
        _ => unreachable!("arity checked by route_target"),
    };
    if !inverse.entries().iter().all(Scalar::is_finite) {
        return Err(Error::NonFinite("route output"));
    }
    Ok(RouteOutput {
        route,
        target,
        inverse,
        hypothesis,
        steps: tr.steps,
        identities: tr.identities,
    })
}

/// A route result side by side with the oracle on the same target.
#[derive(Debug, Clone)]
pub struct Comparison<S: Scalar> {
    pub output: RouteOutput<S>,
    pub oracle: DrazinData<S>,
    /// `max |route - oracle|`
    pub discrepancy: f64,
    pub matches: bool,
}

pub fn compare_with_oracle<S: Scalar>(
    route: RouteId,
    inst: &Instance<S>,
    opts: &RouteOptions,
) -> Result<Comparison<S>> {
    let output = run_route(route, inst, opts)?;
    let oracle = drazin(&output.target, &opts.tol)?;
    let (discrepancy, matches) = agreement(&output.inverse, &oracle.inverse, &opts.tol);
    Ok(Comparison {
        output,
        oracle,
        discrepancy,
        matches,
    })
}

/// Max-abs difference and whether it is within tolerance: exact equality in
/// the exact backend, `relative · max(1, |y|)` in the floating one.
pub fn agreement<S: Scalar>(x: &Matrix<S>, y: &Matrix<S>, tol: &Tolerance) -> (f64, bool) {
    let diff = x - y;
    let d = diff.max_abs();
    let ok = match S::BACKEND {
        crate::scalar::Backend::Exact => diff.is_zero(),
        crate::scalar::Backend::Float => d <= tol.relative * y.max_abs().max(1.0),
    };
    (d, ok)
}

pub(crate) fn blk<S: Scalar>(
    a: &Matrix<S>,
    b: &Matrix<S>,
    c: &Matrix<S>,
    d: &Matrix<S>,
) -> Matrix<S> {
    Matrix::block2(a, b, c, d).expect("block shapes are consistent by construction")
}

/// Max-abs entry of the product and whether it counts as zero, relative to
/// the product of the factor magnitudes.
fn product_residual<S: Scalar>(factors: &[&Matrix<S>], tol: &Tolerance) -> (f64, bool) {
    let m = prod(factors);
    let scale: f64 = factors.iter().map(|f| f.max_abs().max(1.0)).product();
    let holds = m.entries().iter().all(|x| x.is_negligible(scale, tol));
    (m.max_abs(), holds)
}

/// Left-to-right product of a non-empty chain.
pub(crate) fn prod<S: Scalar>(ms: &[&Matrix<S>]) -> Matrix<S> {
    let (first, rest) = ms.split_first().expect("non-empty product");
    rest.iter().fold((*first).clone(), |acc, m| &acc * *m)
}
