//! Seeded instances that satisfy a chosen condition set exactly.
//!
//! Instances are built in coordinates adapted to `b` (or to `BC` for block
//! ids), where the conditions become block-zero or linear constraints, and
//! then conjugated by a random unimodular similarity. Linear constraints are
//! solved generically: the solution space of `X ↦ (constraint matrices)` is
//! computed exactly and a random element of it is drawn.
//!
//! | id | recipe (adapted coordinates, `b = diag(b₁ invertible, N nilpotent)`) |
//! |----|------------------------------------------------------------------|
//! | H21 | `a` drawn from `{a : ab = 0}` |
//! | H22–H24, H28 | `a` drawn from the solution space of the (linear) conditions |
//! | H25 | `a = [[a₁₁, a₁₂], [0, diag(c₁, c₂)]]`, `N = [[0, 0], [N₂₁, N₂₂]]`, `c₂N₂₂ = 0` |
//! | H26 | `a = [[a₁₁, a₁₂], [0, XY]]`, `YN² = 0`, `YNX = 0` |
//! | H27 | `a = [[0, X₁Y], [0, X₂Y]]`, `YN² = 0`, `YNX₂ = 0` |
//! | H31, H33, H35 | direct sums of an H27 block with an atom where `ab` has an invertible core |
//! | H32, H34 | `(bᵀ, aᵀ)` of an H31 / H33 instance |
//! | H41–H46 | `B, C` chosen first, then `A` and `D` from linear solution spaces |

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hypotheses::{check_hypothesis, HypothesisId, Instance};
use crate::matrix::Matrix;
use crate::oracle::drazin;
use crate::scalar::{ExactComplex, Scalar, Tolerance};

type Q = ExactComplex;
type M = Matrix<Q>;

/// Entries are `k / d` with `|k| ≤ max_abs` and `d` from `denominators`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntryPool {
    pub max_abs: i64,
    pub denominators: Vec<i64>,
}

impl Default for EntryPool {
    fn default() -> Self {
        Self {
            max_abs: 3,
            denominators: vec![1, 2],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenConfig {
    pub id: HypothesisId,
    pub n: usize,
    pub seed: u64,
    pub pool: EntryPool,
    pub scramble: bool,
}

impl GenConfig {
    pub fn new(id: HypothesisId, n: usize, seed: u64) -> Self {
        Self {
            id,
            n,
            seed,
            pool: EntryPool::default(),
            scramble: true,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Generated {
    pub instance: Instance<Q>,
    /// Short name of the construction that produced the instance.
    pub recipe: &'static str,
}

const ATTEMPTS: usize = 8;

pub fn generate_instance(cfg: &GenConfig) -> Result<Generated> {
    if cfg.n == 0 {
        return Err(Error::Infeasible("dimension must be at least 1".into()));
    }
    if cfg.pool.max_abs < 1
        || cfg.pool.denominators.is_empty()
        || cfg.pool.denominators.iter().any(|d| *d < 1)
    {
        return Err(Error::InvalidArgument(
            "entry pool needs max_abs ≥ 1 and positive denominators".into(),
        ));
    }
    let tol = Tolerance::default();
    let salt = cfg.id as u64;
    let mut g = Gen::new(
        cfg.seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15),
        cfg.pool.clone(),
    );
    for _ in 0..ATTEMPTS {
        let (instance, recipe) = build(&mut g, cfg.id, cfg.n)?;
        let instance = if cfg.scramble {
            g.scramble(instance)
        } else {
            instance
        };
        if check_hypothesis(cfg.id, &instance, &tol)?.satisfied {
            return Ok(Generated { instance, recipe });
        }
    }
    Err(Error::Infeasible(format!(
        "no {} instance of size {} after {ATTEMPTS} attempts",
        cfg.id, cfg.n
    )))
}

fn build(g: &mut Gen, id: HypothesisId, n: usize) -> Result<(Instance<Q>, &'static str)> {
    use HypothesisId::*;
    Ok(match id {
        H21 | H22 | H23 | H24 | H28 => {
            let b = g.adapted_b(n);
            let bd = drazin(&b, &g.tol)?;
            let (bdi, bpi) = (bd.inverse, bd.projector);
            let a = g.subspace(n, n, |a| match id {
                H21 => vec![a * &b],
                H22 => vec![&(&bpi * a) * &bdi],
                H23 => vec![
                    &(&bpi * a) * &bdi,
                    &(&(a * &b) * &bpi) - &(&(&bpi * &b) * a),
                ],
                H24 => vec![
                    &(&bpi * a) * &bdi,
                    &(&(&bpi * a) * &b) - &(&(&bpi * &b) * a),
                ],
                _ => vec![&(&bpi * a) * &b],
            });
            (Instance::pair(a, b), "linear")
        }
        H25 => (h25(g, n), "h25-split"),
        H26 => (h26(g, n), "h26-factor"),
        H27 => {
            let (a, b) = h27_atom(g, n);
            (Instance::pair(a, b), "h27-columns")
        }
        H31 | H33 | H35 => (atoms(g, id, n), "direct-sum"),
        H32 | H34 => {
            let primal = if id == H32 { H31 } else { H33 };
            match atoms(g, primal, n) {
                Instance::Pair { a, b } => {
                    (Instance::pair(b.transpose(), a.transpose()), "transpose")
                }
                _ => unreachable!(),
            }
        }
        H41 | H42 | H43 | H44 | H45 | H46 => (blocks(g, id, n)?, "bc-adapted"),
    })
}

/// `b = diag(b₁, N)` with the invertible part of random size.
fn split_size(g: &mut Gen, n: usize) -> (usize, usize) {
    // keep a nilpotent part most of the time so that b^π ≠ 0
    let k = if g.coin(0.8) {
        g.range(1, n)
    } else {
        g.range(0, n)
    };
    (n - k, k)
}

fn h25(g: &mut Gen, n: usize) -> Instance<Q> {
    let (r, k) = split_size(g, n);
    let k1 = g.range(0, k);
    let k2 = k - k1;
    let n22 = g.nilpotent(k2);
    let n21 = g.matrix(k2, k1);
    let nfull = Matrix::compose(&[
        vec![M::zeros(k1, k1), M::zeros(k1, k2)],
        vec![n21, n22.clone()],
    ])
    .expect("conforming blocks");
    let c1 = g.invertible(k1);
    let c2 = g.subspace(k2, k2, |x| vec![x * &n22, lower_with_diag(x)]);
    let a22 = M::block_diag(&c1, &c2);
    let b = M::block_diag(&g.invertible(r), &nfull);
    let a = Matrix::compose(&[
        vec![g.matrix(r, r), g.matrix(r, k)],
        vec![M::zeros(k, r), a22],
    ])
    .expect("conforming blocks");
    Instance::pair(a, b)
}

fn h26(g: &mut Gen, n: usize) -> Instance<Q> {
    let (r, k) = split_size(g, n);
    let nmat = g.nilpotent(k);
    let m = g.range(1, k.max(1));
    let y = g.rows_in(&(&nmat * &nmat).left_nullspace(&g.tol), m);
    let x = g.cols_in(&(&y * &nmat).nullspace(&g.tol), m);
    let a = Matrix::compose(&[
        vec![g.matrix(r, r), g.matrix(r, k)],
        vec![M::zeros(k, r), &x * &y],
    ])
    .expect("conforming blocks");
    Instance::pair(a, M::block_diag(&g.invertible(r), &nmat))
}

/// `ab² = 0`, `aba = 0`: `a` has zero columns on the core of `b` and its
/// nilpotent columns factor through `Y` with `YN² = 0`, `YNX₂ = 0`.
fn h27_atom(g: &mut Gen, n: usize) -> (M, M) {
    let (r, k) = split_size(g, n);
    let nmat = g.nilpotent(k);
    let m = g.range(1, k.max(1));
    let y = g.rows_in(&(&nmat * &nmat).left_nullspace(&g.tol), m);
    let x_bot = g.cols_in(&(&y * &nmat).nullspace(&g.tol), m);
    let x_top = g.matrix(r, m);
    let a = Matrix::compose(&[
        vec![M::zeros(r, r), &x_top * &y],
        vec![M::zeros(k, r), &x_bot * &y],
    ])
    .expect("conforming blocks");
    (a, M::block_diag(&g.invertible(r), &nmat))
}

/// Spaces `V0 ⊕ V1 ⊕ V2 ⊕ V3`: `b = diag(b₀, N₁, [[0, b₂₃], [0, 0]])` and `a`
/// is supported on the `V2` columns with `a₂₂ = 0` and `a₃₂` invertible, so
/// `ab` is group invertible with `ab² = 0` and `a² = 0`.
fn core_atom(g: &mut Gen, s: usize) -> (M, M) {
    let m = g.range(1, s / 2);
    let rest = s - 2 * m;
    let r0 = g.range(0, rest);
    let r1 = rest - r0;
    let sizes = [r0, r1, m, m];
    let b23 = g.invertible(m);
    let b = place(
        &sizes,
        vec![
            (0, 0, g.invertible(r0)),
            (1, 1, g.nilpotent(r1)),
            (2, 3, b23),
        ],
    );
    let a = place(
        &sizes,
        vec![
            (0, 2, g.matrix(r0, m)),
            (1, 2, g.matrix(r1, m)),
            (3, 2, g.invertible(m)),
        ],
    );
    (a, b)
}

/// `a = [[0, 0], [a₃₂, a₃₃]]`, `b = [[0, b₂₃], [0, 0]]` with `a₃₂ b₂₃`
/// invertible: `ab = diag(0, a₃₂b₂₃)` and `(ab)^π` kills every row of `a`.
fn square_core_atom(g: &mut Gen, m: usize) -> (M, M) {
    let sizes = [m, m];
    let a = place(
        &sizes,
        vec![(1, 0, g.invertible(m)), (1, 1, g.matrix(m, m))],
    );
    let b = place(&sizes, vec![(0, 1, g.invertible(m))]);
    (a, b)
}

fn atoms(g: &mut Gen, id: HypothesisId, n: usize) -> Instance<Q> {
    let mut a_parts = Vec::new();
    let mut b_parts = Vec::new();
    let mut left = n;
    if n >= 2 && g.coin(0.75) {
        let use_square = id == HypothesisId::H33 && g.coin(0.5);
        let (a, b) = if use_square {
            let m = g.range(1, n / 2);
            square_core_atom(g, m)
        } else {
            let s = g.range(2, n);
            core_atom(g, s)
        };
        left -= a.rows();
        a_parts.push(a);
        b_parts.push(b);
    }
    if left > 0 {
        let (a, b) = h27_atom(g, left);
        a_parts.push(a);
        b_parts.push(b);
    }
    Instance::pair(M::direct_sum(&a_parts), M::direct_sum(&b_parts))
}

fn blocks(g: &mut Gen, id: HypothesisId, n: usize) -> Result<Instance<Q>> {
    use HypothesisId::*;
    let (b, c) = match id {
        H43 | H44 => {
            if g.coin(0.6) {
                group_pair(g, n)
            } else {
                let rank = g.range(0, n - 1);
                let c = g.low_rank(n, n, rank);
                let kernel = c.nullspace(&g.tol);
                let b = g.cols_in(&kernel, n);
                (b, c)
            }
        }
        _ => {
            let rb = g.range(1, n);
            let rc = g.range(1, n);
            (g.low_rank(n, n, rb), g.low_rank(n, n, rc))
        }
    };
    let f = &b * &c;
    let fd = drazin(&f, &g.tol)?;
    let (fdi, fpi) = (fd.inverse, fd.projector);
    let a = match id {
        H43 | H44 => g.subspace(n, n, |a| vec![&(&fpi * a) * &fdi, &(&fpi * &f) * a]),
        _ => g.subspace(n, n, |a| vec![&(&fpi * a) * &f]),
    };
    let d = match id {
        H41 | H43 => {
            let cab = &c * &a.hstack(&b)?;
            let rows = g.range(0, n);
            let d = g.rows_in(&cab.left_nullspace(&g.tol), rows);
            pad_rows(d, n)
        }
        H45 => {
            let stacked = (&a * &b).vstack(&(&c * &b))?;
            let cols = g.range(0, n);
            pad_cols(g.cols_in(&stacked.nullspace(&g.tol), cols), n)
        }
        _ => {
            if g.coin(0.1) {
                M::zeros(n, n)
            } else if g.coin(0.5) {
                g.cols_in(&b.nullspace(&g.tol), n)
            } else {
                let m = g.range(1, n);
                let y = g.rows_in(&c.left_nullspace(&g.tol), m);
                let x = g.cols_in(&y.nullspace(&g.tol), m);
                &x * &y
            }
        }
    };
    Ok(Instance::blocks(a, b, c, d))
}

/// `B = [U | Z]·T`, `C = T⁻¹·[W; 0]` with `WU` invertible, so `BC = UW` is
/// group invertible.
fn group_pair(g: &mut Gen, n: usize) -> (M, M) {
    let m = g.range(1, n);
    let (t, t_inv) = g.unimodular(n);
    loop {
        let u = g.matrix(n, m);
        let w = g.matrix(m, n);
        if (&w * &u).rank(&g.tol) < m {
            continue;
        }
        let z = g.matrix(n, n - m);
        let b = &u.hstack(&z).expect("rows agree") * &t;
        let c = &t_inv * &w.vstack(&M::zeros(n - m, n)).expect("cols agree");
        return (b, c);
    }
}

/// Zero-pads a `k x n` matrix with `k ≤ n` to `n x n`.
fn pad_rows(d: M, n: usize) -> M {
    let k = d.rows();
    d.vstack(&M::zeros(n - k, n)).expect("cols agree")
}

fn pad_cols(d: M, n: usize) -> M {
    let k = d.cols();
    d.hstack(&M::zeros(n, n - k)).expect("rows agree")
}

/// Mask of the entries on and below the diagonal.
fn lower_with_diag(x: &M) -> M {
    M::from_fn(x.rows(), x.cols(), |i, j| {
        if i >= j {
            x.get(i, j).clone()
        } else {
            Q::zero()
        }
    })
}

/// Square block matrix over the partition `sizes` with the listed blocks.
fn place(sizes: &[usize], blocks: Vec<(usize, usize, M)>) -> M {
    let mut grid: Vec<Vec<M>> = sizes
        .iter()
        .map(|&h| sizes.iter().map(|&w| M::zeros(h, w)).collect())
        .collect();
    for (i, j, m) in blocks {
        debug_assert_eq!(m.shape(), (sizes[i], sizes[j]));
        grid[i][j] = m;
    }
    let total: usize = sizes.iter().sum();
    if total == 0 {
        return M::zeros(0, 0);
    }
    // zero-height block rows would make `compose` see empty strips
    let grid: Vec<Vec<M>> = grid
        .into_iter()
        .zip(sizes)
        .filter(|(_, &h)| h > 0)
        .map(|(row, _)| {
            row.into_iter()
                .zip(sizes)
                .filter(|(_, &w)| w > 0)
                .map(|(m, _)| m)
                .collect()
        })
        .collect();
    Matrix::compose(&grid).expect("conforming blocks")
}

struct Gen {
    rng: ChaCha8Rng,
    pool: EntryPool,
    tol: Tolerance,
}

impl Gen {
    fn new(seed: u64, pool: EntryPool) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
            pool,
            tol: Tolerance::default(),
        }
    }

    fn coin(&mut self, p: f64) -> bool {
        self.rng.random_bool(p)
    }

    /// Uniform in `lo..=hi`.
    fn range(&mut self, lo: usize, hi: usize) -> usize {
        self.rng.random_range(lo..=hi.max(lo))
    }

    fn entry(&mut self) -> Q {
        let k = self
            .rng
            .random_range(-self.pool.max_abs..=self.pool.max_abs);
        let d = self.pool.denominators[self.rng.random_range(0..self.pool.denominators.len())];
        Q::ratio(k, d).expect("positive denominator")
    }

    fn nonzero_entry(&mut self) -> Q {
        loop {
            let x = self.entry();
            if !x.is_zero() {
                return x;
            }
        }
    }

    fn matrix(&mut self, r: usize, c: usize) -> M {
        M::from_fn(r, c, |_, _| self.entry())
    }

    fn invertible(&mut self, n: usize) -> M {
        loop {
            let m = self.matrix(n, n);
            if m.rank(&self.tol) == n {
                return m;
            }
        }
    }

    /// Strictly upper triangular.
    fn nilpotent(&mut self, n: usize) -> M {
        M::from_fn(n, n, |i, j| if j > i { self.entry() } else { Q::zero() })
    }

    fn low_rank(&mut self, r: usize, c: usize, rank: usize) -> M {
        &self.matrix(r, rank) * &self.matrix(rank, c)
    }

    /// `m` columns, each a random combination of the columns of `basis`.
    fn cols_in(&mut self, basis: &M, m: usize) -> M {
        let coef = self.coefficients(basis.cols(), m);
        basis * &coef
    }

    /// `m` rows, each a random combination of the rows of `basis`.
    fn rows_in(&mut self, basis: &M, m: usize) -> M {
        let coef = self.coefficients(m, basis.rows());
        &coef * basis
    }

    fn coefficients(&mut self, r: usize, c: usize) -> M {
        for _ in 0..4 {
            let m = M::from_fn(r, c, |_, _| {
                if self.coin(0.2) {
                    Q::zero()
                } else {
                    self.nonzero_entry()
                }
            });
            if !m.is_zero() {
                return m;
            }
        }
        M::zeros(r, c)
    }

    /// A random `p x q` matrix `X` with every matrix in `constraint(X)` zero;
    /// `constraint` must be linear.
    fn subspace(&mut self, p: usize, q: usize, constraint: impl Fn(&M) -> Vec<M>) -> M {
        let unknowns = p * q;
        if unknowns == 0 {
            return M::zeros(p, q);
        }
        let columns: Vec<Vec<Q>> = (0..unknowns)
            .map(|idx| {
                let mut e = M::zeros(p, q);
                e.set(idx / q, idx % q, Q::one());
                constraint(&e)
                    .iter()
                    .flat_map(|m| m.entries().to_vec())
                    .collect()
            })
            .collect();
        let eqs = columns[0].len();
        let system = M::from_fn(eqs, unknowns, |i, j| columns[j][i].clone());
        let v = self.cols_in(&system.nullspace(&self.tol), 1);
        M::from_fn(p, q, |i, j| v.get(i * q + j, 0).clone())
    }

    /// `(S, S⁻¹)` with `S = L·U`, unit triangular factors with entries in {-1, 0, 1}.
    fn unimodular(&mut self, n: usize) -> (M, M) {
        let mut tri = |upper: bool| {
            M::from_fn(n, n, |i, j| {
                if i == j {
                    Q::one()
                } else if (j > i) == upper {
                    Q::from_i64(self.rng.random_range(-1..=1))
                } else {
                    Q::zero()
                }
            })
        };
        let s = &tri(false) * &tri(true);
        let inv = s.inverse(&self.tol).expect("unimodular");
        (s, inv)
    }

    fn scramble(&mut self, inst: Instance<Q>) -> Instance<Q> {
        match inst {
            Instance::Pair { a, b } => {
                let (s, si) = self.unimodular(a.rows());
                Instance::pair(&(&s * &a) * &si, &(&s * &b) * &si)
            }
            Instance::Blocks { a, b, c, d } => {
                let n = a.rows();
                let (x, xi) = self.unimodular(n);
                let (y, yi) = self.unimodular(n);
                Instance::blocks(
                    &(&x * &a) * &xi,
                    &(&x * &b) * &yi,
                    &(&y * &c) * &xi,
                    &(&y * &d) * &yi,
                )
            }
        }
    }

    fn adapted_b(&mut self, n: usize) -> M {
        let (r, k) = split_size(self, n);
        M::block_diag(&self.invertible(r), &self.nilpotent(k))
    }
}

/// Perturbs one matrix of a satisfying instance so that condition `which`
/// (1-based) fails while every other condition still holds.
///
/// Searches single-entry and rank-one perturbations in a seed-determined
/// order; reports [`Error::CannotIsolate`] when none isolates the condition.
pub fn perturb_to_violate(
    inst: &Instance<Q>,
    id: HypothesisId,
    which: usize,
    seed: u64,
) -> Result<Instance<Q>> {
    let tol = Tolerance::default();
    let count = id.condition_count();
    if which == 0 || which > count {
        return Err(Error::InvalidArgument(format!(
            "{id} has conditions 1..={count}, got {which}"
        )));
    }
    if !check_hypothesis(id, inst, &tol)?.satisfied {
        return Err(Error::InvalidArgument(format!(
            "instance does not satisfy {id}"
        )));
    }
    let n = inst.dim()?;
    let mats: Vec<M> = inst.matrices().into_iter().cloned().collect();
    let arity = inst.arity();
    let mut g = Gen::new(seed, EntryPool::default());

    let isolates = |cand: &Instance<Q>| -> Result<bool> {
        let r = check_hypothesis(id, cand, &tol)?;
        Ok(r.violated() == vec![which])
    };
    let with = |k: usize, delta: &M| -> Result<Instance<Q>> {
        let mut ms = mats.clone();
        ms[k] = &ms[k] + delta;
        Instance::from_matrices(arity, ms)
    };

    // single entries, in shuffled order
    let mut singles: Vec<(usize, usize, usize)> = (0..mats.len())
        .flat_map(|k| (0..n).flat_map(move |i| (0..n).map(move |j| (k, i, j))))
        .collect();
    for i in (1..singles.len()).rev() {
        let j = g.rng.random_range(0..=i);
        singles.swap(i, j);
    }
    for &(k, i, j) in &singles {
        for v in [1, -1] {
            let mut delta = M::zeros(n, n);
            delta.set(i, j, Q::from_i64(v));
            let cand = with(k, &delta)?;
            if isolates(&cand)? {
                return Ok(cand);
            }
        }
    }
    const RANK_ONE: usize = 200;
    for _ in 0..RANK_ONE {
        let k = g.rng.random_range(0..mats.len());
        let u = g.matrix(n, 1);
        let v = g.matrix(1, n);
        let delta = &u * &v;
        if delta.is_zero() {
            continue;
        }
        let cand = with(k, &delta)?;
        if isolates(&cand)? {
            return Ok(cand);
        }
    }
    Err(Error::CannotIsolate {
        id: id.to_string(),
        condition: which,
        reason: "no single-entry or rank-one change of one matrix isolates it".into(),
    })
}

/// Whether the instance clears the non-triviality bar: both matrices nonzero
/// (pairs) or `A`, `B`, `C` all nonzero (blocks).
pub fn is_nontrivial(inst: &Instance<Q>) -> bool {
    match inst {
        Instance::Pair { a, b } => !a.is_zero() && !b.is_zero(),
        Instance::Blocks { a, b, c, .. } => !a.is_zero() && !b.is_zero() && !c.is_zero(),
    }
}

/// Whether the relevant spectral idempotent, `b^π` or `(BC)^π`, is nonzero.
pub fn has_nilpotent_part(inst: &Instance<Q>) -> Result<bool> {
    let tol = Tolerance::default();
    let m = match inst {
        Instance::Pair { b, .. } => b.clone(),
        Instance::Blocks { b, c, .. } => b * c,
    };
    Ok(!drazin(&m, &tol)?.projector.is_zero())
}
