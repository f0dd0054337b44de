use proptest::prelude::*;

use gdrazin::formulas::{compare_with_oracle, route_target, run_route, RouteId, RouteOptions};
use gdrazin::generator::{generate_instance, GenConfig};
use gdrazin::matrix::Matrix;
use gdrazin::oracle::{check_axioms, cline_transport, drazin, square_transport};
use gdrazin::scalar::{ExactComplex, FloatComplex, Scalar, Tolerance};

type Q = ExactComplex;
type M = Matrix<Q>;

fn scalar() -> impl Strategy<Value = Q> {
    (-4i64..=4, 1i64..=3, -2i64..=2)
        .prop_map(|(p, q, i)| Q::ratio(p, q).unwrap().add(&Q::gaussian(0, i)))
}

fn matrix(rows: usize, cols: usize) -> impl Strategy<Value = M> {
    prop::collection::vec(-3i64..=3, rows * cols).prop_map(move |v| M::from_ints(rows, cols, &v))
}

/// Square matrices with plenty of rank deficiency: products through a
/// narrower inner dimension.
fn deficient_square() -> impl Strategy<Value = M> {
    (1usize..=5, 0usize..=5)
        .prop_flat_map(|(n, r)| (matrix(n, r.min(n)), matrix(r.min(n), n)))
        .prop_map(|(x, y)| &x * &y)
}

fn tol() -> Tolerance {
    Tolerance::default()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn field_axioms(x in scalar(), y in scalar(), z in scalar()) {
        prop_assert_eq!(x.add(&y).add(&z), x.add(&y.add(&z)));
        prop_assert_eq!(x.mul(&y).mul(&z), x.mul(&y.mul(&z)));
        prop_assert_eq!(x.mul(&y.add(&z)), x.mul(&y).add(&x.mul(&z)));
        prop_assert_eq!(x.mul(&y), y.mul(&x));
        prop_assert!(x.add(&x.neg()).is_zero());
        if !y.is_zero() {
            prop_assert_eq!(x.checked_div(&y, &tol()).unwrap().mul(&y), x);
        }
    }

    #[test]
    fn text_form_round_trips(x in scalar()) {
        prop_assert_eq!(x.to_string().parse::<Q>().unwrap(), x);
    }

    #[test]
    fn matrix_product_is_associative(a in matrix(2, 3), b in matrix(3, 4), c in matrix(4, 2)) {
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
    }

    #[test]
    fn rank_factorization_reconstructs(a in deficient_square()) {
        let f = a.rank_factorize(&tol());
        prop_assert_eq!(&f.left * &f.right, a.clone());
        prop_assert_eq!(f.left.cols(), f.rank);
        prop_assert_eq!(f.rank, a.transpose().rank(&tol()));
    }

    #[test]
    fn oracle_satisfies_axioms(a in deficient_square()) {
        let d = drazin(&a, &tol()).unwrap();
        let ax = check_axioms(&a, &d.inverse, Some(d.index.max(1)), &tol()).unwrap();
        prop_assert!(ax.satisfied, "{:?}", ax);
        prop_assert_eq!(&d.projector * &d.projector, d.projector.clone());
        if d.index > 1 {
            let ax = check_axioms(&a, &d.inverse, Some(d.index - 1), &tol()).unwrap();
            prop_assert!(!ax.satisfied, "index is not minimal");
        }
    }

    #[test]
    fn oracle_commutes_with_similarity(a in deficient_square(), seed in any::<u64>()) {
        let n = a.rows();
        let s = M::from_fn(n, n, |i, j| {
            if i == j { Q::one() } else if i > j { Q::from_i64(((seed >> (i * 5 + j)) & 3) as i64 - 1) } else { Q::zero() }
        });
        let si = s.inverse(&tol()).unwrap();
        let b = &(&s * &a) * &si;
        let want = &(&s * &drazin(&a, &tol()).unwrap().inverse) * &si;
        prop_assert_eq!(drazin(&b, &tol()).unwrap().inverse, want);
    }

    #[test]
    fn cline_and_square_transport(
        (a, b) in (1usize..=4, 1usize..=4).prop_flat_map(|(m, n)| (matrix(m, n), matrix(n, m)))
    ) {
        let abd = drazin(&(&a * &b), &tol()).unwrap().inverse;
        prop_assert_eq!(cline_transport(&a, &b, &abd).unwrap(), drazin(&(&b * &a), &tol()).unwrap().inverse);
        let ab = &a * &b;
        let sq = drazin(&(&ab * &ab), &tol()).unwrap().inverse;
        prop_assert_eq!(square_transport(&ab, &sq).unwrap(), abd);
    }

    #[test]
    fn routes_match_on_generated_instances(r in 0usize..19, n in 1usize..=3, seed in any::<u64>()) {
        let route = RouteId::ALL[r];
        let n = if route.hypothesis().arity() == gdrazin::hypotheses::Arity::Blocks { n.min(2) } else { n };
        let g = generate_instance(&GenConfig::new(route.hypothesis(), n, seed)).unwrap();
        let cmp = compare_with_oracle(route, &g.instance, &RouteOptions::default()).unwrap();
        prop_assert!(cmp.matches, "{} n={} seed={}", route, n, seed);
    }

    #[test]
    fn float_backend_tracks_exact(r in prop::sample::select(vec![RouteId::L21, RouteId::T22, RouteId::T31, RouteId::C27]), n in 1usize..=3, seed in any::<u64>()) {
        let g = generate_instance(&GenConfig::new(r.hypothesis(), n, seed)).unwrap();
        let want = drazin(&route_target(r, &g.instance).unwrap(), &tol()).unwrap().inverse;
        let fl = g.instance.map(|m| m.to_backend::<FloatComplex>());
        let got = run_route(r, &fl, &RouteOptions::default()).unwrap().inverse;
        let residual = (&got - &want.to_backend::<FloatComplex>()).max_abs();
        prop_assert!(residual <= 1e-8 * want.max_abs().max(1.0), "{} n={} seed={}: {:e}", r, n, seed, residual);
    }
}
