use k2quad::identities::DuplicationIndexMap;
use k2quad::opcalc::{apply_derive, apply_integrate, rat, Monomial, Rational, Var};
use k2quad::series::{bracket_coefficient, gauss_2f1, k2_coefficient_generic, k2_eval};
use k2quad::{K2Params, MultiIndex4, Point4, TruncationPolicy};
use num_traits::One;
use proptest::prelude::*;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
}

fn params() -> impl Strategy<Value = K2Params> {
    (0.1f64..2.0, 0.1f64..2.0, 0.1f64..2.0, prop::array::uniform4(0.3f64..3.0))
        .prop_map(|(a, b, c, e)| K2Params::new(a, b, c, e).unwrap())
}

fn small_rational() -> impl Strategy<Value = Rational> {
    (-9i64..10, 1i64..8).prop_map(|(n, d)| rat(n, d))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn first_axis_is_gauss(p in params(), x in -0.2f64..0.2) {
        let pol = TruncationPolicy::with_degree(24);
        let k = k2_eval(&p, Point4::new(x, 0.0, 0.0, 0.0).unwrap(), &pol).unwrap().value;
        let g = gauss_2f1(p.a, p.b, p.e[0], x, &pol).unwrap().value;
        prop_assert!(rel(k, g) <= 1e-12);
    }

    #[test]
    fn b_slots_are_interchangeable(p in params(), c in prop::array::uniform4(0.0f64..0.08)) {
        let pol = TruncationPolicy::with_degree(16);
        let base = k2_eval(&p, Point4::from_coords(c), &pol).unwrap().value;
        let mut q = p;
        q.e.swap(0, 3);
        let swapped = k2_eval(&q, Point4::from_coords([c[3], c[1], c[2], c[0]]), &pol).unwrap().value;
        prop_assert!(rel(base, swapped) <= 1e-13);
    }

    #[test]
    fn negative_integer_a_terminates(n in 0u32..5, p in params(), c in prop::array::uniform4(-0.3f64..0.3)) {
        let q = K2Params { a: -(n as f64), ..p };
        let pt = Point4::from_coords(c);
        let short = k2_eval(&q, pt, &TruncationPolicy::with_degree(n)).unwrap();
        let long = k2_eval(&q, pt, &TruncationPolicy::with_degree(n + 6)).unwrap();
        prop_assert!(rel(short.value, long.value) <= 1e-14);
    }

    #[test]
    fn duplication_index_map_holds(idx in prop::array::uniform10(0u32..7)) {
        prop_assert!(DuplicationIndexMap::new(idx).is_consistent());
    }

    #[test]
    fn bracket_reproduces_exact_coefficient(
        p in prop::array::uniform7(small_rational()),
        idx in prop::array::uniform4(0u32..4),
    ) {
        let idx = MultiIndex4::from_array(idx);
        let [a, b, c, e1, e2, e3, e4] = p.clone();
        let rows = [
            [("a", a.clone()), ("a", a.clone()), ("a", a.clone()), ("a", a)],
            [("b", b.clone()), ("b", b.clone()), ("c", c), ("b", b)],
        ];
        prop_assert_eq!(bracket_coefficient(&rows, &[e1, e2, e3, e4], idx), k2_coefficient_generic(&p, idx));
    }

    #[test]
    fn derivative_powers_compose(lam in small_rational(), m in 0u32..7, n in 0u32..7) {
        let x = Var::X;
        let mono = Monomial::new(Rational::one(), [(x, lam)]);
        prop_assert_eq!(apply_derive(x, m, &apply_derive(x, n, &mono)), apply_derive(x, m + n, &mono));
    }

    #[test]
    fn integration_then_derivative_is_identity(lam in small_rational(), m in 0u32..7) {
        let x = Var::X;
        let mono = Monomial::new(rat(3, 2), [(x, lam), (Var::T(1), rat(1, 3))]);
        if let Ok(up) = apply_integrate(x, m, &mono) {
            prop_assert_eq!(apply_derive(x, m, &up), mono);
        }
    }

    #[test]
    fn operators_on_distinct_variables_commute(l1 in small_rational(), l2 in small_rational(), m in 0u32..5, k in 0u32..5) {
        let (s, t) = (Var::T(1), Var::T(2));
        let mono = Monomial::new(Rational::one(), [(s, l1), (t, l2)]);
        let one = apply_integrate(t, k, &apply_derive(s, m, &mono));
        let other = apply_integrate(t, k, &mono).map(|v| apply_derive(s, m, &v));
        prop_assert_eq!(one, other);
    }
}
