use proptest::prelude::*;

use sharp_threshold::bounds::{self, c_ls};
use sharp_threshold::martingale;
use sharp_threshold::measure::{self, Bias, CubeFunction};
use sharp_threshold::threshold::{self, ExactCurve, DEFAULT_TOL};
use sharp_threshold::{BooleanFunction, FamilySpec, Permutation};

fn boolean(max_n: usize) -> impl Strategy<Value = BooleanFunction> {
    (1..=max_n).prop_flat_map(|n| {
        prop::collection::vec(any::<bool>(), 1 << n)
            .prop_map(move |bits| BooleanFunction::from_bits(n, &bits).unwrap())
    })
}

fn real(max_n: usize) -> impl Strategy<Value = CubeFunction> {
    (1..=max_n).prop_flat_map(|n| {
        prop::collection::vec(-1.0f64..1.0, 1 << n)
            .prop_map(move |v| CubeFunction::new(n, v).unwrap())
    })
}

fn positive(max_n: usize) -> impl Strategy<Value = CubeFunction> {
    (1..=max_n).prop_flat_map(|n| {
        prop::collection::vec(0.01f64..4.0, 1 << n)
            .prop_map(move |v| CubeFunction::new(n, v).unwrap())
    })
}

/// Up-closure of a few random points.
fn monotone(max_n: usize) -> impl Strategy<Value = BooleanFunction> {
    (1..=max_n).prop_flat_map(|n| {
        prop::collection::vec(0..1usize << n, 1..4).prop_map(move |seeds| {
            BooleanFunction::from_fn(n, |x| seeds.iter().any(|&s| s & !x == 0)).unwrap()
        })
    })
}

fn bias() -> impl Strategy<Value = Bias> {
    (0.02f64..0.98).prop_map(|p| Bias::new(p).unwrap())
}

fn brute_monotone(f: &BooleanFunction) -> bool {
    let n = f.arity();
    (0..f.len()).all(|x| (0..n).all(|i| !f.get(x) || f.get(x | 1 << i)))
}

#[test]
fn monotonicity_agrees_with_brute_force_on_all_four_bit_functions() {
    for t in 0u64..1 << 16 {
        let f = BooleanFunction::from_words(4, vec![t]).unwrap();
        assert_eq!(f.is_monotone(), brute_monotone(&f), "table {t:#06x}");
    }
}

proptest! {
    #[test]
    fn hex_round_trip(f in boolean(9)) {
        let s = f.to_hex_string();
        prop_assert_eq!(BooleanFunction::parse_hex(&s).unwrap(), f);
    }

    #[test]
    fn influences_lie_in_unit_interval(f in boolean(7), p in bias()) {
        for &v in measure::influences(&f, p).values() {
            prop_assert!((0.0..=1.0 + 1e-12).contains(&v));
        }
    }

    #[test]
    fn russo_identity(f in monotone(7), p in 0.05f64..0.95) {
        let h = 1e-6;
        let mu = |q: f64| threshold::mu_of_p(&f, Bias::new(q).unwrap());
        let fd = (mu(p + h) - mu(p - h)) / (2.0 * h);
        let d = bounds::russo_derivative(&f, Bias::new(p).unwrap());
        prop_assert!((fd - d).abs() < 1e-5, "fd {} vs {}", fd, d);
    }

    #[test]
    fn delta_matches_gradient_form(g in real(6), p in bias()) {
        for i in 1..=g.arity() {
            let a = measure::delta(&g, p, i).unwrap();
            let b = measure::delta_via_gradient(&g, p, i).unwrap();
            prop_assert!(a.max_abs_diff(&b) < 1e-12);
        }
    }

    #[test]
    fn delta_is_self_adjoint(f in real(6), g0 in prop::collection::vec(-1.0f64..1.0, 64), p in bias()) {
        let g = CubeFunction::new(f.arity(), g0[..1 << f.arity()].to_vec()).unwrap();
        for i in 1..=f.arity() {
            let l = measure::inner(&f, &measure::delta(&g, p, i).unwrap(), p).unwrap();
            let r = measure::inner(&measure::delta(&f, p, i).unwrap(), &g, p).unwrap();
            let both = measure::inner(&measure::delta(&f, p, i).unwrap(), &measure::delta(&g, p, i).unwrap(), p).unwrap();
            prop_assert!((l - r).abs() < 1e-12 && (l - both).abs() < 1e-12);
        }
    }

    #[test]
    fn moment_identity(f in boolean(6), p in bias(), r in 0.5f64..4.0) {
        for i in 1..=f.arity() {
            let (lhs, rhs) = measure::moment_ratio(&CubeFunction::from_boolean(&f), p, i, r).unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + rhs.abs()));
        }
    }

    #[test]
    fn martingale_telescopes_and_is_orthogonal(f in real(6), p in bias()) {
        let d = martingale::decompose(&f, p);
        prop_assert!(d.reconstruct().max_abs_diff(&f) < 1e-12);
        prop_assert!(martingale::check_orthogonality(&d, p).pass);
        prop_assert!(martingale::check_pythagoras(&f, &d, p).pass);
        prop_assert!(martingale::check_energy_decomposition(&f, &d, p).pass);
    }

    #[test]
    fn squared_log_sobolev(g in real(6), p in bias()) {
        prop_assert!(bounds::lsi_check(&g, p).pass);
    }

    #[test]
    fn poincare(g in real(6), p in bias()) {
        prop_assert!(bounds::poincare_check(&g, p).pass);
    }

    #[test]
    fn entropy_is_nonnegative(g in positive(6), p in bias()) {
        prop_assert!(measure::entropy(&g, p).unwrap() >= -1e-12);
    }

    #[test]
    fn cls_is_symmetric_and_at_least_two(p in bias()) {
        let q = Bias::new(1.0 - p.p()).unwrap();
        prop_assert!((c_ls(p) - c_ls(q)).abs() < 1e-12 * c_ls(p));
        prop_assert!(c_ls(p) >= 2.0 - 1e-12);
        prop_assert!(bounds::pq_cls(p) <= 0.5 + 1e-15);
    }

    #[test]
    fn s_of_n_below_log_n(n in 2u64..10_000_000) {
        let s = bounds::s_of_n(n).unwrap().value;
        prop_assert!(s > 0.0 && s < (n as f64).ln());
    }

    #[test]
    fn mu_is_monotone_in_p(f in monotone(7), a in 0.01f64..0.99, b in 0.01f64..0.99) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(threshold::mu_of_p(&f, Bias::new(lo).unwrap()) <= threshold::mu_of_p(&f, Bias::new(hi).unwrap()) + 1e-15);
    }

    #[test]
    fn inverse_round_trips(f in monotone(7), alpha in 0.05f64..0.95) {
        prop_assume!(!f.is_constant());
        let curve = ExactCurve::new(&f).unwrap();
        let inv = threshold::p_of_alpha(&curve, alpha, DEFAULT_TOL).unwrap();
        prop_assert!(inv.p > 0.0 && inv.p < 1.0);
        prop_assert!((threshold::mu_of_p(&f, Bias::new(inv.p).unwrap()) - alpha).abs() < 1e-6);
    }

    #[test]
    fn cyclic_shift_preserves_symmetric_functions(n in 1usize..8, len in 1usize..8) {
        prop_assume!(len <= n);
        let f = FamilySpec::CyclicRun { n, len }.instance().unwrap();
        let s = Permutation::cyclic_shift(n);
        for x in 0..f.len() {
            prop_assert_eq!(f.get(x), f.get(s.act(x)));
        }
    }

    #[test]
    fn symmetric_max_influence_bound(k in 1usize..4, m in 1usize..4, p in bias()) {
        prop_assume!(k * m >= 2);
        let f = FamilySpec::Tribes { k, m }.instance().unwrap();
        prop_assert!(bounds::thm42_check(&f, p).unwrap().report.pass);
    }
}
