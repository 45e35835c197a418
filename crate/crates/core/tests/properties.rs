use proptest::prelude::*;

use limfix::cauchy::{cd_membership, CauchyStructure, IndexSampler};
use limfix::limspace::LimOperator;
use limfix::maps::Builtin;
use limfix::oracle::{naive_cycle, EpSeq};
use limfix::seqcore::{alternate, periodic, SeqView};
use limfix::solver::{maps_onto, solve_general, SolveConfig};
use limfix::spaces::{
    distance_axiom_check, lambda_limit, psi_monotone_check, sandwich_axiom_check, LambdaMap, PsiRule,
};
use limfix::{DistanceSpec, EqRule, Point, PosetSpec, Tolerances, Value};

fn geometric(a: f64, b: f64, r: f64, len: usize) -> SeqView {
    SeqView::scalars(&(0..len).map(|n| a + b * r.powi(n as i32)).collect::<Vec<_>>())
}

fn ep_seq(n: u8) -> impl Strategy<Value = EpSeq> {
    (prop::collection::vec(0..n, 0..4), prop::collection::vec(0..n, 1..4))
        .prop_map(|(pre, cyc)| EpSeq::new(pre, cyc).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn cd_verdict_is_shift_invariant(a in -5.0..5.0f64, b in -3.0..3.0f64, r in 0.05..0.7f64, len in 300usize..500) {
        let tol = Tolerances::default();
        let s = geometric(a, b, r, len);
        let sampler = IndexSampler::from_tolerances(&tol);
        let v = cd_membership(&DistanceSpec::Euclidean, &PosetSpec::Real, &s, &tol, &sampler).unwrap();
        let t = cd_membership(&DistanceSpec::Euclidean, &PosetSpec::Real, &s.tail(1).unwrap(), &tol, &sampler).unwrap();
        prop_assert!(v.is_certified());
        prop_assert_eq!(v.label(), t.label());
    }

    #[test]
    fn certification_is_monotone_in_eps(a in -5.0..5.0f64, b in -3.0..3.0f64, r in 0.05..0.95f64, scale in 1.0..100.0f64) {
        let tol = Tolerances::default();
        let s = geometric(a, b, r, 400);
        let sampler = IndexSampler::from_tolerances(&tol);
        let v = cd_membership(&DistanceSpec::Euclidean, &PosetSpec::Real, &s, &tol, &sampler).unwrap();
        if v.is_certified() {
            let looser = tol.clone().with_eps(tol.eps * scale);
            let w = cd_membership(&DistanceSpec::Euclidean, &PosetSpec::Real, &s, &looser, &sampler).unwrap();
            prop_assert!(w.is_certified());
        }
    }

    #[test]
    fn alternation_with_own_limit_stays_certified(a in -5.0..5.0f64, b in -3.0..3.0f64, r in 0.05..0.6f64) {
        let tol = Tolerances::default();
        let s = geometric(a, b, r, 400);
        let alt = alternate(&periodic(vec![Point::scalar(a)]).unwrap(), &s).unwrap();
        let c = CauchyStructure::distance(DistanceSpec::Euclidean);
        prop_assert!(c.membership(&s, &tol).unwrap().is_certified());
        prop_assert!(c.membership(&alt, &tol).unwrap().is_certified());
    }

    #[test]
    fn sandwich_law(l in -10.0..10.0f64, ts in prop::collection::vec(0.0..1.0f64, 200)) {
        let tol = Tolerances::default();
        let n = ts.len();
        let lower: Vec<Value> = (1..=n).map(|k| Value::Scalar(l - 1.0 / (k * k) as f64)).collect();
        let upper: Vec<Value> = (1..=n).map(|k| Value::Scalar(l + 1.0 / (k * k) as f64)).collect();
        let middle: Vec<Value> = lower
            .iter()
            .zip(&upper)
            .zip(&ts)
            .map(|((a, b), t)| Value::Scalar(a.as_scalar().unwrap() * (1.0 - t) + b.as_scalar().unwrap() * t))
            .collect();
        let v = sandwich_axiom_check(&PosetSpec::Real, &lower, &middle, &upper, &tol).unwrap();
        prop_assert!(!v.is_refuted(), "{}", v.describe());
    }

    #[test]
    fn distances_satisfy_the_axiom(xs in prop::collection::vec((0.0..10.0f64, 0.0..10.0f64), 1..50)) {
        let scalar: Vec<(Point, Point)> = xs.iter().map(|&(a, b)| (Point::scalar(a), Point::scalar(b))).collect();
        let plane: Vec<(Point, Point)> =
            xs.windows(2).map(|w| (Point::Real(vec![w[0].0, w[0].1]), Point::Real(vec![w[1].0, w[1].1]))).collect();
        for d in [DistanceSpec::Euclidean, DistanceSpec::Sup, DistanceSpec::PartialMetricMax, DistanceSpec::DislocatedSum] {
            prop_assert!(distance_axiom_check(&d, &scalar).unwrap().is_certified());
        }
        if !plane.is_empty() {
            prop_assert!(distance_axiom_check(&DistanceSpec::ConeComponentwise(2), &plane).unwrap().is_certified());
        }
    }

    #[test]
    fn contracting_scale_is_in_lambda(c in 0.0..0.95f64) {
        let tol = Tolerances::default();
        let seeds: Vec<Value> = [0.0, 0.5, 3.0, 100.0].iter().map(|&x| Value::Scalar(x)).collect();
        let out = lambda_limit(&PosetSpec::Real, &LambdaMap::Scale(c), &seeds, 2000, &tol).unwrap();
        prop_assert!(out.verdict.is_certified());
        prop_assert!(out.limit.unwrap().as_scalar().unwrap().abs() <= tol.eps);
    }

    #[test]
    fn sum_and_max_obey_drop_first(tuples in prop::collection::vec(prop::collection::vec(0.0..10.0f64, 1..6), 1..20)) {
        let samples: Vec<Vec<Value>> = tuples.iter().map(|t| t.iter().map(|&x| Value::Scalar(x)).collect()).collect();
        for psi in [PsiRule::Sum, PsiRule::Max] {
            prop_assert!(!psi_monotone_check(&psi, &PosetSpec::Real, &samples).unwrap().is_refuted());
        }
    }

    #[test]
    fn ep_seq_alternation_commutes_with_tail(x in ep_seq(3), y in ep_seq(3)) {
        let alt = x.alternate(&y);
        prop_assert_eq!(alt.tail().tail(), x.tail().alternate(&y.tail()));
        for i in 0..20 {
            let expected = if i % 2 == 0 { x.get(i / 2) } else { y.get(i / 2) };
            prop_assert_eq!(alt.get(i), expected);
        }
    }

    #[test]
    fn ep_seq_view_round_trips(x in ep_seq(4)) {
        let view = x.view(32).unwrap();
        prop_assert_eq!(EpSeq::from_view(&view), Some(x.clone()));
        for i in 0..32 {
            prop_assert_eq!(view.get(i).unwrap().as_label(), Some(x.get(i) as usize));
        }
    }

    #[test]
    fn finite_fixed_sets_are_sound(table in (1usize..=5).prop_flat_map(|n| prop::collection::vec(0..n, n)), start in 0usize..5) {
        let n = table.len();
        let start = start % n;
        let f = Builtin::Table { values: table.clone() }.build().unwrap();
        let cfg = SolveConfig { max_iter: 4 * (n + 1), ..SolveConfig::default() };
        let c = CauchyStructure::orbit(f.clone(), EqRule::Exact);
        let out = solve_general(&f, &Point::label(start, n).unwrap(), &c, &LimOperator::discrete(), &cfg).unwrap();
        let mut got: Vec<usize> = out.points().iter().map(|p| p.as_label().unwrap()).collect();
        got.sort_unstable();
        prop_assert_eq!(got, naive_cycle(&table, start));
        prop_assert!(maps_onto(f.as_ref(), &out.points(), EqRule::Exact).unwrap());
    }
}
