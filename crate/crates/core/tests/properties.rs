mod common;

use kquant::pmean::{cluster_cost, pth_mean, AtomRange};
use kquant::quantizer::{
    canonicalize, distance_curve, distance_pow, greedy_cover_count, solve_dp, solve_lloyd, solve_sup, LloydOptions,
    StepQuantizer,
};
use kquant::ua::{min_levels, PNorm};
use kquant::variation::{total_variation_k, var_p};
use kquant::{DiscreteMeasure, RangeSet};
use proptest::prelude::*;

fn measure(max_n: usize) -> impl Strategy<Value = DiscreteMeasure> {
    prop::collection::vec((-10.0..10.0f64, 0.05..3.0f64), 1..=max_n).prop_map(|pairs| {
        let (xs, ws): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
        DiscreteMeasure::from_samples(&xs, &ws).unwrap()
    })
}

fn exponent() -> impl Strategy<Value = f64> {
    prop_oneof![Just(1.0), Just(1.5), Just(2.0), Just(3.0), 1.0..4.0f64]
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * (1.0 + a.abs().max(b.abs()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn quantizer_scale_shift(m in measure(12), k in 1usize..5, p in exponent(),
                             lambda in 0.1..10.0f64, shift in -5.0..5.0f64) {
        let a = solve_dp(&m, k, p).unwrap();
        let moved = m.affine(lambda, shift).unwrap();
        let b = solve_dp(&moved, k, p).unwrap();
        prop_assert!(close(b.error, lambda * a.error, 1e-9), "{} vs {}", b.error, lambda * a.error);
        if a.ties.is_empty() && !a.ambiguous_median {
            prop_assert_eq!(a.quantizer.q(), b.quantizer.q());
            for (x, y) in a.quantizer.levels().iter().zip(b.quantizer.levels()) {
                prop_assert!(close(lambda * x + shift, *y, 1e-9));
            }
        }
    }

    #[test]
    fn pth_mean_equivariance(m in measure(10), p in exponent(), lambda in 0.1..10.0f64, shift in -5.0..5.0f64) {
        let a = pth_mean(&m, AtomRange::full(&m), p).unwrap();
        let moved = m.affine(lambda, shift).unwrap();
        let b = pth_mean(&moved, AtomRange::full(&moved), p).unwrap();
        prop_assert!(close(lambda * a + shift, b, 1e-9), "{} vs {}", lambda * a + shift, b);
    }

    #[test]
    fn variation_scaling(m in measure(10), k in 1usize..4, p in exponent(), lambda in -10.0..10.0f64) {
        prop_assume!(lambda.abs() > 0.01);
        let a = total_variation_k(&m, k, p).unwrap().value;
        let b = total_variation_k(&m.affine(lambda, 0.0).unwrap(), k, p).unwrap().value;
        prop_assert!(close(b, lambda.abs() * a, 1e-9));
    }

    #[test]
    fn variation_bounds(m in measure(10), k in 1usize..4, p in exponent()) {
        let v = total_variation_k(&m, k, p).unwrap().value;
        let v_next = total_variation_k(&m, k + 1, p).unwrap().value;
        prop_assert!(v_next <= v + 1e-12);
        let norm = m.moment_p(p).powf(1.0 / p);
        prop_assert!(v <= 2.0 * norm + 1e-9);
        let all: Vec<usize> = (0..m.len()).collect();
        prop_assert!(var_p(&m, &all, p).unwrap() <= 2.0 * norm + 1e-9);
    }

    #[test]
    fn distance_curve_is_monotone(m in measure(12), p in exponent()) {
        let c = distance_curve(&m, p, 6).unwrap();
        prop_assert!(c.violations.is_empty(), "{:?}", c.violations);
        for k in 1..=6 {
            prop_assert_eq!(c.distances_pow[k - 1] == 0.0, m.len() <= k);
        }
    }

    #[test]
    fn distance_is_sum_of_cluster_costs(m in measure(12), p in exponent(),
                                        levels in prop::collection::btree_set(-1000i32..1000, 1..5)) {
        let levels: Vec<f64> = levels.into_iter().map(|v| f64::from(v) / 100.0).collect();
        let qz = StepQuantizer::from_levels(levels).unwrap();
        let mut total = 0.0;
        for (i, (s, e)) in qz.cells(m.atoms()).into_iter().enumerate() {
            if e > s {
                total += cluster_cost(&m, AtomRange::new(s, e - 1), p, qz.levels()[i]).unwrap();
            }
        }
        prop_assert!(close(distance_pow(&m, &qz, p).unwrap(), total, 1e-12));
    }

    #[test]
    fn lloyd_objective_never_increases(m in measure(15), k in 1usize..5, p in exponent()) {
        let mut last = f64::INFINITY;
        for iters in 1..8 {
            let opts = LloydOptions { max_iter: iters, ..Default::default() };
            let r = solve_lloyd(&m, k, p, &opts).unwrap();
            prop_assert!(r.error_pow <= last + 1e-9 * (1.0 + last), "{} > {}", r.error_pow, last);
            last = r.error_pow;
        }
        let dp = solve_dp(&m, k, p).unwrap();
        prop_assert!(last >= dp.error_pow - 1e-9 * (1.0 + dp.error_pow));
    }

    #[test]
    fn sup_radius_is_tight(points in prop::collection::vec(-10.0..10.0f64, 1..12),
                           widths in prop::collection::vec(0.0..1.0f64, 12), k in 1usize..5) {
        let intervals: Vec<(f64, f64)> = points.iter().zip(&widths).map(|(&l, &w)| (l, l + w)).collect();
        let r = RangeSet::new(intervals).unwrap();
        let s = solve_sup(&r, k).unwrap();
        prop_assert!(s.levels.len() <= k);
        prop_assert!(greedy_cover_count(&r, s.radius) <= k);
        if s.radius > 0.0 {
            prop_assert!(greedy_cover_count(&r, f64::from_bits(s.radius.to_bits() - 1)) > k);
        }
        // every point of the range is within the radius of some centre
        for &(l, u) in r.intervals() {
            for x in [l, 0.5 * (l + u), u] {
                let d = s.levels.iter().map(|c| (c - x).abs()).fold(f64::INFINITY, f64::min);
                prop_assert!(d <= s.radius * (1.0 + 1e-12) + 1e-12);
            }
        }
    }

    #[test]
    fn min_levels_monotone_in_eps(m in measure(12), p in exponent(), e1 in 0.01..3.0f64, e2 in 0.01..3.0f64) {
        let (lo, hi) = if e1 < e2 { (e1, e2) } else { (e2, e1) };
        for norm in [PNorm::Finite(p), PNorm::Infinity] {
            prop_assert!(min_levels(&m, norm, lo).unwrap() >= min_levels(&m, norm, hi).unwrap());
        }
    }

    #[test]
    fn lp_embedding_for_probability_measures(m in measure(12), p in 1.0..3.0f64, dq in 0.0..2.0f64, eps in 0.05..2.0f64) {
        let total = m.total_mass();
        let w: Vec<f64> = m.weights().iter().map(|w| w / total).collect();
        let prob = DiscreteMeasure::from_samples(m.atoms(), &w).unwrap();
        let q = p + dq;
        let np = min_levels(&prob, PNorm::Finite(p), eps).unwrap();
        let nq = min_levels(&prob, PNorm::Finite(q), eps).unwrap();
        let ninf = min_levels(&prob, PNorm::Infinity, eps).unwrap();
        prop_assert!(np <= nq && nq <= ninf, "{np} {nq} {ninf}");
    }
}

#[test]
fn canonicalize_never_increases_objective() {
    use rand::{Rng, SeedableRng};
    let t = 1.0 / 3.0;
    let m = DiscreteMeasure::from_samples(&[-1.0, 0.0, 1.0], &[t, t, t]).unwrap();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
    for _ in 0..1000 {
        let mut a: f64 = rng.gen_range(-2.0..2.0);
        let mut b: f64 = rng.gen_range(-2.0..2.0);
        if a > b {
            std::mem::swap(&mut a, &mut b);
        }
        if a == b {
            continue;
        }
        let r = rng.gen_range(a..=b);
        let qz = StepQuantizer::new(vec![a, b], vec![r]).unwrap();
        let before = distance_pow(&m, &qz, 2.0).unwrap();
        let c = canonicalize(&m, &qz, 2.0).unwrap();
        assert!(c.is_special_form());
        assert!(distance_pow(&m, &c, 2.0).unwrap() <= before + 1e-12);
    }
}
