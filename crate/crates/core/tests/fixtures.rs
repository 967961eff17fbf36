mod common;

use common::{normal, random_step_measure, uniform};
use kquant::quantizer::{distance_curve, solve_dp, solve_lloyd, solve_sweep, LloydOptions, SolverDetails};
use kquant::ua::{family_decay, family_n, min_levels, FunctionFamily, PNorm};
use kquant::{DiscreteMeasure, RangeSet};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn uniform_three_levels() {
    let m = uniform(10_000);
    let r = solve_dp(&m, 3, 2.0).unwrap();
    for (got, want) in r.quantizer.levels().iter().zip([1.0 / 6.0, 0.5, 5.0 / 6.0]) {
        assert!((got - want).abs() < 2e-4, "{got} vs {want}");
    }
    for (got, want) in r.quantizer.boundaries().iter().zip([1.0 / 3.0, 2.0 / 3.0]) {
        assert!((got - want).abs() < 2e-4, "{got} vs {want}");
    }
    assert!((r.error_pow - 1.0 / 108.0).abs() < 1e-6);
}

#[test]
fn uniform_distance_curve() {
    let c = distance_curve(&uniform(10_000), 2.0, 5).unwrap();
    for (k, d) in c.distances_pow.iter().enumerate() {
        let k = (k + 1) as f64;
        assert!((d - 1.0 / (12.0 * k * k)).abs() < 1e-5);
    }
    assert!(c.violations.is_empty());
}

#[test]
fn uniform_lloyd_two_levels() {
    let m = uniform(10_000);
    let opts = LloydOptions {
        init_levels: Some(vec![0.1, 0.9]),
        ..Default::default()
    };
    let r = solve_lloyd(&m, 2, 2.0, &opts).unwrap();
    assert!(r.converged);
    assert!((r.quantizer.levels()[0] - 0.25).abs() < 1e-3);
    assert!((r.quantizer.levels()[1] - 0.75).abs() < 1e-3);
}

#[test]
fn uniform_sweep() {
    let m = uniform(10_000);
    let grid: Vec<f64> = (1..=200).map(|i| i as f64 / 201.0).collect();
    let r = solve_sweep(&m, 3, 2.0, &grid).unwrap();
    assert!((r.error_pow - 1.0 / 108.0).abs() < 1e-4);
    assert!(matches!(r.details, SolverDetails::Sweep(ref s) if s.admissible > 0 && !s.fallback));
}

#[test]
fn uniform_min_levels() {
    assert_eq!(min_levels(&uniform(10_000), PNorm::Finite(2.0), 0.05).unwrap(), 6);
}

#[test]
fn normal_three_levels() {
    let m = normal(100_000);
    let dp = solve_dp(&m, 3, 2.0).unwrap();
    let l = dp.quantizer.levels();
    assert!(
        (l[0] + 1.224).abs() < 0.01 && l[1].abs() < 1e-9 && (l[2] - 1.224).abs() < 0.01,
        "{l:?}"
    );
    let b = dp.quantizer.boundaries();
    assert!((b[0] + 0.612).abs() < 0.01 && (b[1] - 0.612).abs() < 0.01, "{b:?}");
    assert!((dp.error_pow - 0.1902).abs() < 1e-3);

    let grid: Vec<f64> = (0..200).map(|i| -1.5 + 1.5 * i as f64 / 199.0).collect();
    let sweep = solve_sweep(&m, 3, 2.0, &grid).unwrap();
    assert!((sweep.error_pow - dp.error_pow).abs() < 5e-3);
    if let SolverDetails::Sweep(s) = &sweep.details {
        assert!((s.best_s.unwrap() + 0.6).abs() < 0.02);
    }
}

#[test]
fn dominated_family_decays_to_zero() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let members: Vec<(String, DiscreteMeasure)> = (0..20)
        .map(|i| {
            let n = rng.gen_range(1..=8);
            let xs: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let ws: Vec<f64> = (0..n).map(|_| rng.gen_range(0.1..1.0)).collect();
            (format!("f{i}"), DiscreteMeasure::from_samples(&xs, &ws).unwrap())
        })
        .collect();
    let max_n = members.iter().map(|(_, m)| m.len()).max().unwrap();
    let fam = FunctionFamily::new(members, "dominated by 1").unwrap();
    let d = family_decay(&fam, PNorm::Finite(2.0), max_n, &[0.1, 0.3]).unwrap();
    assert!(d.sup_distance.windows(2).all(|w| w[1] <= w[0]));
    assert_eq!(*d.sup_distance.last().unwrap(), 0.0);
    assert!(d.sandwich.iter().all(|s| s.holds));
}

#[test]
fn step_families() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let members: Vec<(String, DiscreteMeasure)> = (0..50)
        .map(|i| (format!("g{i}"), random_step_measure(&mut rng, 7)))
        .collect();
    let fam = FunctionFamily::new(members, "at most 7 values").unwrap();
    for p in [PNorm::Finite(1.0), PNorm::Finite(2.0), PNorm::Infinity] {
        for eps in [1e-3, 0.1, 1.0] {
            assert!(family_n(&fam, p, eps).unwrap() <= 7);
        }
    }
    let single = FunctionFamily::new(vec![fam.members()[0].clone()], "one").unwrap();
    assert_eq!(
        family_n(&single, PNorm::Finite(2.0), 0.2).unwrap(),
        min_levels(&fam.members()[0].1, PNorm::Finite(2.0), 0.2).unwrap()
    );
    let other = FunctionFamily::new(fam.members()[10..].to_vec(), "tail").unwrap();
    let head = FunctionFamily::new(fam.members()[..10].to_vec(), "head").unwrap();
    let u = head.union(&other).unwrap();
    for eps in [0.05, 0.5] {
        let p = PNorm::Finite(1.5);
        assert_eq!(
            family_n(&u, p, eps).unwrap(),
            family_n(&head, p, eps).unwrap().max(family_n(&other, p, eps).unwrap())
        );
    }
}

#[test]
fn infinite_mode_three_atoms() {
    let m = DiscreteMeasure::from_samples(&[-1.0, 1.0, 2.0], &[1.0, 1.0, 1.0])
        .unwrap()
        .with_infinite_complement(true);
    assert_eq!(
        m.essential_range(0.0),
        RangeSet::points(&[-1.0, 0.0, 1.0, 2.0]).unwrap()
    );
    let r = solve_dp(&m, 2, 2.0).unwrap();
    assert!(r.quantizer.levels().contains(&0.0));
}
