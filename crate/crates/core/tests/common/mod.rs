//! Brute-force oracles and random inputs shared by the test suites.
#![allow(dead_code)]

use kquant::DiscreteMeasure;
use rand::Rng;

/// `min_a sum w |x - a|^p` by ternary search on `[min x, max x]`; the
/// objective is convex in `a`.
pub fn best_level_cost(xs: &[f64], ws: &[f64], p: f64) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let cost = |a: f64| xs.iter().zip(ws).map(|(x, w)| w * (x - a).abs().powf(p)).sum::<f64>();
    let (mut lo, mut hi) = xs
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &x| (l.min(x), h.max(x)));
    for _ in 0..200 {
        let a = lo + (hi - lo) / 3.0;
        let b = hi - (hi - lo) / 3.0;
        if cost(a) <= cost(b) {
            hi = b;
        } else {
            lo = a;
        }
    }
    let mid = 0.5 * (lo + hi);
    // p = 1 is piecewise linear: the optimum sits on an atom
    xs.iter().map(|&x| cost(x)).fold(cost(mid), f64::min)
}

/// `D_{p,k}^p` over all partitions of the atoms into groups (not only
/// contiguous ones). In infinite-complement mode one extra level is pinned
/// at 0 and counts towards `k`.
pub fn exhaustive_distance_pow(m: &DiscreteMeasure, k: usize, p: f64) -> f64 {
    let n = m.len();
    assert!(n <= 12);
    let full = (1usize << n) - 1;
    let subset = |mask: usize| -> (Vec<f64>, Vec<f64>) {
        (0..n)
            .filter(|i| mask >> i & 1 == 1)
            .map(|i| (m.atoms()[i], m.weights()[i]))
            .unzip()
    };
    let free: Vec<f64> = (0..=full)
        .map(|mask| {
            let (xs, ws) = subset(mask);
            best_level_cost(&xs, &ws, p)
        })
        .collect();
    let layers = k.min(n);
    // best[t][mask]: mask split into exactly t free groups
    let mut best = vec![vec![f64::INFINITY; full + 1]; layers + 1];
    best[0][0] = 0.0;
    for t in 1..=layers {
        for mask in 1..=full {
            let low = mask & mask.wrapping_neg();
            let rest = mask ^ low;
            let mut sub = rest;
            loop {
                let g = sub | low;
                let v = free[g] + best[t - 1][mask ^ g];
                if v < best[t][mask] {
                    best[t][mask] = v;
                }
                if sub == 0 {
                    break;
                }
                sub = (sub - 1) & rest;
            }
        }
    }
    if !m.infinite_complement() {
        return (1..=layers).map(|t| best[t][full]).fold(f64::INFINITY, f64::min);
    }
    // the zero group takes any subset (possibly empty); k - 1 free groups remain
    let mut out = f64::INFINITY;
    for zero in 0..=full {
        let (xs, ws) = subset(zero);
        let zc: f64 = xs.iter().zip(&ws).map(|(x, w)| w * x.abs().powf(p)).sum();
        let rest = full ^ zero;
        let free_cost = if rest == 0 {
            0.0
        } else {
            (1..=layers.min(k - 1))
                .map(|t| best[t][rest])
                .fold(f64::INFINITY, f64::min)
        };
        out = out.min(zc + free_cost);
    }
    out
}

/// A random measure with `1..=n_max` atoms, some repeated, values in
/// `[-5, 5]` and weights in `[0.05, 2]`.
pub fn random_measure<R: Rng>(rng: &mut R, n_max: usize) -> DiscreteMeasure {
    let n = rng.gen_range(1..=n_max);
    let mut xs: Vec<f64> = Vec::with_capacity(n);
    for _ in 0..n {
        if !xs.is_empty() && rng.gen_bool(0.1) {
            let j = rng.gen_range(0..xs.len());
            xs.push(xs[j]);
        } else {
            xs.push(rng.gen_range(-5.0..5.0));
        }
    }
    let ws: Vec<f64> = (0..n).map(|_| rng.gen_range(0.05..2.0)).collect();
    DiscreteMeasure::from_samples(&xs, &ws).unwrap()
}

/// A random step function's value distribution with at most `q` values.
pub fn random_step_measure<R: Rng>(rng: &mut R, q: usize) -> DiscreteMeasure {
    let n = rng.gen_range(1..=q);
    let xs: Vec<f64> = (0..n).map(|_| rng.gen_range(-3.0..3.0)).collect();
    let ws: Vec<f64> = (0..n).map(|_| rng.gen_range(0.1..1.0)).collect();
    DiscreteMeasure::from_samples(&xs, &ws).unwrap()
}

pub fn uniform(n: usize) -> DiscreteMeasure {
    DiscreteMeasure::discretize_quantile(|u| u, n).unwrap()
}

pub fn normal(n: usize) -> DiscreteMeasure {
    use statrs::distribution::{ContinuousCDF, Normal};
    let d = Normal::new(0.0, 1.0).unwrap();
    DiscreteMeasure::discretize_quantile(|u| d.inverse_cdf(u), n).unwrap()
}
