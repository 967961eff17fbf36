use crate::error::{Error, Result};
use crate::measure::RangeSet;

/// Solution of the `p = inf` problem: ball centres and their common radius.
#[derive(Debug, Clone, PartialEq)]
pub struct SupSolution {
    pub levels: Vec<f64>,
    pub radius: f64,
}

/// Number of closed intervals of radius `alpha` the left-to-right greedy
/// needs to cover `r`: each interval starts at the leftmost uncovered point.
/// Returns `usize::MAX` when `alpha = 0` and `r` contains a proper interval.
pub fn greedy_cover_count(r: &RangeSet, alpha: f64) -> usize {
    greedy(r, alpha, usize::MAX, None)
}

/// Greedy cover, stopping early once more than `limit` balls are needed.
/// Centres are pushed into `centres` when given.
fn greedy(r: &RangeSet, alpha: f64, limit: usize, mut centres: Option<&mut Vec<f64>>) -> usize {
    let width = 2.0 * alpha;
    let mut count = 0usize;
    let mut reach = f64::NEG_INFINITY;
    for &(l, u) in r.intervals() {
        if l > reach {
            count += 1;
            if let Some(c) = centres.as_deref_mut() {
                c.push(l + alpha);
            }
            reach = l + width;
        }
        if u > reach {
            if width == 0.0 {
                return usize::MAX;
            }
            let extra = ((u - reach) / width).ceil();
            if extra >= (limit - count.min(limit)) as f64 + 1.0 {
                return limit.saturating_add(1);
            }
            let extra = extra as usize;
            if let Some(c) = centres.as_deref_mut() {
                for j in 0..extra {
                    c.push(reach + alpha + width * j as f64);
                }
            }
            count += extra;
            reach += width * extra as f64;
        }
        if count > limit {
            return count;
        }
    }
    count
}

/// Minimal radius `alpha` such that `k` closed intervals of radius `alpha`
/// cover `r`, together with the greedy centres at that radius.
///
/// The radius is the smallest binary64 value at which the greedy cover, with
/// coverage tested as `u <= l + 2 alpha` in floating point, uses at most `k`
/// intervals. It can sit an ulp below the real-number optimum.
///
/// ```
/// use kquant::{RangeSet, quantizer::solve_sup};
/// let r = RangeSet::new(vec![(0.0, 1.0 / 3.0), (2.0 / 3.0, 1.0)]).unwrap();
/// assert_eq!(solve_sup(&r, 2).unwrap().radius, 1.0 / 6.0);
/// ```
pub fn solve_sup(r: &RangeSet, k: usize) -> Result<SupSolution> {
    if k == 0 {
        return Err(Error::InvalidLevelCount { k, min: 1 });
    }
    let feasible = |alpha: f64| greedy(r, alpha, k, None) <= k;
    let radius = if feasible(0.0) {
        0.0
    } else {
        let mut hi = 0.5 * (r.upper() - r.lower());
        while !feasible(hi) {
            hi = next_up(hi);
        }
        // positive floats order like their bit patterns
        let (mut lo_bits, mut hi_bits) = (0u64, hi.to_bits());
        while hi_bits - lo_bits > 1 {
            let mid = lo_bits + (hi_bits - lo_bits) / 2;
            if feasible(f64::from_bits(mid)) {
                hi_bits = mid;
            } else {
                lo_bits = mid;
            }
        }
        f64::from_bits(hi_bits)
    };
    let mut levels = Vec::with_capacity(k);
    greedy(r, radius, k, Some(&mut levels));
    Ok(SupSolution { levels, radius })
}

fn next_up(x: f64) -> f64 {
    if x == 0.0 {
        f64::from_bits(1)
    } else {
        f64::from_bits(x.to_bits() + 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_intervals() -> RangeSet {
        RangeSet::new(vec![(0.0, 1.0 / 3.0), (2.0 / 3.0, 1.0)]).unwrap()
    }

    #[test]
    fn two_interval_example() {
        let r = two_intervals();
        for k in [2, 3] {
            let s = solve_sup(&r, k).unwrap();
            assert_eq!(s.radius, 1.0 / 6.0);
            assert!(s.levels.len() <= k);
            assert!(greedy_cover_count(&r, s.radius) <= k);
            assert!(greedy_cover_count(&r, f64::from_bits(s.radius.to_bits() - 1)) > k);
        }
        let s = solve_sup(&r, 1).unwrap();
        assert_eq!(s.radius, 0.5);
        assert_eq!(s.levels, vec![0.5]);
    }

    #[test]
    fn points() {
        let r = RangeSet::points(&[3.0]).unwrap();
        assert_eq!(
            solve_sup(&r, 1).unwrap(),
            SupSolution {
                levels: vec![3.0],
                radius: 0.0
            }
        );
        let r = RangeSet::points(&[0.0, 0.5, 1.0]).unwrap();
        assert_eq!(greedy_cover_count(&r, 0.3), 2);
        assert_eq!(solve_sup(&r, 3).unwrap().radius, 0.0);
        // 0.5 + 2 alpha rounds up to 1 one ulp below 0.25
        let alpha = solve_sup(&r, 2).unwrap().radius;
        assert!((0.25 - 1e-16..=0.25).contains(&alpha));
        assert_eq!(solve_sup(&r, 1).unwrap().radius, 0.5);
    }

    #[test]
    fn long_interval_needs_several_balls() {
        let r = RangeSet::new(vec![(0.0, 1.0)]).unwrap();
        assert_eq!(greedy_cover_count(&r, 0.1), 5);
        assert_eq!(greedy_cover_count(&r, 0.0), usize::MAX);
        let s = solve_sup(&r, 4).unwrap();
        assert_eq!(s.radius, 0.125);
        assert_eq!(s.levels, vec![0.125, 0.375, 0.625, 0.875]);
    }

    #[test]
    fn zero_k() {
        assert!(solve_sup(&two_intervals(), 0).is_err());
    }
}
