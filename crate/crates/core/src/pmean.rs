//! p-th means and cluster costs on contiguous runs of atoms.
//!
//! For a set of atoms `A` the p-th mean is a minimizer of
//! `a -> sum_{i in A} w_i |x_i - a|^p`. For `p > 1` it is the unique root of
//!
//! ```text
//! sum_{x_i <= m} w_i (m - x_i)^(p-1) = sum_{x_i > m} w_i (x_i - m)^(p-1)
//! ```
//!
//! which is found by bisection (closed form for `p = 2`). For `p = 1` the
//! minimizers form the weighted-median interval `[a*, b*]` and the midpoint
//! `(a* + b*) / 2` is reported.

use crate::error::{Error, Result};
use crate::measure::DiscreteMeasure;

/// Inclusive range `lo..=hi` of atom indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct AtomRange {
    pub lo: usize,
    pub hi: usize,
}

impl AtomRange {
    pub fn new(lo: usize, hi: usize) -> Self {
        Self { lo, hi }
    }

    pub fn full(m: &DiscreteMeasure) -> Self {
        Self { lo: 0, hi: m.len() - 1 }
    }

    pub fn len(&self) -> usize {
        self.hi - self.lo + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    fn check(&self, m: &DiscreteMeasure) -> Result<()> {
        if self.lo > self.hi || self.hi >= m.len() {
            return Err(Error::InvalidRange {
                lo: self.lo,
                hi: self.hi,
                len: m.len(),
            });
        }
        Ok(())
    }
}

/// Relative weight-tie tolerance used to detect a flat stretch of the
/// cumulative distribution at exactly half the mass.
const MEDIAN_TIE_REL: f64 = 1e-12;

pub(crate) fn check_p(p: f64) -> Result<()> {
    if p.is_finite() && p >= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidExponent(p))
    }
}

/// `|x|^p`, exact zero at `x = 0`.
#[inline]
pub fn abs_pow(x: f64, p: f64) -> f64 {
    let a = x.abs();
    if a == 0.0 {
        0.0
    } else if p == 1.0 {
        a
    } else if p == 2.0 {
        a * a
    } else if p == 3.0 {
        a * a * a
    } else if p.fract() == 0.0 && p <= 16.0 {
        a.powi(p as i32)
    } else {
        a.powf(p)
    }
}

/// Bisection width used for p-th means on `[lo, hi]`.
#[inline]
pub fn mean_tolerance(lo: f64, hi: f64) -> f64 {
    1e-12 * 1f64.max(lo.abs()).max(hi.abs())
}

/// Slack allowed when asserting that a reported cost is optimal.
#[inline]
pub fn cost_slack(cost: f64) -> f64 {
    1e-9 * (1.0 + cost)
}

/// The p-th mean of atoms `r` (see the module docs).
///
/// ```
/// use kquant::{DiscreteMeasure, pmean::{pth_mean, AtomRange}};
/// let m = DiscreteMeasure::from_samples(&[0.0, 2.0], &[1.0, 1.0]).unwrap();
/// assert_eq!(pth_mean(&m, AtomRange::new(0, 1), 2.0).unwrap(), 1.0);
/// ```
pub fn pth_mean(m: &DiscreteMeasure, r: AtomRange, p: f64) -> Result<f64> {
    check_p(p)?;
    r.check(m)?;
    Ok(slice_pth_mean(&m.atoms()[r.lo..=r.hi], &m.weights()[r.lo..=r.hi], p))
}

/// The weighted-median interval `[a*, b*]` of atoms `r`: every point of it
/// minimizes the p = 1 cost.
pub fn median_interval(m: &DiscreteMeasure, r: AtomRange) -> Result<(f64, f64)> {
    r.check(m)?;
    Ok(slice_median_interval(
        &m.atoms()[r.lo..=r.hi],
        &m.weights()[r.lo..=r.hi],
    ))
}

/// `sum_{i in r} w_i |x_i - level|^p`.
pub fn cluster_cost(m: &DiscreteMeasure, r: AtomRange, p: f64, level: f64) -> Result<f64> {
    check_p(p)?;
    r.check(m)?;
    Ok(slice_cost(&m.atoms()[r.lo..=r.hi], &m.weights()[r.lo..=r.hi], p, level))
}

/// The p-th mean of `r` together with the cost it attains.
pub fn optimal_cluster_cost(m: &DiscreteMeasure, r: AtomRange, p: f64) -> Result<(f64, f64)> {
    let level = pth_mean(m, r, p)?;
    let cost = cluster_cost(m, r, p, level)?;
    Ok((level, cost))
}

pub(crate) fn slice_cost(xs: &[f64], ws: &[f64], p: f64, level: f64) -> f64 {
    xs.iter().zip(ws).map(|(&x, &w)| w * abs_pow(x - level, p)).sum()
}

pub(crate) fn slice_median_interval(xs: &[f64], ws: &[f64]) -> (f64, f64) {
    let total: f64 = ws.iter().sum();
    let mut cum = 0.0;
    median_from_cumulative(xs, total, |i| {
        cum += ws[i];
        cum
    })
}

/// Shared median logic: `cum(i)` must return the running mass through atom
/// `i` and is called for `i = 0, 1, ...` in order until the median is found.
fn median_from_cumulative(xs: &[f64], total: f64, mut cum: impl FnMut(usize) -> f64) -> (f64, f64) {
    let half = 0.5 * total;
    let tie = MEDIAN_TIE_REL * total;
    for i in 0..xs.len() {
        let c = cum(i);
        if c >= half - tie {
            if (c - half).abs() <= tie && i + 1 < xs.len() {
                return (xs[i], xs[i + 1]);
            }
            return (xs[i], xs[i]);
        }
    }
    let last = xs[xs.len() - 1];
    (last, last)
}

pub(crate) fn slice_pth_mean(xs: &[f64], ws: &[f64], p: f64) -> f64 {
    debug_assert!(!xs.is_empty());
    if xs.len() == 1 {
        return xs[0];
    }
    let (lo, hi) = (xs[0], xs[xs.len() - 1]);
    if p == 1.0 {
        let (a, b) = slice_median_interval(xs, ws);
        return 0.5 * (a + b);
    }
    if p == 2.0 {
        let total: f64 = ws.iter().sum();
        let s: f64 = xs.iter().zip(ws).map(|(&x, &w)| w * x).sum();
        return (s / total).clamp(lo, hi);
    }
    let q = p - 1.0;
    let balance = |m: f64| -> f64 {
        xs.iter()
            .zip(ws)
            .map(|(&x, &w)| {
                if x <= m {
                    w * abs_pow(m - x, q)
                } else {
                    -w * abs_pow(x - m, q)
                }
            })
            .sum()
    };
    bisect_increasing(balance, lo, hi, mean_tolerance(lo, hi))
}

/// Root of an increasing function on `[lo, hi]` with `f(lo) <= 0 <= f(hi)`.
fn bisect_increasing(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    for _ in 0..200 {
        if hi - lo <= tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let v = f(mid);
        if v == 0.0 {
            return mid;
        }
        if v < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Fast evaluation of optimal levels and costs for many contiguous ranges of
/// one measure, used by the dynamic programs.
///
/// For `p = 1` and `p = 2` it uses prefix sums. For small integer `p` on
/// larger inputs it uses prefix power moments about the centre of the data.
/// Otherwise it falls back to the direct sums of [`pth_mean`].
#[derive(Debug, Clone)]
pub struct RangeCost<'a> {
    xs: &'a [f64],
    ws: &'a [f64],
    p: f64,
    centre: f64,
    kind: Kind,
    /// prefix sums of `w |x|^p`, for the forced-zero cluster
    zero_prefix: Vec<f64>,
}

#[derive(Debug, Clone)]
enum Kind {
    Direct,
    Median {
        w: Vec<f64>,
        s: Vec<f64>,
    },
    Mean {
        w: Vec<f64>,
        s: Vec<f64>,
        s2: Vec<f64>,
    },
    Moments {
        order: usize,
        moments: Vec<Vec<f64>>,
        binom: Vec<Vec<f64>>,
    },
}

/// Below this many atoms the direct sums are cheap and the most accurate.
const DIRECT_LIMIT: usize = 64;
const MAX_MOMENT_ORDER: usize = 8;
/// Inputs spanning many orders of magnitude lose everything to cancellation
/// in prefix sums; up to this size they use the direct sums instead.
const BADLY_SCALED_LIMIT: usize = 4096;

fn badly_scaled(xs: &[f64], ws: &[f64]) -> bool {
    let (wmin, wmax) = ws.iter().fold((f64::INFINITY, 0f64), |(a, b), &w| (a.min(w), b.max(w)));
    let spread = xs[xs.len() - 1] - xs[0];
    let gap = xs.windows(2).map(|p| p[1] - p[0]).fold(f64::INFINITY, f64::min);
    wmax > 1e9 * wmin || spread > 1e12 * gap
}

impl<'a> RangeCost<'a> {
    pub fn new(m: &'a DiscreteMeasure, p: f64) -> Result<Self> {
        check_p(p)?;
        let xs = m.atoms();
        let ws = m.weights();
        let n = xs.len();
        let centre = 0.5 * (xs[0] + xs[n - 1]);
        let kind = if n <= DIRECT_LIMIT || (n <= BADLY_SCALED_LIMIT && badly_scaled(xs, ws)) {
            Kind::Direct
        } else if p == 1.0 {
            Kind::Median {
                w: prefix(ws.iter().copied()),
                s: prefix(xs.iter().zip(ws).map(|(&x, &w)| w * (x - centre))),
            }
        } else if p == 2.0 {
            Kind::Mean {
                w: prefix(ws.iter().copied()),
                s: prefix(xs.iter().zip(ws).map(|(&x, &w)| w * (x - centre))),
                s2: prefix(xs.iter().zip(ws).map(|(&x, &w)| w * (x - centre) * (x - centre))),
            }
        } else if p.fract() == 0.0 && p as usize <= MAX_MOMENT_ORDER {
            let order = p as usize;
            let moments = (0..=order)
                .map(|r| prefix(xs.iter().zip(ws).map(|(&x, &w)| w * (x - centre).powi(r as i32))))
                .collect();
            let mut binom = vec![vec![1.0; 1]];
            for q in 1..=order {
                let prev = &binom[q - 1];
                let mut row = vec![1.0; q + 1];
                for r in 1..q {
                    row[r] = prev[r - 1] + prev[r];
                }
                binom.push(row);
            }
            Kind::Moments { order, moments, binom }
        } else {
            Kind::Direct
        };
        Ok(Self {
            xs,
            ws,
            p,
            centre,
            kind,
            zero_prefix: prefix(xs.iter().zip(ws).map(|(&x, &w)| w * abs_pow(x, p))),
        })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    /// True when costs are summed atom by atom (no prefix sums).
    pub fn is_direct(&self) -> bool {
        matches!(self.kind, Kind::Direct)
    }

    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    /// Cost of pinning atoms `lo..=hi` to level 0.
    #[inline]
    pub fn zero_cost(&self, lo: usize, hi: usize) -> f64 {
        (self.zero_prefix[hi + 1] - self.zero_prefix[lo]).max(0.0)
    }

    /// Optimal level for atoms `lo..=hi`.
    pub fn level(&self, lo: usize, hi: usize) -> f64 {
        self.level_and_cost(lo, hi).0
    }

    /// Optimal cost for atoms `lo..=hi`.
    #[inline]
    pub fn cost(&self, lo: usize, hi: usize) -> f64 {
        if lo == hi {
            return 0.0;
        }
        match &self.kind {
            Kind::Mean { w, s, s2 } => {
                let ww = w[hi + 1] - w[lo];
                let ss = s[hi + 1] - s[lo];
                let qq = s2[hi + 1] - s2[lo];
                (qq - ss * ss / ww).max(0.0)
            }
            _ => self.level_and_cost(lo, hi).1,
        }
    }

    pub fn level_and_cost(&self, lo: usize, hi: usize) -> (f64, f64) {
        if lo == hi {
            return (self.xs[lo], 0.0);
        }
        let c = self.centre;
        match &self.kind {
            Kind::Direct => {
                let xs = &self.xs[lo..=hi];
                let ws = &self.ws[lo..=hi];
                let level = slice_pth_mean(xs, ws, self.p);
                (level, slice_cost(xs, ws, self.p, level))
            }
            Kind::Mean { w, s, s2 } => {
                let ww = w[hi + 1] - w[lo];
                let ss = s[hi + 1] - s[lo];
                let qq = s2[hi + 1] - s2[lo];
                let level = (ss / ww + c).clamp(self.xs[lo], self.xs[hi]);
                (level, (qq - ss * ss / ww).max(0.0))
            }
            Kind::Median { w, s } => {
                let total = w[hi + 1] - w[lo];
                let (a, b) = median_from_cumulative(&self.xs[lo..=hi], total, |i| w[lo + i + 1] - w[lo]);
                let level = 0.5 * (a + b);
                // atoms lo..=split sit at or below the level
                let split = lo + self.xs[lo..=hi].partition_point(|&x| x <= level) - 1;
                let y = level - c;
                let wl = w[split + 1] - w[lo];
                let sl = s[split + 1] - s[lo];
                let wr = w[hi + 1] - w[split + 1];
                let sr = s[hi + 1] - s[split + 1];
                (level, (y * wl - sl + sr - y * wr).max(0.0))
            }
            Kind::Moments { order, moments, binom } => self.moments_level_cost(lo, hi, *order, moments, binom),
        }
    }

    /// `sum_{i=lo}^{hi} w_i (m - y_i)^q` from centred moments.
    #[inline]
    fn power_sum(moments: &[Vec<f64>], binom: &[Vec<f64>], lo: usize, hi: usize, q: usize, m: f64) -> f64 {
        if lo > hi {
            return 0.0;
        }
        let mut acc = 0.0;
        let mut mpow = 1.0;
        // r runs from q down to 0 so that m^(q-r) grows with the loop
        for r in (0..=q).rev() {
            let mr = moments[r][hi + 1] - moments[r][lo];
            let sign = if r % 2 == 0 { 1.0 } else { -1.0 };
            acc += sign * binom[q][r] * mpow * mr;
            mpow *= m;
        }
        acc
    }

    fn moments_level_cost(
        &self,
        lo: usize,
        hi: usize,
        order: usize,
        moments: &[Vec<f64>],
        binom: &[Vec<f64>],
    ) -> (f64, f64) {
        let c = self.centre;
        let q = order - 1;
        let odd_q = q % 2 == 1;
        // balance(m) with atoms lo..=split on the left
        let balance = |split: usize, m: f64| -> f64 {
            let left = Self::power_sum(moments, binom, lo, split, q, m);
            let right = Self::power_sum(moments, binom, split + 1, hi, q, m);
            // (y - m)^q = (-1)^q (m - y)^q
            if odd_q {
                left + right
            } else {
                left - right
            }
        };
        let ys = |i: usize| self.xs[i] - c;
        // largest split with balance(split, y_split) <= 0
        let (mut a, mut b) = (lo, hi);
        while a < b {
            let mid = a + (b - a).div_ceil(2);
            if balance(mid, ys(mid)) <= 0.0 {
                a = mid;
            } else {
                b = mid - 1;
            }
        }
        let split = a;
        let level_y = if split == hi {
            ys(hi)
        } else {
            let (l, u) = (ys(split), ys(split + 1));
            let tol = mean_tolerance(self.xs[split], self.xs[split + 1]);
            bisect_increasing(|m| balance(split, m), l, u, tol)
        };
        let left = Self::power_sum(moments, binom, lo, split, order, level_y);
        let right = Self::power_sum(moments, binom, split + 1, hi, order, level_y);
        let cost = if order % 2 == 1 { left - right } else { left + right };
        let level = (level_y + c).clamp(self.xs[lo], self.xs[hi]);
        (level, cost.max(0.0))
    }
}

fn prefix(values: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut out = vec![0.0];
    let mut acc = 0.0;
    for v in values {
        acc += v;
        out.push(acc);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn measure(xs: &[f64], ws: &[f64]) -> DiscreteMeasure {
        DiscreteMeasure::from_samples(xs, ws).unwrap()
    }

    /// Golden-section minimization of the cost, independent of the root
    /// characterization.
    fn golden_min(xs: &[f64], ws: &[f64], p: f64) -> f64 {
        let (mut a, mut b) = (xs[0], xs[xs.len() - 1]);
        let g = (5f64.sqrt() - 1.0) / 2.0;
        let f = |t: f64| slice_cost(xs, ws, p, t);
        while b - a > 1e-13 {
            let c = b - g * (b - a);
            let d = a + g * (b - a);
            if f(c) < f(d) {
                b = d;
            } else {
                a = c;
            }
        }
        0.5 * (a + b)
    }

    #[test]
    fn closed_form_and_midpoint_examples() {
        let m = measure(&[0.0, 2.0], &[1.0, 1.0]);
        assert_eq!(pth_mean(&m, AtomRange::full(&m), 2.0).unwrap(), 1.0);
        let m = measure(&[0.0, 1.0], &[1.0, 1.0]);
        assert_eq!(pth_mean(&m, AtomRange::full(&m), 1.0).unwrap(), 0.5);
        assert_eq!(median_interval(&m, AtomRange::full(&m)).unwrap(), (0.0, 1.0));
    }

    #[test]
    fn fourth_power_mean_matches_golden_section() {
        let m = measure(&[0.0, 1.0], &[1.0, 2.0]);
        let got = pth_mean(&m, AtomRange::full(&m), 4.0).unwrap();
        let oracle = golden_min(m.atoms(), m.weights(), 4.0);
        // root of m^3 = 2 (1 - m)^3; golden section only resolves ~sqrt(eps)
        let exact = 2f64.cbrt() / (1.0 + 2f64.cbrt());
        assert!((exact - 0.557_506_665_975_557_9).abs() < 1e-15);
        assert!((oracle - exact).abs() < 1e-7);
        assert!((got - exact).abs() < 1e-12, "{got} vs {exact}");
    }

    #[test]
    fn cluster_cost_examples() {
        let m = measure(&[0.0, 1.0], &[1.0, 1.0]);
        assert_eq!(cluster_cost(&m, AtomRange::full(&m), 2.0, 0.5).unwrap(), 0.5);
        assert_eq!(cluster_cost(&m, AtomRange::new(1, 1), 3.0, 1.0).unwrap(), 0.0);
        let t = 1.0 / 3.0;
        let m = measure(&[-1.0, 0.0, 1.0], &[t, t, t]);
        let c = cluster_cost(&m, AtomRange::new(1, 2), 2.0, 0.5).unwrap();
        assert!((c - 1.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn optimal_cost_examples() {
        let m = measure(&[3.5], &[2.0]);
        assert_eq!(optimal_cluster_cost(&m, AtomRange::full(&m), 1.7).unwrap(), (3.5, 0.0));
        let m = measure(&[0.0, 2.0], &[1.0, 1.0]);
        assert_eq!(optimal_cluster_cost(&m, AtomRange::full(&m), 2.0).unwrap(), (1.0, 2.0));
        // p = 1: brute force over atom values is exact
        let m = measure(&[0.0, 1.0], &[1.0, 2.0]);
        let brute = m
            .atoms()
            .iter()
            .map(|&a| (a, cluster_cost(&m, AtomRange::full(&m), 1.0, a).unwrap()))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        assert_eq!(brute, (1.0, 1.0));
        assert_eq!(optimal_cluster_cost(&m, AtomRange::full(&m), 1.0).unwrap(), brute);
    }

    #[test]
    fn rejects_bad_arguments() {
        let m = measure(&[0.0, 1.0], &[1.0, 1.0]);
        assert!(matches!(
            pth_mean(&m, AtomRange::new(0, 2), 2.0),
            Err(Error::InvalidRange { .. })
        ));
        assert!(matches!(
            pth_mean(&m, AtomRange::new(1, 0), 2.0),
            Err(Error::InvalidRange { .. })
        ));
        assert_eq!(pth_mean(&m, AtomRange::full(&m), 0.5), Err(Error::InvalidExponent(0.5)));
        assert_eq!(
            pth_mean(&m, AtomRange::full(&m), f64::INFINITY),
            Err(Error::InvalidExponent(f64::INFINITY))
        );
    }

    #[test]
    fn root_changes_sign() {
        let m = measure(&[-3.0, -1.0, 0.5, 2.0, 7.0], &[0.3, 1.2, 0.4, 2.0, 0.1]);
        for p in [1.5, 2.5, 3.0, 4.7] {
            let r = pth_mean(&m, AtomRange::full(&m), p).unwrap();
            let tol = mean_tolerance(-3.0, 7.0);
            let g = |t: f64| -> f64 {
                m.atoms()
                    .iter()
                    .zip(m.weights())
                    .map(|(&x, &w)| {
                        if x <= t {
                            w * abs_pow(t - x, p - 1.0)
                        } else {
                            -w * abs_pow(x - t, p - 1.0)
                        }
                    })
                    .sum()
            };
            assert!(g(r - tol) <= 0.0 && g(r + tol) >= 0.0, "p = {p}");
        }
    }

    #[test]
    fn range_cost_paths_agree_with_direct() {
        // 200 atoms forces the prefix paths.
        let xs: Vec<f64> = (0..200)
            .map(|i| ((i * 37 % 200) as f64 * 0.013).sin() * 3.0 + i as f64 * 0.01)
            .collect();
        let ws: Vec<f64> = (0..200).map(|i| 0.5 + ((i * 13) % 7) as f64 * 0.1).collect();
        let m = measure(&xs, &ws);
        for p in [1.0, 2.0, 3.0, 4.0] {
            let rc = RangeCost::new(&m, p).unwrap();
            for &(lo, hi) in &[(0, 199), (3, 40), (50, 51), (120, 190), (7, 7)] {
                let r = AtomRange::new(lo, hi);
                let (level, cost) = optimal_cluster_cost(&m, r, p).unwrap();
                let (fl, fc) = rc.level_and_cost(lo, hi);
                assert!(
                    (fc - cost).abs() <= 1e-9 * (1.0 + cost),
                    "p={p} {lo}..{hi}: {fc} vs {cost}"
                );
                if p > 1.0 {
                    assert!(
                        (fl - level).abs() <= 1e-8 * (1.0 + level.abs()),
                        "p={p} level {fl} vs {level}"
                    );
                }
                assert!((rc.cost(lo, hi) - fc).abs() <= 1e-12 * (1.0 + fc));
            }
        }
    }

    #[test]
    fn zero_cost_prefix() {
        let m = measure(&[-2.0, 1.0, 3.0], &[1.0, 2.0, 0.5]);
        let rc = RangeCost::new(&m, 2.0).unwrap();
        assert_eq!(rc.zero_cost(0, 2), 4.0 + 2.0 + 4.5);
        assert_eq!(rc.zero_cost(1, 1), 2.0);
    }
}
