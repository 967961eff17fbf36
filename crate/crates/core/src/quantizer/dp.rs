use crate::error::{Error, Result};
use crate::measure::DiscreteMeasure;
use crate::pmean::{check_p, slice_pth_mean, RangeCost};

use super::{finish, has_ambiguous_median, SolveReport, SolverDetails, StepQuantizer};

/// How the dynamic program searches split points.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DpStrategy {
    /// Every split point for every prefix: `O(n^2 k)` cost evaluations.
    Full,
    /// Divide and conquer over monotone optimal split points:
    /// `O(k n log n)` cost evaluations. Finite mode only.
    Monotone,
    /// `Full` for small inputs and infinite-complement measures, otherwise
    /// `Monotone`.
    Auto,
}

const FULL_LIMIT: usize = 1024;
/// `Full` limit when range costs are summed atom by atom.
const FULL_LIMIT_DIRECT: usize = 128;
/// Relative slack under which two partitions count as equally optimal.
const TIE_REL: f64 = 1e-11;
/// Maximum number of optimal partitions collected during backtracking.
pub const MAX_TIES: usize = 8;

/// Dynamic-programming tables for all `k <= k_max` at once.
///
/// `free[t][len]` is the least cost of covering the first `len` atoms with
/// exactly `t` contiguous groups, each at its p-th mean. In infinite-complement
/// mode, `zero[t][len]` is the same with exactly one group pinned to level 0.
pub struct DpTable<'a> {
    m: &'a DiscreteMeasure,
    p: f64,
    k_max: usize,
    rc: RangeCost<'a>,
    strategy: DpStrategy,
    free: Vec<Vec<f64>>,
    zero: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Table {
    Free,
    Zero,
}

/// One group of a partition: atoms `start..end`, pinned to zero or not.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
struct Segment {
    start: usize,
    end: usize,
    zero: bool,
}

impl<'a> DpTable<'a> {
    pub fn build(m: &'a DiscreteMeasure, p: f64, k_max: usize, strategy: DpStrategy) -> Result<Self> {
        check_p(p)?;
        if k_max == 0 {
            return Err(Error::InvalidLevelCount { k: 0, min: 1 });
        }
        let n = m.len();
        let rc = RangeCost::new(m, p)?;
        let infinite = m.infinite_complement();
        let limit = if rc.is_direct() { FULL_LIMIT_DIRECT } else { FULL_LIMIT };
        let strategy = match strategy {
            DpStrategy::Auto if infinite || n <= limit => DpStrategy::Full,
            DpStrategy::Auto => DpStrategy::Monotone,
            DpStrategy::Monotone if infinite => DpStrategy::Full,
            s => s,
        };
        let layers = k_max.min(n);
        let mut table = Self {
            m,
            p,
            k_max,
            rc,
            strategy,
            free: vec![vec![f64::INFINITY; n + 1]; layers + 1],
            zero: infinite.then(|| vec![vec![f64::INFINITY; n + 1]; layers + 1]),
        };
        table.free[0][0] = 0.0;
        match strategy {
            DpStrategy::Monotone => table.fill_monotone(layers),
            _ => table.fill_full(layers),
        }
        Ok(table)
    }

    pub fn strategy(&self) -> DpStrategy {
        self.strategy
    }

    pub fn k_max(&self) -> usize {
        self.k_max
    }

    fn fill_full(&mut self, layers: usize) {
        let n = self.m.len();
        for len in 1..=n {
            for start in 0..len {
                let c = self.rc.cost(start, len - 1);
                let zc = if self.zero.is_some() {
                    self.rc.zero_cost(start, len - 1)
                } else {
                    0.0
                };
                let t_hi = layers.min(start + 1);
                for t in 1..=t_hi {
                    let prev = self.free[t - 1][start];
                    if prev.is_finite() {
                        let cand = prev + c;
                        if cand < self.free[t][len] {
                            self.free[t][len] = cand;
                        }
                    }
                    if let Some(zero) = self.zero.as_mut() {
                        let pz = zero[t - 1][start];
                        let mut best = zero[t][len];
                        if pz.is_finite() && pz + c < best {
                            best = pz + c;
                        }
                        if prev.is_finite() && prev + zc < best {
                            best = prev + zc;
                        }
                        zero[t][len] = best;
                    }
                }
            }
        }
    }

    fn fill_monotone(&mut self, layers: usize) {
        let n = self.m.len();
        for len in 1..=n {
            self.free[1][len] = self.rc.cost(0, len - 1);
        }
        for t in 2..=layers {
            let (done, rest) = self.free.split_at_mut(t);
            let prev = &done[t - 1];
            let cur = &mut rest[0];
            divide_and_conquer(&self.rc, prev, cur, t, t, n, t - 1, n - 1);
        }
    }

    fn layers(&self) -> usize {
        self.free.len() - 1
    }

    /// End states whose cost is the optimum for `k` levels.
    fn end_states(&self, k: usize) -> Vec<(Table, usize, f64)> {
        let n = self.m.len();
        let mut out = Vec::new();
        match &self.zero {
            None => {
                let t = k.min(n);
                out.push((Table::Free, t, self.free[t][n]));
            }
            Some(zero) => {
                for (t, row) in zero.iter().enumerate().take(k.min(self.layers()) + 1).skip(1) {
                    out.push((Table::Zero, t, row[n]));
                }
                // the zero level may cover no atoms at all
                if k >= 2 {
                    let t = (k - 1).min(n);
                    out.push((Table::Free, t, self.free[t][n]));
                }
            }
        }
        out
    }

    /// DP optimum of `D_{p,k}^p` (cost evaluations may use prefix sums).
    pub fn value_pow(&self, k: usize) -> Result<f64> {
        self.check_k(k)?;
        Ok(self
            .end_states(k)
            .into_iter()
            .map(|s| s.2)
            .fold(f64::INFINITY, f64::min))
    }

    fn check_k(&self, k: usize) -> Result<()> {
        if k == 0 || k > self.k_max {
            return Err(Error::InvalidLevelCount { k, min: 1 });
        }
        Ok(())
    }

    /// Full report for `k <= k_max`: canonical quantizer, exact error and all
    /// optimal partitions found while backtracking.
    pub fn report(&self, k: usize) -> Result<SolveReport> {
        self.check_k(k)?;
        let best = self.value_pow(k)?;
        let tol = TIE_REL * best.abs();
        let mut partitions: Vec<Vec<Segment>> = Vec::new();
        for (table, t, v) in self.end_states(k) {
            if v <= best + tol && partitions.len() < MAX_TIES {
                let mut path = Vec::new();
                self.backtrack(table, t, self.m.len(), tol, &mut path, &mut partitions);
            }
        }
        // prefer the partition whose leftmost boundary is smallest
        partitions.sort_by_key(|segs| segs.iter().map(|s| (s.end, s.zero)).collect::<Vec<_>>());

        let mut found: Vec<(StepQuantizer, f64)> = Vec::new();
        for segs in &partitions {
            let qz = self.quantizer_for(segs)?;
            let (canon, err) = finish(self.m, &qz, self.p)?;
            if !found.iter().any(|(q, _)| same_quantizer(q, &canon)) {
                found.push((canon, err));
            }
        }
        let (quantizer, error_pow) = found[0].clone();
        let ties = if found.len() > 1 {
            found.into_iter().map(|(q, _)| q).collect()
        } else {
            Vec::new()
        };
        Ok(SolveReport {
            ambiguous_median: self.p == 1.0 && has_ambiguous_median(self.m, &quantizer),
            quantizer,
            error: error_pow.powf(1.0 / self.p),
            error_pow,
            iterations: 0,
            converged: true,
            ties,
            details: SolverDetails::Dp {
                strategy: self.strategy,
            },
        })
    }

    fn backtrack(
        &self,
        table: Table,
        t: usize,
        len: usize,
        tol: f64,
        path: &mut Vec<Segment>,
        out: &mut Vec<Vec<Segment>>,
    ) {
        if out.len() >= MAX_TIES {
            return;
        }
        if t == 0 {
            if len == 0 && table == Table::Free {
                let mut segs = path.clone();
                segs.reverse();
                out.push(segs);
            }
            return;
        }
        let target = match table {
            Table::Free => self.free[t][len],
            Table::Zero => self.zero.as_ref().expect("zero table")[t][len],
        };
        let slack = target + tol;
        for start in (t - 1)..len {
            let c = self.rc.cost(start, len - 1);
            let prev_free = self.free[t - 1][start];
            match table {
                Table::Free => {
                    if prev_free + c <= slack {
                        path.push(Segment {
                            start,
                            end: len,
                            zero: false,
                        });
                        self.backtrack(Table::Free, t - 1, start, tol, path, out);
                        path.pop();
                    }
                }
                Table::Zero => {
                    let zero = self.zero.as_ref().expect("zero table");
                    if zero[t - 1][start] + c <= slack {
                        path.push(Segment {
                            start,
                            end: len,
                            zero: false,
                        });
                        self.backtrack(Table::Zero, t - 1, start, tol, path, out);
                        path.pop();
                    }
                    if prev_free + self.rc.zero_cost(start, len - 1) <= slack {
                        path.push(Segment {
                            start,
                            end: len,
                            zero: true,
                        });
                        self.backtrack(Table::Free, t - 1, start, tol, path, out);
                        path.pop();
                    }
                }
            }
            if out.len() >= MAX_TIES {
                return;
            }
        }
    }

    fn quantizer_for(&self, segs: &[Segment]) -> Result<StepQuantizer> {
        let xs = self.m.atoms();
        let ws = self.m.weights();
        let mut levels: Vec<f64> = segs
            .iter()
            .map(|s| {
                if s.zero {
                    0.0
                } else {
                    slice_pth_mean(&xs[s.start..s.end], &ws[s.start..s.end], self.p)
                }
            })
            .collect();
        if self.m.infinite_complement() && !segs.iter().any(|s| s.zero) {
            levels.push(0.0);
        }
        levels.sort_by(f64::total_cmp);
        levels.dedup();
        let qz = StepQuantizer::from_levels(levels)?;
        if self.m.infinite_complement() {
            let z = qz.levels().iter().position(|&v| v == 0.0).expect("zero level");
            return qz.with_zero_index(z);
        }
        Ok(qz)
    }
}

fn same_quantizer(a: &StepQuantizer, b: &StepQuantizer) -> bool {
    a.q() == b.q()
        && a.levels()
            .iter()
            .zip(b.levels())
            .all(|(x, y)| (x - y).abs() <= 1e-12 * (1.0 + x.abs().max(y.abs())))
}

/// Fills `cur[len]` for `len in lo..=hi` knowing the optimal split for these
/// prefixes lies in `opt_lo..=opt_hi` and is monotone in `len`.
#[allow(clippy::too_many_arguments, clippy::needless_range_loop)]
fn divide_and_conquer(
    rc: &RangeCost<'_>,
    prev: &[f64],
    cur: &mut [f64],
    t: usize,
    lo: usize,
    hi: usize,
    opt_lo: usize,
    opt_hi: usize,
) {
    if lo > hi {
        return;
    }
    let mid = lo + (hi - lo) / 2;
    let mut best = f64::INFINITY;
    let mut arg = opt_lo.max(t - 1);
    for start in opt_lo.max(t - 1)..=opt_hi.min(mid - 1) {
        let p = prev[start];
        if !p.is_finite() {
            continue;
        }
        let v = p + rc.cost(start, mid - 1);
        if v < best {
            best = v;
            arg = start;
        }
    }
    cur[mid] = best;
    if mid > lo {
        divide_and_conquer(rc, prev, cur, t, lo, mid - 1, opt_lo, arg);
    }
    divide_and_conquer(rc, prev, cur, t, mid + 1, hi, arg, opt_hi);
}

/// Globally optimal quantizer with at most `k` levels.
///
/// ```
/// use kquant::{DiscreteMeasure, quantizer::solve_dp};
/// let t = 1.0 / 3.0;
/// let m = DiscreteMeasure::from_samples(&[-1.0, 0.0, 1.0], &[t, t, t]).unwrap();
/// let report = solve_dp(&m, 2, 2.0).unwrap();
/// assert!((report.error_pow - 1.0 / 6.0).abs() < 1e-12);
/// assert_eq!(report.ties.len(), 2);
/// ```
pub fn solve_dp(m: &DiscreteMeasure, k: usize, p: f64) -> Result<SolveReport> {
    solve_dp_with(m, k, p, DpStrategy::Auto)
}

pub fn solve_dp_with(m: &DiscreteMeasure, k: usize, p: f64, strategy: DpStrategy) -> Result<SolveReport> {
    if k == 0 {
        return Err(Error::InvalidLevelCount { k, min: 1 });
    }
    DpTable::build(m, p, k, strategy)?.report(k)
}

/// `D_{p,k}` for `k = 1..=k_max` together with any violations of the
/// expected shape (strictly decreasing until it first reaches zero).
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceCurve {
    pub distances: Vec<f64>,
    pub distances_pow: Vec<f64>,
    pub violations: Vec<String>,
}

pub fn distance_curve(m: &DiscreteMeasure, p: f64, k_max: usize) -> Result<DistanceCurve> {
    let table = DpTable::build(m, p, k_max, DpStrategy::Auto)?;
    let mut distances_pow = Vec::with_capacity(k_max);
    for k in 1..=k_max {
        distances_pow.push(table.report(k)?.error_pow);
    }
    let distances: Vec<f64> = distances_pow.iter().map(|d| d.powf(1.0 / p)).collect();
    let mut violations = Vec::new();
    for k in 1..k_max {
        let (a, b) = (distances_pow[k - 1], distances_pow[k]);
        let slack = 1e-9 * (1.0 + a);
        if b > a + slack {
            violations.push(format!("D_{{p,{}}} = {} exceeds D_{{p,{}}} = {}", k + 1, b, k, a));
        } else if a > 0.0 && b >= a && a > slack {
            violations.push(format!("D_{{p,{}}} = {} did not decrease from D_{{p,{}}}", k + 1, b, k));
        }
    }
    Ok(DistanceCurve {
        distances,
        distances_pow,
        violations,
    })
}
