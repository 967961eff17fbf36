use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::measure::DiscreteMeasure;
use crate::pmean::{abs_pow, check_p, RangeCost};

use super::{has_ambiguous_median, solve_dp, SolveReport, SolverDetails, StepQuantizer};

/// Bookkeeping of a sweep over first-boundary candidates.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepStats {
    /// Grid value that produced the reported quantizer.
    pub best_s: Option<f64>,
    pub admissible: usize,
    pub inadmissible: usize,
    /// No candidate was admissible and the report holds the `k - 1` level
    /// DP solution instead.
    pub fallback: bool,
}

struct Candidate {
    levels: Vec<f64>,
    boundaries: Vec<f64>,
    cost: f64,
}

/// Shooting method on the first boundary `r_2 = s`.
///
/// For each `s` the first level is the p-th mean of the atoms below `s`;
/// then `a_{i+1} = 2 r_{i+1} - a_i` and `r_{i+2}` is placed after the
/// shortest run of atoms from `r_{i+1}` whose p-th mean reaches `a_{i+1}`.
/// The last level is the p-th mean of its cell. `s` is inadmissible when a
/// cell would be empty or a target is never reached.
///
/// When every `s` is inadmissible the report is the `k - 1` level DP
/// solution with `converged = false` and `fallback` set.
pub fn solve_sweep(m: &DiscreteMeasure, k: usize, p: f64, s_grid: &[f64]) -> Result<SolveReport> {
    check_p(p)?;
    if k < 2 {
        return Err(Error::InvalidLevelCount { k, min: 2 });
    }
    if s_grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    if m.infinite_complement() {
        return Err(Error::InfiniteMeasure);
    }
    let rc = RangeCost::new(m, p)?;
    let candidates: Vec<Option<Candidate>> = s_grid.par_iter().map(|&s| shoot(m, &rc, k, p, s)).collect();
    let admissible = candidates.iter().filter(|c| c.is_some()).count();
    let best = candidates
        .iter()
        .enumerate()
        .filter_map(|(i, c)| c.as_ref().map(|c| (i, c)))
        .min_by(|a, b| a.1.cost.total_cmp(&b.1.cost).then(a.0.cmp(&b.0)));
    let mut stats = SweepStats {
        best_s: None,
        admissible,
        inadmissible: s_grid.len() - admissible,
        fallback: false,
    };
    let Some((index, best)) = best else {
        stats.fallback = true;
        let mut report = solve_dp(m, k - 1, p)?;
        report.converged = false;
        report.iterations = s_grid.len();
        report.details = SolverDetails::Sweep(stats);
        return Ok(report);
    };
    stats.best_s = Some(s_grid[index]);
    let quantizer = StepQuantizer::new(best.levels.clone(), best.boundaries.clone())?;
    Ok(SolveReport {
        ambiguous_median: p == 1.0 && has_ambiguous_median(m, &quantizer),
        quantizer,
        error: best.cost.powf(1.0 / p),
        error_pow: best.cost,
        iterations: s_grid.len(),
        converged: true,
        ties: Vec::new(),
        details: SolverDetails::Sweep(stats),
    })
}

fn shoot(m: &DiscreteMeasure, rc: &RangeCost<'_>, k: usize, p: f64, s: f64) -> Option<Candidate> {
    let xs = m.atoms();
    let n = xs.len();
    if !s.is_finite() {
        return None;
    }
    let first_end = xs.partition_point(|&x| x < s);
    if first_end == 0 || first_end == n {
        return None;
    }
    let mut levels = vec![rc.level(0, first_end - 1)];
    let mut boundaries = vec![s];
    let mut start = first_end;
    for _ in 1..k - 1 {
        let r = *boundaries.last().expect("boundary");
        let target = 2.0 * r - levels.last().expect("level");
        // shortest run start..end whose mean reaches the target
        if rc.level(start, n - 1) < target {
            return None;
        }
        let (mut lo, mut hi) = (start, n - 1);
        while lo < hi {
            let mid = lo + (hi - lo) / 2;
            if rc.level(start, mid) >= target {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        let end = lo + 1;
        if end == n {
            return None;
        }
        levels.push(target);
        boundaries.push(0.5 * (xs[end - 1] + xs[end]));
        start = end;
    }
    levels.push(rc.level(start, n - 1));
    if levels.windows(2).any(|w| w[0] >= w[1]) {
        return None;
    }
    for (i, &r) in boundaries.iter().enumerate() {
        if !(levels[i] <= r && r <= levels[i + 1]) {
            return None;
        }
    }
    let cost = cost_of(m, &levels, &boundaries, p);
    Some(Candidate {
        levels,
        boundaries,
        cost,
    })
}

fn cost_of(m: &DiscreteMeasure, levels: &[f64], boundaries: &[f64], p: f64) -> f64 {
    m.atoms()
        .iter()
        .zip(m.weights())
        .map(|(&x, &w)| {
            let cell = boundaries.partition_point(|&r| r <= x);
            w * abs_pow(x - levels[cell], p)
        })
        .sum()
}
