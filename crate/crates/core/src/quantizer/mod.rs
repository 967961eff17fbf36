//! Best approximation by simple functions with at most `k` values.
//!
//! After pushing `f` forward to its value distribution, a simple function
//! `g = l(f)` is described by a step map `l` that sends `[r_i, r_{i+1})` to
//! the level `a_i`. The minimizers can always be taken in *special form*:
//! boundaries are midpoints of consecutive levels and every level is the
//! p-th mean of its cell. [`StepQuantizer`] stores such a map.
//!
//! Solvers:
//!
//! * [`solve_dp`]: exact dynamic program over contiguous runs of atoms.
//! * [`solve_lloyd`]: fixed-point iteration of the special-form equations.
//! * [`solve_sweep`]: shooting on the first boundary, propagating the
//!   midpoint relation cell by cell.
//! * [`solve_sup`]: the `p = inf` problem, a covering of the essential range.

mod dp;
mod lloyd;
mod sup;
mod sweep;

pub use dp::{distance_curve, solve_dp, solve_dp_with, DistanceCurve, DpStrategy, DpTable};
pub use lloyd::{solve_lloyd, LloydOptions};
pub use sup::{greedy_cover_count, solve_sup, SupSolution};
pub use sweep::{solve_sweep, SweepStats};

use crate::error::{Error, Result};
use crate::measure::DiscreteMeasure;
use crate::pmean::{abs_pow, check_p, mean_tolerance, slice_median_interval, slice_pth_mean};

/// A step map `l = sum_i a_i 1_[r_i, r_{i+1})` with `r_1 = -inf` and
/// `r_{q+1} = +inf`.
#[derive(Debug, Clone, PartialEq)]
pub struct StepQuantizer {
    levels: Vec<f64>,
    boundaries: Vec<f64>,
    zero_index: Option<usize>,
    special_form: bool,
}

impl StepQuantizer {
    /// Validates levels (strictly increasing) and interleaved boundaries
    /// `a_{i-1} <= r_i <= a_i`.
    pub fn new(levels: Vec<f64>, boundaries: Vec<f64>) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::InvalidQuantizer("no levels".into()));
        }
        if boundaries.len() + 1 != levels.len() {
            return Err(Error::InvalidQuantizer(format!(
                "{} levels need {} boundaries, got {}",
                levels.len(),
                levels.len() - 1,
                boundaries.len()
            )));
        }
        if levels.iter().chain(&boundaries).any(|v| !v.is_finite()) {
            return Err(Error::InvalidQuantizer("non-finite level or boundary".into()));
        }
        if levels.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidQuantizer("levels must be strictly increasing".into()));
        }
        if boundaries.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidQuantizer("boundaries must be strictly increasing".into()));
        }
        for (i, &r) in boundaries.iter().enumerate() {
            if !(levels[i] <= r && r <= levels[i + 1]) {
                return Err(Error::InvalidQuantizer(format!(
                    "boundary {r} is not between levels {} and {}",
                    levels[i],
                    levels[i + 1]
                )));
            }
        }
        Ok(Self {
            levels,
            boundaries,
            zero_index: None,
            special_form: false,
        })
    }

    /// Levels with midpoint boundaries.
    pub fn from_levels(levels: Vec<f64>) -> Result<Self> {
        let boundaries = midpoints(&levels);
        Self::new(levels, boundaries)
    }

    /// Marks the level at `index` as the mandatory zero level.
    pub fn with_zero_index(mut self, index: usize) -> Result<Self> {
        match self.levels.get(index) {
            Some(&0.0) => {
                self.zero_index = Some(index);
                Ok(self)
            }
            _ => Err(Error::InvalidQuantizer(format!("level {index} is not 0"))),
        }
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    pub fn boundaries(&self) -> &[f64] {
        &self.boundaries
    }

    pub fn zero_index(&self) -> Option<usize> {
        self.zero_index
    }

    pub fn is_special_form(&self) -> bool {
        self.special_form
    }

    /// Number of levels `q`.
    pub fn q(&self) -> usize {
        self.levels.len()
    }

    /// Index of the cell containing `x`.
    pub fn cell_of(&self, x: f64) -> usize {
        self.boundaries.partition_point(|&r| r <= x)
    }

    pub fn apply(&self, x: f64) -> f64 {
        self.levels[self.cell_of(x)]
    }

    /// Half-open atom index ranges `[start, end)` of every cell; cells may be
    /// empty.
    pub fn cells(&self, atoms: &[f64]) -> Vec<(usize, usize)> {
        cells_for(atoms, &self.boundaries)
    }

    /// The pushforward of the measure under this map: levels weighted by the
    /// mass of their cells (empty cells omitted).
    pub fn quantized_measure(&self, m: &DiscreteMeasure) -> Result<DiscreteMeasure> {
        let ws = m.weights();
        let (values, weights): (Vec<f64>, Vec<f64>) = self
            .cells(m.atoms())
            .into_iter()
            .enumerate()
            .filter(|(_, (s, e))| e > s)
            .map(|(i, (s, e))| (self.levels[i], ws[s..e].iter().sum::<f64>()))
            .unzip();
        DiscreteMeasure::from_samples(&values, &weights)
    }
}

pub(crate) fn midpoints(levels: &[f64]) -> Vec<f64> {
    levels.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
}

pub(crate) fn cells_for(atoms: &[f64], boundaries: &[f64]) -> Vec<(usize, usize)> {
    let mut out = Vec::with_capacity(boundaries.len() + 1);
    let mut start = 0;
    for &r in boundaries {
        let end = atoms.partition_point(|&x| x < r);
        let end = end.max(start);
        out.push((start, end));
        start = end;
    }
    out.push((start, atoms.len()));
    out
}

/// Extra information specific to the solver that produced a report.
#[derive(Debug, Clone, PartialEq)]
pub enum SolverDetails {
    Dp { strategy: DpStrategy },
    Lloyd { degenerate_cells: usize },
    Sweep(SweepStats),
}

/// Solver output.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub quantizer: StepQuantizer,
    /// `D_{p,k}` estimate `||f - g||_p`.
    pub error: f64,
    /// `error^p`.
    pub error_pow: f64,
    pub iterations: usize,
    pub converged: bool,
    /// All distinct optimal quantizers found when the optimum is not unique
    /// (the selected one included); empty when only one was found.
    pub ties: Vec<StepQuantizer>,
    /// `p = 1` only: some cell has a non-degenerate median interval, so its
    /// level is one of infinitely many optimal choices.
    pub ambiguous_median: bool,
    pub details: SolverDetails,
}

/// `||id - l||_p` under the measure.
pub fn distance(m: &DiscreteMeasure, qz: &StepQuantizer, p: f64) -> Result<f64> {
    Ok(distance_pow(m, qz, p)?.powf(1.0 / p))
}

/// `||id - l||_p^p` under the measure.
pub fn distance_pow(m: &DiscreteMeasure, qz: &StepQuantizer, p: f64) -> Result<f64> {
    check_p(p)?;
    let xs = m.atoms();
    let ws = m.weights();
    let mut total = 0.0;
    for (i, (s, e)) in qz.cells(xs).into_iter().enumerate() {
        let a = qz.levels[i];
        total += xs[s..e]
            .iter()
            .zip(&ws[s..e])
            .map(|(&x, &w)| w * abs_pow(x - a, p))
            .sum::<f64>();
    }
    Ok(total)
}

const CANONICAL_MAX_ITER: usize = 1000;

/// Rewrites `qz` in special form: midpoint boundaries, levels equal to the
/// p-th means of their cells, empty cells dropped and equal levels merged.
/// The objective never increases. A zero level marked on `qz`, or implied by
/// an infinite-complement measure, stays pinned at 0 and is never dropped.
pub fn canonicalize(m: &DiscreteMeasure, qz: &StepQuantizer, p: f64) -> Result<StepQuantizer> {
    check_p(p)?;
    let pin_zero = qz.zero_index.is_some() || m.infinite_complement();
    let mut levels = qz.levels.clone();
    if pin_zero && !levels.contains(&0.0) {
        levels.push(0.0);
        levels.sort_by(f64::total_cmp);
    }
    let (levels, converged) = lloyd_fixed_point(m, levels, p, pin_zero, CANONICAL_MAX_ITER, None);
    let mut out = StepQuantizer::from_levels(levels.levels)?;
    if pin_zero {
        let z = out.levels.iter().position(|&v| v == 0.0).expect("zero level kept");
        out = out.with_zero_index(z)?;
    }
    out.special_form = converged;
    Ok(out)
}

pub(crate) struct FixedPoint {
    pub levels: Vec<f64>,
    pub iterations: usize,
    pub degenerate_cells: usize,
}

/// Alternates midpoint assignment and p-th means until the levels stop
/// moving by more than `tol` (or the p-th mean tolerance when `tol` is
/// `None`). Returns the levels and whether the iteration converged.
pub(crate) fn lloyd_fixed_point(
    m: &DiscreteMeasure,
    levels: Vec<f64>,
    p: f64,
    pin_zero: bool,
    max_iter: usize,
    tol: Option<f64>,
) -> (FixedPoint, bool) {
    let mut state = FixedPoint {
        levels,
        iterations: 0,
        degenerate_cells: 0,
    };
    loop {
        let (next, dropped) = lloyd_step(m, &state.levels, p, pin_zero);
        state.degenerate_cells += dropped;
        let same_shape = next.len() == state.levels.len();
        let moved = if same_shape {
            next.iter()
                .zip(&state.levels)
                .map(|(a, b)| (a - b).abs() - tol.unwrap_or_else(|| mean_tolerance(*a, *b)))
                .fold(f64::NEG_INFINITY, f64::max)
        } else {
            f64::INFINITY
        };
        state.levels = next;
        if moved <= 0.0 {
            return (state, true);
        }
        state.iterations += 1;
        if state.iterations >= max_iter {
            return (state, false);
        }
    }
}

/// One assignment + update step. Returns new levels and the number of empty
/// cells that were removed.
pub(crate) fn lloyd_step(m: &DiscreteMeasure, levels: &[f64], p: f64, pin_zero: bool) -> (Vec<f64>, usize) {
    let xs = m.atoms();
    let ws = m.weights();
    let cells = cells_for(xs, &midpoints(levels));
    let mut next = Vec::with_capacity(levels.len());
    let mut dropped = 0;
    for (i, (s, e)) in cells.into_iter().enumerate() {
        if pin_zero && levels[i] == 0.0 {
            next.push(0.0);
        } else if e > s {
            next.push(slice_pth_mean(&xs[s..e], &ws[s..e], p));
        } else {
            dropped += 1;
        }
    }
    // means of disjoint ordered cells are ordered; only exact collisions
    // (a free mean landing on the pinned zero) need merging
    next.sort_by(f64::total_cmp);
    next.dedup();
    (next, dropped)
}

/// True when some cell of `qz` has a non-degenerate weighted-median interval.
pub(crate) fn has_ambiguous_median(m: &DiscreteMeasure, qz: &StepQuantizer) -> bool {
    let xs = m.atoms();
    let ws = m.weights();
    qz.cells(xs).into_iter().enumerate().any(|(i, (s, e))| {
        if e <= s || Some(i) == qz.zero_index {
            return false;
        }
        let (a, b) = slice_median_interval(&xs[s..e], &ws[s..e]);
        b > a
    })
}

/// Canonical form + exact error of a candidate quantizer.
pub(crate) fn finish(m: &DiscreteMeasure, qz: &StepQuantizer, p: f64) -> Result<(StepQuantizer, f64)> {
    let canon = canonicalize(m, qz, p)?;
    let err = distance_pow(m, &canon, p)?;
    Ok((canon, err))
}
