use crate::error::{Error, Result};
use crate::measure::DiscreteMeasure;
use crate::pmean::check_p;

use super::{distance_pow, has_ambiguous_median, lloyd_fixed_point, SolveReport, SolverDetails, StepQuantizer};

/// Settings for [`solve_lloyd`].
#[derive(Debug, Clone, PartialEq)]
pub struct LloydOptions {
    /// Starting levels; weighted quantiles at `(2i - 1) / 2k` when absent.
    pub init_levels: Option<Vec<f64>>,
    /// Stop once no level moves by `tol` or more.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for LloydOptions {
    fn default() -> Self {
        Self {
            init_levels: None,
            tol: 1e-10,
            max_iter: 500,
        }
    }
}

/// Lloyd-style iteration: boundaries become level midpoints, levels become
/// the p-th means of their cells. Empty cells are deleted and counted in
/// [`SolverDetails::Lloyd`]. May stop at a local optimum.
///
/// ```
/// use kquant::{DiscreteMeasure, quantizer::{solve_lloyd, LloydOptions}};
/// let m = DiscreteMeasure::from_samples(&[0.0, 1.0, 10.0, 11.0], &[1.0; 4]).unwrap();
/// let r = solve_lloyd(&m, 2, 2.0, &LloydOptions::default()).unwrap();
/// assert_eq!(r.quantizer.levels(), &[0.5, 10.5]);
/// assert!(r.converged);
/// ```
pub fn solve_lloyd(m: &DiscreteMeasure, k: usize, p: f64, opts: &LloydOptions) -> Result<SolveReport> {
    check_p(p)?;
    if k == 0 {
        return Err(Error::InvalidLevelCount { k, min: 1 });
    }
    if !(opts.tol > 0.0 && opts.tol.is_finite()) {
        return Err(Error::InvalidTolerance(opts.tol));
    }
    let pin_zero = m.infinite_complement();
    let init = match &opts.init_levels {
        Some(levels) => {
            if levels.is_empty()
                || levels.len() > k
                || levels.iter().any(|v| !v.is_finite())
                || levels.windows(2).any(|w| w[0] >= w[1])
            {
                return Err(Error::InvalidInitLevels);
            }
            let mut levels = levels.clone();
            if pin_zero && !levels.contains(&0.0) {
                // the level nearest to zero becomes the zero level
                let i = (0..levels.len())
                    .min_by(|&a, &b| levels[a].abs().total_cmp(&levels[b].abs()))
                    .expect("non-empty");
                levels[i] = 0.0;
                levels.sort_by(f64::total_cmp);
                levels.dedup();
            }
            levels
        }
        None => quantile_init(m, k, pin_zero),
    };
    let (state, converged) = lloyd_fixed_point(m, init, p, pin_zero, opts.max_iter, Some(opts.tol));
    let mut quantizer = StepQuantizer::from_levels(state.levels)?;
    if pin_zero {
        let z = quantizer.levels().iter().position(|&v| v == 0.0).expect("zero level");
        quantizer = quantizer.with_zero_index(z)?;
    }
    quantizer.special_form = converged;
    let error_pow = distance_pow(m, &quantizer, p)?;
    Ok(SolveReport {
        ambiguous_median: p == 1.0 && has_ambiguous_median(m, &quantizer),
        quantizer,
        error: error_pow.powf(1.0 / p),
        error_pow,
        iterations: state.iterations,
        converged,
        ties: Vec::new(),
        details: SolverDetails::Lloyd {
            degenerate_cells: state.degenerate_cells,
        },
    })
}

/// Weighted quantiles at levels `(2i - 1) / 2k` (one slot replaced by 0 when
/// the zero level is pinned), deduplicated.
fn quantile_init(m: &DiscreteMeasure, k: usize, pin_zero: bool) -> Vec<f64> {
    let free = if pin_zero { k - 1 } else { k };
    let xs = m.atoms();
    let total = m.total_mass();
    let mut cum = Vec::with_capacity(xs.len());
    let mut acc = 0.0;
    for &w in m.weights() {
        acc += w;
        cum.push(acc);
    }
    let mut levels: Vec<f64> = (1..=free)
        .map(|i| {
            let target = (2 * i - 1) as f64 / (2 * free) as f64 * total;
            let j = cum.partition_point(|&c| c < target).min(xs.len() - 1);
            xs[j]
        })
        .collect();
    if pin_zero {
        levels.push(0.0);
    }
    levels.sort_by(f64::total_cmp);
    levels.dedup();
    levels
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantizer::solve_dp;

    #[test]
    fn starts_at_dp_fixed_point() {
        let m =
            DiscreteMeasure::from_samples(&[0.1, 0.4, 0.5, 2.0, 2.2, 5.0], &[1.0, 2.0, 1.0, 1.0, 3.0, 1.0]).unwrap();
        let dp = solve_dp(&m, 3, 2.0).unwrap();
        let opts = LloydOptions {
            init_levels: Some(dp.quantizer.levels().to_vec()),
            ..Default::default()
        };
        let r = solve_lloyd(&m, 3, 2.0, &opts).unwrap();
        assert!(r.converged);
        assert!(r.iterations <= 2);
        assert!((r.error_pow - dp.error_pow).abs() < 1e-9);
    }

    #[test]
    fn collapsing_init_drops_cells() {
        let m = DiscreteMeasure::from_samples(&[0.0, 1.0], &[1.0, 1.0]).unwrap();
        let opts = LloydOptions {
            init_levels: Some(vec![0.4, 0.45, 0.5]),
            ..Default::default()
        };
        let r = solve_lloyd(&m, 3, 2.0, &opts).unwrap();
        assert_eq!(r.quantizer.levels(), &[0.0, 1.0]);
        assert!(matches!(r.details, SolverDetails::Lloyd { degenerate_cells } if degenerate_cells >= 1));
        let dp = solve_dp(&m, 3, 2.0).unwrap();
        assert_eq!(r.error_pow, dp.error_pow);
    }

    #[test]
    fn rejects_bad_init() {
        let m = DiscreteMeasure::from_samples(&[0.0, 1.0], &[1.0, 1.0]).unwrap();
        let opts = LloydOptions {
            init_levels: Some(vec![0.5, 0.5]),
            ..Default::default()
        };
        assert_eq!(solve_lloyd(&m, 2, 2.0, &opts).unwrap_err(), Error::InvalidInitLevels);
        let opts = LloydOptions {
            tol: 0.0,
            ..Default::default()
        };
        assert_eq!(
            solve_lloyd(&m, 2, 2.0, &opts).unwrap_err(),
            Error::InvalidTolerance(0.0)
        );
    }

    #[test]
    fn infinite_mode_keeps_zero() {
        let m = DiscreteMeasure::from_samples(&[1.0, 2.0, 10.0], &[1.0; 3])
            .unwrap()
            .with_infinite_complement(true);
        let r = solve_lloyd(&m, 2, 2.0, &LloydOptions::default()).unwrap();
        assert!(r.quantizer.levels().contains(&0.0));
        assert!(r.quantizer.zero_index().is_some());
    }
}
