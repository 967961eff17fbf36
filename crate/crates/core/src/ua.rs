//! Uniform approximability of finite families.
//!
//! A family is uniformly approximable in `L^p` when for every `eps` a single
//! `k` brings every member within `eps` of the simple functions with `k`
//! values. For a finite family the least such `k` is
//! `N_{p,eps} = max_f min{k : D_{p,k}(f) <= eps}`. Results on finite
//! families are certificates for those members only.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::measure::{DiscreteMeasure, RangeSet};
use crate::quantizer::{greedy_cover_count, solve_sup, DpStrategy, DpTable};
use crate::variation::VariationTable;

/// The exponent `p`, finite (`>= 1`) or infinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PNorm {
    Finite(f64),
    Infinity,
}

impl PNorm {
    pub fn is_infinite(&self) -> bool {
        matches!(self, PNorm::Infinity)
    }
}

impl std::fmt::Display for PNorm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PNorm::Finite(p) => write!(f, "{p}"),
            PNorm::Infinity => f.write_str("inf"),
        }
    }
}

fn check_eps(eps: f64) -> Result<()> {
    if eps > 0.0 && eps.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidEpsilon(eps))
    }
}

/// Least number of closed intervals of radius `eps` covering `r`.
///
/// ```
/// use kquant::{RangeSet, ua::covering_number};
/// let r = RangeSet::points(&[0.0, 0.5, 1.0]).unwrap();
/// assert_eq!(covering_number(&r, 0.3).unwrap(), 2);
/// ```
pub fn covering_number(r: &RangeSet, eps: f64) -> Result<usize> {
    check_eps(eps)?;
    Ok(greedy_cover_count(r, eps))
}

/// Largest `k` that can matter: past it the distance is 0.
fn saturation(m: &DiscreteMeasure) -> usize {
    m.len() + usize::from(m.infinite_complement())
}

/// Least `k` with `D_{p,k} <= eps`, by doubling then bisection on `k`.
///
/// ```
/// use kquant::{DiscreteMeasure, ua::{min_levels, PNorm}};
/// let t = 1.0 / 3.0;
/// let m = DiscreteMeasure::from_samples(&[-1.0, 0.0, 1.0], &[t, t, t]).unwrap();
/// assert_eq!(min_levels(&m, PNorm::Finite(2.0), 0.5).unwrap(), 2);
/// ```
pub fn min_levels(m: &DiscreteMeasure, p: PNorm, eps: f64) -> Result<usize> {
    check_eps(eps)?;
    match p {
        PNorm::Finite(p) => {
            let max_k = saturation(m);
            let mut hi = 1;
            let table = loop {
                let table = DpTable::build(m, p, hi, DpStrategy::Auto)?;
                if table.report(hi)?.error <= eps {
                    break table;
                }
                if hi >= max_k {
                    return Err(Error::Unreachable { eps, max_k });
                }
                hi = (2 * hi).min(max_k);
            };
            let mut lo = hi / 2;
            // D_{p,lo} > eps (or lo = 0), D_{p,hi} <= eps
            while hi - lo > 1 {
                let mid = lo + (hi - lo) / 2;
                if table.report(mid)?.error <= eps {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            Ok(hi)
        }
        PNorm::Infinity => {
            let range = m.essential_range(0.0);
            let max_k = range.intervals().len();
            let fits = |k: usize| -> Result<bool> { Ok(solve_sup(&range, k)?.radius <= eps) };
            let mut hi = 1;
            while !fits(hi)? {
                if hi >= max_k {
                    return Err(Error::Unreachable { eps, max_k });
                }
                hi = (2 * hi).min(max_k);
            }
            let mut lo = hi / 2;
            while hi - lo > 1 {
                let mid = lo + (hi - lo) / 2;
                if fits(mid)? {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            Ok(hi)
        }
    }
}

/// Least `k` with `Var_{p,k}(Omega) <= eps`.
pub fn min_variation_levels(m: &DiscreteMeasure, p: f64, eps: f64) -> Result<usize> {
    check_eps(eps)?;
    let max_k = m.len();
    let mut hi = 1;
    let table = loop {
        let table = VariationTable::build(m, p, hi)?;
        if table.result(hi)?.value <= eps {
            break table;
        }
        if hi >= max_k {
            return Err(Error::Unreachable { eps, max_k });
        }
        hi = (2 * hi).min(max_k);
    };
    let mut lo = hi / 2;
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if table.result(mid)?.value <= eps {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// A finite family of functions, each given by its value distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionFamily {
    members: Vec<(String, DiscreteMeasure)>,
    description: String,
}

impl FunctionFamily {
    pub fn new(members: Vec<(String, DiscreteMeasure)>, description: impl Into<String>) -> Result<Self> {
        let Some((_, first)) = members.first() else {
            return Err(Error::EmptyFamily);
        };
        let flag = first.infinite_complement();
        if members.iter().any(|(_, m)| m.infinite_complement() != flag) {
            return Err(Error::MixedFamily);
        }
        Ok(Self {
            members,
            description: description.into(),
        })
    }

    pub fn members(&self) -> &[(String, DiscreteMeasure)] {
        &self.members
    }

    pub fn description(&self) -> &str {
        &self.description
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Union of two families (members of `self` first).
    pub fn union(&self, other: &FunctionFamily) -> Result<FunctionFamily> {
        let mut members = self.members.clone();
        members.extend(other.members.iter().cloned());
        FunctionFamily::new(members, format!("{} + {}", self.description, other.description))
    }
}

/// `N_{p,eps}` of a finite family: the largest [`min_levels`] of its members.
pub fn family_n(fam: &FunctionFamily, p: PNorm, eps: f64) -> Result<usize> {
    let ks: Vec<usize> = fam
        .members
        .par_iter()
        .map(|(_, m)| min_levels(m, p, eps))
        .collect::<Result<_>>()?;
    Ok(ks.into_iter().max().unwrap_or(0))
}

/// `r_{2 eps} <= N_{p,eps} <= r_eps + 1`, where `r_eps` is the least `k`
/// with every member's `Var_{p,k}(Omega) <= eps`.
#[derive(Debug, Clone, PartialEq)]
pub struct Sandwich {
    pub eps: f64,
    pub r_2eps: usize,
    pub n: usize,
    pub r_eps: usize,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FamilyDiagnostics {
    pub p: PNorm,
    /// `max_f D_{p,k}(f)` for `k = 1..=k_max`.
    pub sup_distance: Vec<f64>,
    /// `max_f Var_{p,k}(f, Omega)` for `k = 1..=k_max`; absent for `p = inf`
    /// and for infinite-complement families.
    pub sup_variation: Option<Vec<f64>>,
    /// `(eps, N_{p,eps})`.
    pub n_table: Vec<(f64, usize)>,
    /// `(eps, max_f covering number)`, `p = inf` only.
    pub covering_table: Option<Vec<(f64, usize)>>,
    pub sandwich: Vec<Sandwich>,
}

/// Decay curves and `N` tables of a family.
pub fn family_decay(fam: &FunctionFamily, p: PNorm, k_max: usize, eps: &[f64]) -> Result<FamilyDiagnostics> {
    if k_max == 0 {
        return Err(Error::InvalidLevelCount { k: 0, min: 1 });
    }
    for &e in eps {
        check_eps(e)?;
    }
    let infinite = fam.members[0].1.infinite_complement();
    let distance_rows: Vec<Vec<f64>> = fam
        .members
        .par_iter()
        .map(|(_, m)| distance_row(m, p, k_max))
        .collect::<Result<_>>()?;
    let sup_distance = column_max(&distance_rows, k_max);

    let with_variation = !infinite && !p.is_infinite();
    let sup_variation = match p {
        PNorm::Finite(p) if with_variation => {
            let rows: Vec<Vec<f64>> = fam
                .members
                .par_iter()
                .map(|(_, m)| {
                    let table = VariationTable::build(m, p, k_max)?;
                    (1..=k_max).map(|k| Ok(table.result(k)?.value)).collect()
                })
                .collect::<Result<_>>()?;
            Some(column_max(&rows, k_max))
        }
        _ => None,
    };

    let mut n_table = Vec::with_capacity(eps.len());
    let mut sandwich = Vec::new();
    for &e in eps {
        let n = family_n(fam, p, e)?;
        n_table.push((e, n));
        if let PNorm::Finite(p) = p {
            if with_variation {
                let r = |eps: f64| -> Result<usize> {
                    let ks: Vec<usize> = fam
                        .members
                        .par_iter()
                        .map(|(_, m)| min_variation_levels(m, p, eps))
                        .collect::<Result<_>>()?;
                    Ok(ks.into_iter().max().unwrap_or(0))
                };
                let (r_2eps, r_eps) = (r(2.0 * e)?, r(e)?);
                sandwich.push(Sandwich {
                    eps: e,
                    r_2eps,
                    n,
                    r_eps,
                    holds: r_2eps <= n && n <= r_eps + 1,
                });
            }
        }
    }
    let covering_table = if p.is_infinite() {
        let mut table = Vec::with_capacity(eps.len());
        for &e in eps {
            let mut worst = 0;
            for (_, m) in &fam.members {
                worst = worst.max(covering_number(&m.essential_range(0.0), e)?);
            }
            table.push((e, worst));
        }
        Some(table)
    } else {
        None
    };
    Ok(FamilyDiagnostics {
        p,
        sup_distance,
        sup_variation,
        n_table,
        covering_table,
        sandwich,
    })
}

fn distance_row(m: &DiscreteMeasure, p: PNorm, k_max: usize) -> Result<Vec<f64>> {
    match p {
        PNorm::Finite(p) => {
            let table = DpTable::build(m, p, k_max, DpStrategy::Auto)?;
            (1..=k_max).map(|k| Ok(table.report(k)?.error)).collect()
        }
        PNorm::Infinity => {
            let range = m.essential_range(0.0);
            (1..=k_max).map(|k| Ok(solve_sup(&range, k)?.radius)).collect()
        }
    }
}

fn column_max(rows: &[Vec<f64>], k_max: usize) -> Vec<f64> {
    (0..k_max)
        .map(|k| rows.iter().map(|r| r[k]).fold(0.0, f64::max))
        .collect()
}

/// A member of the family showing that the unit ball of `L^p` is not
/// uniformly approximable, with the lower bound on its relative error.
#[derive(Debug, Clone, PartialEq)]
pub struct AdversarialCase {
    /// Value distribution of `f_N = sum_j mu(A_j)^(-1/p) 1_{A_j}`, masses
    /// `r^(-2j)`, `j = 1..=N`.
    pub measure: DiscreteMeasure,
    pub theta: f64,
    /// `theta^p (N - 2 - 2k) / N` with `theta = 1 - r^(-1/p)`.
    pub lower_bound: f64,
    pub k: usize,
    pub p: f64,
}

impl AdversarialCase {
    /// `D_{p,k}(f_N)^p / ||f_N||_p^p` from the dynamic program.
    pub fn relative_error(&self) -> Result<f64> {
        let report = crate::quantizer::solve_dp(&self.measure, self.k, self.p)?;
        Ok(report.error_pow / self.measure.moment_p(self.p))
    }
}

/// Builds `f_N` for ratio `r >= 2`, `N > 2 + 2k` sets and exponent `p`.
///
/// ```
/// use kquant::ua::adversarial_ball_family;
/// let case = adversarial_ball_family(4, 20, 2, 1.0).unwrap();
/// assert!((case.lower_bound - 0.525).abs() < 1e-15);
/// assert!(case.relative_error().unwrap() >= case.lower_bound);
/// ```
pub fn adversarial_ball_family(r: u32, n_sets: usize, k: usize, p: f64) -> Result<AdversarialCase> {
    if r < 2 {
        return Err(Error::InvalidParameters(format!("ratio r = {r} must be at least 2")));
    }
    if n_sets <= 2 + 2 * k {
        return Err(Error::InvalidParameters(format!(
            "N = {n_sets} must exceed 2 + 2k = {}",
            2 + 2 * k
        )));
    }
    if k == 0 {
        return Err(Error::InvalidLevelCount { k, min: 1 });
    }
    crate::pmean::check_p(p)?;
    let r = f64::from(r);
    let (values, weights): (Vec<f64>, Vec<f64>) = (1..=n_sets)
        .map(|j| {
            let n_j = (2 * j) as f64;
            (r.powf(n_j / p), r.powf(-n_j))
        })
        .unzip();
    let measure = DiscreteMeasure::from_samples(&values, &weights)?;
    let theta = 1.0 - r.powf(-1.0 / p);
    let lower_bound = theta.powf(p) * (n_sets - 2 - 2 * k) as f64 / n_sets as f64;
    Ok(AdversarialCase {
        measure,
        theta,
        lower_bound,
        k,
        p,
    })
}

/// Covering of the `L^inf` unit ball's range `[-1, 1]` against the bound
/// `floor(2 / eps) + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinfBallAudit {
    pub eps: f64,
    pub bound: usize,
    pub covering: usize,
    pub holds: bool,
}

pub fn linf_ball_bound_audit(eps: f64) -> Result<LinfBallAudit> {
    check_eps(eps)?;
    let bound = (2.0 / eps).floor() as usize + 1;
    let covering = covering_number(&RangeSet::new(vec![(-1.0, 1.0)])?, eps)?;
    Ok(LinfBallAudit {
        eps,
        bound,
        covering,
        holds: covering <= bound,
    })
}
