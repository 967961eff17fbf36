//! The p-variation
//!
//! ```text
//! var_p(f, A)^p = (1 / mu(A)) * sum_{i, j in A} w_i w_j |x_i - x_j|^p
//! ```
//!
//! and the k-th total p-variation `Var_{p,k}(f, Omega)`, the least value of
//! `(sum_j var_p(f, A_j)^p)^(1/p)` over partitions into at most `k` sets.
//! It is comparable to the best-approximation distance:
//! `D_{p,k} <= Var_{p,k} <= 2 D_{p,k}` and `D_{p,k+1} <= Var_{p,k}`.
//!
//! [`total_variation_k`] searches contiguous partitions of the sorted atoms
//! only; [`total_variation_bruteforce`] searches all set partitions of small
//! measures and is used to check that restriction.

use crate::error::{Error, Result};
use crate::measure::DiscreteMeasure;
use crate::pmean::{abs_pow, check_p, cost_slack};
use crate::quantizer::DpStrategy;
use crate::quantizer::DpTable;

/// Largest measure accepted by [`total_variation_bruteforce`].
pub const BRUTE_FORCE_MAX_ATOMS: usize = 12;
/// Additive tolerance of [`audit_inequalities`].
pub const AUDIT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VariationMethod {
    Dp,
    BruteForce,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VariationResult {
    /// `Var_{p,k}`.
    pub value: f64,
    /// `Var_{p,k}^p`.
    pub value_pow: f64,
    /// Atom index groups of an optimal partition, in increasing order of
    /// their smallest index.
    pub partition: Vec<Vec<usize>>,
    pub method: VariationMethod,
}

/// `var_p` of the atoms listed in `group`; 0 for an empty group.
///
/// ```
/// use kquant::{DiscreteMeasure, variation::var_p};
/// let m = DiscreteMeasure::from_samples(&[0.0, 1.0], &[1.0, 1.0]).unwrap();
/// assert_eq!(var_p(&m, &[0, 1], 2.0).unwrap(), 1.0);
/// ```
pub fn var_p(m: &DiscreteMeasure, group: &[usize], p: f64) -> Result<f64> {
    check_p(p)?;
    if let Some(&bad) = group.iter().find(|&&i| i >= m.len()) {
        return Err(Error::InvalidRange {
            lo: bad,
            hi: bad,
            len: m.len(),
        });
    }
    let xs: Vec<f64> = group.iter().map(|&i| m.atoms()[i]).collect();
    let ws: Vec<f64> = group.iter().map(|&i| m.weights()[i]).collect();
    Ok(slice_var_pow(&xs, &ws, p).powf(1.0 / p))
}

/// `var_p^p` of the given atoms.
fn slice_var_pow(xs: &[f64], ws: &[f64], p: f64) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let total: f64 = ws.iter().sum();
    if p == 2.0 {
        let c = xs.iter().zip(ws).map(|(x, w)| x * w).sum::<f64>() / total;
        let s2: f64 = xs.iter().zip(ws).map(|(x, w)| w * (x - c) * (x - c)).sum();
        // sum_ij w_i w_j (x_i - x_j)^2 = 2 (W S2 - S1^2) with S1 = 0 about the mean
        return 2.0 * s2;
    }
    let mut acc = 0.0;
    for i in 0..xs.len() {
        for j in i + 1..xs.len() {
            acc += ws[i] * ws[j] * abs_pow(xs[i] - xs[j], p);
        }
    }
    2.0 * acc / total
}

/// `Var_{p,k}` by dynamic programming over contiguous partitions.
///
/// ```
/// use kquant::{DiscreteMeasure, variation::total_variation_k};
/// let t = 1.0 / 3.0;
/// let m = DiscreteMeasure::from_samples(&[-1.0, 0.0, 1.0], &[t, t, t]).unwrap();
/// let v = total_variation_k(&m, 2, 2.0).unwrap();
/// assert!((v.value_pow - 1.0 / 3.0).abs() < 1e-15);
/// ```
pub fn total_variation_k(m: &DiscreteMeasure, k: usize, p: f64) -> Result<VariationResult> {
    VariationTable::build(m, p, k)?.result(k)
}

/// `Var_{p,k}` for `k = 1..=k_max`.
pub fn variation_curve(m: &DiscreteMeasure, p: f64, k_max: usize) -> Result<Vec<f64>> {
    let table = VariationTable::build(m, p, k_max)?;
    (1..=k_max).map(|k| Ok(table.result(k)?.value)).collect()
}

/// `best[t][lo]` is the least sum of `var_p^p` over partitions of atoms
/// `lo..n` into exactly `t` runs.
pub(crate) struct VariationTable {
    p: f64,
    k_max: usize,
    n: usize,
    best: Vec<Vec<f64>>,
    /// end (exclusive) of the first run of an optimal partition
    next: Vec<Vec<usize>>,
}

impl VariationTable {
    pub(crate) fn build(m: &DiscreteMeasure, p: f64, k_max: usize) -> Result<Self> {
        check_p(p)?;
        if k_max == 0 {
            return Err(Error::InvalidLevelCount { k: 0, min: 1 });
        }
        if m.infinite_complement() {
            return Err(Error::InfiniteMeasure);
        }
        let xs = m.atoms();
        let ws = m.weights();
        let n = xs.len();
        let layers = k_max.min(n);
        let mut best = vec![vec![f64::INFINITY; n + 1]; layers + 1];
        let mut next = vec![vec![n; n + 1]; layers + 1];
        best[0][n] = 0.0;

        let mut wsum = vec![0.0; n + 1];
        for i in 0..n {
            wsum[i + 1] = wsum[i] + ws[i];
        }
        // p = 2: prefix moments about the global mean
        let centre = xs.iter().zip(ws).map(|(x, w)| x * w).sum::<f64>() / wsum[n];
        let mut s1 = vec![0.0; n + 1];
        let mut s2 = vec![0.0; n + 1];
        for i in 0..n {
            let y = xs[i] - centre;
            s1[i + 1] = s1[i] + ws[i] * y;
            s2[i + 1] = s2[i] + ws[i] * y * y;
        }
        // pair[hi] = sum_{i, j in lo..=hi} w_i w_j |x_i - x_j|^p for the current lo
        let mut pair = vec![0.0; n];
        for lo in (0..n).rev() {
            if p != 2.0 {
                let mut row = 0.0;
                for hi in lo + 1..n {
                    row += ws[hi] * abs_pow(xs[hi] - xs[lo], p);
                    pair[hi] += 2.0 * ws[lo] * row;
                }
            }
            for hi in lo..n {
                let w = wsum[hi + 1] - wsum[lo];
                let cost = if hi == lo {
                    0.0
                } else if p == 2.0 {
                    let a = s1[hi + 1] - s1[lo];
                    let b = s2[hi + 1] - s2[lo];
                    (2.0 * (w * b - a * a) / w).max(0.0)
                } else {
                    pair[hi] / w
                };
                for t in 1..=layers {
                    let rest = best[t - 1][hi + 1];
                    if rest.is_finite() && cost + rest < best[t][lo] {
                        best[t][lo] = cost + rest;
                        next[t][lo] = hi + 1;
                    }
                }
            }
        }
        Ok(Self {
            p,
            k_max,
            n,
            best,
            next,
        })
    }

    pub(crate) fn result(&self, k: usize) -> Result<VariationResult> {
        if k == 0 || k > self.k_max {
            return Err(Error::InvalidLevelCount { k, min: 1 });
        }
        let mut t_best = 1;
        for t in 2..=k.min(self.n) {
            if self.best[t][0] < self.best[t_best][0] {
                t_best = t;
            }
        }
        let value_pow = self.best[t_best][0];
        let mut partition = Vec::with_capacity(t_best);
        let mut lo = 0;
        for t in (1..=t_best).rev() {
            let end = self.next[t][lo];
            partition.push((lo..end).collect());
            lo = end;
        }
        Ok(VariationResult {
            value: value_pow.powf(1.0 / self.p),
            value_pow,
            partition,
            method: VariationMethod::Dp,
        })
    }
}

/// `Var_{p,k}` over all set partitions (not only contiguous ones), for at
/// most [`BRUTE_FORCE_MAX_ATOMS`] atoms.
pub fn total_variation_bruteforce(m: &DiscreteMeasure, k: usize, p: f64) -> Result<VariationResult> {
    check_p(p)?;
    if k == 0 {
        return Err(Error::InvalidLevelCount { k, min: 1 });
    }
    if m.infinite_complement() {
        return Err(Error::InfiniteMeasure);
    }
    let n = m.len();
    if n > BRUTE_FORCE_MAX_ATOMS {
        return Err(Error::TooManyAtoms {
            n,
            max: BRUTE_FORCE_MAX_ATOMS,
        });
    }
    let full = (1usize << n) - 1;
    let cost: Vec<f64> = (0..=full)
        .map(|mask| {
            let (xs, ws): (Vec<f64>, Vec<f64>) = (0..n)
                .filter(|i| mask >> i & 1 == 1)
                .map(|i| (m.atoms()[i], m.weights()[i]))
                .unzip();
            slice_var_pow(&xs, &ws, p)
        })
        .collect();
    let layers = k.min(n);
    // best[t][mask]: mask split into exactly t non-empty groups
    let mut best = vec![vec![f64::INFINITY; full + 1]; layers + 1];
    let mut choice = vec![vec![0usize; full + 1]; layers + 1];
    best[0][0] = 0.0;
    for t in 1..=layers {
        for mask in 1..=full {
            let low = mask & mask.wrapping_neg();
            let rest_bits = mask ^ low;
            // groups containing the lowest set bit
            let mut sub = rest_bits;
            loop {
                let group = sub | low;
                let rest = best[t - 1][mask ^ group];
                if rest.is_finite() {
                    let v = cost[group] + rest;
                    if v < best[t][mask] {
                        best[t][mask] = v;
                        choice[t][mask] = group;
                    }
                }
                if sub == 0 {
                    break;
                }
                sub = (sub - 1) & rest_bits;
            }
        }
    }
    let mut t_best = 1;
    for t in 2..=layers {
        if best[t][full] < best[t_best][full] {
            t_best = t;
        }
    }
    let value_pow = best[t_best][full];
    let mut partition = Vec::new();
    let mut mask = full;
    for t in (1..=t_best).rev() {
        let group = choice[t][mask];
        partition.push((0..n).filter(|i| group >> i & 1 == 1).collect());
        mask ^= group;
    }
    partition.sort();
    Ok(VariationResult {
        value: value_pow.powf(1.0 / p),
        value_pow,
        partition,
        method: VariationMethod::BruteForce,
    })
}

/// The comparison `D_{p,k} <= Var_{p,k} <= 2 D_{p,k}`, `D_{p,k+1} <= Var_{p,k}`
/// checked with additive tolerance [`AUDIT_TOL`].
#[derive(Debug, Clone, PartialEq)]
pub struct InequalityAudit {
    pub k: usize,
    pub p: f64,
    pub d_k: f64,
    pub d_next: f64,
    pub var_k: f64,
    pub lower_holds: bool,
    pub upper_holds: bool,
    pub next_holds: bool,
}

impl InequalityAudit {
    pub fn passed(&self) -> bool {
        self.lower_holds && self.upper_holds && self.next_holds
    }
}

pub fn audit_inequalities(m: &DiscreteMeasure, k: usize, p: f64) -> Result<InequalityAudit> {
    if m.infinite_complement() {
        return Err(Error::InfiniteMeasure);
    }
    let var_k = total_variation_k(m, k, p)?.value;
    let table = DpTable::build(m, p, k + 1, DpStrategy::Auto)?;
    let d_k = table.report(k)?.error;
    let d_next = table.report(k + 1)?.error;
    Ok(InequalityAudit {
        k,
        p,
        d_k,
        d_next,
        var_k,
        lower_holds: d_k <= var_k + AUDIT_TOL,
        upper_holds: var_k <= 2.0 * d_k + AUDIT_TOL,
        next_holds: d_next <= var_k + AUDIT_TOL,
    })
}

/// True when the contiguous and unrestricted optima agree within
/// [`cost_slack`].
pub fn contiguity_holds(m: &DiscreteMeasure, k: usize, p: f64) -> Result<bool> {
    let dp = total_variation_k(m, k, p)?;
    let brute = total_variation_bruteforce(m, k, p)?;
    Ok(dp.value_pow <= brute.value_pow + cost_slack(brute.value_pow))
}
