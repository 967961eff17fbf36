//! Discrete distributions of function values.
//!
//! Approximating `f` by a simple function only depends on the distribution
//! of its values, so every solver in this crate works on a [`DiscreteMeasure`]:
//! sorted distinct atoms `x_1 < ... < x_n` carrying positive masses. A measure
//! may additionally carry an *infinite complement*, an unbounded region where
//! the function vanishes; approximants must then use the value `0`.

use std::io::{Read, Write};

use crate::error::{Error, Result};

/// Sorted weighted atoms on the real line.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMeasure {
    atoms: Vec<f64>,
    weights: Vec<f64>,
    infinite_complement: bool,
}

/// Basic statistics reported alongside solver output.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasureSummary {
    pub n: usize,
    pub total_mass: f64,
    pub min: f64,
    pub max: f64,
}

impl DiscreteMeasure {
    /// Builds a measure from unsorted samples, merging exactly equal values.
    ///
    /// ```
    /// use kquant::DiscreteMeasure;
    /// let m = DiscreteMeasure::from_samples(&[1.0, 0.0, 1.0], &[1.0, 2.0, 3.0]).unwrap();
    /// assert_eq!(m.atoms(), &[0.0, 1.0]);
    /// assert_eq!(m.weights(), &[2.0, 4.0]);
    /// ```
    pub fn from_samples(values: &[f64], weights: &[f64]) -> Result<Self> {
        if values.len() != weights.len() {
            return Err(Error::LengthMismatch {
                values: values.len(),
                weights: weights.len(),
            });
        }
        if values.is_empty() {
            return Err(Error::Empty);
        }
        for (index, (&value, &weight)) in values.iter().zip(weights).enumerate() {
            if !value.is_finite() {
                return Err(Error::NonFiniteValue { index, value });
            }
            if !(weight.is_finite() && weight > 0.0) {
                return Err(Error::NonPositiveWeight { index, weight });
            }
        }

        let mut pairs: Vec<(f64, f64)> = values.iter().copied().zip(weights.iter().copied()).collect();
        // Stable sort keeps the summation order of duplicates deterministic.
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));

        let mut atoms: Vec<f64> = Vec::with_capacity(pairs.len());
        let mut masses: Vec<f64> = Vec::with_capacity(pairs.len());
        for (x, w) in pairs {
            // -0.0 and 0.0 are the same atom.
            let x = if x == 0.0 { 0.0 } else { x };
            match atoms.last() {
                Some(&last) if last == x => *masses.last_mut().unwrap() += w,
                _ => {
                    atoms.push(x);
                    masses.push(w);
                }
            }
        }
        let total: f64 = masses.iter().sum();
        if !total.is_finite() {
            return Err(Error::NonPositiveWeight {
                index: 0,
                weight: total,
            });
        }
        Ok(Self {
            atoms,
            weights: masses,
            infinite_complement: false,
        })
    }

    /// Distribution of `fvals` under a quadrature rule with the given weights.
    ///
    /// `xs` are the sample locations; they only need to match in length, the
    /// measure itself depends on the function values alone.
    pub fn pushforward(xs: &[f64], fvals: &[f64], quadrature_weights: &[f64]) -> Result<Self> {
        if xs.len() != fvals.len() {
            return Err(Error::LengthMismatch {
                values: fvals.len(),
                weights: xs.len(),
            });
        }
        Self::from_samples(fvals, quadrature_weights)
    }

    /// Midpoint-rule discretization of a distribution given by its quantile
    /// function: atoms at `quantile((2i - 1) / 2n)`, each of mass `1 / n`.
    ///
    /// ```
    /// use kquant::DiscreteMeasure;
    /// let m = DiscreteMeasure::discretize_quantile(|u| u, 4).unwrap();
    /// assert_eq!(m.atoms(), &[0.125, 0.375, 0.625, 0.875]);
    /// ```
    pub fn discretize_quantile<F>(quantile: F, n: usize) -> Result<Self>
    where
        F: Fn(f64) -> f64,
    {
        if n == 0 {
            return Err(Error::Empty);
        }
        let mass = 1.0 / n as f64;
        let mut values = Vec::with_capacity(n);
        let mut prev: Option<(f64, f64)> = None;
        for i in 1..=n {
            let u = (2 * i - 1) as f64 / (2 * n) as f64;
            let q = quantile(u);
            if !q.is_finite() {
                return Err(Error::NonFiniteValue { index: i - 1, value: q });
            }
            if let Some((pu, pq)) = prev {
                if q < pq {
                    return Err(Error::NonMonotoneQuantile {
                        at_lo: pu,
                        lo: pq,
                        at_hi: u,
                        hi: q,
                    });
                }
            }
            prev = Some((u, q));
            values.push(q);
        }
        Self::from_samples(&values, &vec![mass; n])
    }

    /// Marks this measure as living on a space with an infinite-mass region
    /// where the function is zero.
    pub fn with_infinite_complement(mut self, flag: bool) -> Self {
        self.infinite_complement = flag;
        self
    }

    pub fn atoms(&self) -> &[f64] {
        &self.atoms
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn infinite_complement(&self) -> bool {
        self.infinite_complement
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    /// Always false for a constructed measure; provided for API symmetry.
    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn total_mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn min(&self) -> f64 {
        self.atoms[0]
    }

    pub fn max(&self) -> f64 {
        self.atoms[self.atoms.len() - 1]
    }

    pub fn summary(&self) -> MeasureSummary {
        MeasureSummary {
            n: self.len(),
            total_mass: self.total_mass(),
            min: self.min(),
            max: self.max(),
        }
    }

    /// `sum_i w_i |x_i|^p`, the p-th power of the L^p norm of the function.
    pub fn moment_p(&self, p: f64) -> f64 {
        self.atoms
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * crate::pmean::abs_pow(x, p))
            .sum()
    }

    /// Applies `x -> scale * x + shift` to every atom.
    pub fn affine(&self, scale: f64, shift: f64) -> Result<Self> {
        let values: Vec<f64> = self.atoms.iter().map(|&x| scale * x + shift).collect();
        Ok(Self::from_samples(&values, &self.weights)?.with_infinite_complement(self.infinite_complement))
    }

    /// Essential range as a union of closed intervals. Consecutive atoms whose
    /// gap is at most `merge_tol` are fused into one interval.
    ///
    /// ```
    /// use kquant::DiscreteMeasure;
    /// let m = DiscreteMeasure::from_samples(&[0.0, 0.001, 1.0], &[1.0; 3]).unwrap();
    /// let r = m.essential_range(0.01);
    /// assert_eq!(r.intervals(), &[(0.0, 0.001), (1.0, 1.0)]);
    /// ```
    pub fn essential_range(&self, merge_tol: f64) -> RangeSet {
        let mut intervals: Vec<(f64, f64)> = Vec::new();
        for &x in &self.atoms {
            match intervals.last_mut() {
                Some(last) if x - last.1 <= merge_tol => last.1 = x,
                _ => intervals.push((x, x)),
            }
        }
        // The infinite complement is where f = 0, so 0 is in the essential range.
        if self.infinite_complement {
            intervals.push((0.0, 0.0));
            return RangeSet::new(intervals).expect("non-empty");
        }
        RangeSet { intervals }
    }

    /// Reads the `value,weight` CSV format. The header line `value,weight` is
    /// optional, as is the weight column (defaults to 1).
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(true)
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .from_reader(reader);
        let mut values = Vec::new();
        let mut weights = Vec::new();
        for (line, record) in rdr.records().enumerate() {
            let record = record.map_err(|e| Error::Csv(e.to_string()))?;
            if record.iter().all(|f| f.is_empty()) {
                continue;
            }
            let first = record.get(0).unwrap_or("");
            if line == 0 && first.eq_ignore_ascii_case("value") {
                continue;
            }
            if record.len() > 2 {
                return Err(Error::Csv(format!(
                    "line {}: expected `value[,weight]`, got {} fields",
                    line + 1,
                    record.len()
                )));
            }
            let value: f64 = first
                .parse()
                .map_err(|_| Error::Csv(format!("line {}: bad value {first:?}", line + 1)))?;
            let weight: f64 = match record.get(1) {
                Some(s) if !s.is_empty() => s
                    .parse()
                    .map_err(|_| Error::Csv(format!("line {}: bad weight {s:?}", line + 1)))?,
                _ => 1.0,
            };
            values.push(value);
            weights.push(weight);
        }
        Self::from_samples(&values, &weights)
    }

    /// Writes the measure in the same CSV format [`read_csv`](Self::read_csv) accepts.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "value,weight")?;
        for (x, w) in self.atoms.iter().zip(&self.weights) {
            writeln!(out, "{x:?},{w:?}")?;
        }
        Ok(())
    }
}

/// Finite union of disjoint closed intervals, sorted and separated by gaps.
#[derive(Debug, Clone, PartialEq)]
pub struct RangeSet {
    intervals: Vec<(f64, f64)>,
}

impl RangeSet {
    /// Normalizes arbitrary closed intervals: sorts them and merges any that
    /// overlap or touch.
    pub fn new(mut intervals: Vec<(f64, f64)>) -> Result<Self> {
        if intervals.is_empty() {
            return Err(Error::Empty);
        }
        for (index, &(l, u)) in intervals.iter().enumerate() {
            if !l.is_finite() {
                return Err(Error::NonFiniteValue { index, value: l });
            }
            if !u.is_finite() {
                return Err(Error::NonFiniteValue { index, value: u });
            }
            if l > u {
                return Err(Error::InvalidParameters(format!(
                    "interval {index} has lower end {l} above upper end {u}"
                )));
            }
        }
        intervals.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(intervals.len());
        for (l, u) in intervals {
            match merged.last_mut() {
                Some(last) if l <= last.1 => last.1 = last.1.max(u),
                _ => merged.push((l, u)),
            }
        }
        Ok(Self { intervals: merged })
    }

    pub fn points(points: &[f64]) -> Result<Self> {
        Self::new(points.iter().map(|&x| (x, x)).collect())
    }

    pub fn intervals(&self) -> &[(f64, f64)] {
        &self.intervals
    }

    pub fn lower(&self) -> f64 {
        self.intervals[0].0
    }

    pub fn upper(&self) -> f64 {
        self.intervals[self.intervals.len() - 1].1
    }

    /// True when every interval is a single point.
    pub fn is_discrete(&self) -> bool {
        self.intervals.iter().all(|&(l, u)| l == u)
    }
}
