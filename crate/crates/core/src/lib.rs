//! Best approximation of functions by simple functions with at most `k`
//! values in `L^p`, `1 <= p <= inf`, over discrete measures.
//!
//! A function enters through its value distribution, a
//! [`DiscreteMeasure`]. The [`quantizer`] module finds optimal step maps,
//! [`variation`] computes the k-th total p-variation and [`ua`] checks
//! uniform approximability of finite families.
//!
//! ```
//! use kquant::{DiscreteMeasure, quantizer::solve_dp};
//!
//! let m = DiscreteMeasure::from_samples(&[0.0, 0.1, 0.9, 1.0], &[1.0; 4]).unwrap();
//! let report = solve_dp(&m, 2, 2.0).unwrap();
//! assert_eq!(report.quantizer.levels().len(), 2);
//! ```

pub mod error;
pub mod measure;
pub mod pmean;
pub mod quantizer;
pub mod ua;
pub mod variation;

pub use error::{Error, Result};
pub use measure::{DiscreteMeasure, MeasureSummary, RangeSet};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/intro.md")]
    mod intro {}
    #[doc = include_str!("../../../book/src/measures.md")]
    mod measures {}
    #[doc = include_str!("../../../book/src/pmeans.md")]
    mod pmeans {}
    #[doc = include_str!("../../../book/src/quantizers.md")]
    mod quantizers {}
    #[doc = include_str!("../../../book/src/sup_norm.md")]
    mod sup_norm {}
    #[doc = include_str!("../../../book/src/variation.md")]
    mod variation {}
    #[doc = include_str!("../../../book/src/uniform_approximability.md")]
    mod uniform_approximability {}
}
