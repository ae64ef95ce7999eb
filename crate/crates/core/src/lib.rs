//! Minimal rational interpolation (MRI) of vector-valued parametric maps.
//!
//! Given snapshots `u(μ_j)` of a map `μ ↦ u(μ)` with values in a finite-dimensional
//! Hilbert space, this crate builds the rational surrogate `I(uQ)/Q` whose denominator
//! `Q` of degree `N` minimizes the norm of the leading interpolation coefficient of
//! `uQ`. The roots of `Q` approximate the resonances (poles) of the map.
//!
//! The crate is `no_std` (it needs `alloc`). File formats, the experiment runner and
//! the command line live in the `mri-cli` companion crate.
//!
//! Module map:
//! - [`sampling`]: parameter regions, capacity, Green's potential, sample nodes.
//! - [`polybasis`]: orthonormal polynomial bases for the denominator, root finding.
//! - [`snapshots`]: inner products and orthonormalization of snapshots.
//! - [`rational`]: the interpolant itself.
//! - [`estimators`]: a posteriori residuals and the greedy sampling loop.
//! - [`testbeds`]: synthetic full-order models and the POD baseline.
#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

mod error;
pub mod estimators;
pub mod linalg;
pub mod polybasis;
pub mod rational;
pub mod sampling;
pub mod snapshots;
pub mod testbeds;

pub use error::{Error, Result};
pub use estimators::{AffineOperator, CalibratedEstimator, LinearEstimator, Residual};
pub use linalg::{CMat, CVec, C64};
pub use polybasis::{BasisKind, PolyBasis, PolyCoeffs, Roots};
pub use rational::{DegreePolicy, EvalStatus, Evaluation, MriConfig, RationalInterpolant};
pub use sampling::{Provenance, Region, SampleSet};
pub use snapshots::{InnerProduct, SnapshotBasis};

pub(crate) mod prelude {
    pub(crate) use crate::error::{Error, Result};
    pub(crate) use crate::linalg::{CMat, CVec, C64};
    pub(crate) use alloc::vec;
    pub(crate) use alloc::vec::Vec;
    #[allow(unused_imports)]
    pub(crate) use num_traits::Float;
}
