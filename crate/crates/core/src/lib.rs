//! Numerical toolkit for affine frames on ℝⁿ (with full-rank lattices) and
//! on the Gabor group ℝ × ℤ.
//!
//! Everything is computed on the frequency side: Calderón sums and their
//! tails, lattice-point counts in deformed balls with two-sided bounds,
//! bi-Lipschitz constants and expansiveness of automorphism families, and
//! the Fourier-domain frame functional evaluated on localized test
//! functions.

// `!(x > 0.0)` is used on purpose so that NaN inputs are rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// Small dense matrix code reads best with explicit indices.
#![allow(clippy::needless_range_loop)]

pub mod automorphisms;
pub mod calderon;
pub mod counting;
pub mod error;
pub mod frame_functional;
pub mod linalg;
pub mod metric_lattice;
pub mod monte_carlo;
pub mod profile;
pub mod quadrature;

pub use error::{Error, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
