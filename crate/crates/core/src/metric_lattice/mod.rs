//! Frequency-group geometry: invariant metrics and balls, full-rank
//! lattices with their fundamental domains, periodization and the overlap
//! neighbourhoods used by the counting bounds.

mod lattice;
mod metric;
mod overlap;
mod periodize;

pub use lattice::{for_each_index, range_count, Lattice};
pub use metric::{unit_ball_volume, Ball, MetricSpace};
pub(crate) use overlap::check_setting;
pub use overlap::overlap_measure;
pub use periodize::{periodize, weil_residual, weil_residual_with, Periodized, WeilResidual};
