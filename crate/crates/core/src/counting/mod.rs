//! Annihilator points inside deformed balls: exact enumeration, the
//! two-sided measure bounds, and the Property X scanner.

mod bounds;
mod enumerate;
mod property_x;

pub use bounds::counting_bounds;
pub use enumerate::{enumerate, CountResult, CountingBounds, MAX_CANDIDATES, MAX_STORED_POINTS};
pub use property_x::{property_x_scan, PropertyXOptions, PropertyXReport, PropertyXVerdict, ScanRow};
