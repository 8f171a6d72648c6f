//! The Fourier-domain frame functional and the localized test functions
//! used to read off Calderón bounds from frame bounds.

mod functional;
mod probe;
mod report;
mod test_function;

pub use functional::{frame_functional, frame_functional_with, member_term, FrameFunctional, FrameOptions};
pub use probe::{frame_bound_probe, random_ensemble, EnsembleOptions, ProbeBounds};
pub use report::{
    calderon_inequality_report, symmetric_line_grid, FrameReport, PointVerdict, RemainderCheck, ReportOptions,
    REMAINDER_TOL,
};
pub use test_function::{
    make_test_function, members_above_threshold, single_term_threshold, single_term_value, AdmissibleRegion,
    TestFunction,
};
