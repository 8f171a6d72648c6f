use super::enumerate::{enumerate, CountResult, CountingBounds};
use crate::automorphisms::Automorphism;
use crate::error::{Error, Result};
use crate::metric_lattice::{overlap_measure, Lattice, MetricSpace};
use crate::monte_carlo::{McConfig, Measured};

/// Count at `r` with the two-sided bounds
/// `count(r) ≤ ν(α̂B(e,2r))/ν(Ω^r)` and `count(2r) ≥ ν(α̂B(e,r))/ν(Ω^r)`.
pub fn counting_bounds(
    lattice: &Lattice,
    alpha: &Automorphism,
    r: f64,
    metric: &MetricSpace,
    mc: &McConfig,
) -> Result<CountResult> {
    let mut at_r = enumerate(lattice, alpha, r, metric)?;
    let at_2r = enumerate(lattice, alpha, 2.0 * r, metric)?;
    let delta = alpha.jacobian();
    let image_r = delta * metric.ball_measure(r)?;
    let image_2r = delta * metric.ball_measure(2.0 * r)?;
    let omega_r = overlap_measure(lattice, metric, alpha, r, mc)?;
    let omega_half_r = overlap_measure(lattice, metric, alpha, 0.5 * r, mc)?;
    if omega_r.value == 0.0 || omega_r.value <= 3.0 * omega_r.stderr {
        return Err(Error::DegenerateDomain {
            estimate: omega_r.value,
            stderr: omega_r.stderr,
        });
    }
    let ratio = |x: f64| Measured {
        value: x / omega_r.value,
        stderr: x * omega_r.stderr / (omega_r.value * omega_r.value),
    };
    let upper = ratio(image_2r);
    let lower = ratio(image_r);
    let sandwich_holds = (at_r.count as f64) <= upper.value + 3.0 * upper.stderr
        && (at_2r.count as f64) >= lower.value - 3.0 * lower.stderr;
    at_r.bounds = Some(CountingBounds {
        upper_bound: upper,
        lower_bound_at_2r: lower,
        count_at_2r: at_2r.count,
        image_measure_r: image_r,
        image_measure_2r: image_2r,
        omega_half_r,
        omega_r,
        sandwich_holds,
    });
    Ok(at_r)
}
