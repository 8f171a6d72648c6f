use super::functional::{frame_functional_with, FrameOptions};
use super::probe::{frame_bound_probe, ProbeBounds};
use super::test_function::{make_test_function, AdmissibleRegion};
use crate::automorphisms::{AutomorphismFamily, LevelSet};
use crate::calderon::{calderon_box_integral, calderon_sum, CalderonOptions, Weighting};
use crate::counting::{property_x_scan, PropertyXOptions};
use crate::error::{invalid, Result};
use crate::metric_lattice::Lattice;
use crate::profile::FrequencyProfile;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Slack allowed in the remainder inequality `A ≤ avg + R_M`.
pub const REMAINDER_TOL: f64 = 5e-6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportOptions {
    /// Grid points within this distance of the identity are rejected.
    pub exclusion: f64,
    /// Ball radius for the remainder checks.
    pub eps: f64,
    pub property_x: PropertyXOptions,
    pub frame: FrameOptions,
    /// Unit-norm profiles for the empirical frame bounds.
    pub probe: Option<Vec<FrequencyProfile>>,
}

impl Default for ReportOptions {
    fn default() -> Self {
        ReportOptions {
            exclusion: 1e-3,
            eps: 0.01,
            property_x: PropertyXOptions::default(),
            frame: FrameOptions::default(),
            probe: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointVerdict {
    pub xi: Vec<f64>,
    pub value: f64,
    pub tol: f64,
    pub lower_ok: bool,
    pub upper_ok: bool,
    pub certified: bool,
    pub divergent: bool,
}

impl PointVerdict {
    pub fn pass(&self) -> bool {
        self.lower_ok && self.upper_ok
    }
}

/// The decomposition `A ≤ avg_B C_ψ + R_M` at one center.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RemainderCheck {
    pub center: Vec<f64>,
    pub eps: f64,
    pub m: f64,
    pub ball_average: f64,
    /// `∫_B Σ_{L(h) > M} m(h) δ(h) |ψ̂(α̂_h ξ)|² dξ / ν(B)`.
    pub tail_average: f64,
    /// Property-X constant at radius `2ε`; absent when the scan has no
    /// members above `M`.
    pub c: Option<f64>,
    pub property_x_holds: Option<bool>,
    pub r_m: f64,
    /// `I(f)` for the test function at this center, when computable.
    pub functional: Option<f64>,
    /// `None` when `R_M` could not be formed.
    pub pass: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrameReport {
    pub a: f64,
    pub b: f64,
    pub m: f64,
    pub exclusion: f64,
    pub verdicts: Vec<PointVerdict>,
    pub min: f64,
    pub max: f64,
    pub probe: Option<ProbeBounds>,
    pub remainder: Vec<RemainderCheck>,
    pub note: String,
}

impl FrameReport {
    pub fn failures(&self) -> usize {
        self.verdicts.iter().filter(|v| !v.pass()).count()
    }

    pub fn upper_failures(&self) -> usize {
        self.verdicts.iter().filter(|v| !v.upper_ok).count()
    }

    pub fn lower_failures(&self) -> usize {
        self.verdicts.iter().filter(|v| !v.lower_ok).count()
    }

    pub fn all_pass(&self) -> bool {
        self.failures() == 0 && self.remainder.iter().all(|r| r.pass != Some(false))
    }
}

/// Checks `A ≤ C_ψ(ξ) ≤ B` on a grid and the remainder decomposition at
/// three grid points.
#[allow(clippy::too_many_arguments)]
pub fn calderon_inequality_report(
    psi: &FrequencyProfile,
    family: &AutomorphismFamily,
    lattice: &Lattice,
    grid: &[Vec<f64>],
    a: f64,
    b: f64,
    m: f64,
    opts: &ReportOptions,
) -> Result<FrameReport> {
    if grid.is_empty() {
        return invalid("empty ξ grid");
    }
    if !(a >= 0.0 && a <= b) {
        return invalid(format!("frame bounds need 0 ≤ A ≤ B, got A = {a}, B = {b}"));
    }
    if !(m > 0.0) {
        return invalid("M must be positive");
    }
    let metric = &family.metric;
    for xi in grid {
        metric.check_point(xi)?;
        if metric.norm(xi) <= opts.exclusion {
            return invalid(format!(
                "grid point {xi:?} lies within the exclusion radius {}",
                opts.exclusion
            ));
        }
    }

    let verdicts: Vec<PointVerdict> = grid
        .par_iter()
        .map(|xi| {
            let c = calderon_sum(psi, family, xi)?;
            let value = if c.divergent { f64::INFINITY } else { c.value };
            let tol = 1e-9 + c.tail_estimate;
            Ok(PointVerdict {
                xi: xi.clone(),
                value,
                tol,
                lower_ok: value >= a - tol,
                upper_ok: value <= b + tol,
                certified: c.certified,
                divergent: c.divergent,
            })
        })
        .collect::<Result<_>>()?;
    let min = verdicts.iter().map(|v| v.value).fold(f64::INFINITY, f64::min);
    let max = verdicts.iter().map(|v| v.value).fold(f64::NEG_INFINITY, f64::max);

    let n = grid.len();
    let mut picks = vec![n / 4, n / 2, (3 * n) / 4];
    picks.dedup();
    let remainder = picks
        .into_iter()
        .map(|i| remainder_check(psi, family, lattice, &grid[i], a, m, opts))
        .collect::<Result<Vec<_>>>()?;

    let probe = match &opts.probe {
        Some(ens) => Some(frame_bound_probe(psi, family, lattice, ens, &opts.frame)?),
        None => None,
    };

    Ok(FrameReport {
        a,
        b,
        m,
        exclusion: opts.exclusion,
        verdicts,
        min,
        max,
        probe,
        remainder,
        note: format!(
            "almost-everywhere claims are checked at every grid point outside radius {} of the identity; \
             probe bounds are inner estimates from a finite ensemble",
            opts.exclusion
        ),
    })
}

fn remainder_check(
    psi: &FrequencyProfile,
    family: &AutomorphismFamily,
    lattice: &Lattice,
    center: &[f64],
    a: f64,
    m: f64,
    opts: &ReportOptions,
) -> Result<RemainderCheck> {
    let metric = &family.metric;
    let region = AdmissibleRegion::for_metric(metric);
    let tf = make_test_function(center, opts.eps, metric, region)?;
    let (lo, hi) = tf.base_box();
    let nu = tf.measure();
    let copts = CalderonOptions::default();
    let avg = calderon_box_integral(psi, family, &lo, &hi, LevelSet::All, Weighting::Plain, &copts)?.value / nu;
    let tail = calderon_box_integral(
        psi,
        family,
        &lo,
        &hi,
        LevelSet::Above { m },
        Weighting::Jacobian,
        &copts,
    )?
    .value
        / nu;
    let scan = property_x_scan(family, lattice, metric, 2.0 * opts.eps, m, &opts.property_x).ok();
    let c = scan.as_ref().map(|s| s.c_estimate);
    let r_m = match c {
        _ if tail == 0.0 => 0.0,
        Some(c) => c * tail,
        None => f64::NAN,
    };
    let functional = frame_functional_with(psi, family, lattice, &tf.profile, LevelSet::All, &opts.frame)
        .ok()
        .map(|f| f.value);
    Ok(RemainderCheck {
        center: center.to_vec(),
        eps: opts.eps,
        m,
        ball_average: avg,
        tail_average: tail,
        c,
        property_x_holds: scan.map(|s| s.holds()),
        r_m,
        functional,
        pass: r_m.is_finite().then_some(a <= avg + r_m + REMAINDER_TOL),
    })
}

/// `n` evenly spaced points on each of `[lo, hi]` and `[-hi, -lo]`.
pub fn symmetric_line_grid(lo: f64, hi: f64, n_per_side: usize) -> Vec<Vec<f64>> {
    let step = if n_per_side > 1 {
        (hi - lo) / (n_per_side - 1) as f64
    } else {
        0.0
    };
    let side: Vec<f64> = (0..n_per_side).map(|i| lo + step * i as f64).collect();
    side.iter()
        .rev()
        .map(|x| vec![-x])
        .chain(side.iter().map(|x| vec![*x]))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automorphisms::{Generator, IndexSet, Weight};
    use crate::linalg::Matrix;
    use crate::metric_lattice::MetricSpace;

    fn shannon() -> FrequencyProfile {
        FrequencyProfile::intervals(&[(-1.0, -0.5), (0.5, 1.0)], 1.0).unwrap()
    }

    fn dyadic() -> AutomorphismFamily {
        AutomorphismFamily::matrix_powers(Matrix::diag(&[2.0]), None, None, MetricSpace::l2(1)).unwrap()
    }

    #[test]
    fn shannon_passes() {
        let grid = symmetric_line_grid(0.01, 2.0, 200);
        assert_eq!(grid.len(), 400);
        let r = calderon_inequality_report(
            &shannon(),
            &dyadic(),
            &Lattice::integer(1),
            &grid,
            1.0,
            1.0,
            2.0,
            &Default::default(),
        )
        .unwrap();
        assert!(r.all_pass(), "{:?}", r.remainder);
        assert_eq!((r.min, r.max), (1.0, 1.0));
        assert_eq!(r.remainder.len(), 3);
    }

    #[test]
    fn scaled_shannon_fails_above() {
        let grid = symmetric_line_grid(0.01, 2.0, 200);
        let psi = shannon().scaled(2f64.sqrt());
        let r = calderon_inequality_report(
            &psi,
            &dyadic(),
            &Lattice::integer(1),
            &grid,
            1.0,
            1.0,
            2.0,
            &Default::default(),
        )
        .unwrap();
        assert_eq!(r.upper_failures(), 400);
        assert_eq!(r.lower_failures(), 0);
        assert!(r.verdicts.iter().all(|v| (v.value - 2.0).abs() < 1e-12));
    }

    #[test]
    fn gabor_passes() {
        let g = FrequencyProfile::intervals(&[(0.0, 1.0)], 1.0)
            .unwrap()
            .on_gabor_line(1)
            .unwrap();
        let fam = AutomorphismFamily::new(
            Generator::GaborShift { spacing: 1.0 },
            IndexSet::Integers { min: None, max: None },
            Weight::constant(1.0),
            MetricSpace::gabor(),
        )
        .unwrap();
        let grid: Vec<Vec<f64>> = (0..200)
            .map(|i| vec![-5.0 + 10.0 * (i as f64 + 0.5) / 200.0, 1.0])
            .collect();
        let r = calderon_inequality_report(
            &g,
            &fam,
            &Lattice::gabor(1.0).unwrap(),
            &grid,
            1.0,
            1.0,
            2.0,
            &Default::default(),
        )
        .unwrap();
        assert!(r.all_pass(), "{:?}", r.remainder);
    }

    #[test]
    fn exclusion_radius() {
        let grid = vec![vec![0.5], vec![1e-4]];
        let e = calderon_inequality_report(
            &shannon(),
            &dyadic(),
            &Lattice::integer(1),
            &grid,
            1.0,
            1.0,
            2.0,
            &Default::default(),
        );
        assert!(e.is_err());
    }
}
