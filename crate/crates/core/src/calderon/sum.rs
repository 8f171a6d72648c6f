use super::engine::{
    gabor_range, is_gabor, is_infinite, matrix_power_range, sum_integer, CalderonOptions, Radii, Summed, Truncation,
    Weighting,
};
use super::geometry::{ray_interval, union_norm_range};
use crate::automorphisms::{
    lipschitz_constants, Automorphism, AutomorphismFamily, Generator, IndexSet, LevelSet, Weight,
};
use crate::error::{check_dim, invalid, Error, Result};
use crate::profile::FrequencyProfile;
use crate::quadrature::{adaptive_breaks, clean_breaks, AdaptiveOptions, Neumaier};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CalderonEvaluation {
    pub point: Vec<f64>,
    pub value: f64,
    pub truncation: Truncation,
    /// Zero when `certified`; otherwise the last partial-sum increment or
    /// the quadrature error estimate.
    pub tail_estimate: f64,
    /// The summed range provably contains every nonzero term.
    pub certified: bool,
    pub divergent: bool,
    /// `(truncation, partial sum)` pairs from the monitor.
    pub partial_sums: Vec<(f64, f64)>,
    pub note: String,
}

/// `C_ψ(ξ) = Σ_h m(h) |ψ̂(α̂_h ξ)|²` over the whole family.
pub fn calderon_sum(profile: &FrequencyProfile, family: &AutomorphismFamily, xi: &[f64]) -> Result<CalderonEvaluation> {
    calderon_restricted(
        profile,
        family,
        xi,
        LevelSet::All,
        Weighting::Plain,
        &CalderonOptions::default(),
    )
}

/// `Ψ_M(ξ) = Σ_{L(h) > M} m(h) δ(h) |ψ̂(α̂_h ξ)|²`.
pub fn psi_m(
    profile: &FrequencyProfile,
    family: &AutomorphismFamily,
    xi: &[f64],
    m: f64,
) -> Result<CalderonEvaluation> {
    if !(m > 0.0) {
        return invalid("Ψ_M needs M > 0");
    }
    calderon_restricted(
        profile,
        family,
        xi,
        LevelSet::Above { m },
        Weighting::Jacobian,
        &CalderonOptions::default(),
    )
}

pub(crate) fn check_inputs(profile: &FrequencyProfile, family: &AutomorphismFamily) -> Result<()> {
    check_dim(family.dim(), profile.dim())?;
    if family.metric.is_gabor() != profile.gabor_index.is_some() {
        return invalid("Gabor families need a profile placed on a modulation line, and only they do");
    }
    Ok(())
}

/// The sum (or integral) over the members in `level`, with the factor
/// chosen by `weighting`.
pub fn calderon_restricted(
    profile: &FrequencyProfile,
    family: &AutomorphismFamily,
    xi: &[f64],
    level: LevelSet,
    weighting: Weighting,
    opts: &CalderonOptions,
) -> Result<CalderonEvaluation> {
    check_inputs(profile, family)?;
    family.metric.check_point(xi)?;
    if is_infinite(family) && xi.iter().all(|v| *v == 0.0) {
        return Err(Error::SingularPoint);
    }
    let factor = |w: f64, jac: f64| match weighting {
        Weighting::Plain => w,
        Weighting::Jacobian => w * jac,
    };
    let eval_at = |a: &Automorphism| {
        let v = profile.eval(&a.apply(xi));
        v * v
    };

    let summed: Summed = if profile.is_zero() {
        Summed {
            value: 0.0,
            truncation: Truncation::Empty,
            certified: true,
            divergent: false,
            tail: 0.0,
            trace: vec![],
            note: "zero profile".into(),
        }
    } else {
        match (&family.generator, &family.index) {
            (Generator::Dilation { .. }, IndexSet::Interval { lo, hi }) => {
                dilation_integral(profile, family, xi, (*lo, *hi), level, weighting, opts)?
            }
            (Generator::GaborShift { .. }, IndexSet::Interval { lo, hi }) => {
                gabor_integral(profile, family, xi, (*lo, *hi), level, opts)?
            }
            (_, IndexSet::Integers { .. }) => {
                let range = certified_point_range(profile, family, xi)?;
                sum_integer(family, level, range, opts, |j| {
                    let a = match family.automorphism(&[j as f64]) {
                        Ok(a) => a,
                        Err(_) => return Ok(None),
                    };
                    let v = eval_at(&a);
                    if v == 0.0 {
                        return Ok(Some(0.0));
                    }
                    Ok(Some(factor(family.weight.eval(&[j as f64]), a.jacobian()) * v))
                })?
            }
            _ => {
                let members = family.members(opts.truncation.unwrap_or(crate::automorphisms::DEFAULT_TRUNCATION))?;
                let s: Neumaier = members
                    .iter()
                    .filter(|h| level.contains(h.lipschitz.upper))
                    .map(|h| {
                        let v = eval_at(&h.automorphism);
                        if v == 0.0 {
                            0.0
                        } else {
                            factor(h.weight, h.jacobian) * v
                        }
                    })
                    .collect();
                Summed {
                    value: s.value(),
                    truncation: Truncation::Members { count: members.len() },
                    certified: true,
                    divergent: false,
                    tail: 0.0,
                    trace: vec![(members.len() as f64, s.value())],
                    note: String::new(),
                }
            }
        }
    };
    Ok(CalderonEvaluation {
        point: xi.to_vec(),
        value: summed.value,
        truncation: summed.truncation,
        tail_estimate: if summed.certified { 0.0 } else { summed.tail },
        certified: summed.certified,
        divergent: summed.divergent,
        partial_sums: summed.trace,
        note: summed.note,
    })
}

/// Certified index window for integer families at a single point.
fn certified_point_range(
    profile: &FrequencyProfile,
    family: &AutomorphismFamily,
    xi: &[f64],
) -> Result<(Option<i64>, Option<i64>)> {
    if let Some(spacing) = is_gabor(family) {
        let kappa = profile.gabor_index.expect("checked") as f64;
        if xi[1] != kappa {
            // The action keeps k, so every term vanishes.
            return Ok((Some(1), Some(0)));
        }
        let (slo, shi) = profile.support_box().expect("nonzero profile");
        return Ok(match gabor_range(xi[0], xi[0], xi[1], spacing, slo[0], shi[0]) {
            Some((a, b)) => (Some(a), Some(b)),
            None => (None, None),
        });
    }
    match &family.generator {
        Generator::MatrixPower { base } => {
            let c = lipschitz_constants(&Automorphism::matrix(base.clone())?, &family.metric)?;
            let rho = family.metric.norm(xi);
            let r = Radii {
                rho: (rho, rho),
                support: union_norm_range(&family.metric, &profile.support_boxes()),
            };
            Ok(matrix_power_range(c.lower, c.upper, &r))
        }
        _ => Ok((None, None)),
    }
}

fn level_window(level: LevelSet, lo: f64, hi: f64) -> (f64, f64) {
    match level {
        LevelSet::All => (lo, hi),
        LevelSet::AtMost { m } => (lo, hi.min(m)),
        LevelSet::Above { m } => (lo.max(m), hi),
    }
}

/// `∫ m(a) [a^d] |ψ̂(a ξ)|² da` over the scales whose dilate of `ξ` meets
/// the support.
fn dilation_integral(
    profile: &FrequencyProfile,
    family: &AutomorphismFamily,
    xi: &[f64],
    index: (f64, f64),
    level: LevelSet,
    weighting: Weighting,
    opts: &CalderonOptions,
) -> Result<Summed> {
    let d = xi.len() as i32;
    let mut a0 = f64::INFINITY;
    let mut a1: f64 = 0.0;
    for (lo, hi) in profile.support_boxes() {
        if let Some((p, q)) = ray_interval(xi, &lo, &hi) {
            a0 = a0.min(p);
            a1 = a1.max(q);
        }
    }
    let (lo, hi) = level_window(level, index.0.max(a0), index.1.min(a1));
    let g = |a: f64| {
        let x: Vec<f64> = xi.iter().map(|v| a * v).collect();
        let v = profile.eval(&x);
        if v == 0.0 {
            return 0.0;
        }
        let w = family.weight.eval(&[a]);
        match weighting {
            Weighting::Plain => w * v * v,
            Weighting::Jacobian => w * a.powi(d) * v * v,
        }
    };
    if !(hi > lo) {
        return Ok(Summed {
            value: 0.0,
            truncation: Truncation::Empty,
            certified: true,
            divergent: false,
            tail: 0.0,
            trace: vec![],
            note: String::new(),
        });
    }
    let mut breaks = vec![lo, hi];
    for (i, &x) in xi.iter().enumerate() {
        if x != 0.0 {
            breaks.extend(profile.breakpoints(i).iter().map(|b| b / x));
        }
    }
    let qopts = AdaptiveOptions {
        rel_tol: opts.rel_tol,
        abs_tol: 1e-300,
        ..Default::default()
    };
    if lo > 0.0 {
        let breaks = clean_breaks(breaks, lo, hi);
        let e = adaptive_breaks(g, &breaks, &qopts);
        return Ok(Summed {
            value: e.value,
            truncation: Truncation::Scales { lo, hi },
            certified: false,
            divergent: false,
            tail: e.error,
            trace: vec![],
            note: format!("adaptive Gauss-Legendre, relative tolerance {:e}", opts.rel_tol),
        });
    }
    // The window reaches a = 0: integrate over [hi 2^{-k}, hi] and watch
    // the partial integrals.
    let mut trace = Vec::new();
    let mut value = 0.0;
    let mut tail = 0.0;
    let mut divergent = false;
    for k in 1..=60 {
        let cut = hi * 0.5f64.powi(k);
        let e = adaptive_breaks(&g, &clean_breaks(breaks.clone(), cut, hi), &qopts);
        trace.push((cut, e.value));
        tail = (e.value - value).abs();
        value = e.value;
        if value > opts.cap || super::engine::growing(&trace) {
            divergent = true;
            break;
        }
    }
    Ok(Summed {
        value,
        truncation: Truncation::Scales { lo, hi },
        certified: false,
        divergent,
        tail,
        trace,
        note: "scale window reaches 0; integrals monitored over dyadic cuts".into(),
    })
}

/// Continuous modulation parameters `p ∈ [lo, hi]`:
/// `∫ m(p) |ĝ(ξ − k p)|² dp`.
fn gabor_integral(
    profile: &FrequencyProfile,
    family: &AutomorphismFamily,
    xi: &[f64],
    index: (f64, f64),
    level: LevelSet,
    opts: &CalderonOptions,
) -> Result<Summed> {
    let kappa = profile.gabor_index.expect("checked") as f64;
    let k = xi[1];
    let (slo, shi) = profile.support_box().expect("nonzero profile");
    if k != kappa || k == 0.0 {
        if k == kappa && index.0.is_finite() && index.1.is_finite() {
            let v = profile.eval(xi);
            let w = adaptive_breaks(
                |p| family.weight.eval(&[p]),
                &[index.0, index.1],
                &AdaptiveOptions::default(),
            );
            return Ok(simple(
                v * v * w.value,
                Truncation::Scales {
                    lo: index.0,
                    hi: index.1,
                },
            ));
        }
        if k == kappa && profile.eval(xi) != 0.0 {
            return Ok(Summed {
                divergent: true,
                certified: false,
                note: "k = 0: every member fixes ξ, integral over an unbounded parameter set".into(),
                ..simple(
                    f64::INFINITY,
                    Truncation::Scales {
                        lo: index.0,
                        hi: index.1,
                    },
                )
            });
        }
        return Ok(simple(0.0, Truncation::Empty));
    }
    let (p0, p1) = {
        let (a, b) = ((xi[0] - shi[0]) / k, (xi[0] - slo[0]) / k);
        (a.min(b).max(index.0), a.max(b).min(index.1))
    };
    // L(p) = 1 + |p| is not monotone in p, so the level set is applied
    // inside the integrand and its two edges are breakpoints.
    let g = |p: f64| {
        if !level.contains(1.0 + p.abs()) {
            return 0.0;
        }
        let v = profile.eval(&[xi[0] - k * p, k]);
        family.weight.eval(&[p]) * v * v
    };
    let mut breaks = vec![p0, p1];
    breaks.extend(profile.breakpoints(0).iter().map(|b| (xi[0] - b) / k));
    if let LevelSet::Above { m } | LevelSet::AtMost { m } = level {
        breaks.extend([m - 1.0, 1.0 - m]);
    }
    if !(p1 > p0) {
        return Ok(simple(0.0, Truncation::Empty));
    }
    let e = adaptive_breaks(
        g,
        &clean_breaks(breaks, p0, p1),
        &AdaptiveOptions {
            rel_tol: opts.rel_tol,
            abs_tol: 1e-300,
            ..Default::default()
        },
    );
    Ok(Summed {
        tail: e.error,
        certified: false,
        ..simple(e.value, Truncation::Scales { lo: p0, hi: p1 })
    })
}

fn simple(value: f64, truncation: Truncation) -> Summed {
    Summed {
        value,
        truncation,
        certified: true,
        divergent: false,
        tail: 0.0,
        trace: vec![],
        note: String::new(),
    }
}

/// `Σ_j m(j) |ĝ(ξ − j s)|²` straight from the window on ℝ, for comparison
/// with the sum through the modulation action.
pub fn gabor_calderon_direct(window: &FrequencyProfile, spacing: f64, weight: &Weight, xi: f64) -> Result<f64> {
    if window.base_dim() != 1 {
        return invalid("Gabor windows live on ℝ");
    }
    if !(spacing > 0.0 && spacing.is_finite()) {
        return invalid("spacing must be positive");
    }
    let Some((lo, hi)) = window.support_box() else {
        return Ok(0.0);
    };
    let j0 = ((xi - hi[0]) / spacing).floor() as i64 - 1;
    let j1 = ((xi - lo[0]) / spacing).ceil() as i64 + 1;
    let s: Neumaier = (j0..=j1)
        .map(|j| {
            let v = window.eval_base(&[xi - j as f64 * spacing]);
            weight.eval(&[j as f64]) * v * v
        })
        .collect();
    Ok(s.value())
}
