use super::engine::{
    gabor_range, is_gabor, matrix_power_range, sum_integer, CalderonOptions, Radii, Summed, Truncation, Weighting,
};
use super::geometry::{box_contains_closed, box_norm_range, box_overlap, clipped_area, overlap, union_norm_range};
use super::sum::check_inputs;
use crate::automorphisms::{lipschitz_constants, Automorphism, AutomorphismFamily, Generator, IndexSet, LevelSet};
use crate::error::{check_dim, invalid, Result};
use crate::profile::{FrequencyProfile, Representation};
use crate::quadrature::{adaptive_breaks, clean_breaks, tensor, AdaptiveOptions, Neumaier};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum IntegrabilityVerdict {
    Finite {
        value: f64,
    },
    /// Monitor evidence, not a proof.
    Divergent {
        evidence: String,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocalIntegrability {
    pub verdict: IntegrabilityVerdict,
    pub m: f64,
    pub k_lo: Vec<f64>,
    pub k_hi: Vec<f64>,
    pub truncation: Truncation,
    /// Every contributing member was summed, and each per-member integral
    /// is exact (piecewise-constant profiles in dimension ≤ 2).
    pub exact: bool,
    pub tail_estimate: f64,
    pub partial_sums: Vec<(f64, f64)>,
    pub note: String,
}

impl LocalIntegrability {
    pub fn is_finite(&self) -> bool {
        matches!(self.verdict, IntegrabilityVerdict::Finite { .. })
    }

    pub fn value(&self) -> Option<f64> {
        match self.verdict {
            IntegrabilityVerdict::Finite { value } => Some(value),
            IntegrabilityVerdict::Divergent { .. } => None,
        }
    }
}

const GL_CELLS: usize = 8;
const GL_ORDER: usize = 16;

/// `∫_K Ψ_M(ξ) dξ = Σ_{L(h) > M} m(h) δ(h) ∫_K |ψ̂(α̂_h ξ)|² dξ` over a box
/// `K` away from `e`. For Gabor families `K` is an interval on the
/// profile's modulation line.
pub fn local_integrability_check(
    profile: &FrequencyProfile,
    family: &AutomorphismFamily,
    k_lo: &[f64],
    k_hi: &[f64],
    m: f64,
    opts: &CalderonOptions,
) -> Result<LocalIntegrability> {
    check_inputs(profile, family)?;
    if !(m > 0.0) {
        return invalid("M must be positive");
    }
    let gabor = is_gabor(family);
    check_dim(profile.base_dim(), k_lo.len())?;
    check_dim(k_lo.len(), k_hi.len())?;
    if k_lo
        .iter()
        .zip(k_hi)
        .any(|(l, h)| !(l < h && l.is_finite() && h.is_finite()))
    {
        return invalid("K must be a nondegenerate bounded box");
    }
    let kappa = profile.gabor_index.unwrap_or(0);
    let zero = vec![0.0; k_lo.len()];
    if (gabor.is_none() || kappa == 0) && box_contains_closed(k_lo, k_hi, &zero) {
        return invalid("K contains the identity; it must stay away from the excluded set {e}");
    }
    let exact_inner = exact_member_integrals(profile, family);
    let summed = box_integral(
        profile,
        family,
        k_lo,
        k_hi,
        LevelSet::Above { m },
        Weighting::Jacobian,
        opts,
    )?;
    let verdict = if summed.divergent || !summed.value.is_finite() {
        IntegrabilityVerdict::Divergent {
            evidence: summed.note.clone(),
        }
    } else {
        IntegrabilityVerdict::Finite { value: summed.value }
    };
    Ok(LocalIntegrability {
        verdict,
        m,
        k_lo: k_lo.to_vec(),
        k_hi: k_hi.to_vec(),
        truncation: summed.truncation,
        exact: summed.certified && exact_inner,
        tail_estimate: if summed.certified { 0.0 } else { summed.tail },
        partial_sums: summed.trace,
        note: summed.note,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoxIntegral {
    pub value: f64,
    pub truncation: Truncation,
    /// Every contributing member was summed and each member integral is
    /// exact.
    pub exact: bool,
    pub divergent: bool,
    pub tail_estimate: f64,
}

/// `∫_K Σ_{h ∈ level} m(h) [δ(h)] |ψ̂(α̂_h ξ)|² dξ` with no restriction on
/// where `K` sits.
pub fn calderon_box_integral(
    profile: &FrequencyProfile,
    family: &AutomorphismFamily,
    k_lo: &[f64],
    k_hi: &[f64],
    level: LevelSet,
    weighting: Weighting,
    opts: &CalderonOptions,
) -> Result<BoxIntegral> {
    check_inputs(profile, family)?;
    check_dim(profile.base_dim(), k_lo.len())?;
    check_dim(k_lo.len(), k_hi.len())?;
    let s = box_integral(profile, family, k_lo, k_hi, level, weighting, opts)?;
    Ok(BoxIntegral {
        value: s.value,
        truncation: s.truncation,
        exact: s.certified && exact_member_integrals(profile, family),
        divergent: s.divergent,
        tail_estimate: if s.certified { 0.0 } else { s.tail },
    })
}

pub(crate) fn exact_member_integrals(profile: &FrequencyProfile, family: &AutomorphismFamily) -> bool {
    profile.is_piecewise_constant() && (profile.base_dim() <= 2 || is_gabor(family).is_some())
}

/// `Σ_{h ∈ level} m(h) [δ(h)] ∫_K |ψ̂(α̂_h ξ)|² dξ` over the box `K` (an
/// interval on the profile's line for Gabor families).
pub(crate) fn box_integral(
    profile: &FrequencyProfile,
    family: &AutomorphismFamily,
    k_lo: &[f64],
    k_hi: &[f64],
    level: LevelSet,
    weighting: Weighting,
    opts: &CalderonOptions,
) -> Result<Summed> {
    let kappa = profile.gabor_index.unwrap_or(0);
    let factor = |w: f64, jac: f64| match weighting {
        Weighting::Plain => w,
        Weighting::Jacobian => w * jac,
    };
    if profile.is_zero() {
        return Ok(plain(0.0, Truncation::Empty));
    }
    Ok(match (&family.generator, &family.index) {
        (Generator::Dilation { .. }, IndexSet::Interval { lo, hi }) => {
            dilation_integral(profile, family, k_lo, k_hi, (*lo, *hi), level, weighting, opts)?
        }
        (_, IndexSet::Integers { .. }) => {
            let range = certified_set_range(profile, family, k_lo, k_hi)?;
            sum_integer(family, level, range, opts, |j| {
                let a = match family.automorphism(&[j as f64]) {
                    Ok(a) => a,
                    Err(_) => return Ok(None),
                };
                let w = family.weight.eval(&[j as f64]);
                Ok(Some(
                    factor(w, a.jacobian()) * member_integral(profile, &a, k_lo, k_hi, kappa),
                ))
            })?
        }
        (_, IndexSet::Grid { .. }) => {
            let members = family.members(0)?;
            let s: Neumaier = members
                .iter()
                .filter(|h| level.contains(h.lipschitz.upper))
                .map(|h| factor(h.weight, h.jacobian) * member_integral(profile, &h.automorphism, k_lo, k_hi, kappa))
                .collect();
            plain(s.value(), Truncation::Members { count: members.len() })
        }
        _ => return invalid("box integrals support integer, grid and dilation-interval families"),
    })
}

fn plain(value: f64, truncation: Truncation) -> Summed {
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

fn certified_set_range(
    profile: &FrequencyProfile,
    family: &AutomorphismFamily,
    k_lo: &[f64],
    k_hi: &[f64],
) -> Result<(Option<i64>, Option<i64>)> {
    if let Some(spacing) = is_gabor(family) {
        let kappa = profile.gabor_index.expect("checked") as f64;
        let (slo, shi) = profile.support_box().expect("nonzero profile");
        return Ok(match gabor_range(k_lo[0], k_hi[0], kappa, spacing, slo[0], shi[0]) {
            Some((a, b)) => (Some(a), Some(b)),
            None => (None, None),
        });
    }
    match &family.generator {
        Generator::MatrixPower { base } => {
            let c = lipschitz_constants(&Automorphism::matrix(base.clone())?, &family.metric)?;
            let r = Radii {
                rho: box_norm_range(&family.metric, k_lo, k_hi),
                support: union_norm_range(&family.metric, &profile.support_boxes()),
            };
            Ok(matrix_power_range(c.lower, c.upper, &r))
        }
        _ => Ok((None, None)),
    }
}

/// `∫_K |ψ̂(α ξ)|² dξ`: exact for piecewise-constant profiles in
/// dimension 1 and 2 (and on Gabor lines), tensor Gauss-Legendre otherwise.
pub(crate) fn member_integral(
    profile: &FrequencyProfile,
    a: &Automorphism,
    k_lo: &[f64],
    k_hi: &[f64],
    kappa: i64,
) -> f64 {
    if let Representation::PiecewiseConstant { boxes } = &profile.repr {
        if a.is_gabor() {
            // ξ ↦ ξ − κ p on the line k = κ.
            let shift = a.apply(&[0.0, kappa as f64])[0];
            return boxes
                .iter()
                .map(|b| b.value * b.value * overlap(k_lo[0], k_hi[0], b.lo[0] - shift, b.hi[0] - shift))
                .sum();
        }
        let inv = a.inverse_matrix();
        match k_lo.len() {
            1 => {
                let s = inv[(0, 0)];
                return boxes
                    .iter()
                    .map(|b| {
                        let (p, q) = (s * b.lo[0], s * b.hi[0]);
                        b.value * b.value * overlap(k_lo[0], k_hi[0], p.min(q), p.max(q))
                    })
                    .sum();
            }
            2 => {
                return boxes
                    .iter()
                    .map(|b| {
                        let corners = [
                            [b.lo[0], b.lo[1]],
                            [b.hi[0], b.lo[1]],
                            [b.hi[0], b.hi[1]],
                            [b.lo[0], b.hi[1]],
                        ];
                        let poly: Vec<[f64; 2]> = corners
                            .iter()
                            .map(|c| {
                                let v = inv.mul_vec(c);
                                [v[0], v[1]]
                            })
                            .collect();
                        b.value * b.value * clipped_area(&poly, k_lo, k_hi)
                    })
                    .sum();
            }
            _ => {}
        }
    }
    let gabor_k = profile.gabor_index.map(|k| k as f64);
    tensor(
        |x| {
            let y = match gabor_k {
                Some(k) => a.apply(&[x[0], k]),
                None => a.apply(x),
            };
            let v = profile.eval(&y);
            v * v
        },
        k_lo,
        k_hi,
        GL_CELLS,
        GL_ORDER,
    )
}

/// Continuous scales: with the jacobian, `∫ m(a) ∫_{aK} |ψ̂|² da`.
#[allow(clippy::too_many_arguments)]
fn dilation_integral(
    profile: &FrequencyProfile,
    family: &AutomorphismFamily,
    k_lo: &[f64],
    k_hi: &[f64],
    index: (f64, f64),
    level: LevelSet,
    weighting: Weighting,
    opts: &CalderonOptions,
) -> Result<Summed> {
    let metric = &family.metric;
    let (rho_lo, rho_hi) = box_norm_range(metric, k_lo, k_hi);
    let (s_in, s_out) = union_norm_range(metric, &profile.support_boxes());
    let (mut a0, mut a1) = (index.0.max(s_in / rho_hi), index.1.min(s_out / rho_lo));
    match level {
        LevelSet::All => {}
        LevelSet::AtMost { m } => a1 = a1.min(m),
        LevelSet::Above { m } => a0 = a0.max(m),
    }
    if !(a1 > a0) {
        return Ok(plain(0.0, Truncation::Empty));
    }
    let d = k_lo.len();
    let inner = |a: f64| -> f64 {
        let lo: Vec<f64> = k_lo.iter().map(|v| a * v).collect();
        let hi: Vec<f64> = k_hi.iter().map(|v| a * v).collect();
        match &profile.repr {
            Representation::PiecewiseConstant { boxes } => boxes
                .iter()
                .map(|b| b.value * b.value * box_overlap(&lo, &hi, &b.lo, &b.hi))
                .sum(),
            _ => tensor(
                |x| {
                    let v = profile.eval(x);
                    v * v
                },
                &lo,
                &hi,
                GL_CELLS,
                GL_ORDER,
            ),
        }
    };
    let mut breaks = vec![a0, a1];
    for i in 0..d {
        for b in profile.breakpoints(i) {
            for e in [k_lo[i], k_hi[i]] {
                if e != 0.0 {
                    breaks.push(b / e);
                }
            }
        }
    }
    // ∫_K |ψ̂(aξ)|² dξ = a^{-d} ∫_{aK} |ψ̂|², and δ(a) = a^d.
    let est = adaptive_breaks(
        |a| {
            let w = family.weight.eval(&[a]);
            match weighting {
                Weighting::Plain => w * inner(a) / a.powi(d as i32),
                Weighting::Jacobian => w * inner(a),
            }
        },
        &clean_breaks(breaks, a0, a1),
        &AdaptiveOptions {
            rel_tol: opts.rel_tol,
            abs_tol: 1e-300,
            ..Default::default()
        },
    );
    Ok(Summed {
        value: est.value,
        truncation: Truncation::Scales { lo: a0, hi: a1 },
        certified: false,
        divergent: false,
        tail: est.error,
        trace: vec![],
        note: format!("outer adaptive Gauss-Legendre, relative tolerance {:e}", opts.rel_tol),
    })
}
