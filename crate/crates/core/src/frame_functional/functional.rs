use crate::automorphisms::{lipschitz_constants, Automorphism, AutomorphismFamily, Generator, IndexSet, LevelSet};
use crate::calderon::engine::{gabor_range, is_gabor, matrix_power_range, Radii, Truncation};
use crate::calderon::geometry::{box_norm_range, union_norm_range};
use crate::error::{check_dim, invalid, Error, Result};
use crate::metric_lattice::{for_each_index, Lattice};
use crate::profile::{FrequencyProfile, Representation};
use crate::quadrature::{adaptive_breaks, clean_breaks, gl, tensor_breaks, AdaptiveOptions, Neumaier};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrameOptions {
    /// Declared truncation `|j| ≤ T`, required for unbounded integer
    /// families whose contributing range cannot be certified.
    pub truncation: Option<i64>,
    /// Tensor cells per axis over `Ω` in dimension ≥ 2.
    pub cells: usize,
    /// Gauss-Legendre order per cell in dimension ≥ 2.
    pub order: usize,
    pub rel_tol: f64,
}

impl Default for FrameOptions {
    fn default() -> Self {
        FrameOptions {
            truncation: None,
            cells: 24,
            order: 4,
            rel_tol: 1e-10,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrameFunctional {
    pub value: f64,
    pub truncation: Truncation,
    /// Quadrature error estimate for continuous index sets.
    pub error: f64,
}

pub(crate) fn check_setting(
    psi: &FrequencyProfile,
    family: &AutomorphismFamily,
    lattice: &Lattice,
    f: &FrequencyProfile,
) -> Result<()> {
    check_dim(family.dim(), psi.dim())?;
    check_dim(family.dim(), f.dim())?;
    check_dim(family.dim(), lattice.dim())?;
    lattice.check_metric(&family.metric)?;
    let g = family.metric.is_gabor();
    if g != psi.gabor_index.is_some() || g != f.gabor_index.is_some() {
        return invalid("Gabor settings need both profiles on a modulation line");
    }
    if psi
        .support_box()
        .is_some_and(|(l, h)| l.iter().chain(&h).any(|v| !v.is_finite()))
    {
        return invalid("ψ̂ needs a bounded support box");
    }
    Ok(())
}

/// `I(f, ψ) = Σ_h m(h) δ(h)⁻¹ ∫_Ω |Σ_λ f̂(α̂_h⁻¹(ξ+λ)) ψ̂(ξ+λ)|² dξ`.
pub fn frame_functional(
    psi: &FrequencyProfile,
    family: &AutomorphismFamily,
    lattice: &Lattice,
    f: &FrequencyProfile,
) -> Result<f64> {
    Ok(frame_functional_with(psi, family, lattice, f, LevelSet::All, &FrameOptions::default())?.value)
}

/// The functional restricted to the members in `level`.
pub fn frame_functional_with(
    psi: &FrequencyProfile,
    family: &AutomorphismFamily,
    lattice: &Lattice,
    f: &FrequencyProfile,
    level: LevelSet,
    opts: &FrameOptions,
) -> Result<FrameFunctional> {
    check_setting(psi, family, lattice, f)?;
    let zero = FrameFunctional {
        value: 0.0,
        truncation: Truncation::Empty,
        error: 0.0,
    };
    if psi.is_zero() || f.is_zero() {
        return Ok(zero);
    }
    match (&family.generator, &family.index) {
        (Generator::Dilation { .. }, IndexSet::Interval { lo, hi }) => {
            let metric = &family.metric;
            let (flo, fhi) = f.support_box().expect("nonzero");
            let (rho_lo, rho_hi) = box_norm_range(metric, &flo, &fhi);
            let (s_in, s_out) = union_norm_range(metric, &psi.support_boxes());
            let (mut a0, mut a1) = (lo.max(s_in / rho_hi), hi.min(s_out / rho_lo));
            match level {
                LevelSet::All => {}
                LevelSet::AtMost { m } => a1 = a1.min(m),
                LevelSet::Above { m } => a0 = a0.max(m),
            }
            if !(a1 > a0) || !a1.is_finite() {
                if a1 > a0 {
                    return invalid("scale window is unbounded; ψ̂ support reaches the origin");
                }
                return Ok(zero);
            }
            let mut err = Ok(());
            let est = adaptive_breaks(
                |a| match family
                    .automorphism(&[a])
                    .and_then(|al| member_term_with(psi, &al, lattice, f, opts))
                {
                    Ok(v) => family.weight.eval(&[a]) * v,
                    Err(e) => {
                        err = Err(e);
                        0.0
                    }
                },
                &clean_breaks(vec![a0, a1], a0, a1),
                &AdaptiveOptions {
                    rel_tol: 1e-8,
                    abs_tol: 1e-300,
                    ..Default::default()
                },
            );
            err?;
            Ok(FrameFunctional {
                value: est.value,
                truncation: Truncation::Scales { lo: a0, hi: a1 },
                error: est.error,
            })
        }
        (_, IndexSet::Integers { min, max }) => {
            let (clo, chi) = certified_range(psi, family, f)?;
            let pick = |fam: Option<i64>, cert: Option<i64>, lower: bool| -> Option<i64> {
                match (fam, cert) {
                    (Some(a), Some(b)) => Some(if lower { a.max(b) } else { a.min(b) }),
                    (a, None) => a,
                    (None, b) => b,
                }
            };
            let (lo, hi) = match (pick(*min, clo, true), pick(*max, chi, false)) {
                (Some(a), Some(b)) => (a, b),
                (a, b) => match opts.truncation {
                    Some(t) => (a.unwrap_or(-t).max(-t), b.unwrap_or(t).min(t)),
                    None => {
                        return Err(Error::UndeclaredTruncation(
                            "the contributing index range of this unbounded family cannot be certified; declare a truncation"
                                .into(),
                        ))
                    }
                },
            };
            let mut s = Neumaier::default();
            for j in lo..=hi {
                let p = [j as f64];
                if level != LevelSet::All && !level.contains(family.member(&p)?.lipschitz.upper) {
                    continue;
                }
                let a = family.automorphism(&p)?;
                s.add(family.weight.eval(&p) * member_term_with(psi, &a, lattice, f, opts)?);
            }
            Ok(FrameFunctional {
                value: s.value(),
                truncation: if lo <= hi {
                    Truncation::Indices { lo, hi }
                } else {
                    Truncation::Empty
                },
                error: 0.0,
            })
        }
        _ => {
            let members = family.members(opts.truncation.unwrap_or(crate::automorphisms::DEFAULT_TRUNCATION))?;
            let mut s = Neumaier::default();
            for h in members.iter().filter(|h| level.contains(h.lipschitz.upper)) {
                s.add(h.weight * member_term_with(psi, &h.automorphism, lattice, f, opts)?);
            }
            Ok(FrameFunctional {
                value: s.value(),
                truncation: Truncation::Members { count: members.len() },
                error: 0.0,
            })
        }
    }
}

/// Members whose image of `supp f̂` can meet `supp ψ̂`.
fn certified_range(
    psi: &FrequencyProfile,
    family: &AutomorphismFamily,
    f: &FrequencyProfile,
) -> Result<(Option<i64>, Option<i64>)> {
    let (flo, fhi) = f.support_box().expect("nonzero");
    if let Some(spacing) = is_gabor(family) {
        let (slo, shi) = psi.support_box().expect("nonzero");
        let kappa = f.gabor_index.expect("checked") as f64;
        return Ok(match gabor_range(flo[0], fhi[0], kappa, spacing, slo[0], shi[0]) {
            Some((a, b)) => (Some(a), Some(b)),
            None => (None, None),
        });
    }
    match &family.generator {
        Generator::MatrixPower { base } => {
            let c = lipschitz_constants(&Automorphism::matrix(base.clone())?, &family.metric)?;
            let r = Radii {
                rho: box_norm_range(&family.metric, &flo, &fhi),
                support: union_norm_range(&family.metric, &psi.support_boxes()),
            };
            Ok(matrix_power_range(c.lower, c.upper, &r))
        }
        _ => Ok((None, None)),
    }
}

/// One member: `δ⁻¹ ∫_Ω |Σ_λ f̂(α̂⁻¹(ξ+λ)) ψ̂(ξ+λ)|² dξ`.
pub fn member_term(
    psi: &FrequencyProfile,
    alpha: &Automorphism,
    lattice: &Lattice,
    f: &FrequencyProfile,
) -> Result<f64> {
    member_term_with(psi, alpha, lattice, f, &FrameOptions::default())
}

pub(crate) fn member_term_with(
    psi: &FrequencyProfile,
    alpha: &Automorphism,
    lattice: &Lattice,
    f: &FrequencyProfile,
    opts: &FrameOptions,
) -> Result<f64> {
    let (Some((plo, phi)), Some((flo, fhi))) = (psi.support_box(), f.support_box()) else {
        return Ok(0.0);
    };
    if alpha.is_gabor() {
        let (kf, kp) = (f.gabor_index.expect("checked"), psi.gabor_index.expect("checked"));
        if kf != kp {
            // The action preserves k, so f̂ ∘ α̂⁻¹ and ψ̂ live on different lines.
            return Ok(0.0);
        }
        // α̂⁻¹(x, κ) = (x + κp, κ).
        let shift = alpha.apply_inverse(&[0.0, kf as f64])[0];
        let image = (flo[0] - shift, fhi[0] - shift);
        let fb: Vec<f64> = f.breakpoints(0).iter().map(|b| b - shift).collect();
        return Ok(line_term(
            psi,
            lattice,
            image,
            &fb,
            |x| f.eval_base(&[x + shift]),
            both_piecewise(psi, f),
        ));
    }
    let d = psi.base_dim();
    if d == 1 {
        let a = alpha.forward()[(0, 0)];
        let (p, q) = (a * flo[0], a * fhi[0]);
        let fb: Vec<f64> = f.breakpoints(0).iter().map(|b| a * b).collect();
        let inv = 1.0 / a;
        let v = line_term(
            psi,
            lattice,
            (p.min(q), p.max(q)),
            &fb,
            |x| f.eval_base(&[inv * x]),
            both_piecewise(psi, f),
        );
        return Ok(v / alpha.jacobian());
    }
    Ok(tensor_term(psi, f, alpha, lattice, (&plo, &phi), (&flo, &fhi), opts) / alpha.jacobian())
}

fn both_piecewise(a: &FrequencyProfile, b: &FrequencyProfile) -> bool {
    a.is_piecewise_constant() && b.is_piecewise_constant()
}

/// The 1-dimensional case: `∫_Ω (Σ_λ g(ξ+λ) ψ̂(ξ+λ))² dξ` with
/// `g = f̂ ∘ α̂⁻¹` supported in `image` and jumping at `g_breaks`.
fn line_term<G: Fn(f64) -> f64>(
    psi: &FrequencyProfile,
    lattice: &Lattice,
    image: (f64, f64),
    g_breaks: &[f64],
    g: G,
    piecewise: bool,
) -> f64 {
    let (plo, phi) = psi.support_box().expect("nonzero");
    let (s0, s1) = (image.0.max(plo[0]), image.1.min(phi[0]));
    if !(s1 > s0) {
        return 0.0;
    }
    let (wlo, whi) = lattice.domain_bounding_box();
    let (w0, w1) = (wlo[0], whi[0]);
    let ranges = lattice.index_ranges(&[s0 - w1], &[s1 - w0]);
    let mut shifts = Vec::new();
    for_each_index(&ranges, |m| shifts.push(lattice.point(m)[0]));
    let pb = psi.breakpoints(0);
    let mut breaks = vec![w0, w1];
    for &lam in &shifts {
        breaks.extend(pb.iter().chain(g_breaks).map(|b| b - lam));
    }
    let breaks = clean_breaks(breaks, w0, w1);
    let kappa = psi.gabor_index;
    let integrand = |x: f64| {
        let s: f64 = shifts
            .iter()
            .map(|&lam| {
                let y = x + lam;
                let gv = g(y);
                if gv == 0.0 {
                    0.0
                } else {
                    gv * match kappa {
                        Some(_) => psi.eval_base(&[y]),
                        None => psi.eval(&[y]),
                    }
                }
            })
            .sum();
        s * s
    };
    if piecewise {
        // Constant on every piece, so a two-point rule is exact.
        breaks.windows(2).map(|w| gl(&integrand, w[0], w[1], 2)).sum()
    } else {
        adaptive_breaks(
            integrand,
            &breaks,
            &AdaptiveOptions {
                rel_tol: 1e-10,
                abs_tol: 1e-300,
                ..Default::default()
            },
        )
        .value
    }
}

/// Dimension ≥ 2. With `G(y) = f̂(α̂⁻¹y) ψ̂(y)` the periodized square
/// unfolds to `Σ_μ ∫ G(y) G(y + μ) dy` over `μ ∈ Γ⊥`, integrated on a
/// product grid through every breakpoint. When `α̂` maps axis-parallel
/// boxes to axis-parallel boxes and both profiles are piecewise constant
/// the rule is exact; otherwise each axis is further split into
/// `opts.cells` pieces.
fn tensor_term(
    psi: &FrequencyProfile,
    f: &FrequencyProfile,
    alpha: &Automorphism,
    lattice: &Lattice,
    psupp: (&[f64], &[f64]),
    fsupp: (&[f64], &[f64]),
    opts: &FrameOptions,
) -> f64 {
    let d = psupp.0.len();
    let corners = |lo: &[f64], hi: &[f64]| -> Vec<Vec<f64>> {
        (0..(1usize << d))
            .map(|mask| {
                let c: Vec<f64> = (0..d).map(|i| if mask >> i & 1 == 1 { hi[i] } else { lo[i] }).collect();
                alpha.apply(&c)
            })
            .collect()
    };
    let mut ilo = vec![f64::INFINITY; d];
    let mut ihi = vec![f64::NEG_INFINITY; d];
    for y in corners(fsupp.0, fsupp.1) {
        for i in 0..d {
            ilo[i] = ilo[i].min(y[i]);
            ihi[i] = ihi[i].max(y[i]);
        }
    }
    let s_lo: Vec<f64> = (0..d).map(|i| ilo[i].max(psupp.0[i])).collect();
    let s_hi: Vec<f64> = (0..d).map(|i| ihi[i].min(psupp.1[i])).collect();
    if s_lo.iter().zip(&s_hi).any(|(a, b)| a >= b) {
        return 0.0;
    }
    let g = |y: &[f64]| -> f64 {
        let pv = psi.eval(y);
        if pv == 0.0 {
            0.0
        } else {
            pv * f.eval(&alpha.apply_inverse(y))
        }
    };
    let aligned = (0..d).all(|i| alpha.forward().row(i).iter().filter(|v| **v != 0.0).count() == 1);
    let exact = aligned && both_piecewise(psi, f);
    // Breakpoints of G on each axis.
    let mut gb: Vec<Vec<f64>> = (0..d).map(|i| psi.breakpoints(i)).collect();
    if let Representation::PiecewiseConstant { boxes } = &f.repr {
        for b in boxes {
            for y in corners(&b.lo, &b.hi) {
                for i in 0..d {
                    gb[i].push(y[i]);
                }
            }
        }
    } else {
        for y in corners(fsupp.0, fsupp.1) {
            for i in 0..d {
                gb[i].push(y[i]);
            }
        }
    }
    let span: Vec<f64> = (0..d).map(|i| s_hi[i] - s_lo[i]).collect();
    let neg: Vec<f64> = span.iter().map(|v| -v).collect();
    let mut mus = Vec::new();
    for_each_index(&lattice.index_ranges(&neg, &span), |m| mus.push(lattice.point(m)));
    let mut total = Neumaier::default();
    for mu in &mus {
        // y and y + μ both in S.
        let lo: Vec<f64> = (0..d).map(|i| s_lo[i].max(s_lo[i] - mu[i])).collect();
        let hi: Vec<f64> = (0..d).map(|i| s_hi[i].min(s_hi[i] - mu[i])).collect();
        if lo.iter().zip(&hi).any(|(a, b)| a >= b) {
            continue;
        }
        let axes: Vec<Vec<f64>> = (0..d)
            .map(|i| {
                let mut v: Vec<f64> = gb[i].iter().flat_map(|b| [*b, b - mu[i]]).collect();
                if !exact {
                    let n = opts.cells.max(1);
                    v.extend((0..=n).map(|k| lo[i] + (hi[i] - lo[i]) * k as f64 / n as f64));
                }
                clean_breaks(v, lo[i], hi[i])
            })
            .collect();
        let order = if exact { 1 } else { opts.order };
        total.add(tensor_breaks(
            |y| {
                let a = g(y);
                if a == 0.0 {
                    return 0.0;
                }
                let z: Vec<f64> = y.iter().zip(mu).map(|(p, q)| p + q).collect();
                a * g(&z)
            },
            &axes,
            order,
        ));
    }
    total.value()
}
