//! Summation over integer-indexed families: exact ranges when the support
//! geometry certifies them, a dyadic partial-sum monitor otherwise.

use crate::automorphisms::{AutomorphismFamily, Generator, LevelSet};
use crate::error::Result;
use crate::quadrature::Neumaier;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CalderonOptions {
    /// Declared truncation `|j| ≤ T` for unbounded integer families. When
    /// absent, ranges are certified from the support or monitored.
    pub truncation: Option<i64>,
    /// Relative tolerance for continuous index sets.
    pub rel_tol: f64,
    /// Partial sums above this count as divergent.
    pub cap: f64,
    /// The monitor stops at truncation `2^max_doublings`.
    pub max_doublings: u32,
}

impl Default for CalderonOptions {
    fn default() -> Self {
        CalderonOptions {
            truncation: None,
            rel_tol: 1e-6,
            cap: 1e12,
            max_doublings: 16,
        }
    }
}

/// Which multiplicative factor accompanies `m(h)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Weighting {
    /// `m(h)`, as in the Calderón sum.
    Plain,
    /// `m(h) δ(h)`, as in the tail `Ψ_M`.
    Jacobian,
}

/// Index range actually summed or integrated.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Truncation {
    Empty,
    Indices { lo: i64, hi: i64 },
    Members { count: usize },
    Scales { lo: f64, hi: f64 },
}

pub(crate) struct Summed {
    pub value: f64,
    pub truncation: Truncation,
    pub certified: bool,
    pub divergent: bool,
    pub tail: f64,
    pub trace: Vec<(f64, f64)>,
    pub note: String,
}

/// Norm ranges feeding the certification: `rho` for the probed point or
/// set, `support` for the profile.
pub(crate) struct Radii {
    pub rho: (f64, f64),
    pub support: (f64, f64),
}

/// Indices `j` outside of which `α̂_j` maps the probe set away from the
/// support, derived from the base constants `ℓ_A ≤ L_A`:
/// `ℓ_A^j ρ ≤ |A^j ξ| ≤ L_A^j ρ` for `j ≥ 0` and the reciprocal bounds
/// for `j < 0`.
pub(crate) fn matrix_power_range(lower: f64, upper: f64, r: &Radii) -> (Option<i64>, Option<i64>) {
    let (rho_lo, rho_hi) = r.rho;
    let (s_in, s_out) = r.support;
    let steps = |x: f64| -> Option<i64> { (x.is_finite() && x < 1e6).then(|| x.max(0.0).floor() as i64 + 2) };
    let up = if lower > 1.0 && rho_lo > 0.0 {
        steps((s_out / rho_lo).ln() / lower.ln())
    } else if upper < 1.0 && s_in > 0.0 {
        steps((rho_hi / s_in).ln() / (1.0 / upper).ln())
    } else {
        None
    };
    let down = if upper < 1.0 && rho_lo > 0.0 {
        steps((s_out / rho_lo).ln() / (1.0 / upper).ln())
    } else if lower > 1.0 && s_in > 0.0 {
        steps((rho_hi / s_in).ln() / lower.ln())
    } else {
        None
    };
    (down.map(|k| -k), up)
}

/// Index range for the modulation action `(ξ, k) ↦ (ξ − k p, k)` with
/// `p = j s`: the translated probe interval `[x0, x1] − k s j` must meet
/// `[slo, shi]`.
pub(crate) fn gabor_range(x0: f64, x1: f64, k: f64, spacing: f64, slo: f64, shi: f64) -> Option<(i64, i64)> {
    let step = k * spacing;
    if step == 0.0 {
        return None;
    }
    let (a, b) = ((x0 - shi) / step, (x1 - slo) / step);
    let (a, b) = (a.min(b), a.max(b));
    Some((a.floor() as i64 - 1, b.ceil() as i64 + 1))
}

/// Sums `term(j)` over an integer family restricted to `level`.
///
/// `term` returns `None` when the member cannot be formed (a matrix power
/// that overflows); the monitor then stops growing on that side.
pub(crate) fn sum_integer<F>(
    family: &AutomorphismFamily,
    level: LevelSet,
    certified: (Option<i64>, Option<i64>),
    opts: &CalderonOptions,
    mut term: F,
) -> Result<Summed>
where
    F: FnMut(i64) -> Result<Option<f64>>,
{
    let (min, max) = family.integer_bounds().expect("integer family");
    let mut level_term = |j: i64| -> Result<Option<f64>> {
        if level != LevelSet::All {
            let upper = match family.member(&[j as f64]) {
                Ok(m) => m.lipschitz.upper,
                Err(_) => return Ok(None),
            };
            if !level.contains(upper) {
                return Ok(Some(0.0));
            }
        }
        term(j)
    };

    let lo = merge_lower(min, certified.0);
    let hi = merge_upper(max, certified.1);
    if let (Some(lo), Some(hi)) = (lo, hi) {
        let mut s = Neumaier::default();
        let mut overflow = false;
        for j in lo..=hi {
            match level_term(j)? {
                Some(v) => s.add(v),
                None => overflow = true,
            }
        }
        let v = s.value();
        return Ok(Summed {
            value: v,
            truncation: if lo <= hi {
                Truncation::Indices { lo, hi }
            } else {
                Truncation::Empty
            },
            certified: !overflow,
            divergent: false,
            tail: 0.0,
            trace: vec![((hi - lo + 1).max(0) as f64, v)],
            note: if overflow {
                "some members overflowed and were skipped".into()
            } else {
                String::new()
            },
        });
    }

    // Dyadic monitor over |j| ≤ T.
    let limit = opts.truncation.unwrap_or(1i64 << opts.max_doublings);
    let mut s = Neumaier::default();
    let mut trace: Vec<(f64, f64)> = Vec::new();
    let (mut done_lo, mut done_hi) = (0i64, -1i64);
    let mut started = false;
    let (mut dead_lo, mut dead_hi) = (false, false);
    let mut t = 1i64;
    let mut divergent = false;
    loop {
        let t_now = t.min(limit);
        let want_lo = lo.map_or(-t_now, |l| l.max(-t_now));
        let want_hi = hi.map_or(t_now, |h| h.min(t_now));
        if !started && want_lo <= want_hi {
            done_lo = 0i64.clamp(want_lo, want_hi);
            done_hi = done_lo - 1;
            started = true;
        }
        while started && done_hi < want_hi && !dead_hi {
            match level_term(done_hi + 1)? {
                Some(v) => {
                    s.add(v);
                    done_hi += 1;
                }
                None => dead_hi = true,
            }
        }
        while started && done_lo > want_lo && !dead_lo {
            match level_term(done_lo - 1)? {
                Some(v) => {
                    s.add(v);
                    done_lo -= 1;
                }
                None => dead_lo = true,
            }
        }
        trace.push((t_now as f64, s.value()));
        if s.value() > opts.cap || growing(&trace) {
            divergent = true;
            break;
        }
        if t_now >= limit || (dead_lo && dead_hi) || stalled(&trace) {
            break;
        }
        t *= 2;
    }
    let n = trace.len();
    let tail = if n >= 2 {
        (trace[n - 1].1 - trace[n - 2].1).abs()
    } else {
        0.0
    };
    let note = if divergent {
        format!(
            "partial sums grow across dyadic truncations (last {:.6e} at |j| ≤ {}); flagged divergent by the monitor",
            trace[n - 1].1,
            trace[n - 1].0
        )
    } else if opts.truncation.is_some() {
        format!("declared truncation |j| ≤ {limit}")
    } else {
        "range not certified; heuristic truncation by the partial-sum monitor".into()
    };
    Ok(Summed {
        value: s.value(),
        truncation: if done_lo <= done_hi {
            Truncation::Indices {
                lo: done_lo,
                hi: done_hi,
            }
        } else {
            Truncation::Empty
        },
        certified: false,
        divergent,
        tail,
        trace,
        note,
    })
}

fn merge_lower(a: Option<i64>, b: Option<i64>) -> Option<i64> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.max(y)),
        (x, None) => x,
        (None, y) => y,
    }
}

fn merge_upper(a: Option<i64>, b: Option<i64>) -> Option<i64> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (x, None) => x,
        (None, y) => y,
    }
}

/// Three consecutive positive, non-shrinking increments.
pub(crate) fn growing(trace: &[(f64, f64)]) -> bool {
    let n = trace.len();
    if n < 4 {
        return false;
    }
    let d: Vec<f64> = (n - 3..n).map(|i| trace[i].1 - trace[i - 1].1).collect();
    d[0] > 0.0 && d[1] >= d[0] && d[2] >= d[1]
}

/// Two consecutive doublings that changed nothing, past |j| ≤ 128.
fn stalled(trace: &[(f64, f64)]) -> bool {
    let n = trace.len();
    n >= 8 && trace[n - 1].1 == trace[n - 2].1 && trace[n - 2].1 == trace[n - 3].1
}

/// Whether the family has infinitely many members.
pub(crate) fn is_infinite(family: &AutomorphismFamily) -> bool {
    family.is_unbounded() || family.is_continuous()
}

pub(crate) fn is_gabor(family: &AutomorphismFamily) -> Option<f64> {
    match family.generator {
        Generator::GaborShift { spacing } => Some(spacing),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dyadic_ranges() {
        // ℓ = L = 2, ρ = 0.3, support norms in [0.5, 1].
        let r = Radii {
            rho: (0.3, 0.3),
            support: (0.5, 1.0),
        };
        let (lo, hi) = matrix_power_range(2.0, 2.0, &r);
        let (lo, hi) = (lo.unwrap(), hi.unwrap());
        // The only contributing index is j = 1; the range must contain it.
        assert!(lo <= 1 && hi >= 1);
        for j in (hi + 1)..(hi + 40) {
            assert!(2f64.powi(j as i32) * 0.3 > 1.0);
        }
        for j in (lo - 40)..lo {
            assert!(2f64.powi(j as i32) * 0.3 < 0.5);
        }
    }

    #[test]
    fn no_range_without_expansion() {
        let r = Radii {
            rho: (0.3, 0.3),
            support: (0.5, 1.0),
        };
        assert_eq!(matrix_power_range(0.5, 2.0, &r), (None, None));
    }

    #[test]
    fn gabor_index_window() {
        let (a, b) = gabor_range(0.3, 0.3, 1.0, 1.0, 0.0, 1.0).unwrap();
        assert!(a <= 0 && b >= 0);
        assert!(gabor_range(0.3, 0.3, 0.0, 1.0, 0.0, 1.0).is_none());
    }

    #[test]
    fn growth_detector() {
        let lin: Vec<(f64, f64)> = (0..6).map(|k| (2f64.powi(k), 2f64.powi(k))).collect();
        assert!(growing(&lin));
        let conv: Vec<(f64, f64)> = (0..6).map(|k| (2f64.powi(k), 1.0 - 0.5f64.powi(k))).collect();
        assert!(!growing(&conv));
    }
}
