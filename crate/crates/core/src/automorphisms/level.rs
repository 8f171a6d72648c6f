use super::expansiveness::Envelope;
use super::family::{AutomorphismFamily, Generator, IndexSet, DEFAULT_TRUNCATION};
use crate::error::{invalid, Result};
use crate::quadrature::{adaptive, AdaptiveOptions, Neumaier};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UcOptions {
    /// Values above this count as unbounded on the sampled range.
    pub cap: f64,
    /// Truncation for integer index sets with an open bound.
    pub truncation: i64,
    pub rel_tol: f64,
}

impl Default for UcOptions {
    fn default() -> Self {
        UcOptions {
            cap: 1e3,
            truncation: DEFAULT_TRUNCATION,
            rel_tol: 1e-12,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UcProfile {
    pub c: f64,
    pub m: f64,
    /// `(t, u_c(t))` per grid point.
    pub samples: Vec<(f64, f64)>,
    pub max: f64,
    pub cap: f64,
    /// `max ≤ cap` on the sampled range; not a proof of essential
    /// boundedness.
    pub bounded: bool,
}

/// `u_c(t) = ς({h : t ≤ L(h) ≤ f(ct)})` on a grid of `t ≥ M`.
pub fn u_c_profile(
    family: &AutomorphismFamily,
    envelope: &Envelope,
    c: f64,
    t_grid: &[f64],
    m: f64,
    opts: &UcOptions,
) -> Result<UcProfile> {
    if !(c > 1.0 && c.is_finite()) {
        return invalid(format!("u_c needs c > 1, got {c}"));
    }
    if !(m > 0.0) {
        return invalid("u_c needs M > 0");
    }
    if t_grid.is_empty() {
        return invalid("empty t grid");
    }
    if let Some(t) = t_grid.iter().find(|t| !(**t >= m && t.is_finite())) {
        return invalid(format!("t grid must lie in [M, ∞), got {t}"));
    }
    let tmax = t_grid.iter().cloned().fold(m, f64::max);
    envelope.check_monotone(m.min(1.0), (c * tmax).max(2.0 * m))?;

    let samples: Vec<(f64, f64)> = match (&family.generator, &family.index) {
        (Generator::Dilation { .. }, IndexSet::Interval { lo, hi }) => t_grid
            .iter()
            .map(|&t| {
                let a = t.max(*lo);
                let b = envelope.eval(c * t).min(*hi);
                let qopts = AdaptiveOptions {
                    rel_tol: opts.rel_tol,
                    abs_tol: 1e-300,
                    ..Default::default()
                };
                let v = if b > a {
                    adaptive(|x| family.weight.eval(&[x]), a, b, &qopts).value
                } else {
                    0.0
                };
                (t, v)
            })
            .collect(),
        _ => {
            let members = family.members(opts.truncation)?;
            t_grid
                .iter()
                .map(|&t| {
                    let top = envelope.eval(c * t);
                    let s: Neumaier = members
                        .iter()
                        .filter(|h| t <= h.lipschitz.upper && h.lipschitz.upper <= top)
                        .map(|h| h.weight)
                        .collect();
                    (t, s.value())
                })
                .collect()
        }
    };
    let max = samples.iter().map(|s| s.1).fold(0.0, f64::max);
    Ok(UcProfile {
        c,
        m,
        samples,
        max,
        cap: opts.cap,
        bounded: max <= opts.cap,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automorphisms::Weight;
    use crate::linalg::Matrix;
    use crate::metric_lattice::MetricSpace;

    fn half_line(weight: Weight) -> AutomorphismFamily {
        AutomorphismFamily::new(
            Generator::Dilation { dim: 1 },
            IndexSet::Interval {
                lo: 0.0,
                hi: f64::INFINITY,
            },
            weight,
            MetricSpace::l2(1),
        )
        .unwrap()
    }

    #[test]
    fn log_weight_gives_constant() {
        let f = half_line(Weight::Power {
            scale: 1.0,
            exponent: -1.0,
        });
        let t: Vec<f64> = (0..20).map(|k| 1.0 + 50.0 * k as f64).collect();
        let u = u_c_profile(&f, &Envelope::Identity, 3.0, &t, 1.0, &UcOptions::default()).unwrap();
        for (_, v) in &u.samples {
            assert!((v - 3f64.ln()).abs() < 1e-8);
        }
        assert!(u.bounded);
    }

    #[test]
    fn flat_weight_grows() {
        let f = half_line(Weight::constant(1.0));
        let t: Vec<f64> = (0..20).map(|k| 1.0 + 100.0 * k as f64).collect();
        let u = u_c_profile(&f, &Envelope::Identity, 2.0, &t, 1.0, &UcOptions::default()).unwrap();
        for (t, v) in &u.samples {
            assert!((v - t).abs() < 1e-8 * t);
        }
        assert!(!u.bounded);
    }

    #[test]
    fn integer_family_counts() {
        let f = AutomorphismFamily::matrix_powers(Matrix::diag(&[2.0, 3.0]), None, None, MetricSpace::l2(2)).unwrap();
        let t: Vec<f64> = (0..40).map(|k| 1.5f64.powi(k)).collect();
        let env = Envelope::Power {
            exponent: 3f64.ln() / 2f64.ln(),
        };
        let u = u_c_profile(&f, &env, 2.0, &t, 1.0, &UcOptions::default()).unwrap();
        // Brute force over j ∈ [−30, 30]: L(j) = 3^j for j ≥ 0, 2^j below.
        let p = 3f64.ln() / 2f64.ln();
        for &(t, v) in &u.samples {
            let top = (2.0 * t).powf(p);
            let want = (-30..=30i32)
                .map(|j| if j >= 0 { 3f64.powi(j) } else { 2f64.powi(j) })
                .filter(|&l| t <= l && l <= top * (1.0 + 1e-12))
                .count() as f64;
            assert_eq!(v, want, "t = {t}");
        }
        assert!(u.bounded);
    }

    #[test]
    fn rejects_bad_input() {
        let f = half_line(Weight::constant(1.0));
        assert!(u_c_profile(&f, &Envelope::Identity, 1.0, &[1.0], 1.0, &UcOptions::default()).is_err());
        assert!(u_c_profile(&f, &Envelope::Identity, 2.0, &[0.5], 1.0, &UcOptions::default()).is_err());
        let bad = Envelope::PiecewiseLinear {
            knots: vec![(1.0, 5.0), (2.0, 1.0)],
        };
        assert!(u_c_profile(&f, &bad, 2.0, &[1.0], 1.0, &UcOptions::default()).is_err());
    }
}
