use super::family::{AutomorphismFamily, Generator, DEFAULT_TRUNCATION};
use crate::error::{invalid, Result};
use serde::{Deserialize, Serialize};

/// Monotone envelope `f` with `L(h) ≤ f(ℓ(h))`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Envelope {
    Identity,
    Power {
        exponent: f64,
    },
    /// Linear interpolation between `(x, y)` knots sorted by `x`, constant
    /// beyond either end.
    PiecewiseLinear {
        knots: Vec<(f64, f64)>,
    },
}

impl Envelope {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Envelope::Identity => x,
            Envelope::Power { exponent } => x.powf(*exponent),
            Envelope::PiecewiseLinear { knots } => {
                let first = knots[0];
                let last = knots[knots.len() - 1];
                if x <= first.0 {
                    return first.1;
                }
                if x >= last.0 {
                    return last.1;
                }
                let k = knots.partition_point(|p| p.0 <= x);
                let (x0, y0) = knots[k - 1];
                let (x1, y1) = knots[k];
                y0 + (y1 - y0) * (x - x0) / (x1 - x0)
            }
        }
    }

    /// Checks that `f` is nondecreasing on `[lo, hi]` (at knots and on a
    /// 1000-point log grid).
    pub fn check_monotone(&self, lo: f64, hi: f64) -> Result<()> {
        let mut xs: Vec<f64> = (0..=1000).map(|k| lo * (hi / lo).powf(k as f64 / 1000.0)).collect();
        if let Envelope::PiecewiseLinear { knots } = self {
            if knots.is_empty() {
                return invalid("envelope needs at least one knot");
            }
            xs.extend(knots.iter().map(|p| p.0).filter(|x| (lo..=hi).contains(x)));
            xs.sort_by(f64::total_cmp);
        }
        let mut prev = f64::NEG_INFINITY;
        for x in xs {
            let y = self.eval(x);
            if !(y >= prev) {
                return invalid(format!("envelope is not monotone near x = {x}"));
            }
            prev = y;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpansivenessProbe {
    /// Half-width used when an integer index set leaves a bound open.
    pub truncation: i64,
    /// Threshold `M` of the level set `L(h) > M`.
    pub m: f64,
    /// A witness must have `ℓ` below this.
    pub n_floor: f64,
    /// Maximal log-log slope of ℓ against L along the witness chain.
    pub decay_slope: f64,
}

impl Default for ExpansivenessProbe {
    fn default() -> Self {
        ExpansivenessProbe {
            truncation: DEFAULT_TRUNCATION,
            m: 1.0,
            n_floor: 1.0,
            decay_slope: -0.25,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Expansiveness {
    UniformlyExpanding { envelope: Envelope },
    Expanding,
    NonExpanding { witness: Vec<f64>, lower: f64, upper: f64 },
}

impl Expansiveness {
    pub fn name(&self) -> &'static str {
        match self {
            Expansiveness::UniformlyExpanding { .. } => "uniformly_expanding",
            Expansiveness::Expanding => "expanding",
            Expansiveness::NonExpanding { .. } => "non_expanding",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpansivenessReport {
    pub verdict: Expansiveness,
    pub members_probed: usize,
    pub lower_range: (f64, f64),
    pub upper_range: (f64, f64),
    pub probe: ExpansivenessProbe,
    /// The chain of parameters (L strictly up, ℓ strictly down) examined.
    pub chain: Vec<Vec<f64>>,
    pub note: String,
}

struct Point {
    params: Vec<f64>,
    lower: f64,
    upper: f64,
}

fn strictly_less(a: f64, b: f64) -> bool {
    a < b - 1e-12 * b.abs().max(a.abs())
}

/// Classifies a family on a finite truncation.
///
/// * `non_expanding`: there is a chain with `L` strictly increasing and `ℓ`
///   strictly decreasing whose tail ends above `M` with `ℓ < n_floor` and
///   decays at log-log slope at most `decay_slope` (for Gabor shifts, where
///   `ℓ = 1/L` in closed form, any member above `M` is a witness);
/// * `expanding`: otherwise, if two members above `M` have `L` at least
///   doubling while `ℓ` does not grow;
/// * `uniformly_expanding`: otherwise, with the least concave majorant of
///   the running maximum of `L` against `ℓ` as envelope.
pub fn classify_expansiveness(family: &AutomorphismFamily, probe: &ExpansivenessProbe) -> Result<ExpansivenessReport> {
    let members = family.members(probe.truncation)?;
    if members.is_empty() {
        return invalid("empty truncation");
    }
    let mut pts: Vec<Point> = members
        .into_iter()
        .map(|m| Point {
            params: m.params,
            lower: m.lipschitz.lower,
            upper: m.lipschitz.upper,
        })
        .collect();
    pts.sort_by(|a, b| {
        a.upper
            .total_cmp(&b.upper)
            .then(b.lower.total_cmp(&a.lower))
            .then_with(|| a.params.partial_cmp(&b.params).unwrap_or(std::cmp::Ordering::Equal))
    });

    let range = |f: &dyn Fn(&Point) -> f64| {
        pts.iter()
            .map(f)
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
    };
    let lower_range = range(&|p| p.lower);
    let upper_range = range(&|p| p.upper);

    // Longest chain: L strictly up, ℓ strictly down.
    let n = pts.len();
    let mut len = vec![1usize; n];
    let mut prev = vec![usize::MAX; n];
    for i in 0..n {
        for j in 0..i {
            if strictly_less(pts[j].upper, pts[i].upper)
                && strictly_less(pts[i].lower, pts[j].lower)
                && len[j] + 1 > len[i]
            {
                len[i] = len[j] + 1;
                prev[i] = j;
            }
        }
    }
    let mut end = 0;
    for i in 0..n {
        if len[i] > len[end] || (len[i] == len[end] && pts[i].upper >= pts[end].upper) {
            end = i;
        }
    }
    let mut chain_idx = vec![end];
    while prev[*chain_idx.last().unwrap()] != usize::MAX {
        chain_idx.push(prev[*chain_idx.last().unwrap()]);
    }
    chain_idx.reverse();
    let chain: Vec<Vec<f64>> = chain_idx.iter().map(|&i| pts[i].params.clone()).collect();

    let note = format!(
        "verdict on truncation: {} members, L in [{:.6e}, {:.6e}], ℓ in [{:.6e}, {:.6e}]",
        n, upper_range.0, upper_range.1, lower_range.0, lower_range.1
    );
    let report = |verdict| ExpansivenessReport {
        verdict,
        members_probed: n,
        lower_range,
        upper_range,
        probe: *probe,
        chain: chain.clone(),
        note: note.clone(),
    };

    if matches!(family.generator, Generator::GaborShift { .. }) {
        if let Some(w) = pts.iter().rev().find(|p| p.upper > probe.m) {
            return Ok(report(Expansiveness::NonExpanding {
                witness: w.params.clone(),
                lower: w.lower,
                upper: w.upper,
            }));
        }
    }

    if chain_idx.len() >= 2 {
        let last = &pts[*chain_idx.last().unwrap()];
        let mid = &pts[chain_idx[if chain_idx.len() == 2 { 0 } else { chain_idx.len() / 2 }]];
        let slope = (last.lower / mid.lower).ln() / (last.upper / mid.upper).ln();
        if last.upper > probe.m && last.lower < probe.n_floor && slope <= probe.decay_slope {
            return Ok(report(Expansiveness::NonExpanding {
                witness: last.params.clone(),
                lower: last.lower,
                upper: last.upper,
            }));
        }
    }

    let tier: Vec<&Point> = pts.iter().filter(|p| p.upper > probe.m).collect();
    for (i, a) in tier.iter().enumerate() {
        for b in &tier[i + 1..] {
            if b.upper >= 2.0 * a.upper && b.lower <= a.lower * (1.0 + 1e-9) {
                return Ok(report(Expansiveness::Expanding));
            }
        }
    }
    if tier.is_empty() {
        return Ok(report(Expansiveness::Expanding));
    }
    Ok(report(Expansiveness::UniformlyExpanding {
        envelope: concave_majorant(&tier),
    }))
}

fn concave_majorant(tier: &[&Point]) -> Envelope {
    let mut by_lower: Vec<(f64, f64)> = tier.iter().map(|p| (p.lower, p.upper)).collect();
    by_lower.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    // Running maximum makes the cloud monotone; keep one point per ℓ.
    let mut mono: Vec<(f64, f64)> = Vec::new();
    let mut run = f64::NEG_INFINITY;
    for (x, y) in by_lower {
        run = run.max(y);
        match mono.last_mut() {
            Some(last) if last.0 == x => last.1 = run,
            _ => mono.push((x, run)),
        }
    }
    // Upper hull (monotone chain).
    let mut hull: Vec<(f64, f64)> = Vec::new();
    for p in mono {
        while hull.len() >= 2 {
            let a = hull[hull.len() - 2];
            let b = hull[hull.len() - 1];
            let cross = (b.0 - a.0) * (p.1 - a.1) - (b.1 - a.1) * (p.0 - a.0);
            if cross >= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    Envelope::PiecewiseLinear { knots: hull }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automorphisms::{IndexSet, Weight};
    use crate::linalg::Matrix;
    use crate::metric_lattice::MetricSpace;

    #[test]
    fn dyadic_is_uniform_with_identity_envelope() {
        let f = AutomorphismFamily::matrix_powers(Matrix::diag(&[2.0]), None, None, MetricSpace::l2(1)).unwrap();
        let r = classify_expansiveness(&f, &ExpansivenessProbe::default()).unwrap();
        match r.verdict {
            Expansiveness::UniformlyExpanding { envelope } => {
                for j in 1..30 {
                    let x = 2f64.powi(j);
                    assert!((envelope.eval(x) - x).abs() <= 1e-9 * x);
                }
            }
            v => panic!("{v:?}"),
        }
    }

    #[test]
    fn anisotropic_counterexample() {
        let f = AutomorphismFamily::matrix_powers(Matrix::diag(&[2.0, 0.5]), Some(-20), Some(20), MetricSpace::l2(2))
            .unwrap();
        let r = classify_expansiveness(&f, &ExpansivenessProbe::default()).unwrap();
        match r.verdict {
            Expansiveness::NonExpanding { witness, lower, upper } => {
                assert_eq!(witness, vec![20.0]);
                assert_eq!(upper, 2f64.powi(20));
                assert_eq!(lower, 2f64.powi(-20));
            }
            v => panic!("{v:?}"),
        }
    }

    #[test]
    fn partial_expansion_is_not_uniform() {
        let f = AutomorphismFamily::matrix_powers(Matrix::diag(&[2.0, 1.0]), Some(-10), Some(10), MetricSpace::l2(2))
            .unwrap();
        let r = classify_expansiveness(&f, &ExpansivenessProbe::default()).unwrap();
        assert_eq!(r.verdict, Expansiveness::Expanding);
    }

    #[test]
    fn shearlet_grid_witness_has_large_shear() {
        let f = AutomorphismFamily::new(
            Generator::Shearlet,
            IndexSet::Grid {
                axes: vec![(1..=8).map(f64::from).collect(), (-8..=8).map(f64::from).collect()],
            },
            Weight::constant(1.0),
            MetricSpace::linf(2),
        )
        .unwrap();
        let r = classify_expansiveness(&f, &ExpansivenessProbe::default()).unwrap();
        match r.verdict {
            Expansiveness::NonExpanding { witness, .. } => assert!(witness[1].abs() >= 6.0, "{witness:?}"),
            v => panic!("{v:?}"),
        }
    }

    #[test]
    fn envelope_monotonicity() {
        let e = Envelope::PiecewiseLinear {
            knots: vec![(1.0, 1.0), (2.0, 0.5)],
        };
        assert!(e.check_monotone(0.5, 4.0).is_err());
        assert!(Envelope::Identity.check_monotone(1.0, 1e6).is_ok());
    }
}
