use crate::automorphisms::{AutomorphismFamily, LevelSet, Member};
use crate::calderon::member_integral;
use crate::error::{check_dim, invalid, Error, Result};
use crate::metric_lattice::{Lattice, MetricSpace};
use crate::profile::{FrequencyProfile, ValueBox};
use serde::{Deserialize, Serialize};

/// Where test-function centers may sit.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AdmissibleRegion {
    /// All of the frequency space; any radius.
    Whole,
    /// The line `k = kappa` of ℝ × ℤ; radii below 1 keep the ball on it.
    GaborLine { kappa: i64 },
}

impl AdmissibleRegion {
    /// Radii must stay strictly below this.
    pub fn eps0(&self) -> f64 {
        match self {
            AdmissibleRegion::Whole => f64::INFINITY,
            AdmissibleRegion::GaborLine { .. } => 1.0,
        }
    }

    pub fn contains(&self, xi: &[f64]) -> bool {
        match *self {
            AdmissibleRegion::Whole => true,
            AdmissibleRegion::GaborLine { kappa } => xi.len() == 2 && xi[1] == kappa as f64,
        }
    }

    /// The natural region for a metric: the `k = 1` line for the Gabor
    /// product, everything otherwise.
    pub fn for_metric(metric: &MetricSpace) -> Self {
        if metric.is_gabor() {
            AdmissibleRegion::GaborLine { kappa: 1 }
        } else {
            AdmissibleRegion::Whole
        }
    }
}

/// Normalized indicator of the ball `B(ξ₀, ε)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestFunction {
    pub center: Vec<f64>,
    pub radius: f64,
    /// `1/√ν(B(ξ₀, ε))`.
    pub normalization: f64,
    pub region: AdmissibleRegion,
    pub profile: FrequencyProfile,
}

impl TestFunction {
    pub fn measure(&self) -> f64 {
        1.0 / (self.normalization * self.normalization)
    }

    /// The ball as a half-open box in base coordinates.
    pub fn base_box(&self) -> (Vec<f64>, Vec<f64>) {
        let d = self.profile.base_dim();
        let lo = self.center[..d].iter().map(|c| c - self.radius).collect();
        let hi = self.center[..d].iter().map(|c| c + self.radius).collect();
        (lo, hi)
    }
}

/// Builds `f̂ = ν(B)^{-1/2} 1_B` with `B = B(ξ₀, ε)`.
///
/// Balls are represented as boxes, so the sup metric works in any
/// dimension, the Euclidean one only on the line, and the Gabor product
/// only on a modulation line with `ε < 1`.
pub fn make_test_function(
    center: &[f64],
    eps: f64,
    metric: &MetricSpace,
    region: AdmissibleRegion,
) -> Result<TestFunction> {
    metric.check_point(center)?;
    if !(eps > 0.0 && eps.is_finite()) {
        return invalid(format!("test-function radius must be positive, got {eps}"));
    }
    if !(eps < region.eps0()) {
        return invalid(format!(
            "radius {eps} is not below ε₀ = {} of the region",
            region.eps0()
        ));
    }
    if !region.contains(center) {
        return invalid("test-function center lies outside the admissible region");
    }
    let base_dim = match (metric, region) {
        (MetricSpace::GaborProduct, AdmissibleRegion::GaborLine { .. }) => 1,
        (MetricSpace::Linf { dim }, AdmissibleRegion::Whole) => *dim,
        (MetricSpace::L2 { dim: 1 }, AdmissibleRegion::Whole) => 1,
        _ => {
            return Err(Error::IncompatibleMetric {
                metric: metric.name(),
                what: "box-shaped test functions on this region".into(),
            })
        }
    };
    let nu = metric.ball_measure(eps)?;
    let normalization = 1.0 / nu.sqrt();
    let lo: Vec<f64> = center[..base_dim].iter().map(|c| c - eps).collect();
    let hi: Vec<f64> = center[..base_dim].iter().map(|c| c + eps).collect();
    let mut profile = FrequencyProfile::piecewise_constant(vec![ValueBox {
        lo,
        hi,
        value: normalization,
    }])?;
    if let AdmissibleRegion::GaborLine { kappa } = region {
        profile = profile.on_gabor_line(kappa)?;
    }
    Ok(TestFunction {
        center: center.to_vec(),
        radius: eps,
        normalization,
        region,
        profile,
    })
}

/// Radius below which only `λ = 0` can contribute to the member term of
/// `h`: the distance from `α̂_h(ξ₀)` to its cell boundary over `L(h)`.
pub fn single_term_threshold(member: &Member, lattice: &Lattice, metric: &MetricSpace, center: &[f64]) -> Result<f64> {
    check_dim(metric.dim(), center.len())?;
    let image = member.automorphism.apply(center);
    Ok(lattice.cell_boundary_distance(&image, metric) / member.lipschitz.upper)
}

/// Reduced form of one member term, `m(h)/ν(B) ∫_B |ψ̂(α̂_h ξ)|² dξ`,
/// valid below [`single_term_threshold`].
pub fn single_term_value(psi: &FrequencyProfile, member: &Member, tf: &TestFunction) -> Result<f64> {
    check_dim(psi.dim(), tf.profile.dim())?;
    if !psi.is_piecewise_constant() {
        return invalid("the reduced form is evaluated exactly for piecewise-constant profiles only");
    }
    let (lo, hi) = tf.base_box();
    let kappa = tf.profile.gabor_index.unwrap_or(0);
    if psi.gabor_index.is_some_and(|k| k != kappa) {
        return Ok(0.0);
    }
    Ok(member.weight * member_integral(psi, &member.automorphism, &lo, &hi, kappa) / tf.measure())
}

/// Members of `level` (under a truncation) whose threshold is at most `eps`,
/// i.e. those for which the reduction is not yet guaranteed.
pub fn members_above_threshold(
    family: &AutomorphismFamily,
    lattice: &Lattice,
    center: &[f64],
    eps: f64,
    level: LevelSet,
    truncation: i64,
) -> Result<Vec<Member>> {
    let mut out = Vec::new();
    for h in family.members(truncation)? {
        if level.contains(h.lipschitz.upper) && single_term_threshold(&h, lattice, &family.metric, center)? <= eps {
            out.push(h);
        }
    }
    Ok(out)
}
