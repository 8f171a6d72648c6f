use crate::error::{check_dim, invalid, Error, Result};
use serde::{Deserialize, Serialize};

/// Invariant metric on the frequency group.
///
/// For [`MetricSpace::GaborProduct`] points are `(ξ, k)` with `k` an
/// integer-valued modulation index and `d = |ξ − η| + |k − l|`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MetricSpace {
    L2 { dim: usize },
    Linf { dim: usize },
    GaborProduct,
}

impl MetricSpace {
    pub fn l2(dim: usize) -> Self {
        MetricSpace::L2 { dim }
    }

    pub fn linf(dim: usize) -> Self {
        MetricSpace::Linf { dim }
    }

    pub fn gabor() -> Self {
        MetricSpace::GaborProduct
    }

    pub fn name(&self) -> String {
        match self {
            MetricSpace::L2 { dim } => format!("l2(dim={dim})"),
            MetricSpace::Linf { dim } => format!("linf(dim={dim})"),
            MetricSpace::GaborProduct => "gabor_product".into(),
        }
    }

    /// Number of coordinates of a point.
    pub fn dim(&self) -> usize {
        match *self {
            MetricSpace::L2 { dim } | MetricSpace::Linf { dim } => dim,
            MetricSpace::GaborProduct => 2,
        }
    }

    pub fn is_gabor(&self) -> bool {
        matches!(self, MetricSpace::GaborProduct)
    }

    pub fn identity(&self) -> Vec<f64> {
        vec![0.0; self.dim()]
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            MetricSpace::L2 { dim } | MetricSpace::Linf { dim } if dim == 0 => {
                invalid("metric dimension must be positive")
            }
            _ => Ok(()),
        }
    }

    /// Checks the dimension, and for the Gabor product that the modulation
    /// coordinate is an integer.
    pub fn check_point(&self, x: &[f64]) -> Result<()> {
        check_dim(self.dim(), x.len())?;
        if x.iter().any(|v| !v.is_finite()) {
            return invalid("point has non-finite coordinates");
        }
        if self.is_gabor() && x[1].fract() != 0.0 {
            return invalid(format!("modulation index must be an integer, got {}", x[1]));
        }
        Ok(())
    }

    /// `d(x, e)` without validation.
    #[inline]
    pub fn norm(&self, x: &[f64]) -> f64 {
        match self {
            MetricSpace::L2 { .. } => x.iter().map(|v| v * v).sum::<f64>().sqrt(),
            MetricSpace::Linf { .. } => x.iter().fold(0.0, |m, v| m.max(v.abs())),
            MetricSpace::GaborProduct => x[0].abs() + x[1].abs(),
        }
    }

    pub fn distance(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        self.check_point(x)?;
        self.check_point(y)?;
        let diff: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).collect();
        Ok(self.norm(&diff))
    }

    /// Lebesgue (times counting) measure of the open ball `B(e, r)`.
    pub fn ball_measure(&self, r: f64) -> Result<f64> {
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::InvalidInput(format!("ball radius must be positive, got {r}")));
        }
        Ok(match *self {
            MetricSpace::Linf { dim } => (2.0 * r).powi(dim as i32),
            MetricSpace::L2 { dim } => unit_ball_volume(dim) * r.powi(dim as i32),
            MetricSpace::GaborProduct => {
                // Σ over integers |k| < r of the interval length 2(r − |k|).
                let kmax = r.ceil() as i64 - 1;
                (-kmax..=kmax).map(|k| 2.0 * (r - k.abs() as f64)).sum()
            }
        })
    }

    /// Strict membership `d(x, c) < r`.
    pub fn in_ball(&self, center: &[f64], r: f64, x: &[f64]) -> bool {
        let diff: Vec<f64> = x.iter().zip(center).map(|(a, b)| a - b).collect();
        self.norm(&diff) < r
    }

    /// `sup |f(x)|` over `d(x, e) ≤ 1` for the linear functional `f = row`,
    /// i.e. the dual norm. Used to turn hyperplane offsets into distances.
    pub fn dual_norm(&self, row: &[f64]) -> f64 {
        match self {
            MetricSpace::L2 { .. } => row.iter().map(|v| v * v).sum::<f64>().sqrt(),
            MetricSpace::Linf { .. } => row.iter().map(|v| v.abs()).sum(),
            MetricSpace::GaborProduct => row[0].abs().max(row[1].abs()),
        }
    }
}

/// Volume of the Euclidean unit ball, by `V_d = V_{d-2} · 2π / d`.
pub fn unit_ball_volume(dim: usize) -> f64 {
    let mut v = if dim.is_multiple_of(2) { 1.0 } else { 2.0 };
    let mut k = if dim.is_multiple_of(2) { 2 } else { 3 };
    while k <= dim {
        v *= 2.0 * std::f64::consts::PI / k as f64;
        k += 2;
    }
    v
}

/// Open metric ball.
#[derive(Clone, Debug, PartialEq)]
pub struct Ball {
    pub center: Vec<f64>,
    pub radius: f64,
    pub metric: MetricSpace,
}

impl Ball {
    pub fn new(center: Vec<f64>, radius: f64, metric: MetricSpace) -> Result<Self> {
        metric.check_point(&center)?;
        if !(radius > 0.0 && radius.is_finite()) {
            return invalid(format!("ball radius must be positive, got {radius}"));
        }
        Ok(Ball { center, radius, metric })
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        self.metric.in_ball(&self.center, self.radius, x)
    }

    pub fn translate(&self, tau: &[f64]) -> Ball {
        Ball {
            center: self.center.iter().zip(tau).map(|(c, t)| c + t).collect(),
            radius: self.radius,
            metric: self.metric,
        }
    }

    pub fn measure(&self) -> f64 {
        self.metric.ball_measure(self.radius).expect("radius validated")
    }
}
