use super::lipschitz::{check_compatible, lipschitz_constants, LipschitzConstants};
use super::Automorphism;
use crate::error::{invalid, Error, Result};
use crate::linalg::Matrix;
use crate::metric_lattice::MetricSpace;
use serde::{Deserialize, Serialize};

/// Parameter ↦ automorphism.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Generator {
    /// `j ↦ A^j`.
    MatrixPower { base: Matrix },
    /// `a ↦ a·I` on ℝ^dim.
    Dilation { dim: usize },
    /// `(a, s) ↦ [[a,0],[s√a,√a]]`.
    Shearlet,
    /// `j ↦ (ξ,k) ↦ (ξ − k·j·spacing, k)` for integer index sets, or
    /// `p ↦ (ξ − kp, k)` on a grid.
    GaborShift { spacing: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum IndexSet {
    /// `min..=max`, either bound possibly absent.
    Integers { min: Option<i64>, max: Option<i64> },
    /// Product grid of atoms, one axis per parameter.
    Grid { axes: Vec<Vec<f64>> },
    /// Continuous parameter `a ∈ (lo, hi)` with Lebesgue density.
    Interval { lo: f64, hi: f64 },
}

/// Density `m(h)` for continuous index sets, atom mass for discrete ones.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Weight {
    Constant {
        value: f64,
    },
    /// `scale · ratio^h₀`.
    Geometric {
        scale: f64,
        ratio: f64,
    },
    /// `scale · |h₀|^exponent`.
    Power {
        scale: f64,
        exponent: f64,
    },
}

impl Weight {
    pub fn constant(value: f64) -> Self {
        Weight::Constant { value }
    }

    pub fn eval(&self, params: &[f64]) -> f64 {
        match self {
            Weight::Constant { value } => *value,
            Weight::Geometric { scale, ratio } => scale * ratio.powf(params[0]),
            Weight::Power { scale, exponent } => scale * params[0].abs().powf(*exponent),
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match self {
            Weight::Constant { value } => *value >= 0.0 && value.is_finite(),
            Weight::Geometric { scale, ratio } => {
                *scale >= 0.0 && *ratio > 0.0 && scale.is_finite() && ratio.is_finite()
            }
            Weight::Power { scale, exponent } => *scale >= 0.0 && scale.is_finite() && exponent.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            invalid(format!("weight {self:?} must be nonnegative and finite"))
        }
    }
}

/// One parameter of a family together with its derived quantities.
#[derive(Clone, Debug)]
pub struct Member {
    pub params: Vec<f64>,
    pub automorphism: Automorphism,
    pub weight: f64,
    pub jacobian: f64,
    pub lipschitz: LipschitzConstants,
}

/// Which part of the family an integral or sum runs over.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LevelSet {
    All,
    /// `H_M = {h : L(h) ≤ M}`.
    AtMost {
        m: f64,
    },
    /// `H_M^c = {h : L(h) > M}`.
    Above {
        m: f64,
    },
}

impl LevelSet {
    pub fn contains(&self, upper: f64) -> bool {
        match *self {
            LevelSet::All => true,
            LevelSet::AtMost { m } => upper <= m,
            LevelSet::Above { m } => upper > m,
        }
    }
}

/// Default truncation for integer index sets that leave a bound open.
pub const DEFAULT_TRUNCATION: i64 = 30;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AutomorphismFamily {
    pub generator: Generator,
    pub index: IndexSet,
    pub weight: Weight,
    pub metric: MetricSpace,
}

impl AutomorphismFamily {
    pub fn new(generator: Generator, index: IndexSet, weight: Weight, metric: MetricSpace) -> Result<Self> {
        let f = AutomorphismFamily {
            generator,
            index,
            weight,
            metric,
        };
        f.validate()?;
        Ok(f)
    }

    /// `{A^j : min ≤ j ≤ max}` with unit weights.
    pub fn matrix_powers(base: Matrix, min: Option<i64>, max: Option<i64>, metric: MetricSpace) -> Result<Self> {
        Self::new(
            Generator::MatrixPower { base },
            IndexSet::Integers { min, max },
            Weight::constant(1.0),
            metric,
        )
    }

    pub fn with_weight(mut self, weight: Weight) -> Result<Self> {
        self.weight = weight;
        self.validate()?;
        Ok(self)
    }

    fn validate(&self) -> Result<()> {
        self.weight.validate()?;
        self.metric.validate()?;
        match (&self.generator, &self.index) {
            (Generator::MatrixPower { base }, IndexSet::Integers { .. }) => {
                base.inverse()?;
                if self.metric.is_gabor() || self.metric.dim() != base.dim() {
                    return Err(Error::IncompatibleMetric {
                        metric: self.metric.name(),
                        what: format!("{0}×{0} matrix powers", base.dim()),
                    });
                }
            }
            (Generator::Dilation { dim }, IndexSet::Interval { lo, hi }) => {
                if !(*lo >= 0.0 && lo < hi) {
                    return invalid(format!("dilation interval needs 0 ≤ lo < hi, got ({lo}, {hi})"));
                }
                self.check_dilation_metric(*dim)?;
            }
            (Generator::Dilation { dim }, IndexSet::Grid { axes }) => {
                if axes.len() != 1 || axes[0].iter().any(|a| !(*a > 0.0)) {
                    return invalid("dilation grid needs one axis of positive values");
                }
                self.check_dilation_metric(*dim)?;
            }
            (Generator::Shearlet, IndexSet::Grid { axes }) => {
                if axes.len() != 2 || axes[0].iter().any(|a| !(*a > 0.0)) {
                    return invalid("shearlet grid needs two axes (a > 0, s)");
                }
                if self.metric.is_gabor() || self.metric.dim() != 2 {
                    return Err(Error::IncompatibleMetric {
                        metric: self.metric.name(),
                        what: "shearlets on ℝ²".into(),
                    });
                }
            }
            (Generator::GaborShift { spacing }, IndexSet::Integers { .. } | IndexSet::Grid { .. }) => {
                if !spacing.is_finite() || *spacing == 0.0 {
                    return invalid("Gabor shift spacing must be finite and nonzero");
                }
                if let IndexSet::Grid { axes } = &self.index {
                    if axes.len() != 1 {
                        return invalid("Gabor shift grid needs exactly one axis");
                    }
                }
                if !self.metric.is_gabor() {
                    return Err(Error::IncompatibleMetric {
                        metric: self.metric.name(),
                        what: "Gabor shifts".into(),
                    });
                }
            }
            (g, i) => return invalid(format!("generator {g:?} cannot be indexed by {i:?}")),
        }
        if let IndexSet::Integers {
            min: Some(a),
            max: Some(b),
        } = self.index
        {
            if a > b {
                return invalid(format!("empty integer range {a}..={b}"));
            }
        }
        if let IndexSet::Grid { axes } = &self.index {
            if axes.iter().any(|a| a.is_empty() || a.iter().any(|v| !v.is_finite())) {
                return invalid("grid axes must be nonempty and finite");
            }
        }
        Ok(())
    }

    fn check_dilation_metric(&self, dim: usize) -> Result<()> {
        if self.metric.is_gabor() || self.metric.dim() != dim {
            return Err(Error::IncompatibleMetric {
                metric: self.metric.name(),
                what: format!("dilations of ℝ^{dim}"),
            });
        }
        Ok(())
    }

    /// Dimension of the points the family acts on.
    pub fn dim(&self) -> usize {
        self.metric.dim()
    }

    pub fn is_continuous(&self) -> bool {
        matches!(self.index, IndexSet::Interval { .. })
    }

    pub fn is_integer_indexed(&self) -> bool {
        matches!(self.index, IndexSet::Integers { .. })
    }

    /// Whether the index set is infinite and discrete.
    pub fn is_unbounded(&self) -> bool {
        matches!(
            self.index,
            IndexSet::Integers { min: None, .. } | IndexSet::Integers { max: None, .. }
        )
    }

    pub fn integer_bounds(&self) -> Option<(Option<i64>, Option<i64>)> {
        match self.index {
            IndexSet::Integers { min, max } => Some((min, max)),
            _ => None,
        }
    }

    pub fn automorphism(&self, params: &[f64]) -> Result<Automorphism> {
        match &self.generator {
            Generator::MatrixPower { base } => Automorphism::power(base, params[0] as i64),
            Generator::Dilation { dim } => Automorphism::matrix(Matrix::diag(&vec![params[0]; *dim])),
            Generator::Shearlet => Automorphism::shearlet(params[0], params[1]),
            Generator::GaborShift { spacing } => match self.index {
                IndexSet::Integers { .. } => Automorphism::gabor_shift(params[0] * spacing),
                _ => Automorphism::gabor_shift(params[0]),
            },
        }
    }

    pub fn member(&self, params: &[f64]) -> Result<Member> {
        let automorphism = self.automorphism(params)?;
        let lipschitz = self.lipschitz_of(params, &automorphism)?;
        Ok(Member {
            params: params.to_vec(),
            weight: self.weight.eval(params),
            jacobian: automorphism.jacobian(),
            automorphism,
            lipschitz,
        })
    }

    fn lipschitz_of(&self, params: &[f64], a: &Automorphism) -> Result<LipschitzConstants> {
        match &self.generator {
            // Scalar dilations scale every norm by a.
            Generator::Dilation { .. } => Ok(LipschitzConstants {
                lower: params[0],
                upper: params[0],
                method: super::LipschitzMethod::ClosedForm,
            }),
            _ => {
                check_compatible(a, &self.metric)?;
                lipschitz_constants(a, &self.metric)
            }
        }
    }

    pub fn member_at(&self, j: i64) -> Result<Member> {
        self.member(&[j as f64])
    }

    /// Parameters of a discrete truncation; open integer bounds default to
    /// `±truncation`.
    pub fn truncated_params(&self, truncation: i64) -> Result<Vec<Vec<f64>>> {
        match &self.index {
            IndexSet::Integers { min, max } => {
                let lo = min.unwrap_or(-truncation);
                let hi = max.unwrap_or(truncation);
                if lo > hi {
                    return invalid(format!("empty truncation {lo}..={hi}"));
                }
                Ok((lo..=hi).map(|j| vec![j as f64]).collect())
            }
            IndexSet::Grid { axes } => {
                let mut out = vec![vec![]];
                for axis in axes {
                    let mut next = Vec::with_capacity(out.len() * axis.len());
                    for p in &out {
                        for &v in axis {
                            let mut q: Vec<f64> = p.clone();
                            q.push(v);
                            next.push(q);
                        }
                    }
                    out = next;
                }
                Ok(out)
            }
            IndexSet::Interval { lo, hi } => {
                // Log-spaced probe of the interval (for classification only).
                let a = if *lo > 0.0 { *lo } else { hi.min(1.0) * 1e-3 };
                let b = if hi.is_finite() { *hi } else { a.max(1.0) * 1e6 };
                let n = 2 * truncation.max(1) as usize + 1;
                Ok((0..n)
                    .map(|k| vec![a * (b / a).powf(k as f64 / (n - 1) as f64)])
                    .collect())
            }
        }
    }

    /// Members of a discrete truncation, in parameter order.
    pub fn members(&self, truncation: i64) -> Result<Vec<Member>> {
        self.truncated_params(truncation)?
            .iter()
            .map(|p| self.member(p))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dyadic_family() {
        let f = AutomorphismFamily::matrix_powers(Matrix::diag(&[2.0]), None, None, MetricSpace::l2(1)).unwrap();
        let m = f.member_at(-3).unwrap();
        assert_eq!(m.automorphism.apply(&[1.0]), vec![0.125]);
        assert_eq!(m.lipschitz.lower, 0.125);
        assert_eq!(f.members(4).unwrap().len(), 9);
        assert!(f.is_unbounded());
    }

    #[test]
    fn shearlet_grid() {
        let f = AutomorphismFamily::new(
            Generator::Shearlet,
            IndexSet::Grid {
                axes: vec![vec![1.0, 4.0], vec![-1.0, 0.0, 1.0]],
            },
            Weight::constant(1.0),
            MetricSpace::linf(2),
        )
        .unwrap();
        let ms = f.members(0).unwrap();
        assert_eq!(ms.len(), 6);
        assert_eq!(ms[5].params, vec![4.0, 1.0]);
        assert_eq!(ms[5].jacobian, 8.0);
        for m in &ms {
            assert!(m.lipschitz.upper >= m.lipschitz.lower && m.lipschitz.lower > 0.0);
        }
    }

    #[test]
    fn gabor_spacing() {
        let f = AutomorphismFamily::new(
            Generator::GaborShift { spacing: 0.5 },
            IndexSet::Integers {
                min: Some(-2),
                max: Some(2),
            },
            Weight::constant(1.0),
            MetricSpace::gabor(),
        )
        .unwrap();
        let m = f.member_at(2).unwrap();
        assert_eq!(m.lipschitz.upper, 2.0);
        assert_eq!(m.automorphism.apply(&[0.0, 1.0]), vec![-1.0, 1.0]);
    }

    #[test]
    fn mismatches_rejected() {
        assert!(AutomorphismFamily::new(
            Generator::Shearlet,
            IndexSet::Integers { min: None, max: None },
            Weight::constant(1.0),
            MetricSpace::l2(2)
        )
        .is_err());
        assert!(AutomorphismFamily::matrix_powers(Matrix::diag(&[2.0, 1.0]), None, None, MetricSpace::l2(3)).is_err());
        assert!(AutomorphismFamily::matrix_powers(Matrix::diag(&[2.0]), Some(3), Some(1), MetricSpace::l2(1)).is_err());
        assert!(AutomorphismFamily::new(
            Generator::Dilation { dim: 1 },
            IndexSet::Interval { lo: 0.0, hi: 1.0 },
            Weight::Constant { value: -1.0 },
            MetricSpace::l2(1)
        )
        .is_err());
    }

    #[test]
    fn level_sets_partition() {
        for u in [0.5, 1.0, 1.5] {
            let a = LevelSet::AtMost { m: 1.0 }.contains(u);
            let b = LevelSet::Above { m: 1.0 }.contains(u);
            assert!(a ^ b);
        }
    }
}
