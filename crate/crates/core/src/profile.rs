//! Frequency-side profiles ψ̂ (or Gabor windows ĝ).

use crate::error::{invalid, Result};
use crate::quadrature::{gl, Neumaier};
use serde::{Deserialize, Serialize};

/// Half-open box `[lo, hi)` carrying a constant value.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValueBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub value: f64,
}

impl ValueBox {
    pub fn contains(&self, x: &[f64]) -> bool {
        self.lo
            .iter()
            .zip(&self.hi)
            .zip(x)
            .all(|((&l, &h), &v)| l <= v && v < h)
    }

    pub fn volume(&self) -> f64 {
        self.lo.iter().zip(&self.hi).map(|(l, h)| h - l).product()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Representation {
    PiecewiseConstant {
        boxes: Vec<ValueBox>,
    },
    /// Uniform grid on `[lo, hi]` with `counts[i]` nodes along axis `i`,
    /// values in row-major order (last axis fastest), multilinear
    /// interpolation inside the grid and zero outside `[lo, hi)`.
    SampledGrid {
        lo: Vec<f64>,
        hi: Vec<f64>,
        counts: Vec<usize>,
        values: Vec<f64>,
    },
    /// Tensor bump `amplitude · Π (1 − ((x_i − c_i)/w_i)²)^power` on the open
    /// box `|x_i − c_i| < w_i`.
    Bump {
        center: Vec<f64>,
        half_widths: Vec<f64>,
        amplitude: f64,
        power: u32,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrequencyProfile {
    pub repr: Representation,
    /// For profiles on ℝ × ℤ: the modulation index κ the profile lives on.
    /// The ambient point is then `(ξ, k)` and the value is zero off `k = κ`.
    pub gabor_index: Option<i64>,
}

impl FrequencyProfile {
    pub fn piecewise_constant(boxes: Vec<ValueBox>) -> Result<Self> {
        if boxes.is_empty() {
            return Ok(Self::zero(1));
        }
        let d = boxes[0].lo.len();
        if d == 0 {
            return invalid("profile boxes must have positive dimension");
        }
        for b in &boxes {
            if b.lo.len() != d || b.hi.len() != d {
                return invalid("profile boxes have mixed dimensions");
            }
            if !b.value.is_finite() {
                return invalid("profile value must be finite");
            }
            for (l, h) in b.lo.iter().zip(&b.hi) {
                if !(l.is_finite() && h.is_finite() && l < h) {
                    return invalid(format!("profile box needs finite lo < hi, got [{l}, {h})"));
                }
            }
        }
        for (i, a) in boxes.iter().enumerate() {
            for b in &boxes[i + 1..] {
                let overlap = (0..d).all(|k| a.lo[k] < b.hi[k] && b.lo[k] < a.hi[k]);
                if overlap {
                    return invalid("profile boxes must be disjoint");
                }
            }
        }
        Ok(FrequencyProfile {
            repr: Representation::PiecewiseConstant { boxes },
            gabor_index: None,
        })
    }

    /// Indicator of a union of 1-dimensional intervals.
    pub fn intervals(parts: &[(f64, f64)], value: f64) -> Result<Self> {
        Self::piecewise_constant(
            parts
                .iter()
                .map(|&(lo, hi)| ValueBox {
                    lo: vec![lo],
                    hi: vec![hi],
                    value,
                })
                .collect(),
        )
    }

    pub fn zero(dim: usize) -> Self {
        FrequencyProfile {
            repr: Representation::PiecewiseConstant {
                boxes: vec![ValueBox {
                    lo: vec![0.0; dim],
                    hi: vec![1.0; dim],
                    value: 0.0,
                }],
            },
            gabor_index: None,
        }
    }

    pub fn sampled_grid(lo: Vec<f64>, hi: Vec<f64>, counts: Vec<usize>, values: Vec<f64>) -> Result<Self> {
        let d = lo.len();
        if d == 0 || hi.len() != d || counts.len() != d {
            return invalid("sampled grid: lo, hi and counts must share a positive dimension");
        }
        for i in 0..d {
            if !(lo[i].is_finite() && hi[i].is_finite() && lo[i] < hi[i]) {
                return invalid("sampled grid needs finite lo < hi on every axis");
            }
            if counts[i] < 2 {
                return invalid("sampled grid needs at least two nodes per axis");
            }
        }
        if values.len() != counts.iter().product::<usize>() {
            return invalid(format!(
                "sampled grid expects {} values, got {}",
                counts.iter().product::<usize>(),
                values.len()
            ));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return invalid("sampled grid values must be finite");
        }
        Ok(FrequencyProfile {
            repr: Representation::SampledGrid { lo, hi, counts, values },
            gabor_index: None,
        })
    }

    pub fn bump(center: Vec<f64>, half_widths: Vec<f64>, amplitude: f64, power: u32) -> Result<Self> {
        if center.is_empty() || center.len() != half_widths.len() {
            return invalid("bump: center and half_widths must share a positive dimension");
        }
        if half_widths.iter().any(|w| !(w.is_finite() && *w > 0.0)) || center.iter().any(|c| !c.is_finite()) {
            return invalid("bump half-widths must be positive and finite");
        }
        if !amplitude.is_finite() || power == 0 {
            return invalid("bump needs a finite amplitude and power >= 1");
        }
        Ok(FrequencyProfile {
            repr: Representation::Bump {
                center,
                half_widths,
                amplitude,
                power,
            },
            gabor_index: None,
        })
    }

    /// Places a profile on the line `k = kappa` of ℝ × ℤ.
    pub fn on_gabor_line(mut self, kappa: i64) -> Result<Self> {
        if self.base_dim() != 1 {
            return invalid("Gabor profiles need a 1-dimensional base");
        }
        self.gabor_index = Some(kappa);
        Ok(self)
    }

    pub fn base_dim(&self) -> usize {
        match &self.repr {
            Representation::PiecewiseConstant { boxes } => boxes[0].lo.len(),
            Representation::SampledGrid { lo, .. } => lo.len(),
            Representation::Bump { center, .. } => center.len(),
        }
    }

    /// Dimension of the points the profile is evaluated at.
    pub fn dim(&self) -> usize {
        self.base_dim() + usize::from(self.gabor_index.is_some())
    }

    pub fn is_piecewise_constant(&self) -> bool {
        matches!(self.repr, Representation::PiecewiseConstant { .. })
    }

    pub fn is_zero(&self) -> bool {
        match &self.repr {
            Representation::PiecewiseConstant { boxes } => boxes.iter().all(|b| b.value == 0.0),
            Representation::SampledGrid { values, .. } => values.iter().all(|v| *v == 0.0),
            Representation::Bump { amplitude, .. } => *amplitude == 0.0,
        }
    }

    /// Value at an ambient point.
    pub fn eval(&self, x: &[f64]) -> f64 {
        match self.gabor_index {
            Some(k) => {
                if x[1] == k as f64 {
                    self.eval_base(&x[..1])
                } else {
                    0.0
                }
            }
            None => self.eval_base(x),
        }
    }

    /// Value of the base profile (ignores the modulation index).
    pub fn eval_base(&self, x: &[f64]) -> f64 {
        match &self.repr {
            Representation::PiecewiseConstant { boxes } => {
                boxes.iter().find(|b| b.contains(x)).map_or(0.0, |b| b.value)
            }
            Representation::SampledGrid { lo, hi, counts, values } => interpolate(lo, hi, counts, values, x),
            Representation::Bump {
                center,
                half_widths,
                amplitude,
                power,
            } => {
                let mut v = *amplitude;
                for i in 0..center.len() {
                    let t = (x[i] - center[i]) / half_widths[i];
                    if t.abs() >= 1.0 {
                        return 0.0;
                    }
                    v *= (1.0 - t * t).powi(*power as i32);
                }
                v
            }
        }
    }

    /// Boxes (in base coordinates) outside of which the profile vanishes.
    pub fn support_boxes(&self) -> Vec<(Vec<f64>, Vec<f64>)> {
        match &self.repr {
            Representation::PiecewiseConstant { boxes } => boxes
                .iter()
                .filter(|b| b.value != 0.0)
                .map(|b| (b.lo.clone(), b.hi.clone()))
                .collect(),
            Representation::SampledGrid { lo, hi, values, .. } => {
                if values.iter().all(|v| *v == 0.0) {
                    vec![]
                } else {
                    vec![(lo.clone(), hi.clone())]
                }
            }
            Representation::Bump {
                center,
                half_widths,
                amplitude,
                ..
            } => {
                if *amplitude == 0.0 {
                    vec![]
                } else {
                    let lo = center.iter().zip(half_widths).map(|(c, w)| c - w).collect();
                    let hi = center.iter().zip(half_widths).map(|(c, w)| c + w).collect();
                    vec![(lo, hi)]
                }
            }
        }
    }

    /// Bounding box of the support, `None` for the zero profile.
    pub fn support_box(&self) -> Option<(Vec<f64>, Vec<f64>)> {
        let boxes = self.support_boxes();
        let d = self.base_dim();
        let mut it = boxes.into_iter();
        let (mut lo, mut hi) = it.next()?;
        for (l, h) in it {
            for i in 0..d {
                lo[i] = lo[i].min(l[i]);
                hi[i] = hi[i].max(h[i]);
            }
        }
        Some((lo, hi))
    }

    /// Coordinates along `axis` where the profile (or one of its
    /// derivatives) may jump.
    pub fn breakpoints(&self, axis: usize) -> Vec<f64> {
        match &self.repr {
            Representation::PiecewiseConstant { boxes } => {
                boxes.iter().flat_map(|b| [b.lo[axis], b.hi[axis]]).collect()
            }
            Representation::SampledGrid { lo, hi, counts, .. } => {
                let n = counts[axis];
                let h = (hi[axis] - lo[axis]) / (n - 1) as f64;
                (0..n).map(|k| lo[axis] + h * k as f64).collect()
            }
            Representation::Bump {
                center, half_widths, ..
            } => {
                vec![center[axis] - half_widths[axis], center[axis] + half_widths[axis]]
            }
        }
    }

    /// Multiplies every value by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        let mut out = self.clone();
        match &mut out.repr {
            Representation::PiecewiseConstant { boxes } => boxes.iter_mut().for_each(|b| b.value *= c),
            Representation::SampledGrid { values, .. } => values.iter_mut().for_each(|v| *v *= c),
            Representation::Bump { amplitude, .. } => *amplitude *= c,
        }
        out
    }

    /// Squared L² norm of the base profile.
    pub fn norm_sq(&self) -> f64 {
        match &self.repr {
            Representation::PiecewiseConstant { boxes } => boxes
                .iter()
                .map(|b| b.value * b.value * b.volume())
                .collect::<Neumaier>()
                .value(),
            Representation::SampledGrid { lo, hi, counts, .. } => {
                // The interpolant squared is a polynomial of degree 2 per axis
                // on every grid cell; a 2-point rule per axis is exact.
                let cells: Vec<usize> = counts.iter().map(|c| c - 1).collect();
                tensor_cells(|p| self.eval_base(p).powi(2), lo, hi, &cells, 2)
            }
            Representation::Bump {
                half_widths,
                amplitude,
                power,
                ..
            } => {
                // Degree 4p polynomial: 2p + 1 nodes integrate it exactly.
                let order = (2 * *power as usize + 1).clamp(2, 64);
                let one = gl(|t| (1.0 - t * t).powi(2 * *power as i32), -1.0, 1.0, order);
                amplitude * amplitude * half_widths.iter().map(|w| w * one).product::<f64>()
            }
        }
    }
}

fn interpolate(lo: &[f64], hi: &[f64], counts: &[usize], values: &[f64], x: &[f64]) -> f64 {
    let d = lo.len();
    let mut base = 0usize;
    let mut frac = [0.0f64; 8];
    let mut idx = [0usize; 8];
    assert!(d <= 8, "sampled grids are limited to 8 dimensions");
    for i in 0..d {
        if !(x[i] >= lo[i] && x[i] < hi[i]) {
            return 0.0;
        }
        let cells = counts[i] - 1;
        let t = (x[i] - lo[i]) / (hi[i] - lo[i]) * cells as f64;
        let k = (t.floor() as usize).min(cells - 1);
        idx[i] = k;
        frac[i] = t - k as f64;
    }
    let mut strides = [0usize; 8];
    let mut s = 1;
    for i in (0..d).rev() {
        strides[i] = s;
        s *= counts[i];
    }
    for i in 0..d {
        base += idx[i] * strides[i];
    }
    let mut acc = 0.0;
    for corner in 0..(1usize << d) {
        let mut w = 1.0;
        let mut off = base;
        for i in 0..d {
            if corner >> i & 1 == 1 {
                w *= frac[i];
                off += strides[i];
            } else {
                w *= 1.0 - frac[i];
            }
        }
        if w != 0.0 {
            acc += w * values[off];
        }
    }
    acc
}

/// Tensor rule with a different number of cells along each axis.
pub(crate) fn tensor_cells<F: FnMut(&[f64]) -> f64>(
    f: F,
    lo: &[f64],
    hi: &[f64],
    cells: &[usize],
    order: usize,
) -> f64 {
    let axes: Vec<Vec<f64>> = (0..lo.len())
        .map(|i| crate::quadrature::uniform_breaks(lo[i], hi[i], cells[i]))
        .collect();
    crate::quadrature::tensor_breaks(f, &axes, order)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shannon_indicator() {
        let p = FrequencyProfile::intervals(&[(-1.0, -0.5), (0.5, 1.0)], 1.0).unwrap();
        assert_eq!(p.eval(&[0.5]), 1.0);
        assert_eq!(p.eval(&[1.0]), 0.0);
        assert_eq!(p.eval(&[-1.0]), 1.0);
        assert_eq!(p.eval(&[-0.5]), 0.0);
        assert_eq!(p.norm_sq(), 1.0);
    }

    #[test]
    fn overlapping_boxes_rejected() {
        assert!(FrequencyProfile::intervals(&[(0.0, 1.0), (0.5, 2.0)], 1.0).is_err());
    }

    #[test]
    fn grid_interpolates_linearly() {
        let p = FrequencyProfile::sampled_grid(vec![-1.5], vec![1.5], vec![3], vec![0.0, 1.0, 0.0]).unwrap();
        assert!((p.eval(&[0.75]) - 0.5).abs() < 1e-15);
        assert_eq!(p.eval(&[0.0]), 1.0);
        assert!((p.norm_sq() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn bump_norm() {
        // ∫(1-t²)² dt over [-1,1] = 16/15.
        let p = FrequencyProfile::bump(vec![0.0], vec![1.0], 1.0, 1).unwrap();
        assert!((p.norm_sq() - 16.0 / 15.0).abs() < 1e-14);
    }

    #[test]
    fn gabor_line() {
        let g = FrequencyProfile::intervals(&[(0.0, 1.0)], 1.0)
            .unwrap()
            .on_gabor_line(1)
            .unwrap();
        assert_eq!(g.dim(), 2);
        assert_eq!(g.eval(&[0.3, 1.0]), 1.0);
        assert_eq!(g.eval(&[0.3, 0.0]), 0.0);
    }
}
