use super::MetricSpace;
use crate::error::{check_dim, invalid, Error, Result};
use crate::linalg::Matrix;
use serde::{Deserialize, Serialize};

/// Full-rank lattice `Γ⊥ = B ℤ^d` with fundamental domain `B [0,1)^d`.
///
/// A Gabor lattice is `cℤ × {0}` inside ℝ × ℤ; its base basis is the 1×1
/// matrix `[c]` and points carry a zero modulation coordinate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Lattice {
    basis: Matrix,
    inverse: Matrix,
    gabor: bool,
}

impl Lattice {
    pub fn new(basis: Matrix) -> Result<Self> {
        let inverse = basis.inverse()?;
        if basis.det() == 0.0 {
            return Err(Error::SingularMatrix);
        }
        Ok(Lattice {
            basis,
            inverse,
            gabor: false,
        })
    }

    /// Lattice whose generators are the given rows, read as columns.
    pub fn from_columns(cols: &[Vec<f64>]) -> Result<Self> {
        Self::new(Matrix::from_rows(cols)?.transpose())
    }

    pub fn integer(dim: usize) -> Self {
        Self::new(Matrix::identity(dim)).expect("identity is invertible")
    }

    /// `cℤ × {0}` in ℝ × ℤ.
    pub fn gabor(spacing: f64) -> Result<Self> {
        if !(spacing.is_finite() && spacing != 0.0) {
            return invalid(format!("Gabor lattice spacing must be nonzero, got {spacing}"));
        }
        let basis = Matrix::diag(&[spacing.abs()]);
        Ok(Lattice {
            inverse: basis.inverse()?,
            basis,
            gabor: true,
        })
    }

    pub fn is_gabor(&self) -> bool {
        self.gabor
    }

    /// Rank of the lattice (dimension of the base space).
    pub fn rank(&self) -> usize {
        self.basis.dim()
    }

    /// Number of coordinates of an ambient point.
    pub fn dim(&self) -> usize {
        self.rank() + usize::from(self.gabor)
    }

    pub fn basis(&self) -> &Matrix {
        &self.basis
    }

    pub fn basis_inverse(&self) -> &Matrix {
        &self.inverse
    }

    pub fn covolume(&self) -> f64 {
        self.basis.det().abs()
    }

    pub fn check_metric(&self, metric: &MetricSpace) -> Result<()> {
        let ok = if self.gabor {
            metric.is_gabor()
        } else {
            !metric.is_gabor() && metric.dim() == self.rank()
        };
        if ok {
            Ok(())
        } else {
            Err(Error::IncompatibleMetric {
                metric: metric.name(),
                what: format!(
                    "a lattice of ambient dimension {}{}",
                    self.dim(),
                    if self.gabor { " (Gabor)" } else { "" }
                ),
            })
        }
    }

    /// Ambient lattice point `B m` (with a trailing zero for Gabor).
    pub fn point(&self, m: &[i64]) -> Vec<f64> {
        let mf: Vec<f64> = m.iter().map(|&v| v as f64).collect();
        let mut p = self.basis.mul_vec(&mf);
        if self.gabor {
            p.push(0.0);
        }
        p
    }

    /// Coordinates `u = B⁻¹ξ` of the base part of `ξ`.
    pub fn coords(&self, xi: &[f64]) -> Vec<f64> {
        self.inverse.mul_vec(&xi[..self.rank()])
    }

    /// Splits `ξ = λ + ω` with `λ = Bm ∈ Γ⊥` and `ω` in the fundamental
    /// domain. Returns `(m, ω)`.
    pub fn reduce(&self, xi: &[f64]) -> Result<(Vec<i64>, Vec<f64>)> {
        check_dim(self.dim(), xi.len())?;
        let u = self.coords(xi);
        let mut m: Vec<i64> = u.iter().map(|v| v.floor() as i64).collect();
        let mut omega = self.residual(xi, &m);
        // Rounding can leave ω just outside [0,1)^d in lattice coordinates.
        for _ in 0..4 {
            let w = self.coords(&omega);
            let mut moved = false;
            for i in 0..self.rank() {
                if w[i] < 0.0 {
                    m[i] -= 1;
                    moved = true;
                } else if w[i] >= 1.0 {
                    m[i] += 1;
                    moved = true;
                }
            }
            if !moved {
                break;
            }
            omega = self.residual(xi, &m);
        }
        Ok((m, omega))
    }

    fn residual(&self, xi: &[f64], m: &[i64]) -> Vec<f64> {
        let lam = self.point(m);
        xi.iter().zip(&lam).map(|(a, b)| a - b).collect()
    }

    pub fn in_fundamental_domain(&self, xi: &[f64]) -> bool {
        self.coords(xi).iter().all(|&u| (0.0..1.0).contains(&u))
    }

    /// Ambient point `B u` for unit-cube coordinates `u`.
    pub fn from_coords(&self, u: &[f64]) -> Vec<f64> {
        let mut p = self.basis.mul_vec(u);
        if self.gabor {
            p.push(0.0);
        }
        p
    }

    /// Integer ranges containing every `m` with `Bm` in the base box
    /// `[lo, hi]` (closed). Interval arithmetic with a small outward margin;
    /// callers filter the candidates exactly.
    pub fn index_ranges(&self, lo: &[f64], hi: &[f64]) -> Vec<(i64, i64)> {
        let d = self.rank();
        (0..d)
            .map(|i| {
                let (mut a, mut b) = (0.0, 0.0);
                for j in 0..d {
                    let c = self.inverse[(i, j)];
                    let (x, y) = (c * lo[j], c * hi[j]);
                    a += x.min(y);
                    b += x.max(y);
                }
                let slack = 1e-9 * (1.0 + a.abs().max(b.abs()));
                ((a - slack).ceil() as i64, (b + slack).floor() as i64)
            })
            .collect()
    }

    /// Bounding box of the fundamental domain in base coordinates.
    pub fn domain_bounding_box(&self) -> (Vec<f64>, Vec<f64>) {
        let d = self.rank();
        let mut lo = vec![0.0; d];
        let mut hi = vec![0.0; d];
        for i in 0..d {
            for j in 0..d {
                let c = self.basis[(i, j)];
                if c < 0.0 {
                    lo[i] += c;
                } else {
                    hi[i] += c;
                }
            }
        }
        (lo, hi)
    }

    /// Distance (in `metric`) from `ξ` to the boundary of the lattice cell
    /// that contains it.
    pub fn cell_boundary_distance(&self, xi: &[f64], metric: &MetricSpace) -> f64 {
        let u = self.coords(xi);
        let base_metric = if self.gabor { MetricSpace::l2(1) } else { *metric };
        (0..self.rank())
            .map(|i| {
                let f = u[i] - u[i].floor();
                let row = self.inverse.row(i);
                f.min(1.0 - f) / base_metric.dual_norm(row)
            })
            .fold(f64::INFINITY, f64::min)
    }
}

/// Iterates over every integer vector in the product of closed ranges.
pub fn for_each_index<F: FnMut(&[i64])>(ranges: &[(i64, i64)], mut f: F) {
    if ranges.iter().any(|(a, b)| a > b) {
        return;
    }
    let mut m: Vec<i64> = ranges.iter().map(|r| r.0).collect();
    loop {
        f(&m);
        let mut k = 0;
        loop {
            if k == m.len() {
                return;
            }
            m[k] += 1;
            if m[k] <= ranges[k].1 {
                break;
            }
            m[k] = ranges[k].0;
            k += 1;
        }
    }
}

pub fn range_count(ranges: &[(i64, i64)]) -> f64 {
    ranges.iter().map(|(a, b)| (b - a + 1).max(0) as f64).product()
}
