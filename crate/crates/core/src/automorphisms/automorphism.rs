use crate::error::{invalid, Error, Result};
use crate::linalg::Matrix;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AutomorphismKind {
    Matrix {
        matrix: Matrix,
    },
    MatrixPower {
        base: Matrix,
        exponent: i64,
    },
    /// `[[a, 0], [s√a, √a]]`: parabolic scaling followed by a shear.
    Shearlet {
        a: f64,
        s: f64,
    },
    /// `(ξ, k) ↦ (ξ − k p, k)` on ℝ × ℤ.
    GaborShift {
        p: f64,
    },
}

/// Dual automorphism α̂ realized as a linear map on frequency points.
#[derive(Clone, Debug, PartialEq)]
pub struct Automorphism {
    kind: AutomorphismKind,
    forward: Matrix,
    inverse: Matrix,
}

impl Automorphism {
    pub fn matrix(m: Matrix) -> Result<Self> {
        let inverse = m.inverse()?;
        Ok(Automorphism {
            kind: AutomorphismKind::Matrix { matrix: m.clone() },
            forward: m,
            inverse,
        })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        Self::matrix(Matrix::from_rows(rows)?)
    }

    pub fn power(base: &Matrix, exponent: i64) -> Result<Self> {
        let binv = base.inverse()?;
        let forward = if exponent >= 0 {
            base.powi(exponent)?
        } else {
            binv.powi(-exponent)?
        };
        let inverse = if exponent >= 0 {
            binv.powi(exponent)?
        } else {
            base.powi(-exponent)?
        };
        if forward
            .as_slice()
            .iter()
            .chain(inverse.as_slice())
            .any(|v| !v.is_finite())
        {
            return invalid(format!("matrix power {exponent} overflows"));
        }
        Ok(Automorphism {
            kind: AutomorphismKind::MatrixPower {
                base: base.clone(),
                exponent,
            },
            forward,
            inverse,
        })
    }

    pub fn shearlet(a: f64, s: f64) -> Result<Self> {
        if !(a > 0.0 && a.is_finite() && s.is_finite()) {
            return invalid(format!("shearlet needs a > 0 and finite s, got a = {a}, s = {s}"));
        }
        let ra = a.sqrt();
        let forward = Matrix::from_row_slice(2, &[a, 0.0, s * ra, ra]);
        let inverse = Matrix::from_row_slice(2, &[1.0 / a, 0.0, -s / a, 1.0 / ra]);
        Ok(Automorphism {
            kind: AutomorphismKind::Shearlet { a, s },
            forward,
            inverse,
        })
    }

    pub fn gabor_shift(p: f64) -> Result<Self> {
        if !p.is_finite() {
            return invalid("Gabor shift must be finite");
        }
        Ok(Automorphism {
            kind: AutomorphismKind::GaborShift { p },
            forward: Matrix::from_row_slice(2, &[1.0, -p, 0.0, 1.0]),
            inverse: Matrix::from_row_slice(2, &[1.0, p, 0.0, 1.0]),
        })
    }

    pub fn identity(dim: usize) -> Self {
        Self::matrix(Matrix::identity(dim)).expect("identity")
    }

    pub fn kind(&self) -> &AutomorphismKind {
        &self.kind
    }

    pub fn is_gabor(&self) -> bool {
        matches!(self.kind, AutomorphismKind::GaborShift { .. })
    }

    pub fn dim(&self) -> usize {
        self.forward.dim()
    }

    pub fn forward(&self) -> &Matrix {
        &self.forward
    }

    pub fn inverse_matrix(&self) -> &Matrix {
        &self.inverse
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.forward.mul_vec(x)
    }

    pub fn apply_inverse(&self, x: &[f64]) -> Vec<f64> {
        self.inverse.mul_vec(x)
    }

    /// α̂⁻¹ as an automorphism of the same flavour where one exists.
    pub fn inverse(&self) -> Automorphism {
        let kind = match &self.kind {
            AutomorphismKind::GaborShift { p } => AutomorphismKind::GaborShift { p: -p },
            AutomorphismKind::MatrixPower { base, exponent } => AutomorphismKind::MatrixPower {
                base: base.clone(),
                exponent: -exponent,
            },
            _ => AutomorphismKind::Matrix {
                matrix: self.inverse.clone(),
            },
        };
        Automorphism {
            kind,
            forward: self.inverse.clone(),
            inverse: self.forward.clone(),
        }
    }

    /// Modulus δ: the factor by which α̂ scales Haar measure.
    pub fn jacobian(&self) -> f64 {
        match &self.kind {
            AutomorphismKind::Shearlet { a, .. } => a.powf(1.5),
            AutomorphismKind::GaborShift { .. } => 1.0,
            AutomorphismKind::MatrixPower { base, exponent } => base.det().abs().powf(*exponent as f64),
            AutomorphismKind::Matrix { matrix } => matrix.det().abs(),
        }
    }

    pub fn compose(&self, other: &Automorphism) -> Result<Automorphism> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: other.dim(),
            });
        }
        Self::matrix(self.forward.mul(&other.forward))
    }
}
