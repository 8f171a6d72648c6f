use super::lattice::for_each_index;
use super::Lattice;
use crate::error::{invalid, Error, Result};
use crate::profile::FrequencyProfile;
use crate::quadrature::{clean_breaks, tensor_breaks, uniform_breaks, Neumaier, DEFAULT_ORDER};
use serde::{Deserialize, Serialize};

/// `ξ ↦ Σ_λ φ(ξ + λ)`, with the λ-sum cut exactly by the support box.
#[derive(Clone, Debug)]
pub struct Periodized<'a> {
    profile: &'a FrequencyProfile,
    lattice: &'a Lattice,
    lo: Vec<f64>,
    hi: Vec<f64>,
}

pub fn periodize<'a>(profile: &'a FrequencyProfile, lattice: &'a Lattice) -> Result<Periodized<'a>> {
    if profile.dim() != lattice.dim() || profile.gabor_index.is_some() != lattice.is_gabor() {
        return Err(Error::DimensionMismatch {
            expected: lattice.dim(),
            got: profile.dim(),
        });
    }
    let (lo, hi) = match profile.support_box() {
        Some(b) => b,
        None => (vec![0.0; lattice.rank()], vec![0.0; lattice.rank()]),
    };
    if lo.iter().chain(&hi).any(|v| !v.is_finite()) {
        return invalid("periodization needs a bounded support box");
    }
    Ok(Periodized {
        profile,
        lattice,
        lo,
        hi,
    })
}

impl Periodized<'_> {
    pub fn eval(&self, xi: &[f64]) -> f64 {
        let r = self.lattice.rank();
        // λ with ξ + λ inside the support box.
        let lo: Vec<f64> = (0..r).map(|i| self.lo[i] - xi[i]).collect();
        let hi: Vec<f64> = (0..r).map(|i| self.hi[i] - xi[i]).collect();
        let ranges = self.lattice.index_ranges(&lo, &hi);
        let mut s = Neumaier::default();
        let mut p = xi.to_vec();
        for_each_index(&ranges, |m| {
            let lam = self.lattice.point(m);
            for i in 0..p.len() {
                p[i] = xi[i] + lam[i];
            }
            s.add(self.profile.eval(&p));
        });
        s.value()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeilResidual {
    /// `∫ φ` over the whole group.
    pub whole: f64,
    /// `∫_Ω Σ_λ φ(ξ + λ)`.
    pub unfolded: f64,
    pub residual: f64,
    pub cells: usize,
    pub order: usize,
}

/// Both sides of the unfolding identity with the same composite
/// Gauss-Legendre rule: `cells` panels per axis, `order` nodes per panel.
/// The left side runs over the support box, the right side over the unit
/// cube in lattice coordinates (scaled by the covolume). Panels are also
/// split at the profile's breakpoints, and for a diagonal basis at their
/// images in the cell, so piecewise-polynomial profiles integrate exactly.
pub fn weil_residual_with(
    profile: &FrequencyProfile,
    lattice: &Lattice,
    cells: usize,
    order: usize,
) -> Result<WeilResidual> {
    if cells == 0 {
        return invalid("weil_residual needs at least one cell per axis");
    }
    let per = periodize(profile, lattice)?;
    let r = lattice.rank();
    let kappa = profile.gabor_index.map(|k| k as f64);
    let lift = |x: &[f64]| -> Vec<f64> {
        let mut p = x.to_vec();
        if let Some(k) = kappa {
            p.push(k);
        }
        p
    };
    let whole = match profile.support_box() {
        Some((lo, hi)) => {
            let axes: Vec<Vec<f64>> = (0..r)
                .map(|i| {
                    let mut b = uniform_breaks(lo[i], hi[i], cells);
                    b.extend(profile.breakpoints(i));
                    clean_breaks(b, lo[i], hi[i])
                })
                .collect();
            tensor_breaks(|x| profile.eval(&lift(x)), &axes, order)
        }
        None => 0.0,
    };
    let basis = lattice.basis();
    let diagonal = (0..r).all(|i| (0..r).all(|j| i == j || basis[(i, j)] == 0.0));
    let cell_axes: Vec<Vec<f64>> = (0..r)
        .map(|i| {
            let mut b = uniform_breaks(0.0, 1.0, cells);
            if diagonal {
                b.extend(profile.breakpoints(i).iter().map(|x| {
                    let u = x / basis[(i, i)];
                    u - u.floor()
                }));
            }
            clean_breaks(b, 0.0, 1.0)
        })
        .collect();
    let unfolded = lattice.covolume()
        * tensor_breaks(
            |u| {
                let base = basis.mul_vec(u);
                per.eval(&lift(&base))
            },
            &cell_axes,
            order,
        );
    Ok(WeilResidual {
        whole,
        unfolded,
        residual: (whole - unfolded).abs(),
        cells,
        order,
    })
}

pub fn weil_residual(profile: &FrequencyProfile, lattice: &Lattice) -> Result<f64> {
    Ok(weil_residual_with(profile, lattice, 16, DEFAULT_ORDER)?.residual)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn indicator_tiles_exactly() {
        let p = FrequencyProfile::intervals(&[(0.0, 1.0)], 1.0).unwrap();
        let l = Lattice::integer(1);
        assert_eq!(weil_residual(&p, &l).unwrap(), 0.0);
        let per = periodize(&p, &l).unwrap();
        for x in [0.0, 0.3, 0.999] {
            assert_eq!(per.eval(&[x]), 1.0);
        }
    }

    #[test]
    fn zero_profile() {
        let l = Lattice::integer(2);
        assert_eq!(weil_residual(&FrequencyProfile::zero(2), &l).unwrap(), 0.0);
    }

    #[test]
    fn triangular_bump() {
        let p = FrequencyProfile::sampled_grid(vec![-1.5], vec![1.5], vec![3], vec![0.0, 1.0, 0.0]).unwrap();
        let w = weil_residual_with(&p, &Lattice::integer(1), 16, 16).unwrap();
        assert!((w.whole - 1.5).abs() < 1e-13);
        assert!(w.residual < 1e-8, "{w:?}");
    }

    #[test]
    fn kinks_on_the_line_are_exact() {
        // Kinks at −1.3, 0.2, 1.7 land at non-dyadic points of Ω; the panels
        // follow them, so a two-point rule already integrates exactly.
        let p = FrequencyProfile::sampled_grid(vec![-1.3], vec![1.7], vec![3], vec![0.0, 1.0, 0.0]).unwrap();
        let w = weil_residual_with(&p, &Lattice::integer(1), 3, 2).unwrap();
        assert!((w.whole - 1.5).abs() < 1e-14 && w.residual < 1e-14, "{w:?}");
    }

    #[test]
    fn residual_shrinks_under_refinement() {
        // A sheared lattice: the kinks of the tent cross Ω obliquely.
        let p = FrequencyProfile::sampled_grid(
            vec![-1.3, -0.9],
            vec![1.7, 1.1],
            vec![3, 3],
            vec![0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0],
        )
        .unwrap();
        let l = Lattice::from_columns(&[vec![1.0, 0.21], vec![0.37, 1.0]]).unwrap();
        let r: Vec<f64> = [3, 6, 12]
            .iter()
            .map(|&c| weil_residual_with(&p, &l, c, 2).unwrap().residual)
            .collect();
        assert!(r[0] > r[1] && r[1] > r[2] && r[2] > 0.0, "{r:?}");
    }

    #[test]
    fn unbounded_rejected_via_dimension() {
        let p = FrequencyProfile::intervals(&[(0.0, 1.0)], 1.0).unwrap();
        assert!(periodize(&p, &Lattice::integer(2)).is_err());
    }
}
