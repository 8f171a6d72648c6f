use super::functional::{frame_functional_with, FrameOptions};
use crate::automorphisms::{AutomorphismFamily, LevelSet};
use crate::error::{invalid, Result};
use crate::metric_lattice::Lattice;
use crate::monte_carlo::rng;
use crate::profile::FrequencyProfile;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Settings for [`random_ensemble`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleOptions {
    pub size: usize,
    /// Support band `[lo, hi]` on the line.
    pub band: (f64, f64),
    pub pieces: usize,
    pub seed: u64,
    /// Place every profile on this modulation line.
    pub gabor_line: Option<i64>,
}

impl Default for EnsembleOptions {
    fn default() -> Self {
        EnsembleOptions {
            size: 50,
            band: (0.1, 4.0),
            pieces: 8,
            seed: 1,
            gabor_line: None,
        }
    }
}

/// Random unit-norm piecewise-constant profiles on a band of the line, with
/// random cut points and values uniform in `[-1, 1]`.
pub fn random_ensemble(opts: &EnsembleOptions) -> Result<Vec<FrequencyProfile>> {
    let (lo, hi) = opts.band;
    if !(lo.is_finite() && hi.is_finite() && lo < hi) || opts.pieces == 0 || opts.size == 0 {
        return invalid("ensemble needs a finite band lo < hi, at least one piece and one member");
    }
    (0..opts.size)
        .map(|i| {
            let mut r = rng(opts.seed, i as u64);
            let mut cuts: Vec<f64> = (0..opts.pieces - 1).map(|_| r.random_range(lo..hi)).collect();
            cuts.push(lo);
            cuts.push(hi);
            cuts.sort_by(f64::total_cmp);
            cuts.dedup();
            let mut parts = Vec::new();
            for w in cuts.windows(2) {
                let v: f64 = r.random_range(-1.0..1.0);
                parts.push(crate::profile::ValueBox {
                    lo: vec![w[0]],
                    hi: vec![w[1]],
                    value: v,
                });
            }
            let p = FrequencyProfile::piecewise_constant(parts)?;
            let p = p.scaled(1.0 / p.norm_sq().sqrt());
            match opts.gabor_line {
                Some(k) => p.on_gabor_line(k),
                None => Ok(p),
            }
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeBounds {
    /// `Â`, the smallest functional value: an inner estimate, `Â ≥ A`.
    pub lower: f64,
    /// `B̂`, the largest: `B̂ ≤ B`.
    pub upper: f64,
    pub values: Vec<f64>,
}

/// Evaluates the frame functional on every (unit-norm) ensemble member.
pub fn frame_bound_probe(
    psi: &FrequencyProfile,
    family: &AutomorphismFamily,
    lattice: &Lattice,
    ensemble: &[FrequencyProfile],
    opts: &FrameOptions,
) -> Result<ProbeBounds> {
    if ensemble.is_empty() {
        return invalid("probe ensemble is empty");
    }
    if let Some(i) = ensemble.iter().position(|f| (f.norm_sq() - 1.0).abs() > 1e-9) {
        return invalid(format!("ensemble member {i} is not unit-norm"));
    }
    let values: Vec<f64> = ensemble
        .par_iter()
        .map(|f| Ok(frame_functional_with(psi, family, lattice, f, LevelSet::All, opts)?.value))
        .collect::<Result<_>>()?;
    Ok(ProbeBounds {
        lower: values.iter().copied().fold(f64::INFINITY, f64::min),
        upper: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Matrix;
    use crate::metric_lattice::MetricSpace;

    fn shannon_setting() -> (FrequencyProfile, AutomorphismFamily, Lattice) {
        (
            FrequencyProfile::intervals(&[(-1.0, -0.5), (0.5, 1.0)], 1.0).unwrap(),
            AutomorphismFamily::matrix_powers(Matrix::diag(&[2.0]), None, None, MetricSpace::l2(1)).unwrap(),
            Lattice::integer(1),
        )
    }

    #[test]
    fn ensemble_is_unit_norm_and_seeded() {
        let opts = EnsembleOptions::default();
        let a = random_ensemble(&opts).unwrap();
        assert_eq!(a.len(), 50);
        assert!(a.iter().all(|p| (p.norm_sq() - 1.0).abs() < 1e-12));
        assert_eq!(a, random_ensemble(&opts).unwrap());
        let b = random_ensemble(&EnsembleOptions { seed: 2, ..opts }).unwrap();
        assert_ne!(a, b);
    }

    #[test]
    fn scaling_and_zero() {
        let (psi, fam, lat) = shannon_setting();
        let ens = random_ensemble(&EnsembleOptions {
            size: 6,
            ..Default::default()
        })
        .unwrap();
        let o = FrameOptions::default();
        let base = frame_bound_probe(&psi, &fam, &lat, &ens, &o).unwrap();
        let twice = frame_bound_probe(&psi.scaled(2.0), &fam, &lat, &ens, &o).unwrap();
        assert_eq!(twice.lower, 4.0 * base.lower);
        assert_eq!(twice.upper, 4.0 * base.upper);
        let z = frame_bound_probe(&FrequencyProfile::zero(1), &fam, &lat, &ens, &o).unwrap();
        assert_eq!((z.lower, z.upper), (0.0, 0.0));
    }

    #[test]
    fn rejects_bad_ensembles() {
        let (psi, fam, lat) = shannon_setting();
        let o = FrameOptions::default();
        assert!(frame_bound_probe(&psi, &fam, &lat, &[], &o).is_err());
        let f = FrequencyProfile::intervals(&[(0.2, 0.4)], 1.0).unwrap();
        assert!(frame_bound_probe(&psi, &fam, &lat, &[f], &o).is_err());
    }
}
