use super::lattice::{for_each_index, range_count};
use super::{Lattice, MetricSpace};
use crate::automorphisms::Automorphism;
use crate::error::{invalid, Error, Result};
use crate::monte_carlo::{count_hits, fraction_estimate, McConfig, Measured};
use std::collections::HashMap;

const MAX_SHIFTS: f64 = 2e7;

pub(crate) fn check_setting(lattice: &Lattice, metric: &MetricSpace, alpha: &Automorphism) -> Result<()> {
    lattice.check_metric(metric)?;
    if alpha.dim() != lattice.dim() {
        return Err(Error::DimensionMismatch {
            expected: lattice.dim(),
            got: alpha.dim(),
        });
    }
    if metric.is_gabor() != alpha.is_gabor() {
        return Err(Error::IncompatibleMetric {
            metric: metric.name(),
            what: format!("automorphism {:?}", alpha.kind()),
        });
    }
    Ok(())
}

/// `ν(Ω ∩ ⋃_λ (α̂B(e,r) + λ))`.
///
/// Exact for 1-dimensional Euclidean lattices and for the Gabor product;
/// Monte Carlo over Ω otherwise.
pub fn overlap_measure(
    lattice: &Lattice,
    metric: &MetricSpace,
    alpha: &Automorphism,
    r: f64,
    mc: &McConfig,
) -> Result<Measured> {
    check_setting(lattice, metric, alpha)?;
    if !(r > 0.0 && r.is_finite()) {
        return invalid(format!("radius must be positive, got {r}"));
    }
    let c = lattice.covolume();
    if metric.is_gabor() {
        // On the line k the ball has base length 2(r − |k|), shifted by kp;
        // periodizing an interval by cℤ covers min(length, c).
        let kmax = r.ceil() as i64 - 1;
        let v = (-kmax..=kmax).map(|k| (2.0 * (r - k.abs() as f64)).min(c)).sum();
        return Ok(Measured::exact(v));
    }
    if lattice.rank() == 1 {
        let a = alpha.forward()[(0, 0)].abs();
        return Ok(Measured::exact((2.0 * a * r).min(c)));
    }
    overlap_monte_carlo(lattice, metric, alpha, r, mc)
}

fn overlap_monte_carlo(
    lattice: &Lattice,
    metric: &MetricSpace,
    alpha: &Automorphism,
    r: f64,
    mc: &McConfig,
) -> Result<Measured> {
    let d = lattice.rank();
    let inv = alpha.inverse_matrix();
    let fwd = alpha.forward();
    // Work in v = α̂⁻¹ξ, where the deformed ball is the plain ball B(e, r).
    let vb = inv.mul(lattice.basis());

    // Bounding box of α̂⁻¹Ω, grown by r.
    let mut vlo = vec![0.0; d];
    let mut vhi = vec![0.0; d];
    for i in 0..d {
        for j in 0..d {
            let c = vb[(i, j)];
            if c < 0.0 {
                vlo[i] += c;
            } else {
                vhi[i] += c;
            }
        }
        vlo[i] -= r;
        vhi[i] += r;
    }

    // Lattice points λ with λ ∈ Ω − α̂B(e,r): bounding boxes in ξ-space.
    let (olo, ohi) = lattice.domain_bounding_box();
    let half: Vec<f64> = (0..d)
        .map(|i| r * fwd.row(i).iter().map(|v| v.abs()).sum::<f64>())
        .collect();
    let lo: Vec<f64> = (0..d).map(|i| olo[i] - half[i]).collect();
    let hi: Vec<f64> = (0..d).map(|i| ohi[i] + half[i]).collect();
    let ranges = lattice.index_ranges(&lo, &hi);
    let n = range_count(&ranges);
    if n > MAX_SHIFTS {
        return Err(Error::ResourceLimit {
            candidates: n,
            limit: MAX_SHIFTS,
            box_shape: ranges.iter().map(|(a, b)| b - a + 1).collect(),
        });
    }

    let mut shifts: Vec<Vec<f64>> = Vec::new();
    for_each_index(&ranges, |m| {
        let mf: Vec<f64> = m.iter().map(|&v| v as f64).collect();
        let mu = vb.mul_vec(&mf);
        if (0..d).all(|i| mu[i] >= vlo[i] && mu[i] <= vhi[i]) {
            shifts.push(mu);
        }
    });

    // Spatial hash with cell side r: any μ within distance r of v sits in a
    // neighbouring cell (the ℓ² ball lies inside the ℓ∞ ball).
    let key = |x: &[f64]| -> Vec<i64> { x.iter().map(|v| (v / r).floor() as i64).collect() };
    let mut grid: HashMap<Vec<i64>, Vec<usize>> = HashMap::new();
    for (k, mu) in shifts.iter().enumerate() {
        grid.entry(key(mu)).or_default().push(k);
    }
    let mut offsets = Vec::new();
    for_each_index(&vec![(-1, 1); d], |o| offsets.push(o.to_vec()));

    let (hits, total) = count_hits(d, mc, |u| {
        let v = vb.mul_vec(u);
        let base = key(&v);
        let mut cell = base.clone();
        let mut diff = vec![0.0; d];
        for o in &offsets {
            for i in 0..d {
                cell[i] = base[i] + o[i];
            }
            if let Some(list) = grid.get(&cell) {
                for &k in list {
                    for i in 0..d {
                        diff[i] = v[i] - shifts[k][i];
                    }
                    if metric.norm(&diff) < r {
                        return true;
                    }
                }
            }
        }
        false
    });
    Ok(fraction_estimate(hits, total, lattice.covolume()))
}
