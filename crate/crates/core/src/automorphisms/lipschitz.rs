use super::{Automorphism, AutomorphismKind};
use crate::error::{Error, Result};
use crate::metric_lattice::MetricSpace;
use crate::monte_carlo::rng;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LipschitzMethod {
    ClosedForm,
    NumericalOracle,
}

/// `ℓ d(ξ,e) ≤ d(α̂ξ,e) ≤ L d(ξ,e)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LipschitzConstants {
    pub lower: f64,
    pub upper: f64,
    pub method: LipschitzMethod,
}

const SVD_MAX_DIM: usize = 8;
const ORACLE_DIRECTIONS: usize = 100_000;

pub fn check_compatible(alpha: &Automorphism, metric: &MetricSpace) -> Result<()> {
    let ok = match metric {
        MetricSpace::GaborProduct => alpha.is_gabor(),
        MetricSpace::L2 { dim } | MetricSpace::Linf { dim } => !alpha.is_gabor() && *dim == alpha.dim(),
    };
    if ok {
        Ok(())
    } else {
        Err(Error::IncompatibleMetric {
            metric: metric.name(),
            what: format!("automorphism {:?} of dimension {}", alpha.kind(), alpha.dim()),
        })
    }
}

pub fn lipschitz_constants(alpha: &Automorphism, metric: &MetricSpace) -> Result<LipschitzConstants> {
    check_compatible(alpha, metric)?;
    let closed = |lower, upper| LipschitzConstants {
        lower,
        upper,
        method: LipschitzMethod::ClosedForm,
    };
    match (metric, alpha.kind()) {
        (MetricSpace::GaborProduct, AutomorphismKind::GaborShift { p }) => {
            let u = 1.0 + p.abs();
            Ok(closed(1.0 / u, u))
        }
        (MetricSpace::L2 { .. }, AutomorphismKind::Shearlet { a, s }) => {
            let (_, hi) = shearlet_gram_eigenvalues(*a, *s);
            let upper = hi.sqrt();
            // σ_min σ_max = det = a^{3/2}; avoids the cancellation in λ₋.
            Ok(closed(a.powf(1.5) / upper, upper))
        }
        (MetricSpace::Linf { .. }, _) => Ok(closed(
            1.0 / alpha.inverse_matrix().norm_inf(),
            alpha.forward().norm_inf(),
        )),
        (MetricSpace::L2 { dim }, _) if *dim <= SVD_MAX_DIM => {
            let svd = alpha.forward().svd();
            Ok(closed(svd.min(), svd.max()))
        }
        _ => {
            let (lo, hi) = lipschitz_oracle(alpha, metric, ORACLE_DIRECTIONS, crate::monte_carlo::DEFAULT_SEED)?;
            Ok(LipschitzConstants {
                lower: lo,
                upper: hi,
                method: LipschitzMethod::NumericalOracle,
            })
        }
    }
}

/// Eigenvalues `(λ₋, λ₊)` of the Gram matrix `AᵀA` of the shearlet matrix
/// `[[a,0],[s√a,√a]]`, i.e. `(a/2)[(a+s²+1) ± √((a+s²+1)² − 4a)]`.
pub fn shearlet_gram_eigenvalues(a: f64, s: f64) -> (f64, f64) {
    let t = a + s * s + 1.0;
    let disc = (t * t - 4.0 * a).max(0.0).sqrt();
    let hi = 0.5 * a * (t + disc);
    // λ₋ λ₊ = det(AᵀA) = a³.
    (a.powi(3) / hi, hi)
}

/// Extreme values of `d(α̂ξ,e)/d(ξ,e)` over a sample of directions.
///
/// For the norm metrics the ratio is homogeneous, so directions on the unit
/// sphere of the metric suffice: evenly spaced angles in dimension 2,
/// normalized Gaussian vectors (ℓ²) or random cube-face points (ℓ∞)
/// otherwise. Each ℓ² direction `y` is visited both as itself and through
/// its preimage `α̂⁻¹y`: the minimum then becomes a maximum of
/// `|α̂⁻¹y|/|y|`, whose sampling error does not grow with the condition
/// number. For the Gabor product the sample is points `(ξ, k)` with small
/// integer `k`. The result is an inner approximation: `lo ≥ ℓ` and
/// `hi ≤ L`.
pub fn lipschitz_oracle(
    alpha: &Automorphism,
    metric: &MetricSpace,
    directions: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    check_compatible(alpha, metric)?;
    let n = directions.max(1);
    let d = metric.dim();
    let mut lo = f64::INFINITY;
    let mut hi: f64 = 0.0;
    let mut visit = |x: &[f64]| {
        let base = metric.norm(x);
        if base > 0.0 {
            let q = metric.norm(&alpha.apply(x)) / base;
            lo = lo.min(q);
            hi = hi.max(q);
        }
    };
    let mut r = rng(seed, 0x11);
    match metric {
        MetricSpace::GaborProduct => {
            for i in 0..n {
                let k = (i % 7) as f64 - 3.0;
                let xi = r.random_range(-4.0..4.0);
                visit(&[xi, k]);
            }
        }
        MetricSpace::L2 { .. } if d == 2 => {
            for i in 0..n {
                let t = std::f64::consts::PI * i as f64 / n as f64;
                let y = [t.cos(), t.sin()];
                visit(&y);
                visit(&alpha.apply_inverse(&y));
            }
        }
        MetricSpace::L2 { .. } => {
            let mut x = vec![0.0; d];
            for _ in 0..n {
                for v in x.iter_mut() {
                    *v = StandardNormal.sample(&mut r);
                }
                visit(&x);
                visit(&alpha.apply_inverse(&x));
            }
        }
        MetricSpace::Linf { .. } => {
            let mut x = vec![0.0; d];
            for i in 0..n {
                for v in x.iter_mut() {
                    *v = r.random_range(-1.0..1.0);
                }
                x[i % d] = if r.random::<bool>() { 1.0 } else { -1.0 };
                visit(&x);
            }
            // The upper constant is attained on cube vertices, the lower one
            // on preimages of cube vertices.
            if d <= 12 {
                for mask in 0..(1u32 << d) {
                    let v: Vec<f64> = (0..d).map(|i| if mask >> i & 1 == 1 { 1.0 } else { -1.0 }).collect();
                    visit(&v);
                    visit(&alpha.apply_inverse(&v));
                }
            }
        }
    }
    Ok((lo, hi))
}
