//! Support geometry used to bound which family members can contribute.

use crate::metric_lattice::MetricSpace;

/// `(min, max)` of the metric norm over the closed box `[lo, hi]`, for the
/// norm metrics. Both norms are monotone in the coordinate moduli, so the
/// extremes sit at the clamped origin and at the far corner.
pub(crate) fn box_norm_range(metric: &MetricSpace, lo: &[f64], hi: &[f64]) -> (f64, f64) {
    let near: Vec<f64> = lo.iter().zip(hi).map(|(&l, &h)| 0f64.clamp(l, h)).collect();
    let far: Vec<f64> = lo.iter().zip(hi).map(|(l, h)| l.abs().max(h.abs())).collect();
    (metric.norm(&near), metric.norm(&far))
}

/// Norm range over a union of boxes.
pub(crate) fn union_norm_range(metric: &MetricSpace, boxes: &[(Vec<f64>, Vec<f64>)]) -> (f64, f64) {
    boxes.iter().fold((f64::INFINITY, 0.0), |(a, b), (lo, hi)| {
        let (x, y) = box_norm_range(metric, lo, hi);
        (a.min(x), b.max(y))
    })
}

pub(crate) fn box_contains_closed(lo: &[f64], hi: &[f64], x: &[f64]) -> bool {
    lo.iter().zip(hi).zip(x).all(|((&l, &h), &v)| l <= v && v <= h)
}

/// Scales `a ≥ 0` with `a ξ` in the closed box, as an interval.
pub(crate) fn ray_interval(xi: &[f64], lo: &[f64], hi: &[f64]) -> Option<(f64, f64)> {
    let (mut a0, mut a1) = (0.0f64, f64::INFINITY);
    for i in 0..xi.len() {
        if xi[i] == 0.0 {
            if !(lo[i] <= 0.0 && 0.0 <= hi[i]) {
                return None;
            }
            continue;
        }
        let (p, q) = (lo[i] / xi[i], hi[i] / xi[i]);
        a0 = a0.max(p.min(q));
        a1 = a1.min(p.max(q));
    }
    (a0 <= a1).then_some((a0, a1))
}

/// Length of `[a0, a1] ∩ [b0, b1]`.
pub(crate) fn overlap(a0: f64, a1: f64, b0: f64, b1: f64) -> f64 {
    (a1.min(b1) - a0.max(b0)).max(0.0)
}

/// Volume of the intersection of two boxes.
pub(crate) fn box_overlap(alo: &[f64], ahi: &[f64], blo: &[f64], bhi: &[f64]) -> f64 {
    (0..alo.len())
        .map(|i| overlap(alo[i], ahi[i], blo[i], bhi[i]))
        .product()
}

/// Area of a convex polygon clipped to an axis-aligned rectangle
/// (Sutherland–Hodgman against the four edges, then the shoelace formula).
pub(crate) fn clipped_area(poly: &[[f64; 2]], lo: &[f64], hi: &[f64]) -> f64 {
    let mut p: Vec<[f64; 2]> = poly.to_vec();
    for (axis, bound, keep_below) in [(0, lo[0], false), (0, hi[0], true), (1, lo[1], false), (1, hi[1], true)] {
        if p.is_empty() {
            return 0.0;
        }
        let inside = |q: &[f64; 2]| if keep_below { q[axis] <= bound } else { q[axis] >= bound };
        let mut out = Vec::with_capacity(p.len() + 2);
        for k in 0..p.len() {
            let cur = p[k];
            let prev = p[(k + p.len() - 1) % p.len()];
            let (ci, pi) = (inside(&cur), inside(&prev));
            if ci != pi {
                let t = (bound - prev[axis]) / (cur[axis] - prev[axis]);
                out.push([prev[0] + t * (cur[0] - prev[0]), prev[1] + t * (cur[1] - prev[1])]);
            }
            if ci {
                out.push(cur);
            }
        }
        p = out;
    }
    let n = p.len();
    if n < 3 {
        return 0.0;
    }
    let twice: f64 = (0..n)
        .map(|k| p[k][0] * p[(k + 1) % n][1] - p[(k + 1) % n][0] * p[k][1])
        .sum();
    0.5 * twice.abs()
}
