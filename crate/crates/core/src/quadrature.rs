//! Gauss-Legendre rules (composite, tensor and adaptive) and compensated
//! summation.

use gauss_quad::GaussLegendre;
use std::sync::OnceLock;

/// Default order per cell.
pub const DEFAULT_ORDER: usize = 16;
const MAX_ORDER: usize = 64;

static RULES: [OnceLock<Vec<(f64, f64)>>; MAX_ORDER + 1] = [const { OnceLock::new() }; MAX_ORDER + 1];

/// Node/weight pairs on [-1, 1], sorted by node.
pub fn gl_rule(order: usize) -> &'static [(f64, f64)] {
    assert!(
        (1..=MAX_ORDER).contains(&order),
        "Gauss-Legendre order {order} out of range"
    );
    RULES[order].get_or_init(|| {
        if order == 1 {
            return vec![(0.0, 2.0)];
        }
        let rule = GaussLegendre::new(order).expect("valid Gauss-Legendre order");
        let mut v = rule.as_node_weight_pairs().to_vec();
        v.sort_by(|a, b| a.0.total_cmp(&b.0));
        v
    })
}

/// Single-panel rule on [a, b].
pub fn gl<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, order: usize) -> f64 {
    let h = 0.5 * (b - a);
    let c = 0.5 * (a + b);
    let mut s = Neumaier::default();
    for &(x, w) in gl_rule(order) {
        s.add(w * f(c + h * x));
    }
    h * s.value()
}

/// Composite rule with `cells` equal panels.
pub fn composite<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, cells: usize, order: usize) -> f64 {
    let h = (b - a) / cells as f64;
    let mut s = Neumaier::default();
    for k in 0..cells {
        let lo = a + h * k as f64;
        let hi = if k + 1 == cells { b } else { lo + h };
        s.add(gl(&mut f, lo, hi, order));
    }
    s.value()
}

/// Composite rule over consecutive breakpoints; empty or reversed panels are
/// skipped.
pub fn piecewise<F: FnMut(f64) -> f64>(mut f: F, breaks: &[f64], order: usize) -> f64 {
    let mut s = Neumaier::default();
    for w in breaks.windows(2) {
        if w[1] > w[0] {
            s.add(gl(&mut f, w[0], w[1], order));
        }
    }
    s.value()
}

/// Tensor-product composite rule over the box `[lo, hi]` with `cells`
/// panels per axis.
pub fn tensor<F: FnMut(&[f64]) -> f64>(f: F, lo: &[f64], hi: &[f64], cells: usize, order: usize) -> f64 {
    let axes: Vec<Vec<f64>> = (0..lo.len()).map(|i| uniform_breaks(lo[i], hi[i], cells)).collect();
    tensor_breaks(f, &axes, order)
}

/// `cells + 1` equally spaced points from `a` to `b`.
pub fn uniform_breaks(a: f64, b: f64, cells: usize) -> Vec<f64> {
    let h = (b - a) / cells as f64;
    (0..=cells)
        .map(|k| if k == cells { b } else { a + h * k as f64 })
        .collect()
}

/// Tensor-product rule over the grid spanned by per-axis breakpoint lists
/// (each sorted), `order` nodes per panel and axis.
pub fn tensor_breaks<F: FnMut(&[f64]) -> f64>(mut f: F, axes: &[Vec<f64>], order: usize) -> f64 {
    let rule = gl_rule(order);
    let nodes: Vec<Vec<(f64, f64)>> = axes
        .iter()
        .map(|b| {
            b.windows(2)
                .filter(|w| w[1] > w[0])
                .flat_map(|w| {
                    let (h, c) = (0.5 * (w[1] - w[0]), 0.5 * (w[0] + w[1]));
                    rule.iter().map(move |&(x, wt)| (c + h * x, h * wt))
                })
                .collect()
        })
        .collect();
    let d = nodes.len();
    if d == 0 {
        return f(&[]);
    }
    if nodes.iter().any(|n| n.is_empty()) {
        return 0.0;
    }
    let mut idx = vec![0usize; d];
    let mut pt = vec![0.0; d];
    let mut s = Neumaier::default();
    loop {
        let mut w = 1.0;
        for i in 0..d {
            let (x, wi) = nodes[i][idx[i]];
            pt[i] = x;
            w *= wi;
        }
        s.add(w * f(&pt));
        let mut k = 0;
        loop {
            idx[k] += 1;
            if idx[k] < nodes[k].len() {
                break;
            }
            idx[k] = 0;
            k += 1;
            if k == d {
                return s.value();
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

#[derive(Clone, Copy, Debug)]
pub struct AdaptiveOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub order: usize,
    pub max_depth: u32,
}

impl Default for AdaptiveOptions {
    fn default() -> Self {
        AdaptiveOptions {
            rel_tol: 1e-6,
            abs_tol: 1e-14,
            order: DEFAULT_ORDER,
            max_depth: 40,
        }
    }
}

/// Adaptive Gauss-Legendre by dyadic panel refinement. Each panel compares
/// the one-panel value with the sum over its two halves.
pub fn adaptive<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, opts: &AdaptiveOptions) -> Estimate {
    if !(b > a) {
        return Estimate { value: 0.0, error: 0.0 };
    }
    let coarse = gl(&mut f, a, b, opts.order);
    let scale = coarse.abs().max(opts.abs_tol);
    let mut stack = vec![(a, b, coarse, 0u32)];
    let mut total = Neumaier::default();
    let mut err = 0.0;
    while let Some((lo, hi, whole, depth)) = stack.pop() {
        let mid = 0.5 * (lo + hi);
        let left = gl(&mut f, lo, mid, opts.order);
        let right = gl(&mut f, mid, hi, opts.order);
        let diff = (left + right - whole).abs();
        let share = (hi - lo) / (b - a);
        let budget = (opts.rel_tol * scale).max(opts.abs_tol) * share;
        if diff <= budget || depth >= opts.max_depth {
            total.add(left + right);
            err += diff;
        } else {
            stack.push((mid, hi, right, depth + 1));
            stack.push((lo, mid, left, depth + 1));
        }
    }
    Estimate {
        value: total.value(),
        error: err,
    }
}

/// Adaptive rule applied on each span between sorted breakpoints.
pub fn adaptive_breaks<F: FnMut(f64) -> f64>(mut f: F, breaks: &[f64], opts: &AdaptiveOptions) -> Estimate {
    let mut total = Neumaier::default();
    let mut err = 0.0;
    for w in breaks.windows(2) {
        if w[1] > w[0] {
            let e = adaptive(&mut f, w[0], w[1], opts);
            total.add(e.value);
            err += e.error;
        }
    }
    Estimate {
        value: total.value(),
        error: err,
    }
}

/// Kahan-Babuška-Neumaier compensated accumulator.
#[derive(Clone, Copy, Debug, Default)]
pub struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl std::iter::FromIterator<f64> for Neumaier {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = Neumaier::default();
        for x in iter {
            s.add(x);
        }
        s
    }
}

/// Sorts, drops non-finite values and merges breakpoints closer than
/// `1e-15` relative.
pub fn clean_breaks(mut v: Vec<f64>, lo: f64, hi: f64) -> Vec<f64> {
    v.retain(|x| x.is_finite() && *x > lo && *x < hi);
    v.push(lo);
    v.push(hi);
    v.sort_by(f64::total_cmp);
    v.dedup_by(|a, b| (*a - *b).abs() <= 1e-15 * (1.0 + b.abs()));
    v
}
