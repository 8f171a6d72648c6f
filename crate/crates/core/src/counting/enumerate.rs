use crate::automorphisms::Automorphism;
use crate::error::{invalid, Error, Result};
use crate::linalg::Matrix;
use crate::metric_lattice::{check_setting, for_each_index, range_count, Lattice, MetricSpace};
use crate::monte_carlo::Measured;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

pub const MAX_CANDIDATES: f64 = 1e8;
pub const MAX_STORED_POINTS: usize = 10_000;
const GUARD: f64 = 1e-12;

/// Lattice points inside a deformed ball, with the counting bounds when
/// they were requested.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CountResult {
    pub r: f64,
    pub count: u64,
    pub points: Vec<Vec<f64>>,
    pub points_overflow: bool,
    /// Candidates inside the guard band that could not be decided exactly
    /// and were counted as outside.
    pub boundary_hits: u64,
    /// Candidates inside the guard band decided by exact rational
    /// arithmetic.
    pub exact_ties: u64,
    pub candidates: u64,
    pub bounds: Option<CountingBounds>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CountingBounds {
    /// `ν(α̂B(e,2r)) / ν(Ω^r)`, an upper bound for the count at `r`.
    pub upper_bound: Measured,
    /// `ν(α̂B(e,r)) / ν(Ω^r)`, a lower bound for the count at `2r`.
    pub lower_bound_at_2r: Measured,
    pub count_at_2r: u64,
    pub image_measure_r: f64,
    pub image_measure_2r: f64,
    pub omega_half_r: Measured,
    pub omega_r: Measured,
    /// Both inequalities hold up to three propagated standard errors.
    pub sandwich_holds: bool,
}

enum Side {
    Inside,
    Outside,
    Tie,
}

/// Exact representation of the inverse map, available when the stored
/// inverse is exactly the inverse of the stored forward matrix.
struct ExactInverse {
    inv: Vec<Vec<BigRational>>,
    basis: Vec<Vec<BigRational>>,
}

fn rat(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite")
}

fn to_rat(m: &Matrix) -> Vec<Vec<BigRational>> {
    m.rows().iter().map(|r| r.iter().map(|&v| rat(v)).collect()).collect()
}

impl ExactInverse {
    fn new(alpha: &Automorphism, lattice: &Lattice) -> Option<Self> {
        let f = to_rat(alpha.forward());
        let inv = to_rat(alpha.inverse_matrix());
        let n = f.len();
        for i in 0..n {
            for j in 0..n {
                let mut s = BigRational::zero();
                for k in 0..n {
                    s += &f[i][k] * &inv[k][j];
                }
                let want = if i == j {
                    BigRational::from_integer(BigInt::from(1))
                } else {
                    BigRational::zero()
                };
                if s != want {
                    return None;
                }
            }
        }
        Some(ExactInverse {
            inv,
            basis: to_rat(lattice.basis()),
        })
    }

    fn strictly_inside(&self, metric: &MetricSpace, m: &[i64], gabor: bool, r: f64) -> bool {
        let d = self.basis.len();
        let mut lam: Vec<BigRational> = (0..d)
            .map(|i| {
                let mut s = BigRational::zero();
                for j in 0..d {
                    s += &self.basis[i][j] * BigRational::from_integer(BigInt::from(m[j]));
                }
                s
            })
            .collect();
        if gabor {
            lam.push(BigRational::zero());
        }
        let n = lam.len();
        let v: Vec<BigRational> = (0..n)
            .map(|i| {
                let mut s = BigRational::zero();
                for j in 0..n {
                    s += &self.inv[i][j] * &lam[j];
                }
                s
            })
            .collect();
        let r = rat(r);
        match metric {
            MetricSpace::Linf { .. } => v.iter().all(|x| x.abs() < r),
            MetricSpace::L2 { .. } => {
                let s: BigRational = v.iter().map(|x| x * x).sum();
                s < &r * &r
            }
            MetricSpace::GaborProduct => v[0].abs() + v[1].abs() < r,
        }
    }
}

fn classify(metric: &MetricSpace, v: &[f64], r: f64) -> Side {
    let d = metric.norm(v);
    if d < r * (1.0 - GUARD) {
        Side::Inside
    } else if d > r * (1.0 + GUARD) {
        Side::Outside
    } else {
        Side::Tie
    }
}

/// `♯(Γ⊥ ∩ α̂B(e,r))` by a bounding-box walk and the strict test
/// `d(α̂⁻¹λ, e) < r`.
pub fn enumerate(lattice: &Lattice, alpha: &Automorphism, r: f64, metric: &MetricSpace) -> Result<CountResult> {
    check_setting(lattice, metric, alpha)?;
    if !(r > 0.0 && r.is_finite()) {
        return invalid(format!("radius must be positive, got {r}"));
    }
    if lattice.rank() > 4 {
        return invalid("exact enumeration is limited to dimension 4");
    }
    let d = lattice.rank();
    let fwd = alpha.forward();
    // Lattice points have zero modulation coordinate, so only the base rows
    // of the image box matter. For the norm metrics B(e,r) lies in the cube
    // of half-side r.
    let half: Vec<f64> = if lattice.is_gabor() {
        vec![r * fwd[(0, 0)].abs()]
    } else {
        (0..d)
            .map(|i| r * fwd.row(i).iter().map(|v| v.abs()).sum::<f64>())
            .collect()
    };
    let lo: Vec<f64> = half.iter().map(|h| -h).collect();
    let ranges = lattice.index_ranges(&lo, &half);
    let n = range_count(&ranges);
    if n > MAX_CANDIDATES {
        return Err(Error::ResourceLimit {
            candidates: n,
            limit: MAX_CANDIDATES,
            box_shape: ranges.iter().map(|(a, b)| b - a + 1).collect(),
        });
    }

    let mut exact: Option<Option<ExactInverse>> = None;
    let mut out = CountResult {
        r,
        count: 0,
        points: Vec::new(),
        points_overflow: false,
        boundary_hits: 0,
        exact_ties: 0,
        candidates: n as u64,
        bounds: None,
    };
    let mut test = |m: &[i64], out: &mut CountResult| {
        let lam = lattice.point(m);
        let v = alpha.apply_inverse(&lam);
        let inside = match classify(metric, &v, r) {
            Side::Inside => true,
            Side::Outside => false,
            Side::Tie => {
                let ex = exact.get_or_insert_with(|| ExactInverse::new(alpha, lattice));
                match ex {
                    Some(e) => {
                        out.exact_ties += 1;
                        e.strictly_inside(metric, m, lattice.is_gabor(), r)
                    }
                    None => {
                        out.boundary_hits += 1;
                        false
                    }
                }
            }
        };
        if inside {
            accept(out, lam);
        }
    };

    // The ball is convex, so along the last index the inside set is an
    // interval. Its interior is counted directly; only candidates near the
    // two ends go through the pointwise test above.
    let (last_lo, last_hi) = ranges[d - 1];
    let mut unit = vec![0; d];
    unit[d - 1] = 1;
    let w = alpha.apply_inverse(&lattice.point(&unit));
    let mut m = vec![0i64; d];
    for_each_index(&ranges[..d - 1], |prefix| {
        m[..d - 1].copy_from_slice(prefix);
        m[d - 1] = 0;
        let v0 = alpha.apply_inverse(&lattice.point(&m));
        let (a, b) = match line_interval(metric, &v0, &w, r) {
            Line::Empty => return,
            Line::Unknown => (last_lo, last_hi),
            Line::Between(t0, t1) => {
                let t0 = t0.max(last_lo as f64 - 2.0);
                let t1 = t1.min(last_hi as f64 + 2.0);
                if t0 > t1 {
                    return;
                }
                let tol = 1e-6 * (1.0 + t0.abs() + t1.abs());
                let a = ((t0 - tol).floor() as i64 - 1).max(last_lo);
                let b = ((t1 + tol).ceil() as i64 + 1).min(last_hi);
                let ia = (t0 + tol).floor() as i64 + 2;
                let ib = (t1 - tol).ceil() as i64 - 2;
                if ia <= ib {
                    for k in a..ia.min(b + 1) {
                        m[d - 1] = k;
                        test(&m, &mut out);
                    }
                    let (ja, jb) = (ia.max(a), ib.min(b));
                    let mut k = ja;
                    while k <= jb && out.points.len() < MAX_STORED_POINTS {
                        m[d - 1] = k;
                        accept(&mut out, lattice.point(&m));
                        k += 1;
                    }
                    if k <= jb {
                        out.count += (jb - k + 1) as u64;
                        out.points_overflow = true;
                    }
                    for k in (ib + 1).max(a)..=b {
                        m[d - 1] = k;
                        test(&m, &mut out);
                    }
                    return;
                }
                (a, b)
            }
        };
        for k in a..=b {
            m[d - 1] = k;
            test(&m, &mut out);
        }
    });
    Ok(out)
}

fn accept(out: &mut CountResult, lam: Vec<f64>) {
    out.count += 1;
    if out.points.len() < MAX_STORED_POINTS {
        out.points.push(lam);
    } else {
        out.points_overflow = true;
    }
}

enum Line {
    Empty,
    /// Open interval of `t` with `v0 + t w` inside the ball.
    Between(f64, f64),
    /// Not resolved analytically; walk the whole range.
    Unknown,
}

fn near(x: f64, r: f64) -> bool {
    (x - r).abs() <= 1e-9 * r
}

fn line_interval(metric: &MetricSpace, v0: &[f64], w: &[f64], r: f64) -> Line {
    match metric {
        MetricSpace::Linf { .. } => {
            let (mut t0, mut t1) = (f64::NEG_INFINITY, f64::INFINITY);
            for (&c, &s) in v0.iter().zip(w) {
                if s == 0.0 {
                    if near(c.abs(), r) {
                        return Line::Unknown;
                    }
                    if c.abs() >= r {
                        return Line::Empty;
                    }
                } else {
                    let (p, q) = ((-r - c) / s, (r - c) / s);
                    t0 = t0.max(p.min(q));
                    t1 = t1.min(p.max(q));
                }
            }
            if t0 < t1 {
                Line::Between(t0, t1)
            } else {
                Line::Empty
            }
        }
        MetricSpace::L2 { .. } => {
            let a: f64 = w.iter().map(|x| x * x).sum();
            if a == 0.0 {
                return Line::Unknown;
            }
            // Minimize over t first to avoid cancellation in the discriminant.
            let t_star = -v0.iter().zip(w).map(|(x, y)| x * y).sum::<f64>() / a;
            let dist2: f64 = v0.iter().zip(w).map(|(x, y)| (x + t_star * y).powi(2)).sum();
            let rem = r * r - dist2;
            if rem <= 0.0 {
                return if near(dist2.sqrt(), r) {
                    Line::Unknown
                } else {
                    Line::Empty
                };
            }
            let h = (rem / a).sqrt();
            Line::Between(t_star - h, t_star + h)
        }
        MetricSpace::GaborProduct => {
            if w[1] != 0.0 || w[0] == 0.0 {
                return Line::Unknown;
            }
            let rr = r - v0[1].abs();
            if near(v0[1].abs(), r) {
                return Line::Unknown;
            }
            if rr <= 0.0 {
                return Line::Empty;
            }
            let (p, q) = ((-rr - v0[0]) / w[0], (rr - v0[0]) / w[0]);
            Line::Between(p.min(q), p.max(q))
        }
    }
}
