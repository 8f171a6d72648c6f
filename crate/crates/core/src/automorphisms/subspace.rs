use crate::error::{invalid, Result};
use crate::linalg::Matrix;
use serde::{Deserialize, Serialize};

const UNIT_TOL: f64 = 1e-9;
const CLUSTER_TOL: f64 = 1e-6;
const RANK_NULL: f64 = 1e-8;
const RANK_FULL: f64 = 1e-5;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum SubspaceVerdict {
    /// `F` (modulus > 1) and `E` (modulus 1) invariant subspaces, as column
    /// bases.
    Yes {
        f_basis: Vec<Vec<f64>>,
        e_basis: Vec<Vec<f64>>,
    },
    No {
        reason: String,
    },
    Indeterminate {
        reason: String,
    },
}

struct Cluster {
    re: f64,
    im: f64,
    mult: usize,
}

/// Decides whether `A` expands on an invariant subspace `F` with a
/// non-contracting complement `E`, from the spectrum: every modulus ≥ 1,
/// some modulus > 1, modulus-1 eigenvalues semisimple.
pub fn expanding_on_subspace(a: &Matrix) -> Result<SubspaceVerdict> {
    let n = a.dim();
    if n > 8 {
        return invalid("expanding_on_subspace supports dimension ≤ 8");
    }
    a.inverse()?;
    let eig = a.eigenvalues();

    let mut unit = Vec::new();
    let mut big = Vec::new();
    for &(re, im) in &eig {
        let m = re.hypot(im);
        if m < 1.0 - UNIT_TOL {
            return Ok(SubspaceVerdict::No {
                reason: format!(
                    "eigenvalue {re:+.6}{im:+.6}i has modulus {m:.6} < 1, so no complement is uniformly non-contracted"
                ),
            });
        }
        if m <= 1.0 + UNIT_TOL {
            unit.push((re, im));
        } else {
            big.push((re, im));
        }
    }
    if big.is_empty() {
        return Ok(SubspaceVerdict::No {
            reason: "no eigenvalue of modulus > 1, so F would be trivial".into(),
        });
    }

    let unit_clusters = cluster(&unit);
    let scale = a.max_abs().max(1.0);
    for c in &unit_clusters {
        let geo = geometric_multiplicity(a, c.re, c.im, scale);
        match geo {
            Rank::Ambiguous => {
                return Ok(SubspaceVerdict::Indeterminate {
                    reason: format!(
                        "multiplicity of unit-modulus eigenvalue {:+.6}{:+.6}i is numerically ambiguous",
                        c.re, c.im
                    ),
                })
            }
            Rank::Null(g) if g < c.mult => {
                return Ok(SubspaceVerdict::No {
                    reason: format!(
                        "unit-modulus eigenvalue {:+.6}{:+.6}i is defective (geometric {g} < algebraic {}), so powers grow polynomially without a uniform bound on E",
                        c.re, c.im, c.mult
                    ),
                })
            }
            _ => {}
        }
    }

    let big_clusters = cluster(&big);
    let f_dim = big.len();
    let e_dim = unit.len();
    let pf = char_product(a, &big_clusters, true);
    let pe = char_product(a, &unit_clusters, false);
    let f_basis = if f_dim == 0 { vec![] } else { pf.svd().smallest(f_dim) };
    let e_basis = if e_dim == 0 { vec![] } else { pe.svd().smallest(e_dim) };
    Ok(SubspaceVerdict::Yes { f_basis, e_basis })
}

fn cluster(vals: &[(f64, f64)]) -> Vec<Cluster> {
    let mut out: Vec<Cluster> = Vec::new();
    for &(re, im) in vals {
        // Conjugate pairs are represented once, by the member with im ≥ 0.
        if im < -CLUSTER_TOL {
            continue;
        }
        let im = im.max(0.0);
        if let Some(c) = out.iter_mut().find(|c| (c.re - re).hypot(c.im - im) < CLUSTER_TOL) {
            c.mult += 1;
        } else {
            out.push(Cluster { re, im, mult: 1 });
        }
    }
    // Treat tiny imaginary parts as real.
    for c in &mut out {
        if c.im < CLUSTER_TOL {
            c.im = 0.0;
        }
    }
    out
}

enum Rank {
    Null(usize),
    Ambiguous,
}

/// Dimension of `ker(A − μI)`; for complex μ the real embedding
/// `[[A − re, im], [−im, A − re]]` doubles the count.
fn geometric_multiplicity(a: &Matrix, re: f64, im: f64, scale: f64) -> Rank {
    let n = a.dim();
    let shifted = a.sub(&Matrix::identity(n).scale(re));
    let (m, factor) = if im == 0.0 {
        (shifted, 1)
    } else {
        let mut big = Matrix::zeros(2 * n);
        for i in 0..n {
            for j in 0..n {
                big[(i, j)] = shifted[(i, j)];
                big[(i + n, j + n)] = shifted[(i, j)];
            }
            big[(i, i + n)] = im;
            big[(i + n, i)] = -im;
        }
        (big, 2)
    };
    let sv = m.singular_values();
    let mut null = 0;
    for s in sv {
        let rel = s / scale;
        if rel <= RANK_NULL {
            null += 1;
        } else if rel < RANK_FULL {
            return Rank::Ambiguous;
        }
    }
    Rank::Null(null / factor)
}

/// Real polynomial `Π (A − μ)^k` over the clusters, with conjugate pairs
/// merged into real quadratics. `full_power` uses the algebraic
/// multiplicity as exponent (generalized eigenspace); otherwise exponent 1.
fn char_product(a: &Matrix, clusters: &[Cluster], full_power: bool) -> Matrix {
    let n = a.dim();
    let mut p = Matrix::identity(n);
    for c in clusters {
        let k = if full_power { c.mult } else { 1 };
        let factor = if c.im == 0.0 {
            a.sub(&Matrix::identity(n).scale(c.re))
        } else {
            let a2 = a.mul(a);
            a2.sub(&a.scale(2.0 * c.re))
                .add(&Matrix::identity(n).scale(c.re * c.re + c.im * c.im))
        };
        for _ in 0..k {
            p = p.mul(&factor);
            // Keep the entries in range; the null space is unaffected.
            let s = p.max_abs();
            if s > 0.0 {
                p = p.scale(1.0 / s);
            }
        }
    }
    p
}
