use super::enumerate::enumerate;
use crate::automorphisms::{AutomorphismFamily, DEFAULT_TRUNCATION};
use crate::error::{invalid, Result};
use crate::metric_lattice::{Lattice, MetricSpace};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PropertyXOptions {
    /// Half-width for integer index sets that leave a bound open.
    pub truncation: i64,
    /// How far the last ratio must exceed the ratio at the start of the
    /// last quartile to call the scan violated.
    pub explosion_factor: f64,
}

impl Default for PropertyXOptions {
    fn default() -> Self {
        PropertyXOptions {
            truncation: DEFAULT_TRUNCATION,
            explosion_factor: 10.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub params: Vec<f64>,
    pub upper: f64,
    pub jacobian: f64,
    pub count: u64,
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum PropertyXVerdict {
    Holds {
        c: f64,
        r: f64,
        m: f64,
    },
    /// Heuristic on the truncation: the ratio trace keeps growing.
    Violated {
        witness: Vec<f64>,
        count: u64,
        /// `1 + C δ(h)` with `C` the largest ratio seen before the witness.
        bound_attempted: f64,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PropertyXReport {
    pub verdict: PropertyXVerdict,
    /// `max (count − 1)/δ` over the scan, bumped so that
    /// `count ≤ 1 + C δ` holds in floating point for every row.
    pub c_estimate: f64,
    pub r: f64,
    pub m: f64,
    pub rows: Vec<ScanRow>,
    pub note: String,
}

impl PropertyXReport {
    pub fn holds(&self) -> bool {
        matches!(self.verdict, PropertyXVerdict::Holds { .. })
    }
}

/// Scans `♯(Γ⊥ ∩ α̂_h B(e,r)) ≤ 1 + C δ(h)` over the members with `L(h) > M`.
pub fn property_x_scan(
    family: &AutomorphismFamily,
    lattice: &Lattice,
    metric: &MetricSpace,
    r: f64,
    m: f64,
    opts: &PropertyXOptions,
) -> Result<PropertyXReport> {
    if !(m > 0.0) {
        return invalid("property_x_scan needs M > 0");
    }
    let members: Vec<_> = family
        .members(opts.truncation)?
        .into_iter()
        .filter(|h| h.lipschitz.upper > m)
        .collect();
    if members.is_empty() {
        return invalid(format!("no scanned member has L(h) > M = {m}"));
    }
    let rows: Vec<ScanRow> = members
        .par_iter()
        .map(|h| {
            let c = enumerate(lattice, &h.automorphism, r, metric)?;
            Ok(ScanRow {
                params: h.params.clone(),
                upper: h.lipschitz.upper,
                jacobian: h.jacobian,
                count: c.count,
                ratio: (c.count as f64 - 1.0) / h.jacobian,
            })
        })
        .collect::<Result<_>>()?;

    let mut c = rows.iter().map(|r| r.ratio).fold(0.0, f64::max);
    while rows.iter().any(|row| row.count as f64 > 1.0 + c * row.jacobian) {
        c = c.next_up();
    }

    // One value per L level (the largest ratio), levels in increasing L.
    let mut order: Vec<usize> = (0..rows.len()).collect();
    order.sort_by(|&a, &b| rows[a].upper.total_cmp(&rows[b].upper).then(a.cmp(&b)));
    let mut levels: Vec<(f64, usize)> = Vec::new();
    for &i in &order {
        let row = &rows[i];
        match levels.last_mut() {
            Some((u, best)) if (row.upper - *u).abs() <= 1e-12 * u.abs() => {
                if row.ratio >= rows[*best].ratio {
                    *best = i;
                }
            }
            _ => levels.push((row.upper, i)),
        }
    }

    let note = format!(
        "verdict on truncation: {} members with L(h) > {m}; violation is a heuristic (last-quartile growth by {}x)",
        rows.len(),
        opts.explosion_factor
    );
    let q = levels.len();
    if q >= 2 {
        let start = (3 * q / 4).min(q - 2);
        let tail: Vec<f64> = levels[start..].iter().map(|&(_, i)| rows[i].ratio).collect();
        let increasing = tail.windows(2).all(|w| w[1] > w[0]);
        let last = *tail.last().unwrap();
        if increasing && last >= opts.explosion_factor * tail[0].max(1.0) {
            let wi = levels[q - 1].1;
            let w = &rows[wi];
            let c_pre = levels[..q - 1].iter().map(|&(_, i)| rows[i].ratio).fold(0.0, f64::max);
            return Ok(PropertyXReport {
                verdict: PropertyXVerdict::Violated {
                    witness: w.params.clone(),
                    count: w.count,
                    bound_attempted: 1.0 + c_pre * w.jacobian,
                },
                c_estimate: c,
                r,
                m,
                rows,
                note,
            });
        }
    }
    Ok(PropertyXReport {
        verdict: PropertyXVerdict::Holds { c, r, m },
        c_estimate: c,
        r,
        m,
        rows,
        note,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automorphisms::{Generator, IndexSet, Weight};
    use crate::linalg::Matrix;

    #[test]
    fn anisotropic_family_violates() {
        let f = AutomorphismFamily::matrix_powers(Matrix::diag(&[2.0, 0.5]), Some(-20), Some(20), MetricSpace::linf(2))
            .unwrap();
        let rep = property_x_scan(
            &f,
            &Lattice::integer(2),
            &MetricSpace::linf(2),
            0.4,
            1.0,
            &Default::default(),
        )
        .unwrap();
        match &rep.verdict {
            PropertyXVerdict::Violated {
                witness,
                count,
                bound_attempted,
            } => {
                assert_eq!(witness, &vec![20.0]);
                assert_eq!(*count, 2 * (0.4 * 2f64.powi(20)).floor() as u64 + 1);
                assert!((*count as f64) > *bound_attempted);
            }
            v => panic!("{v:?}"),
        }
    }

    #[test]
    fn gabor_holds_with_zero_constant() {
        let f = AutomorphismFamily::new(
            Generator::GaborShift { spacing: 1.0 },
            IndexSet::Integers {
                min: Some(-50),
                max: Some(50),
            },
            Weight::constant(1.0),
            MetricSpace::gabor(),
        )
        .unwrap();
        let rep = property_x_scan(
            &f,
            &Lattice::gabor(1.0).unwrap(),
            &MetricSpace::gabor(),
            0.5,
            3.0,
            &Default::default(),
        )
        .unwrap();
        assert!(rep.holds());
        assert!(rep.rows.iter().all(|r| r.count == 1 && r.jacobian == 1.0));
        assert_eq!(rep.c_estimate, 0.0);
    }

    #[test]
    fn empty_level_set_rejected() {
        let f = AutomorphismFamily::matrix_powers(Matrix::diag(&[2.0]), Some(-3), Some(0), MetricSpace::l2(1)).unwrap();
        assert!(property_x_scan(
            &f,
            &Lattice::integer(1),
            &MetricSpace::l2(1),
            0.4,
            1.0,
            &Default::default()
        )
        .is_err());
    }

    #[test]
    fn smaller_radius_keeps_constant() {
        let f = AutomorphismFamily::new(
            Generator::Shearlet,
            IndexSet::Grid {
                axes: vec![vec![1.0, 2.0, 4.0, 8.0], (-4..=4).map(f64::from).collect()],
            },
            Weight::constant(1.0),
            MetricSpace::linf(2),
        )
        .unwrap();
        let l = Lattice::integer(2);
        let m = MetricSpace::linf(2);
        let big = property_x_scan(&f, &l, &m, 0.4, 1.0, &Default::default()).unwrap();
        assert!(big.holds());
        for r in [0.1, 0.2, 0.3] {
            let small = property_x_scan(&f, &l, &m, r, 1.0, &Default::default()).unwrap();
            for (a, b) in small.rows.iter().zip(&big.rows) {
                assert!(a.count <= b.count);
                assert!(a.count as f64 <= 1.0 + big.c_estimate * a.jacobian);
            }
        }
    }
}
