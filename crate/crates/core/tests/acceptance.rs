//! Acceptance criteria, one test each. Every test prints a single
//! `criterion N ... PASS|FAIL` line before asserting.

use affine_frames::automorphisms::{
    classify_expansiveness, expanding_on_subspace, lipschitz_constants, lipschitz_oracle, u_c_profile, Automorphism,
    AutomorphismFamily, Envelope, Expansiveness, ExpansivenessProbe, Generator, IndexSet, LevelSet, SubspaceVerdict,
    UcOptions, Weight,
};
use affine_frames::calderon::{
    calderon_box_integral, calderon_restricted, calderon_sum, local_integrability_check, psi_m, CalderonOptions,
    Weighting,
};
use affine_frames::counting::{counting_bounds, enumerate, property_x_scan, PropertyXVerdict};
use affine_frames::frame_functional::{
    calderon_inequality_report, frame_functional, frame_functional_with, make_test_function, symmetric_line_grid,
    AdmissibleRegion, FrameOptions, ReportOptions,
};
use affine_frames::linalg::Matrix;
use affine_frames::metric_lattice::{weil_residual, Lattice, MetricSpace};
use affine_frames::monte_carlo::{count_hits, rng, McConfig};
use affine_frames::profile::{FrequencyProfile, ValueBox};
use rand::Rng;
use std::time::{Duration, Instant};

fn verdict(n: u32, name: &str, ok: bool, detail: &str, start: Instant, budget: Duration) {
    let elapsed = start.elapsed();
    let in_time = elapsed < budget;
    let status = if ok && in_time { "PASS" } else { "FAIL" };
    println!(
        "criterion {n} ({name}): {status} [{detail}; {:.2}s of {}s budget]",
        elapsed.as_secs_f64(),
        budget.as_secs()
    );
    assert!(ok, "criterion {n} failed: {detail}");
    assert!(in_time, "criterion {n} exceeded its runtime budget: {elapsed:?}");
}

fn shannon() -> FrequencyProfile {
    FrequencyProfile::intervals(&[(-1.0, -0.5), (0.5, 1.0)], 1.0).unwrap()
}

fn dyadic() -> AutomorphismFamily {
    AutomorphismFamily::matrix_powers(Matrix::diag(&[2.0]), None, None, MetricSpace::l2(1)).unwrap()
}

fn gabor_family() -> AutomorphismFamily {
    AutomorphismFamily::new(
        Generator::GaborShift { spacing: 1.0 },
        IndexSet::Integers { min: None, max: None },
        Weight::constant(1.0),
        MetricSpace::gabor(),
    )
    .unwrap()
}

fn random_matrix(r: &mut impl Rng, d: usize, max_cond: f64) -> Matrix {
    loop {
        let data: Vec<f64> = (0..d * d).map(|_| r.random_range(-2.0..2.0)).collect();
        let m = Matrix::from_row_slice(d, &data);
        let sv = m.singular_values();
        let (hi, lo) = (sv[0], sv[d - 1]);
        if lo > 1e-3 && hi / lo <= max_cond {
            return m;
        }
    }
}

#[test]
fn criterion_1_shannon_onb() {
    let start = Instant::now();
    let (psi, fam, lat) = (shannon(), dyadic(), Lattice::integer(1));
    let grid = symmetric_line_grid(0.01, 2.0, 200);
    let mut worst_scan = 0.0f64;
    let mut worst_oracle = 0.0f64;
    for xi in &grid {
        let v = calderon_sum(&psi, &fam, xi).unwrap().value;
        let oracle: f64 = (-60..=60).map(|j| psi.eval(&[2f64.powi(j) * xi[0]]).powi(2)).sum();
        worst_scan = worst_scan.max((v - 1.0).abs());
        worst_oracle = worst_oracle.max((v - oracle).abs());
    }
    let mut worst_ff = 0.0f64;
    for eps in [0.01, 0.005] {
        for x0 in [0.3, -0.3, 0.77, 1.6] {
            let tf = make_test_function(&[x0], eps, &MetricSpace::l2(1), AdmissibleRegion::Whole).unwrap();
            let v = frame_functional(&psi, &fam, &lat, &tf.profile).unwrap();
            worst_ff = worst_ff.max((v - 1.0).abs());
        }
    }
    let ok = grid.len() == 400 && worst_scan <= 1e-9 && worst_oracle <= 1e-9 && worst_ff <= 1e-6;
    verdict(
        1,
        "Shannon ONB",
        ok,
        &format!("max |C-1| = {worst_scan:.1e}, max |C-oracle| = {worst_oracle:.1e}, max |I(f)-1| = {worst_ff:.1e}"),
        start,
        Duration::from_secs(5),
    );
}

#[test]
fn criterion_2_gabor_onb() {
    let start = Instant::now();
    let g = FrequencyProfile::intervals(&[(0.0, 1.0)], 1.0).unwrap();
    let on_line = g.clone().on_gabor_line(1).unwrap();
    let fam = gabor_family();
    let mut worst = 0.0f64;
    for i in 0..200 {
        let x = -7.0 + 14.0 * (i as f64 + 0.5) / 200.0;
        let v = calderon_sum(&on_line, &fam, &[x, 1.0]).unwrap().value;
        // Σ_p |ĝ(ξ − p)|² over a window covering the support.
        let direct: f64 = (-50..=50).map(|p| g.eval(&[x - p as f64]).powi(2)).sum();
        worst = worst.max((v - 1.0).abs()).max((v - direct).abs());
    }
    let scan_fam = AutomorphismFamily::new(
        Generator::GaborShift { spacing: 1.0 },
        IndexSet::Integers {
            min: Some(-30),
            max: Some(30),
        },
        Weight::constant(1.0),
        MetricSpace::gabor(),
    )
    .unwrap();
    let px = property_x_scan(
        &scan_fam,
        &Lattice::gabor(1.0).unwrap(),
        &MetricSpace::gabor(),
        0.5,
        2.0,
        &Default::default(),
    )
    .unwrap();
    let unit_jacobian = px.rows.iter().all(|r| r.jacobian == 1.0);
    let ok = worst <= 1e-12 && px.holds() && unit_jacobian;
    verdict(
        2,
        "Gabor ONB",
        ok,
        &format!(
            "max deviation {worst:.1e}, property X holds = {}, C = {}",
            px.holds(),
            px.c_estimate
        ),
        start,
        Duration::from_secs(2),
    );
}

/// `♯{m : ‖α̂⁻¹ B m‖ < r}` by scanning a box of integer vectors.
fn brute_count(basis: &Matrix, alpha: &Matrix, r: f64, metric: &MetricSpace) -> u64 {
    let d = basis.dim();
    let to_m = basis.inverse().unwrap().mul(alpha);
    // ‖x‖∞ ≤ ‖x‖ in both norms, so |m_i| < ‖B⁻¹A‖∞ r.
    let k = (to_m.norm_inf() * r).ceil() as i64 + 1;
    let inv = alpha.inverse().unwrap().mul(basis);
    let mut count = 0;
    let mut m = vec![-k; d];
    loop {
        let mf: Vec<f64> = m.iter().map(|&v| v as f64).collect();
        if metric.norm(&inv.mul_vec(&mf)) < r {
            count += 1;
        }
        let mut i = 0;
        loop {
            if i == d {
                return count;
            }
            m[i] += 1;
            if m[i] <= k {
                break;
            }
            m[i] = -k;
            i += 1;
        }
    }
}

#[test]
fn criterion_3_counting_sandwich() {
    let start = Instant::now();
    let mut r = rng(2024, 0);
    let mut held = 0;
    let mut exact_matches = 0;
    let mut first_failure = String::new();
    let total = 200;
    for i in 0..total {
        let d = 1 + i % 3;
        let basis = random_matrix(&mut r, d, 50.0);
        let a = random_matrix(&mut r, d, 50.0);
        let radius = r.random_range(0.05..2.0);
        let metric = if i % 2 == 0 {
            MetricSpace::l2(d)
        } else {
            MetricSpace::linf(d)
        };
        let lat = Lattice::new(basis.clone()).unwrap();
        let alpha = Automorphism::matrix(a.clone()).unwrap();
        let c = counting_bounds(
            &lat,
            &alpha,
            radius,
            &metric,
            &McConfig {
                samples: 100_000,
                seed: i as u64,
            },
        )
        .unwrap();
        let b = c.bounds.as_ref().unwrap();
        let up_ok = c.count as f64 <= b.upper_bound.value + 3.0 * b.upper_bound.stderr;
        let lo_ok = b.count_at_2r as f64 >= b.lower_bound_at_2r.value - 3.0 * b.lower_bound_at_2r.stderr;
        if up_ok && lo_ok {
            held += 1;
        } else if first_failure.is_empty() {
            first_failure = format!("instance {i}: count {} vs upper {:?}", c.count, b.upper_bound);
        }
        if brute_count(&basis, &a, radius, &metric) == c.count
            && brute_count(&basis, &a, 2.0 * radius, &metric) == b.count_at_2r
        {
            exact_matches += 1;
        }
    }
    let ok = held == total && exact_matches == total;
    verdict(
        3,
        "counting sandwich",
        ok,
        &format!("{held}/{total} sandwiches hold, {exact_matches}/{total} counts match brute force {first_failure}"),
        start,
        Duration::from_secs(120),
    );
}

#[test]
fn criterion_4_shearlet_property_x() {
    let start = Instant::now();
    let eps = 0.4;
    let a_axis: Vec<f64> = (0..=6).map(|k| 2f64.powi(k)).collect();
    let fam = AutomorphismFamily::new(
        Generator::Shearlet,
        IndexSet::Grid {
            axes: vec![a_axis, (-8..=8).map(f64::from).collect()],
        },
        Weight::constant(1.0),
        MetricSpace::linf(2),
    )
    .unwrap();
    let metric = MetricSpace::linf(2);
    let px = property_x_scan(&fam, &Lattice::integer(2), &metric, eps, 1.0, &Default::default()).unwrap();
    let mut product_bound_ok = true;
    for h in fam.members(0).unwrap() {
        let (a, _) = (h.params[0], h.params[1]);
        let n = enumerate(&Lattice::integer(2), &h.automorphism, eps, &metric)
            .unwrap()
            .count;
        let bound = ((2.0 * eps * a).floor() + 1.0) * ((2.0 * eps * a.sqrt()).floor() + 1.0);
        product_bound_ok &= n as f64 <= bound;
    }
    let c_bound = 4.0 * eps * (eps + 1.0);
    let ok = px.holds() && px.c_estimate <= c_bound && product_bound_ok;
    verdict(
        4,
        "shearlet property X",
        ok,
        &format!(
            "C = {:.4} (bound 4ε(ε+1) = {c_bound:.2}), every count within the product bound = {product_bound_ok}",
            px.c_estimate
        ),
        start,
        Duration::from_secs(30),
    );
}

#[test]
fn criterion_5_example_failure() {
    let start = Instant::now();
    let metric = MetricSpace::linf(2);
    let fam = AutomorphismFamily::matrix_powers(Matrix::diag(&[2.0, 0.5]), Some(-20), Some(20), metric).unwrap();
    let px = property_x_scan(&fam, &Lattice::integer(2), &metric, 0.4, 1.0, &Default::default()).unwrap();
    // Integer points with |x| < 0.4·2^j and |y| < 0.4·2^-j.
    let direct = |j: i32| -> u64 {
        let (wx, wy) = (0.4 * 2f64.powi(j), 0.4 * 2f64.powi(-j));
        let kx = wx.ceil() as i64;
        let ky = wy.ceil() as i64;
        let mut n = 0;
        for x in -kx..=kx {
            for y in -ky..=ky {
                if (x as f64).abs() < wx && (y as f64).abs() < wy {
                    n += 1;
                }
            }
        }
        n
    };
    let counts_ok = px.rows.iter().all(|row| row.count == direct(row.params[0] as i32));
    let growth_ok = direct(0) == 1 && (1..=20).all(|j| direct(j) == 2 * (0.4 * 2f64.powi(j)).floor() as u64 + 1);
    let violated = matches!(px.verdict, PropertyXVerdict::Violated { .. });
    let cls = classify_expansiveness(
        &fam,
        &ExpansivenessProbe {
            truncation: 20,
            ..Default::default()
        },
    )
    .unwrap();
    let non_expanding = matches!(cls.verdict, Expansiveness::NonExpanding { .. });
    let ok = counts_ok && growth_ok && violated && non_expanding;
    verdict(
        5,
        "anisotropic failure",
        ok,
        &format!(
            "counts match direct enumeration = {counts_ok}, growth = {growth_ok}, property X violated = {violated}, classified {}",
            cls.verdict.name()
        ),
        start,
        Duration::from_secs(5),
    );
}

#[test]
fn criterion_6_lipschitz_closed_forms() {
    let start = Instant::now();
    let mut r = rng(77, 0);
    let mut cases: Vec<(Automorphism, MetricSpace)> = Vec::new();
    for i in 0..100 {
        let d = 2 + i % 2;
        let a = Automorphism::matrix(random_matrix(&mut r, d, 50.0)).unwrap();
        let metric = if i % 4 < 2 {
            MetricSpace::l2(d)
        } else {
            MetricSpace::linf(d)
        };
        cases.push((a, metric));
    }
    for i in 0..50 {
        let a = 2f64.powf(r.random_range(-3.0..6.0));
        let s = r.random_range(-8.0..8.0);
        let metric = if i % 2 == 0 {
            MetricSpace::l2(2)
        } else {
            MetricSpace::linf(2)
        };
        cases.push((Automorphism::shearlet(a, s).unwrap(), metric));
    }
    let mut worst_gap = 0.0f64;
    let mut inner = true;
    for (k, (a, metric)) in cases.iter().enumerate() {
        let c = lipschitz_constants(a, metric).unwrap();
        let (lo, hi) = lipschitz_oracle(a, metric, 100_000, k as u64).unwrap();
        inner &= hi <= c.upper * (1.0 + 1e-12) && lo >= c.lower * (1.0 - 1e-12);
        worst_gap = worst_gap.max((c.upper - hi) / c.upper).max((lo - c.lower) / c.lower);
    }
    let ok = inner && worst_gap < 1e-3;
    verdict(
        6,
        "Lipschitz closed forms",
        ok,
        &format!(
            "{} cases, oracle inside closed form = {inner}, worst relative gap {worst_gap:.2e}",
            cases.len()
        ),
        start,
        Duration::from_secs(60),
    );
}

#[test]
fn criterion_7_u_c() {
    let start = Instant::now();
    let half_line = |w: Weight| {
        AutomorphismFamily::new(
            Generator::Dilation { dim: 1 },
            IndexSet::Interval {
                lo: 0.0,
                hi: f64::INFINITY,
            },
            w,
            MetricSpace::l2(1),
        )
        .unwrap()
    };
    let c = 3.0;
    let t: Vec<f64> = (0..30).map(|k| 1.0 + 40.0 * k as f64).collect();
    let log = u_c_profile(
        &half_line(Weight::Power {
            scale: 1.0,
            exponent: -1.0,
        }),
        &Envelope::Identity,
        c,
        &t,
        1.0,
        &UcOptions::default(),
    )
    .unwrap();
    let log_err = log.samples.iter().map(|(_, v)| (v - c.ln()).abs()).fold(0.0, f64::max);
    let flat = u_c_profile(
        &half_line(Weight::constant(1.0)),
        &Envelope::Identity,
        c,
        &t,
        1.0,
        &UcOptions::default(),
    )
    .unwrap();
    // ∫_t^{ct} da = (c − 1) t.
    let flat_err = flat
        .samples
        .iter()
        .map(|(t, v)| (v - (c - 1.0) * t).abs() / t)
        .fold(0.0, f64::max);
    let ints = u_c_profile(&dyadic(), &Envelope::Identity, 2.0, &t, 1.0, &UcOptions::default()).unwrap();
    // Powers of two in [t, 2t]: one, or two when t itself is one.
    let int_ok = ints.bounded
        && ints.samples.iter().all(|&(t, v)| {
            let want = (-40..=40)
                .filter(|&j| t <= 2f64.powi(j) && 2f64.powi(j) <= 2.0 * t)
                .count() as f64;
            v == want
        });
    let ok = log_err < 1e-8 && log.bounded && flat_err < 1e-8 && !flat.bounded && int_ok;
    verdict(
        7,
        "u_c criterion",
        ok,
        &format!("|u_c - ln c| ≤ {log_err:.1e}, linear growth error {flat_err:.1e} (bounded = {}), integer counts ok = {int_ok}", flat.bounded),
        start,
        Duration::from_secs(1),
    );
}

#[test]
fn criterion_8_weil_identity() {
    let start = Instant::now();
    let mut r = rng(8, 0);
    let mut worst = 0.0f64;
    for i in 0..20 {
        let d = 1 + i % 2;
        let lat = Lattice::new(random_matrix(&mut r, d, 5.0)).unwrap();
        let center: Vec<f64> = (0..d).map(|_| r.random_range(-1.0..1.0)).collect();
        let widths: Vec<f64> = (0..d).map(|_| r.random_range(0.3..2.0)).collect();
        let power = r.random_range(2..=4u32);
        let bump = FrequencyProfile::bump(center, widths, r.random_range(0.5..2.0), power).unwrap();
        worst = worst.max(weil_residual(&bump, &lat).unwrap());
    }
    verdict(
        8,
        "Weil identity",
        worst < 1e-8,
        &format!("worst residual {worst:.2e} over 20 bumps"),
        start,
        Duration::from_secs(10),
    );
}

fn square_annulus() -> FrequencyProfile {
    let boxes = [
        ([-1.0, -1.0], [1.0, -0.5]),
        ([-1.0, 0.5], [1.0, 1.0]),
        ([-1.0, -0.5], [-0.5, 0.5]),
        ([0.5, -0.5], [1.0, 0.5]),
    ]
    .iter()
    .map(|(lo, hi)| ValueBox {
        lo: lo.to_vec(),
        hi: hi.to_vec(),
        value: 1.0,
    })
    .collect();
    FrequencyProfile::piecewise_constant(boxes).unwrap()
}

#[test]
fn criterion_9_structural_suites() {
    let start = Instant::now();
    let mut failures: Vec<&str> = Vec::new();
    let mut r = rng(9, 0);

    // Ball inclusions: B(α̂ξ₀, ℓr) ⊂ α̂B(ξ₀, r) ⊂ B(α̂ξ₀, Lr).
    let mut inclusion = true;
    for i in 0..1000 {
        let d = 1 + i % 3;
        let metric = if i % 2 == 0 {
            MetricSpace::l2(d)
        } else {
            MetricSpace::linf(d)
        };
        let alpha = Automorphism::matrix(random_matrix(&mut r, d, 20.0)).unwrap();
        let c = lipschitz_constants(&alpha, &metric).unwrap();
        let x0: Vec<f64> = (0..d).map(|_| r.random_range(-3.0..3.0)).collect();
        let rad = r.random_range(0.05..2.0);
        let y0 = alpha.apply(&x0);
        for _ in 0..1000 {
            let u: Vec<f64> = (0..d).map(|_| r.random_range(-1.0..1.0)).collect();
            // A point of B(ξ₀, r) (rejecting outside draws) and of the inner ball.
            let x: Vec<f64> = x0.iter().zip(&u).map(|(a, b)| a + rad * b).collect();
            if metric.in_ball(&x0, rad, &x) {
                inclusion &= metric.norm(&alpha.apply(&x).iter().zip(&y0).map(|(a, b)| a - b).collect::<Vec<_>>())
                    <= c.upper * rad * (1.0 + 1e-12);
            }
            let y: Vec<f64> = y0.iter().zip(&u).map(|(a, b)| a + c.lower * rad * b).collect();
            if metric.in_ball(&y0, c.lower * rad, &y) {
                let back = alpha.apply_inverse(&y);
                let dist = metric.norm(&back.iter().zip(&x0).map(|(a, b)| a - b).collect::<Vec<_>>());
                inclusion &= dist <= rad * (1.0 + 1e-12);
            }
        }
    }
    if !inclusion {
        failures.push("ball inclusion");
    }

    // Measure scaling: Monte Carlo ν(α̂B) against δ ν(B).
    let mut scaling = true;
    for i in 0..20 {
        let d = 1 + i % 3;
        let metric = if i % 2 == 0 {
            MetricSpace::l2(d)
        } else {
            MetricSpace::linf(d)
        };
        let a = random_matrix(&mut r, d, 10.0);
        let alpha = Automorphism::matrix(a.clone()).unwrap();
        let rad = r.random_range(0.2..1.5);
        // Bounding box of α̂B(0, r): |y_i| ≤ r Σ_j |a_ij|.
        let half: Vec<f64> = (0..d)
            .map(|k| rad * a.row(k).iter().map(|v| v.abs()).sum::<f64>())
            .collect();
        let vol: f64 = half.iter().map(|h| 2.0 * h).product();
        let (hits, n) = count_hits(
            d,
            &McConfig {
                samples: 200_000,
                seed: i as u64,
            },
            |u| {
                let y: Vec<f64> = u.iter().zip(&half).map(|(t, h)| (2.0 * t - 1.0) * h).collect();
                metric.norm(&alpha.apply_inverse(&y)) < rad
            },
        );
        let p = hits as f64 / n as f64;
        let est = p * vol;
        let se = vol * (p * (1.0 - p) / n as f64).sqrt();
        let want = alpha.jacobian() * metric.ball_measure(rad).unwrap();
        scaling &= (est - want).abs() <= 3.0 * se + 1e-12;
    }
    if !scaling {
        failures.push("measure scaling");
    }

    // Quadratic scaling of the Calderón sum.
    let shear_fam =
        AutomorphismFamily::matrix_powers(Matrix::diag(&[2.0, 2.0]), None, None, MetricSpace::linf(2)).unwrap();
    let psi2 = square_annulus();
    let mut quad = true;
    for _ in 0..50 {
        let xi = [r.random_range(-3.0..3.0), r.random_range(-3.0..3.0)];
        let c = r.random_range(-3.0..3.0);
        let base = calderon_sum(&psi2, &shear_fam, &xi).unwrap().value;
        let scaled = calderon_sum(&psi2.scaled(c), &shear_fam, &xi).unwrap().value;
        quad &= (scaled - c * c * base).abs() <= 1e-14 * (c * c * base).max(1.0);
    }
    if !quad {
        failures.push("quadratic scaling");
    }

    // Partition additivity, pointwise and for the frame functional.
    let mut additive = true;
    let wide = FrequencyProfile::piecewise_constant(vec![
        ValueBox {
            lo: vec![0.5],
            hi: vec![1.25],
            value: 1.0,
        },
        ValueBox {
            lo: vec![1.25],
            hi: vec![2.0],
            value: -0.5,
        },
    ])
    .unwrap();
    let f = make_test_function(&[0.8], 0.3, &MetricSpace::l2(1), AdmissibleRegion::Whole)
        .unwrap()
        .profile;
    for m in [0.25, 1.0, 3.0, 16.0] {
        let o = CalderonOptions::default();
        for xi in [0.1, 0.7, 1.9] {
            let all = calderon_restricted(&wide, &dyadic(), &[xi], LevelSet::All, Weighting::Plain, &o)
                .unwrap()
                .value;
            let lo = calderon_restricted(&wide, &dyadic(), &[xi], LevelSet::AtMost { m }, Weighting::Plain, &o)
                .unwrap()
                .value;
            let hi = calderon_restricted(&wide, &dyadic(), &[xi], LevelSet::Above { m }, Weighting::Plain, &o)
                .unwrap()
                .value;
            additive &= (all - lo - hi).abs() <= 1e-14 * all.max(1.0);
        }
        let fo = FrameOptions::default();
        let lat = Lattice::integer(1);
        let all = frame_functional_with(&wide, &dyadic(), &lat, &f, LevelSet::All, &fo)
            .unwrap()
            .value;
        let lo = frame_functional_with(&wide, &dyadic(), &lat, &f, LevelSet::AtMost { m }, &fo)
            .unwrap()
            .value;
        let hi = frame_functional_with(&wide, &dyadic(), &lat, &f, LevelSet::Above { m }, &fo)
            .unwrap()
            .value;
        additive &= (all - lo - hi).abs() <= 1e-14 * all.max(1.0);
    }
    if !additive {
        failures.push("partition additivity");
    }

    // Remainder inequality at probed (ξ₀, ε, M) for systems with known A.
    let mut remainder = true;
    let mut probed = 0;
    let line_grid = symmetric_line_grid(0.05, 1.9, 12);
    let gabor_grid: Vec<Vec<f64>> = (0..12).map(|i| vec![-2.9 + 0.5 * i as f64, 1.0]).collect();
    let gabor_window = FrequencyProfile::intervals(&[(0.0, 1.0)], 1.0)
        .unwrap()
        .on_gabor_line(1)
        .unwrap();
    for eps in [0.02, 0.005] {
        for m in [1.0, 4.0] {
            let opts = ReportOptions {
                eps,
                ..Default::default()
            };
            for (psi, fam, lat, grid, a) in [
                (shannon(), dyadic(), Lattice::integer(1), &line_grid, 1.0),
                (
                    shannon().scaled(2f64.sqrt()),
                    dyadic(),
                    Lattice::integer(1),
                    &line_grid,
                    2.0,
                ),
                (
                    gabor_window.clone(),
                    gabor_family(),
                    Lattice::gabor(1.0).unwrap(),
                    &gabor_grid,
                    1.0,
                ),
            ] {
                let rep = calderon_inequality_report(&psi, &fam, &lat, grid, a, a, m, &opts).unwrap();
                for rc in &rep.remainder {
                    probed += 1;
                    remainder &= rc.pass == Some(true);
                }
            }
        }
    }
    if !remainder {
        failures.push("remainder inequality");
    }

    // Expanding on a subspace implies expanding for the power family.
    let mut consistent = true;
    let mut yes = 0;
    let candidates = [
        Matrix::diag(&[2.0, 1.0]),
        Matrix::diag(&[2.0, 3.0]),
        Matrix::diag(&[3.0, -1.0, 1.0]),
        Matrix::from_rows(&[vec![0.0, -2.0], vec![2.0, 0.0]]).unwrap(),
        Matrix::from_rows(&[vec![2.0, 1.0], vec![0.0, 2.0]]).unwrap(),
        Matrix::from_rows(&[vec![0.0, -1.0, 0.0], vec![1.0, 0.0, 0.0], vec![0.0, 0.0, 2.0]]).unwrap(),
        Matrix::diag(&[2.0, 0.5]),
        Matrix::from_rows(&[vec![1.0, 1.0], vec![0.0, 1.0]]).unwrap(),
    ];
    for a in candidates {
        if let SubspaceVerdict::Yes { .. } = expanding_on_subspace(&a).unwrap() {
            yes += 1;
            let metric = MetricSpace::l2(a.dim());
            let fam = AutomorphismFamily::matrix_powers(a, Some(0), Some(30), metric).unwrap();
            let cls = classify_expansiveness(
                &fam,
                &ExpansivenessProbe {
                    truncation: 30,
                    ..Default::default()
                },
            )
            .unwrap();
            consistent &= !matches!(cls.verdict, Expansiveness::NonExpanding { .. });
        }
    }
    if !consistent || yes < 5 {
        failures.push("subspace consistency");
    }

    // Ψ_M decreases to zero where the local integral is finite.
    let mut vanishing = true;
    for (psi, fam, k) in [(shannon(), dyadic(), (0.1, 2.0)), (wide.clone(), dyadic(), (0.2, 1.5))] {
        let li = local_integrability_check(&psi, &fam, &[k.0], &[k.1], 1.0, &CalderonOptions::default()).unwrap();
        if !li.is_finite() {
            vanishing = false;
            continue;
        }
        for i in 0..20 {
            let xi = k.0 + (k.1 - k.0) * (i as f64 + 0.5) / 20.0;
            let vals: Vec<f64> = (0..12)
                .map(|p| psi_m(&psi, &fam, &[xi], 2f64.powi(p)).unwrap().value)
                .collect();
            vanishing &= vals.windows(2).all(|w| w[1] <= w[0]) && vals[11] == 0.0;
        }
    }
    let sh = calderon_box_integral(
        &shannon(),
        &dyadic(),
        &[0.1],
        &[2.0],
        LevelSet::Above { m: 64.0 },
        Weighting::Jacobian,
        &CalderonOptions::default(),
    )
    .unwrap();
    vanishing &= sh.value == 0.0;
    if !vanishing {
        failures.push("Psi_M vanishing");
    }

    verdict(
        9,
        "structural suites",
        failures.is_empty(),
        &format!("{probed} remainder probes, {yes} subspace-expanding matrices; failing: {failures:?}"),
        start,
        Duration::from_secs(180),
    );
}
