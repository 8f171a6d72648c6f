use crate::scenario::*;
use affine_frames::automorphisms::LevelSet;
use affine_frames::automorphisms::{
    classify_expansiveness, expanding_on_subspace, lipschitz_oracle, u_c_profile, ExpansivenessProbe, LipschitzMethod,
    UcOptions,
};
use affine_frames::calderon::{calderon_restricted, CalderonOptions, Truncation, Weighting};
use affine_frames::counting::{counting_bounds, property_x_scan, PropertyXOptions, PropertyXVerdict};
use affine_frames::frame_functional::{
    calderon_inequality_report, random_ensemble, EnsembleOptions, FrameOptions, ReportOptions,
};
use affine_frames::linalg::Matrix;
use affine_frames::metric_lattice::weil_residual_with;
use affine_frames::monte_carlo::McConfig;
use anyhow::{bail, Result};
use rayon::prelude::*;
use serde_json::{json, Value};

/// A CSV table: header plus rows, written verbatim.
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    fn new(name: &str, header: Vec<String>) -> Self {
        Table {
            name: name.to_string(),
            header,
            rows: Vec::new(),
        }
    }

    pub fn to_csv(&self) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        Ok(w.into_inner()?)
    }
}

pub struct Outcome {
    pub pass: bool,
    pub verdict: String,
    pub result: Value,
    pub table: Option<Table>,
}

fn cols(prefix: &str, n: usize) -> Vec<String> {
    (0..n).map(|i| format!("{prefix}_{i}")).collect()
}

fn nums(v: &[f64]) -> Vec<String> {
    v.iter().map(|x| x.to_string()).collect()
}

fn truncation_label(t: &Truncation) -> String {
    match t {
        Truncation::Empty => "empty".into(),
        Truncation::Indices { lo, hi } => format!("{lo}..={hi}"),
        Truncation::Members { count } => format!("{count} members"),
        Truncation::Scales { lo, hi } => format!("({lo}, {hi})"),
    }
}

fn param_width(rows: impl Iterator<Item = usize>) -> usize {
    rows.max().unwrap_or(0)
}

pub fn run(spec: &AnalysisSpec, scenario: &Scenario, setting: &Setting) -> Result<Outcome> {
    match spec {
        AnalysisSpec::CalderonScan(s) => calderon_scan(s, scenario, setting),
        AnalysisSpec::PropertyX(s) => property_x(s, setting),
        AnalysisSpec::Counting(s) => counting(s, setting),
        AnalysisSpec::Lipschitz(s) => lipschitz(s, setting),
        AnalysisSpec::Classify(s) => classify(s, scenario, setting),
        AnalysisSpec::Uc(s) => u_c(s, setting),
        AnalysisSpec::FrameReport(s) => frame_report(s, scenario, setting),
        AnalysisSpec::WeilCheck(s) => weil_check(s, setting),
    }
}

fn calderon_scan(s: &CalderonScanSpec, scenario: &Scenario, st: &Setting) -> Result<Outcome> {
    let grid = s
        .grid
        .clone()
        .unwrap_or_else(|| GridSpec::default_for(&scenario.group))
        .points()?;
    if grid.is_empty() {
        bail!("calderon_scan: empty grid");
    }
    let opts = CalderonOptions {
        truncation: s.truncation,
        ..Default::default()
    };
    let evals = grid
        .par_iter()
        .map(|xi| calderon_restricted(&st.profile, &st.family, xi, LevelSet::All, Weighting::Plain, &opts))
        .collect::<affine_frames::Result<Vec<_>>>()?;
    let d = grid[0].len();
    let mut header = cols("xi", d);
    header.extend(["value", "tail_estimate", "truncation", "certified", "divergent"].map(String::from));
    let mut table = Table::new("calderon_scan", header);
    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    let mut failures = 0usize;
    let mut divergent = 0usize;
    for e in &evals {
        let v = if e.divergent { f64::INFINITY } else { e.value };
        min = min.min(v);
        max = max.max(v);
        let tol = s.tol + e.tail_estimate;
        let ok = !e.divergent && s.a.is_none_or(|a| v >= a - tol) && s.b.is_none_or(|b| v <= b + tol);
        failures += usize::from(!ok);
        divergent += usize::from(e.divergent);
        let mut row = nums(&e.point);
        row.extend([
            e.value.to_string(),
            e.tail_estimate.to_string(),
            truncation_label(&e.truncation),
            e.certified.to_string(),
            e.divergent.to_string(),
        ]);
        table.rows.push(row);
    }
    let pass = failures == 0;
    Ok(Outcome {
        pass,
        verdict: if pass {
            "within_bounds".into()
        } else {
            format!("{failures} points out of bounds")
        },
        result: json!({
            "points": grid.len(),
            "min": min,
            "max": max,
            "a": s.a,
            "b": s.b,
            "failures": failures,
            "divergent": divergent,
            "certified": evals.iter().filter(|e| e.certified).count(),
            "max_tail_estimate": evals.iter().map(|e| e.tail_estimate).fold(0.0, f64::max),
        }),
        table: Some(table),
    })
}

fn property_x(s: &PropertyXSpec, st: &Setting) -> Result<Outcome> {
    let opts = PropertyXOptions {
        truncation: s.truncation,
        explosion_factor: s.explosion_factor,
    };
    let rep = property_x_scan(&st.family, &st.lattice, &st.metric, s.r, s.m, &opts)?;
    let p = param_width(rep.rows.iter().map(|r| r.params.len()));
    let mut header = cols("param", p);
    header.extend(["L", "delta", "count", "ratio"].map(String::from));
    let mut table = Table::new("property_x", header);
    for r in &rep.rows {
        let mut row = nums(&r.params);
        row.extend([
            r.upper.to_string(),
            r.jacobian.to_string(),
            r.count.to_string(),
            r.ratio.to_string(),
        ]);
        table.rows.push(row);
    }
    let within = s.c_max.is_none_or(|c| rep.c_estimate <= c);
    let pass = rep.holds() && within;
    let verdict = match &rep.verdict {
        PropertyXVerdict::Holds { .. } if within => "holds".to_string(),
        PropertyXVerdict::Holds { .. } => format!("holds with C = {} above c_max", rep.c_estimate),
        PropertyXVerdict::Violated { .. } => "violated".to_string(),
    };
    Ok(Outcome {
        pass,
        verdict,
        result: serde_json::to_value(&rep)?,
        table: Some(table),
    })
}

fn counting(s: &CountingSpec, st: &Setting) -> Result<Outcome> {
    let members = match &s.params {
        Some(ps) => ps
            .iter()
            .map(|p| st.family.member(p))
            .collect::<affine_frames::Result<Vec<_>>>()?,
        None => st.family.members(s.truncation)?,
    };
    let mc = McConfig {
        samples: s.samples,
        seed: s.seed,
    };
    let mut jobs = Vec::new();
    for m in &members {
        for &r in &s.radii {
            jobs.push((m, r));
        }
    }
    let results = jobs
        .par_iter()
        .map(|(m, r)| counting_bounds(&st.lattice, &m.automorphism, *r, &st.metric, &mc))
        .collect::<affine_frames::Result<Vec<_>>>()?;
    let p = param_width(members.iter().map(|m| m.params.len()));
    let mut header = cols("param", p);
    header.extend(
        [
            "r",
            "count",
            "upper_bound",
            "upper_stderr",
            "count_2r",
            "lower_bound_2r",
            "lower_stderr",
            "sandwich_holds",
        ]
        .map(String::from),
    );
    let mut table = Table::new("counting", header);
    let mut holds = 0;
    for ((m, r), c) in jobs.iter().zip(&results) {
        let b = c.bounds.as_ref().expect("counting_bounds fills the bounds");
        holds += usize::from(b.sandwich_holds);
        let mut row = nums(&m.params);
        row.extend([
            r.to_string(),
            c.count.to_string(),
            b.upper_bound.value.to_string(),
            b.upper_bound.stderr.to_string(),
            b.count_at_2r.to_string(),
            b.lower_bound_at_2r.value.to_string(),
            b.lower_bound_at_2r.stderr.to_string(),
            b.sandwich_holds.to_string(),
        ]);
        table.rows.push(row);
    }
    let pass = holds == results.len();
    Ok(Outcome {
        pass,
        verdict: format!("{holds}/{} sandwiches hold", results.len()),
        result: json!({ "cases": results.len(), "sandwiches_hold": holds, "results": results }),
        table: Some(table),
    })
}

fn lipschitz(s: &LipschitzSpec, st: &Setting) -> Result<Outcome> {
    let members = st.family.members(s.truncation)?;
    let oracle = members
        .par_iter()
        .map(|m| {
            if s.oracle_directions == 0 {
                Ok(None)
            } else {
                lipschitz_oracle(&m.automorphism, &st.metric, s.oracle_directions, s.seed).map(Some)
            }
        })
        .collect::<affine_frames::Result<Vec<_>>>()?;
    let p = param_width(members.iter().map(|m| m.params.len()));
    let mut header = cols("param", p);
    header.extend(["lower", "upper", "method", "oracle_lower", "oracle_upper", "consistent"].map(String::from));
    let mut table = Table::new("lipschitz", header);
    let mut bad = 0;
    let mut worst_gap: f64 = 0.0;
    for (m, o) in members.iter().zip(&oracle) {
        let c = m.lipschitz;
        let ok = match o {
            Some((lo, hi)) => {
                if c.method == LipschitzMethod::ClosedForm {
                    worst_gap = worst_gap.max((c.upper - hi) / c.upper).max((lo - c.lower) / c.lower);
                }
                *hi <= c.upper * (1.0 + s.tol) && *lo >= c.lower * (1.0 - s.tol)
            }
            None => c.lower > 0.0 && c.upper >= c.lower,
        };
        bad += usize::from(!ok);
        let mut row = nums(&m.params);
        row.extend([
            c.lower.to_string(),
            c.upper.to_string(),
            match c.method {
                LipschitzMethod::ClosedForm => "closed_form".into(),
                LipschitzMethod::NumericalOracle => "numerical_oracle".into(),
            },
            o.map(|x| x.0.to_string()).unwrap_or_default(),
            o.map(|x| x.1.to_string()).unwrap_or_default(),
            ok.to_string(),
        ]);
        table.rows.push(row);
    }
    Ok(Outcome {
        pass: bad == 0,
        verdict: if bad == 0 {
            "consistent".into()
        } else {
            format!("{bad} members inconsistent")
        },
        result: json!({ "members": members.len(), "inconsistent": bad, "worst_relative_gap": worst_gap }),
        table: Some(table),
    })
}

fn classify(s: &ClassifySpec, scenario: &Scenario, st: &Setting) -> Result<Outcome> {
    let probe = ExpansivenessProbe {
        truncation: s.truncation,
        m: s.m,
        n_floor: s.n_floor,
        decay_slope: s.decay_slope,
    };
    let rep = classify_expansiveness(&st.family, &probe)?;
    let subspace = match &scenario.family {
        FamilySpec::MatrixPower { base, .. } => Some(expanding_on_subspace(&Matrix::from_rows(base)?)?),
        _ => None,
    };
    let name = rep.verdict.name();
    let pass = s.expect.as_deref().is_none_or(|e| e == name);
    Ok(Outcome {
        pass,
        verdict: name.to_string(),
        result: json!({ "report": rep, "expanding_on_subspace": subspace, "expect": s.expect }),
        table: None,
    })
}

fn u_c(s: &UcSpec, st: &Setting) -> Result<Outcome> {
    let opts = UcOptions {
        cap: s.cap,
        truncation: s.truncation,
        ..Default::default()
    };
    let prof = u_c_profile(&st.family, &s.envelope, s.c, &s.t.values(), s.m, &opts)?;
    let mut table = Table::new("u_c", vec!["t".into(), "u_c".into()]);
    for (t, u) in &prof.samples {
        table.rows.push(vec![t.to_string(), u.to_string()]);
    }
    let want = s.expect_bounded.unwrap_or(true);
    Ok(Outcome {
        pass: prof.bounded == want,
        verdict: if prof.bounded {
            "bounded".into()
        } else {
            "unbounded".into()
        },
        result: serde_json::to_value(&prof)?,
        table: Some(table),
    })
}

fn frame_report(s: &FrameReportSpec, scenario: &Scenario, st: &Setting) -> Result<Outcome> {
    let grid = s
        .grid
        .clone()
        .unwrap_or_else(|| GridSpec::default_for(&scenario.group))
        .points()?;
    let frame = FrameOptions {
        truncation: s.truncation,
        cells: s.cells,
        order: s.order,
        ..Default::default()
    };
    let probe = if s.probe.size == 0 {
        None
    } else {
        Some(random_ensemble(&EnsembleOptions {
            size: s.probe.size,
            band: (s.probe.band[0], s.probe.band[1]),
            pieces: s.probe.pieces,
            seed: s.probe.seed,
            gabor_line: scenario
                .group
                .is_gabor()
                .then_some(scenario.profile.gabor_line.unwrap_or(1)),
        })?)
    };
    let opts = ReportOptions {
        exclusion: s.exclusion,
        eps: s.eps,
        property_x: PropertyXOptions {
            truncation: s.property_x_truncation,
            ..Default::default()
        },
        frame,
        probe,
    };
    let rep = calderon_inequality_report(&st.profile, &st.family, &st.lattice, &grid, s.a, s.b, s.m, &opts)?;
    let d = grid.first().map(|g| g.len()).unwrap_or(0);
    let mut header = cols("xi", d);
    header.extend(["value", "tol", "lower_ok", "upper_ok", "certified"].map(String::from));
    let mut table = Table::new("frame_report", header);
    for v in &rep.verdicts {
        let mut row = nums(&v.xi);
        row.extend([
            v.value.to_string(),
            v.tol.to_string(),
            v.lower_ok.to_string(),
            v.upper_ok.to_string(),
            v.certified.to_string(),
        ]);
        table.rows.push(row);
    }
    let pass = rep.all_pass();
    let verdict = if pass {
        "pass".to_string()
    } else {
        format!(
            "{} lower and {} upper failures, {} remainder failures",
            rep.lower_failures(),
            rep.upper_failures(),
            rep.remainder.iter().filter(|r| r.pass == Some(false)).count()
        )
    };
    let mut result = serde_json::to_value(&rep)?;
    // The per-point verdicts live in the CSV.
    if let Some(o) = result.as_object_mut() {
        o.remove("verdicts");
        o.insert("points".into(), json!(rep.verdicts.len()));
        o.insert("failures".into(), json!(rep.failures()));
    }
    Ok(Outcome {
        pass,
        verdict,
        result,
        table: Some(table),
    })
}

fn weil_check(s: &WeilCheckSpec, st: &Setting) -> Result<Outcome> {
    let w = weil_residual_with(&st.profile, &st.lattice, s.cells, s.order)?;
    let pass = w.residual < s.tol;
    Ok(Outcome {
        pass,
        verdict: if pass {
            "identity holds".into()
        } else {
            format!("residual {} above {}", w.residual, s.tol)
        },
        result: serde_json::to_value(w)?,
        table: None,
    })
}
