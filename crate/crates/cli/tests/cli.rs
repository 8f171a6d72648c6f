use affine_frames_cli::{catalog, scenario};
use serde_json::Value;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_affine-frames"))
}

fn scratch(name: &str) -> PathBuf {
    let d = Path::new(env!("CARGO_TARGET_TMPDIR")).join(name);
    let _ = std::fs::remove_dir_all(&d);
    std::fs::create_dir_all(&d).unwrap();
    d
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn report(dir: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("report.json")).unwrap()).unwrap()
}

/// Drops wall-clock and worker fields, which legitimately differ between runs.
fn strip(v: &mut Value) {
    match v {
        Value::Object(m) => {
            m.remove("elapsed_ms");
            m.remove("workers");
            m.values_mut().for_each(strip);
        }
        Value::Array(a) => a.iter_mut().for_each(strip),
        _ => {}
    }
}

#[test]
fn shannon_scenario_passes() {
    let out = scratch("shannon");
    let o = run(&["run", "shannon_onb", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let r = report(&out);
    let scan = &r["analyses"][0];
    assert_eq!(scan["kind"], "calderon_scan");
    assert!((scan["result"]["min"].as_f64().unwrap() - 1.0).abs() < 1e-6);
    assert!((scan["result"]["max"].as_f64().unwrap() - 1.0).abs() < 1e-6);
    assert_eq!(scan["result"]["points"], 400);
    let csv = std::fs::read_to_string(out.join("00_calderon_scan.csv")).unwrap();
    assert!(csv.starts_with("xi_0,value,tail_estimate,truncation,certified,divergent\n"));
    assert_eq!(csv.lines().count(), 401);
}

#[test]
fn example_bad_exits_with_failure() {
    let out = scratch("bad");
    let o = run(&["run", "example_bad", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let r = report(&out);
    let px = &r["analyses"][0];
    assert_eq!(px["verdict"], "violated");
    assert_eq!(px["result"]["verdict"]["verdict"], "violated");
    assert!(px["result"]["verdict"]["witness"].is_array());
    assert_eq!(r["analyses"][1]["verdict"], "non_expanding");
    assert_eq!(r["pass"], false);
}

#[test]
fn malformed_scenarios_exit_with_input_error() {
    let dir = scratch("malformed");
    let path = dir.join("broken.toml");
    std::fs::write(&path, "schema_version = 1\n[group\nkind = \"euclidean\"\n").unwrap();
    let o = run(&[
        "run",
        path.to_str().unwrap(),
        "--out",
        dir.join("out").to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("parse error") && err.contains("line 2"), "{err}");

    let typo = dir.join("typo.toml");
    let text = catalog::get("shannon_onb")
        .unwrap()
        .replace("kind = \"lipschitz\"", "kind = \"lipschitz\"\ntruncaton = 3");
    std::fs::write(&typo, text).unwrap();
    let o = run(&[
        "run",
        typo.to_str().unwrap(),
        "--out",
        dir.join("out2").to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("truncaton"));

    let o = run(&["run", "no_such_scenario", "--out", dir.join("out3").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn resource_limits_exit_with_input_error() {
    let out = scratch("resource");
    let o = run(&[
        "run",
        "anisotropic_dilations",
        "--out",
        out.to_str().unwrap(),
        "--set",
        "analysis.1.truncation=14",
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("above the limit"));
}

#[test]
fn list_names_the_catalog() {
    let o = run(&["list"]);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8_lossy(&o.stdout);
    for name in [
        "shannon_onb",
        "gabor_onb",
        "shearlet_property_x",
        "example_bad",
        "weil_identity",
        "counting_sandwich",
    ] {
        assert!(text.contains(name), "{name} missing from {text}");
    }
    assert_eq!(text.lines().count(), catalog::SCENARIOS.len());
}

#[test]
fn describe_fills_defaults() {
    let o = run(&["describe", "shannon_onb"]);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8_lossy(&o.stdout);
    assert!(text.contains("n_per_side = 200"));
    assert!(text.contains("oracle_directions = 10000"));
    let s = scenario::parse(&text, &[]).unwrap();
    assert_eq!(s, s.resolved());
}

#[test]
fn shipped_scenarios_round_trip() {
    for e in catalog::SCENARIOS {
        let s = scenario::parse(e.text, &[]).unwrap();
        assert_eq!(s.name, e.name);
        let again = scenario::parse(&scenario::to_toml(&s).unwrap(), &[]).unwrap();
        assert_eq!(s, again, "{}", e.name);
        let r = s.resolved();
        assert_eq!(r, scenario::parse(&scenario::to_toml(&r).unwrap(), &[]).unwrap());
    }
}

#[test]
fn runs_are_deterministic_across_worker_counts() {
    let a = scratch("det_a");
    let b = scratch("det_b");
    for (dir, w) in [(&a, "1"), (&b, "4")] {
        let o = run(&[
            "run",
            "counting_sandwich",
            "--out",
            dir.to_str().unwrap(),
            "--workers",
            w,
        ]);
        assert_eq!(o.status.code(), Some(0));
    }
    let csv = "00_counting.csv";
    assert_eq!(std::fs::read(a.join(csv)).unwrap(), std::fs::read(b.join(csv)).unwrap());
    let (mut ra, mut rb) = (report(&a), report(&b));
    strip(&mut ra);
    strip(&mut rb);
    assert_eq!(ra, rb);
}

#[test]
fn overrides_change_and_echo_knobs() {
    let out = scratch("override");
    let o = run(&[
        "run",
        "shannon_onb",
        "--out",
        out.to_str().unwrap(),
        "--set",
        "analysis.0.b=0.5",
        "--set",
        "analysis.0.grid={ kind = \"symmetric_line\", lo = 0.1, hi = 1.0, n_per_side = 5 }",
    ]);
    assert_eq!(o.status.code(), Some(2));
    let r = report(&out);
    let echoed = &r["scenario"]["analysis"][0];
    assert_eq!(echoed["b"], 0.5);
    assert_eq!(echoed["grid"]["n_per_side"], 5);
    assert_eq!(r["analyses"][0]["result"]["failures"], 10);
    // Defaults that were never written are echoed too.
    assert_eq!(r["scenario"]["analysis"][2]["oracle_directions"], 10000);
}

#[test]
fn minimal_scenario_is_runnable() {
    let dir = scratch("minimal");
    let path = dir.join("min.toml");
    std::fs::write(
        &path,
        "schema_version = 1\n\
         [group]\nkind = \"euclidean\"\ndim = 1\n\
         [family]\nkind = \"matrix_power\"\nbase = [[3.0]]\n\
         [profile]\nkind = \"intervals\"\nparts = [[1.0, 3.0]]\n",
    )
    .unwrap();
    let o = run(&[
        "run",
        path.to_str().unwrap(),
        "--out",
        dir.join("out").to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let o = run(&[
        "run",
        path.to_str().unwrap(),
        "--out",
        dir.join("out2").to_str().unwrap(),
        "--set",
        "analysis=[{ kind = \"calderon_scan\" }]",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn sampled_profiles_load_from_csv() {
    let dir = scratch("grid_file");
    // A tent on [0, 2] sampled at spacing 1/4.
    let mut csv = String::from("x,value\n");
    for i in 0..=8 {
        let x = i as f64 * 0.25;
        csv += &format!("{x},{}\n", 1.0 - (x - 1.0f64).abs());
    }
    std::fs::write(dir.join("tent.csv"), csv).unwrap();
    std::fs::write(
        dir.join("tent.toml"),
        "schema_version = 1\n\
         [group]\nkind = \"euclidean\"\ndim = 1\n\
         [lattice]\ncolumns = [[0.7]]\n\
         [family]\nkind = \"matrix_power\"\nbase = [[2.0]]\n\
         [profile]\nkind = \"sampled_grid_file\"\npath = \"tent.csv\"\n\
         [[analysis]]\nkind = \"weil_check\"\n",
    )
    .unwrap();
    let out = dir.join("out");
    let o = run(&[
        "run",
        dir.join("tent.toml").to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let r = report(&out);
    // ∫ tent = 1.
    assert!((r["analyses"][0]["result"]["whole"].as_f64().unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn semicontinuous_unbounded_density_fails() {
    let out = scratch("semi");
    let o = run(&[
        "run",
        "semicontinuous_wavelets",
        "--out",
        out.to_str().unwrap(),
        "--set",
        "family.weight.exponent=0.0",
        "--set",
        "analysis=[{ kind = \"u_c\", cap = 50.0 }]",
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(report(&out)["analyses"][0]["verdict"], "unbounded");
}
