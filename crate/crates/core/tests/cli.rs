//! End-to-end binary tests: exit-code contract, subcommand composability,
//! seed determinism, and config-file precedence.

use std::path::Path;
use std::process::{Command, Output};

use attodelay::fitting::parse_curve;
use attodelay::units::AU_TIME_IN_AS;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_attodelay")).args(args).output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("process terminated by signal")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

fn data_rows(text: &str) -> Vec<Vec<f64>> {
    text.lines()
        .filter(|l| !l.starts_with('#') && !l.trim().is_empty())
        .skip(1)
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect()
}

fn assert_well_formed_xml(text: &str) {
    let mut reader = quick_xml::Reader::from_str(text);
    loop {
        match reader.read_event() {
            Ok(quick_xml::events::Event::Eof) => break,
            Ok(_) => {}
            Err(e) => panic!("malformed XML: {e}"),
        }
    }
}

fn write_synth(dir: &Path, model: &str, name: &str, extra: &[&str]) -> String {
    let path = dir.join(name).to_string_lossy().into_owned();
    let mut args = vec![
        "synth", "--model", model, "--fmin", "0.04", "--fmax", "0.115", "--n", "20", "--out", &path,
    ];
    args.extend_from_slice(extra);
    let out = run(&args);
    assert_eq!(code(&out), 0, "synth failed: {}", stderr(&out));
    path
}

#[test]
fn model_rows_match_reference_values() {
    let out = run(&["model", "--fmin", "0.06", "--fmax", "0.12", "--n", "2", "--grid", "linear"]);
    assert_eq!(code(&out), 0);
    let rows = data_rows(&stdout(&out));
    assert_eq!(rows.len(), 2);
    let first = &rows[0];
    assert_eq!(first[0], 0.06);
    assert!((first[6] - 1.8967853124294975).abs() < 1e-12); // tau_td
    assert!((first[7] - 0.325436909792725).abs() < 1e-12); // tau_ti
    // At the barrier-suppression point every delay collapses to tau_a.
    let last = &rows[1];
    assert_eq!(last[1], 0.0);
    assert_eq!(last[6], last[3]);
}

#[test]
fn attosecond_units_scale_time_columns() {
    let au = run(&["model", "--fmin", "0.06", "--fmax", "0.12", "--n", "2", "--grid", "linear"]);
    let out = run(&["model", "--fmin", "0.06", "--fmax", "0.12", "--n", "2", "--grid", "linear", "--units", "as"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert!(text.starts_with("# time_unit: as\n"));
    let rows_au = data_rows(&stdout(&au));
    let rows_as = data_rows(&text);
    for (ra, rs) in rows_au.iter().zip(&rows_as) {
        for col in 3..=7 {
            assert!((rs[col] - ra[col] * AU_TIME_IN_AS).abs() <= 1e-9 * rs[col].abs());
        }
        // Dimensionless and geometric columns stay untouched.
        for col in [0, 1, 2, 8, 9] {
            assert_eq!(rs[col], ra[col]);
        }
    }
}

#[test]
fn field_above_suppression_exits_2_with_message() {
    let out = run(&["model", "--fmax", "0.2"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("exceeds atomic field strength 0.12"), "stderr: {}", stderr(&out));
}

#[test]
fn bad_flag_values_exit_2() {
    assert_eq!(code(&run(&["model", "--grid", "cubic"])), 2);
    assert_eq!(code(&run(&["model", "--units", "fs"])), 2);
    assert_eq!(code(&run(&["synth", "--model", "quantum"])), 2);
    assert_eq!(code(&run(&["model", "--no-such-flag"])), 2);
    assert_eq!(code(&run(&["model", "--n", "1"])), 2);
}

#[test]
fn missing_input_file_exits_3() {
    let out = run(&["fit", "/nonexistent/dataset.csv"]);
    assert_eq!(code(&out), 3);
}

#[test]
fn single_row_fit_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let ds = dir.path().join("one.csv");
    std::fs::write(&ds, "f_au,delay\n0.05,1.25\n").unwrap();
    let out = run(&["fit", ds.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("insufficient data"));
}

#[test]
fn synth_is_seed_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = write_synth(dir.path(), "adiabatic_model", "a.csv", &["--noise", "0.01", "--seed", "7"]);
    let b = write_synth(dir.path(), "adiabatic_model", "b.csv", &["--noise", "0.01", "--seed", "7"]);
    let c = write_synth(dir.path(), "adiabatic_model", "c.csv", &["--noise", "0.01", "--seed", "8"]);
    let bytes_a = std::fs::read(a).unwrap();
    assert_eq!(bytes_a, std::fs::read(b).unwrap());
    assert_ne!(bytes_a, std::fs::read(c).unwrap());
}

#[test]
fn model_table_feeds_plot() {
    let dir = tempfile::tempdir().unwrap();
    let table = dir.path().join("table.csv");
    let svg_path = dir.path().join("fig.svg");
    let out = run(&["model", "--fmin", "0.02", "--fmax", "0.1", "--n", "30", "--out", table.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let out = run(&["plot", table.to_str().unwrap(), "--out", svg_path.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let svg = std::fs::read_to_string(&svg_path).unwrap();
    assert_well_formed_xml(&svg);
    for label in ["tau_dion", "tau_db", "tau_td", "tau_ti"] {
        assert!(svg.contains(&format!(">{label}</text>")));
    }
}

#[test]
fn fit_output_feeds_subtract() {
    let dir = tempfile::tempdir().unwrap();
    let ad = write_synth(dir.path(), "adiabatic_model", "ad.csv", &[]);
    let non = write_synth(dir.path(), "nonadiabatic_model", "non.csv", &[]);
    let ad_fit = dir.path().join("ad.json");
    let non_fit = dir.path().join("non.json");
    assert_eq!(code(&run(&["fit", &ad, "--out", ad_fit.to_str().unwrap()])), 0);
    assert_eq!(code(&run(&["fit", &non, "--out", non_fit.to_str().unwrap()])), 0);
    let out = run(&[
        "subtract", ad_fit.to_str().unwrap(), non_fit.to_str().unwrap(), "--n", "10",
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let curve = parse_curve(&stdout(&out)).unwrap();
    assert_eq!(curve.len(), 10);
    // The default grid is the overlap of the two fitted ranges.
    assert_eq!(curve.f_grid[0], 0.04);
    assert_eq!(curve.f_grid[9], 0.115);
    assert!(curve.extrapolated_mask.iter().all(|&m| !m));
}

#[test]
fn config_file_applies_and_flags_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(&cfg, r#"{"fmin": 0.05, "fmax": 0.12, "n": 3, "grid": "linear"}"#).unwrap();
    let from_cfg = run(&["model", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&from_cfg), 0);
    let rows = data_rows(&stdout(&from_cfg));
    assert_eq!(rows.len(), 3);
    assert_eq!(rows[0][0], 0.05);

    let overridden = run(&["model", "--config", cfg.to_str().unwrap(), "--n", "4"]);
    assert_eq!(data_rows(&stdout(&overridden)).len(), 4);

    std::fs::write(&cfg, r#"{"fmin": 0.05, "surprise": 1}"#).unwrap();
    assert_eq!(code(&run(&["model", "--config", cfg.to_str().unwrap()])), 2);
}

#[test]
fn compare_without_out_dir_exits_2() {
    let out = run(&["compare", "--adiabatic", "a.csv", "--nonadiabatic", "b.csv"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("--out"));
}

#[test]
fn compare_writes_a_bundle() {
    let dir = tempfile::tempdir().unwrap();
    let ad = write_synth(dir.path(), "adiabatic_model", "ad.csv", &[]);
    let non = write_synth(dir.path(), "nonadiabatic_model", "non.csv", &[]);
    let bundle = dir.path().join("bundle");
    let out = run(&[
        "compare", "--adiabatic", &ad, "--nonadiabatic", &non, "--n", "15",
        "--out", bundle.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    for name in ["report.json", "manifest.json", "barrier_exp.csv", "model_zeff_1.csv", "model_zeff_1.344.csv"] {
        assert!(bundle.join(name).exists(), "missing {name}");
    }
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(bundle.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["metrics"].as_array().unwrap().len(), 2);
}

#[test]
fn plot_rejects_mixed_units() {
    let dir = tempfile::tempdir().unwrap();
    let au = dir.path().join("au.csv");
    let r#as = dir.path().join("as.csv");
    std::fs::write(&au, "# time_unit: au\nf_au,value,extrapolated\n0.05,1.0,false\n0.06,0.9,false\n").unwrap();
    std::fs::write(&r#as, "# time_unit: as\nf_au,value,extrapolated\n0.05,1.0,false\n0.06,0.9,false\n").unwrap();
    let out = run(&["plot", au.to_str().unwrap(), r#as.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("unit mismatch"));
}

#[test]
fn two_point_curve_renders_one_polyline() {
    let dir = tempfile::tempdir().unwrap();
    let curve = dir.path().join("c.csv");
    std::fs::write(&curve, "# time_unit: au\nf_au,value,extrapolated\n0.05,1.0,false\n0.06,0.9,false\n").unwrap();
    let out = run(&["plot", curve.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let svg = stdout(&out);
    assert_well_formed_xml(&svg);
    assert_eq!(svg.matches("<polyline").count(), 1);
    let points = svg
        .split("points=\"")
        .nth(1)
        .and_then(|rest| rest.split('"').next())
        .unwrap();
    assert_eq!(points.split(' ').count(), 2);
}

#[test]
fn empty_plot_input_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.csv");
    std::fs::write(&empty, "# time_unit: au\nf_au,value,extrapolated\n").unwrap();
    let out = run(&["plot", empty.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
}
