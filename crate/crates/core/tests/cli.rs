use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use slowlight_core::scenario::{run_sweep, write_csv, ScenarioConfig};

const SCENARIO: &str = r#"
mode = "phenomenological"
outputs = ["chi", "n", "slowdown"]

[drive]
omega_p = "3 Omega0"
omega_s = "0.001 Omega0"

[coefficients]
gamma0_2 = "1 Omega0"
gamma0_3 = "2 Omega0"
f2 = 0.1
f3 = 0.2

[sweep]
axis = "delta_s"
start = "-2 Omega0"
stop = "2 Omega0"
points = 3
"#;

fn slowlight(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_slowlight")).args(args).output().unwrap()
}

fn write_scenario(dir: &Path, text: &str) -> String {
    let path = dir.join("scenario.toml");
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn three_points_give_header_and_three_rows() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_scenario(dir.path(), SCENARIO);
    let out = slowlight(&["sweep", "--config", &config, "--format", "csv"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 4);
    assert_eq!(lines[0], "axis_value,chi_re,chi_im,n_re,n_im,slowdown");
    assert!(!text.contains('\r'));
}

#[test]
fn json_values_are_bit_equal_to_csv_values() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_scenario(dir.path(), SCENARIO);
    let csv_path = dir.path().join("out.csv");
    let json_path = dir.path().join("out.json");
    for (format, path) in [("csv", &csv_path), ("json", &json_path)] {
        let out = slowlight(&["sweep", "--config", &config, "--format", format, "--out", path.to_str().unwrap()]);
        assert!(out.status.success());
    }
    let csv = std::fs::read_to_string(&csv_path).unwrap();
    let json: Value = serde_json::from_str(&std::fs::read_to_string(&json_path).unwrap()).unwrap();
    let header: Vec<&str> = csv.lines().next().unwrap().split(',').collect();
    assert_eq!(json["metadata"]["columns"].as_array().unwrap().len(), header.len());
    let records = json["records"].as_array().unwrap();
    for (line, record) in csv.lines().skip(1).zip(records) {
        for (name, field) in header.iter().zip(line.split(',')) {
            let from_csv: f64 = field.parse().unwrap();
            let from_json = record[*name].as_f64().unwrap();
            assert_eq!(from_csv.to_bits(), from_json.to_bits(), "{name}");
        }
    }
}

#[test]
fn window_columns_only_when_requested() {
    let config = ScenarioConfig::from_toml_str(SCENARIO, &[]).unwrap();
    let columns = run_sweep(&config).unwrap().metadata.columns;
    assert!(!columns.iter().any(|c| c.starts_with("window")));

    let with_window =
        ScenarioConfig::from_toml_str(SCENARIO, &[r#"outputs=["chi","window"]"#.to_string(), "sweep.points=201".into()])
            .unwrap();
    let columns = run_sweep(&with_window).unwrap().metadata.columns;
    assert_eq!(&columns[columns.len() - 2..], ["window_center", "window_width"]);
}

#[test]
fn identical_config_gives_identical_bytes() {
    let config = ScenarioConfig::from_toml_str(SCENARIO, &["sweep.points=101".to_string()]).unwrap();
    let render = || {
        let mut buf = Vec::new();
        write_csv(&run_sweep(&config).unwrap(), &mut buf).unwrap();
        buf
    };
    assert_eq!(render(), render());

    let a = slowlight(&["preset", "--name", "fig5"]);
    let b = slowlight(&["preset", "--name", "fig5"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn axis_column_strictly_increases() {
    for name in ["fig2", "fig3", "fig7"] {
        let out = slowlight(&["preset", "--name", name, "--format", "json"]);
        assert!(out.status.success());
        let json: Value = serde_json::from_slice(&out.stdout).unwrap();
        let mut by_branch: std::collections::BTreeMap<String, Vec<f64>> = Default::default();
        for r in json["records"].as_array().unwrap() {
            let branch = r["branch"].as_str().unwrap_or("").to_string();
            by_branch.entry(branch).or_default().push(r["axis_value"].as_f64().unwrap());
        }
        for axis in by_branch.values() {
            assert!(axis.windows(2).all(|w| w[1] > w[0]), "{name}");
        }
    }
}

#[test]
fn emitted_preset_config_reproduces_preset_run() {
    let dir = tempfile::tempdir().unwrap();
    let emitted = slowlight(&["preset", "--name", "fig4", "--emit-config"]);
    assert!(emitted.status.success());
    let config = write_scenario(dir.path(), std::str::from_utf8(&emitted.stdout).unwrap());
    let direct = slowlight(&["preset", "--name", "fig4"]);
    let via_file = slowlight(&["sweep", "--config", &config]);
    assert_eq!(direct.stdout, via_file.stdout);
}

#[test]
fn rates_verb_prints_one_row_per_branch() {
    let dir = tempfile::tempdir().unwrap();
    let emitted = slowlight(&["preset", "--name", "fig2", "--emit-config"]);
    let config = write_scenario(dir.path(), std::str::from_utf8(&emitted.stdout).unwrap());
    let out = slowlight(&["rates", "--config", &config]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 4);
    assert!(text.lines().nth(1).unwrap().starts_with("T=5K,"));
}

#[test]
fn exit_codes_separate_config_and_numerical_failures() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_scenario(dir.path(), SCENARIO);

    let unknown_preset = slowlight(&["preset", "--name", "fig9"]);
    assert_eq!(unknown_preset.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&unknown_preset.stderr).contains("fig2, fig3, fig4, fig5, fig6, fig7"));

    assert_eq!(slowlight(&["sweep", "--config", "/nonexistent/scenario.toml"]).status.code(), Some(1));
    assert_eq!(slowlight(&["sweep", "--config", &config, "--set", "drive.bogus=1"]).status.code(), Some(1));
    assert_eq!(slowlight(&["sweep", "--config", &config, "--format", "xml"]).status.code(), Some(1));
    assert_eq!(slowlight(&["sweep", "--config", &config, "--set", "drive.omega_p=3"]).status.code(), Some(1));
    assert_eq!(slowlight(&["frobnicate"]).status.code(), Some(1));

    // No damping and no pump: the coherence system is singular on resonance.
    let singular = slowlight(&[
        "sweep",
        "--config",
        &config,
        "--set",
        "coefficients.gamma0_2=\"0 Omega0\"",
        "--set",
        "coefficients.gamma0_3=\"0 Omega0\"",
        "--set",
        "drive.omega_p=\"0 Omega0\"",
    ]);
    assert_eq!(singular.status.code(), Some(2), "{}", String::from_utf8_lossy(&singular.stderr));
    assert!(singular.stdout.is_empty());
}
