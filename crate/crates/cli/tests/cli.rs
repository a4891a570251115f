//! End-to-end runs of the `iwce` binary: outputs, exit codes and `--spec`.

use std::fs;
use std::process::{Command, Output};

use iwce_cli::spec::RunSpec;
use proptest::prelude::*;

fn iwce(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_iwce")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout_json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&o.stdout)))
}

#[test]
fn compute_icre_closed_form_and_quadrature_agree() {
    let base = ["compute", "--dist", "exp:rate=1", "--weight", "const", "--t1", "0.5", "--t2", "1.5", "--format", "json"];
    let q = iwce(&[&base[..], &["--measure", "icre"]].concat());
    let c = iwce(&[&base[..], &["--measure", "icre-closed"]].concat());
    assert_eq!(code(&q), 0);
    assert_eq!(code(&c), 0);
    let (q, c) = (stdout_json(&q), stdout_json(&c));
    let (a, b) = (q["records"][0]["value"].as_f64().unwrap(), c["records"][0]["value"].as_f64().unwrap());
    assert!((a - b).abs() < 1e-8, "{a} vs {b}");
    assert_eq!(c["records"][0]["method"], "closed_form");
}

#[test]
fn compute_cre_of_unit_exponential() {
    let o = iwce(&["compute", "--t2", "inf", "--t1", "0", "--measure", "iwcre", "--weight", "const", "--dist", "exp:rate=1", "--format", "json"]);
    assert_eq!(code(&o), 0);
    let v = stdout_json(&o);
    assert!((v["records"][0]["value"].as_f64().unwrap() - 1.0).abs() < 1e-9);
    assert_eq!(v["records"][0]["t2"], "inf");
}

#[test]
fn compute_both_gives_one_record_per_convention() {
    let o = iwce(&["compute", "--dist", "uniform:lower=0,upper=1", "--measure", "iwce", "--t1", "0.2", "--t2", "0.7", "--convention", "both", "--format", "csv"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    let mut rows = csv::Reader::from_reader(text.as_bytes());
    let headers = rows.headers().unwrap().clone();
    assert!(headers.iter().any(|h| h == "convention"));
    let convs: Vec<String> = rows.records().map(|r| r.unwrap()[3].to_owned()).collect();
    assert_eq!(convs, ["ratio", "proper"]);
    // Human-readable lines move to stderr when the record takes stdout.
    assert!(String::from_utf8_lossy(&o.stderr).contains("iwce[proper]"));
}

#[test]
fn parse_errors_exit_1_and_name_the_token() {
    let o = iwce(&["compute", "--dist", "exp:rat=1", "--measure", "iwce", "--t1", "0", "--t2", "1"]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("\"rat\""));
    let o = iwce(&["compute", "--dist", "exp:rate=1", "--measure", "iwcx", "--t1", "0", "--t2", "1"]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("iwcx"));
    assert_eq!(code(&iwce(&["compute", "--bogus"])), 1);
    assert_eq!(code(&iwce(&[])), 1);
}

#[test]
fn non_convergence_exits_2() {
    let o = iwce(&[
        "compute", "--dist", "exp:rate=1", "--measure", "iwce", "--t1", "0.5", "--t2", "1.5", "--abs-tol", "1e-15", "--rel-tol",
        "1e-15", "--max-subdivisions", "1",
    ]);
    assert_eq!(code(&o), 2, "{}", String::from_utf8_lossy(&o.stderr));
    // A divergent integral is a numerical failure too.
    let o = iwce(&["compute", "--dist", "exp:rate=1", "--measure", "iwce", "--t1", "0.5", "--t2", "inf"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn checker_crash_exits_3_with_a_replayable_spec() {
    let o = iwce(&["verify", "--max-subdivisions", "1"]);
    assert_eq!(code(&o), 3);
    let err = String::from_utf8_lossy(&o.stderr);
    let replay = err.lines().find_map(|l| l.strip_prefix("replay with: ")).expect("replay line");
    let spec = RunSpec::from_json(replay).unwrap();
    assert_eq!(spec.tolerances.max_subdivisions, Some(1));
}

#[test]
fn sweep_is_row_major_and_flags_skipped_cells() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sweep.csv");
    let o = iwce(&[
        "sweep", "--dist", "exp:rate=1", "--measure", "icre", "--t1-grid", "0,1,3", "--t2-grid", "2,4", "--format", "csv",
        "--output", out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    let mut r = csv::Reader::from_path(&out).unwrap();
    assert_eq!(
        r.headers().unwrap().iter().collect::<Vec<_>>(),
        ["t1", "t2", "convention", "value", "error_estimate", "converged", "status", "note"]
    );
    let cells: Vec<(String, String, String)> =
        r.records().map(|x| x.unwrap()).map(|x| (x[0].to_owned(), x[1].to_owned(), x[6].to_owned())).collect();
    let expect = [("0", "2", "ok"), ("0", "4", "ok"), ("1", "2", "ok"), ("1", "4", "ok"), ("3", "2", "skipped"), ("3", "4", "ok")];
    let expect: Vec<(String, String, String)> =
        expect.iter().map(|(a, b, c)| (a.to_string(), b.to_string(), c.to_string())).collect();
    assert_eq!(cells, expect);
    assert!(String::from_utf8_lossy(&o.stderr).contains("1 skipped"));
}

#[test]
fn sweep_reproduces_the_monotonicity_study() {
    let run = |measure: &str, weight: &str| -> Vec<f64> {
        let o = iwce(&[
            "sweep", "--dist", "exp:rate=1", "--weight", weight, "--measure", measure, "--t1-grid", "0:4.9:50", "--t2", "5",
        ]);
        assert_eq!(code(&o), 0);
        let v = stdout_json(&o);
        v["cells"].as_array().unwrap().iter().map(|c| c["value"].as_f64().unwrap()).collect()
    };
    let icre = run("icre-closed", "const");
    assert_eq!(icre.len(), 50);
    assert!(icre.windows(2).all(|w| w[1] - w[0] <= 0.0));
    let exp = run("iwcre-closed-expweight", "exp:0.9");
    assert!(exp.windows(2).any(|w| w[1] - w[0] > 0.0));
}

#[test]
fn empty_grid_exits_1() {
    let o = iwce(&["sweep", "--dist", "exp:rate=1", "--measure", "icre", "--t1-grid", "0:1:0", "--t2", "2"]);
    assert_eq!(code(&o), 1);
}

#[test]
fn ingest_reports_quantiles_and_bad_lines() {
    let dir = tempfile::tempdir().unwrap();
    let good = dir.path().join("two.txt");
    fs::write(&good, "0.5\n\n2.5\n").unwrap();
    let o = iwce(&["ingest", good.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8_lossy(&o.stdout);
    assert!(text.contains("n = 2"), "{text}");
    assert!(text.contains("max = 2.5"), "{text}");

    let bad = dir.path().join("bad.txt");
    let mut lines: Vec<String> = (1..=16).map(|k| format!("{k}")).collect();
    lines.push("-3".into());
    fs::write(&bad, lines.join("\n")).unwrap();
    let o = iwce(&["ingest", bad.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 17"));
}

#[test]
fn ingested_file_feeds_later_commands() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("d.txt");
    fs::write(&data, "1\n2\n3\n").unwrap();
    let dist = format!("emp:{}", data.display());
    let o = iwce(&["compute", "--dist", &dist, "--measure", "iwce", "--t1", "0", "--t2", "4", "--format", "json"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let third = 1.0_f64 / 3.0;
    let expected = -(third * third.ln() + 2.0 * third * (2.0 * third).ln());
    let got = stdout_json(&o)["records"][0]["value"].as_f64().unwrap();
    assert!((got - expected).abs() < 1e-12);
}

#[test]
fn spec_file_drives_a_run_and_flags_override_it() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("run.json");
    fs::write(
        &spec,
        r#"{"command":"compute","dist":"exp:rate=2","weight":"const","t1":"0","t2":"inf","measure":"iwcre","format":"json"}"#,
    )
    .unwrap();
    let o = iwce(&["compute", "--spec", spec.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert!((stdout_json(&o)["records"][0]["value"].as_f64().unwrap() - 0.5).abs() < 1e-9);
    let o = iwce(&["compute", "--spec", spec.to_str().unwrap(), "--dist", "exp:rate=4"]);
    assert!((stdout_json(&o)["records"][0]["value"].as_f64().unwrap() - 0.25).abs() < 1e-9);
    fs::write(&spec, r#"{"command":"compute","dist":"exp:rate=2","colour":"red"}"#).unwrap();
    assert_eq!(code(&iwce(&["compute", "--spec", spec.to_str().unwrap()])), 1);
    fs::write(&spec, r#"{"command":"sweep"}"#).unwrap();
    assert_eq!(code(&iwce(&["compute", "--spec", spec.to_str().unwrap()])), 1);
}

#[test]
fn scan_monotonicity_matches_the_golden_witness() {
    let o = iwce(&["scan-monotonicity"]);
    assert_eq!(code(&o), 0);
    let golden: serde_json::Value =
        serde_json::from_str(include_str!("../golden/monotonicity_witness.json")).unwrap();
    assert_eq!(stdout_json(&o)["witness"], golden);
}

fn arb_spec() -> impl Strategy<Value = RunSpec> {
    let dist = prop_oneof![
        (0.1..10.0_f64).prop_map(|r| format!("exp:rate={r}")),
        (0.0..1.0_f64, 1.0..3.0_f64).prop_map(|(a, b)| format!("uniform:upper={b},lower={a}")),
        (0.5..2.0_f64, 0.1..1.0_f64).prop_map(|(s, x)| format!("gev:xi={x},sigma={s},mu={}", s / x + 1.0)),
    ];
    let weight = prop_oneof![
        Just("const".to_owned()),
        prop::collection::vec(0.0..3.0_f64, 1..4).prop_map(|c| format!(
            "poly:{}",
            c.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ")
        )),
        (-1.0..1.0_f64).prop_map(|a| format!("exp:{a}")),
    ];
    (dist, weight, 0.0..5.0_f64, prop::option::of(1.0..9.0_f64), any::<u64>(), any::<bool>()).prop_map(
        |(dist, weight, t1, t2, seed, as_printed)| {
            let mut s = RunSpec::new(iwce_cli::spec::Command::Compute);
            s.dist = Some(dist);
            s.weight = Some(weight);
            s.t1 = Some(t1.to_string());
            s.t2 = Some(t2.map(|x| (t1 + x).to_string()).unwrap_or_else(|| "inf".into()));
            s.seed = Some(seed);
            s.as_printed = as_printed;
            s
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn run_spec_round_trips_to_a_canonical_string(spec in arb_spec()) {
        let canonical = spec.clone().normalized().unwrap().canonical();
        let again = RunSpec::from_json(&canonical).unwrap().canonical();
        prop_assert_eq!(canonical, again);
    }
}
