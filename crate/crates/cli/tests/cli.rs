use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use clap::Parser;
use serde_json::Value;
use susy_ep_cli::args::Cli;
use susy_ep_cli::config::{Command as Cmd, Format, RunConfig, Spacing};
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_susy-ep"))
}

fn run_ok(args: &[&str]) -> Output {
    let out = bin().args(args).output().unwrap();
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    out
}

fn run_err(args: &[&str]) -> (i32, Value) {
    let out = bin().args(args).output().unwrap();
    assert!(!out.status.success(), "{args:?} should fail");
    let err: Value = serde_json::from_slice(&out.stderr).expect("stderr is one JSON document");
    (out.status.code().unwrap(), err)
}

fn code(v: &Value) -> &str {
    v["error"]["code"].as_str().unwrap()
}

fn dir_arg(d: &Path) -> String {
    d.to_str().unwrap().to_string()
}

fn read(p: PathBuf) -> String {
    std::fs::read_to_string(&p).unwrap_or_else(|e| panic!("{}: {e}", p.display()))
}

/// Body rows split into cells.
fn rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines().skip(1).map(|l| l.split(',').map(String::from).collect()).collect()
}

fn header(csv: &str) -> &str {
    csv.lines().next().unwrap()
}

fn f(cell: &str) -> f64 {
    cell.parse().unwrap()
}

#[test]
fn golden_headers() {
    let t = TempDir::new().unwrap();
    let o = |s: &str| dir_arg(&t.path().join(s));
    run_ok(&["--out", &o("s"), "spectrum-sweep", "--n", "3", "--count", "5"]);
    run_ok(&["--out", &o("r"), "rigidity-sweep", "--n", "3"]);
    run_ok(&["--out", &o("p"), "perturbation-sweep", "--n", "4", "--count", "12"]);
    run_ok(&["--out", &o("y"), "synthesize", "--n", "4"]);
    assert_eq!(header(&read(t.path().join("s/spectrum.csv"))), "gamma,level,re_omega,im_omega");
    assert_eq!(header(&read(t.path().join("r/rigidity.csv"))), "control,level,abs_r");
    assert_eq!(header(&read(t.path().join("p/splitting.csv"))), "epsilon,pair_a,pair_b,split_re,split_im");
    let fits = "quantity,slope,intercept,r_squared,window_min,window_max";
    assert_eq!(header(&read(t.path().join("r/fits.csv"))), fits);
    assert_eq!(header(&read(t.path().join("p/fits.csv"))), fits);
    assert_eq!(header(&read(t.path().join("y/couplings.csv"))), "bond,coupling");
}

#[test]
fn number_format_round_trips() {
    let t = TempDir::new().unwrap();
    run_ok(&["--out", &dir_arg(t.path()), "spectrum-sweep", "--n", "5", "--count", "9"]);
    let csv = read(t.path().join("spectrum.csv"));
    assert!(!csv.contains('\r'));
    assert!(csv.ends_with('\n'));
    for row in rows(&csv) {
        assert_eq!(row.len(), 4);
        assert!(row[1].parse::<usize>().is_ok());
        for cell in [&row[0], &row[2], &row[3]] {
            let v = f(cell);
            assert!(v.is_finite());
            assert_eq!(&format!("{v:.16e}"), cell);
            let mantissa = cell.split('e').next().unwrap().trim_start_matches('-');
            assert_eq!(mantissa.chars().filter(char::is_ascii_digit).count(), 17, "{cell}");
        }
    }
}

#[test]
fn synthesize_examples() {
    let t = TempDir::new().unwrap();
    run_ok(&["--out", &dir_arg(t.path()), "synthesize", "--n", "6"]);
    let got: Vec<f64> = rows(&read(t.path().join("couplings.csv"))).iter().map(|r| f(&r[1])).collect();
    let want = [5f64.sqrt(), 8f64.sqrt(), 3.0, 8f64.sqrt(), 5f64.sqrt()];
    assert_eq!(got.len(), 5);
    for (a, b) in got.iter().zip(&want) {
        assert!((a - b).abs() < 1e-15);
    }
    let doc: Value = serde_json::from_str(&read(t.path().join("synthesis.json"))).unwrap();
    assert_eq!(doc["verification"]["passed"], Value::Bool(true));
    assert_eq!(doc["step_up"].as_array().unwrap().len(), 5);

    let t2 = TempDir::new().unwrap();
    run_ok(&["--out", &dir_arg(t2.path()), "synthesize", "--n", "2", "--gamma", "0.4", "--omega0", "1.5"]);
    let doc: Value = serde_json::from_str(&read(t2.path().join("synthesis.json"))).unwrap();
    let m = &doc["non_hermitian"];
    let re = |i: usize, j: usize| m["re"][i][j].as_f64().unwrap();
    let im = |i: usize, j: usize| m["im"][i][j].as_f64().unwrap();
    assert_eq!((re(0, 0), im(0, 0)), (1.5, 0.4));
    assert_eq!((re(1, 1), im(1, 1)), (1.5, -0.4));
    assert_eq!((re(0, 1), im(0, 1)), (1.0, 0.0));
    assert_eq!((re(1, 0), im(1, 0)), (1.0, 0.0));
}

#[test]
fn spectrum_examples() {
    let t = TempDir::new().unwrap();
    run_ok(&["--out", &dir_arg(t.path()), "spectrum-sweep", "--n", "3", "--count", "21"]);
    let body = rows(&read(t.path().join("spectrum.csv")));
    assert_eq!(body.len(), 21 * 3);
    for r in &body {
        let (g, re, im) = (f(&r[0]), f(&r[2]), f(&r[3]));
        if g > 1.05 {
            assert!(re.abs() < 1e-12, "γ={g}: Re {re}");
        }
        if g < 0.95 {
            assert!(im.abs() < 1e-12, "γ={g}: Im {im}");
        }
    }
    // The zero level is present at every γ.
    for g in body.chunks(3) {
        assert!(g.iter().any(|r| f(&r[2]).abs() < 1e-8 && f(&r[3]).abs() < 1e-8));
    }

    let t5 = TempDir::new().unwrap();
    run_ok(&[
        "--out", &dir_arg(t5.path()), "spectrum-sweep", "--n", "5", "--min", "0", "--max", "1", "--count", "2",
    ]);
    let body = rows(&read(t5.path().join("spectrum.csv")));
    let first: Vec<f64> = body.iter().filter(|r| f(&r[0]) == 0.0).map(|r| f(&r[2])).collect();
    for (k, v) in first.iter().enumerate() {
        assert!((v - 2.0 * (k as f64 - 2.0)).abs() < 1e-12, "{first:?}");
    }
}

fn fit_slopes(dir: &Path) -> Vec<(String, f64, f64)> {
    rows(&read(dir.join("fits.csv")))
        .into_iter()
        .map(|r| (r[0].clone(), f(&r[1]), f(&r[3])))
        .collect()
}

#[test]
fn rigidity_examples() {
    for (n, want, tol) in [(2, 0.5, 0.02), (3, 1.0, 0.05)] {
        let t = TempDir::new().unwrap();
        run_ok(&["--out", &dir_arg(t.path()), "rigidity-sweep", "--n", &n.to_string()]);
        let fits = fit_slopes(t.path());
        assert_eq!(fits.len(), n);
        for (q, slope, r2) in fits {
            assert!((slope - want).abs() <= tol, "N={n} {q}: {slope}");
            assert!(r2 >= 0.999);
        }
        assert_eq!(rows(&read(t.path().join("rigidity.csv"))).len(), 16 * n);
    }
    let t = TempDir::new().unwrap();
    run_ok(&["--out", &dir_arg(t.path()), "rigidity-sweep", "--n", "3", "--axis", "delta"]);
    for (_, slope, _) in fit_slopes(t.path()) {
        assert!((slope - 1.0).abs() <= 0.05);
    }
}

#[test]
fn perturbation_examples() {
    let t = TempDir::new().unwrap();
    run_ok(&["--out", &dir_arg(t.path()), "perturbation-sweep", "--n", "6"]);
    let fits = fit_slopes(t.path());
    assert_eq!(fits.iter().map(|x| x.0.as_str()).collect::<Vec<_>>(), ["split_re", "split_im"]);
    for (q, slope, _) in fits {
        assert!((slope - 1.0 / 6.0).abs() <= 0.02, "{q}: {slope}");
    }
    let body = rows(&read(t.path().join("splitting.csv")));
    assert_eq!(body.len(), 25);
    assert!(body.iter().all(|r| r[1] == "0" && r[2] == "5"));

    let t4 = TempDir::new().unwrap();
    run_ok(&[
        "--out", &dir_arg(t4.path()), "perturbation-sweep", "--n", "4", "--kind", "single-bond", "--bond", "1",
    ]);
    for (q, slope, _) in fit_slopes(t4.path()) {
        assert!((slope - 0.25).abs() <= 0.01, "{q}: {slope}");
    }

    // A real-only splitting has no imaginary fit; the note says why.
    let t2 = TempDir::new().unwrap();
    run_ok(&["--out", &dir_arg(t2.path()), "perturbation-sweep", "--n", "2"]);
    assert_eq!(fit_slopes(t2.path()).len(), 1);
    let meta: Value = serde_json::from_str(&read(t2.path().join("meta.json"))).unwrap();
    assert!(meta["notes"].as_array().unwrap().iter().any(|n| n.as_str().unwrap().contains("split_im")));
}

#[test]
fn jordan_examples() {
    let t = TempDir::new().unwrap();
    let o = |s: &str| dir_arg(&t.path().join(s));
    run_ok(&["--out", &o("at"), "jordan-check", "--n", "5"]);
    run_ok(&["--out", &o("below"), "jordan-check", "--n", "5", "--gamma", "0.9"]);
    let at: Value = serde_json::from_str(&read(t.path().join("at/jordan.json"))).unwrap();
    let below: Value = serde_json::from_str(&read(t.path().join("below/jordan.json"))).unwrap();
    assert_eq!(at["is_epn"], Value::Bool(true));
    assert_eq!(at["rank_deficiency"], 1);
    assert_eq!(below["is_epn"], Value::Bool(false));
    assert_eq!(below["cluster_count"], 5);
}

#[test]
fn errors_are_structured() {
    let t = TempDir::new().unwrap();
    let out = dir_arg(t.path());

    let (status, e) = run_err(&["--out", &out, "synthesize", "--n", "1"]);
    assert_eq!((status, code(&e)), (2, "invalid_size"));

    let (status, e) = run_err(&["--out", &out, "jordan-check"]);
    assert_eq!((status, code(&e)), (2, "usage"));

    let (status, e) = run_err(&["--out", &out, "rigidity-sweep", "--n", "3", "--min", "1e-3", "--max", "1e-3"]);
    assert_eq!((status, code(&e)), (3, "invalid_grid"));

    let (status, e) = run_err(&[
        "--out", &out, "perturbation-sweep", "--n", "4", "--min", "-1e-4", "--max", "1e-4", "--spacing", "linear",
    ]);
    assert_eq!((status, code(&e)), (3, "invalid_plan"));

    let (_, e) = run_err(&["--out", &out, "perturbation-sweep", "--n", "4", "--kind", "single-bond", "--bond", "4"]);
    assert_eq!(code(&e), "invalid_plan");

    let bad = t.path().join("bad.json");
    std::fs::write(&bad, "{ \"command\": \"jordan-check\", \"chain\": ").unwrap();
    let (status, e) = run_err(&["--config", bad.to_str().unwrap()]);
    assert_eq!((status, code(&e)), (3, "config_parse"));

    let (_, e) = run_err(&["--config", t.path().join("missing.json").to_str().unwrap()]);
    assert_eq!(code(&e), "config_read");

    let (status, e) = run_err(&["frobnicate"]);
    assert_eq!((status, code(&e)), (2, "usage"));

    let (_, e) = run_err(&["--out", &out, "synthesize", "--n", "3", "--coupling", "-1"]);
    assert_eq!(code(&e), "invalid_chain");
}

#[test]
fn config_round_trip_and_rerun() {
    let t = TempDir::new().unwrap();
    let first = t.path().join("first");
    run_ok(&[
        "--out", &dir_arg(&first), "--format", "both", "perturbation-sweep", "--n", "5", "--kind", "single-bond",
    ]);
    let text = read(first.join("config.json"));
    let cfg = RunConfig::from_json(&text).unwrap();
    assert_eq!(cfg.clone().resolved(), cfg);
    assert_eq!(serde_json::to_string_pretty(&cfg).unwrap() + "\n", text);

    let meta: Value = serde_json::from_str(&read(first.join("meta.json"))).unwrap();
    assert_eq!(serde_json::from_value::<RunConfig>(meta["config"].clone()).unwrap(), cfg);
    assert!(meta["timestamp"].is_string() && meta["version"].is_string());

    let second = t.path().join("second");
    run_ok(&["--config", first.join("config.json").to_str().unwrap(), "--out", &dir_arg(&second)]);
    for f in ["splitting.csv", "fits.csv", "splitting.json", "fits.json"] {
        assert_eq!(read(first.join(f)), read(second.join(f)), "{f}");
    }
}

#[test]
fn json_tables_mirror_csv() {
    let t = TempDir::new().unwrap();
    run_ok(&["--out", &dir_arg(t.path()), "--format", "both", "rigidity-sweep", "--n", "2"]);
    let csv = rows(&read(t.path().join("rigidity.csv")));
    let json: Vec<Value> = serde_json::from_str(&read(t.path().join("rigidity.json"))).unwrap();
    assert_eq!(csv.len(), json.len());
    for (r, j) in csv.iter().zip(&json) {
        assert_eq!(f(&r[0]), j["control"].as_f64().unwrap());
        assert_eq!(r[1].parse::<u64>().unwrap(), j["level"].as_u64().unwrap());
        assert_eq!(f(&r[2]), j["abs_r"].as_f64().unwrap());
    }

    let tj = TempDir::new().unwrap();
    run_ok(&["--out", &dir_arg(tj.path()), "--format", "json", "rigidity-sweep", "--n", "2"]);
    assert!(!tj.path().join("rigidity.csv").exists());
    assert!(tj.path().join("rigidity.json").exists());
}

#[test]
fn flags_override_config() {
    let t = TempDir::new().unwrap();
    let path = t.path().join("run.json");
    std::fs::write(
        &path,
        r#"{
            "command": "rigidity-sweep",
            "chain": { "n": 4, "coupling": 1.0, "gamma": 1.0 },
            "sweep": { "min": 1e-6, "max": 1e-3, "count": 16, "spacing": "log" },
            "output": "ignored",
            "format": "json",
            "axis": "delta"
        }"#,
    )
    .unwrap();
    let p = path.to_str().unwrap();
    let cli = Cli::try_parse_from(["susy-ep", "--config", p, "--format", "csv", "rigidity-sweep", "--n", "3", "--count", "10"])
        .unwrap();
    let cfg = cli.into_config().unwrap();
    assert_eq!(cfg.command, Cmd::RigiditySweep);
    assert_eq!(cfg.chain.n, 3);
    assert_eq!(cfg.format, Format::Csv);
    let s = cfg.sweep.unwrap();
    assert_eq!((s.min, s.max, s.count, s.spacing), (1e-6, 1e-3, 10, Spacing::Log));
    assert_eq!(cfg.axis, Some(susy_ep::ep::ControlAxis::Delta));

    let cfg = Cli::try_parse_from(["susy-ep", "--config", p]).unwrap().into_config().unwrap();
    assert_eq!((cfg.chain.n, cfg.format), (4, Format::Json));

    let err = Cli::try_parse_from(["susy-ep", "--config", p, "jordan-check"]).unwrap().into_config().unwrap_err();
    assert_eq!(err.code(), "usage");
}

#[test]
fn unknown_config_fields_are_rejected() {
    let e = RunConfig::from_json(r#"{"command":"synthesize","chain":{"n":3,"coupling":1,"gamma":1},"colour":1}"#)
        .unwrap_err();
    assert_eq!(e.code(), "config_parse");
}

#[test]
fn deterministic_across_runs_and_threads() {
    let t = TempDir::new().unwrap();
    let cases: [(&str, &[&str], &[&str]); 5] = [
        ("synthesize", &["--n", "6"], &["couplings.csv", "synthesis.json"]),
        ("spectrum-sweep", &["--n", "5"], &["spectrum.csv"]),
        ("rigidity-sweep", &["--n", "4"], &["rigidity.csv", "fits.csv"]),
        ("perturbation-sweep", &["--n", "6"], &["splitting.csv", "fits.csv"]),
        ("jordan-check", &["--n", "6"], &["jordan.json"]),
    ];
    for (cmd, extra, files) in cases {
        let mut outputs = Vec::new();
        for (k, threads) in ["1", "4", "4"].iter().enumerate() {
            let dir = t.path().join(format!("{cmd}-{k}"));
            let mut args = vec!["--out", dir.to_str().unwrap(), "--threads", threads, cmd];
            args.extend_from_slice(extra);
            run_ok(&args);
            outputs.push(files.iter().map(|f| read(dir.join(f))).collect::<Vec<_>>());
        }
        assert_eq!(outputs[0], outputs[1], "{cmd}");
        assert_eq!(outputs[1], outputs[2], "{cmd}");
    }
}

#[test]
fn default_grids() {
    let r = RunConfig::new(Cmd::RigiditySweep, susy_ep::ChainSpec::new(3, 1.0, 1.0)).resolved();
    let s = r.sweep.unwrap();
    assert_eq!((s.min, s.max, s.count, s.spacing), (1e-6, 1e-3, 16, Spacing::Log));
    let p = RunConfig::new(Cmd::PerturbationSweep, susy_ep::ChainSpec::new(6, 1.0, 1.0)).resolved();
    let s = p.sweep.unwrap();
    assert_eq!((s.min, s.max, s.count, s.spacing), (1e-12, 1e-4, 25, Spacing::Log));
    assert_eq!(p.perturbation.unwrap().pair, Some((0, 5)));
}
