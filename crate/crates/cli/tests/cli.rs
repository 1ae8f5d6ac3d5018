use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use rec_sizer::config::ConfigFile;
use rec_sizer::schema::{from_json, RepDaysDoc, ReportDoc, SolutionDoc};
use tempfile::TempDir;

fn fixture() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/community5")
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rec-sizer"))
        .args(args)
        .env("REC_SIZER_LOG", "error")
        .output()
        .expect("spawn rec-sizer")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn ok(args: &[&str]) -> Output {
    let out = run(args);
    assert_eq!(
        code(&out),
        0,
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Copies the shipped community into a scratch directory.
fn scratch() -> TempDir {
    let dir = TempDir::new().unwrap();
    for f in ["loads.csv", "weather.csv", "rec.toml"] {
        fs::copy(fixture().join(f), dir.path().join(f)).unwrap();
    }
    dir
}

fn extract(dir: &Path) -> PathBuf {
    let out = dir.join("repdays.json");
    ok(&[
        "extract",
        "--input",
        s(&dir.join("loads.csv")),
        "--weather",
        s(&dir.join("weather.csv")),
        "--output",
        s(&out),
    ]);
    out
}

fn size(dir: &Path, repdays: &Path, name: &str, extra: &[&str]) -> (PathBuf, Output) {
    let out = dir.join(name);
    let config = dir.join("rec.toml");
    let mut args = vec![
        "size",
        "--config",
        s(&config),
        "--repdays",
        s(repdays),
        "--out",
        s(&out),
    ];
    args.extend_from_slice(extra);
    let r = run(&args);
    (out, r)
}

#[test]
fn synth_reproduces_the_shipped_fixture() {
    let dir = TempDir::new().unwrap();
    ok(&["synth", "--outdir", s(dir.path())]);
    for f in ["loads.csv", "weather.csv", "rec.toml"] {
        assert_eq!(
            fs::read(dir.path().join(f)).unwrap(),
            fs::read(fixture().join(f)).unwrap(),
            "{f}"
        );
    }
}

#[test]
fn pipeline_is_deterministic() {
    let dir = scratch();
    let d = dir.path();
    let rep = extract(d);
    let (a, r) = size(d, &rep, "a.json", &["--gap", "1e-4"]);
    assert_eq!(code(&r), 0, "{}", String::from_utf8_lossy(&r.stderr));
    let (b, r) = size(d, &rep, "b.json", &["--gap", "1e-4", "--threads", "4"]);
    assert_eq!(code(&r), 0);
    let sa: SolutionDoc = from_json(&fs::read_to_string(&a).unwrap()).unwrap();
    let sb: SolutionDoc = from_json(&fs::read_to_string(&b).unwrap()).unwrap();
    assert_eq!(sa.solution, sb.solution);
    assert!(d.join("a.json.manifest.json").exists());

    let eval = d.join("eval.json");
    ok(&[
        "evaluate",
        "--config",
        s(&d.join("rec.toml")),
        "--solution",
        s(&a),
        "--out",
        s(&eval),
    ]);
    let report: ReportDoc = from_json(&fs::read_to_string(&eval).unwrap()).unwrap();
    assert!(
        (report.report.net_profit_eur - sa.solution.objective).abs()
            <= 1e-6 * sa.solution.objective.abs()
    );

    let (one, two) = (d.join("plots1"), d.join("plots2"));
    ok(&["report", "--in", s(&eval), "--outdir", s(&one)]);
    ok(&["report", "--in", s(&eval), "--outdir", s(&two)]);
    let mut names: Vec<String> = fs::read_dir(&one)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    names.sort();
    for stem in [
        "npv",
        "bills",
        "incentives",
        "shared",
        "dispatch_p1",
        "dispatch_p5",
    ] {
        for ext in ["svg", "csv"] {
            assert!(
                names.contains(&format!("{stem}.{ext}")),
                "{stem}.{ext} missing from {names:?}"
            );
        }
    }
    assert!(names.contains(&"manifest.json".to_owned()));
    for n in names
        .iter()
        .filter(|n| n.ends_with(".svg") || n.ends_with(".csv"))
    {
        assert_eq!(
            fs::read(one.join(n)).unwrap(),
            fs::read(two.join(n)).unwrap(),
            "{n}"
        );
    }
    let svg = fs::read_to_string(one.join("npv.svg")).unwrap();
    assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
}

#[test]
fn csv_format_writes_no_svg() {
    let dir = scratch();
    let d = dir.path();
    let rep = extract(d);
    let (sol, r) = size(d, &rep, "sol.json", &[]);
    assert_eq!(code(&r), 0);
    let eval = d.join("eval.json");
    ok(&[
        "evaluate",
        "--config",
        s(&d.join("rec.toml")),
        "--solution",
        s(&sol),
        "--out",
        s(&eval),
    ]);
    let out = d.join("tables");
    ok(&[
        "report",
        "--in",
        s(&eval),
        "--outdir",
        s(&out),
        "--format",
        "csv",
    ]);
    let names: Vec<String> = fs::read_dir(&out)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    assert!(names.iter().any(|n| n == "npv.csv"));
    assert!(names.iter().all(|n| !n.ends_with(".svg")), "{names:?}");
    let npv = fs::read_to_string(out.join("npv.csv")).unwrap();
    assert!(npv.starts_with("year,p1,p2,p3,p4,p5,community"), "{npv}");
    assert_eq!(npv.lines().count(), 27);
}

#[test]
fn config_change_after_sizing_is_rejected() {
    let dir = scratch();
    let d = dir.path();
    let rep = extract(d);
    let (sol, r) = size(d, &rep, "sol.json", &[]);
    assert_eq!(code(&r), 0);
    let toml = d.join("rec.toml");
    let text = fs::read_to_string(&toml)
        .unwrap()
        .replace("discount_rate = 0.03", "discount_rate = 0.04");
    fs::write(&toml, text).unwrap();
    let out = run(&[
        "evaluate",
        "--config",
        s(&toml),
        "--solution",
        s(&sol),
        "--out",
        s(&d.join("e.json")),
    ]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("hashes to"));

    fs::copy(fixture().join("rec.toml"), &toml).unwrap();
    let loads = fs::read_to_string(d.join("loads.csv")).unwrap();
    let mut lines: Vec<String> = loads.lines().map(str::to_owned).collect();
    lines[1].push('1');
    fs::write(d.join("loads.csv"), lines.join("\n") + "\n").unwrap();
    let out = run(&[
        "evaluate",
        "--config",
        s(&toml),
        "--solution",
        s(&sol),
        "--out",
        s(&d.join("e.json")),
    ]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("hashes to"));
}

#[test]
fn node_limit_writes_the_incumbent() {
    let dir = scratch();
    let d = dir.path();
    let rep = extract(d);
    let (sol, r) = size(d, &rep, "sol.json", &["--node-limit", "0"]);
    assert_eq!(code(&r), 5, "{}", String::from_utf8_lossy(&r.stderr));
    let doc: SolutionDoc = from_json(&fs::read_to_string(&sol).unwrap()).unwrap();
    assert!(!doc.solution.stats.proven);
}

#[test]
fn oracle_refuses_full_horizon() {
    let dir = scratch();
    let d = dir.path();
    let rep = extract(d);
    let (_, r) = size(d, &rep, "sol.json", &["--method", "oracle"]);
    assert_eq!(code(&r), 2);
}

#[test]
fn input_errors_exit_2() {
    let dir = scratch();
    let d = dir.path();
    let out = run(&[
        "extract",
        "--input",
        s(&d.join("loads.csv")),
        "--weather",
        s(&d.join("missing.csv")),
        "--output",
        s(&d.join("r.json")),
    ]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("--weather"));

    let bad = d.join("bad.json");
    fs::write(&bad, "{not json").unwrap();
    let (_, r) = size(d, &bad, "sol.json", &[]);
    assert_eq!(code(&r), 2);

    for lambda in ["-1", "rel:x"] {
        let out = run(&[
            "extract",
            "--input",
            "a",
            "--weather",
            "b",
            "--output",
            "c",
            "--lambda",
            lambda,
        ]);
        assert_eq!(code(&out), 2, "{lambda}");
    }
    let (_, r) = size(d, &bad, "sol.json", &["--gap", "-1"]);
    assert_eq!(code(&r), 2);
}

#[test]
fn empty_community_exits_2() {
    let dir = scratch();
    let d = dir.path();
    let rep = extract(d);
    let toml = d.join("rec.toml");
    let mut file = ConfigFile::from_toml_str(&fs::read_to_string(&toml).unwrap()).unwrap();
    file.participants.clear();
    fs::write(&toml, file.to_toml_string().unwrap()).unwrap();
    let (_, r) = size(d, &rep, "sol.json", &[]);
    assert_eq!(code(&r), 2, "{}", String::from_utf8_lossy(&r.stderr));
}

#[test]
fn short_history_exits_3() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    ok(&[
        "synth",
        "--outdir",
        s(d),
        "--participants",
        "2",
        "--hours",
        "2000",
    ]);
    let out = run(&[
        "extract",
        "--input",
        s(&d.join("loads.csv")),
        "--weather",
        s(&d.join("weather.csv")),
        "--output",
        s(&d.join("r.json")),
    ]);
    assert_eq!(code(&out), 3, "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn unregularised_fit_runs() {
    let dir = scratch();
    let d = dir.path();
    let out = d.join("r.json");
    ok(&[
        "extract",
        "--input",
        s(&d.join("loads.csv")),
        "--weather",
        s(&d.join("weather.csv")),
        "--output",
        s(&out),
        "--lambda",
        "0",
    ]);
    let doc: RepDaysDoc = from_json(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(doc.lambdas, vec![0.0; 5]);
}
