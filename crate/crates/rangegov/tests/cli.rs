use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::time::Instant;

use rangegov::formats::panel::PanelFile;
use rangegov::metrics::Metrics;
use rangegov::report::{BacktestBody, HypothesesBody, Kind, Report};
use rangegov_core::hypothesis::{Hypothesis, Outcome};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_rangegov"));
    c.env_remove("RG_CONFIG");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn rangegov")
}

fn ok(args: &[&str]) -> Output {
    let out = run(args);
    assert!(
        out.status.success(),
        "rangegov {args:?} exited {:?}\n{}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn p(dir: &Path, name: &str) -> String {
    dir.join(name).to_string_lossy().into_owned()
}

#[test]
fn year_round_trip_is_fast() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let t = Instant::now();
    ok(&["synth", "--builtin", "year", "--seed", "9", "--out", &p(d, "synth.json"), "--csv", &p(d, "csv")]);
    ok(&["ingest", "--manifest", &p(d, "csv/manifest.toml"), "--out", &p(d, "panel.json")]);
    ok(&["validate", "--panel", &p(d, "panel.json")]);
    ok(&["metrics", "--panel", &p(d, "panel.json"), "--out", &p(d, "metrics.json")]);
    ok(&["hypotheses", "--panel", &p(d, "panel.json"), "--out", &p(d, "hyp.json")]);
    let elapsed = t.elapsed().as_secs_f64();
    assert!(elapsed < 10.0, "round trip took {elapsed:.2}s");

    let panel = PanelFile::read(&d.join("panel.json")).unwrap().panel;
    assert_eq!(panel.candles.len(), 2190);
    let m: Report<Metrics> = Report::read(&d.join("metrics.json"), Kind::Metrics).unwrap();
    assert_eq!(m.body.structural.unwrap().rows.len(), 2190);
}

#[test]
fn export_then_ingest_preserves_the_panel() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(&["synth", "--builtin", "h4-confirm", "--seed", "2", "--out", &p(d, "s.json"), "--csv", &p(d, "csv")]);
    ok(&["ingest", "--manifest", &p(d, "csv/manifest.toml"), "--out", &p(d, "i.json")]);
    let a = PanelFile::read(&d.join("s.json")).unwrap().panel;
    let b = PanelFile::read(&d.join("i.json")).unwrap().panel;
    assert_eq!(a.candles, b.candles);
    assert_eq!(a.funding, b.funding);
    assert_eq!(a.oi, b.oi);
    assert_eq!(a.books, b.books);
    assert_eq!(a.liquidations, b.liquidations);
}

fn pipeline(d: &Path) -> Vec<(String, Vec<u8>)> {
    for name in ["h1-confirm", "h3-falsify", "regime-trending"] {
        ok(&["synth", "--builtin", name, "--seed", "17", "--out", &p(d, &format!("panels/{name}.json"))]);
    }
    ok(&["backtest", "--panels", &p(d, "panels/*.json"), "--out", &p(d, "bt.json")]);
    let panel = p(d, "panels/h1-confirm.json");
    ok(&["metrics", "--panel", &panel, "--out", &p(d, "m.json")]);
    ok(&["hypotheses", "--panel", &panel, "--out", &p(d, "h.json")]);
    ok(&["regime", "--panel", &panel, "--out", &p(d, "r.json")]);
    ok(&["plot", "--report", &p(d, "m.json"), "--kind", "range", "--out", &p(d, "range.svg")]);
    let mut files: Vec<PathBuf> = glob::glob(&p(d, "**/*")).unwrap().flatten().filter(|f| f.is_file()).collect();
    files.sort();
    files
        .into_iter()
        .map(|f| (f.strip_prefix(d).unwrap().to_string_lossy().into_owned(), fs::read(&f).unwrap()))
        .collect()
}

#[test]
fn same_seed_gives_identical_bytes() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let x = pipeline(a.path());
    let y = pipeline(b.path());
    assert_eq!(x.len(), 9);
    for ((na, ba), (nb, bb)) in x.iter().zip(&y) {
        assert_eq!(na, nb);
        assert!(ba == bb, "{na} differs between runs");
    }
}

#[test]
fn backtest_reports_full_diagonal() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    for name in ["h2-confirm", "h2-falsify", "regime-noise"] {
        ok(&["synth", "--builtin", name, "--seed", "4", "--out", &p(d, &format!("{name}.json"))]);
    }
    ok(&["backtest", "--panels", &p(d, "*.json"), "--out", &p(d, "out/bt.json")]);
    let r: Report<BacktestBody> = Report::read(&d.join("out/bt.json"), Kind::Backtest).unwrap();
    let names: Vec<&str> = r.body.runs.iter().map(|r| r.name.as_str()).collect();
    assert_eq!(names, ["h2-confirm", "h2-falsify", "regime-noise"]);
    assert_eq!(r.body.summary.confusion.unwrap().diagonal(), Some(1.0));
}

#[test]
fn single_hypothesis_on_its_scenario() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(&["synth", "--builtin", "h3-confirm", "--seed", "1", "--out", &p(d, "s.json")]);
    ok(&["hypotheses", "--panel", &p(d, "s.json"), "--h", "3", "--out", &p(d, "h.json")]);
    let r: Report<HypothesesBody> = Report::read(&d.join("h.json"), Kind::Hypotheses).unwrap();
    assert!(!r.body.verdicts.is_empty());
    assert!(r.body.verdicts.iter().all(|v| v.hypothesis == Hypothesis::H3));
    assert_eq!(r.body.counts.len(), 1);
    let truth = PanelFile::read(&d.join("s.json")).unwrap().ground_truth.unwrap();
    let e = &truth.expectations[0];
    let v = r.body.verdicts.iter().find(|v| v.window == (e.window.start, e.window.end)).unwrap();
    assert_eq!(v.outcome, Outcome::Confirmed);
}

#[test]
fn density_peak_sits_on_a_scripted_cluster() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(
        d.join("cascade.toml"),
        r#"name = "cascade"
seed = 6

[[segment]]
template = "range"
bars = 120

[[segment]]
template = "cascade"
bars = 30
params = { cluster_usd = 50000000.0 }
"#,
    )
    .unwrap();
    ok(&["synth", "--scenario", &p(d, "cascade.toml"), "--out", &p(d, "s.json")]);
    ok(&["metrics", "--panel", &p(d, "s.json"), "--family", "positioning", "--out", &p(d, "m.json")]);
    ok(&["plot", "--report", &p(d, "m.json"), "--kind", "density", "--out", &p(d, "d.svg")]);
    let svg = fs::read_to_string(d.join("d.svg")).unwrap();
    let tag = svg.split(r#"<g id="peak" data-price=""#).nth(1).expect("peak marker");
    let peak: f64 = tag[..tag.find('"').unwrap()].parse().unwrap();

    let panel = PanelFile::read(&d.join("s.json")).unwrap().panel;
    let biggest = panel.liquidations.iter().map(|e| e.size_usd).fold(0.0, f64::max);
    let nearest = panel
        .liquidations
        .iter()
        .filter(|e| e.size_usd == biggest)
        .map(|e| (e.price - peak).abs() / e.price)
        .fold(f64::INFINITY, f64::min);
    assert!(nearest < 0.01, "peak {peak} is {nearest:.4} from the nearest cluster event");
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(&["synth", "--builtin", "h1-confirm", "--out", &p(d, "s.json")]);

    assert_eq!(run(&["metrics"]).status.code(), Some(2));
    assert_eq!(run(&["validate", "--panel", &p(d, "nope.json")]).status.code(), Some(1));
    fs::write(d.join("bad.json"), "{\"schema_version\": 1}").unwrap();
    assert_eq!(run(&["validate", "--panel", &p(d, "bad.json")]).status.code(), Some(3));
    let set = run(&["metrics", "--panel", &p(d, "s.json"), "--out", &p(d, "m.json"), "--set", "no.such.key=1"]);
    assert_eq!(set.status.code(), Some(6));

    let mut f = PanelFile::read(&d.join("s.json")).unwrap();
    f.panel.books.clear();
    f.write(&d.join("nobooks.json")).unwrap();
    let missing =
        run(&["metrics", "--panel", &p(d, "nobooks.json"), "--family", "liquidity", "--out", &p(d, "x.json")]);
    assert_eq!(missing.status.code(), Some(4));

    f.panel.candles.truncate(10);
    f.write(&d.join("short.json")).unwrap();
    assert_eq!(run(&["regime", "--panel", &p(d, "short.json"), "--out", &p(d, "x.json")]).status.code(), Some(7));
    ok(&["validate", "--panel", &p(d, "s.json")]);
}

#[test]
fn rejected_dataset_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(&["synth", "--builtin", "h1-confirm", "--out", &p(d, "s.json"), "--csv", &p(d, "csv")]);
    // An impossible funding rate is a reject.
    let f = d.join("csv/funding.csv");
    let text = fs::read_to_string(&f).unwrap();
    let mut lines: Vec<String> = text.lines().map(String::from).collect();
    let cols: Vec<&str> = lines[5].split(',').collect();
    let mut cols: Vec<String> = cols.iter().map(|s| s.to_string()).collect();
    cols[2] = "0.02".into();
    lines[5] = cols.join(",");
    fs::write(&f, lines.join("\n") + "\n").unwrap();

    let out = run(&["ingest", "--manifest", &p(d, "csv/manifest.toml"), "--out", &p(d, "i.json")]);
    assert_eq!(out.status.code(), Some(5));
    assert!(!d.join("i.json").exists());
    ok(&["ingest", "--manifest", &p(d, "csv/manifest.toml"), "--out", &p(d, "i.json"), "--allow-flagged"]);
    assert!(d.join("i.json").exists());
}

#[test]
fn config_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("c.toml");
    fs::write(&file, "[funding_rate_magnitude]\nelevated = 0.0007\n[funding_moderation]\nneutral = 0.0002\n").unwrap();
    let f = file.to_string_lossy().into_owned();
    let out = ok(&["config", "--config", &f, "--set", "funding_moderation.neutral=0.0003"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("\"funding_rate_magnitude.elevated\" = 0.0007\n"));
    assert!(text.contains("\"funding_moderation.neutral\" = 0.0003\n"));

    let env = bin().arg("config").env("RG_CONFIG", &file).output().unwrap();
    assert!(String::from_utf8(env.stdout).unwrap().contains("\"funding_rate_magnitude.elevated\" = 0.0007\n"));
}
