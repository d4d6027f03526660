//! Command-line interface. [`run`] returns the process exit code for
//! commands that finish normally; failures carry theirs in [`Error`].

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rangegov_core::backtest::{run_panel, summarize, PanelRun};
use rangegov_core::hypothesis::Hypothesis;
use rangegov_core::quality::{run_pipeline, Severity};
use rangegov_core::synth::{generate, hypothesis_suite, regime_suite, Scenario, Segment, Template};
use rangegov_core::{Config, Timestamp};
use rayon::prelude::*;

use crate::dataset;
use crate::error::{exit, Error, Result};
use crate::formats::manifest::Manifest;
use crate::formats::panel::PanelFile;
use crate::formats::{config, scenario, time};
use crate::metrics::{self, Family, Metrics};
use crate::plot::{self, PlotKind};
use crate::report::{self, BacktestBody, Kind, Report};

#[derive(Debug, Parser)]
#[command(name = "rangegov", version, about = "4H range-governance analytics for perpetual futures")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Global {
    /// Threshold file (TOML). Defaults to $RG_CONFIG when set.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Override one threshold; repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    /// Record the generation time in reports.
    #[arg(long, global = true)]
    pub stamp: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Load a dataset manifest, merge venues and write a checked panel.
    Ingest {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Also write the quality report here.
        #[arg(long)]
        report: Option<PathBuf>,
        /// Write the panel even when the quality pipeline rejects it.
        #[arg(long)]
        allow_flagged: bool,
    },
    /// Re-run the quality checks on a panel. Exits 0 only when it passes.
    Validate {
        #[arg(long)]
        panel: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Per-bar metric tables.
    Metrics {
        #[arg(long)]
        panel: PathBuf,
        /// structural, cost, positioning or liquidity; all when omitted.
        #[arg(long)]
        family: Option<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Evaluate hypotheses on the panel's windows.
    Hypotheses {
        #[arg(long)]
        panel: PathBuf,
        /// Only this hypothesis (1-4).
        #[arg(long = "h", value_parser = clap::value_parser!(u8).range(1..=4))]
        h: Option<u8>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Regime label, trigger matrix and advisories at the last bar.
    Regime {
        #[arg(long)]
        panel: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Run the narrative filter around this time (RFC 3339 or unix seconds).
        #[arg(long)]
        event: Option<String>,
    },
    /// Generate a synthetic panel with ground truth.
    Synth {
        #[arg(long, conflicts_with = "builtin", required_unless_present = "builtin")]
        scenario: Option<PathBuf>,
        #[arg(long)]
        builtin: Option<String>,
        /// Replace the scenario's seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
        /// Also export the panel as a CSV dataset with a manifest.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Run every hypothesis and the regime classifier over many panels.
    Backtest {
        /// Glob of panel files.
        #[arg(long)]
        panels: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Chart from a metrics report (SVG plus CSV twin).
    Plot {
        #[arg(long)]
        report: PathBuf,
        /// funding, density, depth or range.
        #[arg(long)]
        kind: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print the effective thresholds as TOML.
    Config,
}

/// Builtin scenario names: the hypothesis and regime suites plus `year`.
pub fn builtin_names() -> Vec<String> {
    let mut v: Vec<String> = hypothesis_suite(0).into_iter().chain(regime_suite(0)).map(|s| s.name).collect();
    v.push("year".into());
    v
}

/// A year of 4h bars: quiet ranges alternating with each scripted event.
fn year(seed: u64) -> Scenario {
    let events = [
        Template::Compression,
        Template::Breakout,
        Template::SpikeRevert,
        Template::Cascade,
        Template::Trend,
        Template::Noise,
    ];
    let mut segments = vec![Segment::new(Template::Range, 90)];
    for k in 0..14 {
        segments.push(Segment::new(Template::Range, 120));
        segments.push(Segment::new(events[k % events.len()], 30));
    }
    Scenario::new("year", seed, segments)
}

pub fn builtin(name: &str, seed: u64) -> Option<Scenario> {
    if name == "year" {
        return Some(year(seed));
    }
    hypothesis_suite(seed).into_iter().chain(regime_suite(seed)).find(|s| s.name == name)
}

fn parse_time(s: &str) -> Result<Timestamp> {
    s.parse::<Timestamp>()
        .ok()
        .or_else(|| time::parse(s))
        .ok_or_else(|| Error::Usage(format!("cannot parse time `{s}`")))
}

fn load_config(g: &Global, extra: &[(String, f64)]) -> Result<Config> {
    config::load(g.config.as_deref(), extra, &g.set)
}

fn read_panel(path: &Path) -> Result<PanelFile> {
    PanelFile::read(path)
}

pub fn run(cli: Cli) -> Result<u8> {
    let g = &cli.global;
    match cli.command {
        Command::Ingest { manifest, out, report, allow_flagged } => {
            let m = Manifest::read(&manifest)?;
            let extra: Vec<(String, f64)> = m.config.into_iter().collect();
            let cfg = load_config(g, &extra)?;
            let (panel, quality) = dataset::ingest(&manifest, &cfg)?;
            if let Some(p) = &report {
                Report::new(Kind::Quality, &panel.instrument, quality.clone()).stamped(g.stamp).write(p)?;
            }
            let rejects = quality.count(Severity::Reject);
            if !quality.pass && !allow_flagged {
                for f in quality.flags.iter().filter(|f| f.severity == Severity::Reject) {
                    eprintln!("reject: {f:?}");
                }
                return Err(Error::Quality(rejects));
            }
            PanelFile::new(panel, None).write(&out)?;
            println!("ingested {} ({} flags, {} rejects)", out.display(), quality.flags.len(), rejects);
            Ok(exit::OK)
        }
        Command::Validate { panel, out } => {
            let cfg = load_config(g, &[])?;
            let f = read_panel(&panel)?;
            let (_, quality) = run_pipeline(&f.panel, &[], &cfg);
            if let Some(p) = &out {
                Report::new(Kind::Quality, &f.panel.instrument, quality.clone()).stamped(g.stamp).write(p)?;
            }
            println!(
                "{}: {} ({} checks, {} flags)",
                panel.display(),
                if quality.pass { "pass" } else { "fail" },
                quality.checks_run,
                quality.flags.len()
            );
            Ok(if quality.pass { exit::OK } else { exit::QUALITY })
        }
        Command::Metrics { panel, family, out } => {
            let cfg = load_config(g, &[])?;
            let family = family.as_deref().map(str::parse::<Family>).transpose()?;
            let f = read_panel(&panel)?;
            let m = metrics::compute(&f.panel, family, &cfg)?;
            Report::new(Kind::Metrics, &f.panel.instrument, m).stamped(g.stamp).write(&out)?;
            Ok(exit::OK)
        }
        Command::Hypotheses { panel, h, out } => {
            let cfg = load_config(g, &[])?;
            let f = read_panel(&panel)?;
            let which: Vec<Hypothesis> = match h {
                Some(n) => vec![Hypothesis::ALL[usize::from(n) - 1]],
                None => Hypothesis::ALL.to_vec(),
            };
            let body = report::hypotheses(&f.panel, &which, &cfg);
            for v in &body.verdicts {
                println!("{:?} {} [{}, {}) {:?}", v.hypothesis, v.label, v.window.0, v.window.1, v.outcome);
            }
            Report::new(Kind::Hypotheses, &f.panel.instrument, body).stamped(g.stamp).write(&out)?;
            Ok(exit::OK)
        }
        Command::Regime { panel, out, event } => {
            let cfg = load_config(g, &[])?;
            let event = event.as_deref().map(parse_time).transpose()?;
            let f = read_panel(&panel)?;
            let body = report::regime(&f.panel, event, &cfg)?;
            println!("regime: {} ({})", body.label().as_str(), body.action.action);
            Report::new(Kind::Regime, &f.panel.instrument, body).stamped(g.stamp).write(&out)?;
            Ok(exit::OK)
        }
        Command::Synth { scenario: path, builtin: name, seed, out, csv } => {
            let mut s = match (path, name) {
                (Some(p), _) => scenario::read(&p)?,
                (None, Some(n)) => builtin(&n, seed.unwrap_or(0)).ok_or_else(|| {
                    Error::Usage(format!("unknown builtin `{n}`; one of: {}", builtin_names().join(", ")))
                })?,
                (None, None) => return Err(Error::Usage("give --scenario or --builtin".into())),
            };
            if let Some(seed) = seed {
                s.seed = seed;
            }
            let (panel, truth) = generate(&s)?;
            if let Some(dir) = &csv {
                dataset::export(&panel, dir)?;
            }
            println!("{}: {} bars, {} expectations", s.name, panel.candles.len(), truth.expectations.len());
            PanelFile::new(panel, Some(truth)).write(&out)?;
            Ok(exit::OK)
        }
        Command::Backtest { panels, out } => {
            let cfg = load_config(g, &[])?;
            let mut paths: Vec<PathBuf> = glob::glob(&panels)
                .map_err(|e| Error::Usage(format!("bad glob `{panels}`: {e}")))?
                .filter_map(std::result::Result::ok)
                .collect();
            paths.sort();
            if paths.is_empty() {
                return Err(Error::Missing(format!("no panels match `{panels}`")));
            }
            let files = paths.iter().map(|p| read_panel(p)).collect::<Result<Vec<_>>>()?;
            let runs: Vec<PanelRun> = paths
                .par_iter()
                .zip(&files)
                .map(|(p, f)| {
                    let name = p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
                    run_panel(&name, &f.panel, &cfg)
                })
                .collect();
            let truths: Vec<_> = files.iter().map(|f| f.ground_truth.as_ref()).collect();
            let summary = summarize(&runs, &truths);
            if let Some(d) = summary.confusion.as_ref().and_then(|c| c.diagonal()) {
                println!("{} panels, diagonal {:.3}", summary.panels, d);
            } else {
                println!("{} panels, {} windows", summary.panels, summary.windows);
            }
            let instrument = if files.len() == 1 { files[0].panel.instrument.clone() } else { "multiple".into() };
            Report::new(Kind::Backtest, &instrument, BacktestBody { summary, runs }).stamped(g.stamp).write(&out)?;
            Ok(exit::OK)
        }
        Command::Plot { report: path, kind, out } => {
            let kind: PlotKind = kind.parse()?;
            let r: Report<Metrics> = Report::read(&path, Kind::Metrics)?;
            let twin = plot::render(&r.body, kind, &r.instrument, &out)?;
            println!("wrote {} and {}", out.display(), twin.display());
            Ok(exit::OK)
        }
        Command::Config => {
            let cfg = load_config(g, &[])?;
            print!("{}", config::render(&cfg));
            Ok(exit::OK)
        }
    }
}
