//! Batch evaluation of hypotheses and regimes over panels, with a
//! confusion matrix when the panel came with ground truth.
//!
//! [`run_panel`] is independent per panel so callers can fan out; the
//! summary only depends on the order runs are passed in.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::config::Config;
use crate::hypothesis::{evaluate_panel, windows_for, Hypothesis, Outcome, Verdict};
use crate::model::{EvalWindow, Panel};
use crate::regime::{classify_regime, RegimeLabel};
use crate::synth::GroundTruth;

pub const REGIME_KEY: &str = "regime";
const NO_REGIME: &str = "insufficient-data";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowRegime {
    pub window: EvalWindow,
    pub regime: Option<RegimeLabel>,
}

impl WindowRegime {
    pub fn label(&self) -> &'static str {
        self.regime.as_ref().map_or(NO_REGIME, |r| r.label.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PanelRun {
    pub name: String,
    pub verdicts: Vec<Verdict>,
    pub regimes: Vec<WindowRegime>,
}

/// All four hypotheses on every window, plus the regime at each window end.
pub fn run_panel(name: &str, panel: &Panel, cfg: &Config) -> PanelRun {
    let windows = windows_for(panel, cfg);
    let verdicts = evaluate_panel(panel, &windows, &Hypothesis::ALL, cfg);
    let regimes = windows
        .iter()
        .map(|w| WindowRegime { window: w.clone(), regime: classify_regime(panel, w.end, cfg).ok() })
        .collect();
    PanelRun { name: name.to_string(), verdicts, regimes }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutcomeCounts {
    pub confirmed: usize,
    pub falsified: usize,
    pub not_evaluable: usize,
    pub inconclusive: usize,
}

impl OutcomeCounts {
    fn add(&mut self, o: Outcome) {
        match o {
            Outcome::Confirmed => self.confirmed += 1,
            Outcome::Falsified => self.falsified += 1,
            Outcome::NotEvaluable => self.not_evaluable += 1,
            Outcome::Inconclusive => self.inconclusive += 1,
        }
    }

    pub fn total(&self) -> usize {
        self.confirmed + self.falsified + self.not_evaluable + self.inconclusive
    }
}

/// Pooled per-tap hit rates across every H4 verdict.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct TapRates {
    pub taps: usize,
    pub recoil: Option<f64>,
    pub funding_normalization: Option<f64>,
    pub oi_dip: Option<f64>,
}

/// `cells[key][expected][observed]` counts.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub cells: BTreeMap<String, BTreeMap<String, BTreeMap<String, usize>>>,
    pub total: usize,
    pub correct: usize,
}

impl Confusion {
    fn add(&mut self, key: &str, expected: &str, observed: &str) {
        *self
            .cells
            .entry(key.to_string())
            .or_default()
            .entry(expected.to_string())
            .or_default()
            .entry(observed.to_string())
            .or_default() += 1;
        self.total += 1;
        self.correct += usize::from(expected == observed);
    }

    /// Share of expectations met; `None` with no ground truth.
    pub fn diagonal(&self) -> Option<f64> {
        (self.total > 0).then(|| self.correct as f64 / self.total as f64)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub panels: usize,
    pub windows: usize,
    pub counts: BTreeMap<String, OutcomeCounts>,
    pub h4_taps: TapRates,
    pub regimes: BTreeMap<String, usize>,
    /// Present only when at least one panel carried ground truth.
    pub confusion: Option<Confusion>,
}

fn outcome_name(o: Outcome) -> &'static str {
    match o {
        Outcome::Confirmed => "confirmed",
        Outcome::Falsified => "falsified",
        Outcome::NotEvaluable => "not-evaluable",
        Outcome::Inconclusive => "inconclusive",
    }
}

fn hypothesis_key(h: Hypothesis) -> &'static str {
    match h {
        Hypothesis::H1 => "H1",
        Hypothesis::H2 => "H2",
        Hypothesis::H3 => "H3",
        Hypothesis::H4 => "H4",
    }
}

/// What the run produced for `key` on `window`, if anything.
fn observed(run: &PanelRun, key: &str, window: &EvalWindow) -> Option<&'static str> {
    if key == REGIME_KEY {
        return run
            .regimes
            .iter()
            .find(|r| r.window.start == window.start && r.window.end == window.end)
            .map(WindowRegime::label);
    }
    run.verdicts
        .iter()
        .find(|v| hypothesis_key(v.hypothesis) == key && v.window == (window.start, window.end))
        .map(|v| outcome_name(v.outcome))
}

/// Fold runs (and their ground truth, index-aligned) into one summary.
pub fn summarize(runs: &[PanelRun], truths: &[Option<&GroundTruth>]) -> Summary {
    let mut s = Summary { panels: runs.len(), ..Summary::default() };
    for h in Hypothesis::ALL {
        s.counts.insert(hypothesis_key(h).to_string(), OutcomeCounts::default());
    }
    let (mut recoil, mut funding, mut oi) = (0usize, 0usize, 0usize);
    let mut confusion: Option<Confusion> = None;
    for (i, run) in runs.iter().enumerate() {
        s.windows += run.regimes.len();
        for v in &run.verdicts {
            s.counts.entry(hypothesis_key(v.hypothesis).to_string()).or_default().add(v.outcome);
            if v.hypothesis == Hypothesis::H4 {
                for t in &v.taps {
                    s.h4_taps.taps += 1;
                    recoil += usize::from(t.recoiled);
                    funding += usize::from(t.funding_normalized);
                    oi += usize::from(t.oi_dipped);
                }
            }
        }
        for r in &run.regimes {
            *s.regimes.entry(r.label().to_string()).or_default() += 1;
        }
        if let Some(Some(truth)) = truths.get(i) {
            let c = confusion.get_or_insert_with(Confusion::default);
            for e in &truth.expectations {
                c.add(&e.key, &e.expected, observed(run, &e.key, &e.window).unwrap_or("missing"));
            }
        }
    }
    let n = s.h4_taps.taps;
    let rate = |k: usize| (n > 0).then(|| k as f64 / n as f64);
    s.h4_taps.recoil = rate(recoil);
    s.h4_taps.funding_normalization = rate(funding);
    s.h4_taps.oi_dip = rate(oi);
    s.confusion = confusion;
    s
}

/// Serial convenience over [`run_panel`] and [`summarize`].
pub fn backtest(panels: &[(String, Panel, Option<GroundTruth>)], cfg: &Config) -> Summary {
    let runs: Vec<PanelRun> = panels.iter().map(|(n, p, _)| run_panel(n, p, cfg)).collect();
    let truths: Vec<Option<&GroundTruth>> = panels.iter().map(|(_, _, t)| t.as_ref()).collect();
    summarize(&runs, &truths)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{generate, hypothesis_suite, regime_suite};

    fn suite(seed: u64) -> Vec<(String, Panel, Option<GroundTruth>)> {
        hypothesis_suite(seed)
            .iter()
            .chain(&regime_suite(seed))
            .map(|s| {
                let (p, t) = generate(s).unwrap();
                (s.name.clone(), p, Some(t))
            })
            .collect()
    }

    #[test]
    fn empty_set_gives_empty_summary() {
        let s = backtest(&[], &Config::default());
        assert_eq!(s.panels, 0);
        assert_eq!(s.windows, 0);
        assert!(s.confusion.is_none());
        assert!(s.counts.values().all(|c| c.total() == 0));
    }

    #[test]
    fn synthetic_suite_is_fully_separated() {
        let s = backtest(&suite(7), &Config::default());
        let c = s.confusion.as_ref().unwrap();
        assert_eq!(c.total, 12);
        assert_eq!(c.diagonal(), Some(1.0), "{:?}", c.cells);
    }

    #[test]
    fn counts_equal_verdicts() {
        let cfg = Config::default();
        let panels = suite(3);
        let runs: Vec<PanelRun> = panels.iter().map(|(n, p, _)| run_panel(n, p, &cfg)).collect();
        let s = summarize(&runs, &[]);
        let verdicts: usize = runs.iter().map(|r| r.verdicts.len()).sum();
        assert_eq!(s.counts.values().map(OutcomeCounts::total).sum::<usize>(), verdicts);
        assert_eq!(s.regimes.values().sum::<usize>(), s.windows);
        assert!(s.confusion.is_none());
        let taps: usize = runs
            .iter()
            .flat_map(|r| &r.verdicts)
            .filter(|v| v.hypothesis == Hypothesis::H4)
            .map(|v| v.taps.len())
            .sum();
        assert_eq!(s.h4_taps.taps, taps);
    }

    #[test]
    fn real_panel_has_no_truth_columns() {
        let cfg = Config::default();
        let mut panels = suite(1);
        panels.truncate(1);
        panels[0].2 = None;
        panels[0].1.windows.clear();
        let s = backtest(&panels, &cfg);
        assert!(s.confusion.is_none());
        assert!(s.windows > 1);
    }
}
