//! JSON reports. Every report shares one envelope; the body depends on the
//! kind. Output is pretty-printed with a trailing newline and contains no
//! wall-clock time unless the caller asks for a stamp.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use rangegov_core::backtest::{OutcomeCounts, PanelRun, Summary};
use rangegov_core::cost::funding_state;
use rangegov_core::hypothesis::{evaluate_panel, windows_for, Hypothesis, Outcome, Verdict};
use rangegov_core::quality::QualityReport;
use rangegov_core::regime::{
    advise_platform_parameters, build_trigger_matrix, classify_regime, narrative_filter, range_position,
    recommend_action, spike_at, trigger_entries, volatility_history, ActionAdvisory, ActionInputs, NarrativeImpact,
    PlatformAdvisory, Regime, RegimeLabel, TriggerMatrix,
};
use rangegov_core::structural::range_at;
use rangegov_core::{Config, Panel, RangeDefinition, Timestamp};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::Metrics;

pub const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Quality,
    Metrics,
    Hypotheses,
    Regime,
    Backtest,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report<T> {
    pub schema_version: u32,
    pub kind: Kind,
    pub instrument: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generated_at: Option<String>,
    pub body: T,
}

impl<T: Serialize + DeserializeOwned> Report<T> {
    pub fn new(kind: Kind, instrument: &str, body: T) -> Self {
        Report {
            schema_version: REPORT_SCHEMA_VERSION,
            kind,
            instrument: instrument.to_string(),
            generated_at: None,
            body,
        }
    }

    pub fn stamped(mut self, stamp: bool) -> Self {
        if stamp {
            self.generated_at = Some(chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true));
        }
        self
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self).map_err(|e| Error::Usage(e.to_string()))?;
        s.push('\n');
        Ok(s)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
        fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn read(path: &Path, kind: Kind) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let r: Report<T> = serde_json::from_str(&text).map_err(|e| Error::schema(path, e.to_string()))?;
        if r.schema_version != REPORT_SCHEMA_VERSION {
            return Err(Error::schema(path, format!("unsupported report schema {}", r.schema_version)));
        }
        if r.kind != kind {
            return Err(Error::schema(path, format!("expected a {kind:?} report, found {:?}", r.kind)));
        }
        Ok(r)
    }
}

/// Just the envelope fields, for dispatching on kind.
#[derive(Debug, Clone, Deserialize)]
pub struct Header {
    pub schema_version: u32,
    pub kind: Kind,
}

pub fn read_header(path: &Path) -> Result<Header> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::schema(path, e.to_string()))
}

pub type QualityBody = QualityReport;
pub type MetricsBody = Metrics;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesesBody {
    pub counts: BTreeMap<String, OutcomeCounts>,
    pub verdicts: Vec<Verdict>,
}

pub fn hypotheses(panel: &Panel, which: &[Hypothesis], cfg: &Config) -> HypothesesBody {
    let windows = windows_for(panel, cfg);
    let verdicts = evaluate_panel(panel, &windows, which, cfg);
    let mut counts: BTreeMap<String, OutcomeCounts> = BTreeMap::new();
    for h in which {
        counts.insert(format!("{h:?}"), OutcomeCounts::default());
    }
    for v in &verdicts {
        let c = counts.entry(format!("{:?}", v.hypothesis)).or_default();
        match v.outcome {
            Outcome::Confirmed => c.confirmed += 1,
            Outcome::Falsified => c.falsified += 1,
            Outcome::NotEvaluable => c.not_evaluable += 1,
            Outcome::Inconclusive => c.inconclusive += 1,
        }
    }
    HypothesesBody { counts, verdicts }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeBody {
    /// Close time of the bar the advice applies to.
    pub as_of: Option<Timestamp>,
    pub regime: RegimeLabel,
    pub range: Option<RangeDefinition>,
    pub trigger_matrix: Option<TriggerMatrix>,
    /// Why the trigger matrix is absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trigger_error: Option<String>,
    pub action: ActionAdvisory,
    pub platform: Option<PlatformAdvisory>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub narrative: Option<NarrativeImpact>,
}

/// Regime, trigger matrix and advisories as of the panel's last bar.
pub fn regime(panel: &Panel, event: Option<Timestamp>, cfg: &Config) -> Result<RegimeBody> {
    let n = panel.candles.len();
    let label = classify_regime(panel, n, cfg)?;
    let last = n - 1;
    let range = range_at(&panel.candles, n, cfg);
    let (trigger_matrix, trigger_error) = match &range {
        Some(r) => match build_trigger_matrix(&trigger_entries(panel, last, r, cfg), cfg) {
            Ok(m) => (Some(m), None),
            Err(e) => (None, Some(e.to_string())),
        },
        None => (None, Some("no established range".to_string())),
    };
    let windows = windows_for(panel, cfg);
    let verdicts = evaluate_panel(panel, &windows, &[Hypothesis::H2], cfg);
    let funding = funding_state(panel, last, cfg);
    let close = panel.candles[last].close;
    let inputs = ActionInputs {
        regime: label.label,
        position: range
            .as_ref()
            .map_or(rangegov_core::regime::RangePosition::Middle, |r| range_position(close, r, cfg.depth_zone)),
        range: range.as_ref(),
        funding: funding.as_ref(),
        spike: spike_at(panel, last, cfg),
        verdicts: &verdicts,
    };
    let action = recommend_action(&inputs, cfg);
    let narrative = match event {
        Some(t) => Some(
            narrative_filter(panel, t, cfg)
                .ok_or_else(|| Error::Usage(format!("event time {t} is outside the panel")))?,
        ),
        None => None,
    };
    Ok(RegimeBody {
        as_of: panel.end_time(),
        regime: label,
        range,
        trigger_matrix,
        trigger_error,
        action,
        platform: advise_platform_parameters(&volatility_history(&panel.candles, cfg), cfg),
        narrative,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BacktestBody {
    pub summary: Summary,
    pub runs: Vec<PanelRun>,
}

impl RegimeBody {
    pub fn label(&self) -> Regime {
        self.regime.label
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rangegov_core::synth::{generate, hypothesis_suite, regime_suite};

    fn round_trip<T>(body: T, kind: Kind)
    where
        T: Serialize + DeserializeOwned + PartialEq + std::fmt::Debug + Clone,
    {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.json");
        let r = Report::new(kind, "TEST-PERP", body);
        r.write(&path).unwrap();
        let back: Report<T> = Report::read(&path, kind).unwrap();
        assert_eq!(back, r);
        assert!(std::fs::read_to_string(&path).unwrap().ends_with("}\n"));
    }

    #[test]
    fn hypotheses_round_trip() {
        let (p, _) = generate(&hypothesis_suite(1)[0]).unwrap();
        round_trip(hypotheses(&p, &Hypothesis::ALL, &Config::default()), Kind::Hypotheses);
    }

    #[test]
    fn regime_round_trip() {
        let (p, _) = generate(&regime_suite(1)[0]).unwrap();
        let body = regime(&p, p.start_time().map(|t| t + 40 * 14400), &Config::default()).unwrap();
        assert!(body.action.advisory_only);
        assert!(body.narrative.is_some());
        round_trip(body, Kind::Regime);
    }

    #[test]
    fn metrics_round_trip() {
        let (p, _) = generate(&hypothesis_suite(1)[3]).unwrap();
        round_trip(crate::metrics::compute(&p, None, &Config::default()).unwrap(), Kind::Metrics);
    }

    #[test]
    fn wrong_kind_is_schema_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.json");
        Report::new(Kind::Quality, "X", QualityReport::from_flags(0, Vec::new())).write(&path).unwrap();
        assert!(matches!(Report::<HypothesesBody>::read(&path, Kind::Hypotheses), Err(Error::Schema { .. })));
        assert_eq!(read_header(&path).unwrap().kind, Kind::Quality);
    }

    #[test]
    fn unstamped_output_has_no_time() {
        let r = Report::new(Kind::Quality, "X", QualityReport::from_flags(0, Vec::new()));
        assert!(!r.to_json().unwrap().contains("generated_at"));
        assert!(r.stamped(true).to_json().unwrap().contains("generated_at"));
    }
}
