//! Validation pipeline: anomaly flags, cross-source consistency, gap
//! filling. Flags carry the time they refer to, never a vector index, so a
//! second pass over the pipeline's own output reports the same locations.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::config::Config;
use crate::model::{
    BookSnapshot, Candle4H, FundingRecord, LiquidationEvent, OpenInterestRecord, Panel, Timestamp, Validate,
    BAR_SECONDS, DAY_SECONDS,
};
use crate::stats;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Info,
    Interpolated,
    Flag,
    Reject,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct QualityFlag {
    pub check: String,
    pub time: Option<Timestamp>,
    pub location: String,
    pub severity: Severity,
    pub detail: String,
}

impl QualityFlag {
    fn new(
        check: &str,
        time: Option<Timestamp>,
        location: impl Into<String>,
        severity: Severity,
        detail: impl Into<String>,
    ) -> Self {
        QualityFlag { check: check.to_string(), time, location: location.into(), severity, detail: detail.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QualityReport {
    pub checks_run: usize,
    pub flags: Vec<QualityFlag>,
    pub pass: bool,
}

impl QualityReport {
    pub fn from_flags(checks_run: usize, mut flags: Vec<QualityFlag>) -> Self {
        flags.sort();
        flags.dedup();
        let pass = !flags.iter().any(|f| f.severity == Severity::Reject);
        QualityReport { checks_run, flags, pass }
    }

    pub fn count(&self, severity: Severity) -> usize {
        self.flags.iter().filter(|f| f.severity == severity).count()
    }
}

/// One venue's candles, before merging.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExchangeSeries {
    pub exchange_id: String,
    pub candles: Vec<Candle4H>,
}

/// Records further than `tolerance` seconds from the nearest multiple of
/// `step` are flagged for resampling.
pub fn check_timestamps(check: &str, times: &[Timestamp], step: i64, tolerance: i64) -> Vec<QualityFlag> {
    times
        .iter()
        .filter_map(|&t| {
            let r = t.rem_euclid(step);
            let dev = r.min(step - r);
            (dev > tolerance).then(|| {
                QualityFlag::new(check, Some(t), format!("t={t}"), Severity::Flag, format!("{dev}s off grid; resample"))
            })
        })
        .collect()
}

/// Indices of `values` lying more than `sigma * mad_scale * MAD` from the
/// median. When MAD is zero, anything further than `degenerate` (relative)
/// from the median is an outlier. `None` with fewer than three values.
pub fn mad_outliers(values: &[f64], sigma: f64, mad_scale: f64, degenerate: f64) -> Option<Vec<usize>> {
    if values.len() < 3 {
        return None;
    }
    let med = stats::median(values)?;
    let mad = stats::mad(values)?;
    Some(
        values
            .iter()
            .enumerate()
            .filter(|(_, &x)| {
                let d = (x - med).abs();
                if mad > 0.0 {
                    d > sigma * mad_scale * mad
                } else {
                    d > degenerate * med.abs()
                }
            })
            .map(|(i, _)| i)
            .collect(),
    )
}

/// Per-bar robust outlier test across venues.
pub fn check_price_consistency(sources: &[ExchangeSeries], cfg: &Config) -> Vec<QualityFlag> {
    let mut bars: BTreeMap<Timestamp, Vec<(&str, f64)>> = BTreeMap::new();
    for s in sources {
        for c in &s.candles {
            bars.entry(c.open_time).or_default().push((s.exchange_id.as_str(), c.close));
        }
    }
    let mut out = Vec::new();
    let mut skipped = 0usize;
    for (t, closes) in bars {
        let values: Vec<f64> = closes.iter().map(|(_, c)| *c).collect();
        match mad_outliers(&values, cfg.price_outlier_sigma, cfg.mad_scale, cfg.mad_degenerate_tolerance) {
            None => skipped += 1,
            Some(idx) => out.extend(idx.into_iter().map(|i| {
                QualityFlag::new(
                    "price_consistency",
                    Some(t),
                    format!("t={t} exchange={}", closes[i].0),
                    Severity::Flag,
                    format!("close {} is an outlier", closes[i].1),
                )
            })),
        }
    }
    // One summary rather than a flag per bar: single-venue panels are common.
    if skipped > 0 {
        out.push(QualityFlag::new(
            "price_consistency",
            None,
            "panel".to_string(),
            Severity::Info,
            format!("{skipped} bars with fewer than 3 sources; not evaluated"),
        ));
    }
    out
}

/// Indices whose value deviates more than `max_dev` (relative) from the
/// mean of `values`.
pub fn volume_outliers(values: &[f64], max_dev: f64) -> Vec<usize> {
    let Some(m) = stats::mean(values) else {
        return Vec::new();
    };
    if !(m > 0.0) {
        return Vec::new();
    }
    values.iter().enumerate().filter(|(_, &v)| (v - m).abs() / m > max_dev).map(|(i, _)| i).collect()
}

/// Daily venue volumes (USD) compared against the cross-venue mean.
pub fn check_volume(sources: &[ExchangeSeries], cfg: &Config) -> Vec<QualityFlag> {
    let mut days: BTreeMap<Timestamp, Vec<(&str, f64)>> = BTreeMap::new();
    for s in sources {
        let mut per_day: BTreeMap<Timestamp, f64> = BTreeMap::new();
        for c in &s.candles {
            *per_day.entry(c.open_time.div_euclid(DAY_SECONDS) * DAY_SECONDS).or_default() += c.volume * c.close;
        }
        for (d, v) in per_day {
            days.entry(d).or_default().push((s.exchange_id.as_str(), v));
        }
    }
    let mut out = Vec::new();
    for (d, vols) in days {
        if vols.len() < 2 {
            continue;
        }
        let values: Vec<f64> = vols.iter().map(|(_, v)| *v).collect();
        for i in volume_outliers(&values, cfg.volume_max_deviation) {
            out.push(QualityFlag::new(
                "volume",
                Some(d),
                format!("day={d} exchange={}", vols[i].0),
                Severity::Flag,
                "deviates from cross-exchange mean; exclude suspect exchange data",
            ));
        }
    }
    out
}

pub fn check_funding_bounds(funding: &[FundingRecord], cfg: &Config) -> Vec<QualityFlag> {
    funding
        .iter()
        .filter(|f| !(f.rate_8h.to_f64().abs() < cfg.funding_max_abs))
        .map(|f| {
            QualityFlag::new(
                "funding_bounds",
                Some(f.settle_time),
                format!("t={} exchange={}", f.settle_time, f.exchange_id),
                Severity::Reject,
                format!("impossible rate_8h {}", f.rate_8h),
            )
        })
        .collect()
}

/// Day-over-day OI change against signed taker flow minus liquidated
/// notional. The discrepancy is measured relative to the previous day's OI.
pub fn check_oi_sanity(oi: &[OpenInterestRecord], liquidations: &[LiquidationEvent], cfg: &Config) -> Vec<QualityFlag> {
    if !oi.iter().any(|r| r.net_flow_usd.is_some()) {
        return alloc::vec![QualityFlag::new(
            "oi_sanity",
            None,
            "panel",
            Severity::Info,
            "no trade-flow data; not evaluated"
        )];
    }
    // Last record of each UTC day.
    let mut last: BTreeMap<Timestamp, usize> = BTreeMap::new();
    for (i, r) in oi.iter().enumerate() {
        last.insert(r.time.div_euclid(DAY_SECONDS), i);
    }
    let ends: Vec<usize> = last.into_values().collect();
    let mut out = Vec::new();
    for w in ends.windows(2) {
        let (a, b) = (&oi[w[0]], &oi[w[1]]);
        if b.time - a.time > DAY_SECONDS || !(a.oi_usd > 0.0) {
            continue;
        }
        let flow: f64 = oi[w[0] + 1..=w[1]].iter().filter_map(|r| r.net_flow_usd).sum();
        let liq: f64 = liquidations.iter().filter(|e| e.time > a.time && e.time <= b.time).map(|e| e.size_usd).sum();
        let gap = (b.oi_usd - a.oi_usd) - (flow - liq);
        if gap.abs() / a.oi_usd > cfg.oi_max_discrepancy {
            out.push(QualityFlag::new(
                "oi_sanity",
                Some(b.time),
                format!("t={}", b.time),
                Severity::Flag,
                format!("OI change unexplained by flows by {:.4}", gap / a.oi_usd),
            ));
        }
    }
    out
}

/// Snapshots whose relative spread exceeds the limit are excluded.
pub fn check_book_integrity(books: &[BookSnapshot], cfg: &Config) -> Vec<QualityFlag> {
    books
        .iter()
        .filter(|b| book_excluded(b, cfg))
        .map(|b| {
            QualityFlag::new(
                "book_integrity",
                Some(b.time),
                format!("t={}", b.time),
                Severity::Flag,
                "spread too wide; excluded",
            )
        })
        .collect()
}

fn book_excluded(b: &BookSnapshot, cfg: &Config) -> bool {
    match (b.best_bid(), b.best_ask(), b.mid()) {
        (Some(bid), Some(ask), Some(mid)) => (ask - bid) / mid > cfg.book_max_spread,
        _ => true,
    }
}

/// Volume far above its trailing median with an almost flat body. Bars
/// with zero volume (interpolated) are left out of the median.
pub fn check_wash_trading(candles: &[Candle4H], cfg: &Config) -> Vec<QualityFlag> {
    let n = Config::count(cfg.wash_median_bars);
    let mut out = Vec::new();
    for (t, c) in candles.iter().enumerate() {
        let hist: Vec<f64> = candles[..t].iter().rev().map(|c| c.volume).filter(|v| *v > 0.0).take(n).collect();
        if hist.len() < n {
            continue;
        }
        let Some(med) = stats::median(&hist) else { continue };
        if c.volume > cfg.wash_volume_multiple * med && c.body() / c.open < cfg.wash_max_body {
            out.push(QualityFlag::new(
                "wash_trading",
                Some(c.open_time),
                format!("t={}", c.open_time),
                Severity::Flag,
                "volume spike without price movement",
            ));
        }
    }
    out
}

/// Fill gaps of at most `max_interpolated_bars` with flat bars on the
/// linear path between the neighbouring closes; longer gaps stay open and
/// are rejected. Existing bars pass through untouched.
pub fn fill_gaps(candles: &[Candle4H], cfg: &Config) -> (Vec<Candle4H>, Vec<QualityFlag>) {
    let max = Config::count(cfg.max_interpolated_bars + 1.0) - 1;
    let mut out = Vec::with_capacity(candles.len());
    let mut flags = Vec::new();
    for (i, c) in candles.iter().enumerate() {
        if let Some(prev) = i.checked_sub(1).map(|j| &candles[j]) {
            let dt = c.open_time - prev.open_time;
            if dt > BAR_SECONDS && dt % BAR_SECONDS == 0 {
                let missing = (dt / BAR_SECONDS - 1) as usize;
                if missing <= max {
                    for k in 1..=missing {
                        let frac = k as f64 / (missing + 1) as f64;
                        let p = prev.close + (c.close - prev.close) * frac;
                        let t = prev.open_time + k as i64 * BAR_SECONDS;
                        out.push(Candle4H {
                            open_time: t,
                            open: p,
                            high: p,
                            low: p,
                            close: p,
                            volume: 0.0,
                            exchange_count: prev.exchange_count,
                        });
                        flags.push(QualityFlag::new(
                            "gaps",
                            Some(t),
                            format!("t={t}"),
                            Severity::Interpolated,
                            "filled by linear interpolation",
                        ));
                    }
                } else {
                    let t = prev.open_time + BAR_SECONDS;
                    flags.push(QualityFlag::new(
                        "gaps",
                        Some(t),
                        format!("t={t}"),
                        Severity::Reject,
                        format!("{missing} consecutive bars missing"),
                    ));
                }
            }
        }
        out.push(c.clone());
    }
    (out, flags)
}

fn check_records(panel: &Panel) -> Vec<QualityFlag> {
    fn push<R: Validate>(out: &mut Vec<QualityFlag>, what: &str, time: Timestamp, r: &R) {
        for v in r.violations() {
            out.push(QualityFlag::new(
                "schema",
                Some(time),
                format!("{what} t={time} {}", v.field),
                Severity::Reject,
                v.rule,
            ));
        }
    }
    let mut out = Vec::new();
    for c in &panel.candles {
        push(&mut out, "candle", c.open_time, c);
    }
    for f in &panel.funding {
        for v in f.violations() {
            // Out-of-bound rates are reported by the funding check.
            if v.field != "rate_8h" {
                out.push(QualityFlag::new(
                    "schema",
                    Some(f.settle_time),
                    format!("funding t={} {}", f.settle_time, v.field),
                    Severity::Reject,
                    v.rule,
                ));
            }
        }
    }
    for r in &panel.oi {
        push(&mut out, "oi", r.time, r);
    }
    for b in &panel.books {
        push(&mut out, "book", b.time, b);
    }
    for e in &panel.liquidations {
        push(&mut out, "liquidation", e.time, e);
    }
    out
}

/// Run every check on `panel` (and on the per-venue `sources`, when
/// given). Returns the cleaned panel: single-bar gaps filled and
/// wide-spread books dropped.
pub fn run_pipeline(panel: &Panel, sources: &[ExchangeSeries], cfg: &Config) -> (Panel, QualityReport) {
    let tol = cfg.timestamp_tolerance_secs as i64;
    let mut flags = Vec::new();
    let mut checks = 0;

    let (candles, gap_flags) = fill_gaps(&panel.candles, cfg);
    flags.extend(gap_flags);
    checks += 1;

    let mut clean = panel.clone();
    clean.candles = candles;
    flags.extend(check_book_integrity(&panel.books, cfg));
    clean.books.retain(|b| !book_excluded(b, cfg));
    checks += 1;

    let candle_times: Vec<Timestamp> = panel.candles.iter().map(|c| c.open_time).collect();
    let book_times: Vec<Timestamp> = panel.books.iter().map(|b| b.time).collect();
    let funding_times: Vec<Timestamp> = panel.funding.iter().map(|f| f.settle_time).collect();
    flags.extend(check_timestamps("timestamps", &candle_times, BAR_SECONDS, tol));
    flags.extend(check_timestamps("timestamps", &book_times, BAR_SECONDS, tol));
    flags.extend(check_timestamps("timestamps", &funding_times, BAR_SECONDS, tol));
    checks += 1;

    flags.extend(check_records(&clean));
    checks += 1;
    flags.extend(check_funding_bounds(&panel.funding, cfg));
    checks += 1;
    flags.extend(check_oi_sanity(&panel.oi, &panel.liquidations, cfg));
    checks += 1;
    flags.extend(check_wash_trading(&clean.candles, cfg));
    checks += 1;
    if !sources.is_empty() {
        flags.extend(check_price_consistency(sources, cfg));
        flags.extend(check_volume(sources, cfg));
        checks += 2;
    }
    (clean, QualityReport::from_flags(checks, flags))
}
