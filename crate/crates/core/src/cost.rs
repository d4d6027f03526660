//! Funding-pressure metrics: bias runs, magnitude classes, spikes, and the
//! composed `FundingState`.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::config::Config;
use crate::fixed::Fixed;
use crate::ingest::{annualize_funding, denormalize_funding};
use crate::model::{Panel, DAY_SECONDS};
use crate::stats;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BiasSign {
    Positive,
    Negative,
    Neutral,
}

impl BiasSign {
    pub fn of(rate: f64) -> BiasSign {
        if rate > 0.0 {
            BiasSign::Positive
        } else if rate < 0.0 {
            BiasSign::Negative
        } else {
            BiasSign::Neutral
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BiasRun {
    pub sign: BiasSign,
    pub duration: u32,
}

/// Per-period same-sign run length. Zero rates are neutral and reset the
/// run. With `flip_tolerance = n > 0`, up to `n` consecutive opposite-sign
/// periods are absorbed into the running bias before it resets.
pub fn funding_bias_duration(rates: &[f64], flip_tolerance: usize) -> Vec<BiasRun> {
    let mut out = Vec::with_capacity(rates.len());
    let mut sign = BiasSign::Neutral;
    let mut duration = 0u32;
    let mut opposite = 0u32;
    for &r in rates {
        let s = BiasSign::of(r);
        if s == BiasSign::Neutral {
            sign = BiasSign::Neutral;
            duration = 0;
            opposite = 0;
        } else if s == sign {
            duration += 1;
            opposite = 0;
        } else if sign != BiasSign::Neutral && (opposite as usize) < flip_tolerance {
            opposite += 1;
            duration += 1;
        } else {
            sign = s;
            duration = opposite + 1;
            opposite = 0;
        }
        out.push(BiasRun { sign, duration });
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MagnitudeClass {
    Neutral,
    Normal,
    Elevated,
}

pub fn classify_magnitude(rate_8h: f64, cfg: &Config) -> MagnitudeClass {
    let a = rate_8h.abs();
    if a > cfg.funding_elevated {
        MagnitudeClass::Elevated
    } else if a < cfg.funding_neutral {
        MagnitudeClass::Neutral
    } else {
        MagnitudeClass::Normal
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpikeFlag {
    NotEvaluated,
    Calm,
    Spike,
}

/// Period `t` is a spike when `|r_t - mean| > sigma_multiple * max(std, floor)`
/// over the `lookback` periods strictly before `t`.
pub fn funding_spike(rates: &[f64], lookback: usize, sigma_multiple: f64, sigma_floor: f64) -> Vec<SpikeFlag> {
    (0..rates.len())
        .map(|t| {
            if lookback < 2 || t < lookback {
                return SpikeFlag::NotEvaluated;
            }
            let hist = &rates[t - lookback..t];
            let (Some(m), Some(s)) = (stats::mean(hist), stats::sample_std(hist)) else {
                return SpikeFlag::NotEvaluated;
            };
            if (rates[t] - m).abs() > sigma_multiple * s.max(sigma_floor) {
                SpikeFlag::Spike
            } else {
                SpikeFlag::Calm
            }
        })
        .collect()
}

pub fn spike_flags(rates: &[f64], cfg: &Config) -> Vec<SpikeFlag> {
    funding_spike(rates, Config::count(cfg.spike_lookback), cfg.spike_sigma, cfg.spike_sigma_floor)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FundingState {
    pub bias_sign: BiasSign,
    pub bias_duration: u32,
    pub magnitude_class: MagnitudeClass,
    pub rate_8h: f64,
    pub annualized_pct: f64,
    pub cumulative_7d: Fixed,
    pub cumulative_30d: Fixed,
}

/// Funding paid over `(end - days, end]`: each settlement contributes its
/// raw per-interval rate.
pub fn cumulative_paid(panel: &Panel, end: i64, days: f64) -> Fixed {
    let start = end - libm::round(days * DAY_SECONDS as f64) as i64;
    let mut exchanges: Vec<&str> = panel.funding.iter().map(|f| f.exchange_id.as_str()).collect();
    exchanges.sort_unstable();
    exchanges.dedup();
    if exchanges.is_empty() {
        return Fixed::ZERO;
    }
    // Average across venues of each venue's paid total.
    let totals: Vec<Fixed> = exchanges
        .iter()
        .map(|ex| {
            panel
                .funding
                .iter()
                .filter(|f| f.exchange_id == *ex && f.settle_time > start && f.settle_time <= end)
                .map(|f| denormalize_funding(f.rate_8h, f.source_interval_hours).unwrap_or(f.rate_8h))
                .sum()
        })
        .collect();
    let sum: Fixed = totals.iter().sum();
    sum.mul_ratio(1, totals.len() as i64)
}

/// Funding state as of bar `bar` (inclusive).
pub fn funding_state(panel: &Panel, bar: usize, cfg: &Config) -> Option<FundingState> {
    let by_bar = panel.funding_by_bar();
    let upto: Vec<f64> = by_bar[..=bar.min(by_bar.len().checked_sub(1)?)].iter().map(|r| r.unwrap_or(0.0)).collect();
    let rate = *upto.last()?;
    let run = *funding_bias_duration(&upto, Config::count(cfg.funding_bias_flip_tolerance + 1.0) - 1).last()?;
    let end = panel.candles.get(bar)?.close_time();
    Some(FundingState {
        bias_sign: run.sign,
        bias_duration: run.duration,
        magnitude_class: classify_magnitude(rate, cfg),
        rate_8h: rate,
        annualized_pct: annualize_funding(Fixed::from_f64(rate)),
        cumulative_7d: cumulative_paid(panel, end, cfg.cumulative_short_days),
        cumulative_30d: cumulative_paid(panel, end, cfg.cumulative_long_days),
    })
}
