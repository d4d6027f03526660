//! Normalization of raw multi-exchange data into the 4H grid: bucketing,
//! cross-venue VWAP merge, and funding arithmetic.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fixed::Fixed;
use crate::model::{Candle4H, Timestamp, BAR_SECONDS};

/// A spot trade or candle fragment before 4H aggregation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawTick {
    pub time: Timestamp,
    pub exchange_id: alloc::string::String,
    pub price: f64,
    pub volume: f64,
}

pub fn bucket_start(time: Timestamp) -> Timestamp {
    time - time.rem_euclid(BAR_SECONDS)
}

/// Aggregate time-ordered ticks into UTC-aligned 4H candles. Buckets with no
/// ticks are omitted.
pub fn align_4h(ticks: &[RawTick]) -> Result<Vec<Candle4H>> {
    if let Some(i) = ticks.windows(2).position(|w| w[1].time < w[0].time) {
        return Err(Error::Unsorted { index: i + 1 });
    }
    if let Some(t) = ticks.iter().find(|t| !(t.price > 0.0) || !(t.volume >= 0.0)) {
        return Err(Error::Invalid(alloc::format!("tick at {} has price {} volume {}", t.time, t.price, t.volume)));
    }
    let mut out: Vec<Candle4H> = Vec::new();
    for t in ticks {
        let start = bucket_start(t.time);
        match out.last_mut() {
            Some(c) if c.open_time == start => {
                c.high = c.high.max(t.price);
                c.low = c.low.min(t.price);
                c.close = t.price;
                c.volume += t.volume;
            }
            _ => out.push(Candle4H {
                open_time: start,
                open: t.price,
                high: t.price,
                low: t.price,
                close: t.price,
                volume: t.volume,
                exchange_count: 1,
            }),
        }
    }
    Ok(out)
}

/// Volume-weighted merge of per-exchange candles on an identical grid. Each
/// price field is the bar-volume-weighted mean across venues; volume is
/// summed. A bar with zero total volume falls back to equal weights.
pub fn vwap_merge(per_exchange: &[Vec<Candle4H>]) -> Result<Vec<Candle4H>> {
    let Some(first) = per_exchange.first() else {
        return Ok(Vec::new());
    };
    for (k, series) in per_exchange.iter().enumerate().skip(1) {
        for i in 0..first.len().max(series.len()) {
            let a = first.get(i).map(|c| c.open_time);
            let b = series.get(i).map(|c| c.open_time);
            if a != b {
                let time = a.or(b).unwrap_or_default().min(b.or(a).unwrap_or_default());
                return Err(Error::GridMismatch { time, exchange: k });
            }
        }
    }
    let n_ex = per_exchange.len();
    let merged = (0..first.len())
        .map(|i| {
            let bars: Vec<&Candle4H> = per_exchange.iter().map(|s| &s[i]).collect();
            let total: f64 = bars.iter().map(|c| c.volume).sum();
            let weight = |c: &Candle4H| {
                if total > 0.0 {
                    c.volume / total
                } else {
                    1.0 / n_ex as f64
                }
            };
            let wmean = |f: fn(&Candle4H) -> f64| bars.iter().map(|c| weight(c) * f(c)).sum::<f64>();
            Candle4H {
                open_time: first[i].open_time,
                open: wmean(|c| c.open),
                high: wmean(|c| c.high),
                low: wmean(|c| c.low),
                close: wmean(|c| c.close),
                volume: total,
                exchange_count: bars.iter().map(|c| c.exchange_count).sum(),
            }
        })
        .collect();
    Ok(merged)
}

/// Indices of the `n` venues with the largest trailing volume, ties broken by
/// input order.
pub fn top_exchanges(trailing_volumes: &[f64], n: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..trailing_volumes.len()).collect();
    idx.sort_by(|&a, &b| trailing_volumes[b].total_cmp(&trailing_volumes[a]).then(a.cmp(&b)));
    idx.truncate(n);
    idx.sort_unstable();
    idx
}

/// Linear rescaling of a per-interval funding rate to the 8h basis.
pub fn normalize_funding(raw_rate: Fixed, source_interval_hours: u32) -> Result<Fixed> {
    match source_interval_hours {
        4 | 8 | 12 => Ok(raw_rate.mul_ratio(8, source_interval_hours as i64)),
        h => Err(Error::UnsupportedInterval(h)),
    }
}

/// Inverse of [`normalize_funding`].
pub fn denormalize_funding(rate_8h: Fixed, source_interval_hours: u32) -> Result<Fixed> {
    match source_interval_hours {
        4 | 8 | 12 => Ok(rate_8h.mul_ratio(source_interval_hours as i64, 8)),
        h => Err(Error::UnsupportedInterval(h)),
    }
}

/// Simple annualization, `rate_8h * 3 * 365 * 100`, in percent per year.
pub fn annualize_funding(rate_8h: Fixed) -> f64 {
    let pct_raw = rate_8h.raw() as i128 * 3 * 365 * 100;
    let scale = crate::fixed::SCALE as i128;
    (pct_raw / scale) as f64 + (pct_raw % scale) as f64 / scale as f64
}

/// Plain sum of the trailing `window` rates.
pub fn cumulative_funding(rates_8h: &[Fixed], window: usize) -> Result<Fixed> {
    if window > rates_8h.len() {
        return Err(Error::WindowTooLong { window, len: rates_8h.len() });
    }
    Ok(rates_8h[rates_8h.len() - window..].iter().sum())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BasisReading {
    pub value: f64,
    pub dislocation: bool,
}

/// `(perp - spot) / spot`; dislocation when the magnitude exceeds
/// `dislocation` (0.5% by default).
pub fn basis_spread(perp_price: f64, spot_price: f64, dislocation: f64) -> Result<BasisReading> {
    if !(spot_price > 0.0) {
        return Err(Error::NonPositivePrice(spot_price));
    }
    let value = (perp_price - spot_price) / spot_price;
    Ok(BasisReading { value, dislocation: value.abs() > dislocation })
}
