//! Structural metrics: swing mapping, range construction, realized
//! volatility, wick geometry, volume nodes, absorption footprints and range
//! persistence.

use alloc::collections::VecDeque;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::config::Config;
use crate::error::{Error, Result};
use crate::model::{Candle4H, RangeDefinition, Timestamp};
use crate::stats;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SwingKind {
    High,
    Low,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SwingPoint {
    pub index: usize,
    pub kind: SwingKind,
    pub price: f64,
}

/// Maximum of every length-`k` window, `out[j] = max(xs[j..j+k])`.
fn sliding_max(xs: &[f64], k: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(xs.len().saturating_sub(k) + 1);
    let mut dq: VecDeque<usize> = VecDeque::new();
    for (i, &x) in xs.iter().enumerate() {
        while dq.back().is_some_and(|&j| xs[j] <= x) {
            dq.pop_back();
        }
        dq.push_back(i);
        if dq.front().is_some_and(|&j| j + k <= i) {
            dq.pop_front();
        }
        if i + 1 >= k {
            out.push(xs[dq[0]]);
        }
    }
    out
}

/// Swing highs and lows. A swing high's high is strictly above the `lookback`
/// bars before it and not below the `lookback` bars after it, so an equal
/// later high never produces a second point (ties go to the earlier bar).
/// Lows mirror this.
pub fn map_swings(candles: &[Candle4H], lookback: usize) -> Result<Vec<SwingPoint>> {
    let k = lookback.max(1);
    let needed = 2 * k + 1;
    if candles.len() < needed {
        return Err(Error::TooShort { needed, got: candles.len() });
    }
    let highs: Vec<f64> = candles.iter().map(|c| c.high).collect();
    let neg_lows: Vec<f64> = candles.iter().map(|c| -c.low).collect();
    let hi_max = sliding_max(&highs, k);
    let lo_max = sliding_max(&neg_lows, k);
    let mut out = Vec::new();
    for i in k..candles.len() - k {
        if highs[i] > hi_max[i - k] && highs[i] >= hi_max[i + 1] {
            out.push(SwingPoint { index: i, kind: SwingKind::High, price: highs[i] });
        }
        if neg_lows[i] > lo_max[i - k] && neg_lows[i] >= lo_max[i + 1] {
            out.push(SwingPoint { index: i, kind: SwingKind::Low, price: candles[i].low });
        }
    }
    Ok(out)
}

/// Range from the trailing window `[end - window, end)`: upper is the highest
/// swing high, lower the lowest swing low, and each boundary needs
/// `min_touches` bars coming within the touch tolerance. `None` means no
/// established range.
pub fn derive_range(candles: &[Candle4H], swings: &[SwingPoint], end: usize, cfg: &Config) -> Option<RangeDefinition> {
    let end = end.min(candles.len());
    let window = Config::count(cfg.range_window);
    let start = end.saturating_sub(window);
    if end == 0 {
        return None;
    }
    let in_window = swings.iter().filter(|s| s.index >= start && s.index < end);
    let mut upper: Option<f64> = None;
    let mut lower: Option<f64> = None;
    for s in in_window {
        match s.kind {
            SwingKind::High => upper = Some(upper.map_or(s.price, |u| u.max(s.price))),
            SwingKind::Low => lower = Some(lower.map_or(s.price, |l| l.min(s.price))),
        }
    }
    let (lower, upper) = (lower?, upper?);
    if !(upper / lower - 1.0 > cfg.range_min_width) {
        return None;
    }
    let tol = cfg.range_touch_tolerance;
    let on_extremes = cfg.range_touch_on_extremes >= 0.5;
    let bars = &candles[start..end];
    let touches_upper = bars
        .iter()
        .filter(|c| {
            let p = if on_extremes { c.high } else { c.close };
            (p - upper).abs() <= tol * upper
        })
        .count() as u32;
    let touches_lower = bars
        .iter()
        .filter(|c| {
            let p = if on_extremes { c.low } else { c.close };
            (p - lower).abs() <= tol * lower
        })
        .count() as u32;
    let min_touches = Config::count(cfg.range_min_touches) as u32;
    if touches_upper < min_touches || touches_lower < min_touches {
        return None;
    }
    RangeDefinition::new(lower, upper, candles[end - 1].close_time(), touches_lower, touches_upper).ok()
}

/// The range as it stood when bar `end` opened: swings are mapped on
/// `candles[..end]` only, so no later bar leaks into the boundaries.
pub fn range_at(candles: &[Candle4H], end: usize, cfg: &Config) -> Option<RangeDefinition> {
    let end = end.min(candles.len());
    let swings = map_swings(&candles[..end], Config::count(cfg.swing_lookback)).ok()?;
    derive_range(candles, &swings, end, cfg)
}

/// Sample standard deviation of the trailing `window` log returns.
pub fn realized_volatility(candles: &[Candle4H], window: usize) -> Option<f64> {
    if window < 2 || candles.len() < window + 1 {
        return None;
    }
    let closes: Vec<f64> = candles[candles.len() - window - 1..].iter().map(|c| c.close).collect();
    stats::sample_std(&stats::log_returns(&closes))
}

/// Rolling realized volatility; entry `t` covers the returns ending at bar
/// `t`, `None` until `window` returns exist.
pub fn rolling_volatility(candles: &[Candle4H], window: usize) -> Vec<Option<f64>> {
    let closes: Vec<f64> = candles.iter().map(|c| c.close).collect();
    let rets = stats::log_returns(&closes);
    (0..candles.len())
        .map(|t| if window < 2 || t < window { None } else { stats::sample_std(&rets[t - window..t]) })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum WickRatio {
    Defined {
        upper: f64,
        lower: f64,
    },
    /// Doji: body too small for a ratio.
    Undefined,
}

impl WickRatio {
    pub fn total(&self) -> Option<f64> {
        match self {
            WickRatio::Defined { upper, lower } => Some(upper + lower),
            WickRatio::Undefined => None,
        }
    }
}

/// Upper and lower wick length as a percentage of body length.
pub fn wick_to_body(c: &Candle4H) -> WickRatio {
    let body = c.body();
    let scale = c.open.abs().max(c.close.abs());
    if body < 1e-9 * scale || body == 0.0 {
        return WickRatio::Undefined;
    }
    let top = c.open.max(c.close);
    let bottom = c.open.min(c.close);
    WickRatio::Defined {
        upper: (c.high - top).max(0.0) / body * 100.0,
        lower: (bottom - c.low).max(0.0) / body * 100.0,
    }
}

/// Mean combined wick ratio over the bars, dojis excluded.
pub fn mean_wick_ratio(candles: &[Candle4H]) -> Option<f64> {
    let vals: Vec<f64> = candles.iter().filter_map(|c| wick_to_body(c).total()).collect();
    stats::mean(&vals)
}

/// Mean upper-wick ratio, dojis excluded.
pub fn mean_upper_wick_ratio(candles: &[Candle4H]) -> Option<f64> {
    let vals: Vec<f64> = candles
        .iter()
        .filter_map(|c| match wick_to_body(c) {
            WickRatio::Defined { upper, .. } => Some(upper),
            WickRatio::Undefined => None,
        })
        .collect();
    stats::mean(&vals)
}

/// `(recent mean, baseline mean)` of the combined wick ratio at bar `end`
/// (exclusive): the last `recent` bars against the `baseline` bars before them.
pub fn wick_ratio_trend(candles: &[Candle4H], end: usize, recent: usize, baseline: usize) -> Option<(f64, f64)> {
    if end > candles.len() || end < recent + baseline {
        return None;
    }
    let cur = mean_wick_ratio(&candles[end - recent..end])?;
    let prior = mean_wick_ratio(&candles[end - recent - baseline..end - recent])?;
    Some((cur, prior))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VolumeBin {
    pub lower: f64,
    pub volume: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VolumeProfile {
    pub bin_width: f64,
    pub bins: Vec<VolumeBin>,
}

impl VolumeProfile {
    pub fn total(&self) -> f64 {
        self.bins.iter().map(|b| b.volume).sum()
    }

    /// Highest-volume bin (earliest on ties).
    pub fn peak(&self) -> Option<&VolumeBin> {
        self.bins.iter().fold(None, |best: Option<&VolumeBin>, b| match best {
            Some(x) if x.volume >= b.volume => Some(x),
            _ => Some(b),
        })
    }
}

/// Volume by price bin. Bin width is `bin_frac` of the median close and the
/// median sits at the centre of a bin. Each bar's volume is spread
/// uniformly over its `[low, high]` span.
pub fn volume_nodes(candles: &[Candle4H], bin_frac: f64) -> Option<VolumeProfile> {
    let closes: Vec<f64> = candles.iter().map(|c| c.close).collect();
    let med = stats::median(&closes)?;
    let width = med * bin_frac;
    if !(width > 0.0) {
        return None;
    }
    let origin = med - width / 2.0;
    let edge = |b: i64| origin + b as f64 * width;
    let bin_of = |p: f64| libm::floor((p - origin) / width) as i64;
    let lo_bin = candles.iter().map(|c| bin_of(c.low)).min()?;
    let hi_bin = candles.iter().map(|c| bin_of(c.high)).max()?;
    let mut vols = alloc::vec![0.0f64; (hi_bin - lo_bin + 1) as usize];
    for c in candles {
        let (b0, b1) = (bin_of(c.low), bin_of(c.high));
        let span = c.high - c.low;
        if b0 == b1 || !(span > 0.0) {
            vols[(b0 - lo_bin) as usize] += c.volume;
            continue;
        }
        let mut assigned = 0.0;
        for b in b0..b1 {
            let lo = c.low.max(edge(b));
            let hi = c.high.min(edge(b + 1));
            let share = c.volume * ((hi - lo).max(0.0) / span);
            vols[(b - lo_bin) as usize] += share;
            assigned += share;
        }
        vols[(b1 - lo_bin) as usize] += c.volume - assigned;
    }
    Some(VolumeProfile {
        bin_width: width,
        bins: vols
            .into_iter()
            .enumerate()
            .map(|(i, volume)| VolumeBin { lower: edge(lo_bin + i as i64), volume })
            .collect(),
    })
}

/// An executed order print, when order-level data exists.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrderPrint {
    pub time: Timestamp,
    pub price: f64,
    pub size_usd: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AbsorptionEvent {
    pub time: Timestamp,
    pub price: f64,
    pub usd: f64,
    /// Derived from bar volume rather than individual orders.
    pub proxy: bool,
}

/// Orders at or above `threshold_usd`.
pub fn absorption_from_orders(orders: &[OrderPrint], threshold_usd: f64) -> Vec<AbsorptionEvent> {
    orders
        .iter()
        .filter(|o| o.size_usd >= threshold_usd)
        .map(|o| AbsorptionEvent { time: o.time, price: o.price, usd: o.size_usd, proxy: false })
        .collect()
}

/// Bars whose notional (volume x typical price) reaches `threshold_usd`.
pub fn absorption_from_bars(candles: &[Candle4H], threshold_usd: f64) -> Vec<AbsorptionEvent> {
    candles
        .iter()
        .filter_map(|c| {
            let vwap = c.typical();
            let usd = c.volume * vwap;
            (usd >= threshold_usd).then_some(AbsorptionEvent { time: c.open_time, price: vwap, usd, proxy: true })
        })
        .collect()
}

/// Length of the longest suffix of closes inside `[lower, upper]`.
pub fn range_persistence(candles: &[Candle4H], range: &RangeDefinition) -> usize {
    candles.iter().rev().take_while(|c| range.contains(c.close)).count()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    Upper,
    Lower,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tap {
    pub index: usize,
    pub boundary: Boundary,
    /// High for upper taps, low for lower taps.
    pub extreme: f64,
    /// Distance past the boundary (negative when the tap stopped short
    /// within tolerance).
    pub excursion: f64,
    pub closed_beyond: bool,
}

/// Bars in `[from, to)` whose extreme reaches within `tol` of a boundary.
pub fn boundary_taps(candles: &[Candle4H], range: &RangeDefinition, from: usize, to: usize, tol: f64) -> Vec<Tap> {
    let to = to.min(candles.len());
    let mut taps = Vec::new();
    for (i, c) in candles.iter().enumerate().take(to).skip(from) {
        if c.high >= range.upper * (1.0 - tol) {
            taps.push(Tap {
                index: i,
                boundary: Boundary::Upper,
                extreme: c.high,
                excursion: c.high - range.upper,
                closed_beyond: c.close > range.upper,
            });
        }
        if c.low <= range.lower * (1.0 + tol) {
            taps.push(Tap {
                index: i,
                boundary: Boundary::Lower,
                extreme: c.low,
                excursion: range.lower - c.low,
                closed_beyond: c.close < range.lower,
            });
        }
    }
    taps
}

/// First bar in `[from, to)` that closes outside the range.
pub fn first_breakout(
    candles: &[Candle4H],
    range: &RangeDefinition,
    from: usize,
    to: usize,
) -> Option<(usize, Boundary)> {
    (from..to.min(candles.len())).find_map(|i| {
        let c = candles[i].close;
        if c > range.upper {
            Some((i, Boundary::Upper))
        } else if c < range.lower {
            Some((i, Boundary::Lower))
        } else {
            None
        }
    })
}

/// First index `t` in `[from, to)` that starts a run of `n` consecutive
/// closes beyond the same boundary.
pub fn sustained_outside(
    candles: &[Candle4H],
    range: &RangeDefinition,
    from: usize,
    to: usize,
    n: usize,
) -> Option<(usize, Boundary)> {
    let to = to.min(candles.len());
    let n = n.max(1);
    let side = |i: usize| {
        let c = candles[i].close;
        if c > range.upper {
            Some(Boundary::Upper)
        } else if c < range.lower {
            Some(Boundary::Lower)
        } else {
            None
        }
    };
    (from..to).find_map(|t| {
        if t + n > to {
            return None;
        }
        let s = side(t)?;
        (t..t + n).all(|j| side(j) == Some(s)).then_some((t, s))
    })
}
