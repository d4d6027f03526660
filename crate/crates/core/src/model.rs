//! Domain records, the aligned `Panel`, and `RangeDefinition`.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fixed::Fixed;

/// Seconds since the Unix epoch, UTC.
pub type Timestamp = i64;

pub const BAR_SECONDS: i64 = 4 * 3600;
pub const DAY_SECONDS: i64 = 24 * 3600;

/// Hard bound on a normalized 8h funding rate (3x the 1.25% sanity cap).
pub const MAX_ABS_RATE_8H: Fixed = Fixed::from_raw(37_500_000_000);

pub const MIN_BOOK_LEVELS: usize = 20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub field: String,
    pub rule: String,
}

impl Violation {
    fn new(field: &str, rule: impl Into<String>) -> Self {
        Violation { field: String::from(field), rule: rule.into() }
    }
}

/// Invariant check for a domain record. An empty result means the record
/// is well-formed.
pub trait Validate {
    fn violations(&self) -> Vec<Violation>;
}

pub fn validate_record<R: Validate + ?Sized>(record: &R) -> Vec<Violation> {
    record.violations()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candle4H {
    pub open_time: Timestamp,
    pub open: f64,
    pub high: f64,
    pub low: f64,
    pub close: f64,
    pub volume: f64,
    pub exchange_count: u32,
}

impl Candle4H {
    pub fn close_time(&self) -> Timestamp {
        self.open_time + BAR_SECONDS
    }

    pub fn body(&self) -> f64 {
        (self.close - self.open).abs()
    }

    /// Typical price, used as the bar's VWAP proxy.
    pub fn typical(&self) -> f64 {
        (self.high + self.low + self.close) / 3.0
    }
}

impl Validate for Candle4H {
    fn violations(&self) -> Vec<Violation> {
        let mut v = Vec::new();
        let prices = [self.open, self.high, self.low, self.close];
        if prices.iter().any(|p| !p.is_finite() || *p <= 0.0) {
            v.push(Violation::new("price", "prices must be finite and > 0"));
        }
        if self.high < self.open.max(self.close) {
            v.push(Violation::new("high", "high < max(open,close)"));
        }
        if self.low > self.open.min(self.close) {
            v.push(Violation::new("low", "low > min(open,close)"));
        }
        if self.open_time.rem_euclid(BAR_SECONDS) != 0 {
            v.push(Violation::new("open_time", "open_time not on a 4h UTC boundary"));
        }
        if !(self.volume >= 0.0) {
            v.push(Violation::new("volume", "volume < 0"));
        }
        if self.exchange_count == 0 {
            v.push(Violation::new("exchange_count", "exchange_count must be positive"));
        }
        v
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FundingRecord {
    pub settle_time: Timestamp,
    /// Normalized rate per 8 hours.
    pub rate_8h: Fixed,
    pub source_interval_hours: u32,
    pub exchange_id: String,
    pub mark_price: f64,
    pub index_price: f64,
}

impl FundingRecord {
    /// Perp-over-index basis, `(mark - index) / index`.
    pub fn basis(&self) -> Option<f64> {
        (self.index_price > 0.0).then(|| (self.mark_price - self.index_price) / self.index_price)
    }
}

impl Validate for FundingRecord {
    fn violations(&self) -> Vec<Violation> {
        let mut v = Vec::new();
        if self.rate_8h.abs() >= MAX_ABS_RATE_8H {
            v.push(Violation::new("rate_8h", "|rate_8h| >= 0.0375 (impossible funding value)"));
        }
        if !matches!(self.source_interval_hours, 4 | 8 | 12) {
            v.push(Violation::new("source_interval_hours", "interval not in {4,8,12}"));
        }
        if !(self.mark_price > 0.0) || !(self.index_price > 0.0) {
            v.push(Violation::new("mark_price", "mark and index prices must be > 0"));
        }
        v
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeverageBucket {
    pub leverage: f64,
    pub usd: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OpenInterestRecord {
    pub time: Timestamp,
    pub oi_usd: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub long_oi_usd: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub short_oi_usd: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub leverage_histogram: Option<Vec<LeverageBucket>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub holder_shares: Option<Vec<f64>>,
    /// Signed taker flow (USD) since the previous record, when supplied.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub net_flow_usd: Option<f64>,
}

impl OpenInterestRecord {
    pub fn new(time: Timestamp, oi_usd: f64) -> Self {
        OpenInterestRecord {
            time,
            oi_usd,
            long_oi_usd: None,
            short_oi_usd: None,
            leverage_histogram: None,
            holder_shares: None,
            net_flow_usd: None,
        }
    }

    pub fn long_share(&self) -> Option<f64> {
        match (self.long_oi_usd, self.short_oi_usd) {
            (Some(l), Some(s)) if l + s > 0.0 => Some(l / (l + s)),
            _ => None,
        }
    }
}

impl Validate for OpenInterestRecord {
    fn violations(&self) -> Vec<Violation> {
        let mut v = Vec::new();
        if !(self.oi_usd >= 0.0) {
            v.push(Violation::new("oi_usd", "oi_usd < 0"));
        }
        if let (Some(l), Some(s)) = (self.long_oi_usd, self.short_oi_usd) {
            if l < 0.0 || s < 0.0 {
                v.push(Violation::new("long_oi_usd", "long/short notionals must be >= 0"));
            }
            let tol = 0.001 * self.oi_usd.max(f64::MIN_POSITIVE);
            if ((l + s) - self.oi_usd).abs() > tol {
                v.push(Violation::new("long_oi_usd", "long + short differs from oi_usd by > 0.1%"));
            }
        }
        if let Some(shares) = &self.holder_shares {
            if shares.iter().any(|s| *s < 0.0) {
                v.push(Violation::new("holder_shares", "negative holder share"));
            }
            let total: f64 = shares.iter().sum();
            if !shares.is_empty() && (total - 1.0).abs() > 1e-6 {
                v.push(Violation::new("holder_shares", "holder shares do not sum to 1"));
            }
        }
        v
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BookLevel {
    pub price: f64,
    pub size: f64,
}

impl BookLevel {
    pub fn new(price: f64, size: f64) -> Self {
        BookLevel { price, size }
    }

    pub fn notional(&self) -> f64 {
        self.price * self.size
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BookSnapshot {
    pub time: Timestamp,
    /// Best (highest) bid first.
    pub bids: Vec<BookLevel>,
    /// Best (lowest) ask first.
    pub asks: Vec<BookLevel>,
}

impl BookSnapshot {
    pub fn best_bid(&self) -> Option<f64> {
        self.bids.first().map(|l| l.price)
    }

    pub fn best_ask(&self) -> Option<f64> {
        self.asks.first().map(|l| l.price)
    }

    pub fn mid(&self) -> Option<f64> {
        Some((self.best_bid()? + self.best_ask()?) / 2.0)
    }
}

impl Validate for BookSnapshot {
    fn violations(&self) -> Vec<Violation> {
        let mut v = Vec::new();
        if self.bids.len() < MIN_BOOK_LEVELS {
            v.push(Violation::new("bids", format!("fewer than {MIN_BOOK_LEVELS} levels")));
        }
        if self.asks.len() < MIN_BOOK_LEVELS {
            v.push(Violation::new("asks", format!("fewer than {MIN_BOOK_LEVELS} levels")));
        }
        if self.bids.windows(2).any(|w| w[1].price >= w[0].price) {
            v.push(Violation::new("bids", "bid prices not strictly descending"));
        }
        if self.asks.windows(2).any(|w| w[1].price <= w[0].price) {
            v.push(Violation::new("asks", "ask prices not strictly ascending"));
        }
        if self.bids.iter().chain(&self.asks).any(|l| !(l.size > 0.0)) {
            v.push(Violation::new("size", "level size must be > 0"));
        }
        if let (Some(b), Some(a)) = (self.best_bid(), self.best_ask()) {
            if b >= a {
                v.push(Violation::new("best_bid", "crossed book"));
            }
        }
        v
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LiquidationSide {
    LongLiquidated,
    ShortLiquidated,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LiquidationEvent {
    pub time: Timestamp,
    pub price: f64,
    pub size_usd: f64,
    pub side: LiquidationSide,
}

impl Validate for LiquidationEvent {
    fn violations(&self) -> Vec<Violation> {
        let mut v = Vec::new();
        if !(self.price > 0.0) {
            v.push(Violation::new("price", "price must be > 0"));
        }
        if !(self.size_usd > 0.0) {
            v.push(Violation::new("size_usd", "size_usd must be > 0"));
        }
        v
    }
}

/// A stretch of bars `[start, end)` on which hypotheses are evaluated. The
/// range is derived from the bars immediately before `start`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvalWindow {
    pub label: String,
    pub start: usize,
    pub end: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Panel {
    pub instrument: String,
    pub candles: Vec<Candle4H>,
    #[serde(default)]
    pub funding: Vec<FundingRecord>,
    #[serde(default)]
    pub oi: Vec<OpenInterestRecord>,
    #[serde(default)]
    pub books: Vec<BookSnapshot>,
    #[serde(default)]
    pub liquidations: Vec<LiquidationEvent>,
    /// Free-form notes: gamma exposure, borrowing rates, basis sources.
    #[serde(default)]
    pub annotations: BTreeMap<String, String>,
    #[serde(default)]
    pub windows: Vec<EvalWindow>,
}

impl Panel {
    pub fn new(instrument: impl Into<String>) -> Self {
        Panel { instrument: instrument.into(), ..Panel::default() }
    }

    pub fn start_time(&self) -> Option<Timestamp> {
        self.candles.first().map(|c| c.open_time)
    }

    pub fn end_time(&self) -> Option<Timestamp> {
        self.candles.last().map(|c| c.close_time())
    }

    /// Index of the bar whose `[open, close)` interval contains `time`.
    pub fn bar_index(&self, time: Timestamp) -> Option<usize> {
        let first = self.start_time()?;
        if time < first {
            return None;
        }
        let i = ((time - first) / BAR_SECONDS) as usize;
        (i < self.candles.len() && self.candles[i].open_time <= time && time < self.candles[i].close_time())
            .then_some(i)
    }

    pub fn closes(&self) -> Vec<f64> {
        self.candles.iter().map(|c| c.close).collect()
    }

    /// Funding rate in force during each bar: per exchange, the latest
    /// settlement before the bar closes; averaged across exchanges.
    pub fn funding_by_bar(&self) -> Vec<Option<f64>> {
        let mut exchanges: Vec<&str> = self.funding.iter().map(|f| f.exchange_id.as_str()).collect();
        exchanges.sort_unstable();
        exchanges.dedup();
        let mut cursors = alloc::vec![0usize; exchanges.len()];
        let mut latest: Vec<Option<&FundingRecord>> = alloc::vec![None; exchanges.len()];
        let per_ex: Vec<Vec<&FundingRecord>> =
            exchanges.iter().map(|e| self.funding.iter().filter(|f| f.exchange_id == *e).collect()).collect();
        self.candles
            .iter()
            .map(|c| {
                let cutoff = c.close_time();
                let mut sum = 0.0;
                let mut n = 0;
                for (k, recs) in per_ex.iter().enumerate() {
                    while cursors[k] < recs.len() && recs[cursors[k]].settle_time < cutoff {
                        latest[k] = Some(recs[cursors[k]]);
                        cursors[k] += 1;
                    }
                    if let Some(r) = latest[k] {
                        sum += r.rate_8h.to_f64();
                        n += 1;
                    }
                }
                (n > 0).then(|| sum / n as f64)
            })
            .collect()
    }

    /// Basis per bar from the latest funding record (any exchange).
    pub fn basis_by_bar(&self) -> Vec<Option<f64>> {
        latest_by_bar(&self.candles, &self.funding, |f| f.settle_time)
            .into_iter()
            .map(|r| r.and_then(FundingRecord::basis))
            .collect()
    }

    pub fn oi_by_bar(&self) -> Vec<Option<&OpenInterestRecord>> {
        latest_by_bar(&self.candles, &self.oi, |r| r.time)
    }

    pub fn book_by_bar(&self) -> Vec<Option<&BookSnapshot>> {
        latest_by_bar(&self.candles, &self.books, |b| b.time)
    }

    /// Redenominate the instrument: quote prices scale by `k`, base
    /// quantities by `1/k`, so USD notionals are unchanged.
    pub fn rescale_prices(&self, k: f64) -> Panel {
        let mut p = self.clone();
        for c in &mut p.candles {
            c.open *= k;
            c.high *= k;
            c.low *= k;
            c.close *= k;
            c.volume /= k;
        }
        for f in &mut p.funding {
            f.mark_price *= k;
            f.index_price *= k;
        }
        for b in &mut p.books {
            for l in b.bids.iter_mut().chain(b.asks.iter_mut()) {
                l.price *= k;
                l.size /= k;
            }
        }
        for e in &mut p.liquidations {
            e.price *= k;
        }
        p
    }
}

/// For every bar, the latest record with `time < bar close`. Records must be
/// time-ordered.
pub fn latest_by_bar<'a, T>(
    candles: &[Candle4H],
    records: &'a [T],
    time_of: impl Fn(&T) -> Timestamp,
) -> Vec<Option<&'a T>> {
    let mut cursor = 0;
    let mut latest = None;
    candles
        .iter()
        .map(|c| {
            while cursor < records.len() && time_of(&records[cursor]) < c.close_time() {
                latest = Some(&records[cursor]);
                cursor += 1;
            }
            latest
        })
        .collect()
}

impl Validate for Panel {
    fn violations(&self) -> Vec<Violation> {
        let mut v = Vec::new();
        for (i, c) in self.candles.iter().enumerate() {
            for mut x in c.violations() {
                x.field = format!("candles[{i}].{}", x.field);
                v.push(x);
            }
        }
        for (i, w) in self.candles.windows(2).enumerate() {
            if w[1].open_time - w[0].open_time != BAR_SECONDS {
                v.push(Violation::new(&format!("candles[{}]", i + 1), "candles not contiguous 4h steps"));
            }
        }
        let (Some(lo), Some(hi)) = (self.start_time(), self.end_time()) else {
            return v;
        };
        let outside = |t: Timestamp| t < lo || t >= hi;
        let mut check_series = |name: &str, times: &mut dyn Iterator<Item = Timestamp>| {
            let mut prev = Timestamp::MIN;
            for (i, t) in times.enumerate() {
                if outside(t) {
                    v.push(Violation::new(&format!("{name}[{i}]"), "outside the candle span"));
                }
                if t < prev {
                    v.push(Violation::new(&format!("{name}[{i}]"), "not time-ordered"));
                }
                prev = t;
            }
        };
        check_series("funding", &mut self.funding.iter().map(|r| r.settle_time));
        check_series("oi", &mut self.oi.iter().map(|r| r.time));
        check_series("books", &mut self.books.iter().map(|r| r.time));
        check_series("liquidations", &mut self.liquidations.iter().map(|r| r.time));
        for (i, r) in self.funding.iter().enumerate() {
            for mut x in r.violations() {
                x.field = format!("funding[{i}].{}", x.field);
                v.push(x);
            }
        }
        for (i, r) in self.oi.iter().enumerate() {
            for mut x in r.violations() {
                x.field = format!("oi[{i}].{}", x.field);
                v.push(x);
            }
        }
        for (i, r) in self.books.iter().enumerate() {
            for mut x in r.violations() {
                x.field = format!("books[{i}].{}", x.field);
                v.push(x);
            }
        }
        for (i, r) in self.liquidations.iter().enumerate() {
            for mut x in r.violations() {
                x.field = format!("liquidations[{i}].{}", x.field);
                v.push(x);
            }
        }
        v
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RangeDefinition {
    pub lower: f64,
    pub upper: f64,
    pub established_at: Timestamp,
    pub touch_count_lower: u32,
    pub touch_count_upper: u32,
    pub midpoint: f64,
}

impl RangeDefinition {
    /// Rejects inverted and degenerate (< 0.1% wide) ranges.
    pub fn new(
        lower: f64,
        upper: f64,
        established_at: Timestamp,
        touch_count_lower: u32,
        touch_count_upper: u32,
    ) -> Result<Self> {
        if !(lower > 0.0 && lower < upper) {
            return Err(Error::Invalid(format!("range [{lower}, {upper}] is not ordered")));
        }
        if upper / lower - 1.0 <= 0.001 {
            return Err(Error::Invalid(format!("range [{lower}, {upper}] is degenerate")));
        }
        Ok(RangeDefinition {
            lower,
            upper,
            established_at,
            touch_count_lower,
            touch_count_upper,
            midpoint: (lower + upper) / 2.0,
        })
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn contains(&self, price: f64) -> bool {
        self.lower <= price && price <= self.upper
    }

    pub fn scaled(&self, k: f64) -> RangeDefinition {
        RangeDefinition { lower: self.lower * k, upper: self.upper * k, midpoint: self.midpoint * k, ..self.clone() }
    }
}

impl Validate for RangeDefinition {
    fn violations(&self) -> Vec<Violation> {
        let mut v = Vec::new();
        if !(self.lower < self.upper) {
            v.push(Violation::new("lower", "lower >= upper"));
        } else if self.upper / self.lower - 1.0 <= 0.001 {
            v.push(Violation::new("upper", "degenerate range (width <= 0.1%)"));
        }
        if (self.midpoint - (self.lower + self.upper) / 2.0).abs() > 1e-9 * self.upper.abs() {
            v.push(Violation::new("midpoint", "midpoint != (lower+upper)/2"));
        }
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    const T0: Timestamp = 1_609_459_200; // 2021-01-01T00:00Z

    fn candle(o: f64, h: f64, l: f64, c: f64) -> Candle4H {
        Candle4H { open_time: T0 + BAR_SECONDS, open: o, high: h, low: l, close: c, volume: 1.0, exchange_count: 1 }
    }

    fn ladder(best_bid: f64, best_ask: f64) -> BookSnapshot {
        BookSnapshot {
            time: T0,
            bids: (0..20).map(|i| BookLevel::new(best_bid - i as f64, 1.0)).collect(),
            asks: (0..20).map(|i| BookLevel::new(best_ask + i as f64, 1.0)).collect(),
        }
    }

    #[test]
    fn candle_high_below_body_is_reported() {
        let v = validate_record(&candle(100.0, 99.0, 98.0, 98.5));
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].rule, "high < max(open,close)");
    }

    #[test]
    fn well_formed_candle_has_no_violations() {
        assert!(validate_record(&candle(100.0, 101.0, 99.0, 100.5)).is_empty());
    }

    #[test]
    fn off_grid_candle_is_reported() {
        let mut c = candle(100.0, 101.0, 99.0, 100.5);
        c.open_time += 60;
        assert_eq!(c.violations()[0].field, "open_time");
    }

    #[test]
    fn crossed_book_is_reported() {
        let v = validate_record(&ladder(101.0, 100.0));
        assert!(v.iter().any(|x| x.rule == "crossed book"), "{v:?}");
        assert!(validate_record(&ladder(100.0, 101.0)).is_empty());
    }

    #[test]
    fn thin_book_is_reported() {
        let mut b = ladder(100.0, 101.0);
        b.asks.truncate(5);
        assert!(b.violations().iter().any(|x| x.field == "asks"));
    }

    #[test]
    fn funding_hard_bound() {
        let mut r = FundingRecord {
            settle_time: T0,
            rate_8h: "0.05".parse().unwrap(),
            source_interval_hours: 8,
            exchange_id: "x".into(),
            mark_price: 1.0,
            index_price: 1.0,
        };
        assert_eq!(r.violations().len(), 1);
        r.rate_8h = "0.0374".parse().unwrap();
        assert!(r.violations().is_empty());
    }

    #[test]
    fn oi_split_must_sum() {
        let mut r = OpenInterestRecord::new(T0, 1000.0);
        r.long_oi_usd = Some(600.0);
        r.short_oi_usd = Some(400.5);
        assert!(r.violations().is_empty());
        r.short_oi_usd = Some(402.0);
        assert_eq!(r.violations().len(), 1);
    }

    #[test]
    fn degenerate_range_rejected() {
        assert!(RangeDefinition::new(100.0, 100.05, T0, 2, 2).is_err());
        assert!(RangeDefinition::new(110.0, 100.0, T0, 2, 2).is_err());
        let r = RangeDefinition::new(100.0, 110.0, T0, 2, 2).unwrap();
        assert_eq!(r.midpoint, 105.0);
    }

    #[test]
    fn panel_gap_and_span_violations() {
        let mut p = Panel::new("T");
        let mut c0 = candle(100.0, 101.0, 99.0, 100.0);
        c0.open_time = T0;
        let mut c1 = c0.clone();
        c1.open_time = T0 + 2 * BAR_SECONDS;
        p.candles = vec![c0, c1];
        p.oi = vec![OpenInterestRecord::new(T0 + 10 * BAR_SECONDS, 1.0)];
        let v = p.violations();
        assert!(v.iter().any(|x| x.rule.contains("contiguous")));
        assert!(v.iter().any(|x| x.rule.contains("outside")));
    }

    #[test]
    fn series_alignment_takes_latest_before_close() {
        let mut p = Panel::new("T");
        for i in 0..3 {
            let mut c = candle(100.0, 101.0, 99.0, 100.0);
            c.open_time = T0 + i * BAR_SECONDS;
            p.candles.push(c);
        }
        p.oi = vec![OpenInterestRecord::new(T0 + 100, 1.0), OpenInterestRecord::new(T0 + BAR_SECONDS * 2 + 5, 3.0)];
        let by_bar: Vec<Option<f64>> = p.oi_by_bar().iter().map(|r| r.map(|r| r.oi_usd)).collect();
        assert_eq!(by_bar, vec![Some(1.0), Some(1.0), Some(3.0)]);
        assert_eq!(p.bar_index(T0 + BAR_SECONDS + 1), Some(1));
        assert_eq!(p.bar_index(T0 - 1), None);
    }
}
