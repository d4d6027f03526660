//! Headered CSV series: spot candles or ticks, funding, open interest and
//! liquidations. Times are ISO-8601 UTC.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use rangegov_core::ingest::{align_4h, denormalize_funding, normalize_funding, RawTick};
use rangegov_core::model::LeverageBucket;
use rangegov_core::{
    Candle4H, Fixed, FundingRecord, LiquidationEvent, LiquidationSide, OpenInterestRecord, BAR_SECONDS,
};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::time;
use crate::error::{Error, Result};

fn reader(path: &Path) -> Result<csv::Reader<File>> {
    let f = File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::ReaderBuilder::new().trim(csv::Trim::All).comment(Some(b'#')).from_reader(f))
}

fn read_rows<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let mut rdr = reader(path)?;
    rdr.deserialize().map(|r| r.map_err(|e| Error::schema(path, e.to_string()))).collect()
}

fn write_rows<T: Serialize>(path: &Path, rows: impl IntoIterator<Item = T>) -> Result<()> {
    let f = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = csv::Writer::from_writer(f);
    for r in rows {
        w.serialize(r).map_err(|e| Error::schema(path, e.to_string()))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn ts(path: &Path, line: usize, s: &str) -> Result<i64> {
    time::parse(s).ok_or_else(|| Error::schema(path, format!("row {line}: bad timestamp `{s}`")))
}

#[derive(Debug, Serialize, Deserialize)]
struct CandleRow {
    open_time: String,
    open: f64,
    high: f64,
    low: f64,
    close: f64,
    volume: f64,
    #[serde(default = "one")]
    exchange_count: u32,
}

fn one() -> u32 {
    1
}

#[derive(Debug, Deserialize)]
struct TickRow {
    time: String,
    price: f64,
    volume: f64,
}

/// 4H candles. Every `open_time` must sit on a 4h UTC boundary.
pub fn read_candles(path: &Path) -> Result<Vec<Candle4H>> {
    let rows: Vec<CandleRow> = read_rows(path)?;
    rows.into_iter()
        .enumerate()
        .map(|(i, r)| {
            let t = ts(path, i + 1, &r.open_time)?;
            if t.rem_euclid(BAR_SECONDS) != 0 {
                return Err(Error::schema(path, format!("row {}: open_time not on a 4h boundary", i + 1)));
            }
            Ok(Candle4H {
                open_time: t,
                open: r.open,
                high: r.high,
                low: r.low,
                close: r.close,
                volume: r.volume,
                exchange_count: r.exchange_count,
            })
        })
        .collect()
}

/// Spot data for one venue: a candle file (header has `open_time`) or a
/// trade file (`time,price,volume`) that is bucketed into 4H candles.
pub fn read_spot(path: &Path, exchange: &str) -> Result<Vec<Candle4H>> {
    let headers = reader(path)?.headers().map_err(|e| Error::schema(path, e.to_string()))?.clone();
    if headers.iter().any(|h| h == "open_time") {
        return read_candles(path);
    }
    let rows: Vec<TickRow> = read_rows(path)?;
    let ticks = rows
        .into_iter()
        .enumerate()
        .map(|(i, r)| {
            Ok(RawTick {
                time: ts(path, i + 1, &r.time)?,
                exchange_id: exchange.to_string(),
                price: r.price,
                volume: r.volume,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    align_4h(&ticks).map_err(|e| Error::schema(path, e.to_string()))
}

pub fn write_candles(path: &Path, candles: &[Candle4H]) -> Result<()> {
    write_rows(
        path,
        candles.iter().map(|c| CandleRow {
            open_time: time::format(c.open_time),
            open: c.open,
            high: c.high,
            low: c.low,
            close: c.close,
            volume: c.volume,
            exchange_count: c.exchange_count,
        }),
    )
}

/// `rate` is the raw per-interval rate as published by the venue; it is
/// normalized to the 8h basis on read.
#[derive(Debug, Serialize, Deserialize)]
struct FundingRow {
    settle_time: String,
    exchange_id: String,
    rate: String,
    interval_hours: u32,
    mark_price: f64,
    index_price: f64,
}

pub fn read_funding(path: &Path) -> Result<Vec<FundingRecord>> {
    let rows: Vec<FundingRow> = read_rows(path)?;
    rows.into_iter()
        .enumerate()
        .map(|(i, r)| {
            let line = i + 1;
            let raw: Fixed =
                r.rate.parse().map_err(|e: rangegov_core::Error| Error::schema(path, format!("row {line}: {e}")))?;
            let rate_8h = normalize_funding(raw, r.interval_hours)
                .map_err(|e| Error::schema(path, format!("row {line}: {e}")))?;
            Ok(FundingRecord {
                settle_time: ts(path, line, &r.settle_time)?,
                rate_8h,
                source_interval_hours: r.interval_hours,
                exchange_id: r.exchange_id,
                mark_price: r.mark_price,
                index_price: r.index_price,
            })
        })
        .collect()
}

pub fn write_funding(path: &Path, records: &[FundingRecord]) -> Result<()> {
    let rows = records
        .iter()
        .map(|f| {
            Ok(FundingRow {
                settle_time: time::format(f.settle_time),
                exchange_id: f.exchange_id.clone(),
                rate: denormalize_funding(f.rate_8h, f.source_interval_hours)?.to_string(),
                interval_hours: f.source_interval_hours,
                mark_price: f.mark_price,
                index_price: f.index_price,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    write_rows(path, rows)
}

/// Leverage histograms and holder shares are carried as `;`-separated
/// lists (`lev:usd;lev:usd` and `share;share`).
#[derive(Debug, Serialize, Deserialize)]
struct OiRow {
    time: String,
    oi_usd: f64,
    #[serde(default)]
    long_oi_usd: Option<f64>,
    #[serde(default)]
    short_oi_usd: Option<f64>,
    #[serde(default)]
    net_flow_usd: Option<f64>,
    #[serde(default)]
    leverage_histogram: Option<String>,
    #[serde(default)]
    holder_shares: Option<String>,
}

fn parse_list<T>(
    path: &Path,
    line: usize,
    s: Option<&str>,
    item: impl Fn(&str) -> Option<T>,
) -> Result<Option<Vec<T>>> {
    let Some(s) = s.map(str::trim).filter(|s| !s.is_empty()) else {
        return Ok(None);
    };
    s.split(';')
        .map(|x| item(x.trim()).ok_or_else(|| Error::schema(path, format!("row {line}: bad list entry `{x}`"))))
        .collect::<Result<Vec<T>>>()
        .map(Some)
}

pub fn read_oi(path: &Path) -> Result<Vec<OpenInterestRecord>> {
    let rows: Vec<OiRow> = read_rows(path)?;
    rows.into_iter()
        .enumerate()
        .map(|(i, r)| {
            let line = i + 1;
            let mut rec = OpenInterestRecord::new(ts(path, line, &r.time)?, r.oi_usd);
            rec.long_oi_usd = r.long_oi_usd;
            rec.short_oi_usd = r.short_oi_usd;
            rec.net_flow_usd = r.net_flow_usd;
            rec.leverage_histogram = parse_list(path, line, r.leverage_histogram.as_deref(), |x| {
                let (l, u) = x.split_once(':')?;
                Some(LeverageBucket { leverage: l.trim().parse().ok()?, usd: u.trim().parse().ok()? })
            })?;
            rec.holder_shares = parse_list(path, line, r.holder_shares.as_deref(), |x| x.parse().ok())?;
            Ok(rec)
        })
        .collect()
}

pub fn write_oi(path: &Path, records: &[OpenInterestRecord]) -> Result<()> {
    write_rows(
        path,
        records.iter().map(|r| OiRow {
            time: time::format(r.time),
            oi_usd: r.oi_usd,
            long_oi_usd: r.long_oi_usd,
            short_oi_usd: r.short_oi_usd,
            net_flow_usd: r.net_flow_usd,
            leverage_histogram: r
                .leverage_histogram
                .as_ref()
                .map(|h| h.iter().map(|b| format!("{}:{}", b.leverage, b.usd)).collect::<Vec<_>>().join(";")),
            holder_shares: r.holder_shares.as_ref().map(|s| s.iter().map(f64::to_string).collect::<Vec<_>>().join(";")),
        }),
    )
}

#[derive(Debug, Serialize, Deserialize)]
struct LiquidationRow {
    time: String,
    price: f64,
    size_usd: f64,
    side: LiquidationSide,
}

pub fn read_liquidations(path: &Path) -> Result<Vec<LiquidationEvent>> {
    let rows: Vec<LiquidationRow> = read_rows(path)?;
    rows.into_iter()
        .enumerate()
        .map(|(i, r)| {
            Ok(LiquidationEvent { time: ts(path, i + 1, &r.time)?, price: r.price, size_usd: r.size_usd, side: r.side })
        })
        .collect()
}

pub fn write_liquidations(path: &Path, events: &[LiquidationEvent]) -> Result<()> {
    write_rows(
        path,
        events.iter().map(|e| LiquidationRow {
            time: time::format(e.time),
            price: e.price,
            size_usd: e.size_usd,
            side: e.side,
        }),
    )
}

/// Plain table of numbers, used for plot twins.
pub fn write_table(out: &mut impl Write, header: &[&str], rows: &[Vec<Option<f64>>]) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header)?;
    for r in rows {
        w.write_record(r.iter().map(|v| v.map(|v| v.to_string()).unwrap_or_default()))?;
    }
    w.flush()
}
