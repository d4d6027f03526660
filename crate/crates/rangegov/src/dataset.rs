//! Manifest-driven ingest into a quality-checked panel, and the reverse:
//! writing a panel out as a CSV dataset with its manifest.

use std::fs;
use std::path::{Path, PathBuf};

use rangegov_core::ingest::{top_exchanges, vwap_merge};
use rangegov_core::quality::{run_pipeline, ExchangeSeries, QualityReport};
use rangegov_core::{Candle4H, Config, Panel};

use crate::error::{Error, Result};
use crate::formats::manifest::{resolve, LiquidationSource, Manifest, SpotSource};
use crate::formats::{books, series};

/// USD volume over the last 30 days of a venue's candles.
fn trailing_usd(candles: &[Candle4H]) -> f64 {
    let n = candles.len().min(30 * 6);
    candles[candles.len() - n..].iter().map(|c| c.volume * c.close).sum()
}

/// Venue weights for ranking: declared volumes, else declared ranks, else
/// volume measured from the files.
fn venue_volumes(spot: &[SpotSource], candles: &[Vec<Candle4H>]) -> Vec<f64> {
    if spot.iter().all(|s| s.trailing_volume_usd.is_some()) {
        spot.iter().map(|s| s.trailing_volume_usd.unwrap_or(0.0)).collect()
    } else if spot.iter().all(|s| s.rank.is_some()) {
        spot.iter().map(|s| -f64::from(s.rank.unwrap_or(u32::MAX))).collect()
    } else {
        candles.iter().map(|c| trailing_usd(c)).collect()
    }
}

fn pick_liquidations(sources: &[LiquidationSource]) -> Option<&LiquidationSource> {
    sources.iter().find(|s| s.authoritative).or_else(|| sources.first())
}

/// Load every series named by the manifest, merge the top spot venues, and
/// run the quality pipeline. Records outside the candle span are dropped.
pub fn ingest(manifest_path: &Path, cfg: &Config) -> Result<(Panel, QualityReport)> {
    let m = Manifest::read(manifest_path)?;
    let at = |p: &Path| resolve(manifest_path, p);
    if m.spot.is_empty() {
        return Err(Error::Missing("no spot sources in manifest".into()));
    }
    let per_venue = m.spot.iter().map(|s| series::read_spot(&at(&s.path), &s.exchange)).collect::<Result<Vec<_>>>()?;
    if per_venue.iter().all(Vec::is_empty) {
        return Err(Error::Missing("spot files contain no candles".into()));
    }
    let picked = top_exchanges(&venue_volumes(&m.spot, &per_venue), Config::count(cfg.top_exchanges));
    let chosen: Vec<Vec<Candle4H>> = picked.iter().map(|&i| per_venue[i].clone()).collect();
    let candles = vwap_merge(&chosen)?;

    let mut panel = Panel::new(m.instrument.clone());
    panel.annotations = m.annotations.clone();
    let (start, end) = match (candles.first(), candles.last()) {
        (Some(a), Some(b)) => (a.open_time, b.close_time()),
        _ => return Err(Error::Missing("merged spot series is empty".into())),
    };
    let inside = |t: i64| t >= start && t <= end;
    panel.candles = candles;

    for f in &m.funding {
        panel.funding.extend(series::read_funding(&at(f))?);
    }
    panel.funding.retain(|f| inside(f.settle_time));
    panel.funding.sort_by(|a, b| (a.settle_time, &a.exchange_id).cmp(&(b.settle_time, &b.exchange_id)));
    if let Some(p) = &m.oi {
        panel.oi = series::read_oi(&at(p))?;
        panel.oi.retain(|r| inside(r.time));
        panel.oi.sort_by_key(|r| r.time);
    }
    if let Some(p) = &m.books {
        panel.books = books::read(&at(p))?;
        panel.books.retain(|b| inside(b.time));
        panel.books.sort_by_key(|b| b.time);
    }
    if let Some(src) = pick_liquidations(&m.liquidations) {
        panel.liquidations = series::read_liquidations(&at(&src.path))?;
        panel.liquidations.retain(|e| inside(e.time));
        panel.liquidations.sort_by_key(|e| e.time);
    }

    let sources: Vec<ExchangeSeries> = m
        .spot
        .iter()
        .zip(per_venue)
        .map(|(s, candles)| ExchangeSeries { exchange_id: s.exchange.clone(), candles })
        .collect();
    Ok(run_pipeline(&panel, &sources, cfg))
}

/// Write the panel's series as CSV and book text next to a manifest that
/// reads them back. The panel's candles become a single spot venue.
pub fn export(panel: &Panel, dir: &Path) -> Result<PathBuf> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let file = |name: &str| dir.join(name);
    let mut m = Manifest {
        instrument: panel.instrument.clone(),
        annotations: panel.annotations.clone(),
        ..Manifest::default()
    };
    series::write_candles(&file("spot.csv"), &panel.candles)?;
    m.spot.push(SpotSource {
        exchange: "merged".into(),
        path: "spot.csv".into(),
        trailing_volume_usd: None,
        rank: Some(1),
    });
    if !panel.funding.is_empty() {
        series::write_funding(&file("funding.csv"), &panel.funding)?;
        m.funding.push("funding.csv".into());
    }
    if !panel.oi.is_empty() {
        series::write_oi(&file("oi.csv"), &panel.oi)?;
        m.oi = Some("oi.csv".into());
    }
    if !panel.books.is_empty() {
        books::write(&file("books.txt"), &panel.books)?;
        m.books = Some("books.txt".into());
    }
    if !panel.liquidations.is_empty() {
        series::write_liquidations(&file("liquidations.csv"), &panel.liquidations)?;
        m.liquidations.push(LiquidationSource {
            path: "liquidations.csv".into(),
            source: "exchange".into(),
            authoritative: true,
        });
    }
    let path = file("manifest.toml");
    m.write(&path)?;
    Ok(path)
}
