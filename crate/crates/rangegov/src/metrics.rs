//! Per-bar metric tables for the four families. Each row describes the
//! market as of that bar's close; the range columns use only bars before it.

use std::str::FromStr;

use rangegov_core::cost::{funding_state, spike_flags, BiasSign, MagnitudeClass, SpikeFlag};
use rangegov_core::liquidity::{
    book_imbalance, depth_at_extremes, depth_percentiles, fill_slippage, impact_at, shelf_migration, spread, OrderSide,
};
use rangegov_core::positioning::{
    boundary_cluster_share, concentration_gini, leverage_summary, liquidation_density, long_short_ratio, oi_rotation,
    ClusterShare, Kernel, LeverageSummary, LiquidationDensity,
};
use rangegov_core::structural::{
    map_swings, range_at, range_persistence, rolling_volatility, volume_nodes, wick_to_body, Boundary, SwingKind,
    SwingPoint, VolumeProfile, WickRatio,
};
use rangegov_core::{Config, Panel, RangeDefinition, Timestamp};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Structural,
    Cost,
    Positioning,
    Liquidity,
}

impl Family {
    pub const ALL: [Family; 4] = [Family::Structural, Family::Cost, Family::Positioning, Family::Liquidity];
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Family> {
        match s {
            "structural" => Ok(Family::Structural),
            "cost" => Ok(Family::Cost),
            "positioning" => Ok(Family::Positioning),
            "liquidity" => Ok(Family::Liquidity),
            _ => Err(Error::Usage(format!("unknown metric family `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StructuralRow {
    pub open_time: Timestamp,
    pub close: f64,
    pub range_lower: Option<f64>,
    pub range_upper: Option<f64>,
    pub realized_vol: Option<f64>,
    /// Wick lengths as a percentage of the body; `None` on dojis.
    pub wick_upper: Option<f64>,
    pub wick_lower: Option<f64>,
    /// Bar notional when it reaches the absorption threshold.
    pub absorption_usd: Option<f64>,
    pub swing: Option<SwingKind>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StructuralTable {
    pub rows: Vec<StructuralRow>,
    pub swings: Vec<SwingPoint>,
    pub volume_profile: Option<VolumeProfile>,
    /// Range in force after the last bar, and how many closes it has held.
    pub current_range: Option<RangeDefinition>,
    pub persistence: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostRow {
    pub open_time: Timestamp,
    pub rate_8h: Option<f64>,
    pub bias: Option<BiasSign>,
    pub bias_duration: Option<u32>,
    pub magnitude: Option<MagnitudeClass>,
    pub annualized_pct: Option<f64>,
    pub cumulative_7d: Option<f64>,
    pub cumulative_30d: Option<f64>,
    pub spike: SpikeFlag,
    pub basis: Option<f64>,
    pub basis_dislocation: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostTable {
    pub rows: Vec<CostRow>,
    #[serde(default)]
    pub notes: Vec<String>,
}

/// Attached to every cost table so readers comparing against quoted figures
/// see which arithmetic was used.
pub const CUMULATIVE_FUNDING_NOTE: &str =
    "cumulative funding is the plain sum of 8h rates: 90 periods at 0.05% give 4.5%, not the 5.5% sometimes quoted";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PositioningRow {
    pub open_time: Timestamp,
    pub oi_usd: Option<f64>,
    pub oi_rotation: Option<f64>,
    pub long_short_ratio: Option<f64>,
    pub long_short_extreme: Option<bool>,
    pub gini: Option<f64>,
    pub concentration_risk: Option<bool>,
    pub leverage: Option<LeverageSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PositioningTable {
    pub rows: Vec<PositioningRow>,
    pub density: LiquidationDensity,
    /// Share of liquidation notional near the current range boundaries.
    pub cluster: Option<ClusterShare>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LiquidityRow {
    pub open_time: Timestamp,
    pub spread: Option<f64>,
    pub spread_uncertain: Option<bool>,
    pub imbalance: Option<f64>,
    pub imbalance_extreme: Option<bool>,
    pub bid_p25: Option<f64>,
    pub bid_p75: Option<f64>,
    pub ask_p25: Option<f64>,
    pub ask_p75: Option<f64>,
    pub slippage_buy: Option<f64>,
    pub slippage_sell: Option<f64>,
    pub depth_at_extremes: Option<f64>,
    pub shelf_up: Option<f64>,
    pub shelf_down: Option<f64>,
    pub impact: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LiquidityTable {
    pub rows: Vec<LiquidityRow>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub structural: Option<StructuralTable>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cost: Option<CostTable>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub positioning: Option<PositioningTable>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub liquidity: Option<LiquidityTable>,
}

/// Range in force at the open of each bar.
pub fn ranges_by_bar(panel: &Panel, cfg: &Config) -> Vec<Option<RangeDefinition>> {
    (0..panel.candles.len()).map(|t| range_at(&panel.candles, t, cfg)).collect()
}

pub fn structural(panel: &Panel, ranges: &[Option<RangeDefinition>], cfg: &Config) -> StructuralTable {
    let candles = &panel.candles;
    let vol = rolling_volatility(candles, Config::count(cfg.realized_vol_window));
    let swings = map_swings(candles, Config::count(cfg.swing_lookback)).unwrap_or_default();
    let mut swing_at = vec![None; candles.len()];
    for s in &swings {
        swing_at[s.index] = Some(s.kind);
    }
    let rows = candles
        .iter()
        .enumerate()
        .map(|(t, c)| {
            let (wick_upper, wick_lower) = match wick_to_body(c) {
                WickRatio::Defined { upper, lower } => (Some(upper), Some(lower)),
                WickRatio::Undefined => (None, None),
            };
            let usd = c.volume * c.typical();
            StructuralRow {
                open_time: c.open_time,
                close: c.close,
                range_lower: ranges[t].as_ref().map(|r| r.lower),
                range_upper: ranges[t].as_ref().map(|r| r.upper),
                realized_vol: vol[t],
                wick_upper,
                wick_lower,
                absorption_usd: (usd >= cfg.absorption_min_usd).then_some(usd),
                swing: swing_at[t],
            }
        })
        .collect();
    let current_range = range_at(candles, candles.len(), cfg);
    StructuralTable {
        rows,
        persistence: current_range.as_ref().map(|r| range_persistence(candles, r)),
        volume_profile: volume_nodes(candles, cfg.volume_bin_width),
        swings,
        current_range,
    }
}

pub fn cost(panel: &Panel, cfg: &Config) -> CostTable {
    let by_bar = panel.funding_by_bar();
    let basis = panel.basis_by_bar();
    // Spikes are judged on the bars where a rate exists.
    let known: Vec<usize> = (0..by_bar.len()).filter(|&t| by_bar[t].is_some()).collect();
    let rates: Vec<f64> = known.iter().filter_map(|&t| by_bar[t]).collect();
    let mut spikes = vec![SpikeFlag::NotEvaluated; by_bar.len()];
    for (&t, f) in known.iter().zip(spike_flags(&rates, cfg)) {
        spikes[t] = f;
    }
    let rows = panel
        .candles
        .iter()
        .enumerate()
        .map(|(t, c)| {
            let state = by_bar[t].and_then(|_| funding_state(panel, t, cfg));
            CostRow {
                open_time: c.open_time,
                rate_8h: by_bar[t],
                bias: state.as_ref().map(|s| s.bias_sign),
                bias_duration: state.as_ref().map(|s| s.bias_duration),
                magnitude: state.as_ref().map(|s| s.magnitude_class),
                annualized_pct: state.as_ref().map(|s| s.annualized_pct),
                cumulative_7d: state.as_ref().map(|s| s.cumulative_7d.to_f64()),
                cumulative_30d: state.as_ref().map(|s| s.cumulative_30d.to_f64()),
                spike: spikes[t],
                basis: basis[t],
                basis_dislocation: basis[t].map(|b| b.abs() > cfg.basis_dislocation),
            }
        })
        .collect();
    CostTable { rows, notes: vec![CUMULATIVE_FUNDING_NOTE.to_string()] }
}

pub fn positioning(panel: &Panel, current_range: Option<&RangeDefinition>, cfg: &Config) -> PositioningTable {
    let oi = panel.oi_by_bar();
    let vol = rolling_volatility(&panel.candles, Config::count(cfg.realized_vol_window));
    // Rotation is defined over the contiguous run of bars that have OI.
    let mut rotation = vec![None; oi.len()];
    if let Some(first) = oi.iter().position(Option::is_some) {
        let levels: Vec<f64> = oi[first..].iter().map(|r| r.map_or(0.0, |r| r.oi_usd)).collect();
        for (k, v) in oi_rotation(&levels, &vol[first..], cfg.oi_rotation_vol_floor).into_iter().enumerate() {
            rotation[first + k] = v;
        }
    }
    let rows = panel
        .candles
        .iter()
        .enumerate()
        .map(|(t, c)| {
            let rec = oi[t];
            let ls = rec.and_then(|r| Some(long_short_ratio(r.long_oi_usd?, r.short_oi_usd?, cfg)));
            let gini = rec.and_then(|r| r.holder_shares.as_deref()).and_then(|s| concentration_gini(s, cfg.gini_risk));
            PositioningRow {
                open_time: c.open_time,
                oi_usd: rec.map(|r| r.oi_usd),
                oi_rotation: rotation[t],
                long_short_ratio: ls.and_then(|l| l.ratio),
                long_short_extreme: ls.map(|l| l.extreme),
                gini: gini.map(|g| g.gini),
                concentration_risk: gini.map(|g| g.risk),
                leverage: rec.and_then(|r| r.leverage_histogram.as_deref()).and_then(leverage_summary),
            }
        })
        .collect();
    PositioningTable {
        rows,
        density: liquidation_density(&panel.liquidations, None, cfg.kde_bandwidth, Kernel::from_config(cfg)),
        cluster: current_range
            .map(|r| boundary_cluster_share(&panel.liquidations, r, cfg.cluster_distance, cfg.cluster_min_share)),
    }
}

pub fn liquidity(panel: &Panel, ranges: &[Option<RangeDefinition>], cfg: &Config) -> LiquidityTable {
    let books = panel.book_by_bar();
    let levels = Config::count(cfg.imbalance_levels);
    let impact_window = Config::count(cfg.impact_window_bars);
    let rows = panel
        .candles
        .iter()
        .enumerate()
        .map(|(t, c)| {
            let book = books[t];
            let range = ranges[t].as_ref();
            let sp = book.and_then(|b| spread(b, cfg.spread_uncertainty));
            let imb = book.and_then(|b| book_imbalance(b, levels, cfg.imbalance_extreme));
            let pct = book.and_then(depth_percentiles);
            let slip = |side| book.and_then(|b| fill_slippage(b, cfg.slippage_order_usd, side)).map(|s| s.slippage);
            let shelf = |dir| book.zip(range).map(|(b, r)| shelf_migration(b, r, dir, cfg.shelf_min_share).share);
            LiquidityRow {
                open_time: c.open_time,
                spread: sp.map(|s| s.value),
                spread_uncertain: sp.map(|s| s.uncertain),
                imbalance: imb.map(|i| i.value),
                imbalance_extreme: imb.map(|i| i.extreme),
                bid_p25: pct.as_ref().map(|(b, _)| b.p25),
                bid_p75: pct.as_ref().map(|(b, _)| b.p75),
                ask_p25: pct.as_ref().map(|(_, a)| a.p25),
                ask_p75: pct.as_ref().map(|(_, a)| a.p75),
                slippage_buy: slip(OrderSide::Buy),
                slippage_sell: slip(OrderSide::Sell),
                depth_at_extremes: book.zip(range).map(|(b, r)| depth_at_extremes(b, r, cfg.depth_zone)),
                shelf_up: shelf(Boundary::Upper),
                shelf_down: shelf(Boundary::Lower),
                impact: impact_at(&panel.candles, t + 1, impact_window).map(|o| o.slope),
            }
        })
        .collect();
    LiquidityTable { rows }
}

fn require(panel: &Panel, family: Family) -> Result<()> {
    let missing = match family {
        Family::Structural => panel.candles.is_empty().then_some("candles"),
        Family::Cost => panel.funding.is_empty().then_some("funding"),
        Family::Positioning => (panel.oi.is_empty() && panel.liquidations.is_empty()).then_some("open interest"),
        Family::Liquidity => panel.books.is_empty().then_some("order books"),
    };
    match missing {
        Some(what) => Err(Error::Missing(format!("{family:?} metrics need {what}").to_lowercase())),
        None => Ok(()),
    }
}

/// Compute the requested family, or all four. Naming a family whose input
/// series is absent is an error; with no family named, that table is
/// still produced with empty columns.
pub fn compute(panel: &Panel, family: Option<Family>, cfg: &Config) -> Result<Metrics> {
    if let Some(f) = family {
        require(panel, f)?;
    } else {
        require(panel, Family::Structural)?;
    }
    let want = |f: Family| family.is_none_or(|x| x == f);
    let needs_ranges = want(Family::Structural) || want(Family::Liquidity) || want(Family::Positioning);
    let ranges = if needs_ranges { ranges_by_bar(panel, cfg) } else { Vec::new() };
    let current = if needs_ranges { range_at(&panel.candles, panel.candles.len(), cfg) } else { None };

    let ((s, c), (p, l)) = rayon::join(
        || {
            rayon::join(
                || want(Family::Structural).then(|| structural(panel, &ranges, cfg)),
                || want(Family::Cost).then(|| cost(panel, cfg)),
            )
        },
        || {
            rayon::join(
                || want(Family::Positioning).then(|| positioning(panel, current.as_ref(), cfg)),
                || want(Family::Liquidity).then(|| liquidity(panel, &ranges, cfg)),
            )
        },
    );
    Ok(Metrics { structural: s, cost: c, positioning: p, liquidity: l })
}
