//! Regime identification and the advisory layer built on it: the analyst
//! trigger matrix, the trader action map, platform parameter advice and the
//! news-event structural diff. Everything here is advisory output only.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::config::Config;
use crate::cost::{spike_flags, FundingState, SpikeFlag};
use crate::error::{Error, Result};
use crate::fixed::Fixed;
use crate::hypothesis::{Hypothesis, Outcome, Verdict};
use crate::ingest::cumulative_funding;
use crate::liquidity::{book_imbalance, depth_at_extremes, depth_percentiles, shelf_migration};
use crate::model::{Candle4H, Panel, RangeDefinition, BAR_SECONDS, DAY_SECONDS};
use crate::positioning::{classify_oi_event, OiEvent};
use crate::stats;
use crate::structural::{absorption_from_bars, mean_upper_wick_ratio, rolling_volatility, Boundary};

pub const ADVISORY_NOTICE: &str = "advisory only; not financial advice";

const BARS_PER_DAY: f64 = (DAY_SECONDS / BAR_SECONDS) as f64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    Accumulation,
    Distribution,
    Trending,
    Unclassified,
}

impl Regime {
    pub fn as_str(self) -> &'static str {
        match self {
            Regime::Accumulation => "accumulation",
            Regime::Distribution => "distribution",
            Regime::Trending => "trending",
            Regime::Unclassified => "unclassified",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evidence {
    pub criterion: String,
    pub value: Option<f64>,
    pub met: bool,
}

impl Evidence {
    fn new(criterion: &str, value: Option<f64>, met: bool) -> Self {
        Evidence { criterion: criterion.into(), value, met }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeLabel {
    pub label: Regime,
    /// First and one-past-last bar of the lookback.
    pub window: (usize, usize),
    pub evidence: Vec<Evidence>,
}

fn slope_below(name: &str, ys: &[f64], out: &mut Vec<Evidence>) -> bool {
    let s = stats::trend_slope(ys);
    let met = s.is_some_and(|s| s < 0.0);
    out.push(Evidence::new(name, s, met));
    met
}

/// Classify the `regime_lookback` bars ending before `end`.
///
/// Accumulation: volatility and bar range both trend down while absorption
/// notional in the lower third of the lookback's span outweighs the upper
/// third. Distribution: the second half prints a higher high while volume
/// and OI fall and upper wicks lengthen. Trending: a
/// directional share of closes with OI rotating rather than collapsing.
/// When several fire, trending wins over distribution over accumulation.
pub fn classify_regime(panel: &Panel, end: usize, cfg: &Config) -> Result<RegimeLabel> {
    let n = Config::count(cfg.regime_lookback);
    let candles = &panel.candles;
    let end = end.min(candles.len());
    if end < n || n < 4 {
        return Err(Error::TooShort { needed: n.max(4), got: end });
    }
    let s = end - n;
    let win = &candles[s..end];
    let mut ev = Vec::new();

    // Accumulation.
    let vol = rolling_volatility(&candles[..end], Config::count(cfg.realized_vol_window));
    let vols: Vec<f64> = vol[s..end].iter().flatten().copied().collect();
    let vol_down = slope_below("volatility_slope", &vols, &mut ev);
    let widths: Vec<f64> = win.iter().map(|c| (c.high - c.low) / c.close).collect();
    let width_down = slope_below("bar_range_slope", &widths, &mut ev);
    let lo = win.iter().map(|c| c.low).fold(f64::INFINITY, f64::min);
    let hi = win.iter().map(|c| c.high).fold(f64::NEG_INFINITY, f64::max);
    let third = (hi - lo) / 3.0;
    let (mut lower, mut upper) = (0.0, 0.0);
    for a in absorption_from_bars(win, cfg.absorption_min_usd) {
        if a.price <= lo + third {
            lower += a.usd;
        } else if a.price >= hi - third {
            upper += a.usd;
        }
    }
    let absorb = if upper > 0.0 { Some(lower / upper) } else { None };
    let absorb_low = lower > upper;
    ev.push(Evidence::new("lower_third_absorption_ratio", absorb, absorb_low));
    let accumulation = vol_down && width_down && absorb_low;

    // Distribution.
    let half = n / 2;
    let first_high = win[..half].iter().map(|c| c.high).fold(f64::NEG_INFINITY, f64::max);
    let second_high = win[half..].iter().map(|c| c.high).fold(f64::NEG_INFINITY, f64::max);
    let higher_high = second_high > first_high;
    ev.push(Evidence::new("higher_high", Some(second_high / first_high - 1.0), higher_high));
    let usd_volume: Vec<f64> = win.iter().map(|c| c.volume * c.typical()).collect();
    let volume_down = slope_below("volume_slope", &usd_volume, &mut ev);
    let recent = Config::count(cfg.wick_recent_bars).min(n - 1);
    let wick_now = mean_upper_wick_ratio(&win[n - recent..]);
    let wick_before = mean_upper_wick_ratio(&win[..n - recent]);
    let wick_change = wick_now.zip(wick_before).map(|(a, b)| a - b);
    let wick_up = wick_change.is_some_and(|d| d > 0.0);
    ev.push(Evidence::new("upper_wick_ratio_change", wick_change, wick_up));
    let oi_by_bar = panel.oi_by_bar();
    let oi: Vec<f64> = oi_by_bar[s..end].iter().flatten().map(|r| r.oi_usd).collect();
    let oi_down = slope_below("oi_slope", &oi, &mut ev);
    let distribution = higher_high && volume_down && wick_up && oi_down;

    // Trending.
    let ups = win.iter().filter(|c| c.close > c.open).count();
    let downs = win.iter().filter(|c| c.close < c.open).count();
    let share = ups.max(downs) as f64 / n as f64;
    let directional = share >= cfg.regime_directional_share;
    ev.push(Evidence::new("directional_close_share", Some(share), directional));
    let shares: Option<Vec<f64>> = oi_by_bar[s..end].iter().map(|r| r.and_then(|r| r.long_share())).collect();
    let rotation = if oi.len() == n { classify_oi_event(&oi, shares.as_deref(), cfg) } else { None };
    let rotating = rotation.as_ref().is_some_and(|r| r.event == OiEvent::Rotation);
    ev.push(Evidence::new("oi_rotation", rotation.and_then(|r| r.mix_shift), rotating));
    let trending = directional && rotating;

    let label = if trending {
        Regime::Trending
    } else if distribution {
        Regime::Distribution
    } else if accumulation {
        Regime::Accumulation
    } else {
        Regime::Unclassified
    };
    Ok(RegimeLabel { label, window: (s, end), evidence: ev })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TriggerState {
    Aligned,
    Divergent,
    Neutral,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Conviction {
    Low,
    Medium,
    High,
}

/// Qualitative expansion odds: even odds, or the raised band reached when
/// the core indicators agree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExpansionBand {
    Baseline,
    Elevated,
}

impl ExpansionBand {
    pub fn describe(self) -> &'static str {
        match self {
            ExpansionBand::Baseline => "50-50",
            ExpansionBand::Elevated => "70-80%",
        }
    }
}

pub const CORE_FUNDING: &str = "funding_normalization";
pub const CORE_SHELF: &str = "shelf_migration";
pub const CORE_OI: &str = "oi_rotation";
pub const CORE_METRICS: [&str; 3] = [CORE_FUNDING, CORE_SHELF, CORE_OI];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TriggerEntry {
    pub name: String,
    /// `None` when the metric could not be evaluated.
    pub state: Option<TriggerState>,
    pub value: Option<f64>,
}

impl TriggerEntry {
    pub fn new(name: &str, state: Option<TriggerState>, value: Option<f64>) -> Self {
        TriggerEntry { name: name.into(), state, value }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TriggerMatrix {
    pub entries: Vec<TriggerEntry>,
    pub conviction: Conviction,
    pub expansion_probability_band: ExpansionBand,
}

/// Combine metric states. Needs `trigger_min_metrics` evaluated entries.
/// High conviction only when all three core indicators are aligned; any
/// core divergence drops it to low whatever the rest say.
pub fn build_trigger_matrix(entries: &[TriggerEntry], cfg: &Config) -> Result<TriggerMatrix> {
    let evaluated: Vec<TriggerEntry> = entries.iter().filter(|e| e.state.is_some()).cloned().collect();
    let needed = Config::count(cfg.trigger_min_metrics);
    if evaluated.len() < needed {
        return Err(Error::InsufficientInputs { needed, got: evaluated.len() });
    }
    let core = |name: &str| evaluated.iter().find(|e| e.name == name).and_then(|e| e.state);
    let states: Vec<Option<TriggerState>> = CORE_METRICS.iter().map(|n| core(n)).collect();
    let conviction = if states.contains(&Some(TriggerState::Divergent)) {
        Conviction::Low
    } else if states.iter().all(|s| *s == Some(TriggerState::Aligned)) {
        Conviction::High
    } else {
        Conviction::Medium
    };
    Ok(TriggerMatrix {
        entries: evaluated,
        conviction,
        expansion_probability_band: if conviction == Conviction::High {
            ExpansionBand::Elevated
        } else {
            ExpansionBand::Baseline
        },
    })
}

/// Metric states at bar `bar` against `range`.
///
/// Funding is aligned once it has moderated to neutral and divergent while
/// still elevated. Shelves are aligned when depth has migrated beyond either
/// boundary, divergent when it stays inside. OI is aligned on rotation and
/// divergent on collapse. Boundary depth, book imbalance and basis fill out
/// the secondary rows.
pub fn trigger_entries(panel: &Panel, bar: usize, range: &RangeDefinition, cfg: &Config) -> Vec<TriggerEntry> {
    let mut out = Vec::new();
    let funding = panel.funding_by_bar();
    let rate = funding.get(bar).copied().flatten();
    out.push(TriggerEntry::new(
        CORE_FUNDING,
        rate.map(|r| {
            if r.abs() < cfg.funding_neutral {
                TriggerState::Aligned
            } else if r.abs() > cfg.funding_elevated {
                TriggerState::Divergent
            } else {
                TriggerState::Neutral
            }
        }),
        rate,
    ));

    let books = panel.book_by_bar();
    let book = books.get(bar).copied().flatten();
    let shelf = book.map(|b| {
        let up = shelf_migration(b, range, Boundary::Upper, cfg.shelf_min_share);
        let down = shelf_migration(b, range, Boundary::Lower, cfg.shelf_min_share);
        if up.share >= down.share {
            up
        } else {
            down
        }
    });
    out.push(TriggerEntry::new(
        CORE_SHELF,
        shelf.map(|m| if m.expansion { TriggerState::Aligned } else { TriggerState::Divergent }),
        shelf.map(|m| m.share),
    ));

    let lookback = Config::count(cfg.h2_pre_break_bars) + 2;
    let oi = panel.oi_by_bar();
    let from = (bar + 1).saturating_sub(lookback);
    let recs: Option<Vec<_>> = oi.get(from..=bar).and_then(|w| w.iter().copied().collect());
    let class = recs.as_ref().and_then(|recs| {
        let levels: Vec<f64> = recs.iter().map(|r| r.oi_usd).collect();
        let shares: Option<Vec<f64>> = recs.iter().map(|r| r.long_share()).collect();
        classify_oi_event(&levels, shares.as_deref(), cfg)
    });
    out.push(TriggerEntry::new(
        CORE_OI,
        class.as_ref().map(|c| match c.event {
            OiEvent::Rotation => TriggerState::Aligned,
            OiEvent::Collapse => TriggerState::Divergent,
            OiEvent::Neither => TriggerState::Neutral,
        }),
        class.as_ref().map(|c| c.decline),
    ));

    let n = Config::count(cfg.depth_trend_snapshots);
    let recent: Vec<_> =
        books[(bar + 1).saturating_sub(n)..=bar.min(books.len().saturating_sub(1))].iter().flatten().copied().collect();
    let slope = if recent.len() >= 2 {
        let levels: Vec<f64> = recent.iter().map(|b| depth_at_extremes(b, range, cfg.depth_zone)).collect();
        stats::trend_slope(&levels).map(|s| s / stats::mean(&levels).unwrap_or(1.0).max(f64::MIN_POSITIVE))
    } else {
        None
    };
    out.push(TriggerEntry::new(
        "boundary_depth_trend",
        slope.map(|s| if s < 0.0 { TriggerState::Aligned } else { TriggerState::Neutral }),
        slope,
    ));

    let imbalance = book.and_then(|b| book_imbalance(b, Config::count(cfg.imbalance_levels), cfg.imbalance_extreme));
    out.push(TriggerEntry::new(
        "book_imbalance",
        imbalance.map(|i| if i.extreme { TriggerState::Aligned } else { TriggerState::Neutral }),
        imbalance.map(|i| i.value),
    ));

    let basis = panel.basis_by_bar().get(bar).copied().flatten();
    out.push(TriggerEntry::new(
        "basis",
        basis.map(|b| if b.abs() > cfg.basis_dislocation { TriggerState::Divergent } else { TriggerState::Neutral }),
        basis,
    ));
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RangePosition {
    Above,
    NearUpper,
    Middle,
    NearLower,
    Below,
}

/// Where `price` sits: beyond a boundary, within `zone` (relative) of one,
/// or inside.
pub fn range_position(price: f64, range: &RangeDefinition, zone: f64) -> RangePosition {
    if price > range.upper {
        RangePosition::Above
    } else if price < range.lower {
        RangePosition::Below
    } else if range.upper - price <= zone * range.upper {
        RangePosition::NearUpper
    } else if price - range.lower <= zone * range.lower {
        RangePosition::NearLower
    } else {
        RangePosition::Middle
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TradeScenario {
    FadeExtreme,
    BreakoutValidation,
    RangeMidpoint,
    LiquidationCascade,
    AccumulationPhase,
    DistributionPhase,
    NoSetup,
}

impl TradeScenario {
    pub fn action(self) -> &'static str {
        match self {
            TradeScenario::FadeExtreme => "enter counter-directional position",
            TradeScenario::BreakoutValidation => "wait for confirmation, then follow",
            TradeScenario::RangeMidpoint => "avoid directional bias; consider spreads",
            TradeScenario::LiquidationCascade => "fade if 4h structure unchanged",
            TradeScenario::AccumulationPhase => "prepare for eventual expansion",
            TradeScenario::DistributionPhase => "reduce longs; consider shorts",
            TradeScenario::NoSetup => "no setup; stand aside",
        }
    }

    pub fn sizing(self) -> &'static str {
        match self {
            TradeScenario::FadeExtreme => "size for multiple attempts; expect 2-3 failed probes",
            TradeScenario::BreakoutValidation => "enter after 2-3 confirming signals; trail rapidly",
            TradeScenario::RangeMidpoint => "reduce position size; hedge with options",
            TradeScenario::LiquidationCascade => "quick profit-taking; tight stops",
            TradeScenario::AccumulationPhase => "position in advance; size smaller",
            TradeScenario::DistributionPhase => "exit in tranches; preserve capital",
            TradeScenario::NoSetup => "no position",
        }
    }
}

/// Stop band as absolute prices, nearest first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StopBand {
    pub placement: String,
    pub near: f64,
    pub far: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionAdvisory {
    pub scenario: TradeScenario,
    pub action: String,
    pub sizing: String,
    pub stop_min: f64,
    pub stop_max: f64,
    pub stop: Option<StopBand>,
    pub holding_days: f64,
    /// Funding paid over the holding window at the current rate, as a
    /// fraction of notional.
    pub funding_drag: f64,
    pub advisory_only: bool,
    pub notice: String,
}

pub struct ActionInputs<'a> {
    pub regime: Regime,
    pub position: RangePosition,
    pub range: Option<&'a RangeDefinition>,
    pub funding: Option<&'a FundingState>,
    /// A funding spike on the current bar.
    pub spike: bool,
    pub verdicts: &'a [Verdict],
}

/// Funding carried over `days` at a constant 8h `rate`.
pub fn funding_drag(rate_8h: f64, days: f64) -> f64 {
    let periods = libm::round(days * 3.0).max(0.0) as usize;
    let rates = alloc::vec![Fixed::from_f64(rate_8h); periods];
    cumulative_funding(&rates, periods).map_or(0.0, Fixed::to_f64)
}

fn outcome(verdicts: &[Verdict], h: Hypothesis) -> Option<Outcome> {
    verdicts.iter().rev().find(|v| v.hypothesis == h).map(|v| v.outcome)
}

/// Map the current structure to one of the trader scenarios. Cascades come
/// first, then breakouts, boundary fades, the phase regimes and finally
/// mid-range chop.
pub fn recommend_action(inp: &ActionInputs, cfg: &Config) -> ActionAdvisory {
    let rate = inp.funding.map_or(0.0, |f| f.rate_8h);
    let elevated = rate.abs() > cfg.funding_elevated;
    let biased = inp.funding.is_some_and(|f| elevated || f.bias_duration as f64 >= cfg.funding_bias_min_periods);
    let near = matches!(inp.position, RangePosition::NearUpper | RangePosition::NearLower);
    let beyond = matches!(inp.position, RangePosition::Above | RangePosition::Below);
    let structure_shift = outcome(inp.verdicts, Hypothesis::H2) == Some(Outcome::Confirmed);
    // Funding leaning the same way as the push toward the boundary is
    // funding biased against the breakout.
    let against = match inp.position {
        RangePosition::NearUpper => rate > 0.0,
        RangePosition::NearLower => rate < 0.0,
        _ => false,
    };

    let scenario = if inp.spike && (near || beyond) && !structure_shift {
        TradeScenario::LiquidationCascade
    } else if structure_shift || (beyond && rate.abs() < cfg.funding_neutral) {
        TradeScenario::BreakoutValidation
    } else if near && against && biased {
        TradeScenario::FadeExtreme
    } else if inp.regime == Regime::Distribution {
        TradeScenario::DistributionPhase
    } else if inp.regime == Regime::Accumulation {
        TradeScenario::AccumulationPhase
    } else if inp.position == RangePosition::Middle && elevated {
        TradeScenario::RangeMidpoint
    } else {
        TradeScenario::NoSetup
    };

    let (lo, hi) = (cfg.stop_min, cfg.stop_max);
    let stop = inp.range.and_then(|r| match (scenario, inp.position) {
        (
            TradeScenario::FadeExtreme | TradeScenario::LiquidationCascade,
            RangePosition::NearUpper | RangePosition::Above,
        ) => Some(StopBand {
            placement: "beyond upper boundary".into(),
            near: r.upper * (1.0 + lo),
            far: r.upper * (1.0 + hi),
        }),
        (
            TradeScenario::FadeExtreme | TradeScenario::LiquidationCascade,
            RangePosition::NearLower | RangePosition::Below,
        ) => Some(StopBand {
            placement: "beyond lower boundary".into(),
            near: r.lower * (1.0 - lo),
            far: r.lower * (1.0 - hi),
        }),
        (TradeScenario::BreakoutValidation, RangePosition::Below | RangePosition::NearLower) => Some(StopBand {
            placement: "inside range above prior lower boundary".into(),
            near: r.lower * (1.0 + lo),
            far: r.lower * (1.0 + hi),
        }),
        (TradeScenario::BreakoutValidation, _) => Some(StopBand {
            placement: "inside range below prior upper boundary".into(),
            near: r.upper * (1.0 - lo),
            far: r.upper * (1.0 - hi),
        }),
        _ => None,
    });

    ActionAdvisory {
        scenario,
        action: scenario.action().to_string(),
        sizing: scenario.sizing().to_string(),
        stop_min: lo,
        stop_max: hi,
        stop,
        holding_days: cfg.holding_days,
        funding_drag: funding_drag(rate, cfg.holding_days),
        advisory_only: true,
        notice: ADVISORY_NOTICE.to_string(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LiquidationMode {
    Gradual,
    Aggressive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlatformAdvisory {
    pub current_volatility: f64,
    /// Percentile rank within the trailing leverage window, in [0, 1].
    pub leverage_percentile: f64,
    pub max_leverage: f64,
    /// Cut-off quantile of the trailing liquidation-mode window.
    pub aggressive_threshold: f64,
    pub liquidation_mode: LiquidationMode,
    pub advisory_only: bool,
    pub notice: String,
}

/// Linear map from volatility percentile to the leverage cap.
pub fn leverage_for_percentile(pct: f64, cfg: &Config) -> f64 {
    let p = pct.clamp(0.0, 1.0);
    cfg.leverage_max - (cfg.leverage_max - cfg.leverage_min) * p
}

/// Advice from a per-bar volatility history whose last entry is the
/// current reading. The leverage cap scales with the percentile over the
/// trailing leverage window; liquidation turns aggressive strictly above the
/// configured quantile of the longer window.
pub fn advise_platform_parameters(history: &[f64], cfg: &Config) -> Option<PlatformAdvisory> {
    let current = *history.last()?;
    let tail = |days: f64| {
        let n = Config::count(days * BARS_PER_DAY);
        &history[history.len().saturating_sub(n)..]
    };
    let pct = stats::percentile_rank(current, tail(cfg.leverage_lookback_days))?;
    let threshold = stats::quantile(tail(cfg.liquidation_mode_lookback_days), cfg.liquidation_mode_percentile)?;
    Some(PlatformAdvisory {
        current_volatility: current,
        leverage_percentile: pct,
        max_leverage: leverage_for_percentile(pct, cfg),
        aggressive_threshold: threshold,
        liquidation_mode: if current > threshold { LiquidationMode::Aggressive } else { LiquidationMode::Gradual },
        advisory_only: true,
        notice: ADVISORY_NOTICE.to_string(),
    })
}

/// Realized volatility per bar, skipping the warm-up.
pub fn volatility_history(candles: &[Candle4H], cfg: &Config) -> Vec<f64> {
    rolling_volatility(candles, Config::count(cfg.realized_vol_window)).into_iter().flatten().collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StructuralDelta {
    pub question: String,
    pub metric: String,
    pub before: Option<f64>,
    pub after: Option<f64>,
    pub threshold: f64,
    pub material: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NarrativeImpact {
    pub event_bar: usize,
    pub bars: usize,
    pub deltas: Vec<StructuralDelta>,
    /// False means the event is structurally irrelevant.
    pub relevant: bool,
}

fn mean_of<T>(xs: &[T], f: impl Fn(&T) -> Option<f64>) -> Option<f64> {
    let v: Vec<f64> = xs.iter().filter_map(f).collect();
    stats::mean(&v)
}

/// Compare structure over the `regime_lookback` bars before and after the
/// bar containing `event_time`. Three questions: did collateral move (OI
/// level), did funding cost change, did liquidity reposition (depth band
/// skew). An event that moves none of them is structurally irrelevant.
pub fn narrative_filter(panel: &Panel, event_time: i64, cfg: &Config) -> Option<NarrativeImpact> {
    let bar = panel.bar_index(event_time)?;
    let n = Config::count(cfg.regime_lookback);
    let len = panel.candles.len();
    let before = bar.saturating_sub(n)..bar;
    let after = bar..(bar + n).min(len);
    let mut deltas = Vec::new();
    let mut push =
        |question: &str, metric: &str, b: Option<f64>, a: Option<f64>, thr: f64, change: fn(f64, f64) -> f64| {
            let material = matches!((b, a), (Some(b), Some(a)) if change(b, a) > thr);
            deltas.push(StructuralDelta {
                question: question.into(),
                metric: metric.into(),
                before: b,
                after: a,
                threshold: thr,
                material,
            });
        };

    let oi = panel.oi_by_bar();
    let oi_mean = |r: core::ops::Range<usize>| mean_of(&oi[r], |o| o.map(|o| o.oi_usd));
    push(
        "collateral availability",
        "mean open interest (relative change)",
        oi_mean(before.clone()),
        oi_mean(after.clone()),
        cfg.oi_rotation_max_decline,
        |b, a| if b > 0.0 { (a / b - 1.0).abs() } else { 0.0 },
    );

    let funding = panel.funding_by_bar();
    let f_mean = |r: core::ops::Range<usize>| mean_of(&funding[r], |f| f.map(f64::abs));
    push(
        "funding cost",
        "mean |funding rate| per 8h (absolute change)",
        f_mean(before.clone()),
        f_mean(after.clone()),
        cfg.funding_neutral,
        |b, a| (a - b).abs(),
    );

    let books = panel.book_by_bar();
    // Centre of the outer depth shelves relative to mid, so a plain price
    // move with an unchanged book shape is not a repositioning.
    let skew = |r: core::ops::Range<usize>| {
        mean_of(&books[r], |b| {
            let b = (*b)?;
            let (bid, ask) = depth_percentiles(b)?;
            Some(libm::log(0.5 * (bid.p75 + ask.p75) / b.mid()?))
        })
    };
    push(
        "liquidity positioning",
        "depth band centre relative to mid (log)",
        skew(before),
        skew(after),
        cfg.depth_zone,
        |b, a| (a - b).abs(),
    );

    let relevant = deltas.iter().any(|d| d.material);
    Some(NarrativeImpact { event_bar: bar, bars: n, deltas, relevant })
}

/// Funding spike on `bar`, per the configured detector.
pub fn spike_at(panel: &Panel, bar: usize, cfg: &Config) -> bool {
    let rates: Vec<f64> = panel.funding_by_bar().iter().map(|r| r.unwrap_or(0.0)).collect();
    spike_flags(&rates, cfg).get(bar).is_some_and(|f| *f == SpikeFlag::Spike)
}
