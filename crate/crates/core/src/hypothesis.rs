//! Hypothesis engine. Each evaluator looks at one evaluation window of a
//! panel, with the range taken from the bars just before the window, and
//! returns a verdict whose signals can be re-checked from the record alone.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::config::Config;
use crate::cost::{funding_bias_duration, spike_flags, SpikeFlag};
use crate::liquidity::{depth_near, shelf_migration};
use crate::model::{BookSnapshot, EvalWindow, LiquidationEvent, Panel, RangeDefinition, BAR_SECONDS, DAY_SECONDS};
use crate::positioning::{boundary_cluster_share, classify_oi_event};
use crate::stats;
use crate::structural::{
    boundary_taps, first_breakout, range_at, realized_volatility, rolling_volatility, sustained_outside,
    wick_ratio_trend, Boundary,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Hypothesis {
    H1,
    H2,
    H3,
    H4,
}

impl Hypothesis {
    pub const ALL: [Hypothesis; 4] = [Hypothesis::H1, Hypothesis::H2, Hypothesis::H3, Hypothesis::H4];

    pub fn index(self) -> usize {
        self as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Outcome {
    Confirmed,
    Falsified,
    NotEvaluable,
    /// Condition held but neither the confirmation nor the falsification
    /// pattern was observed.
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Op {
    Gt,
    Ge,
    Lt,
    Le,
}

impl Op {
    pub fn holds(self, value: f64, threshold: f64) -> bool {
        match self {
            Op::Gt => value > threshold,
            Op::Ge => value >= threshold,
            Op::Lt => value < threshold,
            Op::Le => value <= threshold,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SignalStatus {
    Met,
    Unmet,
    NotMeasured,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Signal {
    pub name: String,
    pub status: SignalStatus,
    pub value: Option<f64>,
    pub op: Op,
    pub threshold: f64,
}

impl Signal {
    /// Met when `value op threshold`; unmet when the value is missing.
    pub fn check(name: &str, value: Option<f64>, op: Op, threshold: f64) -> Signal {
        let status = match value {
            Some(v) if op.holds(v, threshold) => SignalStatus::Met,
            _ => SignalStatus::Unmet,
        };
        Signal { name: name.to_string(), status, value, op, threshold }
    }

    pub fn not_measured(name: &str, op: Op, threshold: f64) -> Signal {
        Signal { name: name.to_string(), status: SignalStatus::NotMeasured, value: None, op, threshold }
    }

    pub fn met(&self) -> bool {
        self.status == SignalStatus::Met
    }
}

/// One boundary tap as scored for H4.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TapScore {
    pub index: usize,
    pub boundary: Boundary,
    pub excursion: f64,
    pub recoil: f64,
    pub funding_decline: Option<f64>,
    pub oi_change: Option<f64>,
    pub recoiled: bool,
    pub funding_normalized: bool,
    pub oi_dipped: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub hypothesis: Hypothesis,
    pub label: String,
    /// `[start, end)` bar indices.
    pub window: (usize, usize),
    pub range: Option<RangeDefinition>,
    pub condition_met: bool,
    pub signals: Vec<Signal>,
    pub outcome: Outcome,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub taps: Vec<TapScore>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl Verdict {
    fn new(h: Hypothesis, w: &EvalWindow, range: Option<RangeDefinition>) -> Verdict {
        Verdict {
            hypothesis: h,
            label: w.label.clone(),
            window: (w.start, w.end),
            range,
            condition_met: false,
            signals: Vec::new(),
            outcome: Outcome::NotEvaluable,
            taps: Vec::new(),
            notes: Vec::new(),
        }
    }

    fn not_evaluable(mut self, note: impl Into<String>) -> Verdict {
        self.outcome = Outcome::NotEvaluable;
        self.notes.push(note.into());
        self
    }

    pub fn signal(&self, name: &str) -> Option<&Signal> {
        self.signals.iter().find(|s| s.name == name)
    }
}

/// Per-bar series shared by all evaluators.
#[derive(Debug, Clone)]
pub struct Context<'a> {
    pub panel: &'a Panel,
    pub funding: Vec<f64>,
    pub has_funding: Vec<bool>,
    pub basis: Vec<Option<f64>>,
    pub oi: Vec<Option<f64>>,
    pub long_share: Vec<Option<f64>>,
    pub books: Vec<Option<&'a BookSnapshot>>,
    pub bias: Vec<u32>,
    pub spikes: Vec<SpikeFlag>,
    pub volatility: Vec<Option<f64>>,
    oi_prefix: Vec<f64>,
    oi_count: Vec<usize>,
}

impl<'a> Context<'a> {
    pub fn new(panel: &'a Panel, cfg: &Config) -> Context<'a> {
        let raw = panel.funding_by_bar();
        let funding: Vec<f64> = raw.iter().map(|r| r.unwrap_or(0.0)).collect();
        let has_funding = raw.iter().map(Option::is_some).collect();
        let oi_recs = panel.oi_by_bar();
        let oi: Vec<Option<f64>> = oi_recs.iter().map(|r| r.map(|r| r.oi_usd)).collect();
        let long_share = oi_recs.iter().map(|r| r.and_then(|r| r.long_share())).collect();
        let tolerance = Config::count(cfg.funding_bias_flip_tolerance + 1.0) - 1;
        let bias = funding_bias_duration(&funding, tolerance).iter().map(|r| r.duration).collect();
        let mut oi_prefix = alloc::vec![0.0; oi.len() + 1];
        let mut oi_count = alloc::vec![0usize; oi.len() + 1];
        for (i, v) in oi.iter().enumerate() {
            oi_prefix[i + 1] = oi_prefix[i] + v.unwrap_or(0.0);
            oi_count[i + 1] = oi_count[i] + usize::from(v.is_some());
        }
        Context {
            panel,
            spikes: spike_flags(&funding, cfg),
            funding,
            has_funding,
            basis: panel.basis_by_bar(),
            oi,
            long_share,
            books: panel.book_by_bar(),
            bias,
            volatility: rolling_volatility(&panel.candles, Config::count(cfg.realized_vol_window)),
            oi_prefix,
            oi_count,
        }
    }

    fn len(&self) -> usize {
        self.panel.candles.len()
    }

    /// Mean OI over the `bars` bars ending at `t`; `None` unless every one
    /// of them has a reading.
    fn oi_ma(&self, t: usize, bars: usize) -> Option<f64> {
        if t + 1 < bars {
            return None;
        }
        let (a, b) = (t + 1 - bars, t + 1);
        (self.oi_count[b] - self.oi_count[a] == bars).then(|| (self.oi_prefix[b] - self.oi_prefix[a]) / bars as f64)
    }

    fn oi_change(&self, t: usize) -> Option<f64> {
        let prev = self.oi[t.checked_sub(1)?]?;
        let cur = self.oi[t]?;
        (prev > 0.0).then(|| (cur - prev) / prev)
    }
}

fn ma_bars(cfg: &Config) -> usize {
    Config::count(cfg.elevated_oi_ma_days * (DAY_SECONDS / BAR_SECONDS) as f64)
}

/// Sample std of log returns over `[from, to)`
/// return indices (return `i` is close `i` over close `i - 1`).
fn return_vol(closes: &[f64], from: usize, to: usize) -> Option<f64> {
    if from == 0 || to > closes.len() || to <= from + 1 {
        return None;
    }
    stats::sample_std(&stats::log_returns(&closes[from - 1..to]))
}

fn beyond(close: f64, range: &RangeDefinition, side: Boundary) -> bool {
    match side {
        Boundary::Upper => close > range.upper,
        Boundary::Lower => close < range.lower,
    }
}

/// Range for a window: derived from the bars before `start`.
pub fn window_range(panel: &Panel, w: &EvalWindow, cfg: &Config) -> Option<RangeDefinition> {
    range_at(&panel.candles, w.start, cfg)
}

pub fn evaluate_h1(ctx: &Context, w: &EvalWindow, range: Option<&RangeDefinition>, cfg: &Config) -> Verdict {
    let v = Verdict::new(Hypothesis::H1, w, range.cloned());
    let Some(range) = range else {
        return v.not_evaluable("no established range");
    };
    let (s, e) = (w.start, w.end.min(ctx.len()));
    let bars = ma_bars(cfg);
    if s >= e || ctx.oi_ma(s, bars).is_none() {
        return v.not_evaluable("open interest history shorter than the moving-average baseline");
    }
    let mut v = v;
    let min_bias = Config::count(cfg.funding_bias_min_periods) as u32;
    let cond_bars: Vec<usize> = (s..e)
        .filter(|&t| ctx.bias[t] >= min_bias && matches!((ctx.oi[t], ctx.oi_ma(t, bars)), (Some(o), Some(m)) if o > m))
        .collect();
    v.condition_met = !cond_bars.is_empty();
    if !v.condition_met {
        return v.not_evaluable("no bar with persistent funding bias and elevated open interest");
    }
    let candles = &ctx.panel.candles;

    let vols: Vec<f64> = (s..e).filter_map(|t| ctx.volatility[t]).collect();
    v.signals.push(Signal::check("volatility_slope", stats::trend_slope(&vols), Op::Lt, 0.0));

    let wick = wick_ratio_trend(candles, e, Config::count(cfg.wick_recent_bars), Config::count(cfg.wick_baseline_bars));
    v.signals.push(Signal::check("wick_ratio_change", wick.map(|(cur, prior)| cur - prior), Op::Gt, 0.0));

    let taps = boundary_taps(candles, range, s, e, cfg.range_touch_tolerance);
    let failed: Vec<usize> = taps.iter().filter(|t| !t.closed_beyond).map(|t| t.index).collect();
    let worst_drop = failed
        .iter()
        .filter_map(|&t| ctx.oi_change(t).map(|c| -c))
        .fold(None, |m: Option<f64>, d| Some(m.map_or(d, |m| m.max(d))));
    v.signals.push(Signal::check("failed_tap_oi_drop", worst_drop, Op::Lt, cfg.oi_rotation_max_decline));
    v.notes.push(format!("{} failed boundary taps", failed.len()));

    let closes: Vec<f64> = candles.iter().map(|c| c.close).collect();
    let n = Config::count(cfg.h1_expansion_vol_bars);
    let shift = Config::count(cfg.structural_shift_closes);
    if let Some((t, side)) = sustained_outside(candles, range, s, e, shift) {
        let second = t + shift - 1;
        let after = return_vol(&closes, (second + 1).saturating_sub(n), second + 1);
        let before = return_vol(&closes, (second + 1).saturating_sub(2 * n), (second + 1).saturating_sub(n));
        if let (Some(a), Some(b)) = (after, before) {
            if a > b {
                v.notes.push(format!("sustained {side:?} expansion from bar {t}, volatility {b:.6} -> {a:.6}"));
                v.outcome = Outcome::Falsified;
                return v;
            }
        }
    }
    let met = v.signals.iter().filter(|s| s.met()).count();
    v.outcome = if met >= Config::count(cfg.h1_required_signals).min(v.signals.len()) {
        Outcome::Confirmed
    } else {
        Outcome::Inconclusive
    };
    v
}

pub fn evaluate_h2(ctx: &Context, w: &EvalWindow, range: Option<&RangeDefinition>, cfg: &Config) -> Verdict {
    let mut v = Verdict::new(Hypothesis::H2, w, range.cloned());
    let Some(range) = range else {
        return v.not_evaluable("no established range");
    };
    let candles = &ctx.panel.candles;
    let Some((b, side)) = first_breakout(candles, range, w.start, w.end) else {
        return v.not_evaluable("no close beyond the range");
    };
    v.notes.push(format!("breakout bar {b} through {side:?}"));
    let pre = Config::count(cfg.h2_pre_break_bars);
    let calm = (b.saturating_sub(pre)..b)
        .filter(|&t| ctx.has_funding[t])
        .map(|t| ctx.funding[t].abs())
        .fold(None, |m: Option<f64>, x| Some(m.map_or(x, |m| m.min(x))));
    v.condition_met = calm.is_some_and(|x| x < cfg.funding_neutral);
    if !v.condition_met {
        return v.not_evaluable("funding not neutral before the break");
    }

    let book = ctx.books[b];
    v.signals.push(match book {
        Some(book) => Signal::check(
            "shelf_migration",
            Some(shelf_migration(book, range, side, cfg.shelf_min_share).share),
            Op::Gt,
            cfg.shelf_min_share,
        ),
        None => Signal::not_measured("shelf_migration", Op::Gt, cfg.shelf_min_share),
    });

    let boundary = match side {
        Boundary::Upper => range.upper,
        Boundary::Lower => range.lower,
    };
    let k = Config::count(cfg.depth_trend_snapshots);
    let mut snaps: Vec<&BookSnapshot> = Vec::new();
    for t in (b + 1).saturating_sub(k)..=b {
        if let Some(s) = ctx.books[t] {
            if snaps.last().is_none_or(|l| l.time != s.time) {
                snaps.push(s);
            }
        }
    }
    let depth: Vec<f64> = snaps.iter().map(|s| depth_near(s, boundary, cfg.depth_zone)).collect();
    v.signals.push(Signal::check("boundary_depth_slope", stats::trend_slope(&depth), Op::Lt, 0.0));

    let lo = b.saturating_sub(pre);
    let hi = (b + 2).min(ctx.len());
    let oi: Option<Vec<f64>> = ctx.oi[lo..hi].iter().copied().collect();
    let shares: Option<Vec<f64>> = ctx.long_share[lo..hi].iter().copied().collect();
    let event = oi.as_deref().and_then(|oi| classify_oi_event(oi, shares.as_deref(), cfg));
    v.signals.push(Signal::check("oi_decline", event.map(|e| e.decline), Op::Le, cfg.oi_rotation_max_decline));
    v.signals.push(match event.and_then(|e| e.mix_shift) {
        Some(m) => Signal::check("oi_mix_shift", Some(m), Op::Ge, cfg.oi_rotation_min_mix_shift),
        None => Signal::not_measured("oi_mix_shift", Op::Ge, cfg.oi_rotation_min_mix_shift),
    });

    if !v.signals.iter().all(Signal::met) {
        v.outcome = Outcome::Inconclusive;
        return v;
    }
    let follow = Config::count(cfg.h2_follow_through_closes);
    if b + follow >= ctx.len() {
        v.notes.push("not enough bars after the break to judge follow-through".into());
        v.outcome = Outcome::Inconclusive;
        return v;
    }
    let sustained = (b + 1..=b + follow).all(|t| beyond(candles[t].close, range, side));
    v.outcome = if sustained { Outcome::Confirmed } else { Outcome::Falsified };
    v
}

pub fn evaluate_h3(ctx: &Context, w: &EvalWindow, range: Option<&RangeDefinition>, cfg: &Config) -> Verdict {
    let mut v = Verdict::new(Hypothesis::H3, w, range.cloned());
    let Some(range) = range else {
        return v.not_evaluable("no established range");
    };
    let candles = &ctx.panel.candles;
    let Some(p) = (w.start..w.end.min(ctx.len())).find(|&t| ctx.spikes[t] == SpikeFlag::Spike) else {
        return v.not_evaluable("no funding spike");
    };
    v.notes.push(format!("funding spike at bar {p}"));
    let horizon = Config::count(cfg.reversion_max_bars);
    let shift = Config::count(cfg.structural_shift_closes);
    if let Some((t, side)) = sustained_outside(candles, range, p.saturating_sub(1), p + horizon + 1, shift) {
        return v.not_evaluable(format!("structural shift: {shift} closes beyond {side:?} from bar {t}"));
    }
    v.condition_met = true;
    if p + horizon >= ctx.len() {
        v.notes.push("not enough bars after the spike".into());
        v.outcome = Outcome::Inconclusive;
        return v;
    }
    let Some(vol) = realized_volatility(&candles[..p], Config::count(cfg.realized_vol_window)) else {
        v.notes.push("not enough history for realized volatility".into());
        v.outcome = Outcome::Inconclusive;
        return v;
    };
    let band = cfg.reversion_sigma_multiple * vol * range.midpoint;
    let reverted_at = (p + 1..=p + horizon).find(|&t| (candles[t].close - range.midpoint).abs() <= band);

    v.signals.push(Signal::not_measured("intrabar_volatility_burst", Op::Gt, 1.0));
    let outside = (p + 1..=p + horizon).filter(|&t| !range.contains(candles[t].close)).count();
    v.signals.push(Signal::check("closes_outside_range", Some(outside as f64), Op::Le, 0.0));
    let nb = Config::count(cfg.basis_reversion_bars);
    let basis = (p + 1..=p + nb)
        .filter_map(|t| ctx.basis[t].map(f64::abs))
        .fold(None, |m: Option<f64>, x| Some(m.map_or(x, |m| m.min(x))));
    v.signals.push(match basis {
        Some(b) => Signal::check("basis_abs_min", Some(b), Op::Lt, cfg.basis_dislocation),
        None => Signal::not_measured("basis_abs_min", Op::Lt, cfg.basis_dislocation),
    });
    v.signals.push(Signal::check("bars_to_reversion", reverted_at.map(|t| (t - p) as f64), Op::Le, horizon as f64));

    v.outcome = if reverted_at.is_none() {
        Outcome::Falsified
    } else if v.signals.iter().all(|s| s.status != SignalStatus::Unmet) {
        Outcome::Confirmed
    } else {
        Outcome::Inconclusive
    };
    v
}

fn liquidations_between(events: &[LiquidationEvent], from: i64, to: i64) -> Vec<LiquidationEvent> {
    events.iter().filter(|e| e.time >= from && e.time < to).cloned().collect()
}

pub fn evaluate_h4(ctx: &Context, w: &EvalWindow, range: Option<&RangeDefinition>, cfg: &Config) -> Verdict {
    let mut v = Verdict::new(Hypothesis::H4, w, range.cloned());
    let Some(range) = range else {
        return v.not_evaluable("no established range");
    };
    let candles = &ctx.panel.candles;
    let (s, e) = (w.start, w.end.min(ctx.len()));
    if s >= e {
        return v.not_evaluable("empty window");
    }
    let from = candles[s.saturating_sub(Config::count(cfg.range_window))].open_time;
    let events = liquidations_between(&ctx.panel.liquidations, from, candles[e - 1].close_time());
    let cluster = boundary_cluster_share(&events, range, cfg.cluster_distance, cfg.cluster_min_share);
    v.notes.push(format!("liquidation cluster share {:.4} over {} events", cluster.share, events.len()));
    v.condition_met = cluster.share >= cfg.cluster_min_share;
    if !v.condition_met {
        return v.not_evaluable("liquidations not clustered at the boundaries");
    }
    v.notes.push("excursion measured from the boundary".into());

    let rb = Config::count(cfg.recoil_bars);
    let fb = Config::count(cfg.funding_norm_bars);
    for tap in boundary_taps(candles, range, s, e, 0.0) {
        let t = tap.index;
        if !(tap.excursion > 0.0) || t + rb.max(fb) >= ctx.len() {
            continue;
        }
        let after = candles[t + rb].close;
        let recoil = match tap.boundary {
            Boundary::Upper => (tap.extreme - after) / tap.excursion,
            Boundary::Lower => (after - tap.extreme) / tap.excursion,
        };
        let f0 = ctx.funding[t].abs();
        let funding_decline = (f0 > 0.0).then(|| {
            let later = (t + 1..=t + fb).map(|j| ctx.funding[j].abs()).fold(f64::INFINITY, f64::min);
            1.0 - later / f0
        });
        let oi_change = ctx.oi_change(t);
        v.taps.push(TapScore {
            index: t,
            boundary: tap.boundary,
            excursion: tap.excursion / range.midpoint,
            recoil,
            funding_decline,
            oi_change,
            recoiled: recoil > cfg.recoil_min_fraction,
            funding_normalized: funding_decline.is_some_and(|d| d >= cfg.funding_norm_min_decline),
            oi_dipped: oi_change.is_some_and(|c| c < 0.0),
        });
    }
    if v.taps.is_empty() {
        return v.not_evaluable("no boundary taps in the window");
    }
    let n = v.taps.len() as f64;
    let rate = |f: fn(&TapScore) -> bool| v.taps.iter().filter(|t| f(t)).count() as f64 / n;
    let (recoil, funding, oi) = (rate(|t| t.recoiled), rate(|t| t.funding_normalized), rate(|t| t.oi_dipped));
    let min = cfg.h4_min_tap_rate;
    v.signals.push(Signal::check("recoil_hit_rate", Some(recoil), Op::Gt, min));
    v.signals.push(Signal::check("funding_normalization_hit_rate", Some(funding), Op::Gt, min));
    v.signals.push(Signal::check("oi_dip_hit_rate", Some(oi), Op::Gt, min));
    v.outcome = if recoil < min {
        Outcome::Falsified
    } else if v.signals.iter().all(Signal::met) {
        Outcome::Confirmed
    } else {
        Outcome::Inconclusive
    };
    v
}

pub fn evaluate(
    h: Hypothesis,
    ctx: &Context,
    w: &EvalWindow,
    range: Option<&RangeDefinition>,
    cfg: &Config,
) -> Verdict {
    match h {
        Hypothesis::H1 => evaluate_h1(ctx, w, range, cfg),
        Hypothesis::H2 => evaluate_h2(ctx, w, range, cfg),
        Hypothesis::H3 => evaluate_h3(ctx, w, range, cfg),
        Hypothesis::H4 => evaluate_h4(ctx, w, range, cfg),
    }
}

/// Consecutive windows of `size` bars, stepping by `step`, that leave room
/// for a range lookback before each.
pub fn sliding_windows(len: usize, lookback: usize, size: usize, step: usize) -> Vec<EvalWindow> {
    let (size, step) = (size.max(1), step.max(1));
    let mut out = Vec::new();
    let mut start = lookback;
    while start + size <= len {
        out.push(EvalWindow { label: format!("bars {start}-{}", start + size), start, end: start + size });
        start += step;
    }
    out
}

/// The panel's own windows, or sliding windows sized by the range window.
pub fn windows_for(panel: &Panel, cfg: &Config) -> Vec<EvalWindow> {
    if !panel.windows.is_empty() {
        return panel.windows.clone();
    }
    let n = Config::count(cfg.range_window);
    sliding_windows(panel.candles.len(), n, n, n)
}

/// Evaluate the selected hypotheses over every window, window-major.
pub fn evaluate_panel(panel: &Panel, windows: &[EvalWindow], which: &[Hypothesis], cfg: &Config) -> Vec<Verdict> {
    let ctx = Context::new(panel, cfg);
    let mut out = Vec::with_capacity(windows.len() * which.len());
    for w in windows {
        let range = window_range(panel, w, cfg);
        for &h in which {
            out.push(evaluate(h, &ctx, w, range.as_ref(), cfg));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Candle4H, OpenInterestRecord};
    use alloc::vec;

    fn flat_panel(n: usize) -> Panel {
        let mut p = Panel::new("T");
        for i in 0..n {
            // Triangle wave between 95 and 105, period 12.
            let ph = (i % 12) as f64;
            let c = if ph < 6.0 { 95.0 + ph * 10.0 / 6.0 } else { 105.0 - (ph - 6.0) * 10.0 / 6.0 };
            let t = i as i64 * BAR_SECONDS;
            p.candles.push(Candle4H {
                open_time: t,
                open: c,
                high: c + 0.2,
                low: c - 0.2,
                close: c,
                volume: 1.0,
                exchange_count: 1,
            });
            p.oi.push(OpenInterestRecord::new(t, 1e9));
        }
        p
    }

    #[test]
    fn op_semantics() {
        assert!(Op::Gt.holds(1.0, 0.5) && !Op::Gt.holds(0.5, 0.5));
        assert!(Op::Ge.holds(0.5, 0.5));
        assert!(Op::Le.holds(0.5, 0.5) && !Op::Lt.holds(0.5, 0.5));
        let s = Signal::check("x", None, Op::Lt, 0.0);
        assert_eq!(s.status, SignalStatus::Unmet);
    }

    #[test]
    fn short_history_is_not_evaluable() {
        let p = flat_panel(60);
        let cfg = Config::default();
        let w = EvalWindow { label: "w".into(), start: 30, end: 60 };
        let v = evaluate_panel(&p, &[w], &[Hypothesis::H1], &cfg);
        assert_eq!(v[0].outcome, Outcome::NotEvaluable);
        assert!(v[0].range.is_some());
        assert!(!v[0].condition_met);
    }

    #[test]
    fn no_spike_no_cluster() {
        let p = flat_panel(90);
        let cfg = Config::default();
        let w = EvalWindow { label: "w".into(), start: 60, end: 90 };
        let v = evaluate_panel(&p, &[w], &Hypothesis::ALL, &cfg);
        assert!(v.iter().all(|v| v.outcome == Outcome::NotEvaluable));
    }

    #[test]
    fn sliding_window_layout() {
        let w = sliding_windows(100, 30, 30, 30);
        assert_eq!(w.iter().map(|w| (w.start, w.end)).collect::<Vec<_>>(), vec![(30, 60), (60, 90)]);
        assert!(sliding_windows(10, 30, 30, 30).is_empty());
    }
}
