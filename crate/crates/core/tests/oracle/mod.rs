//! Brute-force reference implementations and randomized comparison runs.
//!
//! Each oracle is written from the definition rather than from the
//! optimized code: nested loops, explicit integrals, closed-form sums.
//! The `check_*` functions return the worst relative error seen, or a
//! description of the first mismatch.

#![allow(dead_code)]

use std::collections::BTreeMap;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rangegov_core::ingest::{align_4h, vwap_merge, RawTick};
use rangegov_core::liquidity::{depth_percentiles, fill_slippage, impact_at, OrderSide};
use rangegov_core::positioning::{concentration_gini, liquidation_density, Kernel};
use rangegov_core::quality::run_pipeline;
use rangegov_core::structural::{map_swings, volume_nodes, SwingKind};
use rangegov_core::synth::{generate, hypothesis_suite, regime_suite};
use rangegov_core::{BookLevel, BookSnapshot, Candle4H, Config, LiquidationEvent, LiquidationSide, Panel, BAR_SECONDS};

pub const TOL: f64 = 1e-9;
pub const INSTANCES: usize = 200;

pub struct Rng(ChaCha8Rng);

impl Rng {
    pub fn new(seed: u64) -> Rng {
        Rng(ChaCha8Rng::seed_from_u64(seed))
    }

    /// Uniform in [0, 1).
    pub fn f(&mut self) -> f64 {
        (self.0.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    pub fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.f()
    }

    pub fn below(&mut self, n: usize) -> usize {
        (self.0.next_u64() % n as u64) as usize
    }
}

/// `|a - b| / max(|a|, |b|, floor)`.
pub fn rel(a: f64, b: f64, floor: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(floor)
}

/// Tracks the worst error over a run and fails on the first one above tolerance.
pub struct Worst {
    pub name: &'static str,
    pub tol: f64,
    pub max: f64,
    pub instances: usize,
}

impl Worst {
    pub fn new(name: &'static str, tol: f64) -> Worst {
        Worst { name, tol, max: 0.0, instances: 0 }
    }

    pub fn see(&mut self, err: f64, what: impl FnOnce() -> String) -> Result<(), String> {
        if !(err <= self.tol) {
            return Err(format!("{}: error {err:e} > {:e} at {}", self.name, self.tol, what()));
        }
        self.max = self.max.max(err);
        Ok(())
    }
}

pub fn random_candles(r: &mut Rng, n: usize) -> Vec<Candle4H> {
    let mut price = r.range(0.5, 50_000.0);
    (0..n)
        .map(|i| {
            let open = price;
            let close = open * (1.0 + r.range(-0.03, 0.03));
            let high = open.max(close) * (1.0 + r.range(0.0, 0.01));
            let low = open.min(close) * (1.0 - r.range(0.0, 0.01));
            price = close;
            Candle4H {
                open_time: 1_609_459_200 + i as i64 * BAR_SECONDS,
                open,
                high,
                low,
                close,
                volume: if r.f() < 0.05 { 0.0 } else { r.range(0.0, 1e4) },
                exchange_count: 1,
            }
        })
        .collect()
}

pub fn random_book(r: &mut Rng) -> BookSnapshot {
    let mid = r.range(1.0, 50_000.0);
    let gap = mid * r.range(1e-5, 1e-3);
    let levels = 5 + r.below(40);
    let mut side = |sign: f64| {
        let mut p = mid + sign * gap;
        (0..levels)
            .map(|_| {
                let l = BookLevel::new(p, r.range(0.001, 50.0) * 30_000.0 / mid);
                p += sign * mid * r.range(1e-5, 2e-3);
                l
            })
            .collect::<Vec<_>>()
    };
    let bids = side(-1.0);
    let asks = side(1.0);
    BookSnapshot { time: 0, bids, asks }
}

pub fn random_events(r: &mut Rng) -> Vec<LiquidationEvent> {
    let centre = r.range(1.0, 60_000.0);
    let n = 1 + r.below(60);
    (0..n)
        .map(|k| LiquidationEvent {
            time: k as i64,
            price: centre * (1.0 + r.range(-0.05, 0.05)),
            size_usd: r.range(1e3, 5e6),
            side: if r.f() < 0.5 { LiquidationSide::LongLiquidated } else { LiquidationSide::ShortLiquidated },
        })
        .collect()
}

// ---- oracles ----

fn oracle_align(ticks: &[RawTick]) -> Vec<Candle4H> {
    let mut buckets: BTreeMap<i64, Vec<&RawTick>> = BTreeMap::new();
    for t in ticks {
        buckets.entry(t.time.div_euclid(BAR_SECONDS) * BAR_SECONDS).or_default().push(t);
    }
    buckets
        .into_iter()
        .map(|(start, ts)| Candle4H {
            open_time: start,
            open: ts[0].price,
            high: ts.iter().map(|t| t.price).fold(f64::MIN, f64::max),
            low: ts.iter().map(|t| t.price).fold(f64::MAX, f64::min),
            close: ts[ts.len() - 1].price,
            volume: ts.iter().map(|t| t.volume).sum(),
            exchange_count: 1,
        })
        .collect()
}

fn oracle_vwap(series: &[Vec<Candle4H>], i: usize, f: fn(&Candle4H) -> f64) -> f64 {
    let v: f64 = series.iter().map(|s| s[i].volume).sum();
    if v > 0.0 {
        series.iter().map(|s| s[i].volume * f(&s[i])).sum::<f64>() / v
    } else {
        series.iter().map(|s| f(&s[i])).sum::<f64>() / series.len() as f64
    }
}

fn oracle_swings(c: &[Candle4H], k: usize) -> Vec<(usize, SwingKind, f64)> {
    let mut out = Vec::new();
    for i in k..c.len() - k {
        let before_h = (i - k..i).all(|j| c[i].high > c[j].high);
        let after_h = (i + 1..=i + k).all(|j| c[i].high >= c[j].high);
        if before_h && after_h {
            out.push((i, SwingKind::High, c[i].high));
        }
        let before_l = (i - k..i).all(|j| c[i].low < c[j].low);
        let after_l = (i + 1..=i + k).all(|j| c[i].low <= c[j].low);
        if before_l && after_l {
            out.push((i, SwingKind::Low, c[i].low));
        }
    }
    out
}

fn median(xs: &[f64]) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

/// Volume in `[a, b)` when each bar spreads its volume uniformly over
/// `[low, high]` (a flat bar puts it all at its price).
fn oracle_bin_volume(c: &[Candle4H], a: f64, b: f64) -> f64 {
    c.iter()
        .map(|c| {
            let span = c.high - c.low;
            if span > 0.0 {
                c.volume * (c.high.min(b) - c.low.max(a)).max(0.0) / span
            } else if c.low >= a && c.low < b {
                c.volume
            } else {
                0.0
            }
        })
        .sum()
}

fn oracle_kde(events: &[LiquidationEvent], x: f64, frac: f64, kernel: Kernel) -> f64 {
    let w: f64 = events.iter().map(|e| e.size_usd).sum();
    let mean = events.iter().map(|e| e.price * e.size_usd).sum::<f64>() / w;
    let h = frac * mean;
    let k = |u: f64| match kernel {
        Kernel::Gaussian => (-u * u / 2.0).exp() / (2.0 * std::f64::consts::PI).sqrt(),
        Kernel::Epanechnikov => {
            if u.abs() <= 1.0 {
                0.75 * (1.0 - u * u)
            } else {
                0.0
            }
        }
    };
    events.iter().map(|e| e.size_usd * k((x - e.price) / h)).sum::<f64>() / (w * h)
}

/// Mean absolute difference form of the Gini coefficient.
fn oracle_gini(x: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let mut s = 0.0;
    for a in x {
        for b in x {
            s += (a - b).abs();
        }
    }
    s / (2.0 * n * n * mean)
}

/// First price whose cumulative size share reaches `q`, by rescanning the
/// prefix for every level.
fn oracle_depth_pct(levels: &[BookLevel], q: f64) -> f64 {
    let total: f64 = levels.iter().map(|l| l.size).sum();
    for j in 0..levels.len() {
        let cum: f64 = levels[..=j].iter().map(|l| l.size).sum();
        if cum / total >= q {
            return levels[j].price;
        }
    }
    levels[levels.len() - 1].price
}

/// Slippage from the piecewise-linear cost curve: full levels up to the one
/// where cumulative notional crosses `usd`, plus a partial fill there.
fn oracle_slippage(book: &BookSnapshot, usd: f64, side: OrderSide) -> f64 {
    let mid = (book.bids[0].price + book.asks[0].price) / 2.0;
    let levels = match side {
        OrderSide::Buy => &book.asks,
        OrderSide::Sell => &book.bids,
    };
    let cum: Vec<f64> = levels
        .iter()
        .scan(0.0, |acc, l| {
            *acc += l.price * l.size;
            Some(*acc)
        })
        .collect();
    let total = cum[cum.len() - 1];
    let (qty, filled) = match cum.iter().position(|&c| c >= usd) {
        Some(j) => {
            let before = if j == 0 { 0.0 } else { cum[j - 1] };
            let full: f64 = levels[..j].iter().map(|l| l.size).sum();
            (full + (usd - before) / levels[j].price, usd)
        }
        None => (levels.iter().map(|l| l.size).sum(), total),
    };
    let vwap = filled / qty;
    match side {
        OrderSide::Buy => (vwap - mid) / mid,
        OrderSide::Sell => (mid - vwap) / mid,
    }
}

/// Raw-sums OLS slope of |return| on $M volume.
fn oracle_impact(c: &[Candle4H], end: usize, window: usize) -> Option<f64> {
    let mut sx = 0.0;
    let mut sy = 0.0;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for t in end - window..end {
        let x = c[t].volume * c[t].close / 1e6;
        let y = ((c[t].close - c[t - 1].close) / c[t - 1].close).abs();
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    let n = window as f64;
    let den = n * sxx - sx * sx;
    (den > 1e-9 * n * sxx).then(|| (n * sxy - sx * sy) / den)
}

// ---- comparison runs ----

pub fn check_align_4h(seed: u64) -> Result<Worst, String> {
    let mut w = Worst::new("align_4h", TOL);
    let mut r = Rng::new(seed);
    for case in 0..INSTANCES {
        let mut t = 1_609_459_200 + r.below(20_000) as i64;
        let n = 1 + r.below(300);
        let ticks: Vec<RawTick> = (0..n)
            .map(|_| {
                t += r.below(6000) as i64;
                RawTick { time: t, exchange_id: "x".into(), price: r.range(1.0, 1e5), volume: r.range(0.0, 10.0) }
            })
            .collect();
        let got = align_4h(&ticks).map_err(|e| e.to_string())?;
        let want = oracle_align(&ticks);
        if got.len() != want.len() {
            return Err(format!("align_4h case {case}: {} candles, oracle {}", got.len(), want.len()));
        }
        for (g, o) in got.iter().zip(&want) {
            if g.open_time != o.open_time {
                return Err(format!("align_4h case {case}: bucket {} vs {}", g.open_time, o.open_time));
            }
            let err = [(g.open, o.open), (g.high, o.high), (g.low, o.low), (g.close, o.close), (g.volume, o.volume)]
                .iter()
                .map(|&(a, b)| rel(a, b, 1e-12))
                .fold(0.0, f64::max);
            w.see(err, || format!("case {case} t={}", g.open_time))?;
        }
        w.instances += 1;
    }
    Ok(w)
}

type Field = fn(&Candle4H) -> f64;

pub fn check_vwap_merge(seed: u64) -> Result<Worst, String> {
    let mut w = Worst::new("vwap_merge", TOL);
    let mut r = Rng::new(seed);
    for case in 0..INSTANCES {
        let n = 1 + r.below(50);
        let venues = 1 + r.below(6);
        let base = random_candles(&mut r, n);
        let series: Vec<Vec<Candle4H>> = (0..venues)
            .map(|_| {
                base.iter()
                    .map(|c| {
                        let k = 1.0 + r.range(-0.002, 0.002);
                        Candle4H {
                            open: c.open * k,
                            high: c.high * k,
                            low: c.low * k,
                            close: c.close * k,
                            volume: if r.f() < 0.1 { 0.0 } else { r.range(0.0, 1e3) },
                            ..c.clone()
                        }
                    })
                    .collect()
            })
            .collect();
        let got = vwap_merge(&series).map_err(|e| e.to_string())?;
        for (i, g) in got.iter().enumerate() {
            let fields: [(f64, Field); 4] =
                [(g.open, |c| c.open), (g.high, |c| c.high), (g.low, |c| c.low), (g.close, |c| c.close)];
            let mut err = fields.iter().map(|&(v, f)| rel(v, oracle_vwap(&series, i, f), 1e-12)).fold(0.0, f64::max);
            let vol: f64 = series.iter().map(|s| s[i].volume).sum();
            err = err.max(rel(g.volume, vol, 1e-12));
            w.see(err, || format!("case {case} bar {i}"))?;
        }
        w.instances += 1;
    }
    Ok(w)
}

pub fn check_map_swings(seed: u64) -> Result<Worst, String> {
    let mut w = Worst::new("map_swings", TOL);
    let mut r = Rng::new(seed);
    for case in 0..INSTANCES {
        let k = 1 + r.below(7);
        let n = 2 * k + 1 + r.below(120);
        let mut c = random_candles(&mut r, n);
        // Coarse prices so equal highs and lows actually occur.
        for x in &mut c {
            x.high = (x.high * 20.0).round() / 20.0;
            x.low = (x.low * 20.0).round() / 20.0;
        }
        let got: Vec<(usize, SwingKind, f64)> =
            map_swings(&c, k).map_err(|e| e.to_string())?.iter().map(|s| (s.index, s.kind, s.price)).collect();
        let want = oracle_swings(&c, k);
        if got != want {
            return Err(format!("map_swings case {case} (k={k}): {got:?} vs oracle {want:?}"));
        }
        w.see(0.0, String::new)?;
        w.instances += 1;
    }
    Ok(w)
}

pub fn check_volume_nodes(seed: u64) -> Result<Worst, String> {
    let mut w = Worst::new("volume_nodes", TOL);
    let mut r = Rng::new(seed);
    for case in 0..INSTANCES {
        let n = 1 + r.below(80);
        let mut c = random_candles(&mut r, n);
        if r.f() < 0.3 {
            let i = r.below(c.len());
            let p = c[i].close;
            c[i] = Candle4H { open: p, high: p, low: p, close: p, ..c[i].clone() };
        }
        let frac = r.range(0.001, 0.02);
        let prof = volume_nodes(&c, frac).ok_or("volume_nodes returned None")?;
        let closes: Vec<f64> = c.iter().map(|c| c.close).collect();
        let width = median(&closes) * frac;
        let scale: f64 = c.iter().map(|c| c.volume).sum::<f64>().max(1.0);
        if rel(prof.bin_width, width, 1e-12) > TOL {
            return Err(format!("volume_nodes case {case}: width {} vs {width}", prof.bin_width));
        }
        for b in &prof.bins {
            let want = oracle_bin_volume(&c, b.lower, b.lower + prof.bin_width);
            w.see((b.volume - want).abs() / scale, || format!("case {case} bin {}", b.lower))?;
        }
        w.instances += 1;
    }
    Ok(w)
}

pub const KDE_PROBES: usize = 10;

pub fn check_kde(seed: u64) -> Result<Worst, String> {
    let mut w = Worst::new("liquidation_density", TOL);
    let mut r = Rng::new(seed);
    for case in 0..INSTANCES {
        let events = random_events(&mut r);
        let kernel = if case % 2 == 0 { Kernel::Gaussian } else { Kernel::Epanechnikov };
        let frac = r.range(0.002, 0.03);
        let centre = events[0].price;
        let probes: Vec<f64> = (0..KDE_PROBES).map(|_| centre * (1.0 + r.range(-0.08, 0.08))).collect();
        let d = liquidation_density(&events, Some(&probes), frac, kernel);
        let peak = d.grid.iter().map(|g| g.1).fold(0.0, f64::max).max(1e-300);
        for &(x, got) in &d.grid {
            let want = oracle_kde(&events, x, frac, kernel);
            w.see((got - want).abs() / peak.max(want), || format!("case {case} x={x}"))?;
        }
        w.instances += 1;
    }
    Ok(w)
}

/// Trapezoid integral of the default-grid density for random event sets.
pub fn check_kde_integral(seed: u64) -> Result<Worst, String> {
    let mut w = Worst::new("density integral", 1e-3);
    let mut r = Rng::new(seed);
    for case in 0..INSTANCES {
        let events = random_events(&mut r);
        let kernel = if case % 2 == 0 { Kernel::Gaussian } else { Kernel::Epanechnikov };
        let d = liquidation_density(&events, None, r.range(0.002, 0.03), kernel);
        let i = d.integral();
        w.see((i - 1.0).abs(), || format!("case {case} ({kernel:?}) integral {i}"))?;
        w.instances += 1;
    }
    Ok(w)
}

pub fn check_gini(seed: u64) -> Result<Worst, String> {
    let mut w = Worst::new("concentration_gini", TOL);
    let mut r = Rng::new(seed);
    for case in 0..INSTANCES {
        let n = 1 + r.below(100);
        let mut x: Vec<f64> = (0..n).map(|_| r.f().powi(1 + r.below(4) as i32)).collect();
        if r.f() < 0.2 {
            x[0] = 0.0;
        }
        if x.iter().sum::<f64>() == 0.0 {
            x[0] = 1.0;
        }
        let got = concentration_gini(&x, 0.7).ok_or("gini returned None")?.gini;
        w.see((got - oracle_gini(&x)).abs(), || format!("case {case} n={n}"))?;
        w.instances += 1;
    }
    Ok(w)
}

pub fn check_depth_percentiles(seed: u64) -> Result<Worst, String> {
    let mut w = Worst::new("depth_percentiles", TOL);
    let mut r = Rng::new(seed);
    for case in 0..INSTANCES {
        let b = random_book(&mut r);
        let (bid, ask) = depth_percentiles(&b).ok_or("depth_percentiles returned None")?;
        let pairs = [
            (bid.p25, oracle_depth_pct(&b.bids, 0.25)),
            (bid.p75, oracle_depth_pct(&b.bids, 0.75)),
            (ask.p25, oracle_depth_pct(&b.asks, 0.25)),
            (ask.p75, oracle_depth_pct(&b.asks, 0.75)),
        ];
        let err = pairs.iter().map(|&(a, o)| rel(a, o, 1e-12)).fold(0.0, f64::max);
        w.see(err, || format!("case {case}"))?;
        w.instances += 1;
    }
    Ok(w)
}

pub fn check_fill_slippage(seed: u64) -> Result<Worst, String> {
    let mut w = Worst::new("fill_slippage", TOL);
    let mut r = Rng::new(seed);
    for case in 0..INSTANCES {
        let b = random_book(&mut r);
        let usd = 10f64.powf(r.range(3.0, 7.5));
        for side in [OrderSide::Buy, OrderSide::Sell] {
            let got = fill_slippage(&b, usd, side).ok_or("fill_slippage returned None")?.slippage;
            let want = oracle_slippage(&b, usd, side);
            // Relative to the fill distance, floored at one part in a million of mid.
            w.see((got - want).abs() / want.abs().max(1e-6), || format!("case {case} {side:?} ${usd:.0}"))?;
        }
        w.instances += 1;
    }
    Ok(w)
}

pub fn check_impact(seed: u64) -> Result<Worst, String> {
    let mut w = Worst::new("impact regression", TOL);
    let mut r = Rng::new(seed);
    let mut case = 0;
    while w.instances < INSTANCES {
        case += 1;
        let window = 3 + r.below(30);
        let n = window + 1 + r.below(20);
        let c = random_candles(&mut r, n);
        let end = window + 1 + r.below(c.len() - window);
        let got = impact_at(&c, end, window).map(|o| o.slope);
        let Some(want) = oracle_impact(&c, end, window) else {
            continue;
        };
        let got = got.ok_or_else(|| format!("impact case {case}: no fit where the oracle has one"))?;
        w.see(rel(got, want, 1e-12), || format!("case {case} window={window} end={end}"))?;
        w.instances += 1;
    }
    Ok(w)
}

pub fn check_volume_conservation(seed: u64) -> Result<Worst, String> {
    let mut w = Worst::new("volume conservation", TOL);
    let mut r = Rng::new(seed);
    for case in 0..INSTANCES {
        let n = 1 + r.below(200);
        let c = random_candles(&mut r, n);
        let prof = volume_nodes(&c, r.range(0.001, 0.02)).ok_or("volume_nodes returned None")?;
        let total: f64 = c.iter().map(|c| c.volume).sum();
        w.see(rel(prof.total(), total, 1e-12), || format!("case {case}"))?;
        w.instances += 1;
    }
    Ok(w)
}

/// A generated panel, cut short and damaged: single and multi-bar gaps and
/// books with spreads wide enough to be dropped.
pub fn random_panel(r: &mut Rng) -> Panel {
    let suites: Vec<_> =
        hypothesis_suite(r.below(1000) as u64).into_iter().chain(regime_suite(r.below(1000) as u64)).collect();
    let (mut p, _) = generate(&suites[r.below(suites.len())]).expect("builtin scenario generates");
    let keep = 80 + r.below(120);
    p.candles.truncate(keep);
    if let Some(end) = p.end_time() {
        p.funding.retain(|f| f.settle_time < end);
        p.oi.retain(|o| o.time < end);
        p.books.retain(|b| b.time < end);
        p.liquidations.retain(|e| e.time < end);
    }
    for _ in 0..r.below(4) {
        let i = 1 + r.below(p.candles.len() - 2);
        let n = 1 + r.below(3);
        p.candles.drain(i..(i + n).min(p.candles.len() - 1));
    }
    for _ in 0..r.below(4) {
        let i = r.below(p.books.len());
        let bid = p.books[i].bids[0].price;
        for l in &mut p.books[i].asks {
            l.price += bid * 0.05;
        }
    }
    p
}

pub const PANELS: usize = 50;

/// Running the pipeline on its own output changes nothing.
pub fn check_pipeline_idempotent(seed: u64) -> Result<Worst, String> {
    let cfg = Config::default();
    let mut w = Worst::new("quality idempotence", 0.0);
    let mut r = Rng::new(seed);
    for case in 0..PANELS {
        let p = random_panel(&mut r);
        let (once, _) = run_pipeline(&p, &[], &cfg);
        let (twice, _) = run_pipeline(&once, &[], &cfg);
        if once != twice {
            return Err(format!("quality idempotence: panel {case} changed on the second pass"));
        }
        w.instances += 1;
    }
    Ok(w)
}
