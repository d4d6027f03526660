//! Order-book capacity: depth percentiles, shelf migration, depth at the
//! range extremes, fill slippage, imbalance, spread and price impact.
//!
//! Depth shares and imbalance use base-asset size; depth at extremes is in
//! USD notional.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::model::{BookLevel, BookSnapshot, Candle4H, RangeDefinition};
use crate::stats;
use crate::structural::Boundary;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BookSide {
    Bid,
    Ask,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DepthProfile {
    pub side: BookSide,
    /// `(price, cumulative size)` from the best price outward.
    pub cumulative: Vec<(f64, f64)>,
    pub p25: f64,
    pub p75: f64,
}

fn profile(side: BookSide, levels: &[BookLevel]) -> Option<DepthProfile> {
    let mut acc = 0.0;
    let cumulative: Vec<(f64, f64)> = levels
        .iter()
        .map(|l| {
            acc += l.size;
            (l.price, acc)
        })
        .collect();
    if !(acc > 0.0) {
        return None;
    }
    let at = |q: f64| {
        cumulative.iter().find(|(_, c)| *c / acc >= q).map(|(p, _)| *p).unwrap_or(cumulative[cumulative.len() - 1].0)
    };
    Some(DepthProfile { side, p25: at(0.25), p75: at(0.75), cumulative })
}

pub fn depth_percentiles(book: &BookSnapshot) -> Option<(DepthProfile, DepthProfile)> {
    Some((profile(BookSide::Bid, &book.bids)?, profile(BookSide::Ask, &book.asks)?))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShelfMigration {
    pub share: f64,
    pub expansion: bool,
}

/// Share of one side's size resting beyond the prior boundary: asks above
/// the upper boundary for an upside break, bids below the lower one for a
/// downside break.
pub fn shelf_migration(
    book: &BookSnapshot,
    prior: &RangeDefinition,
    direction: Boundary,
    min_share: f64,
) -> ShelfMigration {
    let (levels, beyond): (&[BookLevel], &dyn Fn(f64) -> bool) = match direction {
        Boundary::Upper => (&book.asks, &|p| p > prior.upper),
        Boundary::Lower => (&book.bids, &|p| p < prior.lower),
    };
    let total: f64 = levels.iter().map(|l| l.size).sum();
    let share =
        if total > 0.0 { levels.iter().filter(|l| beyond(l.price)).map(|l| l.size).sum::<f64>() / total } else { 0.0 };
    ShelfMigration { share, expansion: share > min_share }
}

// Relative slack so a level quoted at exactly `b * (1 + zone)` is inside.
fn within(price: f64, boundary: f64, zone: f64) -> bool {
    (price - boundary).abs() <= zone * boundary * (1.0 + 1e-9)
}

/// USD notional, both sides, within `zone` of the boundary
/// (`[b * (1 - zone), b * (1 + zone)]`, inclusive).
pub fn depth_near(book: &BookSnapshot, boundary: f64, zone: f64) -> f64 {
    book.bids.iter().chain(&book.asks).filter(|l| within(l.price, boundary, zone)).map(BookLevel::notional).sum()
}

/// Combined depth within `zone` of either boundary. Levels inside both
/// zones (very narrow ranges) are counted once.
pub fn depth_at_extremes(book: &BookSnapshot, range: &RangeDefinition, zone: f64) -> f64 {
    book.bids
        .iter()
        .chain(&book.asks)
        .filter(|l| within(l.price, range.lower, zone) || within(l.price, range.upper, zone))
        .map(BookLevel::notional)
        .sum()
}

/// Level and OLS trend of depth near one boundary across `books`.
pub fn depth_trend(books: &[&BookSnapshot], boundary: f64, zone: f64) -> (Option<f64>, Option<f64>) {
    let series: Vec<f64> = books.iter().map(|b| depth_near(b, boundary, zone)).collect();
    (series.last().copied(), stats::trend_slope(&series))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OrderSide {
    Buy,
    Sell,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Slippage {
    /// Adverse distance of the fill VWAP from mid, as a fraction of mid.
    pub slippage: f64,
    pub filled_usd: f64,
    /// The side ran out before the order filled; `slippage` is for the
    /// partial fill.
    pub insufficient_depth: bool,
}

/// Walk the opposite side from the best price until `order_usd` of notional
/// is filled.
pub fn fill_slippage(book: &BookSnapshot, order_usd: f64, side: OrderSide) -> Option<Slippage> {
    let mid = book.mid()?;
    let levels = match side {
        OrderSide::Buy => &book.asks,
        OrderSide::Sell => &book.bids,
    };
    let mut remaining = order_usd;
    let mut qty = 0.0;
    let mut usd = 0.0;
    for l in levels {
        if remaining <= 0.0 {
            break;
        }
        let take = l.notional().min(remaining);
        usd += take;
        qty += take / l.price;
        remaining -= take;
    }
    if !(qty > 0.0) {
        return None;
    }
    let vwap = usd / qty;
    let slippage = match side {
        OrderSide::Buy => (vwap - mid) / mid,
        OrderSide::Sell => (mid - vwap) / mid,
    };
    Some(Slippage { slippage, filled_usd: usd, insufficient_depth: remaining > 1e-9 * order_usd })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Imbalance {
    pub value: f64,
    pub extreme: bool,
}

/// `bid_depth / ask_depth - 1` over the top `levels` of each side. The
/// extreme flag compares the larger side against the smaller so that
/// swapping sides does not change it.
pub fn book_imbalance(book: &BookSnapshot, levels: usize, extreme: f64) -> Option<Imbalance> {
    let bid: f64 = book.bids.iter().take(levels).map(|l| l.size).sum();
    let ask: f64 = book.asks.iter().take(levels).map(|l| l.size).sum();
    if !(bid > 0.0 && ask > 0.0) {
        return None;
    }
    Some(Imbalance { value: bid / ask - 1.0, extreme: bid.max(ask) / bid.min(ask) - 1.0 > extreme })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Spread {
    pub value: f64,
    pub uncertain: bool,
}

pub fn spread(book: &BookSnapshot, uncertainty: f64) -> Option<Spread> {
    let (b, a) = (book.best_bid()?, book.best_ask()?);
    if b >= a {
        return None;
    }
    let value = (a - b) / ((a + b) / 2.0);
    Some(Spread { value, uncertain: value > uncertainty })
}

/// OLS fit of `|dp|/p` on traded volume.
pub fn market_impact_coefficient(volume: &[f64], abs_return: &[f64]) -> Option<stats::Ols> {
    stats::ols(volume, abs_return)
}

/// Impact regression over the `window` bars ending at `end` (exclusive).
/// Volume is expressed in millions of USD (`volume * close / 1e6`).
pub fn impact_at(candles: &[Candle4H], end: usize, window: usize) -> Option<stats::Ols> {
    if end > candles.len() || end < window + 1 || window < 2 {
        return None;
    }
    let (x, y): (Vec<f64>, Vec<f64>) = (end - window..end)
        .map(|t| {
            let c = &candles[t];
            let prev = candles[t - 1].close;
            (c.volume * c.close / 1e6, ((c.close - prev) / prev).abs())
        })
        .unzip();
    market_impact_coefficient(&x, &y)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn book(bids: &[(f64, f64)], asks: &[(f64, f64)]) -> BookSnapshot {
        BookSnapshot {
            time: 0,
            bids: bids.iter().map(|&(p, s)| BookLevel::new(p, s)).collect(),
            asks: asks.iter().map(|&(p, s)| BookLevel::new(p, s)).collect(),
        }
    }

    #[test]
    fn quartiles_of_uniform_book() {
        let b = book(&[(99.0, 1.0), (98.0, 1.0), (97.0, 1.0), (96.0, 1.0)], &[(101.0, 5.0)]);
        let (bid, ask) = depth_percentiles(&b).unwrap();
        assert_eq!((bid.p25, bid.p75), (99.0, 97.0));
        assert_eq!((ask.p25, ask.p75), (101.0, 101.0));
    }

    #[test]
    fn shelf_share_is_strict() {
        let r = RangeDefinition::new(90.0, 100.0, 0, 2, 2).unwrap();
        let b = book(&[(95.0, 1.0)], &[(99.0, 3.0), (101.0, 1.0)]);
        let m = shelf_migration(&b, &r, Boundary::Upper, 0.20);
        assert_eq!(m.share, 0.25);
        assert!(m.expansion);
        let b = book(&[(95.0, 1.0)], &[(99.0, 4.0), (101.0, 1.0)]);
        let m = shelf_migration(&b, &r, Boundary::Upper, 0.20);
        assert_eq!(m.share, 0.20);
        assert!(!m.expansion);
        let b = book(&[(95.0, 1.0)], &[(99.0, 4.0)]);
        assert_eq!(shelf_migration(&b, &r, Boundary::Upper, 0.20).share, 0.0);
    }

    #[test]
    fn extremes_zone_is_inclusive() {
        let r = RangeDefinition::new(1000.0, 1200.0, 0, 2, 2).unwrap();
        let b = book(&[(1005.0, 10.0), (950.0, 3.0)], &[(1100.0, 1.0)]);
        assert_eq!(depth_at_extremes(&b, &r, 0.005), 10_050.0);
        let empty = book(&[(1100.0, 1.0)], &[(1101.0, 1.0)]);
        assert_eq!(depth_at_extremes(&empty, &r, 0.005), 0.0);
    }

    #[test]
    fn single_level_slippage() {
        let b = book(&[(99.95, 1e9)], &[(100.05, 1e9)]);
        let s = fill_slippage(&b, 1e6, OrderSide::Buy).unwrap();
        assert!((s.slippage - 0.0005).abs() < 1e-12);
        assert!(!s.insufficient_depth);
    }

    #[test]
    fn two_level_walk() {
        let b = book(&[(99.0, 100.0)], &[(101.0, 5000.0), (102.0, 10000.0)]);
        let s = fill_slippage(&b, 1e6, OrderSide::Buy).unwrap();
        // 505000 at 101, 495000 at 102.
        let qty = 505_000.0 / 101.0 + 495_000.0 / 102.0;
        let vwap = 1e6 / qty;
        assert!((s.slippage - (vwap - 100.0) / 100.0).abs() < 1e-12);
        let thin = fill_slippage(&book(&[(99.0, 1.0)], &[(101.0, 1.0)]), 1e6, OrderSide::Buy).unwrap();
        assert!(thin.insufficient_depth);
        assert_eq!(thin.filled_usd, 101.0);
    }

    #[test]
    fn imbalance_cases() {
        let i = book_imbalance(&book(&[(99.0, 150.0)], &[(101.0, 100.0)]), 20, 0.3).unwrap();
        assert_eq!(i, Imbalance { value: 0.5, extreme: true });
        let i = book_imbalance(&book(&[(99.0, 120.0)], &[(101.0, 100.0)]), 20, 0.3).unwrap();
        assert!((i.value - 0.2).abs() < 1e-12 && !i.extreme);
        assert_eq!(book_imbalance(&book(&[(99.0, 1.0)], &[(101.0, 1.0)]), 20, 0.3).unwrap().value, 0.0);
    }

    #[test]
    fn spread_flag_is_strict() {
        let s = spread(&book(&[(99.95, 1.0)], &[(100.05, 1.0)]), 0.001).unwrap();
        assert!((s.value - 0.001).abs() < 1e-12);
        assert_eq!(s.uncertain, s.value > 0.001);
        assert!(spread(&book(&[(99.0, 1.0)], &[(101.0, 1.0)]), 0.001).unwrap().uncertain);
        assert!(spread(&book(&[(100.0, 1.0)], &[(100.0, 1.0)]), 0.001).is_none());
    }

    #[test]
    fn impact_recovers_linear_slope() {
        let v = [1.0, 2.0, 3.0, 5.0, 8.0, 13.0];
        let y: Vec<f64> = v.iter().map(|x| 0.0005 * x).collect();
        let fit = market_impact_coefficient(&v, &y).unwrap();
        assert!((fit.slope - 0.0005).abs() / 0.0005 < 1e-9);
        assert!((fit.r_squared - 1.0).abs() < 1e-9);
        assert!(market_impact_coefficient(&[4.0; 6], &y).is_none());
    }

    fn arb_book() -> impl proptest::strategy::Strategy<Value = BookSnapshot> {
        use proptest::prelude::*;
        (
            90.0f64..110.0,
            1e-4f64..0.01,
            proptest::collection::vec((1e-4f64..0.01, 0.1f64..50.0), 1..30),
            proptest::collection::vec((1e-4f64..0.01, 0.1f64..50.0), 1..30),
        )
            .prop_map(|(mid, half, bids, asks)| {
                let mut p = mid * (1.0 - half);
                let bids = bids
                    .into_iter()
                    .map(|(g, s)| {
                        let l = BookLevel::new(p, s);
                        p *= 1.0 - g;
                        l
                    })
                    .collect();
                let mut p = mid * (1.0 + half);
                let asks = asks
                    .into_iter()
                    .map(|(g, s)| {
                        let l = BookLevel::new(p, s);
                        p *= 1.0 + g;
                        l
                    })
                    .collect();
                BookSnapshot { time: 0, bids, asks }
            })
    }

    proptest::proptest! {
        #[test]
        fn slippage_bounds(b in arb_book(), a in 1.0f64..1e5, extra in 0.0f64..1e5) {
            let mid = b.mid().unwrap();
            let half = (b.best_ask().unwrap() - mid) / mid;
            let small = fill_slippage(&b, a, OrderSide::Buy).unwrap();
            let large = fill_slippage(&b, a + extra, OrderSide::Buy).unwrap();
            proptest::prop_assert!(small.slippage >= half - 1e-12);
            proptest::prop_assert!(large.slippage >= small.slippage - 1e-12);
        }

        #[test]
        fn imbalance_flag_symmetric(b in arb_book()) {
            let swapped = BookSnapshot { time: 0, bids: b.asks.clone(), asks: b.bids.clone() };
            let x = book_imbalance(&b, 20, 0.3).unwrap();
            let y = book_imbalance(&swapped, 20, 0.3).unwrap();
            proptest::prop_assert_eq!(x.extreme, y.extreme);
        }

        #[test]
        fn percentiles_match_prefix_oracle(b in arb_book()) {
            let (bid, ask) = depth_percentiles(&b).unwrap();
            for (levels, prof) in [(&b.bids, &bid), (&b.asks, &ask)] {
                let total: f64 = levels.iter().map(|l| l.size).sum();
                let find = |q: f64| {
                    for i in 0..levels.len() {
                        let prefix: f64 = levels[..=i].iter().map(|l| l.size).sum();
                        if prefix / total >= q { return levels[i].price; }
                    }
                    levels[levels.len() - 1].price
                };
                let best = levels[0].price;
                proptest::prop_assert!((prof.p25 - best).abs() <= (prof.p75 - best).abs());
                proptest::prop_assert_eq!(prof.p25, find(0.25));
                proptest::prop_assert_eq!(prof.p75, find(0.75));
            }
        }

        #[test]
        fn extremes_match_filter_oracle(b in arb_book(), lo in 95.0f64..99.0, w in 2.0f64..10.0) {
            let r = RangeDefinition::new(lo, lo + w, 0, 2, 2).unwrap();
            let mut oracle = 0.0;
            for l in b.bids.iter().chain(&b.asks) {
                let dl = (l.price - r.lower).abs() <= r.lower * 0.005 + 1e-12;
                let du = (l.price - r.upper).abs() <= r.upper * 0.005 + 1e-12;
                if dl || du { oracle += l.price * l.size; }
            }
            let got = depth_at_extremes(&b, &r, 0.005);
            proptest::prop_assert!((got - oracle).abs() <= 1e-9 * oracle.max(1.0));
        }
    }
}
