//! Positioning metrics: open-interest rotation, liquidation density,
//! boundary clustering, long/short ratio and holder concentration.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::config::Config;
use crate::model::{LeverageBucket, LiquidationEvent, RangeDefinition};

/// `(oi_t / oi_{t-1} - 1) / max(vol_t, floor)`. `None` at `t = 0`, where the
/// previous OI is zero, or where volatility is missing.
pub fn oi_rotation(oi: &[f64], volatility: &[Option<f64>], vol_floor: f64) -> Vec<Option<f64>> {
    (0..oi.len())
        .map(|t| {
            if t == 0 || oi[t - 1] == 0.0 {
                return None;
            }
            let vol = (*volatility.get(t)?)?;
            Some((oi[t] - oi[t - 1]) / oi[t - 1] / vol.max(vol_floor))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OiEvent {
    Rotation,
    Collapse,
    Neither,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OiClassification {
    pub event: OiEvent,
    /// Largest decline from the window's first value, as a fraction.
    pub decline: f64,
    /// Absolute change in long share between the window ends.
    pub mix_shift: Option<f64>,
    /// No long/short split: only collapse vs not-collapse is decidable.
    pub partial: bool,
}

/// Rotation: the long/short mix shifts by at least `min_mix_shift` while
/// total OI never falls more than `max_decline` below its starting level.
/// Collapse: it does fall further than that.
pub fn classify_oi_event(oi: &[f64], long_share: Option<&[f64]>, cfg: &Config) -> Option<OiClassification> {
    let first = *oi.first()?;
    if !(first > 0.0) {
        return None;
    }
    let low = oi.iter().copied().fold(first, f64::min);
    let decline = (first - low) / first;
    let mix_shift = long_share.and_then(|s| Some((s.last()? - s.first()?).abs()));
    let collapse = decline > cfg.oi_rotation_max_decline;
    let event = if collapse {
        OiEvent::Collapse
    } else if mix_shift.is_some_and(|m| m >= cfg.oi_rotation_min_mix_shift) {
        OiEvent::Rotation
    } else {
        OiEvent::Neither
    };
    Some(OiClassification { event, decline, mix_shift, partial: mix_shift.is_none() })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kernel {
    Gaussian,
    Epanechnikov,
}

impl Kernel {
    pub fn from_config(cfg: &Config) -> Kernel {
        if cfg.kde_kernel >= 0.5 {
            Kernel::Epanechnikov
        } else {
            Kernel::Gaussian
        }
    }

    /// Unit-bandwidth kernel value.
    pub fn eval(self, u: f64) -> f64 {
        match self {
            Kernel::Gaussian => libm::exp(-0.5 * u * u) / libm::sqrt(2.0 * core::f64::consts::PI),
            Kernel::Epanechnikov => {
                if u.abs() <= 1.0 {
                    0.75 * (1.0 - u * u)
                } else {
                    0.0
                }
            }
        }
    }

    /// Half-width beyond which the kernel is negligible.
    fn reach(self) -> f64 {
        match self {
            Kernel::Gaussian => 6.0,
            Kernel::Epanechnikov => 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LiquidationDensity {
    /// `(price, density)` samples, ascending in price.
    pub grid: Vec<(f64, f64)>,
    pub bandwidth: f64,
    pub total_usd: f64,
    pub kernel: Kernel,
    /// Set when there were no events to estimate from.
    pub empty: bool,
}

impl LiquidationDensity {
    /// Trapezoidal integral over the grid.
    pub fn integral(&self) -> f64 {
        self.grid.windows(2).map(|w| (w[1].0 - w[0].0) * (w[0].1 + w[1].1) / 2.0).sum()
    }

    /// Price of the highest density sample.
    pub fn peak_price(&self) -> Option<f64> {
        self.grid
            .iter()
            .fold(None, |best: Option<(f64, f64)>, &(p, d)| match best {
                Some((_, bd)) if bd >= d => best,
                _ => Some((p, d)),
            })
            .map(|(p, _)| p)
    }
}

/// Size-weighted kernel density of liquidation prices. Bandwidth is
/// `bandwidth_frac` of the size-weighted mean event price. When `grid` is
/// `None` a grid covering every event plus the kernel reach is used.
pub fn liquidation_density(
    events: &[LiquidationEvent],
    grid: Option<&[f64]>,
    bandwidth_frac: f64,
    kernel: Kernel,
) -> LiquidationDensity {
    let total_usd: f64 = events.iter().map(|e| e.size_usd).sum();
    if events.is_empty() || !(total_usd > 0.0) {
        return LiquidationDensity { grid: Vec::new(), bandwidth: 0.0, total_usd: 0.0, kernel, empty: true };
    }
    let mean_price = events.iter().map(|e| e.price * e.size_usd).sum::<f64>() / total_usd;
    let h = bandwidth_frac * mean_price;
    let points: Vec<f64> = match grid {
        Some(g) => g.to_vec(),
        None => default_grid(events, h, kernel),
    };
    let norm = 1.0 / (total_usd * h);
    let grid = points
        .into_iter()
        .map(|x| {
            let s: f64 = events.iter().map(|e| e.size_usd * kernel.eval((x - e.price) / h)).sum();
            (x, s * norm)
        })
        .collect();
    LiquidationDensity { grid, bandwidth: h, total_usd, kernel, empty: false }
}

fn default_grid(events: &[LiquidationEvent], h: f64, kernel: Kernel) -> Vec<f64> {
    let lo = events.iter().map(|e| e.price).fold(f64::INFINITY, f64::min) - kernel.reach() * h;
    let hi = events.iter().map(|e| e.price).fold(f64::NEG_INFINITY, f64::max) + kernel.reach() * h;
    let step = h / 20.0;
    let n = libm::ceil((hi - lo) / step) as usize;
    (0..=n).map(|i| lo + i as f64 * step).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClusterShare {
    pub share: f64,
    pub clustered: bool,
}

/// USD-weighted share of events within `tolerance` (relative to the event
/// price) of either boundary.
pub fn boundary_cluster_share(
    events: &[LiquidationEvent],
    range: &RangeDefinition,
    tolerance: f64,
    min_share: f64,
) -> ClusterShare {
    let total: f64 = events.iter().map(|e| e.size_usd).sum();
    if !(total > 0.0) {
        return ClusterShare { share: 0.0, clustered: false };
    }
    let near: f64 = events
        .iter()
        .filter(|e| (e.price - range.lower).abs().min((e.price - range.upper).abs()) / e.price <= tolerance)
        .map(|e| e.size_usd)
        .sum();
    let share = near / total;
    ClusterShare { share, clustered: share >= min_share }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LongShortRatio {
    /// `None` when short interest is zero (unbounded ratio).
    pub ratio: Option<f64>,
    pub extreme: bool,
}

pub fn long_short_ratio(long_oi: f64, short_oi: f64, cfg: &Config) -> LongShortRatio {
    if short_oi == 0.0 {
        return LongShortRatio { ratio: None, extreme: true };
    }
    let r = long_oi / short_oi;
    LongShortRatio { ratio: Some(r), extreme: r > cfg.ls_ratio_upper || r < cfg.ls_ratio_lower }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Concentration {
    pub gini: f64,
    pub risk: bool,
}

/// Gini coefficient via the sorted-rank identity
/// `G = 2 * sum(i * x_(i)) / (n * sum(x)) - (n + 1) / n`.
pub fn concentration_gini(shares: &[f64], risk_threshold: f64) -> Option<Concentration> {
    let n = shares.len();
    let total: f64 = shares.iter().sum();
    if n == 0 || !(total > 0.0) {
        return None;
    }
    let mut sorted = shares.to_vec();
    sorted.sort_by(f64::total_cmp);
    let weighted: f64 = sorted.iter().enumerate().map(|(i, x)| (i + 1) as f64 * x).sum();
    let nf = n as f64;
    let gini = (2.0 * weighted / (nf * total) - (nf + 1.0) / nf).max(0.0);
    Some(Concentration { gini, risk: gini > risk_threshold })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LeverageSummary {
    pub total_usd: f64,
    pub mean_leverage: f64,
    pub max_leverage: f64,
    /// Share of notional at 20x or higher.
    pub high_leverage_share: f64,
}

pub fn leverage_summary(histogram: &[LeverageBucket]) -> Option<LeverageSummary> {
    let total: f64 = histogram.iter().map(|b| b.usd).sum();
    if !(total > 0.0) {
        return None;
    }
    Some(LeverageSummary {
        total_usd: total,
        mean_leverage: histogram.iter().map(|b| b.leverage * b.usd).sum::<f64>() / total,
        max_leverage: histogram.iter().filter(|b| b.usd > 0.0).map(|b| b.leverage).fold(0.0, f64::max),
        high_leverage_share: histogram.iter().filter(|b| b.leverage >= 20.0).map(|b| b.usd).sum::<f64>() / total,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::LiquidationSide;
    use alloc::vec;

    fn ev(price: f64, size: f64) -> LiquidationEvent {
        LiquidationEvent { time: 0, price, size_usd: size, side: LiquidationSide::LongLiquidated }
    }

    #[test]
    fn rotation_scores() {
        let vol = vec![Some(0.01); 3];
        assert_eq!(oi_rotation(&[5.0, 5.0, 5.0], &vol, 1e-6), vec![None, Some(0.0), Some(0.0)]);
        let s = oi_rotation(&[100.0, 101.0], &vol, 1e-6);
        assert!((s[1].unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(oi_rotation(&[0.0, 1.0], &vol, 1e-6)[1], None);
    }

    #[test]
    fn oi_event_classes() {
        let cfg = Config::default();
        let r = classify_oi_event(&[100.0, 99.0, 98.0], Some(&[0.55, 0.58, 0.62]), &cfg).unwrap();
        assert_eq!(r.event, OiEvent::Rotation);
        let c = classify_oi_event(&[100.0, 95.0, 92.0], Some(&[0.55, 0.55, 0.55]), &cfg).unwrap();
        assert_eq!(c.event, OiEvent::Collapse);
        let n = classify_oi_event(&[100.0, 100.5, 101.0], Some(&[0.55, 0.55, 0.55]), &cfg).unwrap();
        assert_eq!(n.event, OiEvent::Neither);
        let p = classify_oi_event(&[100.0, 99.0], None, &cfg).unwrap();
        assert!(p.partial);
        assert_eq!(p.event, OiEvent::Neither);
    }

    #[test]
    fn point_mass_density() {
        let d = liquidation_density(&[ev(100.0, 5.0), ev(100.0, 1.0)], None, 0.01, Kernel::Gaussian);
        assert!((d.integral() - 1.0).abs() < 1e-3);
        assert!((d.peak_price().unwrap() - 100.0).abs() <= d.bandwidth / 20.0);
    }

    #[test]
    fn symmetric_bimodal() {
        let d =
            liquidation_density(&[ev(90.0, 1.0), ev(110.0, 1.0)], Some(&[90.0, 100.0, 110.0]), 0.01, Kernel::Gaussian);
        assert!((d.grid[0].1 - d.grid[2].1).abs() < 1e-15);
        assert!(d.grid[1].1 < d.grid[0].1);
    }

    #[test]
    fn empty_density_is_flagged() {
        let d = liquidation_density(&[], None, 0.01, Kernel::Gaussian);
        assert!(d.empty);
        assert!(d.grid.is_empty());
    }

    #[test]
    fn epanechnikov_integrates() {
        let d = liquidation_density(&[ev(100.0, 1.0), ev(103.0, 2.0)], None, 0.01, Kernel::Epanechnikov);
        assert!((d.integral() - 1.0).abs() < 1e-3, "{}", d.integral());
    }

    #[test]
    fn cluster_share_threshold_is_inclusive() {
        let r = RangeDefinition::new(100.0, 120.0, 0, 2, 2).unwrap();
        let mut events = vec![ev(110.0, 60.0), ev(100.5, 40.0)];
        let s = boundary_cluster_share(&events, &r, 0.02, 0.30);
        assert!((s.share - 0.40).abs() < 1e-12);
        assert!(s.clustered);
        events[0].size_usd = 71.0;
        events[1].size_usd = 29.0;
        assert!(!boundary_cluster_share(&events, &r, 0.02, 0.30).clustered);
        let mid = vec![ev(110.0, 1.0); 3];
        assert_eq!(boundary_cluster_share(&mid, &r, 0.02, 0.30).share, 0.0);
    }

    #[test]
    fn ls_ratio_bounds_are_strict() {
        let cfg = Config::default();
        assert_eq!(long_short_ratio(200.0, 100.0, &cfg), LongShortRatio { ratio: Some(2.0), extreme: false });
        assert_eq!(long_short_ratio(100.0, 100.0, &cfg), LongShortRatio { ratio: Some(1.0), extreme: false });
        let r = long_short_ratio(49.0, 100.0, &cfg);
        assert_eq!(r.ratio, Some(0.49));
        assert!(r.extreme);
        assert_eq!(long_short_ratio(1.0, 0.0, &cfg), LongShortRatio { ratio: None, extreme: true });
    }

    #[test]
    fn gini_cases() {
        assert_eq!(concentration_gini(&[0.25; 4], 0.7).unwrap().gini, 0.0);
        let mut one = vec![0.0; 100];
        one[0] = 1.0;
        let g = concentration_gini(&one, 0.7).unwrap();
        assert!((g.gini - 0.99).abs() < 1e-12);
        assert!(g.risk);
        assert!(concentration_gini(&[], 0.7).is_none());
    }

    #[test]
    fn leverage_stats() {
        let h = [LeverageBucket { leverage: 5.0, usd: 300.0 }, LeverageBucket { leverage: 25.0, usd: 100.0 }];
        let s = leverage_summary(&h).unwrap();
        assert_eq!(s.mean_leverage, 10.0);
        assert_eq!(s.high_leverage_share, 0.25);
        assert_eq!(s.max_leverage, 25.0);
    }
}
