//! One namespace for every tunable threshold. Keys are `table-row.parameter`
//! names; defaults are the published values.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

macro_rules! config_table {
    ($( $(#[$doc:meta])* $field:ident : $key:literal = $default:expr ),* $(,)?) => {
        #[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
        pub struct Config {
            $( $(#[$doc])* pub $field: f64, )*
        }

        impl Default for Config {
            fn default() -> Self {
                Config { $( $field: $default, )* }
            }
        }

        impl Config {
            pub const KEYS: &'static [&'static str] = &[$( $key ),*];

            pub fn get(&self, key: &str) -> Option<f64> {
                match key {
                    $( $key => Some(self.$field), )*
                    _ => None,
                }
            }

            fn slot(&mut self, key: &str) -> Option<&mut f64> {
                match key {
                    $( $key => Some(&mut self.$field), )*
                    _ => None,
                }
            }

            pub fn entries(&self) -> Vec<(&'static str, f64)> {
                alloc::vec![$( ($key, self.$field) ),*]
            }
        }
    };
}

config_table! {
    // cost metrics
    funding_elevated: "funding_rate_magnitude.elevated" = 0.0005,
    funding_neutral: "funding_moderation.neutral" = 0.0001,
    funding_bias_min_periods: "funding_bias_duration.min_periods" = 3.0,
    /// 0 = a one-period sign flip resets a run; n > 0 tolerates up to n.
    funding_bias_flip_tolerance: "funding_bias_duration.flip_tolerance" = 0.0,
    annualized_overextension_pct: "annualized_funding_cost.overextension_pct" = 50.0,
    basis_dislocation: "basis_spreads.dislocation" = 0.005,
    cumulative_short_days: "cumulative_funding.short_days" = 7.0,
    cumulative_long_days: "cumulative_funding.long_days" = 30.0,
    spike_sigma: "funding_spike.sigma_multiple" = 2.0,
    spike_lookback: "funding_spike.lookback_periods" = 30.0,
    spike_sigma_floor: "funding_spike.sigma_floor" = 1e-6,

    // structural metrics
    swing_lookback: "swing_mapping.lookback_candles" = 5.0,
    volume_bin_width: "volume_nodes.bin_width" = 0.005,
    absorption_min_usd: "absorption_footprints.min_order_usd" = 500_000.0,
    realized_vol_window: "realized_volatility.window_bars" = 20.0,
    wick_recent_bars: "wick_to_body.recent_bars" = 5.0,
    wick_baseline_bars: "wick_to_body.baseline_bars" = 20.0,
    range_window: "range.window_bars" = 30.0,
    range_min_touches: "range.min_touches" = 2.0,
    range_touch_tolerance: "range.touch_tolerance" = 0.005,
    range_min_width: "range.min_width" = 0.001,
    /// 1 = touches measured on highs/lows, 0 = on closes.
    range_touch_on_extremes: "range.touch_on_extremes" = 1.0,

    // positioning metrics
    kde_bandwidth: "liquidation_density.bandwidth" = 0.01,
    /// 0 = Gaussian, 1 = Epanechnikov.
    kde_kernel: "liquidation_density.kernel" = 0.0,
    ls_ratio_upper: "long_short_ratio.extreme_upper" = 2.0,
    ls_ratio_lower: "long_short_ratio.extreme_lower" = 0.5,
    gini_risk: "position_concentration.gini_risk" = 0.7,
    oi_rotation_max_decline: "oi_rotation.max_decline" = 0.05,
    oi_rotation_min_mix_shift: "oi_rotation.min_mix_shift" = 0.05,
    oi_rotation_vol_floor: "oi_rotation.volatility_floor" = 1e-6,
    cluster_min_share: "liquidation_clustering.min_share" = 0.30,
    cluster_distance: "liquidation_clustering.distance" = 0.02,

    // liquidity metrics
    shelf_min_share: "shelf_migration.min_share" = 0.20,
    depth_zone: "depth_at_extremes.zone" = 0.005,
    depth_trend_snapshots: "depth_at_extremes.trend_snapshots" = 20.0,
    slippage_order_usd: "fill_slippage.order_usd" = 1_000_000.0,
    imbalance_extreme: "order_book_imbalance.extreme" = 0.3,
    imbalance_levels: "order_book_imbalance.levels" = 20.0,
    spread_uncertainty: "bid_ask_spread.uncertainty" = 0.001,
    impact_window_bars: "market_impact_coefficient.window_bars" = 6.0,

    // hypothesis engine
    elevated_oi_ma_days: "elevated_open_interest.ma_days" = 90.0,
    h1_required_signals: "h1.required_signals" = 3.0,
    h1_expansion_vol_bars: "h1.expansion_vol_bars" = 6.0,
    h2_pre_break_bars: "funding_moderation.pre_break_bars" = 3.0,
    h2_follow_through_closes: "h2.follow_through_closes" = 3.0,
    structural_shift_closes: "structural_shift.min_closes" = 2.0,
    reversion_sigma_multiple: "mean_reversion.sigma_multiple" = 1.0,
    reversion_max_bars: "mean_reversion.max_bars" = 4.0,
    basis_reversion_bars: "basis_normalization.bars" = 2.0,
    recoil_min_fraction: "quick_recoil.min_fraction" = 0.5,
    recoil_bars: "quick_recoil.bars" = 1.0,
    funding_norm_min_decline: "funding_normalization.min_decline" = 0.20,
    funding_norm_bars: "funding_normalization.bars" = 2.0,
    h4_min_tap_rate: "h4.min_tap_hit_rate" = 0.5,

    // regime advisor
    regime_lookback: "regime_identification.lookback_bars" = 20.0,
    regime_directional_share: "regime_identification.directional_share" = 0.6,
    trigger_min_metrics: "trigger_analysis.min_metrics" = 4.0,
    stop_min: "trader_framework.stop_min" = 0.01,
    stop_max: "trader_framework.stop_max" = 0.02,
    holding_days: "trader_framework.holding_days" = 10.0,
    leverage_max: "margin_requirements.max_leverage" = 100.0,
    leverage_min: "margin_requirements.min_leverage" = 20.0,
    leverage_lookback_days: "margin_requirements.lookback_days" = 30.0,
    liquidation_mode_percentile: "liquidation_algorithms.aggressive_percentile" = 0.80,
    liquidation_mode_lookback_days: "liquidation_algorithms.lookback_days" = 90.0,

    // validation pipeline
    timestamp_tolerance_secs: "timestamp_verification.tolerance_secs" = 30.0,
    price_outlier_sigma: "price_consistency.sigma_multiple" = 2.0,
    mad_scale: "price_consistency.mad_scale" = 1.4826,
    mad_degenerate_tolerance: "price_consistency.degenerate_tolerance" = 0.001,
    volume_max_deviation: "volume_verification.max_deviation" = 0.30,
    funding_max_abs: "funding_rate_bounds.max_abs" = 0.0375,
    oi_max_discrepancy: "open_interest_sanity.max_discrepancy" = 0.05,
    book_max_spread: "order_book_integrity.max_spread" = 0.01,
    max_interpolated_bars: "missing_data_handling.max_interpolated_bars" = 1.0,
    wash_volume_multiple: "wash_trading.volume_multiple" = 5.0,
    wash_max_body: "wash_trading.max_body" = 0.0005,
    wash_median_bars: "wash_trading.median_bars" = 20.0,
    top_exchanges: "spot_market_data.top_exchanges" = 3.0,
}

impl Config {
    pub fn set(&mut self, key: &str, value: f64) -> Result<()> {
        if !value.is_finite() {
            return Err(Error::InvalidConfigValue { key: key.to_string(), reason: String::from("not finite") });
        }
        let slot = self.slot(key).ok_or_else(|| Error::UnknownConfigKey(key.to_string()))?;
        *slot = value;
        Ok(())
    }

    pub fn apply<'a, I>(&mut self, overrides: I) -> Result<()>
    where
        I: IntoIterator<Item = (&'a str, f64)>,
    {
        for (k, v) in overrides {
            self.set(k, v)?;
        }
        Ok(())
    }

    /// Integer-valued parameter (bar counts and the like), at least 1.
    pub fn count(value: f64) -> usize {
        let r = libm::round(value);
        if r < 1.0 {
            1
        } else {
            r as usize
        }
    }
}
