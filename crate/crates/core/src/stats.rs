//! Small numerical helpers shared by the metric families.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

pub fn mean(xs: &[f64]) -> Option<f64> {
    if xs.is_empty() {
        return None;
    }
    Some(xs.iter().sum::<f64>() / xs.len() as f64)
}

/// Sample (n-1) standard deviation, single-pass Welford update.
pub fn sample_std(xs: &[f64]) -> Option<f64> {
    if xs.len() < 2 {
        return None;
    }
    let mut m = 0.0;
    let mut s = 0.0;
    for (i, &x) in xs.iter().enumerate() {
        let d = x - m;
        m += d / (i + 1) as f64;
        s += d * (x - m);
    }
    Some(libm::sqrt((s / (xs.len() - 1) as f64).max(0.0)))
}

/// Population standard deviation.
pub fn population_std(xs: &[f64]) -> Option<f64> {
    let m = mean(xs)?;
    let v = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / xs.len() as f64;
    Some(libm::sqrt(v))
}

pub fn median(xs: &[f64]) -> Option<f64> {
    if xs.is_empty() {
        return None;
    }
    let mut v: Vec<f64> = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    Some(if n % 2 == 1 { v[n / 2] } else { (v[n / 2 - 1] + v[n / 2]) / 2.0 })
}

/// Median absolute deviation from the median (unscaled).
pub fn mad(xs: &[f64]) -> Option<f64> {
    let m = median(xs)?;
    let dev: Vec<f64> = xs.iter().map(|x| (x - m).abs()).collect();
    median(&dev)
}

/// Linear-interpolated quantile (`q` in [0,1]) of an unsorted sample.
pub fn quantile(xs: &[f64], q: f64) -> Option<f64> {
    if xs.is_empty() {
        return None;
    }
    let mut v: Vec<f64> = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let pos = q.clamp(0.0, 1.0) * (v.len() - 1) as f64;
    let lo = libm::floor(pos) as usize;
    let hi = libm::ceil(pos) as usize;
    let frac = pos - lo as f64;
    Some(v[lo] + (v[hi] - v[lo]) * frac)
}

/// Fraction of `dist` strictly below `value`, scaled so the minimum of the
/// distribution maps to 0 and a unique maximum to 1.
pub fn percentile_rank(value: f64, dist: &[f64]) -> Option<f64> {
    if dist.len() < 2 {
        return None;
    }
    let below = dist.iter().filter(|x| **x < value).count();
    Some((below as f64 / (dist.len() - 1) as f64).clamp(0.0, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ols {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Ordinary least squares of `y` on `x`. `None` when `x` has no variance.
pub fn ols(x: &[f64], y: &[f64]) -> Option<Ols> {
    let n = x.len().min(y.len());
    if n < 2 {
        return None;
    }
    let (x, y) = (&x[..n], &y[..n]);
    let mx = mean(x)?;
    let my = mean(y)?;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for i in 0..n {
        let dx = x[i] - mx;
        let dy = y[i] - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if !(sxx > f64::EPSILON * mx.abs().max(1.0) * mx.abs().max(1.0) * n as f64) {
        return None;
    }
    let slope = sxy / sxx;
    let r_squared = if syy > 0.0 { (sxy * sxy) / (sxx * syy) } else { 1.0 };
    Some(Ols { slope, intercept: my - slope * mx, r_squared })
}

/// OLS slope of a series against its index `0..n`.
pub fn trend_slope(ys: &[f64]) -> Option<f64> {
    let xs: Vec<f64> = (0..ys.len()).map(|i| i as f64).collect();
    ols(&xs, ys).map(|o| o.slope)
}

/// Log returns `ln(c_t / c_{t-1})`.
pub fn log_returns(closes: &[f64]) -> Vec<f64> {
    closes.windows(2).map(|w| libm::log(w[1] / w[0])).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn median_and_mad() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), Some(2.0));
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), Some(2.5));
        assert_eq!(mad(&[100.0, 101.0, 99.0]), Some(1.0));
        assert_eq!(mad(&[100.0, 100.0, 100.0, 130.0]), Some(0.0));
    }

    #[test]
    fn std_matches_two_pass() {
        let xs = [1.0, 4.0, 9.0, 16.0, 25.0];
        let m = 11.0;
        let two_pass = libm::sqrt(xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / 4.0);
        assert!((sample_std(&xs).unwrap() - two_pass).abs() < 1e-12);
        assert_eq!(sample_std(&[1.0]), None);
    }

    #[test]
    fn ols_exact_line() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let y = [3.0, 5.0, 7.0, 9.0];
        let fit = ols(&x, &y).unwrap();
        assert!((fit.slope - 2.0).abs() < 1e-12);
        assert!((fit.intercept - 1.0).abs() < 1e-12);
        assert!((fit.r_squared - 1.0).abs() < 1e-12);
        assert!(ols(&[2.0, 2.0, 2.0], &[1.0, 2.0, 3.0]).is_none());
    }

    #[test]
    fn quantiles_and_ranks() {
        let d = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert_eq!(quantile(&d, 0.5), Some(3.0));
        assert_eq!(quantile(&d, 0.8), Some(4.2));
        assert_eq!(percentile_rank(1.0, &d), Some(0.0));
        assert_eq!(percentile_rank(5.0, &d), Some(1.0));
    }
}
