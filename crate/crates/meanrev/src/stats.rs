//! Small statistics toolbox: compensated sums, moments, bootstrap intervals.

use crate::rng::NoiseChannel;

/// Neumaier-compensated sum; deterministic for a fixed input order.
pub fn compensated_sum(values: &[f64]) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for &v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

pub fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    compensated_sum(values) / values.len() as f64
}

/// Unbiased sample variance.
pub fn variance(values: &[f64]) -> f64 {
    let n = values.len();
    if n < 2 {
        return f64::NAN;
    }
    let m = mean(values);
    let sq: Vec<f64> = values.iter().map(|&v| (v - m) * (v - m)).collect();
    compensated_sum(&sq) / (n - 1) as f64
}

pub fn standard_error(values: &[f64]) -> f64 {
    (variance(values) / values.len() as f64).sqrt()
}

fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    if n == 0 {
        return f64::NAN;
    }
    let pos = q * (n - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    if lo == hi {
        sorted[lo]
    } else {
        let w = pos - lo as f64;
        sorted[lo] * (1.0 - w) + sorted[hi] * w
    }
}

#[derive(Debug, Clone, Copy)]
pub struct BootstrapCi {
    pub lo: f64,
    pub hi: f64,
    pub half_width: f64,
    /// False when the sample is too small for a meaningful interval.
    pub usable: bool,
}

/// Percentile bootstrap for the mean: `resamples` draws with replacement,
/// deterministic given the noise channel.
pub fn bootstrap_mean_ci(
    values: &[f64],
    resamples: usize,
    level: f64,
    channel: &NoiseChannel,
) -> BootstrapCi {
    let n = values.len();
    if n < 2 {
        let m = mean(values);
        return BootstrapCi {
            lo: m,
            hi: m,
            half_width: f64::NAN,
            usable: false,
        };
    }
    let mut stats = Vec::with_capacity(resamples);
    let mut step = 0u64;
    for _ in 0..resamples {
        let mut acc = 0.0;
        for _ in 0..n {
            acc += values[channel.below(step, n)];
            step += 1;
        }
        stats.push(acc / n as f64);
    }
    stats.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let alpha = (1.0 - level) / 2.0;
    let lo = quantile_sorted(&stats, alpha);
    let hi = quantile_sorted(&stats, 1.0 - alpha);
    BootstrapCi {
        lo,
        hi,
        half_width: 0.5 * (hi - lo),
        usable: true,
    }
}

/// Least squares fit y ~ c0 + c1 * x; returns (c0, c1, max |residual|).
pub fn fit_affine(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    assert_eq!(x.len(), y.len());
    let n = x.len() as f64;
    let sx = compensated_sum(x);
    let sy = compensated_sum(y);
    let sxx: f64 = x.iter().map(|&v| v * v).sum();
    let sxy: f64 = x.iter().zip(y).map(|(&a, &b)| a * b).sum();
    let denom = n * sxx - sx * sx;
    let c1 = if denom.abs() < 1e-300 {
        0.0
    } else {
        (n * sxy - sx * sy) / denom
    };
    let c0 = (sy - c1 * sx) / n;
    let max_resid = x
        .iter()
        .zip(y)
        .map(|(&a, &b)| (b - (c0 + c1 * a)).abs())
        .fold(0.0f64, f64::max);
    (c0, c1, max_resid)
}
