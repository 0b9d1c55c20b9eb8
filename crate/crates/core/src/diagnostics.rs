//! Statistics used to check samplers against their targets: KS tests, total
//! variation between histograms, batch-means standard errors, mode counting.

use std::collections::BTreeMap;

/// One-sample Kolmogorov-Smirnov statistic of `samples` against `cdf`.
pub fn ks_statistic<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> f64 {
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).max((i as f64 + 1.0) / n - f)
        })
        .fold(0.0, f64::max)
}

/// Asymptotic p-value of the KS statistic `d` for sample size `n`
/// (Kolmogorov distribution with Stephens' small-sample correction).
pub fn ks_pvalue(d: f64, n: usize) -> f64 {
    let sn = (n as f64).sqrt();
    let lambda = (sn + 0.12 + 0.11 / sn) * d;
    if lambda < 1e-3 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=200 {
        let kf = k as f64;
        let term = 2.0 * (-1f64).powi(k - 1) * (-2.0 * kf * kf * lambda * lambda).exp();
        sum += term;
        if term.abs() < 1e-16 {
            break;
        }
    }
    sum.clamp(0.0, 1.0)
}

pub fn ks_test<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> (f64, f64) {
    let d = ks_statistic(samples, cdf);
    (d, ks_pvalue(d, samples.len()))
}

/// Total variation distance between two count tables, each normalized by its
/// own total.
pub fn total_variation<K: Ord + Copy>(a: &BTreeMap<K, u64>, b: &BTreeMap<K, u64>) -> f64 {
    let ta: u64 = a.values().sum();
    let tb: u64 = b.values().sum();
    let mut keys: Vec<K> = a.keys().chain(b.keys()).copied().collect();
    keys.sort();
    keys.dedup();
    0.5 * keys
        .iter()
        .map(|k| {
            let pa = a.get(k).copied().unwrap_or(0) as f64 / ta as f64;
            let pb = b.get(k).copied().unwrap_or(0) as f64 / tb as f64;
            (pa - pb).abs()
        })
        .sum::<f64>()
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample variance.
pub fn variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() as f64 - 1.0)
}

pub fn covariance(xs: &[f64], ys: &[f64]) -> f64 {
    let (mx, my) = (mean(xs), mean(ys));
    xs.iter()
        .zip(ys)
        .map(|(x, y)| (x - mx) * (y - my))
        .sum::<f64>()
        / (xs.len() as f64 - 1.0)
}

pub fn correlation(xs: &[f64], ys: &[f64]) -> f64 {
    covariance(xs, ys) / (variance(xs) * variance(ys)).sqrt()
}

/// Standard error of `stat` over independent replicates, estimated by
/// splitting them into `batches` equal blocks.
pub fn batch_standard_error<F>(len: usize, batches: usize, stat: F) -> f64
where
    F: Fn(std::ops::Range<usize>) -> f64,
{
    assert!(batches >= 2 && len >= batches);
    let size = len / batches;
    let values: Vec<f64> = (0..batches).map(|b| stat(b * size..(b + 1) * size)).collect();
    (variance(&values) / batches as f64).sqrt()
}

/// Number of strict local maxima of a sampled curve (plateaus count once).
pub fn count_local_modes(values: &[f64]) -> usize {
    let mut modes = 0;
    let mut rising = true;
    for pair in values.windows(2) {
        if pair[1] > pair[0] {
            rising = true;
        } else if pair[1] < pair[0] {
            if rising {
                modes += 1;
            }
            rising = false;
        }
    }
    modes
}

pub fn trapezoid(grid: &[f64], values: &[f64]) -> f64 {
    grid.windows(2)
        .zip(values.windows(2))
        .map(|(g, v)| 0.5 * (g[1] - g[0]) * (v[0] + v[1]))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ks_uniform_grid_is_small() {
        let xs: Vec<f64> = (0..1000).map(|i| (i as f64 + 0.5) / 1000.0).collect();
        let (d, p) = ks_test(&xs, |x| x);
        assert!(d <= 0.0005 + 1e-12);
        assert!(p > 0.99);
    }

    #[test]
    fn ks_detects_shift() {
        let xs: Vec<f64> = (0..1000).map(|i| 0.5 * (i as f64 + 0.5) / 1000.0).collect();
        let (_, p) = ks_test(&xs, |x| x);
        assert!(p < 1e-10);
    }

    #[test]
    fn ks_pvalue_reference_point() {
        // lambda = 1.36 is the classical 5% critical value.
        let n = 1_000_000;
        let d = 1.358 / ((n as f64).sqrt() + 0.12 + 0.11 / (n as f64).sqrt());
        assert!((ks_pvalue(d, n) - 0.05).abs() < 1e-3);
    }

    #[test]
    fn tv_of_disjoint_and_identical() {
        let a = BTreeMap::from([(1, 5u64)]);
        let b = BTreeMap::from([(2, 7u64)]);
        assert_eq!(total_variation(&a, &b), 1.0);
        assert_eq!(total_variation(&a, &a), 0.0);
    }

    #[test]
    fn modes() {
        assert_eq!(count_local_modes(&[0.0, 1.0, 0.0, 2.0, 2.0, 0.0, 1.0]), 2);
        assert_eq!(count_local_modes(&[3.0, 2.0, 1.0]), 1);
        assert_eq!(count_local_modes(&[1.0, 1.0, 1.0]), 0);
    }

    #[test]
    fn trapezoid_linear() {
        let g = [0.0, 1.0, 2.0];
        assert!((trapezoid(&g, &[0.0, 1.0, 2.0]) - 2.0).abs() < 1e-15);
    }
}
