//! Sample summaries and the one-sample Kolmogorov-Smirnov test.

use crate::sequential::normal_cdf;

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample variance.
pub fn variance(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return f64::NAN;
    }
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64
}

pub fn median(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    if v.len().is_multiple_of(2) {
        0.5 * (v[mid - 1] + v[mid])
    } else {
        v[mid]
    }
}

/// `sup_x |F_n(x) - Phi(x)|` against the standard normal.
pub fn ks_distance_normal(xs: &[f64]) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    v.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = normal_cdf(x);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max)
}

/// Asymptotic p-value `P(K > lambda)` of the Kolmogorov distribution, with
/// Stephens' small-sample correction `lambda = (sqrt(n) + 0.12 + 0.11/sqrt(n)) D`.
pub fn ks_p_value(d: f64, n: usize) -> f64 {
    let sn = (n as f64).sqrt();
    let lambda = (sn + 0.12 + 0.11 / sn) * d;
    if lambda < 1e-3 {
        return 1.0;
    }
    let mut sum = 0.0;
    for j in 1..=100 {
        let j = j as f64;
        let term = 2.0 * (-1f64).powf(j - 1.0) * (-2.0 * j * j * lambda * lambda).exp();
        sum += term;
        if term.abs() < 1e-16 {
            break;
        }
    }
    sum.clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn summaries() {
        assert_eq!(mean(&[1.0, 2.0, 3.0]), 2.0);
        assert_eq!(variance(&[1.0, 2.0, 3.0]), 1.0);
        assert_eq!(median(&[3.0, 1.0, 2.0, 10.0]), 2.5);
        assert!(mean(&[]).is_nan());
    }

    #[test]
    fn ks_reference_values() {
        // Kolmogorov survival function: Q(1.3581) ~ 0.05, Q(1.6276) ~ 0.01
        assert!((ks_p_value(1.3581 / 1e4, 100_000_000) - 0.05).abs() < 1e-3);
        assert!((ks_p_value(1.6276 / 1e4, 100_000_000) - 0.01).abs() < 1e-3);
        assert_eq!(ks_p_value(0.0, 10), 1.0);
    }

    #[test]
    fn ks_distance_of_quantile_grid_is_small() {
        let n = 400;
        let xs: Vec<f64> = (0..n)
            .map(|i| crate::sequential::normal_quantile((i as f64 + 0.5) / n as f64).unwrap())
            .collect();
        let d = ks_distance_normal(&xs);
        assert!((d - 0.5 / n as f64).abs() < 1e-9);
        let shifted: Vec<f64> = xs.iter().map(|x| x + 1.0).collect();
        assert!(ks_p_value(ks_distance_normal(&shifted), n) < 1e-10);
    }
}
