//! Small statistics helpers used by the experiments.

use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Sample mean and standard error of the mean.
pub fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    if n == 0 {
        return (0.0, 0.0);
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

/// Standard error of a Bernoulli rate estimate.
pub fn rate_se(successes: u64, trials: u64) -> f64 {
    if trials == 0 {
        return 0.0;
    }
    let p = successes as f64 / trials as f64;
    (p * (1.0 - p) / trials as f64).sqrt()
}

/// Pearson chi-square statistic and p-value of `counts` against the uniform
/// distribution over `counts.len()` cells.
pub fn chi_square_uniform(counts: &[u64]) -> (f64, f64) {
    let k = counts.len();
    assert!(k >= 2, "need at least two cells");
    let total: u64 = counts.iter().sum();
    let e = total as f64 / k as f64;
    let stat = counts.iter().map(|&c| (c as f64 - e).powi(2) / e).sum::<f64>();
    let dist = ChiSquared::new((k - 1) as f64).expect("positive degrees of freedom");
    (stat, 1.0 - dist.cdf(stat))
}

/// Total variation distance between two count vectors, each normalised.
pub fn tv_counts(a: &[u64], b: &[u64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let (sa, sb) = (a.iter().sum::<u64>() as f64, b.iter().sum::<u64>() as f64);
    a.iter().zip(b).map(|(&x, &y)| (x as f64 / sa - y as f64 / sb).abs()).sum::<f64>() / 2.0
}

pub fn median(xs: &mut [f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.sort_by(|a, b| a.total_cmp(b));
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        (xs[n / 2 - 1] + xs[n / 2]) / 2.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mean_se_known() {
        let (m, se) = mean_se(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m, 2.5);
        assert!((se - (1.666_666_666_666_666_7f64 / 4.0).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn chi_square_flat_counts() {
        let (s, p) = chi_square_uniform(&[100; 16]);
        assert_eq!(s, 0.0);
        assert!((p - 1.0).abs() < 1e-12);
        // chi2 with 1 dof at 3.841 has p = 0.05
        let (s, p) = chi_square_uniform(&[0, 0]);
        assert!(s.is_nan() || p.is_nan() || p <= 1.0);
        let (_, p) = chi_square_uniform(&[60, 40]);
        assert!((p - 0.0455).abs() < 1e-3, "{p}");
    }

    #[test]
    fn tv_and_median() {
        assert_eq!(tv_counts(&[1, 0], &[0, 1]), 1.0);
        assert_eq!(tv_counts(&[2, 2], &[1, 1]), 0.0);
        assert_eq!(median(&mut [3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&mut [4.0, 1.0, 2.0, 3.0]), 2.5);
    }
}
