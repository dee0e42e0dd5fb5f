use statrs::distribution::{ContinuousCDF, Normal};

/// Two-sided Kolmogorov-Smirnov statistic of `samples` against a reference
/// CDF. Samples need not be sorted.
pub fn ks_statistic<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> f64 {
    assert!(!samples.is_empty());
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = sorted.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in sorted.iter().enumerate() {
        let f = cdf(x);
        let lo = i as f64 / n;
        let hi = (i + 1) as f64 / n;
        d = d.max((f - lo).abs()).max((hi - f).abs());
    }
    d
}

/// Asymptotic p-value for a KS statistic `d` at sample size `n`, using the
/// Kolmogorov tail series with the Stephens small-sample correction.
pub fn ks_p_value(d: f64, n: usize) -> f64 {
    let sqrt_n = (n as f64).sqrt();
    let lambda = (sqrt_n + 0.12 + 0.11 / sqrt_n) * d;
    if lambda < 1e-3 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=100u32 {
        let term = (-2.0 * (k as f64 * lambda).powi(2)).exp();
        if term < 1e-16 {
            break;
        }
        sum += if k % 2 == 1 { term } else { -term };
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// KS p-value of `samples` against Normal(mean, sd).
pub fn ks_test_normal(samples: &[f64], mean: f64, sd: f64) -> f64 {
    let normal = Normal::new(mean, sd).expect("valid normal parameters");
    let d = ks_statistic(samples, |x| normal.cdf(x));
    ks_p_value(d, samples.len())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand_distr::StandardNormal;

    use crate::streams::{stream, ModuleId};

    #[test]
    fn uniform_samples_pass() {
        let mut rng = stream(11, ModuleId::StatsHarness, 90, 0);
        let samples: Vec<f64> = (0..2000).map(|_| rng.gen::<f64>()).collect();
        let d = ks_statistic(&samples, |x| x.clamp(0.0, 1.0));
        assert!(ks_p_value(d, samples.len()) > 0.01);
    }

    #[test]
    fn shifted_normal_fails() {
        let mut rng = stream(11, ModuleId::StatsHarness, 91, 0);
        let samples: Vec<f64> = (0..2000)
            .map(|_| 0.3 + rng.sample::<f64, _>(StandardNormal))
            .collect();
        assert!(ks_test_normal(&samples, 0.0, 1.0) < 1e-6);
        assert!(ks_test_normal(&samples, 0.3, 1.0) > 0.01);
    }

    #[test]
    fn p_value_monotone_in_statistic() {
        assert!(ks_p_value(0.02, 500) > ks_p_value(0.08, 500));
        assert!(ks_p_value(0.0, 500) == 1.0);
    }
}
