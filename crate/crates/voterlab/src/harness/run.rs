use rayon::prelude::*;

use crate::dual::{occupation_cov, pair_sq_diff};
use crate::error::{Result, VoterlabError};
use crate::forward::{run_voter, scaled_occupation, Centering};
use crate::lattice::{gamma_cached, ConstantsTable, Site};
use crate::limits::{b_l2_distance, ito_variance, sample_gaussian, zeta_cov, LimitLawTable};
use crate::streams::{stream, ModuleId};
use crate::profile::RhoProfile;

use super::config::{config_hash, ExperimentConfig, ExperimentKind};
use super::report::{Report, ReportItem};

/// Decorrelate the replica streams used at different scales.
pub(super) fn scale_seed(seed: u64, n: u64) -> u64 {
    seed ^ n.wrapping_mul(0x9e37_79b9_7f4a_7c15)
}

fn item(label: String, value: f64, se: Option<f64>, target: Option<f64>) -> ReportItem {
    ReportItem {
        label,
        value,
        std_error: se,
        target,
        pass: None,
    }
}

/// Scaled, centered occupation draws at diffusive time `t` for the site at
/// the origin, one per replica.
pub fn forward_samples(
    d: usize,
    side: usize,
    n: u64,
    t: f64,
    profile: &RhoProfile,
    replicas: u64,
    seed: u64,
) -> Result<Vec<f64>> {
    let origin = Site::origin(d);
    let t_lat = t * n as f64;
    let centering = Centering::build(profile, n, &origin, t_lat, 4000);
    (0..replicas)
        .into_par_iter()
        .map(|r| {
            let run = run_voter(d, side, n, t_lat, profile, &[origin.clone()], r, seed)?;
            let vals = scaled_occupation(&run, 0, &centering, d, n, &[t])?;
            Ok(vals[0])
        })
        .collect()
}

/// Sample variance with the normal-theory standard error var * sqrt(2/(n-1)).
pub fn sample_variance(samples: &[f64]) -> (f64, f64) {
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let var = samples.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (var, var * (2.0 / (n - 1.0)).sqrt())
}

/// Limit of E[(eta(y) - eta(x))^2] at diffusive time s near macroscopic
/// point u: 2 gamma_d rho_heat (1 - rho_heat).
pub fn pair_limit_target(d: usize, profile: &RhoProfile, s: f64, u: &[f64]) -> f64 {
    let q = profile.heat_value(s, u);
    2.0 * gamma_cached(d) * q * (1.0 - q)
}

/// Limit of the scaled occupation covariance at (t1, t2).
pub fn occupation_limit(d: usize, profile: &RhoProfile, t1: f64, t2: f64) -> Result<f64> {
    if d == 3 {
        Ok(12.0 * gamma_cached(3) * zeta_cov(t1, t2, profile)?)
    } else {
        ito_variance(d, t1.min(t2), profile)
    }
}

/// Execute one experiment and collect its report.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Report> {
    let hash = config_hash(config);
    let mut report = Report::new(&hash);
    let seed = config.seed;
    match &config.experiment {
        ExperimentKind::Constants { dims } => {
            let table = ConstantsTable::compute(dims)?;
            for e in &table.entries {
                report.push(item(
                    format!("d={} {}", e.d, e.name),
                    e.value,
                    Some(e.error_bound),
                    None,
                ));
            }
        }
        ExperimentKind::PairLimit {
            d,
            profile,
            s,
            x,
            y,
            scales,
            replicas,
        } => {
            profile.validate(*d)?;
            let (x, y) = (Site::new(x), Site::new(y));
            for &n in scales {
                let est = pair_sq_diff(n, *s, &x, &y, profile, *replicas, scale_seed(seed, n));
                let target = pair_limit_target(*d, profile, *s, &x.scaled(n));
                report.push(item(
                    format!("N={n} sq_diff"),
                    est.value,
                    Some(est.std_error),
                    Some(target),
                ));
            }
        }
        ExperimentKind::OccupationCov {
            d,
            profile,
            t1,
            t2,
            scales,
            samples,
        } => {
            profile.validate(*d)?;
            let target = occupation_limit(*d, profile, *t1, *t2)?;
            for &n in scales {
                let est = occupation_cov(*d, n, *t1, *t2, profile, *samples, scale_seed(seed, n))?;
                report.push(item(
                    format!("N={n} occ_cov"),
                    est.value,
                    Some(est.std_error),
                    Some(target),
                ));
            }
        }
        ExperimentKind::ForwardVariance {
            d,
            profile,
            t,
            n,
            side,
            replicas,
        } => {
            profile.validate(*d)?;
            let samples = forward_samples(*d, *side, *n, *t, profile, *replicas, seed)?;
            let mean = samples.iter().sum::<f64>() / samples.len() as f64;
            let (var, var_se) = sample_variance(&samples);
            report.push(item(
                "mean".into(),
                mean,
                Some((var / samples.len() as f64).sqrt()),
                Some(0.0),
            ));
            report.push(item("variance".into(), var, Some(var_se), None));
        }
        ExperimentKind::LimitTable { d, profile, times } => {
            let table = LimitLawTable::compute(*d, profile, times)?;
            for (i, &t) in times.iter().enumerate() {
                report.push(item(
                    format!("var(t={t})"),
                    table.covariance[i][i],
                    None,
                    None,
                ));
            }
        }
        ExperimentKind::BConvergence { t, scales } => {
            for &n in scales {
                report.push(item(format!("N={n} b_l2"), b_l2_distance(n, *t), None, None));
            }
        }
        ExperimentKind::ZetaSample {
            profile,
            times,
            replicas,
        } => {
            let table = LimitLawTable::compute(3, profile, times)?;
            let last = times.len() - 1;
            let samples: Result<Vec<f64>> = (0..*replicas)
                .map(|r| {
                    let mut rng = stream(seed, ModuleId::LimitLaws, 1, r);
                    let path = sample_gaussian(&table.covariance, &mut rng)?;
                    Ok(path[last])
                })
                .collect();
            let (var, var_se) = sample_variance(&samples?);
            report.push(item(
                format!("empirical var(t={})", times[last]),
                var,
                Some(var_se),
                Some(table.covariance[last][last]),
            ));
        }
    }
    if report.items.is_empty() {
        return Err(VoterlabError::InvalidConfig("empty experiment".into()));
    }
    Ok(report)
}
