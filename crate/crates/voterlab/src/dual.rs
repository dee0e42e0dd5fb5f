//! Duality estimators: coalescing-random-walk representations of voter-model
//! moments, reaching time horizons far beyond forward simulation.
//!
//! Two walks of the dual pair are tracked through their difference D and the
//! per-coordinate event counts. Per coordinate, difference and sum of two
//! independent rate-2 walks jump at the shared event times with independent
//! signs, so the sum can be reconstructed at the end from the counts alone:
//! S_i = (sum of m_i independent +-1), X = ((x + y + S) + D) / 2. Meeting
//! times only depend on D, which is what the estimators condition on.
//!
//! Acceleration: away from the origin D is advanced in Poisson leaps, and
//! once |D| exceeds an escape radius the pair is declared non-coalescing and
//! leapt to the horizon. The neglected return probability is the lattice
//! hitting probability at the escape radius (~0.3% in d = 3, less in higher
//! d); it biases meeting indicators by at most that amount.

use rand::Rng;
use rand_distr::{Binomial, Distribution, Exp, Poisson};
use rayon::prelude::*;

use crate::error::{Result, VoterlabError};
use crate::lattice::{walk_increment, Site, MAX_DIM};
use crate::limits::h_scale;
use crate::profile::RhoProfile;
use crate::streams::{stream, ModuleId};

const OP_PAIR: u32 = 1;
const OP_TWO_TIME: u32 = 2;
const OP_OCCUPATION: u32 = 3;

/// A mean with its standard error.
#[derive(Debug, Clone, Copy)]
pub struct MomentEstimate {
    pub value: f64,
    pub std_error: f64,
    pub replicas: u64,
}

/// Outcome of an exact coalescing pair run.
#[derive(Debug, Clone)]
pub struct CoalescingPairResult {
    pub coalescence_time: Option<f64>,
    pub end_first: Site,
    pub end_second: Site,
}

/// Exact event-by-event simulation of a coalescing pair: both walks at rate
/// 2d, moving together after they meet. Reference engine for tests; cost is
/// linear in the event count.
pub fn simulate_coalescing_pair<R: Rng>(
    x: &Site,
    y: &Site,
    t_max: f64,
    rng: &mut R,
) -> CoalescingPairResult {
    let d = x.dim();
    assert_eq!(d, y.dim());
    let (mut a, mut b) = (*x, *y);
    let mut tau = if a == b { Some(0.0) } else { None };
    let mut t = 0.0;
    loop {
        let rate = if tau.is_some() { 2.0 * d as f64 } else { 4.0 * d as f64 };
        t += Exp::new(rate).unwrap().sample(rng);
        if t > t_max {
            break;
        }
        let pick_first = tau.is_some() || rng.gen_bool(0.5);
        let dir = rng.gen_range(0..2 * d);
        let mut c: Vec<i64> = if pick_first {
            a.coords().to_vec()
        } else {
            b.coords().to_vec()
        };
        c[dir / 2] += if dir % 2 == 0 { 1 } else { -1 };
        let next = Site::new(&c);
        if tau.is_some() {
            a = next;
            b = next;
        } else if pick_first {
            a = next;
        } else {
            b = next;
        }
        if tau.is_none() && a == b {
            tau = Some(t);
        }
    }
    CoalescingPairResult {
        coalescence_time: tau,
        end_first: a,
        end_second: b,
    }
}

/// Give up on detecting a meeting once the squared separation exceeds this
/// multiple of the remaining time: a return to the origin then needs a
/// 2 sigma in-and-back excursion of the difference walk (per-coordinate
/// variance 8t), which forfeits under 0.5% of the residual hit probability.
const ESCAPE_R2_PER_TIME: f64 = 128.0;

struct PairOutcome {
    tau: Option<f64>,
    end_first: Site,
    end_second: Site,
}

/// Accelerated independent-pair evolution over [0, t_max], recording the
/// first meeting time. After a meeting the walks keep moving independently
/// (estimators that need the merged walk use `end_first`, whose marginal law
/// is the same).
fn pair_evolution<R: Rng>(x: &Site, y: &Site, t_max: f64, rng: &mut R) -> PairOutcome {
    let d = x.dim();
    debug_assert_eq!(d, y.dim());
    let mut diff = [0i64; MAX_DIM];
    for i in 0..d {
        diff[i] = x.coords()[i] - y.coords()[i];
    }
    let mut events = [0u64; MAX_DIM];
    let mut tau = if diff[..d].iter().all(|&v| v == 0) {
        Some(0.0)
    } else {
        None
    };
    let mut t = 0.0;
    let exp = Exp::new(4.0 * d as f64).unwrap();
    while t < t_max {
        let r2: i64 = diff[..d].iter().map(|&v| v * v).sum();
        if tau.is_some() || r2 as f64 >= ESCAPE_R2_PER_TIME * (t_max - t) {
            // Meeting already recorded, or a return is out of diffusive
            // reach: leap to the end.
            leap(&mut diff[..d], &mut events[..d], t_max - t, rng);
            break;
        }
        if r2 >= 256 {
            // Far from the origin: a leap short enough that a missed visit
            // to 0 would need a > 3.5 sigma excursion in and back out.
            let delta = (r2 as f64 / 144.0).min(t_max - t);
            leap(&mut diff[..d], &mut events[..d], delta, rng);
            t += delta;
            if diff[..d].iter().all(|&v| v == 0) {
                tau = Some(t);
            }
            continue;
        }
        let dt = exp.sample(rng);
        if t + dt > t_max {
            break;
        }
        t += dt;
        let i = rng.gen_range(0..d);
        diff[i] += if rng.gen_bool(0.5) { 1 } else { -1 };
        events[i] += 1;
        if diff[..d].iter().all(|&v| v == 0) {
            tau = Some(t);
        }
    }
    // Reconstruct the endpoints from the independent event signs.
    let mut c1 = vec![0i64; d];
    let mut c2 = vec![0i64; d];
    for i in 0..d {
        let s = if events[i] == 0 {
            0
        } else {
            2 * Binomial::new(events[i], 0.5).unwrap().sample(rng) as i64 - events[i] as i64
        };
        let base = x.coords()[i] + y.coords()[i] + s;
        debug_assert_eq!((base + diff[i]).rem_euclid(2), 0);
        c1[i] = (base + diff[i]) / 2;
        c2[i] = (base - diff[i]) / 2;
    }
    PairOutcome {
        tau,
        end_first: Site::new(&c1),
        end_second: Site::new(&c2),
    }
}

/// Advance the difference walk by `delta`: per coordinate, M ~ Poisson(4
/// delta) shared events with independent signs for difference and sum.
fn leap<R: Rng>(diff: &mut [i64], events: &mut [u64], delta: f64, rng: &mut R) {
    if delta <= 0.0 {
        return;
    }
    let pois = Poisson::new(4.0 * delta).unwrap();
    for (dv, ev) in diff.iter_mut().zip(events.iter_mut()) {
        let m = pois.sample(rng) as u64;
        if m > 0 {
            *dv += 2 * Binomial::new(m, 0.5).unwrap().sample(rng) as i64 - m as i64;
        }
        *ev += m;
    }
}

fn summarize(values: &[f64]) -> MomentEstimate {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0).max(1.0);
    MomentEstimate {
        value: mean,
        std_error: (var / n).sqrt(),
        replicas: values.len() as u64,
    }
}

/// E[(eta_{sN}(y) - eta_{sN}(x))^2] by duality: zero if the dual pair meets
/// before the horizon, otherwise the Bernoulli mismatch probability of the
/// two endpoint densities.
pub fn pair_sq_diff(
    n: u64,
    s: f64,
    x: &Site,
    y: &Site,
    profile: &RhoProfile,
    replicas: u64,
    seed: u64,
) -> MomentEstimate {
    let horizon = s * n as f64;
    let values: Vec<f64> = (0..replicas)
        .into_par_iter()
        .map(|r| {
            let mut rng = stream(seed, ModuleId::DualEngine, OP_PAIR, r);
            let out = pair_evolution(x, y, horizon, &mut rng);
            if out.tau.is_some() {
                0.0
            } else {
                let p1 = profile.eval(&out.end_first.scaled(n));
                let p2 = profile.eval(&out.end_second.scaled(n));
                p1 * (1.0 - p2) + p2 * (1.0 - p1)
            }
        })
        .collect();
    summarize(&values)
}

/// One unbiased draw of Cov(eta_a(0), eta_b(0)) at lattice times a <= b.
///
/// The dual of the later observable walks down to level a, landing at Z;
/// from there a pair runs for time a. Conditional on the pair meeting, the
/// coupled product mean uses independent continuations, giving the draw
/// 1{tau <= a} rho(end1)(1 - rho(end2)); if the pair never meets the
/// coupled and independent products cancel exactly.
fn two_time_draw<R: Rng>(
    d: usize,
    n: u64,
    a_lat: f64,
    b_lat: f64,
    profile: &RhoProfile,
    rng: &mut R,
) -> f64 {
    let z = walk_increment(d, b_lat - a_lat, rng);
    if z.is_origin() {
        if let RhoProfile::Constant { level } = profile {
            // tau = 0 and both endpoint densities are flat.
            return level * (1.0 - level);
        }
    }
    let origin = Site::origin(d);
    let out = pair_evolution(&origin, &z, a_lat, rng);
    if out.tau.is_some() {
        let p1 = profile.eval(&out.end_first.scaled(n));
        let p2 = profile.eval(&out.end_second.scaled(n));
        p1 * (1.0 - p2)
    } else {
        0.0
    }
}

/// Monte Carlo estimate of Cov(eta_{aN}(0), eta_{bN}(0)) at diffusive times
/// a <= b.
pub fn two_time_cov(
    d: usize,
    n: u64,
    a: f64,
    b: f64,
    profile: &RhoProfile,
    replicas: u64,
    seed: u64,
) -> Result<MomentEstimate> {
    if a > b {
        return Err(VoterlabError::ArgumentOrder(a, b));
    }
    let (a_lat, b_lat) = (a * n as f64, b * n as f64);
    let values: Vec<f64> = (0..replicas)
        .into_par_iter()
        .map(|r| {
            let mut rng = stream(seed, ModuleId::DualEngine, OP_TWO_TIME, r);
            two_time_draw(d, n, a_lat, b_lat, profile, &mut rng)
        })
        .collect();
    Ok(summarize(&values))
}

/// Density shape over the time-lag variable delta = b - a: the two-time
/// covariance decays like the walk return kernel |delta|^{-d/2}, so sampling
/// proportional to (|delta| + 1)^{1 - d/2} keeps the weighted integrand flat.
struct LagSampler {
    p: f64, // exponent of the weight
    t1: f64,
    t2: f64,
    mass_neg: f64,
    mass_pos: f64,
}

impl LagSampler {
    fn new(d: usize, t1: f64, t2: f64) -> Self {
        let p = 1.0 - d as f64 / 2.0;
        let cum = |y: f64| {
            if p == -1.0 {
                (1.0 + y).ln()
            } else {
                ((1.0 + y).powf(p + 1.0) - 1.0) / (p + 1.0)
            }
        };
        LagSampler {
            p,
            t1,
            t2,
            mass_neg: cum(t1),
            mass_pos: cum(t2),
        }
    }

    fn weight(&self, delta: f64) -> f64 {
        (delta.abs() + 1.0).powf(self.p)
    }

    fn inv_cum(&self, z: f64) -> f64 {
        if self.p == -1.0 {
            z.exp() - 1.0
        } else {
            (1.0 + z * (self.p + 1.0)).powf(1.0 / (self.p + 1.0)) - 1.0
        }
    }

    fn strip_len(&self, delta: f64) -> f64 {
        self.t1.min(self.t2 - delta) - (-delta).max(0.0)
    }

    /// Sample (a, b) in the rectangle with joint density proportional to
    /// weight(b - a); rejection on the strip length.
    fn sample<R: Rng>(&self, rng: &mut R) -> (f64, f64) {
        loop {
            let v = rng.gen_range(0.0..self.mass_neg + self.mass_pos);
            let delta = if v < self.mass_neg {
                -self.inv_cum(self.mass_neg - v)
            } else {
                self.inv_cum(v - self.mass_neg)
            };
            let len = self.strip_len(delta);
            if rng.gen_range(0.0..self.t1) >= len {
                continue;
            }
            let a = (-delta).max(0.0) + rng.gen_range(0.0..1.0) * len;
            return (a, a + delta);
        }
    }
}

/// Covariance of the scaled occupation times of the origin,
/// Cov( A_N(t1), A_N(t2) ) with A_N(t) = int_0^{tN} (eta_s(0) - E) ds / h_d(N),
/// by self-normalized importance sampling over the time rectangle with one
/// covariance draw per sampled time pair.
pub fn occupation_cov(
    d: usize,
    n: u64,
    t1: f64,
    t2: f64,
    profile: &RhoProfile,
    samples: u64,
    seed: u64,
) -> Result<MomentEstimate> {
    if t1 > t2 {
        return Err(VoterlabError::ArgumentOrder(t1, t2));
    }
    let h = h_scale(d, n as f64)?;
    let (t1n, t2n) = (t1 * n as f64, t2 * n as f64);
    let sampler = LagSampler::new(d, t1n, t2n);
    let draws: Vec<(f64, f64)> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream(seed, ModuleId::DualEngine, OP_OCCUPATION, i);
            let (a, b) = sampler.sample(&mut rng);
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            let c = two_time_draw(d, n, lo, hi, profile, &mut rng);
            let w = sampler.weight(b - a);
            (c / w, 1.0 / w)
        })
        .collect();
    let nf = samples as f64;
    let mean_u = draws.iter().map(|d| d.0).sum::<f64>() / nf;
    let mean_v = draws.iter().map(|d| d.1).sum::<f64>() / nf;
    let area = t1n * t2n;
    let value = area * mean_u / mean_v;
    // Delta-method standard error of the ratio estimator.
    let (mut suu, mut svv, mut suv) = (0.0, 0.0, 0.0);
    for (u, v) in &draws {
        suu += (u - mean_u) * (u - mean_u);
        svv += (v - mean_v) * (v - mean_v);
        suv += (u - mean_u) * (v - mean_v);
    }
    let denom = nf * (nf - 1.0).max(1.0);
    let var_ratio = (suu / (mean_v * mean_v)
        - 2.0 * mean_u * suv / (mean_v * mean_v * mean_v)
        + mean_u * mean_u * svv / (mean_v * mean_v * mean_v * mean_v))
        / denom;
    let std_error = area * var_ratio.max(0.0).sqrt();
    Ok(MomentEstimate {
        value: value / (h * h),
        std_error: std_error / (h * h),
        replicas: samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::gamma_cached;

    #[test]
    fn exact_pair_meets_with_green_probability() {
        // From adjacent starts, P(ever meet) = 1 - gamma_d; by T = 200 the
        // residual meeting probability is below ~0.7%.
        let (reps, t) = (4000u64, 200.0);
        let mut met = 0u64;
        for r in 0..reps {
            let mut rng = stream(5, ModuleId::DualEngine, 90, r);
            let out =
                simulate_coalescing_pair(&Site::origin(3), &Site::e1(3), t, &mut rng);
            if out.coalescence_time.is_some() {
                met += 1;
            }
        }
        let frac = met as f64 / reps as f64;
        let want = 1.0 - gamma_cached(3);
        let se = (want * (1.0 - want) / reps as f64).sqrt();
        assert!((frac - want).abs() < 5.0 * se + 0.01, "{frac} vs {want}");
    }

    #[test]
    fn exact_pair_merged_after_meeting() {
        for r in 0..200 {
            let mut rng = stream(6, ModuleId::DualEngine, 91, r);
            let out =
                simulate_coalescing_pair(&Site::origin(2), &Site::e1(2), 30.0, &mut rng);
            if out.coalescence_time.is_some() {
                assert_eq!(out.end_first, out.end_second);
            } else {
                assert_ne!(out.end_first, out.end_second);
            }
        }
    }

    #[test]
    fn accelerated_meeting_rate_matches_exact() {
        // Same meeting probability from both engines at a moderate horizon.
        let (reps, t) = (6000u64, 50.0);
        let count = |exact: bool| -> f64 {
            let mut met = 0u64;
            for r in 0..reps {
                let mut rng = stream(7, ModuleId::DualEngine, if exact { 92 } else { 93 }, r);
                let hit = if exact {
                    simulate_coalescing_pair(&Site::origin(3), &Site::e1(3), t, &mut rng)
                        .coalescence_time
                        .is_some()
                } else {
                    pair_evolution(&Site::origin(3), &Site::e1(3), t, &mut rng)
                        .tau
                        .is_some()
                };
                if hit {
                    met += 1;
                }
            }
            met as f64 / reps as f64
        };
        let (fe, fa) = (count(true), count(false));
        let se = (fe * (1.0 - fe) * 2.0 / reps as f64).sqrt();
        assert!((fe - fa).abs() < 5.0 * se + 0.004, "{fe} vs {fa}");
    }

    #[test]
    fn accelerated_endpoint_moments() {
        // Endpoint coordinates of the reconstructed walks have the rate-2d
        // walk variance 2T per coordinate, and the difference never carries
        // bias.
        let (reps, t) = (8000u64, 10.0);
        let (mut m1, mut m2) = (0.0f64, 0.0f64);
        for r in 0..reps {
            let mut rng = stream(8, ModuleId::DualEngine, 94, r);
            let out = pair_evolution(&Site::origin(3), &Site::new(&[4, 0, 0]), t, &mut rng);
            m1 += out.end_first.coords()[0] as f64;
            m2 += out.end_first.coords()[0].pow(2) as f64;
        }
        let mean = m1 / reps as f64;
        let var = m2 / reps as f64 - mean * mean;
        let se_mean = (2.0 * t / reps as f64).sqrt();
        assert!(mean.abs() < 5.0 * se_mean, "{mean}");
        assert!((var - 2.0 * t).abs() < 1.2, "{var}");
    }

    #[test]
    fn pair_sq_diff_reaches_constant_limit() {
        // d = 3, flat density 1/2: the limit is 2 gamma_3 / 4.
        let p = RhoProfile::Constant { level: 0.5 };
        let est = pair_sq_diff(400, 0.5, &Site::origin(3), &Site::e1(3), &p, 30_000, 21);
        let want = 2.0 * gamma_cached(3) * 0.25;
        assert!(
            (est.value - want).abs() < 4.0 * est.std_error + 0.02 * want,
            "{} vs {want} (se {})",
            est.value,
            est.std_error
        );
    }

    #[test]
    fn two_time_cov_equal_times_is_bernoulli_variance() {
        // At a = b with a flat profile, Var(eta(0)) = m(1 - m) and the
        // shortcut makes the estimator exact.
        let p = RhoProfile::Constant { level: 0.3 };
        let est = two_time_cov(3, 100, 0.5, 0.5, &p, 500, 3).unwrap();
        assert!((est.value - 0.21).abs() < 1e-12);
        assert!(est.std_error < 1e-12);
    }

    #[test]
    fn two_time_cov_decays_with_lag() {
        let p = RhoProfile::Constant { level: 0.5 };
        let near = two_time_cov(3, 64, 0.5, 0.55, &p, 30_000, 4).unwrap();
        let far = two_time_cov(3, 64, 0.5, 3.0, &p, 30_000, 5).unwrap();
        assert!(
            near.value - far.value > 3.0 * (near.std_error + far.std_error),
            "near {} far {}",
            near.value,
            far.value
        );
        assert!(far.value > 0.0);
    }

    #[test]
    fn two_time_cov_rejects_reversed_times() {
        let p = RhoProfile::Constant { level: 0.5 };
        assert!(two_time_cov(3, 64, 1.0, 0.5, &p, 10, 0).is_err());
    }

    #[test]
    fn lag_sampler_frequencies() {
        // Empirical lag density matches weight(delta) * strip(delta) and the
        // drawn pairs stay in the rectangle.
        let s = LagSampler::new(3, 10.0, 20.0);
        let mut rng = stream(9, ModuleId::DualEngine, 95, 0);
        let reps = 60_000;
        let mut in_band = 0u64;
        for _ in 0..reps {
            let (a, b) = s.sample(&mut rng);
            assert!((0.0..=10.0).contains(&a));
            assert!((0.0..=20.0).contains(&b));
            if (b - a).abs() <= 1.0 {
                in_band += 1;
            }
        }
        // Predicted probability of |delta| <= 1 under the sampler.
        let quad = |lo: f64, hi: f64| {
            let steps = 4000;
            let h = (hi - lo) / steps as f64;
            (0..steps)
                .map(|i| {
                    let d = lo + (i as f64 + 0.5) * h;
                    s.weight(d) * s.strip_len(d) * h
                })
                .sum::<f64>()
        };
        let want = quad(-1.0, 1.0) / quad(-10.0, 20.0);
        let frac = in_band as f64 / reps as f64;
        let se = (want * (1.0 - want) / reps as f64).sqrt();
        assert!((frac - want).abs() < 5.0 * se, "{frac} vs {want}");
    }

    #[test]
    fn importance_sampling_recovers_known_integral() {
        // Drive the IS machinery with a deterministic integrand of known
        // integral over the rectangle to validate estimate and error bar.
        let (t1, t2) = (6.0, 9.0);
        let sampler = LagSampler::new(3, t1, t2);
        let samples = 40_000u64;
        let draws: Vec<(f64, f64)> = (0..samples)
            .map(|i| {
                let mut rng = stream(10, ModuleId::DualEngine, 96, i);
                let (a, b) = sampler.sample(&mut rng);
                let c = (-(b - a).abs()).exp();
                let w = sampler.weight(b - a);
                (c / w, 1.0 / w)
            })
            .collect();
        let mean_u = draws.iter().map(|d| d.0).sum::<f64>() / samples as f64;
        let mean_v = draws.iter().map(|d| d.1).sum::<f64>() / samples as f64;
        let got = t1 * t2 * mean_u / mean_v;
        // int_0^{t1} int_0^{t2} e^{-|b-a|} db da, closed form.
        let want = 2.0 * t1 - 1.0 + (-t1).exp() - (-(t2 - t1)).exp() + (-t2).exp();
        assert!((got - want).abs() < 0.02 * want, "{got} vs {want}");
    }

    #[test]
    fn occupation_cov_rejects_reversed_times() {
        let p = RhoProfile::Constant { level: 0.5 };
        assert!(occupation_cov(3, 64, 1.0, 0.5, &p, 10, 0).is_err());
    }

    #[test]
    fn occupation_var_small_n_direction() {
        // Cheap smoke of the full pipeline: d = 5 occupation variance at a
        // small scale is positive and within a loose band of the limit.
        let p = RhoProfile::Constant { level: 0.5 };
        let est = occupation_cov(5, 64, 1.0, 1.0, &p, 30_000, 12).unwrap();
        let limit = crate::limits::ito_variance(5, 1.0, &p).unwrap();
        assert!(est.value > 0.0);
        assert!(
            (est.value - limit).abs() < 0.5 * limit + 4.0 * est.std_error,
            "{} vs {limit}",
            est.value
        );
    }
}
