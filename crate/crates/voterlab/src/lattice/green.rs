//! Green-type time integrals of the walk kernel.
//!
//! Everything here reduces to integrals of the factorized kernel
//! p_t(0,x) = prod_i e^{-2t} I_{x_i}(2t). The strategy is uniform: fixed
//! Gauss-Legendre panels over a geometric layout for the body, plus a
//! closed-form power tail from the Bessel asymptotic series. Sharing one
//! quadrature across related quantities preserves exact identities such as
//! 2d (G(0) - G(e_1)) = 1 to full precision.

use std::collections::HashMap;
use std::sync::Mutex;

use rand::Rng;

use super::kernel::{kernel_1d, kernel_row, kernel_row_sum, transition_prob, truncation_radius};
use super::Site;
use crate::error::{Result, VoterlabError};
use crate::quad::{gauss_legendre, geometric_panels, panel_integrate};
use crate::streams::{stream, ModuleId};

/// A numeric value with a (conservative) absolute error bound.
#[derive(Debug, Clone, Copy)]
pub struct Estimate {
    pub value: f64,
    pub error_bound: f64,
}

/// How to produce the escape probability gamma_d.
#[derive(Debug, Clone, Copy)]
pub enum GammaMethod {
    /// Deterministic, via the Green function at the origin.
    Green,
    /// Monte Carlo escape runs; an independent stochastic cross-check.
    MonteCarlo { replicas: u64, seed: u64 },
}

const PANEL_ORDER: usize = 24;
const FIRST_PANEL: f64 = 0.125;

/// Closed-form tail int_{t0}^inf t^extra * p_t(0,x) dt from the asymptotic
/// series e^{-2t} I_k(2t) ~ (4 pi t)^{-1/2} (1 + a1/t + a2/t^2 + a3/t^3).
fn asymptotic_tail(coords: &[i64], extra: i32, t0: f64) -> f64 {
    let d = coords.len();
    // Per-coordinate series coefficients in powers of 1/t.
    let mut prod = [1.0f64, 0.0, 0.0, 0.0];
    for &k in coords {
        let mu = 4.0 * (k as f64) * (k as f64);
        let a = [
            1.0,
            -(mu - 1.0) / 16.0,
            (mu - 1.0) * (mu - 9.0) / 512.0,
            -(mu - 1.0) * (mu - 9.0) * (mu - 25.0) / 24576.0,
        ];
        let mut next = [0.0f64; 4];
        for (i, &pi) in prod.iter().enumerate() {
            for (j, &aj) in a.iter().enumerate() {
                if i + j < 4 {
                    next[i + j] += pi * aj;
                }
            }
        }
        prod = next;
    }
    let pref = (4.0 * std::f64::consts::PI).powf(-(d as f64) / 2.0);
    let mut tail = 0.0;
    for (j, &cj) in prod.iter().enumerate() {
        // int_{t0}^inf t^p dt with p = extra - d/2 - j; requires p < -1.
        let p = extra as f64 - d as f64 / 2.0 - j as f64;
        debug_assert!(p < -1.0);
        tail += cj * t0.powf(p + 1.0) / (-(p + 1.0));
    }
    pref * tail
}

/// Split point for body/tail: large enough that the asymptotic series has
/// converged for every order that appears.
fn tail_split(coords: &[i64]) -> f64 {
    let kmax = coords.iter().map(|k| k.abs()).max().unwrap_or(0) as f64;
    (8.0 * kmax * kmax).max(400.0)
}

/// Green function G(x) = int_0^inf p_t(0,x) dt of the rate-2d walk, d >= 3.
pub fn green_function(x: &Site) -> Result<f64> {
    let d = x.dim();
    if d < 3 {
        return Err(VoterlabError::DivergentIntegral(d));
    }
    let t0 = tail_split(x.coords());
    let body = panel_integrate(
        &|t| transition_prob(t, x),
        &geometric_panels(FIRST_PANEL, t0),
        PANEL_ORDER,
    );
    Ok(body + asymptotic_tail(x.coords(), 0, t0))
}

fn green_origin_cached(d: usize) -> Result<f64> {
    static CACHE: Mutex<Option<HashMap<usize, f64>>> = Mutex::new(None);
    let mut guard = CACHE.lock().unwrap();
    let map = guard.get_or_insert_with(HashMap::new);
    if let Some(&v) = map.get(&d) {
        return Ok(v);
    }
    let v = green_function(&Site::origin(d))?;
    map.insert(d, v);
    Ok(v)
}

/// Probability that the walk started at x ever hits the origin: G(x)/G(0).
pub fn hit_prob(x: &Site) -> Result<f64> {
    if x.is_origin() {
        return Ok(1.0);
    }
    Ok(green_function(x)? / green_origin_cached(x.dim())?)
}

/// Escape probability gamma_d = P(walk from the origin never returns).
pub fn gamma(d: usize, method: GammaMethod) -> Result<Estimate> {
    if d < 3 {
        return Err(VoterlabError::InvalidDimension(d));
    }
    match method {
        GammaMethod::Green => Ok(Estimate {
            // 1 / (2d G(0)): one jump takes mean time 1/(2d), so 2d G(0) is
            // the expected number of visits to the origin.
            value: 1.0 / (2.0 * d as f64 * green_origin_cached(d)?),
            error_bound: 1e-9,
        }),
        GammaMethod::MonteCarlo { replicas, seed } => gamma_monte_carlo(d, replicas, seed),
    }
}

fn gamma_monte_carlo(d: usize, replicas: u64, seed: u64) -> Result<Estimate> {
    // Walk the embedded discrete chain until it returns to the origin or
    // leaves a ball; on exit at e the residual return probability is the
    // exact hitting probability G(e)/G(0), so the estimator is unbiased.
    let radius_sq = 900i64;
    let mut hit_cache: HashMap<Site, f64> = HashMap::new();
    let (mut sum, mut sum_sq) = (0.0f64, 0.0f64);
    for r in 0..replicas {
        let mut rng = stream(seed, ModuleId::LatticeRw, 0, r);
        let mut here = Site::origin(d);
        let sample = loop {
            let dir = rng.gen_range(0..2 * d);
            let mut c: Vec<i64> = here.coords().to_vec();
            c[dir / 2] += if dir % 2 == 0 { 1 } else { -1 };
            here = Site::new(&c);
            if here.is_origin() {
                break 0.0;
            }
            if here.l2_norm_sq() >= radius_sq {
                let p = match hit_cache.get(&here) {
                    Some(&p) => p,
                    None => {
                        let p = hit_prob(&here)?;
                        hit_cache.insert(here, p);
                        p
                    }
                };
                break 1.0 - p;
            }
        };
        sum += sample;
        sum_sq += sample * sample;
    }
    let n = replicas as f64;
    let mean = sum / n;
    let var = (sum_sq / n - mean * mean).max(0.0) / (n - 1.0).max(1.0) * n;
    Ok(Estimate {
        value: mean,
        error_bound: 3.0 * (var / n).sqrt(),
    })
}

/// Cached deterministic gamma_d.
pub fn gamma_cached(d: usize) -> f64 {
    static CACHE: Mutex<Option<HashMap<usize, f64>>> = Mutex::new(None);
    let mut guard = CACHE.lock().unwrap();
    let map = guard.get_or_insert_with(HashMap::new);
    if let Some(&v) = map.get(&d) {
        return v;
    }
    let v = gamma(d, GammaMethod::Green).expect("gamma requires d >= 3").value;
    map.insert(d, v);
    v
}

/// int_0^inf theta p_theta(0,0) d theta, finite only for d >= 5.
pub fn theta_green_integral(d: usize) -> Result<f64> {
    if d < 5 {
        return Err(VoterlabError::DivergentIntegral(d));
    }
    let zeros = vec![0i64; d];
    let t0 = 400.0;
    let body = panel_integrate(
        &|t| t * kernel_1d(t, 0).powi(d as i32),
        &geometric_panels(FIRST_PANEL, t0),
        PANEL_ORDER,
    );
    Ok(body + asymptotic_tail(&zeros, 1, t0))
}

/// Panel edges for resolvent-type integrals int e^{-t/N} (...) dt: geometric
/// panels resolve the kernel transition near t ~ 1, then panels of width 2N
/// track the exponential out to 46N (discarded mass < 1e-19 relative).
fn resolvent_edges(n: f64) -> Vec<f64> {
    let mut edges = geometric_panels(FIRST_PANEL.min(n), 4.0 * n);
    let mut e = 6.0 * n;
    while e < 46.0 * n - 1e-9 {
        edges.push(e);
        e += 2.0 * n;
    }
    edges.push(46.0 * n);
    edges
}

/// Resolvent g_N(x) = int_0^inf e^{-t/N} p_t(0,x) dt.
pub fn g_big_n(n: u64, x: &Site) -> f64 {
    assert!(n >= 1);
    let nf = n as f64;
    panel_integrate(
        &|t| (-t / nf).exp() * transition_prob(t, x),
        &resolvent_edges(nf),
        PANEL_ORDER,
    )
}

/// The full lattice sum sum_x g_N(x), evaluated through the factorized
/// truncated kernel sums. Equals N exactly; the discrepancy measures the
/// combined truncation and quadrature error.
pub fn g_big_n_lattice_sum(n: u64, d: usize) -> f64 {
    assert!(n >= 1);
    let nf = n as f64;
    panel_integrate(
        &|t| (-t / nf).exp() * kernel_row_sum(t, truncation_radius(t)).powi(d as i32),
        &resolvent_edges(nf),
        16,
    )
}

/// sum_x g_N(x)^2 via the exact reduction int_0^inf u e^{-u/N} p_u(0,0) du.
pub fn sum_g_sq(n: u64, d: usize) -> f64 {
    assert!(n >= 1);
    let nf = n as f64;
    panel_integrate(
        &|u| u * (-u / nf).exp() * kernel_1d(u, 0).powi(d as i32),
        &resolvent_edges(nf),
        PANEL_ORDER,
    )
}

/// Truncated Green kernel v(tau, x) = int_0^tau p_s(0,x) ds.
pub fn v_kernel(tau: f64, x: &Site) -> f64 {
    assert!(tau >= 0.0);
    if tau == 0.0 {
        return 0.0;
    }
    panel_integrate(
        &|s| transition_prob(s, x),
        &geometric_panels((tau / 64.0).min(FIRST_PANEL), tau),
        PANEL_ORDER,
    )
}

/// Tabulated evaluation of v(tau, .): the time quadrature is fixed once and
/// per-node one-dimensional kernel rows are cached, so a pointwise evaluation
/// is a weighted product lookup. Used where v is summed over many sites.
pub struct VKernelTable {
    tau: f64,
    kmax: usize,
    weights: Vec<f64>,
    rows: Vec<Vec<f64>>,
}

impl VKernelTable {
    pub fn new(tau: f64, kmax: usize) -> Self {
        assert!(tau > 0.0);
        let edges = geometric_panels((tau / 64.0).min(FIRST_PANEL), tau);
        let (gx, gw) = gauss_legendre(PANEL_ORDER);
        let mut weights = Vec::new();
        let mut rows = Vec::new();
        for pair in edges.windows(2) {
            let half = 0.5 * (pair[1] - pair[0]);
            let mid = 0.5 * (pair[0] + pair[1]);
            for (xi, wi) in gx.iter().zip(&gw) {
                let s = mid + half * xi;
                weights.push(half * wi);
                rows.push(kernel_row(s, kmax));
            }
        }
        VKernelTable {
            tau,
            kmax,
            weights,
            rows,
        }
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn kmax(&self) -> usize {
        self.kmax
    }

    pub fn eval(&self, x: &Site) -> f64 {
        let mut total = 0.0;
        'node: for (w, row) in self.weights.iter().zip(&self.rows) {
            let mut prod = *w;
            for &k in x.coords() {
                let k = k.unsigned_abs() as usize;
                if k > self.kmax {
                    continue 'node;
                }
                prod *= row[k];
            }
            total += prod;
        }
        total
    }
}
