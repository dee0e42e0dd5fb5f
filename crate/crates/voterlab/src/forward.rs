//! Exact forward simulation of the voter model on an odd-sided torus.
//!
//! Dynamics: every directed edge (x, x + e) carries rate 1; at an event the
//! opinion at x is replaced by the one at x + e. The total event count over
//! [0, T] is Poisson(2d L^d T) and event labels are iid uniform, so the
//! simulation draws the count once and replays unlabeled events; the actual
//! event times are iid uniforms and are materialized lazily — only when a
//! watched site flips — through the order-statistic bridge
//! t_j = t0 + (T - t0) Beta(j - i0, K - j + 1).

use std::io::{Read, Write};
use std::path::Path;

use rand::RngCore;
use rand_distr::{Beta, Distribution, Poisson};

use crate::error::{Result, VoterlabError};
use crate::lattice::Site;
use crate::limits::h_scale;
use crate::profile::RhoProfile;
use crate::streams::{site_stream, stream, ModuleId};

const OP_RUN: u32 = 1;

/// Hard per-run event budget; beyond this a run is refused rather than
/// silently taking hours.
const MAX_EVENTS: f64 = 4.0e9;

/// Smallest odd torus side such that the probability of any dual influence
/// wrapping around within lattice time `t_lat` is below `tol`.
///
/// Per coordinate the influence front is a rate-4 difference walk; the
/// Chernoff bound for its displacement m over time T' is
/// exp(-(m asinh(m / 4T') - sqrt(m^2 + 16 T'^2) + 4T')).
pub fn choose_torus_side(d: usize, t_lat: f64, tol: f64) -> usize {
    let mut side = 3usize;
    loop {
        let m = ((side - 1) / 2) as f64;
        let tp = 4.0 * t_lat;
        let exponent = m * (m / tp).asinh() - (m * m + tp * tp).sqrt() + tp;
        if 2.0 * d as f64 * (-exponent).exp() <= tol {
            return side;
        }
        side += 2;
    }
}

/// Packed-bit opinion field on the torus {-(L-1)/2, ..., (L-1)/2}^d.
pub struct TorusState {
    d: usize,
    side: usize,
    n_sites: usize,
    words: Vec<u64>,
}

impl TorusState {
    pub fn new(d: usize, side: usize) -> Self {
        assert!(side >= 3 && side % 2 == 1, "torus side must be odd >= 3");
        let n_sites = side.pow(d as u32);
        TorusState {
            d,
            side,
            n_sites,
            words: vec![0u64; n_sites.div_ceil(64)],
        }
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    #[inline]
    pub fn get(&self, idx: usize) -> bool {
        self.words[idx >> 6] >> (idx & 63) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, idx: usize, bit: bool) {
        let mask = 1u64 << (idx & 63);
        if bit {
            self.words[idx >> 6] |= mask;
        } else {
            self.words[idx >> 6] &= !mask;
        }
    }

    pub fn ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Index of a lattice site (coordinates in [-(L-1)/2, (L-1)/2]).
    pub fn index_of(&self, x: &Site) -> usize {
        let half = (self.side as i64 - 1) / 2;
        let mut idx = 0usize;
        for &c in x.coords().iter().rev() {
            assert!(c.abs() <= half, "site outside torus");
            idx = idx * self.side + (c + half) as usize;
        }
        idx
    }

    /// Lattice coordinates of an index.
    pub fn site_of(&self, mut idx: usize) -> Site {
        let half = (self.side as i64 - 1) / 2;
        let mut c = vec![0i64; self.d];
        for slot in c.iter_mut() {
            *slot = (idx % self.side) as i64 - half;
            idx /= self.side;
        }
        Site::new(&c)
    }

    /// Neighbor index along `axis` in direction `delta` (+1/-1), wrapping.
    #[inline]
    pub fn neighbor(&self, idx: usize, axis: usize, positive: bool) -> usize {
        let stride = self.side.pow(axis as u32);
        let coord = idx / stride % self.side;
        if positive {
            if coord + 1 == self.side {
                idx - (self.side - 1) * stride
            } else {
                idx + stride
            }
        } else if coord == 0 {
            idx + (self.side - 1) * stride
        } else {
            idx - stride
        }
    }
}

fn site_key(x: &Site) -> u64 {
    let mut k = 0xcbf2_9ce4_8422_2325u64;
    for &c in x.coords() {
        k ^= c as u64;
        k = k.wrapping_mul(0x1000_0000_01b3);
    }
    k
}

/// Result of one forward run: flip histories of the watched sites.
pub struct ForwardRun {
    pub t_max: f64,
    pub watched: Vec<Site>,
    pub initial_bits: Vec<bool>,
    /// Per watched site: (time, new value), time-ordered.
    pub flips: Vec<Vec<(f64, bool)>>,
    pub event_count: u64,
}

impl ForwardRun {
    fn watched_pos(&self, w: usize) -> &[(f64, bool)] {
        &self.flips[w]
    }

    /// Opinion of watched site `w` at time t.
    pub fn bit_at(&self, w: usize, t: f64) -> bool {
        let flips = self.watched_pos(w);
        let k = flips.partition_point(|&(s, _)| s <= t);
        if k == 0 {
            self.initial_bits[w]
        } else {
            flips[k - 1].1
        }
    }

    /// Occupation time int_0^t eta_s(w) ds.
    pub fn occupation(&self, w: usize, t: f64) -> f64 {
        let t = t.min(self.t_max);
        let mut acc = 0.0;
        let mut last_t = 0.0;
        let mut bit = self.initial_bits[w];
        for &(s, b) in self.watched_pos(w) {
            if s >= t {
                break;
            }
            if bit {
                acc += s - last_t;
            }
            last_t = s;
            bit = b;
        }
        if bit {
            acc += t - last_t;
        }
        acc
    }
}

/// Run the voter model to lattice time `t_max`, initial law product
/// Bernoulli(rho(x / sqrt(N))), recording flips of the watched sites.
///
/// The initial configuration is sampled with per-site streams, so it is
/// independent of the enumeration order and consistent across torus sizes.
pub fn run_voter(
    d: usize,
    side: usize,
    n: u64,
    t_max: f64,
    profile: &RhoProfile,
    watched: &[Site],
    replica: u64,
    seed: u64,
) -> Result<ForwardRun> {
    profile.validate(d)?;
    if side < 3 || side % 2 == 0 {
        return Err(VoterlabError::InvalidConfig(format!(
            "torus side {side} must be odd and >= 3"
        )));
    }
    let mut state = TorusState::new(d, side);
    let rate = 2.0 * d as f64 * state.n_sites() as f64;
    let predicted = rate * t_max;
    if predicted > MAX_EVENTS {
        return Err(VoterlabError::ResourceBudget {
            predicted,
            budget: MAX_EVENTS,
        });
    }
    for idx in 0..state.n_sites() {
        let x = state.site_of(idx);
        let mut rng = site_stream(seed, replica, site_key(&x));
        state.set(idx, profile.sample_initial_bit(&x, n, &mut rng));
    }
    let watched_idx: Vec<usize> = watched.iter().map(|x| state.index_of(x)).collect();
    let initial_bits: Vec<bool> = watched_idx.iter().map(|&i| state.get(i)).collect();
    let mut flips: Vec<Vec<(f64, bool)>> = vec![Vec::new(); watched.len()];

    let mut rng = stream(seed, ModuleId::ForwardSim, OP_RUN, replica);
    let k_total = if predicted > 0.0 {
        Poisson::new(predicted).unwrap().sample(&mut rng) as u64
    } else {
        0
    };
    let labels = (state.n_sites() * 2 * d) as u64;
    let (mut bridge_i, mut bridge_t) = (0u64, 0.0f64);
    for j in 1..=k_total {
        let r = rng.next_u64() % labels;
        let site = (r / (2 * d as u64)) as usize;
        let dir = (r % (2 * d as u64)) as usize;
        let nbr = state.neighbor(site, dir / 2, dir % 2 == 0);
        let src = state.get(nbr);
        if src != state.get(site) {
            state.set(site, src);
            if let Some(w) = watched_idx.iter().position(|&i| i == site) {
                // Materialize this event's time conditional on the last one.
                let b = Beta::new((j - bridge_i) as f64, (k_total - j + 1) as f64)
                    .unwrap()
                    .sample(&mut rng);
                bridge_t += (t_max - bridge_t) * b;
                bridge_i = j;
                flips[w].push((bridge_t, src));
            }
        }
    }
    Ok(ForwardRun {
        t_max,
        watched: watched.to_vec(),
        initial_bits,
        flips,
        event_count: k_total,
    })
}

/// Cumulative centering integral int_0^t E eta_s(x) ds for a watched site,
/// tabulated on a uniform grid (exact for constant profiles).
pub struct Centering {
    t_max: f64,
    cum: Vec<f64>,
}

impl Centering {
    pub fn build(profile: &RhoProfile, n: u64, x: &Site, t_max: f64, steps: usize) -> Self {
        assert!(steps >= 2 && t_max > 0.0);
        let h = t_max / steps as f64;
        let mut cum = Vec::with_capacity(steps + 1);
        cum.push(0.0);
        let mut prev = profile.mean_occupancy(0.0, n, x);
        let mut acc = 0.0;
        for i in 1..=steps {
            let cur = profile.mean_occupancy(i as f64 * h, n, x);
            acc += 0.5 * h * (prev + cur);
            cum.push(acc);
            prev = cur;
        }
        Centering { t_max, cum }
    }

    /// Interpolated value of the cumulative integral at lattice time t.
    pub fn value(&self, t: f64) -> f64 {
        let steps = self.cum.len() - 1;
        let pos = (t / self.t_max * steps as f64).clamp(0.0, steps as f64);
        let i = (pos.floor() as usize).min(steps - 1);
        let frac = pos - i as f64;
        self.cum[i] + frac * (self.cum[i + 1] - self.cum[i])
    }
}

/// Centered, h_d-scaled occupation path of a watched site on a diffusive
/// time grid: ( int_0^{tN} eta - int_0^{tN} E eta ) / h_d(N).
pub fn scaled_occupation(
    run: &ForwardRun,
    w: usize,
    centering: &Centering,
    d: usize,
    n: u64,
    times: &[f64],
) -> Result<Vec<f64>> {
    let h = h_scale(d, n as f64)?;
    times
        .iter()
        .map(|&t| {
            let t_lat = t * n as f64;
            if t_lat > run.t_max + 1e-9 {
                return Err(VoterlabError::InvalidConfig(format!(
                    "time {t} beyond simulated horizon"
                )));
            }
            Ok((run.occupation(w, t_lat) - centering.value(t_lat)) / h)
        })
        .collect()
}

/// Persist a flip history: header (t_max, initial bit, count) then (time,
/// bit) records, little-endian.
pub fn write_flip_log(
    path: &Path,
    t_max: f64,
    initial_bit: bool,
    flips: &[(f64, bool)],
) -> Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    out.write_all(&t_max.to_le_bytes())?;
    out.write_all(&[initial_bit as u8])?;
    out.write_all(&(flips.len() as u64).to_le_bytes())?;
    for &(t, b) in flips {
        out.write_all(&t.to_le_bytes())?;
        out.write_all(&[b as u8])?;
    }
    Ok(())
}

pub fn read_flip_log(path: &Path) -> Result<(f64, bool, Vec<(f64, bool)>)> {
    let mut input = std::io::BufReader::new(std::fs::File::open(path)?);
    let mut f8 = [0u8; 8];
    let mut b1 = [0u8; 1];
    input.read_exact(&mut f8)?;
    let t_max = f64::from_le_bytes(f8);
    input.read_exact(&mut b1)?;
    let initial = b1[0] != 0;
    input.read_exact(&mut f8)?;
    let count = u64::from_le_bytes(f8);
    let mut flips = Vec::with_capacity(count as usize);
    for _ in 0..count {
        input.read_exact(&mut f8)?;
        let t = f64::from_le_bytes(f8);
        input.read_exact(&mut b1)?;
        flips.push((t, b1[0] != 0));
    }
    Ok((t_max, initial, flips))
}
