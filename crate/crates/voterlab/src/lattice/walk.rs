//! Path-level sampling of the rate-2d simple random walk.

use super::Site;
use rand::Rng;
use rand_distr::{Distribution, Exp, Poisson};

/// A realized walk path on [0, t_max]: `positions[0]` is the start,
/// `positions[i+1]` is reached at `jump_times[i]`.
#[derive(Debug, Clone)]
pub struct WalkPath {
    pub jump_times: Vec<f64>,
    pub positions: Vec<Site>,
    pub t_max: f64,
}

impl WalkPath {
    pub fn position_at(&self, t: f64) -> Site {
        assert!((0.0..=self.t_max).contains(&t));
        // jump_times is sorted; number of jumps by time t.
        let n = self.jump_times.partition_point(|&s| s <= t);
        self.positions[n]
    }

    pub fn end(&self) -> Site {
        *self.positions.last().unwrap()
    }
}

/// Sample the walk started at `start` on [0, t_max], jump by jump.
pub fn sample_walk<R: Rng>(start: &Site, t_max: f64, rng: &mut R) -> WalkPath {
    let d = start.dim();
    let exp = Exp::new(2.0 * d as f64).unwrap();
    let mut jump_times = Vec::new();
    let mut positions = vec![*start];
    let mut t = exp.sample(rng);
    let mut here = *start;
    while t <= t_max {
        let dir = rng.gen_range(0..2 * d);
        let mut c: Vec<i64> = here.coords().to_vec();
        c[dir / 2] += if dir % 2 == 0 { 1 } else { -1 };
        let next = Site::new(&c);
        jump_times.push(t);
        positions.push(next);
        here = next;
        t += exp.sample(rng);
    }
    WalkPath {
        jump_times,
        positions,
        t_max,
    }
}

/// Net displacement of the walk over a window of length `dt`, sampled without
/// resolving individual jumps: each coordinate moves by the difference of two
/// independent Poisson(dt) counts.
pub fn walk_increment<R: Rng>(d: usize, dt: f64, rng: &mut R) -> Site {
    assert!(dt >= 0.0);
    let mut c = vec![0i64; d];
    if dt > 0.0 {
        let pois = Poisson::new(dt).unwrap();
        for slot in c.iter_mut() {
            *slot = pois.sample(rng) as i64 - pois.sample(rng) as i64;
        }
    }
    Site::new(&c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::kernel_1d;
    use crate::streams::{stream, ModuleId};

    #[test]
    fn path_is_nearest_neighbor_and_sorted() {
        let mut rng = stream(1, ModuleId::LatticeRw, 10, 0);
        let p = sample_walk(&Site::origin(3), 5.0, &mut rng);
        assert!(p.jump_times.windows(2).all(|w| w[0] <= w[1]));
        for w in p.positions.windows(2) {
            assert_eq!(w[1].sub(&w[0]).l1_norm(), 1);
        }
        assert_eq!(p.positions.len(), p.jump_times.len() + 1);
    }

    #[test]
    fn position_lookup_consistent() {
        let mut rng = stream(2, ModuleId::LatticeRw, 10, 0);
        let p = sample_walk(&Site::origin(2), 3.0, &mut rng);
        assert_eq!(p.position_at(0.0), Site::origin(2));
        assert_eq!(p.position_at(3.0), p.end());
        if let Some(&t0) = p.jump_times.first() {
            assert_eq!(p.position_at(t0 * 0.5), p.positions[0]);
            assert_eq!(p.position_at(t0), p.positions[1]);
        }
    }

    #[test]
    fn jump_count_rate() {
        // Number of jumps over [0,t] is Poisson(2 d t).
        let (d, t, reps) = (3usize, 2.0, 4000usize);
        let mut total = 0usize;
        for r in 0..reps {
            let mut rng = stream(3, ModuleId::LatticeRw, 11, r as u64);
            total += sample_walk(&Site::origin(d), t, &mut rng).jump_times.len();
        }
        let mean = total as f64 / reps as f64;
        let expect = 2.0 * d as f64 * t;
        let se = (expect / reps as f64).sqrt();
        assert!((mean - expect).abs() < 5.0 * se, "mean {mean} vs {expect}");
    }

    #[test]
    fn increment_matches_kernel() {
        // Empirical law of one coordinate of walk_increment vs e^{-2t} I_k(2t).
        let (t, reps) = (0.8, 20000usize);
        let mut counts = [0usize; 9]; // k = -4..=4 with clamp
        for r in 0..reps {
            let mut rng = stream(4, ModuleId::LatticeRw, 12, r as u64);
            let s = walk_increment(2, t, &mut rng);
            let k = s.coords()[0].clamp(-4, 4);
            counts[(k + 4) as usize] += 1;
        }
        for k in -2i64..=2 {
            let p = kernel_1d(t, k);
            let freq = counts[(k + 4) as usize] as f64 / reps as f64;
            let se = (p * (1.0 - p) / reps as f64).sqrt();
            assert!((freq - p).abs() < 5.0 * se, "k={k}: {freq} vs {p}");
        }
    }

    #[test]
    fn increment_moments() {
        // Each coordinate has mean 0 and variance 2t.
        let (t, reps) = (3.0, 30000usize);
        let (mut s1, mut s2) = (0.0f64, 0.0f64);
        for r in 0..reps {
            let mut rng = stream(5, ModuleId::LatticeRw, 13, r as u64);
            let x = walk_increment(1, t, &mut rng).coords()[0] as f64;
            s1 += x;
            s2 += x * x;
        }
        let mean = s1 / reps as f64;
        let var = s2 / reps as f64 - mean * mean;
        assert!(mean.abs() < 5.0 * (2.0 * t / reps as f64).sqrt());
        assert!((var - 2.0 * t).abs() < 0.15, "var {var}");
    }
}
