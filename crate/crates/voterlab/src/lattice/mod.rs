//! Continuous-time simple random walk on Z^d: sampling, transition kernels,
//! hitting/escape probabilities and the Green-type integrals entering the
//! limit constants.

mod constants;
mod green;
mod kernel;
mod walk;

pub use constants::{ConstantEntry, ConstantsTable};
pub use green::{
    g_big_n, g_big_n_lattice_sum, gamma, gamma_cached, green_function, hit_prob, sum_g_sq,
    theta_green_integral, v_kernel, Estimate, GammaMethod, VKernelTable,
};
pub use kernel::{kernel_1d, kernel_row, kernel_row_sum, transition_prob, truncation_radius};
pub use walk::{sample_walk, walk_increment, WalkPath};

pub const MAX_DIM: usize = 8;

/// A point of Z^d. Fixed-capacity storage so hot loops stay allocation-free.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Site {
    d: u8,
    c: [i64; MAX_DIM],
}

impl Site {
    pub fn new(coords: &[i64]) -> Self {
        assert!((1..=MAX_DIM).contains(&coords.len()), "dimension out of range");
        let mut c = [0i64; MAX_DIM];
        c[..coords.len()].copy_from_slice(coords);
        Site {
            d: coords.len() as u8,
            c,
        }
    }

    pub fn origin(d: usize) -> Self {
        assert!((1..=MAX_DIM).contains(&d));
        Site {
            d: d as u8,
            c: [0; MAX_DIM],
        }
    }

    /// First unit vector e_1.
    pub fn e1(d: usize) -> Self {
        let mut s = Site::origin(d);
        s.c[0] = 1;
        s
    }

    pub fn dim(&self) -> usize {
        self.d as usize
    }

    pub fn coords(&self) -> &[i64] {
        &self.c[..self.d as usize]
    }

    pub fn is_origin(&self) -> bool {
        self.coords().iter().all(|&x| x == 0)
    }

    pub fn l1_norm(&self) -> i64 {
        self.coords().iter().map(|x| x.abs()).sum()
    }

    pub fn l2_norm_sq(&self) -> i64 {
        self.coords().iter().map(|x| x * x).sum()
    }

    pub fn sub(&self, other: &Site) -> Site {
        assert_eq!(self.d, other.d);
        let mut out = *self;
        for i in 0..self.dim() {
            out.c[i] -= other.c[i];
        }
        out
    }

    pub fn add(&self, other: &Site) -> Site {
        assert_eq!(self.d, other.d);
        let mut out = *self;
        for i in 0..self.dim() {
            out.c[i] += other.c[i];
        }
        out
    }

    /// Scaled embedding x / sqrt(N) into R^d.
    pub fn scaled(&self, n: u64) -> Vec<f64> {
        let root = (n as f64).sqrt();
        self.coords().iter().map(|&x| x as f64 / root).collect()
    }

    /// The 2d lattice neighbors.
    pub fn neighbors(&self) -> Vec<Site> {
        let mut out = Vec::with_capacity(2 * self.dim());
        for i in 0..self.dim() {
            for sign in [1i64, -1] {
                let mut s = *self;
                s.c[i] += sign;
                out.push(s);
            }
        }
        out
    }
}

impl std::fmt::Debug for Site {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Site{:?}", self.coords())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn neighbors_d1() {
        let n = Site::new(&[0]).neighbors();
        assert_eq!(n.len(), 2);
        assert!(n.contains(&Site::new(&[1])));
        assert!(n.contains(&Site::new(&[-1])));
    }

    #[test]
    fn neighbors_d3_origin() {
        let n = Site::origin(3).neighbors();
        assert_eq!(n.len(), 6);
        for s in &n {
            assert_eq!(s.l1_norm(), 1);
        }
    }

    #[test]
    fn neighbors_d2_offset() {
        let n = Site::new(&[5, -3]).neighbors();
        let expect = [[6, -3], [4, -3], [5, -2], [5, -4]];
        assert_eq!(n.len(), 4);
        for e in expect {
            assert!(n.contains(&Site::new(&e)));
        }
    }
}
