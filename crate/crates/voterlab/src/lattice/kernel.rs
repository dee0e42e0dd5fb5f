//! Transition kernels of the rate-2d continuous-time simple random walk.
//!
//! The kernel factorizes over coordinates: each coordinate is an independent
//! rate-2 walk with one-dimensional kernel e^{-2t} I_k(2t).

use super::Site;
use crate::bessel::{scaled_bessel_i, scaled_bessel_row};

/// One-dimensional kernel P(coordinate displacement = k at time t).
pub fn kernel_1d(t: f64, k: i64) -> f64 {
    assert!(t >= 0.0, "kernel_1d: negative time");
    scaled_bessel_i(2.0 * t, k.unsigned_abs() as usize)
}

/// Kernel values for displacements 0..=kmax at time t.
pub fn kernel_row(t: f64, kmax: usize) -> Vec<f64> {
    scaled_bessel_row(2.0 * t, kmax)
}

/// Per-coordinate truncation radius: discarded one-dimensional tail mass is
/// below ~1e-10 (sub-Gaussian tails).
pub fn truncation_radius(t: f64) -> i64 {
    (2.0 * t + 10.0 * (2.0 * t).sqrt() + 10.0).ceil() as i64
}

/// Truncated one-dimensional normalization sum_{|k| <= radius} kernel_1d(t, k).
pub fn kernel_row_sum(t: f64, radius: i64) -> f64 {
    let row = kernel_row(t, radius.max(0) as usize);
    row[0] + 2.0 * row[1..].iter().sum::<f64>()
}

/// p_t(0, x) as the d-fold product of one-dimensional kernels.
pub fn transition_prob(t: f64, x: &Site) -> f64 {
    x.coords().iter().map(|&k| kernel_1d(t, k)).product()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_at_time_zero() {
        assert_eq!(transition_prob(0.0, &Site::origin(3)), 1.0);
        assert_eq!(transition_prob(0.0, &Site::e1(3)), 0.0);
    }

    #[test]
    fn kernel_value_frozen() {
        // e^{-1} I_0(1), independent series oracle.
        assert!((kernel_1d(0.5, 0) - 0.465_759_607_593_640_4).abs() < 1e-12);
    }

    #[test]
    fn sign_symmetry() {
        for t in [0.3, 2.0, 17.0] {
            let a = transition_prob(t, &Site::new(&[2, -1, 3]));
            let b = transition_prob(t, &Site::new(&[-2, 1, -3]));
            assert_eq!(a, b);
        }
    }

    #[test]
    fn normalization_under_truncation_rule() {
        for t in [0.1, 1.0, 5.0, 40.0] {
            let s = kernel_row_sum(t, truncation_radius(t));
            assert!((s - 1.0).abs() < 1e-10, "t={t}: {s}");
        }
    }

    #[test]
    fn normalization_grows_to_one() {
        let t = 2.0;
        let s1 = kernel_row_sum(t, 3);
        let s2 = kernel_row_sum(t, 8);
        let s3 = kernel_row_sum(t, truncation_radius(t));
        assert!(s1 < s2 && s2 < s3 + 1e-15);
        assert!((s3 - 1.0).abs() < 1e-10);
    }

    #[test]
    fn semigroup_property() {
        // p_{t+s}(0,x) = sum_y p_t(0,y) p_s(y,x), checked per coordinate
        // (the d-dimensional identity is the product of the 1-d ones).
        let (t, s) = (0.5, 1.0);
        for target in 0i64..=4 {
            let direct = kernel_1d(t + s, target);
            let radius = truncation_radius(t);
            let conv: f64 = (-radius..=radius)
                .map(|y| kernel_1d(t, y) * kernel_1d(s, target - y))
                .sum();
            assert!((direct - conv).abs() < 1e-10, "k={target}");
        }
    }

    #[test]
    fn product_matches_direct_convolution_oracle() {
        // transition_prob equals the product of independently convolved
        // 1-d kernels built from a short-time Euler chain.
        let x = Site::new(&[1, -2, 0]);
        let t = 0.7;
        let by_product = transition_prob(t, &x);
        let per_coord: f64 = x
            .coords()
            .iter()
            .map(|&k| {
                // 1-d oracle: uniformized chain exp(Qt) on a truncated line.
                let r = 40usize;
                let dim = 2 * r + 1;
                let mut p = vec![0.0f64; dim];
                p[r] = 1.0;
                let steps = 20000;
                let dt = t / steps as f64;
                for _ in 0..steps {
                    let mut q = vec![0.0f64; dim];
                    for i in 0..dim {
                        let mut acc = -2.0 * p[i];
                        if i > 0 {
                            acc += p[i - 1];
                        }
                        if i + 1 < dim {
                            acc += p[i + 1];
                        }
                        q[i] = p[i] + dt * acc;
                    }
                    p = q;
                }
                p[(r as i64 + k) as usize]
            })
            .product();
        assert!(
            (by_product - per_coord).abs() < 1e-4,
            "{by_product} vs {per_coord}"
        );
    }
}
