//! Spatial density profiles for the inhomogeneous product initial law.
//!
//! A profile rho maps continuum space R^d to [0,1]; the voter model at scale
//! N starts from independent Bernoulli(rho(x / sqrt(N))) opinions. The same
//! object drives three consumers: initial-configuration sampling, the exact
//! lattice mean occupancy E eta_t(x) (by duality a kernel average of rho),
//! and the continuum heat evolution entering the limit constants.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Result, VoterlabError};
use crate::lattice::{kernel_row, truncation_radius, Site};

/// Density profile families. All are either constant across, or separable in,
/// the coordinates, which keeps lattice averages one-dimensional.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum RhoProfile {
    /// rho = level everywhere.
    Constant { level: f64 },
    /// Logistic ramp in the first coordinate:
    /// low + (high - low) / (1 + exp(-(u_1 - shift) / scale)).
    LogisticAxis {
        low: f64,
        high: f64,
        scale: f64,
        shift: f64,
    },
    /// base + amp * exp(-|u - center|^2 / (2 width^2)); amp may be negative.
    GaussianBump {
        base: f64,
        amp: f64,
        width: f64,
        center: Vec<f64>,
    },
}

impl RhoProfile {
    /// Check parameter ranges; the profile must take values in [0,1].
    pub fn validate(&self, d: usize) -> Result<()> {
        let bad = |msg: String| Err(VoterlabError::InvalidProfile(msg));
        match self {
            RhoProfile::Constant { level } => {
                if !(0.0..=1.0).contains(level) {
                    return bad(format!("level {level} outside [0,1]"));
                }
            }
            RhoProfile::LogisticAxis {
                low,
                high,
                scale,
                shift,
            } => {
                if !(0.0..=1.0).contains(low) || !(0.0..=1.0).contains(high) {
                    return bad(format!("levels ({low}, {high}) outside [0,1]"));
                }
                if !(*scale > 0.0) || !shift.is_finite() {
                    return bad(format!("bad scale {scale} or shift {shift}"));
                }
            }
            RhoProfile::GaussianBump {
                base,
                amp,
                width,
                center,
            } => {
                if !(*width > 0.0) {
                    return bad(format!("width {width} must be positive"));
                }
                if center.len() != d {
                    return bad(format!("center has dim {}, profile dim {d}", center.len()));
                }
                let (peak, trough) = (base + amp.max(0.0), base + amp.min(0.0));
                if !(0.0..=1.0).contains(&peak) || !(0.0..=1.0).contains(&trough) {
                    return bad(format!("range [{trough}, {peak}] outside [0,1]"));
                }
            }
        }
        Ok(())
    }

    pub fn eval(&self, u: &[f64]) -> f64 {
        match self {
            RhoProfile::Constant { level } => *level,
            RhoProfile::LogisticAxis {
                low,
                high,
                scale,
                shift,
            } => low + (high - low) / (1.0 + (-(u[0] - shift) / scale).exp()),
            RhoProfile::GaussianBump {
                base,
                amp,
                width,
                center,
            } => {
                let r2: f64 = u
                    .iter()
                    .zip(center)
                    .map(|(a, c)| (a - c) * (a - c))
                    .sum();
                base + amp * (-r2 / (2.0 * width * width)).exp()
            }
        }
    }

    /// A Lipschitz constant of the profile (w.r.t. the Euclidean norm).
    pub fn lipschitz_bound(&self) -> f64 {
        match self {
            RhoProfile::Constant { .. } => 0.0,
            RhoProfile::LogisticAxis {
                low, high, scale, ..
            } => (high - low).abs() / (4.0 * scale),
            RhoProfile::GaussianBump { amp, width, .. } => {
                // max of |grad| at radius = width.
                amp.abs() * (-0.5f64).exp() / width
            }
        }
    }

    /// Draw the initial opinion at lattice site x under scale N.
    pub fn sample_initial_bit<R: Rng>(&self, x: &Site, n: u64, rng: &mut R) -> bool {
        rng.gen_range(0.0..1.0) < self.eval(&x.scaled(n))
    }

    /// Heat evolution varrho(s, u): convolution of rho with the Gaussian of
    /// per-coordinate variance 2s (the diffusive limit of the walk kernel).
    pub fn heat_value(&self, s: f64, u: &[f64]) -> f64 {
        assert!(s >= 0.0);
        if s == 0.0 {
            return self.eval(u);
        }
        match self {
            RhoProfile::Constant { level } => *level,
            RhoProfile::LogisticAxis { .. } => {
                // One-dimensional convolution in the ramp coordinate over a
                // +-12 sigma window (discarded Gaussian mass < 1e-30). The
                // logistic has poles close to the real axis, so adaptive
                // panels beat Gauss-Hermite here.
                let sigma = (2.0 * s).sqrt();
                let norm = sigma * (2.0 * std::f64::consts::PI).sqrt();
                let u1 = u[0];
                let f = |y: f64| {
                    self.eval(&[y]) * (-(y - u1) * (y - u1) / (4.0 * s)).exp() / norm
                };
                crate::quad::adaptive_simpson(&f, u1 - 12.0 * sigma, u1 + 12.0 * sigma, 1e-12)
                    .value
            }
            RhoProfile::GaussianBump {
                base,
                amp,
                width,
                center,
            } => {
                let v = width * width + 2.0 * s;
                let r2: f64 = u
                    .iter()
                    .zip(center)
                    .map(|(a, c)| (a - c) * (a - c))
                    .sum();
                let d = center.len() as f64;
                base + amp * (width * width / v).powf(d / 2.0) * (-r2 / (2.0 * v)).exp()
            }
        }
    }

    /// Exact lattice mean occupancy E eta_t(x) = sum_y p_t(x, y) rho(y / sqrt N),
    /// reduced to one-dimensional kernel sums by the structure of each family.
    pub fn mean_occupancy(&self, t: f64, n: u64, x: &Site) -> f64 {
        let root = (n as f64).sqrt();
        let radius = truncation_radius(t);
        match self {
            RhoProfile::Constant { level } => *level,
            RhoProfile::LogisticAxis { .. } => {
                let row = kernel_row(t, radius as usize);
                let x1 = x.coords()[0];
                let mut acc = 0.0;
                let mut probe = [0.0f64];
                for k in -radius..=radius {
                    probe[0] = (x1 + k) as f64 / root;
                    acc += row[k.unsigned_abs() as usize] * self.eval(&probe);
                }
                acc
            }
            RhoProfile::GaussianBump {
                base,
                amp,
                width,
                center,
            } => {
                // The bump factorizes over coordinates, so the d-dimensional
                // kernel sum is a product of 1-d sums.
                let row = kernel_row(t, radius as usize);
                let mut prod = 1.0;
                for (&xi, &ci) in x.coords().iter().zip(center) {
                    let mut acc = 0.0;
                    for k in -radius..=radius {
                        let u = (xi + k) as f64 / root - ci;
                        acc += row[k.unsigned_abs() as usize]
                            * (-u * u / (2.0 * width * width)).exp();
                    }
                    prod *= acc;
                }
                base + amp * prod
            }
        }
    }
}
