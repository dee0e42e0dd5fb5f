//! The limiting Gaussian objects of the occupation-time CLTs: scaling
//! functions, variance coefficients, the zeta process covariance in d = 3,
//! Gaussian path sampling, and the lattice-to-continuum kernel comparison.

use std::path::Path;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::error::{Result, VoterlabError};
use crate::lattice::{gamma_cached, theta_green_integral, Site, VKernelTable};
use crate::profile::RhoProfile;
use crate::quad::{gauss_legendre_on, geometric_panels, panel_integrate};

/// Occupation-time scaling h_d(t).
pub fn h_scale(d: usize, t: f64) -> Result<f64> {
    if d < 2 {
        return Err(VoterlabError::InvalidDimension(d));
    }
    if !(t > 0.0) {
        return Err(VoterlabError::ScaleDomain { d, t });
    }
    match d {
        2 => {
            if t <= 1.0 {
                return Err(VoterlabError::ScaleDomain { d, t });
            }
            Ok(t / t.ln().sqrt())
        }
        3 => Ok(t.powf(0.75)),
        4 => {
            if t <= 1.0 {
                return Err(VoterlabError::ScaleDomain { d, t });
            }
            Ok((t * t.ln()).sqrt())
        }
        _ => Ok(t.sqrt()),
    }
}

/// Instantaneous CLT coefficient A for d >= 4, given the local heat density
/// rho_value = varrho(s, 0). The one-point limit variance rate is A^2.
pub fn a_coeff(d: usize, rho_value: f64) -> Result<f64> {
    let q = rho_value * (1.0 - rho_value);
    match d {
        4 => Ok((gamma_cached(4) * q).sqrt() / std::f64::consts::PI),
        _ if d >= 5 => {
            let tg = theta_green_integral(d)?;
            Ok((4.0 * d as f64 * gamma_cached(d) * tg * q).sqrt())
        }
        _ => Err(VoterlabError::UnsupportedDimension(d)),
    }
}

/// Variance of the d >= 4 limit at time t: int_0^t A(s)^2 ds, where A(s)
/// carries the heat-evolved density at the origin.
pub fn ito_variance(d: usize, t: f64, profile: &RhoProfile) -> Result<f64> {
    if d < 4 {
        return Err(VoterlabError::UnsupportedDimension(d));
    }
    if t == 0.0 {
        return Ok(0.0);
    }
    let coef = {
        let a1 = a_coeff(d, 0.5)?; // q = 1/4
        4.0 * a1 * a1
    };
    let zeros = vec![0.0f64; d];
    let rate = |s: f64| {
        let rho = profile.heat_value(s, &zeros);
        coef * rho * (1.0 - rho)
    };
    Ok(panel_integrate(
        &rate,
        &geometric_panels((t / 8.0).min(0.125), t),
        24,
    ))
}

/// The d = 3 space-time kernel b_t(s, u) at radius r = |u|: the Brownian
/// Green kernel truncated at horizon t - s,
/// b = erfc(r / (2 sqrt(t - s))) / (4 pi r).
pub fn b_kernel(t: f64, s: f64, r: f64) -> f64 {
    assert!(s <= t && r > 0.0);
    if s == t {
        return 0.0;
    }
    erfc(r / (2.0 * (t - s).sqrt())) / (4.0 * std::f64::consts::PI * r)
}

/// Time-integral definition of the same kernel,
/// int_0^{t-s} (4 pi sigma)^{-3/2} exp(-r^2 / (4 sigma)) d sigma,
/// kept as an independent cross-check of the closed form.
pub fn b_kernel_quadrature(t: f64, s: f64, r: f64) -> f64 {
    assert!(s <= t && r > 0.0);
    let horizon = t - s;
    if horizon == 0.0 {
        return 0.0;
    }
    let f = |sigma: f64| {
        (4.0 * std::f64::consts::PI * sigma).powf(-1.5) * (-r * r / (4.0 * sigma)).exp()
    };
    // The integrand vanishes to all orders at sigma = 0; start the panels
    // where it is representable.
    let lo = (r * r / 320.0).min(horizon * 0.5);
    panel_integrate(&f, &geometric_panels(lo, horizon), 24)
}

/// Covariance of the d = 3 zeta process:
/// Cov(zeta_{t1}, zeta_{t2}) =
///   int_0^{t1} int_{R^3} b_{t1}(s,u) b_{t2}(s,u) q(s,u) du ds,  t1 <= t2,
/// with q(s, u) = varrho(s, u)(1 - varrho(s, u)).
pub fn zeta_cov(t1: f64, t2: f64, profile: &RhoProfile) -> Result<f64> {
    if t1 > t2 {
        return Err(VoterlabError::ArgumentOrder(t1, t2));
    }
    if t1 == 0.0 {
        return Ok(0.0);
    }
    let d = 3usize;
    let radial_only = matches!(profile, RhoProfile::Constant { .. });
    let rcut = 2.0 * t2.sqrt() + 10.0;
    let r_edges = geometric_panels(0.01, rcut);
    // Outer substitution s = t1 - w^2 removes the sqrt(t1 - s) kink at s = t1.
    let (wn, ww) = gauss_legendre_on(32, 0.0, t1.sqrt());
    // Angular rule (only exercised for non-radial profiles).
    let (cn, cw) = gauss_legendre_on(12, -1.0, 1.0);
    let n_phi = 8usize;
    let mut total = 0.0;
    for (w, wgt) in wn.iter().zip(&ww) {
        let s = t1 - w * w;
        let jac = 2.0 * w * wgt;
        let shell = |r: f64| -> f64 {
            let bb = b_kernel(t1, s, r) * b_kernel(t2, s, r);
            let q_avg = if radial_only {
                let rho = profile.eval(&[0.0; 3]);
                rho * (1.0 - rho)
            } else {
                // Average q over the sphere of radius r.
                let mut acc = 0.0;
                for (c, cwgt) in cn.iter().zip(&cw) {
                    let rho_z = r * c;
                    let rho_xy = r * (1.0 - c * c).max(0.0).sqrt();
                    let mut phi_acc = 0.0;
                    for j in 0..n_phi {
                        let phi =
                            2.0 * std::f64::consts::PI * (j as f64 + 0.5) / n_phi as f64;
                        let u = [rho_xy * phi.cos(), rho_xy * phi.sin(), rho_z];
                        let rho = profile.heat_value(s, &u);
                        phi_acc += rho * (1.0 - rho);
                    }
                    acc += cwgt * phi_acc / n_phi as f64;
                }
                acc / 2.0
            };
            4.0 * std::f64::consts::PI * r * r * bb * q_avg
        };
        total += jac * panel_integrate(&shell, &r_edges, 16);
    }
    debug_assert_eq!(d, 3);
    Ok(total)
}

/// Covariance of the scaled occupation-time limit on a time grid:
/// 12 gamma_3 Cov(zeta) in d = 3, the time-changed Brownian variance for
/// d >= 4.
pub fn limit_covariance(d: usize, profile: &RhoProfile, grid: &[f64]) -> Result<Vec<Vec<f64>>> {
    check_grid(grid)?;
    let n = grid.len();
    let mut cov = vec![vec![0.0; n]; n];
    match d {
        3 => {
            let scale = 12.0 * gamma_cached(3);
            for i in 0..n {
                for j in i..n {
                    let v = scale * zeta_cov(grid[i], grid[j], profile)?;
                    cov[i][j] = v;
                    cov[j][i] = v;
                }
            }
        }
        _ if d >= 4 => {
            // Cov(X_{t_i}, X_{t_j}) = Var(X_{min}) for an Ito integral.
            let vars: Vec<f64> = grid
                .iter()
                .map(|&t| ito_variance(d, t, profile))
                .collect::<Result<_>>()?;
            for i in 0..n {
                for j in i..n {
                    cov[i][j] = vars[i];
                    cov[j][i] = vars[i];
                }
            }
        }
        _ => return Err(VoterlabError::UnsupportedDimension(d)),
    }
    Ok(cov)
}

fn check_grid(grid: &[f64]) -> Result<()> {
    let ok = !grid.is_empty()
        && grid[0] > 0.0
        && grid.windows(2).all(|w| w[0] < w[1]);
    if ok {
        Ok(())
    } else {
        Err(VoterlabError::NonMonotoneGrid)
    }
}

/// Lower-triangular Cholesky factor with a relative jitter retry.
fn cholesky(cov: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    let n = cov.len();
    let scale = cov
        .iter()
        .enumerate()
        .map(|(i, row)| row[i])
        .fold(0.0f64, f64::max);
    for jitter in [0.0, 1e-10 * scale.max(1e-300)] {
        let mut l = vec![vec![0.0; n]; n];
        let mut ok = true;
        'outer: for i in 0..n {
            for j in 0..=i {
                let mut sum = cov[i][j] + if i == j { jitter } else { 0.0 };
                for k in 0..j {
                    sum -= l[i][k] * l[j][k];
                }
                if i == j {
                    if sum <= 0.0 {
                        ok = false;
                        break 'outer;
                    }
                    l[i][j] = sum.sqrt();
                } else {
                    l[i][j] = sum / l[j][j];
                }
            }
        }
        if ok {
            return Ok(l);
        }
    }
    Err(VoterlabError::NotPositiveDefinite(scale))
}

/// Draw a centered Gaussian vector with the given covariance.
pub fn sample_gaussian(cov: &[Vec<f64>], rng: &mut impl Rng) -> Result<Vec<f64>> {
    let l = cholesky(cov)?;
    let n = cov.len();
    let z: Vec<f64> = (0..n).map(|_| StandardNormal.sample(rng)).collect();
    Ok((0..n)
        .map(|i| (0..=i).map(|k| l[i][k] * z[k]).sum())
        .collect())
}

/// Sample the d >= 4 limit process on a grid.
pub fn sample_ito_path(
    d: usize,
    profile: &RhoProfile,
    grid: &[f64],
    rng: &mut impl Rng,
) -> Result<Vec<f64>> {
    if d < 4 {
        return Err(VoterlabError::UnsupportedDimension(d));
    }
    sample_gaussian(&limit_covariance(d, profile, grid)?, rng)
}

/// Sample the raw d = 3 zeta process on a grid (the occupation limit is
/// sqrt(12 gamma_3) times this).
pub fn sample_zeta_path(
    profile: &RhoProfile,
    grid: &[f64],
    rng: &mut impl Rng,
) -> Result<Vec<f64>> {
    check_grid(grid)?;
    let n = grid.len();
    let mut cov = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i..n {
            let v = zeta_cov(grid[i], grid[j], profile)?;
            cov[i][j] = v;
            cov[j][i] = v;
        }
    }
    sample_gaussian(&cov, rng)
}

/// Tabulated limit law for one dimension/profile, for persistence and reuse.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LimitLawTable {
    pub d: usize,
    pub profile: RhoProfile,
    pub times: Vec<f64>,
    pub covariance: Vec<Vec<f64>>,
}

impl LimitLawTable {
    pub fn compute(d: usize, profile: &RhoProfile, times: &[f64]) -> Result<Self> {
        profile.validate(d)?;
        Ok(LimitLawTable {
            d,
            profile: profile.clone(),
            times: times.to_vec(),
            covariance: limit_covariance(d, profile, times)?,
        })
    }

    pub fn variance_at(&self, t: f64) -> Option<f64> {
        self.times
            .iter()
            .position(|&x| x == t)
            .map(|i| self.covariance[i][i])
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path)?;
        serde_json::to_writer_pretty(std::io::BufWriter::new(file), self)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        Ok(serde_json::from_reader(std::io::BufReader::new(file))?)
    }
}

/// The lattice analogue of b at scale N, evaluated at a continuum point:
/// sqrt(N) v(t N, x) at the nearest lattice site x to u sqrt(N).
pub struct BLatticeField {
    table: VKernelTable,
    n: u64,
}

impl BLatticeField {
    pub fn new(n: u64, t: f64) -> Self {
        let root = (n as f64).sqrt();
        let kmax = ((2.0 * t.sqrt() + 5.0) * root).ceil() as usize;
        BLatticeField {
            table: VKernelTable::new(t * n as f64, kmax),
            n,
        }
    }

    pub fn eval(&self, u: &[f64]) -> f64 {
        let root = (self.n as f64).sqrt();
        let x: Vec<i64> = u.iter().map(|&c| (c * root).round() as i64).collect();
        root * self.table.eval(&Site::new(&x))
    }
}

/// Pointwise lattice b at scale N (convenience wrapper; builds the kernel
/// table, so batch users should hold a [`BLatticeField`]).
pub fn b_n_pointwise(n: u64, t: f64, u: &[f64]) -> f64 {
    BLatticeField::new(n, t).eval(u)
}

/// L^2(R^3) distance between the lattice field sqrt(N) v(tN, . sqrt N) and
/// the continuum kernel b_t(0, .), integrated outside a core of radius
/// ~ half a lattice spacing where b is singular.
pub fn b_l2_distance(n: u64, t: f64) -> f64 {
    let field = BLatticeField::new(n, t);
    let root = (n as f64).sqrt();
    let r_min = 0.25 / root;
    let r_max = 2.0 * t.sqrt() + 4.0;
    // Log-spaced radial panels x Gauss cos(theta) x uniform phi.
    let mut r_edges = vec![r_min];
    while *r_edges.last().unwrap() < r_max {
        r_edges.push(r_edges.last().unwrap() * 2.0);
    }
    *r_edges.last_mut().unwrap() = r_max;
    let (rx, rw) = crate::quad::gauss_legendre(12);
    let (cn, cw) = gauss_legendre_on(12, 0.0, 1.0); // octant symmetry in z
    let n_phi = 8usize;
    let mut total = 0.0;
    for pair in r_edges.windows(2) {
        let half = 0.5 * (pair[1] - pair[0]);
        let mid = 0.5 * (pair[0] + pair[1]);
        for (xi, wi) in rx.iter().zip(&rw) {
            let r = mid + half * xi;
            let b_cont = b_kernel(t, 0.0, r);
            let mut ang = 0.0;
            for (c, cwgt) in cn.iter().zip(&cw) {
                let z = r * c;
                let rho_xy = r * (1.0 - c * c).max(0.0).sqrt();
                for j in 0..n_phi {
                    // phi in [0, pi/4): the remaining sphere follows by
                    // the cubic symmetry of the lattice field.
                    let phi = std::f64::consts::FRAC_PI_4 * (j as f64 + 0.5) / n_phi as f64;
                    let u = [rho_xy * phi.cos(), rho_xy * phi.sin(), z];
                    let diff = field.eval(&u) - b_cont;
                    ang += cwgt * diff * diff / n_phi as f64;
                }
            }
            // 2 (z octant) * 8 (phi wedges) * 2 pi scaling of the measure.
            total += half * wi * 4.0 * std::f64::consts::PI * r * r * ang;
        }
    }
    total.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::streams::{stream, ModuleId};
    use proptest::prelude::*;

    fn half() -> RhoProfile {
        RhoProfile::Constant { level: 0.5 }
    }

    /// Closed-form zeta covariance for a constant profile (independent
    /// derivation: Gaussian product identity reduces the space integral).
    fn zeta_cov_const_oracle(t1: f64, t2: f64, q: f64) -> f64 {
        let term = (2.0 / 3.0) * t1.powf(1.5) + (2.0 / 3.0) * (t2.powf(1.5) - (t2 - t1).powf(1.5))
            - (1.0 / 3.0) * ((t1 + t2).powf(1.5) - (t2 - t1).powf(1.5));
        q / (2.0 * std::f64::consts::PI.powf(1.5)) * term
    }

    #[test]
    fn h_scale_values_and_domain() {
        assert!((h_scale(3, 16.0).unwrap() - 8.0).abs() < 1e-12);
        assert!((h_scale(5, 9.0).unwrap() - 3.0).abs() < 1e-12);
        let t = 100.0f64;
        assert!((h_scale(2, t).unwrap() - t / t.ln().sqrt()).abs() < 1e-12);
        assert!((h_scale(4, t).unwrap() - (t * t.ln()).sqrt()).abs() < 1e-12);
        assert!(h_scale(2, 0.5).is_err());
        assert!(h_scale(4, 1.0).is_err());
        assert!(h_scale(1, 10.0).is_err());
        assert!(h_scale(3, 0.0).is_err());
    }

    #[test]
    fn b_kernel_frozen_and_vs_quadrature() {
        let b = b_kernel(1.0, 0.25, 0.7);
        assert!((b - 0.064_529_201_069_710_13).abs() < 1e-14, "{b}");
        for (t, s, r) in [(1.0, 0.25, 0.7), (2.0, 0.0, 0.05), (0.8, 0.79, 1.3), (5.0, 1.0, 3.0)] {
            let a = b_kernel(t, s, r);
            let q = b_kernel_quadrature(t, s, r);
            assert!((a - q).abs() < 1e-10 * a.max(1e-12), "t={t} s={s} r={r}: {a} vs {q}");
        }
        assert_eq!(b_kernel(1.0, 1.0, 0.3), 0.0);
    }

    #[test]
    fn zeta_cov_matches_closed_form() {
        let p = half();
        let cases = [(1.0, 1.0), (0.5, 1.0), (0.3, 0.7)];
        let frozen = [
            0.008_766_641_709_447_437,
            0.003_864_386_249_933_959,
            0.001_848_066_413_726_139,
        ];
        for ((t1, t2), want) in cases.iter().zip(frozen) {
            let got = zeta_cov(*t1, *t2, &p).unwrap();
            let oracle = zeta_cov_const_oracle(*t1, *t2, 0.25);
            assert!((oracle - want).abs() < 1e-15);
            assert!(
                (got - want).abs() < 2e-7 * want,
                "({t1},{t2}): {got} vs {want}"
            );
        }
        assert!(zeta_cov(1.0, 0.5, &p).is_err());
        assert_eq!(zeta_cov(0.0, 1.0, &p).unwrap(), 0.0);
    }

    #[test]
    fn zeta_cov_degenerate_logistic_matches_constant() {
        // A flat logistic profile exercises the angular quadrature path and
        // must agree with the radial shortcut.
        let flat = RhoProfile::LogisticAxis {
            low: 0.5,
            high: 0.5,
            scale: 1.0,
            shift: 0.0,
        };
        let a = zeta_cov(0.5, 1.0, &flat).unwrap();
        let b = zeta_cov(0.5, 1.0, &half()).unwrap();
        assert!((a - b).abs() < 1e-9 * b, "{a} vs {b}");
    }

    #[test]
    fn ito_variance_constant_values() {
        let p = half();
        let v5 = ito_variance(5, 1.0, &p).unwrap();
        assert!((v5 - 0.083_668_937_319_354_43).abs() < 1e-10, "{v5}");
        let v4 = ito_variance(4, 1.0, &p).unwrap();
        assert!((v4 - 0.020_436_440_357_375_56).abs() < 1e-10, "{v4}");
        // Linear in t for a constant profile.
        let v5_half = ito_variance(5, 0.5, &p).unwrap();
        assert!((v5_half - 0.5 * v5).abs() < 1e-10);
        assert!(ito_variance(3, 1.0, &p).is_err());
    }

    #[test]
    fn a_coeff_consistency() {
        for d in [4usize, 5, 6] {
            let a = a_coeff(d, 0.5).unwrap();
            let v = ito_variance(d, 1.0, &half()).unwrap();
            assert!((a * a - v).abs() < 1e-10, "d={d}");
        }
        assert!(a_coeff(3, 0.5).is_err());
        assert_eq!(a_coeff(5, 0.0).unwrap(), 0.0);
        assert_eq!(a_coeff(5, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn ito_variance_shrinks_with_bump_decay() {
        // A decaying bump has less mass than its peak level held constant.
        let bump = RhoProfile::GaussianBump {
            base: 0.0,
            amp: 0.5,
            width: 1.0,
            center: vec![0.0; 5],
        };
        let v_bump = ito_variance(5, 1.0, &bump).unwrap();
        let v_flat = ito_variance(5, 1.0, &half()).unwrap();
        assert!(v_bump < v_flat);
        assert!(v_bump > 0.0);
    }

    #[test]
    fn cholesky_reconstructs() {
        let cov = vec![
            vec![4.0, 2.0, 0.5],
            vec![2.0, 5.0, 1.0],
            vec![0.5, 1.0, 3.0],
        ];
        let l = cholesky(&cov).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let v: f64 = (0..3).map(|k| l[i][k] * l[j][k]).sum();
                assert!((v - cov[i][j]).abs() < 1e-12);
            }
        }
        assert!(cholesky(&[vec![1.0, 2.0], vec![2.0, 1.0]]).is_err());
    }

    #[test]
    fn grid_validation() {
        let p = half();
        let mut rng = stream(1, ModuleId::LimitLaws, 0, 0);
        assert!(sample_ito_path(5, &p, &[0.5, 0.4], &mut rng).is_err());
        assert!(sample_ito_path(5, &p, &[], &mut rng).is_err());
        assert!(sample_zeta_path(&p, &[0.0, 0.5], &mut rng).is_err());
    }

    #[test]
    fn ito_path_empirical_covariance() {
        let p = half();
        let grid = [0.5, 1.0];
        let cov = limit_covariance(5, &p, &grid).unwrap();
        let reps = 20_000;
        let mut acc = [[0.0f64; 2]; 2];
        for r in 0..reps {
            let mut rng = stream(2, ModuleId::LimitLaws, 1, r);
            let path = sample_ito_path(5, &p, &grid, &mut rng).unwrap();
            for i in 0..2 {
                for j in 0..2 {
                    acc[i][j] += path[i] * path[j];
                }
            }
        }
        for i in 0..2 {
            for j in 0..2 {
                let emp = acc[i][j] / reps as f64;
                // ~4 sigma band for second-moment estimation.
                let tol = 4.0 * 1.5 * cov[i][i].max(cov[j][j]) / (reps as f64).sqrt();
                assert!((emp - cov[i][j]).abs() < tol, "({i},{j}): {emp} vs {}", cov[i][j]);
            }
        }
    }

    #[test]
    fn zeta_path_empirical_variance() {
        let p = half();
        let grid = [1.0];
        let want = zeta_cov_const_oracle(1.0, 1.0, 0.25);
        let reps = 20_000;
        let mut acc = 0.0;
        for r in 0..reps {
            let mut rng = stream(3, ModuleId::LimitLaws, 2, r);
            let path = sample_zeta_path(&p, &grid, &mut rng).unwrap();
            acc += path[0] * path[0];
        }
        let emp = acc / reps as f64;
        let tol = 4.0 * 1.5 * want / (reps as f64).sqrt();
        assert!((emp - want).abs() < tol, "{emp} vs {want}");
    }

    #[test]
    fn limit_table_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("limits.json");
        let table = LimitLawTable::compute(5, &half(), &[0.5, 1.0]).unwrap();
        table.save(&path).unwrap();
        let back = LimitLawTable::load(&path).unwrap();
        assert_eq!(back.d, 5);
        assert_eq!(back.variance_at(1.0), table.variance_at(1.0));
        assert!(back.variance_at(2.0).is_none());
    }

    #[test]
    fn lattice_b_field_approaches_continuum() {
        // Pointwise at a moderate radius the lattice field converges to b.
        let t = 1.0;
        let u = [0.9, 0.2, -0.4];
        let r = u.iter().map(|c| c * c).sum::<f64>().sqrt();
        let b = b_kernel(t, 0.0, r);
        let e1 = (b_n_pointwise(25, t, &u) - b).abs();
        let e2 = (b_n_pointwise(400, t, &u) - b).abs();
        assert!(e2 < e1, "{e1} vs {e2}");
        assert!(e2 < 0.02 * b, "{e2} vs {b}");
    }

    #[test]
    fn b_l2_distance_decreases() {
        let t = 1.0;
        let j: Vec<f64> = [16u64, 64, 256].iter().map(|&n| b_l2_distance(n, t)).collect();
        assert!(j[0] > j[1] && j[1] > j[2], "{j:?}");
        assert!(j[2] > 0.0);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn b_kernel_monotone_in_horizon(
            r in 0.05f64..3.0,
            s in 0.0f64..0.9,
            dt in 0.01f64..2.0,
        ) {
            // Longer horizon accumulates more kernel mass.
            let b1 = b_kernel(1.0, s, r);
            let b2 = b_kernel(1.0 + dt, s, r);
            prop_assert!(b2 >= b1);
            // And b is dominated by the full Green kernel 1/(4 pi r).
            prop_assert!(b2 <= 1.0 / (4.0 * std::f64::consts::PI * r) + 1e-15);
        }

        #[test]
        fn zeta_cov_is_psd_on_pairs(
            t1 in 0.1f64..1.0,
            gap in 0.0f64..1.0,
        ) {
            let p = half();
            let t2 = t1 + gap;
            let c11 = zeta_cov(t1, t1, &p).unwrap();
            let c22 = zeta_cov(t2, t2, &p).unwrap();
            let c12 = zeta_cov(t1, t2, &p).unwrap();
            prop_assert!(c12 * c12 <= c11 * c22 * (1.0 + 1e-9));
        }
    }
}
