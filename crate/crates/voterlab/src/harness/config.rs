use serde::{Deserialize, Serialize};

use crate::profile::RhoProfile;

/// A reproducible experiment: everything that determines the output is in
/// here, and the config hash goes into every report.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub experiment: ExperimentKind,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ExperimentKind {
    /// Precompute dimension constants and write them to a table.
    Constants { dims: Vec<usize> },
    /// Scaled second moment of a spatial increment versus its limit.
    PairLimit {
        d: usize,
        profile: RhoProfile,
        s: f64,
        x: Vec<i64>,
        y: Vec<i64>,
        scales: Vec<u64>,
        replicas: u64,
    },
    /// Occupation-time covariance at a pair of diffusive times.
    OccupationCov {
        d: usize,
        profile: RhoProfile,
        t1: f64,
        t2: f64,
        scales: Vec<u64>,
        samples: u64,
    },
    /// Forward torus runs: scaled occupation samples at a diffusive time.
    ForwardVariance {
        d: usize,
        profile: RhoProfile,
        t: f64,
        n: u64,
        side: usize,
        replicas: u64,
    },
    /// Limit covariance matrix on a time grid.
    LimitTable {
        d: usize,
        profile: RhoProfile,
        times: Vec<f64>,
    },
    /// L2 distance of the lattice two-point kernel to its continuum limit.
    BConvergence { t: f64, scales: Vec<u64> },
    /// Draws from the d = 3 limit field on a time grid.
    ZetaSample {
        profile: RhoProfile,
        times: Vec<f64>,
        replicas: u64,
    },
}

/// Stable hex digest of a config (FNV-1a over its canonical JSON).
pub fn config_hash(config: &ExperimentConfig) -> String {
    let json = serde_json::to_string(config).expect("config serializes");
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in json.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    format!("{h:016x}")
}
