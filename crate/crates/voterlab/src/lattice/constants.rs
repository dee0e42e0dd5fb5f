//! Persisted table of walk constants (escape probabilities, Green values,
//! moment integrals) with provenance and error bounds.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::green::{gamma, green_function, theta_green_integral, GammaMethod};
use super::Site;
use crate::error::Result;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConstantEntry {
    pub d: usize,
    pub name: String,
    pub value: f64,
    pub error_bound: f64,
    pub method: String,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct ConstantsTable {
    pub entries: Vec<ConstantEntry>,
}

impl ConstantsTable {
    /// Compute the standard constants for the requested dimensions.
    pub fn compute(dims: &[usize]) -> Result<Self> {
        let mut entries = Vec::new();
        for &d in dims {
            let g0 = green_function(&Site::origin(d))?;
            entries.push(ConstantEntry {
                d,
                name: "green_origin".into(),
                value: g0,
                error_bound: 1e-10,
                method: "panel quadrature + asymptotic tail".into(),
            });
            let est = gamma(d, GammaMethod::Green)?;
            entries.push(ConstantEntry {
                d,
                name: "gamma".into(),
                value: est.value,
                error_bound: est.error_bound,
                method: "1 / (2d G(0))".into(),
            });
            if d >= 5 {
                entries.push(ConstantEntry {
                    d,
                    name: "theta_green".into(),
                    value: theta_green_integral(d)?,
                    error_bound: 1e-11,
                    method: "panel quadrature + asymptotic tail".into(),
                });
            }
        }
        Ok(ConstantsTable { entries })
    }

    pub fn get(&self, d: usize, name: &str) -> Option<f64> {
        self.entries
            .iter()
            .find(|e| e.d == d && e.name == name)
            .map(|e| e.value)
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

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::gamma_cached;

    #[test]
    fn compute_and_lookup() {
        let table = ConstantsTable::compute(&[3, 5]).unwrap();
        assert!((table.get(3, "gamma").unwrap() - gamma_cached(3)).abs() < 1e-12);
        assert!(table.get(3, "theta_green").is_none());
        assert!(table.get(5, "theta_green").is_some());
    }

    #[test]
    fn json_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("constants.json");
        let table = ConstantsTable::compute(&[3]).unwrap();
        table.save(&path).unwrap();
        let back = ConstantsTable::load(&path).unwrap();
        assert_eq!(back.entries.len(), table.entries.len());
        assert_eq!(
            back.get(3, "gamma").unwrap(),
            table.get(3, "gamma").unwrap()
        );
    }
}
