use std::fs::File;
use std::io::{BufWriter, Write as _};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReportItem {
    pub label: String,
    pub value: f64,
    pub std_error: Option<f64>,
    pub target: Option<f64>,
    pub pass: Option<bool>,
}

/// A machine-readable experiment summary keyed by the config hash.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Report {
    pub config_hash: String,
    pub items: Vec<ReportItem>,
}

impl Report {
    pub fn new(config_hash: &str) -> Self {
        Report {
            config_hash: config_hash.to_string(),
            items: Vec::new(),
        }
    }

    pub fn push(&mut self, item: ReportItem) {
        self.items.push(item);
    }

    /// One line per item on stdout.
    pub fn print(&self) {
        println!("config {}", self.config_hash);
        for item in &self.items {
            let mut line = format!("  {}: {:.8}", item.label, item.value);
            if let Some(se) = item.std_error {
                line.push_str(&format!(" +- {se:.2e}"));
            }
            if let Some(t) = item.target {
                line.push_str(&format!(" (target {t:.8})"));
            }
            if let Some(p) = item.pass {
                line.push_str(if p { " PASS" } else { " FAIL" });
            }
            println!("{line}");
        }
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        serde_json::to_writer_pretty(&mut w, self)?;
        w.write_all(b"\n")?;
        Ok(())
    }
}
