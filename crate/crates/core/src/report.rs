//! Deterministic experiment reports.
//!
//! Reports are plain data: sorted maps of named scalars, series and pass
//! flags, and a list of reference tags naming the identity or bound each
//! scalar speaks to. Serialization is byte-stable for a fixed seed (sorted
//! keys, shortest-roundtrip floats, no timestamps), which is what the
//! determinism criterion of the acceptance suite checks.

use crate::error::Result;
use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

#[derive(Debug, Clone, serde::Serialize)]
pub struct ExperimentReport {
    pub name: String,
    pub seed: u64,
    pub params: BTreeMap<String, String>,
    pub scalars: BTreeMap<String, f64>,
    pub series: BTreeMap<String, Vec<f64>>,
    pub passed: BTreeMap<String, bool>,
    pub refs: Vec<String>,
}

impl ExperimentReport {
    pub fn new(name: &str, seed: u64) -> Self {
        Self {
            name: name.to_string(),
            seed,
            params: BTreeMap::new(),
            scalars: BTreeMap::new(),
            series: BTreeMap::new(),
            passed: BTreeMap::new(),
            refs: Vec::new(),
        }
    }

    pub fn param(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.params.insert(key.to_string(), value.to_string());
        self
    }

    pub fn scalar(&mut self, key: &str, value: f64) -> &mut Self {
        self.scalars.insert(key.to_string(), value);
        self
    }

    pub fn series(&mut self, key: &str, values: Vec<f64>) -> &mut Self {
        self.series.insert(key.to_string(), values);
        self
    }

    pub fn flag(&mut self, key: &str, ok: bool) -> &mut Self {
        self.passed.insert(key.to_string(), ok);
        self
    }

    pub fn reference(&mut self, tag: &str) -> &mut Self {
        self.refs.push(tag.to_string());
        self
    }

    pub fn all_passed(&self) -> bool {
        self.passed.values().all(|v| *v)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization")
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        let mut f = std::fs::File::create(path)?;
        f.write_all(self.to_json().as_bytes())?;
        f.write_all(b"\n")?;
        Ok(())
    }

    /// One-line console summary.
    pub fn summary_line(&self) -> String {
        let verdict = if self.all_passed() { "PASS" } else { "FAIL" };
        let failing: Vec<&str> = self
            .passed
            .iter()
            .filter(|(_, ok)| !**ok)
            .map(|(k, _)| k.as_str())
            .collect();
        if failing.is_empty() {
            format!("{}: {verdict} ({} checks)", self.name, self.passed.len())
        } else {
            format!("{}: {verdict} (failing: {})", self.name, failing.join(", "))
        }
    }
}

/// Format a float with full round-trip precision (17 significant digits).
pub fn fmt_full(v: f64) -> String {
    format!("{v:.16e}")
}

/// Render rows as CSV with full-precision floats.
pub fn csv_string(header: &[&str], rows: &[Vec<f64>]) -> String {
    let mut out = String::new();
    out.push_str(&header.join(","));
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = row.iter().map(|v| fmt_full(*v)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<f64>]) -> Result<()> {
    let mut f = std::fs::File::create(path)?;
    f.write_all(csv_string(header, rows).as_bytes())?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_is_deterministic_and_sorted() {
        let mut a = ExperimentReport::new("demo", 7);
        a.scalar("zeta", 1.5).scalar("alpha", -2.0).flag("ok", true);
        let mut b = ExperimentReport::new("demo", 7);
        b.scalar("alpha", -2.0).scalar("zeta", 1.5).flag("ok", true);
        assert_eq!(a.to_json(), b.to_json());
        assert!(a.to_json().find("alpha").unwrap() < a.to_json().find("zeta").unwrap());
    }

    #[test]
    fn csv_has_full_precision() {
        let s = csv_string(&["x", "y"], &[vec![1.0 / 3.0, 2.0]]);
        assert!(s.starts_with("x,y\n"));
        assert!(s.contains("3.3333333333333331e-1"));
        let parsed: f64 = s.lines().nth(1).unwrap().split(',').next().unwrap().parse().unwrap();
        assert_eq!(parsed, 1.0 / 3.0);
    }

    #[test]
    fn summary_names_failures() {
        let mut r = ExperimentReport::new("x", 0);
        r.flag("good", true).flag("bad", false);
        assert!(r.summary_line().contains("FAIL"));
        assert!(r.summary_line().contains("bad"));
        assert!(!r.all_passed());
    }
}
