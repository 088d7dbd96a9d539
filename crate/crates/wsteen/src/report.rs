//! Versioned JSON reports and the human-readable views derived from them.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use serde_json::Value;

pub const VERIFICATION_SCHEMA: &str = "wsteen.verification/1";
pub const BASIS_SCHEMA: &str = "wsteen.basis/1";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub id: String,
    pub passed: bool,
    pub detail: Value,
}

impl CheckRecord {
    pub fn new(id: impl Into<String>, passed: bool, detail: impl Serialize) -> Self {
        CheckRecord { id: id.into(), passed, detail: serde_json::to_value(detail).expect("details serialize") }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub schema: String,
    pub suite: String,
    pub field: String,
    pub parameters: BTreeMap<String, Value>,
    pub records: Vec<CheckRecord>,
    pub summary: BTreeMap<String, Value>,
    pub all_passed: bool,
    pub timing_ms: u64,
}

impl VerificationReport {
    pub fn new(suite: &str, field: &str, parameters: BTreeMap<String, Value>, records: Vec<CheckRecord>) -> Self {
        let all_passed = records.iter().all(|r| r.passed);
        let mut summary = BTreeMap::new();
        summary.insert("checks".into(), Value::from(records.len()));
        summary.insert("failed".into(), Value::from(records.iter().filter(|r| !r.passed).count()));
        VerificationReport {
            schema: VERIFICATION_SCHEMA.into(),
            suite: suite.into(),
            field: field.into(),
            parameters,
            records,
            summary,
            all_passed,
            timing_ms: 0,
        }
    }

    pub fn with_summary(mut self, key: &str, value: impl Serialize) -> Self {
        self.summary.insert(key.into(), serde_json::to_value(value).expect("summaries serialize"));
        self
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckRecord> {
        self.records.iter().filter(|r| !r.passed)
    }

    /// Failed records in full, passed ones counted.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "suite {} on {}", self.suite, self.field);
        for (k, v) in &self.parameters {
            let _ = writeln!(out, "  {k} = {v}");
        }
        for r in self.failures() {
            let _ = writeln!(out, "FAIL  {:<40} {}", r.id, compact(&r.detail));
        }
        for (k, v) in &self.summary {
            if k != "checks" && k != "failed" {
                let _ = writeln!(out, "  {k}: {}", compact(v));
            }
        }
        let passed = self.records.len() - self.failures().count();
        let verdict = if self.all_passed { "PASS" } else { "FAIL" };
        let _ = writeln!(out, "{verdict}  {passed}/{} checks passed ({} ms)", self.records.len(), self.timing_ms);
        out
    }
}

fn compact(v: &Value) -> String {
    let s = v.to_string();
    if s.chars().count() > 160 {
        let cut: String = s.chars().take(157).collect();
        format!("{cut}...")
    } else {
        s
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BasisReport {
    pub schema: String,
    pub object: String,
    pub field: String,
    pub p: i32,
    pub q: i32,
    pub dim: usize,
    pub basis: Vec<String>,
}

impl BasisReport {
    pub fn to_table(&self) -> String {
        let mut out = format!("{} over {} at ({},{}): dim {}\n", self.object, self.field, self.p, self.q, self.dim);
        for b in &self.basis {
            out.push_str("  ");
            out.push_str(b);
            out.push('\n');
        }
        out
    }
}
