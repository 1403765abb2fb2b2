use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::lattice::GraphKind;

/// Outcome of one check: named statistics and the parameters that produced
/// them.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub name: String,
    pub pass: bool,
    pub stats: BTreeMap<String, f64>,
    pub params: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    /// Reported but not gated.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub exploratory: bool,
}

impl CheckReport {
    pub fn new(name: &str) -> Self {
        CheckReport { name: name.to_string(), pass: true, stats: BTreeMap::new(), params: BTreeMap::new(), notes: Vec::new(), exploratory: false }
    }

    pub fn stat(mut self, key: &str, value: f64) -> Self {
        self.stats.insert(key.to_string(), value);
        self
    }

    pub fn param(mut self, key: &str, value: f64) -> Self {
        self.params.insert(key.to_string(), value);
        self
    }

    pub fn note(mut self, text: impl Into<String>) -> Self {
        self.notes.push(text.into());
        self
    }

    pub fn gate(mut self, ok: bool) -> Self {
        self.pass &= ok;
        self
    }

    pub fn exploratory(mut self) -> Self {
        self.exploratory = true;
        self
    }

    /// One-line summary.
    pub fn summary(&self) -> String {
        let stats: Vec<String> = self.stats.iter().map(|(k, v)| format!("{k}={v:.6e}")).collect();
        let tag = if self.exploratory { " (exploratory)" } else { "" };
        format!("{} {}{tag}: {}", if self.pass { "PASS" } else { "FAIL" }, self.name, stats.join(" "))
    }
}

/// All checks run on one embedding.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub graph: GraphKind,
    pub n: i64,
    pub pass: bool,
    pub checks: Vec<CheckReport>,
}

impl VerifyReport {
    pub fn new(graph: GraphKind, n: i64) -> Self {
        VerifyReport { graph, n, pass: true, checks: Vec::new() }
    }

    pub fn push(&mut self, c: CheckReport) {
        self.pass &= c.pass || c.exploratory;
        self.checks.push(c);
    }

    pub fn failed(&self) -> impl Iterator<Item = &CheckReport> {
        self.checks.iter().filter(|c| !c.pass && !c.exploratory)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exploratory_checks_do_not_gate() {
        let mut r = VerifyReport::new(GraphKind::Tower, 3);
        r.push(CheckReport::new("a").stat("x", 1.0));
        r.push(CheckReport::new("b").gate(false).exploratory());
        assert!(r.pass && r.failed().count() == 0);
        r.push(CheckReport::new("c").gate(false));
        assert!(!r.pass);
        assert_eq!(r.failed().map(|c| c.name.as_str()).collect::<Vec<_>>(), ["c"]);
        let json = serde_json::to_string(&r).unwrap();
        assert_eq!(serde_json::from_str::<VerifyReport>(&json).unwrap(), r);
        assert!(r.checks[1].summary().starts_with("FAIL b (exploratory)"));
    }
}
