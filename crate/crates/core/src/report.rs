//! Structured results of the verification suites.

use crate::groupoid::GroupoidElement;
use serde::Serialize;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckStatus {
    Pass,
    Fail,
    Unknown,
}

/// Evidence attached to a failed or refuted check.
#[derive(Debug, Clone, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    /// A groupoid element where a coefficient was observed nonzero, with
    /// the canonical rendering of that coefficient.
    Element {
        element: GroupoidElement,
        abs: f64,
        #[serde(skip_serializing_if = "Option::is_none")]
        coefficient: Option<String>,
    },
    /// Two equivalent elements on which a coefficient took different values.
    Pair {
        a: GroupoidElement,
        b: GroupoidElement,
        value_a: f64,
        value_b: f64,
        #[serde(skip_serializing_if = "Option::is_none")]
        coefficient: Option<String>,
    },
    Note { text: String },
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckItem {
    pub name: String,
    pub status: CheckStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
    pub wall_ms: u64,
}

impl CheckItem {
    pub fn new(name: impl Into<String>, status: CheckStatus) -> CheckItem {
        CheckItem {
            name: name.into(),
            status,
            residual: None,
            witness: None,
            wall_ms: 0,
        }
    }

    pub fn with_residual(mut self, r: f64) -> CheckItem {
        self.residual = Some(r);
        self
    }

    pub fn with_witness(mut self, w: Witness) -> CheckItem {
        self.witness = Some(w);
        self
    }

    pub fn passed(&self) -> bool {
        self.status == CheckStatus::Pass
    }
}

/// A named batch of checks, serializable as a JSON report.
#[derive(Debug, Clone, Serialize)]
pub struct CheckReport {
    pub schema_version: u32,
    pub suite: String,
    pub params: serde_json::Value,
    pub checks: Vec<CheckItem>,
    pub passed: bool,
}

impl CheckReport {
    pub fn new(suite: impl Into<String>, params: serde_json::Value) -> CheckReport {
        CheckReport {
            schema_version: SCHEMA_VERSION,
            suite: suite.into(),
            params,
            checks: Vec::new(),
            passed: true,
        }
    }

    pub fn push(&mut self, item: CheckItem) {
        // duplicate names would make "every check appears exactly once" a lie
        debug_assert!(
            !self.checks.iter().any(|c| c.name == item.name),
            "duplicate check name {}",
            item.name
        );
        self.passed &= item.passed();
        self.checks.push(item);
    }

    pub fn merge(&mut self, other: CheckReport) {
        for c in other.checks {
            self.push(c);
        }
    }

    pub fn find(&self, name: &str) -> Option<&CheckItem> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// Largest recorded residual, for quick summaries.
    pub fn max_residual(&self) -> f64 {
        self.checks
            .iter()
            .filter_map(|c| c.residual)
            .fold(0.0, f64::max)
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail")
    }
}
