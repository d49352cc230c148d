//! Machine-readable report shapes shared by the suite runners and the CLI.
//!
//! Exact values serialize as `"p"` / `"p/q"` strings, never floats. Wall
//! time deliberately lives outside these structures so that equal
//! configurations produce byte-identical JSON.

use serde::{Deserialize, Serialize};

/// One failed site inside a suite.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct SiteFailure {
    pub n: i64,
    pub l: i64,
    pub which: String,
    pub residual: String,
}

/// Per-relation report of the elliptic identity catalogue.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct RelationReport {
    pub relation: String,
    pub m: u32,
    pub sites_checked: usize,
    pub failures: Vec<RelationFailure>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct RelationFailure {
    pub k: u32,
    pub l: i64,
    pub residual: String,
}

/// Outcome of one verification suite at one `m`.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct SuiteReport {
    pub suite: String,
    pub m: u32,
    pub pass: bool,
    pub sites_checked: usize,
    /// Sites skipped because a denominator broke down or a shifted
    /// superscript left the admissible window; never silently patched.
    pub skipped: usize,
    pub failures: Vec<SiteFailure>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub relations: Option<Vec<RelationReport>>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub notes: Vec<String>,
}

impl SuiteReport {
    pub fn new(suite: &str, m: u32) -> Self {
        SuiteReport {
            suite: suite.to_string(),
            m,
            pass: true,
            sites_checked: 0,
            skipped: 0,
            failures: Vec::new(),
            relations: None,
            notes: Vec::new(),
        }
    }

    pub fn record(&mut self, n: i64, l: i64, which: &str, zero: bool, residual: String) {
        self.sites_checked += 1;
        if !zero {
            self.pass = false;
            self.failures.push(SiteFailure {
                n,
                l,
                which: which.to_string(),
                residual,
            });
        }
    }

    pub fn skip(&mut self) {
        self.skipped += 1;
    }
}

/// Lattice dump of the one-variable (tau) side.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TauDump {
    pub m: u32,
    /// `tau[n][l]`.
    pub tau: Vec<Vec<String>>,
    pub vars: TauVars,
    pub origin: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TauVars {
    pub vt: Vec<Vec<String>>,
    pub wt: Vec<Vec<String>>,
}

/// Lattice dump of the elliptic determinant families plus the hQQD
/// variables.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EllipticDump {
    pub m: u32,
    /// Rows indexed by `k` starting at 0, columns by `l` starting at 2.
    pub delta: Vec<Vec<String>>,
    pub theta: Vec<Vec<String>>,
    pub pi: Vec<Vec<String>>,
    pub sigma: Vec<Vec<String>>,
    pub vars: EllipticVarsDump,
    pub origin: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EllipticVarsDump {
    pub u: Vec<Vec<String>>,
    pub v: Vec<Vec<String>>,
    pub w: Vec<Vec<String>>,
}
