//! Run configuration: CLI flags merged over an optional JSON config file.

use serde::{Deserialize, Serialize};

use hqd_core::gram::EllipticSpec;
use hqd_core::measure::MeasureSpec;

/// The JSON shape accepted by `--config`; every field optional, explicit
/// command-line flags win.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub suite: Option<String>,
    pub m: Option<Vec<u32>>,
    pub n_max: Option<u32>,
    pub l_max: Option<i64>,
    pub seed: Option<u64>,
    pub seeds: Option<u32>,
    pub measure: Option<MeasureSpec>,
    pub points: Option<EllipticSpec>,
    pub mode: Option<String>,
    pub tolerance: Option<f64>,
    pub l_steps: Option<u32>,
    pub variable: Option<String>,
    pub out: Option<String>,
}

/// Fully resolved verify configuration, embedded verbatim in reports.
#[derive(Debug, Clone, Serialize)]
pub struct VerifyConfig {
    pub suite: String,
    pub m: Vec<u32>,
    pub n_max: u32,
    pub l_max: i64,
    pub seed: u64,
    pub seeds: u32,
    pub measure: Option<MeasureSpec>,
    pub points: Option<EllipticSpec>,
    pub mode: String,
}

/// Fully resolved eigen configuration.
#[derive(Debug, Clone, Serialize)]
pub struct EigenConfig {
    pub m: u32,
    pub l_max: u32,
    pub variable: String,
    pub mode: String,
    pub tolerance: f64,
    pub measure: MeasureSpec,
    pub seed: u64,
}

/// Fully resolved dump configuration.
#[derive(Debug, Clone, Serialize)]
pub struct DumpConfig {
    pub kind: String,
    pub m: u32,
    pub n_max: u32,
    pub l_max: i64,
    pub seed: u64,
    pub measure: Option<MeasureSpec>,
    pub points: Option<EllipticSpec>,
    pub evolved: bool,
}
