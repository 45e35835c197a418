//! Machine-readable run reports.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::solver::SolveOutcome;
use crate::verdict::Verdict;

pub const TOOL: &str = "limfix";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub mod exit {
    pub const OK: i32 = 0;
    pub const ERROR: i32 = 1;
    pub const UNDETERMINED: i32 = 2;
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub tool: String,
    pub version: String,
    pub command: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outcome: Option<SolveOutcome>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verdict: Option<Verdict>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<serde_json::Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certificate_digest: Option<String>,
    pub iterations: usize,
    pub wall_time_ms: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config_hash: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub exit_code: i32,
}

impl RunReport {
    pub fn new(command: &str) -> Self {
        RunReport {
            tool: TOOL.into(),
            version: VERSION.into(),
            command: command.into(),
            outcome: None,
            verdict: None,
            oracle: None,
            certificate_digest: None,
            iterations: 0,
            wall_time_ms: 0.0,
            config_hash: None,
            error: None,
            exit_code: exit::OK,
        }
    }

    pub fn failed(command: &str, exit_code: i32, err: impl ToString) -> Self {
        RunReport {
            error: Some(err.to_string()),
            exit_code,
            ..RunReport::new(command)
        }
    }

    pub fn with_outcome(mut self, outcome: SolveOutcome) -> Self {
        let cert = outcome.certificate();
        self.iterations = cert.orbit_length;
        self.certificate_digest = Some(digest(&serde_json::to_vec(cert).expect("certificate serializes")));
        self.exit_code = if outcome.is_undetermined() {
            exit::UNDETERMINED
        } else {
            exit::OK
        };
        self.outcome = Some(outcome);
        self
    }

    pub fn with_verdict(mut self, verdict: Verdict) -> Self {
        self.certificate_digest = Some(digest(&serde_json::to_vec(&verdict).expect("verdict serializes")));
        self.exit_code = if verdict.is_certified() {
            exit::OK
        } else {
            exit::UNDETERMINED
        };
        self.verdict = Some(verdict);
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }
}

pub fn digest(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}
