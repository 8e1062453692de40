//! Machine-readable pass/fail reports emitted by the `verify_*` operations.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
}

/// Outcome of one identity verification over a stated range.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerifyReport {
    pub identity: String,
    pub range: String,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub first_failure: Option<String>,
}

impl VerifyReport {
    pub fn pass(identity: impl Into<String>, range: impl Into<String>) -> Self {
        VerifyReport {
            identity: identity.into(),
            range: range.into(),
            status: Status::Pass,
            first_failure: None,
        }
    }

    pub fn fail(
        identity: impl Into<String>,
        range: impl Into<String>,
        failure: impl Into<String>,
    ) -> Self {
        VerifyReport {
            identity: identity.into(),
            range: range.into(),
            status: Status::Fail,
            first_failure: Some(failure.into()),
        }
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }
}
