//! On-disk report wrapper for `learn`: the library report plus a status
//! string, so failed runs still leave a parseable artifact.

use serde::Serialize;

use sparse_moments::{Error, LearnReport};

#[derive(Serialize)]
pub struct CliReport {
    pub status: &'static str,
    #[serde(flatten)]
    pub report: Option<LearnReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl CliReport {
    pub fn success(report: LearnReport) -> Self {
        CliReport {
            status: "ok",
            report: Some(report),
            error: None,
        }
    }

    pub fn failure(err: &Error) -> Self {
        CliReport {
            status: status_label(err),
            report: None,
            error: Some(err.to_string()),
        }
    }
}

/// Closed status vocabulary for reports and benchmark rows. Numerical
/// consistency failures (for instance a weight vector that no longer
/// sums to 1 after an ill-conditioned solve) count as convergence
/// failures.
pub fn status_label(err: &Error) -> &'static str {
    match err.root_cause() {
        Error::DegreeDeficient { .. } => "degree_deficient",
        Error::DegenerateNodes { .. } => "degenerate_nodes",
        _ => "convergence_failure",
    }
}
