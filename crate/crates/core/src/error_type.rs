use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// The three report error types judged by readers and the model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorType {
    InconsistentFindings,
    InconsistentDescriptions,
    InconsistentDiagnoses,
}

impl ErrorType {
    pub const ALL: [ErrorType; 3] = [
        ErrorType::InconsistentFindings,
        ErrorType::InconsistentDescriptions,
        ErrorType::InconsistentDiagnoses,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ErrorType::InconsistentFindings => "inconsistent_findings",
            ErrorType::InconsistentDescriptions => "inconsistent_descriptions",
            ErrorType::InconsistentDiagnoses => "inconsistent_diagnoses",
        }
    }

    pub fn title(self) -> &'static str {
        match self {
            ErrorType::InconsistentFindings => "Inconsistent Findings",
            ErrorType::InconsistentDescriptions => "Inconsistent Descriptions",
            ErrorType::InconsistentDiagnoses => "Inconsistent Diagnoses",
        }
    }
}

impl fmt::Display for ErrorType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ErrorType {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key = s.trim().to_ascii_lowercase().replace(['-', ' '], "_");
        match key.as_str() {
            "inconsistent_findings" | "findings" => Ok(ErrorType::InconsistentFindings),
            "inconsistent_descriptions" | "descriptions" => Ok(ErrorType::InconsistentDescriptions),
            "inconsistent_diagnoses" | "diagnoses" | "diagnosis" => Ok(ErrorType::InconsistentDiagnoses),
            _ => Err(format!("unknown error type {s:?}")),
        }
    }
}
