//! Agreement and reliability statistics with seeded resampling.

pub mod agreement;
pub mod alpha;
pub mod bootstrap;
pub mod helpfulness;
pub mod matrix;
pub mod report;
pub mod substitution;

use thiserror::Error;

pub use agreement::{cohens_kappa, landis_koch, percent_agreement, precision_recall_f1, Confusion, Prf};
pub use alpha::{coincidence, krippendorff_alpha, AlphaResult};
pub use bootstrap::{bootstrap_ci, BootstrapCi, BootstrapConfig};
pub use helpfulness::{helpfulness_summary, HelpfulnessRow, HelpfulnessVote};
pub use matrix::RatingMatrix;
pub use report::{agreement_report, AgreementReport, Estimate};
pub use substitution::{
    permutation_test_delta, substitution_delta, PermutationMethod, PermutationResult, SubstitutionConfig,
    SubstitutionResult,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StatsError {
    #[error("label vectors differ in length ({left} vs {right})")]
    LengthMismatch { left: usize, right: usize },
    #[error("no item has both labels present")]
    NoPairs,
    #[error("expected agreement is 1; kappa is undefined")]
    DegenerateMarginals,
    #[error("no item has two or more ratings")]
    InsufficientRatings,
    #[error("empty input")]
    EmptyData,
    #[error("statistic is undefined on the full data")]
    UndefinedEstimate,
    #[error("statistic undefined on all {iterations} resamples")]
    AllResamplesDegenerate { iterations: usize },
    #[error("exact enumeration over {0} raters is too large")]
    TooManyRaters(usize),
    #[error("matrix shape: {0}")]
    Shape(String),
    #[error("matrix CSV: {0}")]
    Csv(String),
}
