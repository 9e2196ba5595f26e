//! Helpfulness proportions with case-clustered bootstrap CIs.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::bootstrap::{bootstrap_ci, BootstrapCi, BootstrapConfig};
use super::StatsError;
use crate::study::ReaderRole;
use crate::ErrorType;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HelpfulnessVote {
    pub case_id: String,
    pub reader_id: String,
    pub role: ReaderRole,
    pub error_type: ErrorType,
    pub helpful: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HelpfulnessRow {
    /// `None` pools both roles.
    pub role: Option<ReaderRole>,
    /// `None` pools all error types.
    pub error_type: Option<ErrorType>,
    pub helpful: usize,
    pub total: usize,
    pub proportion: f64,
    pub ci: BootstrapCi,
}

fn row(
    votes: &[&HelpfulnessVote],
    role: Option<ReaderRole>,
    error_type: Option<ErrorType>,
    config: &BootstrapConfig,
) -> Result<Option<HelpfulnessRow>, StatsError> {
    // resample cases, keeping every vote on a case together
    let mut by_case: BTreeMap<&str, (usize, usize)> = BTreeMap::new();
    for v in votes {
        let e = by_case.entry(v.case_id.as_str()).or_default();
        e.0 += usize::from(v.helpful);
        e.1 += 1;
    }
    let clusters: Vec<(usize, usize)> = by_case.into_values().collect();
    if clusters.is_empty() {
        return Ok(None);
    }
    let helpful: usize = clusters.iter().map(|c| c.0).sum();
    let total: usize = clusters.iter().map(|c| c.1).sum();
    let ci = bootstrap_ci(
        &clusters,
        |s| {
            let (y, n) = s.iter().fold((0, 0), |acc, c| (acc.0 + c.0, acc.1 + c.1));
            (n > 0).then(|| y as f64 / n as f64)
        },
        config,
    )?;
    Ok(Some(HelpfulnessRow {
        role,
        error_type,
        helpful,
        total,
        proportion: helpful as f64 / total as f64,
        ci,
    }))
}

/// Rows for each error type plus a pooled row, first over all readers and
/// then, when `stratify_by_role`, per role in the same shape.
pub fn helpfulness_summary(
    votes: &[HelpfulnessVote],
    stratify_by_role: bool,
    config: &BootstrapConfig,
) -> Result<Vec<HelpfulnessRow>, StatsError> {
    if votes.is_empty() {
        return Err(StatsError::EmptyData);
    }
    let mut strata = vec![None];
    if stratify_by_role {
        strata.extend([Some(ReaderRole::Attending), Some(ReaderRole::Resident)]);
    }
    let mut out = Vec::new();
    for role in strata {
        let types = ErrorType::ALL.iter().copied().map(Some).chain([None]);
        for t in types {
            let subset: Vec<&HelpfulnessVote> = votes
                .iter()
                .filter(|v| role.is_none_or(|r| v.role == r) && t.is_none_or(|t| v.error_type == t))
                .collect();
            if let Some(r) = row(&subset, role, t, config)? {
                out.push(r);
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn votes(n_yes: usize, n: usize) -> Vec<HelpfulnessVote> {
        (0..n)
            .map(|i| HelpfulnessVote {
                case_id: format!("c{}", i / 4),
                reader_id: format!("r{}", i % 8),
                role: if i % 8 < 4 { ReaderRole::Attending } else { ReaderRole::Resident },
                error_type: ErrorType::ALL[i % 3],
                helpful: (i * 37 % n) < n_yes,
            })
            .collect()
    }

    #[test]
    fn counts_347_of_400() {
        let v = votes(347, 400);
        assert_eq!(v.iter().filter(|x| x.helpful).count(), 347);
        let cfg = BootstrapConfig { iterations: 500, seed: 2, confidence: 0.95 };
        let rows = helpfulness_summary(&v, false, &cfg).unwrap();
        let pooled = rows.iter().find(|r| r.error_type.is_none()).unwrap();
        assert_eq!((pooled.helpful, pooled.total), (347, 400));
        assert!((pooled.proportion - 0.8675).abs() < 1e-12);
        assert!(pooled.ci.lo <= pooled.proportion && pooled.proportion <= pooled.ci.hi);
    }

    #[test]
    fn all_yes() {
        let v = votes(400, 400);
        let cfg = BootstrapConfig { iterations: 100, seed: 2, confidence: 0.95 };
        for r in helpfulness_summary(&v, true, &cfg).unwrap() {
            assert_eq!(r.proportion, 1.0);
            assert_eq!((r.ci.lo, r.ci.hi), (1.0, 1.0));
        }
    }

    #[test]
    fn stratified_shape() {
        let cfg = BootstrapConfig { iterations: 100, seed: 2, confidence: 0.95 };
        let rows = helpfulness_summary(&votes(300, 400), true, &cfg).unwrap();
        assert_eq!(rows.len(), 12);
        for role in [ReaderRole::Attending, ReaderRole::Resident] {
            for t in ErrorType::ALL {
                assert!(rows.iter().any(|r| r.role == Some(role) && r.error_type == Some(t)));
            }
        }
    }
}
