//! Model-versus-reference agreement report with bootstrap CIs.

use serde::{Deserialize, Serialize};

use super::agreement::{landis_koch, Confusion};
use super::bootstrap::{bootstrap_ci, BootstrapConfig};
use super::StatsError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// Resamples where the statistic was undefined.
    pub skipped: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgreementReport {
    pub n_items: usize,
    pub confusion: Confusion,
    pub percent_agreement: Estimate,
    pub kappa: Estimate,
    pub kappa_band: String,
    pub precision: Estimate,
    pub recall: Estimate,
    pub f1: Estimate,
}

/// `model` is treated as the prediction, `reference` as the truth. Items
/// missing on either side are dropped before resampling.
pub fn agreement_report(
    model: &[Option<bool>],
    reference: &[Option<bool>],
    config: &BootstrapConfig,
) -> Result<AgreementReport, StatsError> {
    let confusion = Confusion::from_labels(model, reference)?;
    let pairs: Vec<(bool, bool)> = model
        .iter()
        .zip(reference)
        .filter_map(|(a, b)| Some(((*a)?, (*b)?)))
        .collect();
    if pairs.is_empty() {
        return Err(StatsError::NoPairs);
    }
    let conf = |s: &[(bool, bool)]| {
        let a: Vec<_> = s.iter().map(|p| Some(p.0)).collect();
        let b: Vec<_> = s.iter().map(|p| Some(p.1)).collect();
        Confusion::from_labels(&a, &b).unwrap()
    };
    let est = |f: &(dyn Fn(&Confusion) -> Option<f64> + Sync)| -> Result<Estimate, StatsError> {
        let ci = bootstrap_ci(&pairs, |s| f(&conf(s)), config)?;
        Ok(Estimate {
            value: ci.estimate,
            ci_low: ci.lo,
            ci_high: ci.hi,
            skipped: ci.skipped,
        })
    };
    let kappa = est(&|c| c.kappa().ok())?;
    Ok(AgreementReport {
        n_items: pairs.len(),
        confusion,
        percent_agreement: est(&|c| c.percent_agreement().ok())?,
        kappa_band: landis_koch(kappa.value).to_string(),
        kappa,
        precision: est(&|c| Some(c.precision_recall_f1().precision))?,
        recall: est(&|c| Some(c.precision_recall_f1().recall))?,
        f1: est(&|c| Some(c.precision_recall_f1().f1))?,
    })
}
