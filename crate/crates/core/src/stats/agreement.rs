//! Pairwise agreement: percent agreement, Cohen's kappa, precision/recall/F1.

use serde::{Deserialize, Serialize};

use super::StatsError;

/// 2x2 counts with `a` as rater 1 and `b` as rater 2. `yes_yes` is (a=Y, b=Y).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Confusion {
    pub yes_yes: u64,
    pub yes_no: u64,
    pub no_yes: u64,
    pub no_no: u64,
}

impl Confusion {
    pub fn new(yes_yes: u64, yes_no: u64, no_yes: u64, no_no: u64) -> Self {
        Confusion {
            yes_yes,
            yes_no,
            no_yes,
            no_no,
        }
    }

    /// Counts over positions where both labels are present.
    pub fn from_labels(a: &[Option<bool>], b: &[Option<bool>]) -> Result<Self, StatsError> {
        if a.len() != b.len() {
            return Err(StatsError::LengthMismatch {
                left: a.len(),
                right: b.len(),
            });
        }
        let mut c = Confusion::default();
        for (x, y) in a.iter().zip(b) {
            match (x, y) {
                (Some(true), Some(true)) => c.yes_yes += 1,
                (Some(true), Some(false)) => c.yes_no += 1,
                (Some(false), Some(true)) => c.no_yes += 1,
                (Some(false), Some(false)) => c.no_no += 1,
                _ => {}
            }
        }
        Ok(c)
    }

    pub fn total(&self) -> u64 {
        self.yes_yes + self.yes_no + self.no_yes + self.no_no
    }

    pub fn agree(&self) -> u64 {
        self.yes_yes + self.no_no
    }

    pub fn percent_agreement(&self) -> Result<f64, StatsError> {
        match self.total() {
            0 => Err(StatsError::NoPairs),
            n => Ok(self.agree() as f64 / n as f64),
        }
    }

    pub fn kappa(&self) -> Result<f64, StatsError> {
        let n = self.total();
        if n == 0 {
            return Err(StatsError::NoPairs);
        }
        let n = n as f64;
        let po = self.agree() as f64 / n;
        let a_yes = (self.yes_yes + self.yes_no) as f64 / n;
        let b_yes = (self.yes_yes + self.no_yes) as f64 / n;
        let pe = a_yes * b_yes + (1.0 - a_yes) * (1.0 - b_yes);
        if (1.0 - pe).abs() < 1e-15 {
            return Err(StatsError::DegenerateMarginals);
        }
        Ok((po - pe) / (1.0 - pe))
    }

    /// Treats `a` as the prediction and `b` as the truth.
    pub fn precision_recall_f1(&self) -> Prf {
        let tp = self.yes_yes as f64;
        let fp = self.yes_no as f64;
        let fn_ = self.no_yes as f64;
        let ratio = |num: f64, den: f64| if den > 0.0 { num / den } else { 0.0 };
        let precision = ratio(tp, tp + fp);
        let recall = ratio(tp, tp + fn_);
        Prf {
            precision,
            recall,
            f1: ratio(2.0 * precision * recall, precision + recall),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prf {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

pub fn percent_agreement(a: &[Option<bool>], b: &[Option<bool>]) -> Result<f64, StatsError> {
    Confusion::from_labels(a, b)?.percent_agreement()
}

pub fn cohens_kappa(a: &[Option<bool>], b: &[Option<bool>]) -> Result<f64, StatsError> {
    Confusion::from_labels(a, b)?.kappa()
}

/// Positive class is "error present". Undefined ratios are 0.
pub fn precision_recall_f1(pred: &[Option<bool>], truth: &[Option<bool>]) -> Result<Prf, StatsError> {
    Ok(Confusion::from_labels(pred, truth)?.precision_recall_f1())
}

/// Landis and Koch descriptive band for a kappa-like coefficient.
pub fn landis_koch(k: f64) -> &'static str {
    match k {
        k if k < 0.0 => "poor",
        k if k <= 0.20 => "slight",
        k if k <= 0.40 => "fair",
        k if k <= 0.60 => "moderate",
        k if k <= 0.80 => "substantial",
        _ => "almost perfect",
    }
}
