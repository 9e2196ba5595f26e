//! Model-for-reader substitution: change in alpha when the model replaces
//! each human rater in turn, with a bootstrap CI and a sign-flip
//! permutation test.
//!
//! Swapping reader slot `r` with the model exchanges the two columns being
//! compared, which negates that slot's contribution
//! `alpha(H with r := model) - alpha(H)`. The null distribution of the mean
//! is therefore the mean under independent random sign flips.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::alpha::alpha_value;
use super::bootstrap::{bootstrap_ci, BootstrapCi, BootstrapConfig};
use super::{RatingMatrix, StatsError};
use crate::rng::SeededRng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum PermutationMethod {
    /// Exact when `2^raters <= iterations`, else Monte Carlo.
    #[default]
    Auto,
    Exact,
    MonteCarlo,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SubstitutionConfig {
    pub bootstrap: BootstrapConfig,
    pub permutation_iterations: usize,
    pub permutation_method: PermutationMethod,
}

impl Default for SubstitutionConfig {
    fn default() -> Self {
        SubstitutionConfig {
            bootstrap: BootstrapConfig::default(),
            permutation_iterations: 10_000,
            permutation_method: PermutationMethod::Auto,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PermutationResult {
    pub p_value: f64,
    pub method: PermutationMethod,
    pub configurations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubstitutionResult {
    pub alpha_original: f64,
    pub alpha_substituted: Vec<f64>,
    pub delta: f64,
    pub ci: BootstrapCi,
    pub p_value: f64,
    pub permutation: PermutationResult,
}

fn check_model(human: &RatingMatrix, model: &[Option<bool>]) -> Result<(), StatsError> {
    if model.len() != human.n_items() {
        return Err(StatsError::LengthMismatch {
            left: human.n_items(),
            right: model.len(),
        });
    }
    if human.n_raters() == 0 {
        return Err(StatsError::InsufficientRatings);
    }
    Ok(())
}

/// Per-slot differences `alpha(H with r := model) - alpha(H)` and alpha(H).
fn slot_deltas(human: &RatingMatrix, model: &[Option<bool>]) -> Option<(f64, Vec<f64>)> {
    let base = alpha_value(human)?;
    let subs: Option<Vec<f64>> = (0..human.n_raters())
        .map(|r| alpha_value(&human.with_column(r, model)))
        .collect();
    Some((base, subs?))
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

pub fn substitution_delta(
    human: &RatingMatrix,
    model: &[Option<bool>],
    config: &SubstitutionConfig,
) -> Result<SubstitutionResult, StatsError> {
    check_model(human, model)?;
    let (alpha_original, alpha_substituted) = slot_deltas(human, model).ok_or(StatsError::InsufficientRatings)?;
    let delta = mean(&alpha_substituted) - alpha_original;

    let rows: Vec<usize> = (0..human.n_items()).collect();
    let ci = bootstrap_ci(
        &rows,
        |idx| {
            let h = human.select_rows(idx);
            let m: Vec<Option<bool>> = idx.iter().map(|&i| model[i]).collect();
            let (base, subs) = slot_deltas(&h, &m)?;
            Some(mean(&subs) - base)
        },
        &config.bootstrap,
    )?;
    let permutation = permutation_test_delta(
        human,
        model,
        config.permutation_iterations,
        config.bootstrap.seed,
        config.permutation_method,
    )?;
    Ok(SubstitutionResult {
        alpha_original,
        alpha_substituted,
        delta,
        ci,
        p_value: permutation.p_value,
        permutation,
    })
}

/// Two-sided p for the observed delta. Exact enumeration gives
/// `#{|d*| >= |d|} / 2^R`; Monte Carlo uses add-one smoothing.
pub fn permutation_test_delta(
    human: &RatingMatrix,
    model: &[Option<bool>],
    iterations: usize,
    seed: u64,
    method: PermutationMethod,
) -> Result<PermutationResult, StatsError> {
    check_model(human, model)?;
    let (base, subs) = slot_deltas(human, model).ok_or(StatsError::InsufficientRatings)?;
    let d: Vec<f64> = subs.iter().map(|s| s - base).collect();
    let r = d.len();
    let observed = mean(&d).abs();
    // ties within rounding count as extreme
    let eps = 1e-12 * (1.0 + observed);
    let extreme = |signs: &dyn Fn(usize) -> bool| {
        let s: f64 = (0..r).map(|k| if signs(k) { -d[k] } else { d[k] }).sum();
        (s / r as f64).abs() >= observed - eps
    };

    let exact_ok = r < usize::BITS as usize && (1usize << r) <= iterations.max(1);
    let method = match method {
        PermutationMethod::Auto if exact_ok => PermutationMethod::Exact,
        PermutationMethod::Auto => PermutationMethod::MonteCarlo,
        m => m,
    };
    match method {
        PermutationMethod::Exact => {
            if r >= 31 {
                return Err(StatsError::TooManyRaters(r));
            }
            let total = 1usize << r;
            let hits = (0..total).into_par_iter().filter(|&mask| extreme(&|k| mask >> k & 1 == 1)).count();
            Ok(PermutationResult {
                p_value: hits as f64 / total as f64,
                method,
                configurations: total,
            })
        }
        _ => {
            let hits = (0..iterations as u64)
                .into_par_iter()
                .filter(|&i| {
                    let mut rng = SeededRng::with_stream(seed, i);
                    let flips: Vec<bool> = (0..r).map(|_| rng.coin()).collect();
                    extreme(&|k| flips[k])
                })
                .count();
            Ok(PermutationResult {
                p_value: (hits + 1) as f64 / (iterations + 1) as f64,
                method: PermutationMethod::MonteCarlo,
                configurations: iterations,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::krippendorff_alpha;

    const Y: Option<bool> = Some(true);
    const N: Option<bool> = Some(false);

    fn matrix(rows: &[Vec<Option<bool>>]) -> RatingMatrix {
        RatingMatrix::from_rows(
            (0..rows.len()).map(|i| format!("i{i}")).collect(),
            (0..rows[0].len()).map(|j| format!("r{j}")).collect(),
            rows.to_vec(),
        )
        .unwrap()
    }

    fn small_cfg() -> SubstitutionConfig {
        SubstitutionConfig {
            bootstrap: BootstrapConfig {
                iterations: 300,
                seed: 11,
                confidence: 0.95,
            },
            ..Default::default()
        }
    }

    fn six_items() -> RatingMatrix {
        matrix(&[
            vec![Y, Y, Y, N],
            vec![N, N, N, N],
            vec![Y, N, Y, Y],
            vec![N, N, Y, N],
            vec![Y, Y, Y, Y],
            vec![N, Y, N, N],
        ])
    }

    #[test]
    fn identical_raters_give_zero_delta() {
        let col = vec![Y, N, Y, N, N];
        let rows: Vec<Vec<Option<bool>>> = col.iter().map(|c| vec![*c; 8]).collect();
        let h = matrix(&rows);
        let r = substitution_delta(&h, &col, &small_cfg()).unwrap();
        assert_eq!(r.delta, 0.0);
        assert!(r.alpha_substituted.iter().all(|a| *a == r.alpha_original));
        assert_eq!(r.p_value, 1.0);
    }

    #[test]
    fn constant_model_lowers_alpha() {
        let h = six_items();
        let model = vec![N; 6];
        let r = substitution_delta(&h, &model, &small_cfg()).unwrap();
        // direct recomputation
        let base = krippendorff_alpha(&h).unwrap().alpha;
        let subs: Vec<f64> = (0..4).map(|k| krippendorff_alpha(&h.with_column(k, &model)).unwrap().alpha).collect();
        let expect = subs.iter().sum::<f64>() / 4.0 - base;
        assert!((r.delta - expect).abs() < 1e-12);
        assert!(r.delta < 0.0);
        assert!((r.delta - (r.alpha_substituted.iter().sum::<f64>() / 4.0 - r.alpha_original)).abs() < 1e-15);
    }

    #[test]
    fn exact_enumeration_by_hand() {
        let h = six_items();
        let model = vec![Y, N, Y, N, Y, N];
        let p = permutation_test_delta(&h, &model, 100, 0, PermutationMethod::Exact).unwrap();
        assert_eq!(p.configurations, 16);
        // independent enumeration of all sign vectors
        let base = krippendorff_alpha(&h).unwrap().alpha;
        let d: Vec<f64> = (0..4)
            .map(|k| krippendorff_alpha(&h.with_column(k, &model)).unwrap().alpha - base)
            .collect();
        let obs = (d.iter().sum::<f64>() / 4.0).abs();
        let mut hits = 0;
        for mask in 0..16u32 {
            let s: f64 = (0..4).map(|k| if mask & (1 << k) != 0 { -d[k] } else { d[k] }).sum();
            if (s / 4.0).abs() >= obs - 1e-12 {
                hits += 1;
            }
        }
        assert_eq!(p.p_value, hits as f64 / 16.0);
    }

    #[test]
    fn monte_carlo_is_seeded() {
        let h = six_items();
        let model = vec![N; 6];
        let a = permutation_test_delta(&h, &model, 2000, 5, PermutationMethod::MonteCarlo).unwrap();
        let b = permutation_test_delta(&h, &model, 2000, 5, PermutationMethod::MonteCarlo).unwrap();
        assert_eq!(a, b);
        let auto = permutation_test_delta(&h, &model, 2000, 5, PermutationMethod::Auto).unwrap();
        assert_eq!(auto.method, PermutationMethod::Exact);
    }

    #[test]
    fn model_length_must_match() {
        assert!(matches!(
            substitution_delta(&six_items(), &[Y], &small_cfg()),
            Err(StatsError::LengthMismatch { .. })
        ));
    }
}
