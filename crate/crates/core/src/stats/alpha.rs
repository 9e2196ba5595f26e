//! Krippendorff's alpha for nominal data via the coincidence matrix.

use serde::{Deserialize, Serialize};

use super::{RatingMatrix, StatsError};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlphaResult {
    pub alpha: f64,
    /// Items with at least two ratings.
    pub pairable_items: usize,
    /// Total pairable values `n`.
    pub pairable_values: f64,
    /// Every pairable value identical; alpha is reported as 1.0 by convention.
    pub no_variation: bool,
}

/// Binary coincidence matrix `o[c][k]`, summed over items with `m_u >= 2`
/// with each ordered pair weighted `1 / (m_u - 1)`.
pub fn coincidence(matrix: &RatingMatrix) -> ([[f64; 2]; 2], usize) {
    let mut o = [[0.0; 2]; 2];
    let mut items = 0;
    for row in &matrix.cells {
        let (mut ones, mut zeros) = (0.0f64, 0.0f64);
        for v in row.iter().flatten() {
            if *v {
                ones += 1.0
            } else {
                zeros += 1.0
            }
        }
        let m = ones + zeros;
        if m < 2.0 {
            continue;
        }
        items += 1;
        let w = 1.0 / (m - 1.0);
        o[0][0] += zeros * (zeros - 1.0) * w;
        o[1][1] += ones * (ones - 1.0) * w;
        o[0][1] += zeros * ones * w;
        o[1][0] += ones * zeros * w;
    }
    (o, items)
}

pub fn krippendorff_alpha(matrix: &RatingMatrix) -> Result<AlphaResult, StatsError> {
    let (o, items) = coincidence(matrix);
    let n0 = o[0][0] + o[0][1];
    let n1 = o[1][0] + o[1][1];
    let n = n0 + n1;
    if items == 0 {
        return Err(StatsError::InsufficientRatings);
    }
    if n0 == 0.0 || n1 == 0.0 {
        return Ok(AlphaResult {
            alpha: 1.0,
            pairable_items: items,
            pairable_values: n,
            no_variation: true,
        });
    }
    let d_o = (o[0][1] + o[1][0]) / n;
    let d_e = 2.0 * n0 * n1 / (n * (n - 1.0));
    Ok(AlphaResult {
        alpha: 1.0 - d_o / d_e,
        pairable_items: items,
        pairable_values: n,
        no_variation: false,
    })
}

/// Alpha value or `None` if undefined; used by resampling code.
pub(crate) fn alpha_value(matrix: &RatingMatrix) -> Option<f64> {
    krippendorff_alpha(matrix).ok().map(|r| r.alpha)
}
