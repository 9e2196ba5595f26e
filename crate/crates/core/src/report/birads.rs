use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// A BI-RADS assessment category, including the 4A/4B/4C subcategories.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BiradsCategory {
    B0,
    B1,
    B2,
    B3,
    B4,
    B4A,
    B4B,
    B4C,
    B5,
    B6,
}

impl BiradsCategory {
    pub const ALL: [BiradsCategory; 10] = [
        BiradsCategory::B0,
        BiradsCategory::B1,
        BiradsCategory::B2,
        BiradsCategory::B3,
        BiradsCategory::B4,
        BiradsCategory::B4A,
        BiradsCategory::B4B,
        BiradsCategory::B4C,
        BiradsCategory::B5,
        BiradsCategory::B6,
    ];

    /// Collapses 4A/4B/4C onto 4; every other category maps to itself.
    pub fn base(self) -> BiradsCategory {
        match self {
            BiradsCategory::B4A | BiradsCategory::B4B | BiradsCategory::B4C => BiradsCategory::B4,
            other => other,
        }
    }

    /// Severity rank used to pick "the most severe" score.
    ///
    /// Order: 1 < 2 < 3 < 0 < 4 (= 4A = 4B = 4C) < 5 < 6. Category 0 sits
    /// above the benign categories so an incomplete workup is never masked
    /// by a benign modality, and below 4 so biopsy-level findings dominate.
    pub fn severity_rank(self) -> u8 {
        match self.base() {
            BiradsCategory::B1 => 1,
            BiradsCategory::B2 => 2,
            BiradsCategory::B3 => 3,
            BiradsCategory::B0 => 4,
            BiradsCategory::B4 => 5,
            BiradsCategory::B5 => 6,
            BiradsCategory::B6 => 7,
            BiradsCategory::B4A | BiradsCategory::B4B | BiradsCategory::B4C => unreachable!(),
        }
    }

    /// Short label as it appears after "BI-RADS", e.g. `"4B"`.
    pub fn code(self) -> &'static str {
        match self {
            BiradsCategory::B0 => "0",
            BiradsCategory::B1 => "1",
            BiradsCategory::B2 => "2",
            BiradsCategory::B3 => "3",
            BiradsCategory::B4 => "4",
            BiradsCategory::B4A => "4A",
            BiradsCategory::B4B => "4B",
            BiradsCategory::B4C => "4C",
            BiradsCategory::B5 => "5",
            BiradsCategory::B6 => "6",
        }
    }

    pub(crate) fn from_parts(digit: char, sub: Option<char>) -> Option<BiradsCategory> {
        let cat = match (digit, sub.map(|c| c.to_ascii_uppercase())) {
            ('0', _) => BiradsCategory::B0,
            ('1', _) => BiradsCategory::B1,
            ('2', _) => BiradsCategory::B2,
            ('3', _) => BiradsCategory::B3,
            ('4', None) => BiradsCategory::B4,
            ('4', Some('A')) => BiradsCategory::B4A,
            ('4', Some('B')) => BiradsCategory::B4B,
            ('4', Some('C')) => BiradsCategory::B4C,
            ('4', Some(_)) => BiradsCategory::B4,
            ('5', _) => BiradsCategory::B5,
            ('6', _) => BiradsCategory::B6,
            _ => return None,
        };
        Some(cat)
    }
}

impl fmt::Display for BiradsCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BI-RADS {}", self.code())
    }
}

impl FromStr for BiradsCategory {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let s = s
            .strip_prefix("BI-RADS")
            .or_else(|| s.strip_prefix("B"))
            .unwrap_or(s)
            .trim();
        let mut chars = s.chars();
        let digit = chars.next().ok_or_else(|| "empty category".to_string())?;
        let sub = chars.next();
        if chars.next().is_some() {
            return Err(format!("unrecognized BI-RADS category {s:?}"));
        }
        BiradsCategory::from_parts(digit, sub).ok_or_else(|| format!("unrecognized BI-RADS category {s:?}"))
    }
}

/// The most severe category of a non-empty set, by [`BiradsCategory::severity_rank`].
///
/// Ties at the same rank (4 vs 4B) keep the first one seen.
pub fn most_severe<I>(categories: I) -> Option<BiradsCategory>
where
    I: IntoIterator<Item = BiradsCategory>,
{
    categories.into_iter().fold(None, |acc, c| match acc {
        Some(best) if best.severity_rank() >= c.severity_rank() => Some(best),
        _ => Some(c),
    })
}
