//! BI-RADS lexicon dictionary and surface-form term extraction.

use once_cell::sync::Lazy;
use regex::Regex;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LexiconCategory {
    TissueComposition,
    MassShape,
    Orientation,
    MassMargin,
    EchoPattern,
    PosteriorFeatures,
    Calcifications,
    CalcificationMorphology,
    CalcificationDistribution,
    AssociatedFeatures,
    Vascularity,
    SpecialCases,
}

impl LexiconCategory {
    pub fn label(self) -> &'static str {
        match self {
            LexiconCategory::TissueComposition => "Tissue composition",
            LexiconCategory::MassShape => "Mass shape",
            LexiconCategory::Orientation => "Orientation",
            LexiconCategory::MassMargin => "Mass margin",
            LexiconCategory::EchoPattern => "Echo pattern",
            LexiconCategory::PosteriorFeatures => "Posterior features",
            LexiconCategory::Calcifications => "Calcifications",
            LexiconCategory::CalcificationMorphology => "Calcification morphology",
            LexiconCategory::CalcificationDistribution => "Calcification distribution",
            LexiconCategory::AssociatedFeatures => "Associated features",
            LexiconCategory::Vascularity => "Vascularity",
            LexiconCategory::SpecialCases => "Special cases",
        }
    }
}

/// The lexicon, in dictionary order. A term listed under two categories
/// ("round", "heterogeneous") resolves to the first one.
pub const DICTIONARY: &[(LexiconCategory, &[&str])] = &[
    (
        LexiconCategory::TissueComposition,
        &[
            "fat homogeneous background echotexture",
            "fibroglandular homogeneous background echotexture",
            "heterogeneous background echotexture",
        ],
    ),
    (LexiconCategory::MassShape, &["oval", "round", "irregular"]),
    (LexiconCategory::Orientation, &["parallel", "not parallel"]),
    (
        LexiconCategory::MassMargin,
        &["circumscribed", "angular", "microlobulated", "indistinct", "spiculated"],
    ),
    (
        LexiconCategory::EchoPattern,
        &[
            "anechoic",
            "hyperechoic",
            "hypoechoic",
            "isoechoic",
            "heterogeneous",
            "complex cystic and solid",
        ],
    ),
    (
        LexiconCategory::PosteriorFeatures,
        &["no posterior features", "enhancement", "shadowing", "combined pattern"],
    ),
    (
        LexiconCategory::Calcifications,
        &[
            "calcifications in a mass",
            "calcifications outside of a mass",
            "intraductal calcifications",
        ],
    ),
    (
        LexiconCategory::CalcificationMorphology,
        &[
            "fine linear",
            "fine-linear branching",
            "fine pleomorphic",
            "amorphous",
            "coarse heterogeneous",
            "punctate",
            "skin",
            "vascular",
            "coarse",
            "popcorn-like",
            "large rod-like",
            "round",
            "rim",
            "eggshell",
            "dystrophic",
            "milk of calcium",
            "suture",
        ],
    ),
    (
        LexiconCategory::CalcificationDistribution,
        &["segmental", "linear", "grouped", "regional", "diffuse"],
    ),
    (
        LexiconCategory::AssociatedFeatures,
        &[
            "architectural distortion",
            "duct changes",
            "skin thickening",
            "skin retractions",
            "edema",
        ],
    ),
    (
        LexiconCategory::Vascularity,
        &["absent", "internal vascularity", "vessels in rim"],
    ),
    (
        LexiconCategory::SpecialCases,
        &[
            "simple cyst",
            "clustered microcysts",
            "complicated cyst",
            "mass in or on skin",
            "foreign body including implants",
            "intramammary lymph nodes",
            "axillary lymph nodes",
            "vascular abnormalities",
            "arteriovenous malformations",
            "pseudoaneurysms",
            "mondor disease",
            "postsurgical fluid collection",
            "fat necrosis",
        ],
    ),
];

/// A lexicon term found in report text. `char_span` is a half-open byte range
/// into the text the term was extracted from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LexiconTerm {
    pub category: LexiconCategory,
    pub term: String,
    pub char_span: (usize, usize),
}

struct CompiledTerm {
    category: LexiconCategory,
    term: &'static str,
    pattern: Regex,
}

static COMPILED: Lazy<Vec<CompiledTerm>> = Lazy::new(|| {
    let mut seen = std::collections::HashSet::new();
    let mut out = Vec::new();
    for (category, terms) in DICTIONARY {
        for term in *terms {
            if !seen.insert(*term) {
                continue;
            }
            let body = term
                .split(' ')
                .map(regex::escape)
                .collect::<Vec<_>>()
                .join(r"\s+");
            out.push(CompiledTerm {
                category: *category,
                term,
                pattern: Regex::new(&format!("(?i){body}")).expect("lexicon pattern"),
            });
        }
    }
    out
});

fn is_word_byte(b: u8) -> bool {
    b.is_ascii_alphanumeric() || b == b'_'
}

/// Case-insensitive whole-word dictionary matches; on overlaps the longest
/// match wins (earlier start breaks ties). Results are ordered by span.
pub fn extract_terms(text: &str) -> Vec<LexiconTerm> {
    let bytes = text.as_bytes();
    let mut candidates: Vec<(usize, usize, &CompiledTerm)> = Vec::new();
    for compiled in COMPILED.iter() {
        for m in compiled.pattern.find_iter(text) {
            let (start, end) = (m.start(), m.end());
            let left_ok = start == 0 || !is_word_byte(bytes[start - 1]);
            let right_ok = end == bytes.len() || !is_word_byte(bytes[end]);
            if left_ok && right_ok {
                candidates.push((start, end, compiled));
            }
        }
    }
    candidates.sort_by(|a, b| (b.1 - b.0).cmp(&(a.1 - a.0)).then(a.0.cmp(&b.0)));

    let mut taken: Vec<(usize, usize, &CompiledTerm)> = Vec::new();
    for cand in candidates {
        if taken.iter().all(|t| cand.1 <= t.0 || cand.0 >= t.1) {
            taken.push(cand);
        }
    }
    taken.sort_by_key(|t| t.0);
    taken
        .into_iter()
        .map(|(start, end, c)| LexiconTerm {
            category: c.category,
            term: c.term.to_string(),
            char_span: (start, end),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pairs(text: &str) -> Vec<(LexiconCategory, String)> {
        extract_terms(text).into_iter().map(|t| (t.category, t.term)).collect()
    }

    #[test]
    fn oval_isoechoic_mass() {
        assert_eq!(
            pairs("oval isoechoic mass"),
            vec![
                (LexiconCategory::MassShape, "oval".to_string()),
                (LexiconCategory::EchoPattern, "isoechoic".to_string()),
            ]
        );
    }

    #[test]
    fn no_terms() {
        assert!(extract_terms("The patient will be sent a normal letter.").is_empty());
    }

    #[test]
    fn circumscribed_margin() {
        assert_eq!(
            pairs("A mass with circumscribed margins in the findings."),
            vec![(LexiconCategory::MassMargin, "circumscribed".to_string())]
        );
        assert!(pairs("circumscription").is_empty());
    }

    #[test]
    fn longest_match_wins() {
        assert_eq!(
            pairs("coarse heterogeneous calcifications"),
            vec![(LexiconCategory::CalcificationMorphology, "coarse heterogeneous".to_string())]
        );
        assert_eq!(
            pairs("Heterogeneous background echotexture"),
            vec![(
                LexiconCategory::TissueComposition,
                "heterogeneous background echotexture".to_string()
            )]
        );
        assert_eq!(
            pairs("a complicated cyst"),
            vec![(LexiconCategory::SpecialCases, "complicated cyst".to_string())]
        );
    }

    #[test]
    fn whole_words_only() {
        // "Heterogeneously" must not yield "heterogeneous".
        assert!(pairs("Breast density: Heterogeneously dense").is_empty());
        assert_eq!(pairs("rim"), vec![(LexiconCategory::CalcificationMorphology, "rim".into())]);
        assert!(pairs("trimmed").is_empty());
    }

    #[test]
    fn spans_index_the_text() {
        let text = "Irregular hypoechoic mass with SPICULATED margins and posterior shadowing.";
        let terms = extract_terms(text);
        assert_eq!(terms.len(), 4);
        for t in &terms {
            assert!(text[t.char_span.0..t.char_span.1].eq_ignore_ascii_case(&t.term));
        }
        assert!(terms.windows(2).all(|w| w[0].char_span.1 <= w[1].char_span.0));
    }
}
