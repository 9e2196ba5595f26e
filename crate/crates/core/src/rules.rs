//! Deterministic BI-RADS consistency oracle for resident drafts.
//!
//! Findings are recognized with an auditable phrase table (`data/birads_rules.json`,
//! overridable at runtime). Each modality score is checked against the strongest
//! finding feature in its section, the overall score against the most severe
//! modality score, and the overall score against the management recommendation.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use once_cell::sync::Lazy;
use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::report::{most_severe, BiradsCategory, Modality, ParsedReport, SectionKind};

pub const BUILTIN_RULES_JSON: &str = include_str!("../data/birads_rules.json");

#[derive(Debug, Error)]
pub enum RuleError {
    #[error("report has no BI-RADS score")]
    NoScore,
    #[error("invalid rule table: {0}")]
    InvalidTable(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureKind {
    NoFindings,
    BenignListed,
    ProbablyBenign,
    Suspicious,
    KnownMalignancy,
    NeedsAdditionalImaging,
}

impl FeatureKind {
    /// Strength used to select the dominant finding. Additional-imaging
    /// language describes the workup, not a finding, and has none.
    fn strength(self) -> Option<u8> {
        match self {
            FeatureKind::NoFindings => Some(0),
            FeatureKind::BenignListed => Some(1),
            FeatureKind::ProbablyBenign => Some(2),
            FeatureKind::Suspicious => Some(3),
            FeatureKind::KnownMalignancy => Some(4),
            FeatureKind::NeedsAdditionalImaging => None,
        }
    }

    /// The category a finding of this kind calls for.
    pub fn implied_category(self) -> Option<BiradsCategory> {
        match self {
            FeatureKind::NoFindings => Some(BiradsCategory::B1),
            FeatureKind::BenignListed => Some(BiradsCategory::B2),
            FeatureKind::ProbablyBenign => Some(BiradsCategory::B3),
            FeatureKind::Suspicious => Some(BiradsCategory::B4),
            FeatureKind::KnownMalignancy => Some(BiradsCategory::B6),
            FeatureKind::NeedsAdditionalImaging => Some(BiradsCategory::B0),
        }
    }

    fn describe(self) -> &'static str {
        match self {
            FeatureKind::NoFindings => "no findings",
            FeatureKind::BenignListed => "benign",
            FeatureKind::ProbablyBenign => "probably benign",
            FeatureKind::Suspicious => "suspicious",
            FeatureKind::KnownMalignancy => "known malignancy",
            FeatureKind::NeedsAdditionalImaging => "additional imaging",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ManagementClass {
    Routine,
    ShortInterval,
    Biopsy,
    AdditionalImaging,
    ClinicallyIndicated,
    /// Absorbs phrases like "biopsy clip" that would otherwise read as management.
    None,
}

impl ManagementClass {
    fn describe(self) -> &'static str {
        match self {
            ManagementClass::Routine => "a routine screening interval",
            ManagementClass::ShortInterval => "a 3- or 6-month follow-up",
            ManagementClass::Biopsy => "biopsy or tissue diagnosis",
            ManagementClass::AdditionalImaging => "additional imaging evaluation",
            ManagementClass::ClinicallyIndicated | ManagementClass::None => "",
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FeatureRule {
    pub id: String,
    pub phrase: String,
    pub feature: FeatureKind,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ManagementRule {
    pub id: String,
    pub phrase: String,
    pub class: ManagementClass,
}

/// On-disk rule table: phrase to feature kind, plus management phrases.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RuleTable {
    pub version: String,
    pub features: Vec<FeatureRule>,
    #[serde(default)]
    pub management: Vec<ManagementRule>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FindingFeature {
    pub kind: FeatureKind,
    pub rule_id: String,
    pub phrase: String,
    pub source_span: (usize, usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub rule_id: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub modality: Option<Modality>,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConsistencyVerdict {
    pub flag: bool,
    pub explanations: Vec<String>,
    pub per_modality: BTreeMap<Modality, bool>,
    pub violations: Vec<Violation>,
    pub rules_version: String,
}

impl ConsistencyVerdict {
    /// Renders the verdict in the `Inconsistent BI-RADS: <bool> | Explanation: ...` grammar.
    pub fn to_feedback_text(&self) -> String {
        let explanation = if self.flag {
            self.explanations.join(" ")
        } else {
            "The BI-RADS scores are supported by the described findings and the follow-up recommendation. \
             Thus, there is no inconsistency in the BI-RADS assignment."
                .to_string()
        };
        format!(
            "Inconsistent BI-RADS: {} | Explanation: {}",
            if self.flag { "True" } else { "False" },
            explanation
        )
    }
}

struct Compiled<T> {
    id: String,
    phrase: String,
    value: T,
    pattern: Regex,
}

fn compile_phrase(phrase: &str) -> Result<Regex, RuleError> {
    let body = phrase
        .split_whitespace()
        .map(regex::escape)
        .collect::<Vec<_>>()
        .join(r"\s+");
    if body.is_empty() {
        return Err(RuleError::InvalidTable("empty phrase".into()));
    }
    Regex::new(&format!(r"(?i)\b{body}(?:s|es)?\b")).map_err(|e| RuleError::InvalidTable(e.to_string()))
}

/// Span-level match of a compiled phrase table, longest match winning overlaps.
fn match_table<'a, T: Copy>(table: &'a [Compiled<T>], text: &str) -> Vec<(usize, usize, &'a Compiled<T>)> {
    let mut candidates = Vec::new();
    for rule in table {
        for m in rule.pattern.find_iter(text) {
            candidates.push((m.start(), m.end(), rule));
        }
    }
    candidates.sort_by(|a, b| (b.1 - b.0).cmp(&(a.1 - a.0)).then(a.0.cmp(&b.0)));
    let mut taken: Vec<(usize, usize, &Compiled<T>)> = Vec::new();
    for c in candidates {
        if taken.iter().all(|t| c.1 <= t.0 || c.0 >= t.1) {
            taken.push(c);
        }
    }
    taken.sort_by_key(|t| t.0);
    taken
}

/// A compiled rule table.
pub struct RuleSet {
    version: String,
    features: Vec<Compiled<FeatureKind>>,
    management: Vec<Compiled<ManagementClass>>,
}

impl fmt::Debug for RuleSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RuleSet")
            .field("version", &self.version)
            .field("features", &self.features.len())
            .field("management", &self.management.len())
            .finish()
    }
}

static BUILTIN: Lazy<RuleSet> =
    Lazy::new(|| RuleSet::from_json(BUILTIN_RULES_JSON).expect("built-in rule table is valid"));

impl RuleSet {
    pub fn builtin() -> &'static RuleSet {
        &BUILTIN
    }

    pub fn from_json(json: &str) -> Result<RuleSet, RuleError> {
        let table: RuleTable = serde_json::from_str(json).map_err(|e| RuleError::InvalidTable(e.to_string()))?;
        RuleSet::from_table(&table)
    }

    pub fn from_table(table: &RuleTable) -> Result<RuleSet, RuleError> {
        let features = table
            .features
            .iter()
            .map(|r| {
                Ok(Compiled {
                    id: r.id.clone(),
                    phrase: r.phrase.clone(),
                    value: r.feature,
                    pattern: compile_phrase(&r.phrase)?,
                })
            })
            .collect::<Result<Vec<_>, RuleError>>()?;
        let management = table
            .management
            .iter()
            .map(|r| {
                Ok(Compiled {
                    id: r.id.clone(),
                    phrase: r.phrase.clone(),
                    value: r.class,
                    pattern: compile_phrase(&r.phrase)?,
                })
            })
            .collect::<Result<Vec<_>, RuleError>>()?;
        Ok(RuleSet {
            version: table.version.clone(),
            features,
            management,
        })
    }

    pub fn version(&self) -> &str {
        &self.version
    }

    /// Every feature phrase in the report, score labels excluded.
    fn raw_features(&self, report: &ParsedReport) -> Vec<FindingFeature> {
        let label_spans: Vec<(usize, usize)> = report.mentions.iter().map(|m| m.span).collect();
        match_table(&self.features, &report.raw_text)
            .into_iter()
            .filter(|(s, e, _)| label_spans.iter().all(|l| *e <= l.0 || *s >= l.1))
            .map(|(s, e, rule)| FindingFeature {
                kind: rule.value,
                rule_id: rule.id.clone(),
                phrase: rule.phrase.clone(),
                source_span: (s, e),
            })
            .collect()
    }

    fn management_classes(&self, text: &str) -> BTreeSet<ManagementClass> {
        match_table(&self.management, text)
            .into_iter()
            .map(|(_, _, r)| r.value)
            .filter(|c| *c != ManagementClass::None)
            .collect()
    }

    /// Feature list for a whole report. "No findings" language is kept only
    /// where no other finding shares its modality section.
    pub fn classify_findings(&self, report: &ParsedReport) -> Vec<FindingFeature> {
        let all = self.raw_features(report);
        let regions: Vec<(usize, usize)> = [SectionKind::MammogramFindings, SectionKind::UltrasoundFindings]
            .iter()
            .filter_map(|k| report.sections.get(k).map(|s| s.span))
            .collect();
        let region_of = |pos: usize| regions.iter().copied().find(|r| pos >= r.0 && pos < r.1);
        all.iter()
            .filter(|f| {
                if f.kind != FeatureKind::NoFindings {
                    return true;
                }
                let region = region_of(f.source_span.0);
                !all.iter().any(|g| {
                    g.kind != FeatureKind::NoFindings
                        && g.kind != FeatureKind::NeedsAdditionalImaging
                        && region_of(g.source_span.0) == region
                })
            })
            .cloned()
            .collect()
    }

    pub fn check(&self, report: &ParsedReport) -> Result<ConsistencyVerdict, RuleError> {
        let overall = report.score(Modality::Overall).ok_or(RuleError::NoScore)?;
        let features = self.raw_features(report);
        let follow_up = follow_up_text(report);
        let management = follow_up.as_deref().map(|t| self.management_classes(t)).unwrap_or_default();

        let mut violations = Vec::new();
        let mut per_modality = BTreeMap::new();

        for (modality, section) in [
            (Modality::Mammogram, SectionKind::MammogramFindings),
            (Modality::Ultrasound, SectionKind::UltrasoundFindings),
        ] {
            let Some(score) = report.score(modality) else {
                continue;
            };
            let span = match report.sections.get(&section) {
                Some(s) => s.span,
                None if !report.has_findings_section() => (0, report.raw_text.len()),
                None => {
                    per_modality.insert(modality, false);
                    continue;
                }
            };
            let in_span: Vec<&FindingFeature> = features
                .iter()
                .filter(|f| f.source_span.0 >= span.0 && f.source_span.1 <= span.1)
                .collect();
            let v = check_score(modality, score, &in_span, &management);
            per_modality.insert(modality, v.is_some());
            violations.extend(v);
        }

        let all: Vec<&FindingFeature> = features.iter().collect();
        let overall_violation = check_score(Modality::Overall, overall, &all, &management);
        per_modality.insert(Modality::Overall, overall_violation.is_some());
        let overall_features_failed = overall_violation.is_some();
        violations.extend(overall_violation);

        let modality_scores: Vec<BiradsCategory> = [Modality::Mammogram, Modality::Ultrasound]
            .iter()
            .filter_map(|m| report.score(*m))
            .collect();
        if let Some(expected) = most_severe(modality_scores.iter().copied()) {
            if expected.severity_rank() != overall.severity_rank() {
                violations.push(Violation {
                    rule_id: "R-overall-most-severe".into(),
                    modality: None,
                    message: format!(
                        "The overall {overall} should match the most severe modality score ({expected})."
                    ),
                });
            }
        }

        if !management.is_empty() {
            if let Some(msg) = follow_up_contradiction(overall, &management) {
                violations.push(Violation {
                    rule_id: "FU-assigned".into(),
                    modality: None,
                    message: msg,
                });
            }
            if overall_features_failed {
                if let Some(implied) = strongest(&all).and_then(FeatureKind::implied_category) {
                    let implied_rank = implied.severity_rank();
                    if implied_rank != overall.severity_rank()
                        && matches!(implied, BiradsCategory::B3 | BiradsCategory::B4)
                    {
                        let expected = expected_management(implied);
                        if let Some(expected) = expected.filter(|e| !management.contains(e)) {
                            violations.push(Violation {
                                rule_id: "FU-implied".into(),
                                modality: None,
                                message: format!(
                                    "The follow-up recommendation does not match the findings: {implied} findings warrant {}.",
                                    expected.describe()
                                ),
                            });
                        }
                    }
                }
            }
        }

        Ok(ConsistencyVerdict {
            flag: !violations.is_empty(),
            explanations: violations.iter().map(|v| format!("[{}] {}", v.rule_id, v.message)).collect(),
            per_modality,
            violations,
            rules_version: self.version.clone(),
        })
    }
}

fn follow_up_text(report: &ParsedReport) -> Option<String> {
    let parts: Vec<&str> = [SectionKind::Impression, SectionKind::Recommendation]
        .iter()
        .filter_map(|k| report.section(*k))
        .collect();
    if parts.is_empty() {
        None
    } else {
        Some(parts.join(" "))
    }
}

fn strongest(features: &[&FindingFeature]) -> Option<FeatureKind> {
    features
        .iter()
        .filter_map(|f| f.kind.strength().map(|s| (s, f.kind)))
        .max_by_key(|(s, _)| *s)
        .map(|(_, k)| k)
}

fn first_phrase(features: &[&FindingFeature], kind: FeatureKind) -> String {
    features
        .iter()
        .find(|f| f.kind == kind)
        .map(|f| f.phrase.clone())
        .unwrap_or_default()
}

fn modality_name(m: Modality) -> &'static str {
    match m {
        Modality::Mammogram => "mammogram",
        Modality::Ultrasound => "ultrasound",
        Modality::Overall => "overall",
    }
}

fn check_score(
    modality: Modality,
    score: BiradsCategory,
    features: &[&FindingFeature],
    management: &BTreeSet<ManagementClass>,
) -> Option<Violation> {
    let top = strongest(features);
    let top_strength = top.and_then(FeatureKind::strength);
    let name = modality_name(modality);
    let violation = |rule: &str, message: String| {
        Some(Violation {
            rule_id: rule.to_string(),
            modality: Some(modality),
            message,
        })
    };
    let stronger_than = |limit: u8| top_strength.is_some_and(|s| s > limit);
    let described = |top: Option<FeatureKind>| {
        top.map(|k| {
            format!(
                "{} findings (\"{}\"), which correspond to {}",
                k.describe(),
                first_phrase(features, k),
                k.implied_category().map(|c| c.to_string()).unwrap_or_default()
            )
        })
        .unwrap_or_else(|| "no findings".into())
    };

    match score.base() {
        BiradsCategory::B0 => {
            let workup = features.iter().any(|f| f.kind == FeatureKind::NeedsAdditionalImaging)
                || management.contains(&ManagementClass::AdditionalImaging);
            if !workup {
                return violation(
                    "R0-additional-imaging",
                    format!("The {name} {score} requires a need for additional imaging evaluation, which the report does not state."),
                );
            }
        }
        BiradsCategory::B1 => {
            if stronger_than(0) {
                return violation(
                    "R1-negative",
                    format!("The {name} {score} (negative) is assigned although the report describes {}.", described(top)),
                );
            }
        }
        BiradsCategory::B2 => {
            if stronger_than(1) {
                return violation(
                    "R2-benign",
                    format!("The {name} {score} (benign) is assigned although the report describes {}.", described(top)),
                );
            }
            if top != Some(FeatureKind::BenignListed) {
                return violation(
                    "R2-benign-described",
                    format!("The {name} {score} (benign) requires a described benign finding, but none is reported."),
                );
            }
        }
        BiradsCategory::B3 => {
            if top != Some(FeatureKind::ProbablyBenign) {
                return violation(
                    "R3-probably-benign",
                    format!(
                        "The {name} {score} (probably benign) requires a probably benign finding, but the report describes {}.",
                        described(top)
                    ),
                );
            }
        }
        BiradsCategory::B4 | BiradsCategory::B5 => {
            if !stronger_than(2) {
                return violation(
                    "R45-suspicious",
                    format!(
                        "The {name} {score} requires a suspicious finding justifying biopsy, but the report describes {}.",
                        described(top)
                    ),
                );
            }
        }
        BiradsCategory::B6 => {
            if top != Some(FeatureKind::KnownMalignancy) {
                return violation(
                    "R6-known-malignancy",
                    format!("The {name} {score} requires a known biopsy-proven malignancy, which the report does not mention."),
                );
            }
        }
        BiradsCategory::B4A | BiradsCategory::B4B | BiradsCategory::B4C => unreachable!("base() collapses subcategories"),
    }
    None
}

fn expected_management(category: BiradsCategory) -> Option<ManagementClass> {
    match category.base() {
        BiradsCategory::B0 => Some(ManagementClass::AdditionalImaging),
        BiradsCategory::B1 | BiradsCategory::B2 => Some(ManagementClass::Routine),
        BiradsCategory::B3 => Some(ManagementClass::ShortInterval),
        BiradsCategory::B4 | BiradsCategory::B5 => Some(ManagementClass::Biopsy),
        _ => None,
    }
}

fn follow_up_contradiction(score: BiradsCategory, present: &BTreeSet<ManagementClass>) -> Option<String> {
    let expected = expected_management(score)?;
    if present.contains(&expected) {
        return None;
    }
    let mut actionable: Vec<ManagementClass> = present
        .iter()
        .copied()
        .filter(|c| !matches!(c, ManagementClass::ClinicallyIndicated | ManagementClass::None))
        .collect();
    // A negative or benign study may still suggest tissue diagnosis "if clinically indicated".
    if matches!(score.base(), BiradsCategory::B1 | BiradsCategory::B2)
        && present.contains(&ManagementClass::ClinicallyIndicated)
    {
        actionable.retain(|c| *c != ManagementClass::Biopsy);
    }
    let found = actionable.first()?;
    Some(format!(
        "The follow-up recommendation ({}) is inconsistent with the overall {score}, which calls for {}.",
        found.describe(),
        expected.describe()
    ))
}

/// Severity rank of a category; see [`BiradsCategory::severity_rank`].
pub fn severity_rank(category: BiradsCategory) -> u8 {
    category.severity_rank()
}

pub fn classify_findings(report: &ParsedReport) -> Vec<FindingFeature> {
    RuleSet::builtin().classify_findings(report)
}

pub fn check_diagnosis_consistency(report: &ParsedReport) -> Result<ConsistencyVerdict, RuleError> {
    RuleSet::builtin().check(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::report::parse_report;
    use proptest::prelude::*;

    fn kinds(text: &str) -> Vec<FeatureKind> {
        classify_findings(&parse_report(text).unwrap()).into_iter().map(|f| f.kind).collect()
    }

    fn verdict(text: &str) -> ConsistencyVerdict {
        check_diagnosis_consistency(&parse_report(text).unwrap()).unwrap()
    }

    #[test]
    fn table_features() {
        assert_eq!(kinds("Left breast biopsy clips"), vec![FeatureKind::BenignListed]);
        assert_eq!(
            kinds("a 4 mm hypoechoic mass with sonographic features of a complicated cyst"),
            vec![FeatureKind::ProbablyBenign]
        );
        assert_eq!(kinds("Mass with spiculated margin."), vec![FeatureKind::Suspicious]);
    }

    #[test]
    fn no_findings_suppressed_by_co_occurring_feature() {
        assert_eq!(kinds("No suspicious masses, calcifications, or other findings are seen."), vec![
            FeatureKind::NoFindings
        ]);
        assert_eq!(
            kinds("No suspicious masses, calcifications, or other findings are seen. Left breast biopsy clips."),
            vec![FeatureKind::BenignListed]
        );
    }

    #[test]
    fn score_labels_are_not_findings() {
        let r = parse_report("Mammo BI-RADS 0: INCOMPLETE - NEED ADDITIONAL IMAGING EVALUATION").unwrap();
        assert!(classify_findings(&r).is_empty());
        let r = parse_report("OVERALL BI-RADS 2: BENIGN").unwrap();
        assert!(classify_findings(&r).is_empty());
    }

    #[test]
    fn missing_score_is_an_error() {
        let r = parse_report("No suspicious masses.").unwrap();
        assert!(matches!(check_diagnosis_consistency(&r), Err(RuleError::NoScore)));
    }

    #[test]
    fn overall_must_match_most_severe_modality() {
        let v = verdict(
            "MAMMOGRAM: No suspicious masses. Mammo BI-RADS 1: NEGATIVE US BREAST Benign simple cyst. \
             Ultrasound BI-RADS 2: BENIGN IMPRESSION: OVERALL BI-RADS 1: NEGATIVE A 1 year screening is recommended.",
        );
        assert!(v.flag);
        assert!(v.violations.iter().any(|x| x.rule_id == "R-overall-most-severe"));
    }

    #[test]
    fn suspicious_finding_with_biopsy_is_consistent() {
        let v = verdict(
            "MAMMOGRAM: Irregular mass with spiculated margins in the left breast. Mammo BI-RADS 5: HIGHLY SUGGESTIVE OF MALIGNANCY \
             IMPRESSION: OVERALL BI-RADS 5 Ultrasound-guided biopsy is recommended.",
        );
        assert!(!v.flag, "{:?}", v.explanations);
    }

    #[test]
    fn follow_up_contradiction_is_flagged() {
        let v = verdict(
            "MAMMOGRAM: Irregular mass with spiculated margins. IMPRESSION: OVERALL BI-RADS 4 A 1 year screening mammogram is recommended.",
        );
        assert!(v.violations.iter().any(|x| x.rule_id == "FU-assigned"));
    }

    #[test]
    fn biopsy_mentions_that_are_not_recommendations() {
        let rs = RuleSet::builtin();
        assert!(rs.management_classes("biopsy clips in the left breast").is_empty());
        assert!(rs.management_classes("stable biopsy-proven fibroadenoma").is_empty());
        assert!(rs.management_classes("biopsy is recommended").contains(&ManagementClass::Biopsy));
    }

    #[test]
    fn clinically_indicated_tissue_diagnosis_allowed_with_negative() {
        let v = verdict(
            "MAMMOGRAM: No suspicious masses. IMPRESSION: OVERALL BI-RADS 1: NEGATIVE \
             Surgical consultation or tissue diagnosis if clinically indicated.",
        );
        assert!(!v.flag, "{:?}", v.explanations);
    }

    #[test]
    fn custom_table_overrides_builtin() {
        let mut table: RuleTable = serde_json::from_str(BUILTIN_RULES_JSON).unwrap();
        for r in &mut table.features {
            if r.id == "PB-complicated-cyst" {
                r.feature = FeatureKind::BenignListed;
            }
        }
        let rules = RuleSet::from_table(&table).unwrap();
        let report = parse_report(
            "there is a 4 mm hypoechoic mass with sonographic features of a complicated cyst. OVERALL BI-RADS 2: BENIGN.",
        )
        .unwrap();
        assert!(!rules.check(&report).unwrap().flag);
        assert!(RuleSet::builtin().check(&report).unwrap().flag);
    }

    #[test]
    fn invalid_table_is_rejected() {
        assert!(RuleSet::from_json("{\"version\": \"x\"}").is_err());
    }

    const NEGATIVE_PHRASES: &[&str] = &[
        "No suspicious masses, calcifications, or other findings are seen.",
        "No suspicious abnormalities were seen sonographically.",
        "No suspicious findings in either breast.",
        "There is no mammographic evidence of malignancy.",
        "Breast density: Scattered areas of fibroglandular density.",
        "Tomosynthesis 3D and 2D imaging of the breast(s) were performed.",
    ];
    const ROUTINE_PHRASES: &[&str] = &[
        "A 1 year screening mammogram is recommended.",
        "Annual screening mammogram and ultrasound of both breast(s) is recommended.",
        "A 12-month screening mammogram is recommended. The patient will be sent a normal letter.",
    ];

    proptest! {
        #[test]
        fn negative_reports_are_never_flagged(
            mammo in proptest::collection::vec(proptest::sample::select(NEGATIVE_PHRASES), 1..4),
            us in proptest::option::of(proptest::collection::vec(proptest::sample::select(NEGATIVE_PHRASES), 1..3)),
            rec in proptest::sample::select(ROUTINE_PHRASES),
            explicit_overall in any::<bool>(),
        ) {
            let mut text = format!(
                "MAMMO SCREENING BILATERAL Clinical Indication: Routine screening. MAMMOGRAM: {} Mammo BI-RADS 1: NEGATIVE ",
                mammo.join(" ")
            );
            if let Some(us) = us {
                text.push_str(&format!("US BREAST COMPLETE BILATERAL {} Ultrasound BI-RADS 1: NEGATIVE ", us.join(" ")));
            }
            text.push_str("IMPRESSION: No imaging evidence of malignancy. ");
            if explicit_overall {
                text.push_str("OVERALL BI-RADS 1: NEGATIVE ");
            }
            text.push_str(rec);
            let v = verdict(&text);
            prop_assert!(!v.flag, "{}: {:?}", text, v.explanations);
        }

        #[test]
        fn flag_equals_presence_of_explanations(
            phrases in proptest::collection::vec(proptest::sample::select(vec![
                "Left breast biopsy clips.", "There is a focal asymmetry.", "Spiculated mass.",
                "No suspicious masses are seen.", "A complicated cyst.", "Additional views are recommended.",
            ]), 0..4),
            score in proptest::sample::select(BiradsCategory::ALL.to_vec()),
        ) {
            let text = format!("{} IMPRESSION: OVERALL BI-RADS {}", phrases.join(" "), score.code());
            let v = verdict(&text);
            prop_assert_eq!(v.flag, !v.explanations.is_empty());
            prop_assert_eq!(v.explanations.len(), v.violations.len());
        }
    }
}
