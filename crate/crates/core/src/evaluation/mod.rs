//! Expert-ranking and questionnaire harness: blind assignment, rank-to-score
//! conversion, agreement, aggregation, questionnaire means, corpus counts and
//! report emission.

mod aggregate;
mod agreement;
mod assign;
mod corpus;
mod questionnaire;
mod report;

pub use aggregate::{aggregate_scores, ConditionRow, DimensionScore, ItemAgreement, ScoreTable, TABLE_CONDITIONS};
pub use agreement::{kendall_tau, kendall_w, rank_to_score};
pub use assign::{assign_blind_pairs, unblind, Assignment, BlindCode};
pub use corpus::{corpus_stats, read_manifest, CorpusRow, CorpusStats, ManifestRow};
pub use questionnaire::{
    read_questionnaire_csv, score_questionnaire, QCondition, QDimension, QuestionnaireResponse,
    QuestionnaireSummary, Scale,
};
pub use report::{generate_report, ReportFormat, ReportInputs, NO_DATA};

use serde::{Deserialize, Serialize};
use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

const RUBRIC_JSON: &str = include_str!("../../resources/rubric.json");

/// Annotator-facing rubric text, as shipped.
pub fn rubric_json() -> &'static str {
    RUBRIC_JSON
}

#[derive(Debug, Error, PartialEq)]
pub enum EvalError {
    #[error("contract violation: {0}")]
    Contract(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("{origin}: row {row}: {message}")]
    Row { origin: String, row: usize, message: String },
    #[error("{origin}: {message}")]
    Input { origin: String, message: String },
}

/// The six expert-evaluation dimensions, in report column order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Dimension {
    InstructionalAccuracy,
    ExpressiveClarity,
    LogicalCoherence,
    StudentEngagement,
    LinguisticNaturalness,
    PersonalizationRelevance,
}

impl Dimension {
    pub const ALL: [Dimension; 6] = [
        Dimension::InstructionalAccuracy,
        Dimension::ExpressiveClarity,
        Dimension::LogicalCoherence,
        Dimension::StudentEngagement,
        Dimension::LinguisticNaturalness,
        Dimension::PersonalizationRelevance,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Dimension::InstructionalAccuracy => "Instructional Accuracy",
            Dimension::ExpressiveClarity => "Expressive Clarity",
            Dimension::LogicalCoherence => "Logical Coherence",
            Dimension::StudentEngagement => "Student Engagement",
            Dimension::LinguisticNaturalness => "Linguistic Naturalness",
            Dimension::PersonalizationRelevance => "Personalization Relevance",
        }
    }

    pub fn short(self) -> &'static str {
        match self {
            Dimension::InstructionalAccuracy => "Instr.",
            Dimension::ExpressiveClarity => "Expre.",
            Dimension::LogicalCoherence => "Coher.",
            Dimension::StudentEngagement => "Engag.",
            Dimension::LinguisticNaturalness => "Natur.",
            Dimension::PersonalizationRelevance => "Perso.",
        }
    }

    pub fn id(self) -> &'static str {
        match self {
            Dimension::InstructionalAccuracy => "instructional_accuracy",
            Dimension::ExpressiveClarity => "expressive_clarity",
            Dimension::LogicalCoherence => "logical_coherence",
            Dimension::StudentEngagement => "student_engagement",
            Dimension::LinguisticNaturalness => "linguistic_naturalness",
            Dimension::PersonalizationRelevance => "personalization_relevance",
        }
    }
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Dimension {
    type Err = EvalError;

    /// Accepts the snake-case id, the full name or the column abbreviation.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        Dimension::ALL
            .into_iter()
            .find(|d| {
                t == d.id()
                    || t.eq_ignore_ascii_case(d.name())
                    || t.eq_ignore_ascii_case(d.short())
                    || t.eq_ignore_ascii_case(d.short().trim_end_matches('.'))
            })
            .ok_or_else(|| EvalError::Contract(format!("unknown dimension {t:?}")))
    }
}

/// One expert's best-to-worst ordering of one item's variants on one dimension.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankingRecord {
    pub item_id: String,
    pub expert_id: String,
    pub dimension: Dimension,
    pub ordering: Vec<String>,
}

impl RankingRecord {
    pub fn validate(&self) -> Result<(), EvalError> {
        if self.item_id.trim().is_empty() || self.expert_id.trim().is_empty() {
            return Err(EvalError::Contract("item_id and expert_id must be non-empty".into()));
        }
        if self.ordering.len() < 2 {
            return Err(EvalError::Contract(format!(
                "{}/{}: an ordering needs at least two entries",
                self.item_id, self.expert_id
            )));
        }
        let mut seen = HashSet::new();
        for label in &self.ordering {
            if label.trim().is_empty() || !seen.insert(label.as_str()) {
                return Err(EvalError::Contract(format!(
                    "{}/{}: ordering is not a permutation (label {label:?})",
                    self.item_id, self.expert_id
                )));
            }
        }
        Ok(())
    }

    /// 1-based rank of `label`, if present.
    pub fn rank_of(&self, label: &str) -> Option<usize> {
        self.ordering.iter().position(|l| l == label).map(|p| p + 1)
    }
}

#[derive(Debug, Deserialize)]
struct RankingCsvRow {
    item_id: String,
    expert_id: String,
    dimension: String,
    ordering: String,
}

/// Reads `item_id,expert_id,dimension,ordering` CSV; the ordering column is a
/// quoted comma-separated list, best first.
pub fn read_rankings_csv<R: std::io::Read>(reader: R, origin: &str) -> Result<Vec<RankingRecord>, EvalError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let mut out = Vec::new();
    for (i, row) in rdr.deserialize::<RankingCsvRow>().enumerate() {
        let row_no = i + 2;
        let err = |message: String| EvalError::Row {
            origin: origin.to_string(),
            row: row_no,
            message,
        };
        let row = row.map_err(|e| err(e.to_string()))?;
        let record = RankingRecord {
            item_id: row.item_id,
            expert_id: row.expert_id,
            dimension: row.dimension.parse().map_err(|e: EvalError| err(e.to_string()))?,
            ordering: row.ordering.split(',').map(|s| s.trim().to_string()).collect(),
        };
        record.validate().map_err(|e| err(e.to_string()))?;
        out.push(record);
    }
    Ok(out)
}

pub fn write_rankings_csv(records: &[RankingRecord]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["item_id", "expert_id", "dimension", "ordering"]).expect("in-memory write");
    for r in records {
        w.write_record([&r.item_id, &r.expert_id, r.dimension.id(), &r.ordering.join(",")])
            .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv is utf-8")
}

/// Rankings as either CSV or a JSON array of records, chosen by extension.
pub fn read_rankings_file(path: &std::path::Path) -> Result<Vec<RankingRecord>, EvalError> {
    let origin = path.display().to_string();
    let raw = std::fs::read_to_string(path).map_err(|e| EvalError::Input {
        origin: origin.clone(),
        message: e.to_string(),
    })?;
    if path.extension().is_some_and(|x| x == "json") {
        let records: Vec<RankingRecord> = serde_json::from_str(&raw).map_err(|e| EvalError::Input {
            origin: origin.clone(),
            message: e.to_string(),
        })?;
        for (i, r) in records.iter().enumerate() {
            r.validate().map_err(|e| EvalError::Row {
                origin: origin.clone(),
                row: i + 1,
                message: e.to_string(),
            })?;
        }
        Ok(records)
    } else {
        read_rankings_csv(raw.as_bytes(), &origin)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dimension_parsing() {
        assert_eq!("Instr.".parse::<Dimension>().unwrap(), Dimension::InstructionalAccuracy);
        assert_eq!("perso".parse::<Dimension>().unwrap(), Dimension::PersonalizationRelevance);
        assert_eq!("Logical Coherence".parse::<Dimension>().unwrap(), Dimension::LogicalCoherence);
        assert!("vibes".parse::<Dimension>().is_err());
    }

    #[test]
    fn csv_round_trip() {
        let raw = "item_id,expert_id,dimension,ordering\nx1,e1,Instr.,\"A,B,C\"\n";
        let recs = read_rankings_csv(raw.as_bytes(), "t").unwrap();
        assert_eq!(recs[0].ordering, vec!["A", "B", "C"]);
        let again = read_rankings_csv(write_rankings_csv(&recs).as_bytes(), "t").unwrap();
        assert_eq!(again, recs);
    }

    #[test]
    fn duplicate_label_names_the_row() {
        let raw = "item_id,expert_id,dimension,ordering\nx1,e1,Instr.,\"A,B,C\"\nx1,e2,Instr.,\"A,A,C\"\n";
        assert!(matches!(read_rankings_csv(raw.as_bytes(), "t"), Err(EvalError::Row { row: 3, .. })));
    }

    #[test]
    fn rubric_lists_six_dimensions() {
        let v: serde_json::Value = serde_json::from_str(rubric_json()).unwrap();
        let ids: Vec<&str> = v["dimensions"].as_array().unwrap().iter().map(|d| d["id"].as_str().unwrap()).collect();
        assert_eq!(ids, Dimension::ALL.iter().map(|d| d.id()).collect::<Vec<_>>());
    }
}
