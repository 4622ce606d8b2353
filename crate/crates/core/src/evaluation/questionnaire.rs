use super::EvalError;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QDimension {
    Con,
    Deep,
    Attr,
    Eff,
    Stim,
    Dep,
}

impl QDimension {
    pub const ALL: [QDimension; 6] = [
        QDimension::Con,
        QDimension::Deep,
        QDimension::Attr,
        QDimension::Eff,
        QDimension::Stim,
        QDimension::Dep,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            QDimension::Con => "Con",
            QDimension::Deep => "Deep",
            QDimension::Attr => "Attr",
            QDimension::Eff => "Eff",
            QDimension::Stim => "Stim",
            QDimension::Dep => "Dep",
        }
    }

    pub fn question(self) -> &'static str {
        match self {
            QDimension::Con => "To what extent do you find the knowledge explanations clear?",
            QDimension::Deep => "How much does the platform help you gain a deeper understanding of the content?",
            QDimension::Attr => "How engaging and interactive do you find the learning activities and materials?",
            QDimension::Eff => "Does the platform help you learn more efficiently compared to other methods?",
            QDimension::Stim => "To what degree does the platform motivate you to continue learning?",
            QDimension::Dep => "Do you consider the course content accurate, reliable, and trustworthy?",
        }
    }
}

impl fmt::Display for QDimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for QDimension {
    type Err = EvalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        QDimension::ALL
            .into_iter()
            .find(|d| d.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| EvalError::Contract(format!("unknown questionnaire dimension {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QCondition {
    Standardized,
    Personalized,
}

impl QCondition {
    pub fn as_str(self) -> &'static str {
        match self {
            QCondition::Standardized => "Standardized",
            QCondition::Personalized => "Personalized",
        }
    }
}

impl FromStr for QCondition {
    type Err = EvalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "standardized" => Ok(QCondition::Standardized),
            "personalized" => Ok(QCondition::Personalized),
            other => Err(EvalError::Contract(format!("unknown condition {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Scale {
    pub min: u8,
    pub max: u8,
}

impl Default for Scale {
    fn default() -> Self {
        Self { min: 1, max: 5 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuestionnaireResponse {
    pub student_id: String,
    pub condition: QCondition,
    pub scores: BTreeMap<QDimension, u8>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub comment: Option<String>,
}

impl QuestionnaireResponse {
    pub fn validate(&self, scale: Scale) -> Result<(), String> {
        if self.student_id.trim().is_empty() {
            return Err("student_id is empty".into());
        }
        for d in QDimension::ALL {
            match self.scores.get(&d) {
                None => return Err(format!("{}: missing {d}", self.student_id)),
                Some(&v) if v < scale.min || v > scale.max => {
                    return Err(format!(
                        "{}: {d} = {v} is outside [{}, {}]",
                        self.student_id, scale.min, scale.max
                    ))
                }
                Some(_) => {}
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuestionnaireSummary {
    pub scale: Scale,
    /// Condition -> dimension -> mean.
    pub means: BTreeMap<QCondition, BTreeMap<QDimension, f64>>,
    pub counts: BTreeMap<QCondition, usize>,
    /// Personalized minus Standardized, where both are present.
    pub deltas: BTreeMap<QDimension, f64>,
}

/// Means per condition and dimension, plus Personalized − Standardized deltas.
/// Any out-of-scale or incomplete response fails the whole batch, naming it.
pub fn score_questionnaire(responses: &[QuestionnaireResponse], scale: Scale) -> Result<QuestionnaireSummary, EvalError> {
    let mut sums: BTreeMap<QCondition, ([u64; 6], usize)> = BTreeMap::new();
    for (i, r) in responses.iter().enumerate() {
        r.validate(scale).map_err(|message| EvalError::Row {
            origin: "responses".into(),
            row: i + 1,
            message,
        })?;
        let e = sums.entry(r.condition).or_insert(([0; 6], 0));
        for (k, d) in QDimension::ALL.iter().enumerate() {
            e.0[k] += u64::from(r.scores[d]);
        }
        e.1 += 1;
    }
    let mut means = BTreeMap::new();
    let mut counts = BTreeMap::new();
    for (cond, (s, n)) in &sums {
        let m: BTreeMap<QDimension, f64> = QDimension::ALL
            .iter()
            .enumerate()
            .map(|(k, d)| (*d, s[k] as f64 / *n as f64))
            .collect();
        means.insert(*cond, m);
        counts.insert(*cond, *n);
    }
    let mut deltas = BTreeMap::new();
    if let (Some(p), Some(s)) = (means.get(&QCondition::Personalized), means.get(&QCondition::Standardized)) {
        for d in QDimension::ALL {
            deltas.insert(d, p[&d] - s[&d]);
        }
    }
    Ok(QuestionnaireSummary {
        scale,
        means,
        counts,
        deltas,
    })
}

fn parse_score(cell: &str, origin: &str, row: usize, col: &str) -> Result<u8, EvalError> {
    cell.trim().parse::<u8>().map_err(|_| EvalError::Row {
        origin: origin.to_string(),
        row,
        message: format!("{col}: {cell:?} is not an integer score"),
    })
}

/// Reads questionnaire CSV in one of two layouts:
///
/// * long: `student_id,condition,Con,Deep,Attr,Eff,Stim,Dep`;
/// * paired: `student_id,Con,...,Dep,id,Con,...,Dep`, one Standardized and
///   one Personalized student per row.
///
/// Scores are checked against `scale`; the error names the offending row.
pub fn read_questionnaire_csv<R: std::io::Read>(
    reader: R,
    origin: &str,
    scale: Scale,
) -> Result<Vec<QuestionnaireResponse>, EvalError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let header = rdr
        .headers()
        .map_err(|e| EvalError::Input {
            origin: origin.into(),
            message: e.to_string(),
        })?
        .clone();
    let dims: Vec<String> = QDimension::ALL.iter().map(|d| d.as_str().to_string()).collect();
    let cols: Vec<&str> = header.iter().collect();
    let layout_long = cols.len() == 8 && cols[1].eq_ignore_ascii_case("condition") && cols[2..] == dims.iter().map(String::as_str).collect::<Vec<_>>()[..];
    let layout_paired = cols.len() == 14
        && cols[1..7] == dims.iter().map(String::as_str).collect::<Vec<_>>()[..]
        && cols[8..14] == dims.iter().map(String::as_str).collect::<Vec<_>>()[..];
    if !layout_long && !layout_paired {
        return Err(EvalError::Input {
            origin: origin.into(),
            message: format!("unrecognized questionnaire header: {}", cols.join(",")),
        });
    }
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let row = i + 2;
        let rec = rec.map_err(|e| EvalError::Row {
            origin: origin.into(),
            row,
            message: e.to_string(),
        })?;
        let mut build = |id: &str, cond: QCondition, cells: &[&str]| -> Result<(), EvalError> {
            let mut scores = BTreeMap::new();
            for (d, cell) in QDimension::ALL.iter().zip(cells) {
                scores.insert(*d, parse_score(cell, origin, row, d.as_str())?);
            }
            let r = QuestionnaireResponse {
                student_id: id.to_string(),
                condition: cond,
                scores,
                comment: None,
            };
            r.validate(scale).map_err(|message| EvalError::Row {
                origin: origin.into(),
                row,
                message,
            })?;
            out.push(r);
            Ok(())
        };
        let cells: Vec<&str> = rec.iter().collect();
        if layout_long {
            let cond: QCondition = cells[1].parse().map_err(|e: EvalError| EvalError::Row {
                origin: origin.into(),
                row,
                message: e.to_string(),
            })?;
            build(cells[0], cond, &cells[2..8])?;
        } else {
            build(cells[0], QCondition::Standardized, &cells[1..7])?;
            build(cells[7], QCondition::Personalized, &cells[8..14])?;
        }
    }
    Ok(out)
}
