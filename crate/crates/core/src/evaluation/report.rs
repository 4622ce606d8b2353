use super::aggregate::ScoreTable;
use super::corpus::CorpusStats;
use super::questionnaire::{QCondition, QDimension, QuestionnaireSummary};
use super::{Dimension, EvalError};
use serde::Serialize;
use std::fmt::Write;
use std::str::FromStr;

pub const NO_DATA: &str = "no data";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Text,
}

impl FromStr for ReportFormat {
    type Err = EvalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "json" => Ok(ReportFormat::Json),
            "text" | "text-table" => Ok(ReportFormat::Text),
            other => Err(EvalError::Contract(format!("unknown report format {other:?} (expected json or text)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, Serialize)]
pub struct ReportInputs<'a> {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scores: Option<&'a ScoreTable>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub questionnaire: Option<&'a QuestionnaireSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub corpus: Option<&'a CorpusStats>,
}

fn cell(v: Option<f64>, prec: usize) -> String {
    match v {
        Some(x) => format!("{x:.prec$}"),
        None => "-".into(),
    }
}

fn table(out: &mut String, header: &[String], rows: &[Vec<String>]) {
    let mut widths: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
    for r in rows {
        for (i, c) in r.iter().enumerate() {
            widths[i] = widths[i].max(c.chars().count());
        }
    }
    let line = |cells: &[String]| {
        cells
            .iter()
            .enumerate()
            .map(|(i, c)| {
                if i == 0 {
                    format!("{c:<w$}", w = widths[i])
                } else {
                    format!("{c:>w$}", w = widths[i])
                }
            })
            .collect::<Vec<_>>()
            .join("  ")
            .trim_end()
            .to_string()
    };
    let _ = writeln!(out, "{}", line(header));
    let _ = writeln!(out, "{}", widths.iter().map(|w| "-".repeat(*w)).collect::<Vec<_>>().join("  "));
    for r in rows {
        let _ = writeln!(out, "{}", line(r));
    }
}

fn scores_text(out: &mut String, t: &ScoreTable) {
    let _ = writeln!(out, "Expert ranking scores (0-100)");
    if t.rows.is_empty() {
        let _ = writeln!(out, "{NO_DATA}");
        return;
    }
    let mut header = vec!["Method".to_string()];
    header.extend(Dimension::ALL.iter().map(|d| d.short().to_string()));
    header.push("Overall".into());
    let rows: Vec<Vec<String>> = t
        .rows
        .iter()
        .map(|r| {
            let mut cells = vec![r.condition.clone()];
            cells.extend(Dimension::ALL.iter().map(|d| cell(r.scores.get(d).map(|s| s.mean), 1)));
            cells.push(cell(Some(r.overall), 1));
            cells
        })
        .collect();
    table(out, &header, &rows);
    let judged = t.agreement.iter().filter(|a| a.w.is_some()).count();
    let _ = writeln!(
        out,
        "\nAgreement (Kendall's W, threshold {:.2}): {judged} item-dimension groups judged, {} below threshold",
        t.threshold, t.flagged
    );
    for a in t.agreement.iter().filter(|a| a.below_threshold) {
        let _ = writeln!(out, "  below: {} {} W={}", a.item_id, a.dimension.short(), cell(a.w, 3));
    }
}

fn questionnaire_text(out: &mut String, q: &QuestionnaireSummary) {
    let _ = writeln!(out, "Questionnaire means (scale {}-{})", q.scale.min, q.scale.max);
    if q.means.is_empty() {
        let _ = writeln!(out, "{NO_DATA}");
        return;
    }
    let mut header = vec!["Condition".to_string(), "n".to_string()];
    header.extend(QDimension::ALL.iter().map(|d| d.as_str().to_string()));
    let mut rows = Vec::new();
    for cond in [QCondition::Standardized, QCondition::Personalized] {
        if let Some(m) = q.means.get(&cond) {
            let mut cells = vec![cond.as_str().to_string(), q.counts[&cond].to_string()];
            cells.extend(QDimension::ALL.iter().map(|d| cell(m.get(d).copied(), 2)));
            rows.push(cells);
        }
    }
    if !q.deltas.is_empty() {
        let mut cells = vec!["Delta".to_string(), String::new()];
        cells.extend(QDimension::ALL.iter().map(|d| {
            let v = q.deltas[d];
            format!("{}{v:.2}", if v > 0.0 { "+" } else { "" })
        }));
        rows.push(cells);
    }
    table(out, &header, &rows);
}

fn corpus_text(out: &mut String, c: &CorpusStats) {
    let _ = writeln!(out, "Dataset statistics");
    let header: Vec<String> = ["Course", "# Samples", "# Words", "# Queries", "# Retri. Docs"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    let rows: Vec<Vec<String>> = c
        .rows
        .iter()
        .chain(std::iter::once(&c.total))
        .map(|r| {
            vec![
                r.course.clone(),
                r.samples.to_string(),
                r.words.to_string(),
                r.queries.to_string(),
                r.retrieved_docs.to_string(),
            ]
        })
        .collect();
    table(out, &header, &rows);
}

/// Deterministic JSON or aligned-text report. Absent or empty inputs are
/// rendered with an explicit "no data" marker.
pub fn generate_report(inputs: ReportInputs<'_>, format: ReportFormat) -> String {
    match format {
        ReportFormat::Json => {
            let mut v = serde_json::to_value(inputs).expect("report serializes");
            let empty = inputs.scores.is_none_or(|s| s.rows.is_empty())
                && inputs.questionnaire.is_none_or(|q| q.means.is_empty())
                && inputs.corpus.is_none();
            if empty {
                v["status"] = serde_json::Value::from(NO_DATA);
            }
            serde_json::to_string_pretty(&v).expect("report serializes") + "\n"
        }
        ReportFormat::Text => {
            let mut out = String::new();
            let mut any = false;
            if let Some(s) = inputs.scores {
                scores_text(&mut out, s);
                any = true;
            }
            if let Some(q) = inputs.questionnaire {
                if any {
                    out.push('\n');
                }
                questionnaire_text(&mut out, q);
                any = true;
            }
            if let Some(c) = inputs.corpus {
                if any {
                    out.push('\n');
                }
                corpus_text(&mut out, c);
                any = true;
            }
            if !any {
                out.push_str(NO_DATA);
                out.push('\n');
            }
            out
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::aggregate_scores;
    use super::*;

    #[test]
    fn unknown_format() {
        assert!(matches!("xml".parse::<ReportFormat>(), Err(EvalError::Contract(_))));
    }

    #[test]
    fn empty_scores_marked() {
        let t = aggregate_scores(&[], 0.8).unwrap();
        let inputs = ReportInputs {
            scores: Some(&t),
            ..Default::default()
        };
        assert!(generate_report(inputs, ReportFormat::Text).contains(NO_DATA));
        assert!(generate_report(inputs, ReportFormat::Json).contains(NO_DATA));
        assert_eq!(generate_report(ReportInputs::default(), ReportFormat::Text), "no data\n");
    }

    #[test]
    fn column_order() {
        let t = aggregate_scores(&[], 0.8).unwrap();
        let mut out = String::new();
        let mut t2 = t.clone();
        t2.rows.push(super::super::ConditionRow {
            condition: "PAGE".into(),
            scores: Default::default(),
            overall: 0.0,
        });
        scores_text(&mut out, &t2);
        let header = out.lines().nth(1).unwrap();
        let cols: Vec<&str> = header.split_whitespace().collect();
        assert_eq!(cols, vec!["Method", "Instr.", "Expre.", "Coher.", "Engag.", "Natur.", "Perso.", "Overall"]);
    }
}
