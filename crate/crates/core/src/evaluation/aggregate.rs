use super::agreement::kendall_w;
use super::{Dimension, EvalError, RankingRecord};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};

/// Condition labels in the benchmark table's row order. Other labels follow
/// in lexicographic order.
pub const TABLE_CONDITIONS: [&str; 5] = ["Human-Authored", "4o (w/ RAG)", "o1 (w/ RAG)", "r1 (w/o RAG)", "PAGE"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimensionScore {
    pub condition: String,
    pub dimension: Dimension,
    pub mean: f64,
    /// Rankings contributing to the mean.
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionRow {
    pub condition: String,
    pub scores: BTreeMap<Dimension, DimensionScore>,
    /// Mean of the dimension means present.
    pub overall: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ItemAgreement {
    pub item_id: String,
    pub dimension: Dimension,
    pub judges: usize,
    /// Absent with a single judge.
    pub w: Option<f64>,
    pub below_threshold: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreTable {
    pub threshold: f64,
    pub records: usize,
    pub rows: Vec<ConditionRow>,
    pub agreement: Vec<ItemAgreement>,
    pub flagged: usize,
}

fn condition_order(labels: BTreeSet<String>) -> Vec<String> {
    let mut out: Vec<String> = TABLE_CONDITIONS
        .iter()
        .filter(|c| labels.contains(**c))
        .map(|c| c.to_string())
        .collect();
    out.extend(labels.into_iter().filter(|l| !TABLE_CONDITIONS.contains(&l.as_str())));
    out
}

#[derive(Default)]
struct Acc {
    /// n -> (sum of n - rank, count)
    by_n: BTreeMap<usize, (u64, u64)>,
}

impl Acc {
    fn mean(&self) -> (f64, usize) {
        let count: u64 = self.by_n.values().map(|(_, c)| c).sum();
        let mean = if self.by_n.len() == 1 {
            let (&n, &(s, c)) = self.by_n.iter().next().expect("one entry");
            (100 * s) as f64 / ((n as u64 - 1) * c) as f64
        } else {
            self.by_n
                .iter()
                .map(|(&n, &(s, _))| (100 * s) as f64 / (n - 1) as f64)
                .sum::<f64>()
                / count as f64
        };
        (mean, count as usize)
    }
}

/// Per (condition, dimension) mean of rank scores, an overall column, and
/// per (item, dimension) concordance flagged against `threshold`.
/// The result does not depend on record order.
pub fn aggregate_scores(records: &[RankingRecord], threshold: f64) -> Result<ScoreTable, EvalError> {
    let mut acc: BTreeMap<(String, Dimension), Acc> = BTreeMap::new();
    let mut groups: BTreeMap<(String, Dimension), Vec<&Vec<String>>> = BTreeMap::new();
    let mut labels = BTreeSet::new();
    for r in records {
        r.validate()?;
        let n = r.ordering.len();
        for (pos, label) in r.ordering.iter().enumerate() {
            let e = acc.entry((label.clone(), r.dimension)).or_default().by_n.entry(n).or_insert((0, 0));
            e.0 += (n - (pos + 1)) as u64;
            e.1 += 1;
            labels.insert(label.clone());
        }
        groups.entry((r.item_id.clone(), r.dimension)).or_default().push(&r.ordering);
    }

    let rows = condition_order(labels)
        .into_iter()
        .map(|condition| {
            let scores: BTreeMap<Dimension, DimensionScore> = Dimension::ALL
                .into_iter()
                .filter_map(|d| {
                    acc.get(&(condition.clone(), d)).map(|a| {
                        let (mean, n) = a.mean();
                        (
                            d,
                            DimensionScore {
                                condition: condition.clone(),
                                dimension: d,
                                mean,
                                n,
                            },
                        )
                    })
                })
                .collect();
            let overall = scores.values().map(|s| s.mean).sum::<f64>() / scores.len().max(1) as f64;
            ConditionRow {
                condition,
                scores,
                overall,
            }
        })
        .collect();

    let mut agreement = Vec::with_capacity(groups.len());
    for ((item_id, dimension), orderings) in groups {
        let judges = orderings.len();
        let w = if judges >= 2 {
            let owned: Vec<Vec<&str>> = orderings.iter().map(|o| o.iter().map(String::as_str).collect()).collect();
            Some(kendall_w(&owned).map_err(|e| EvalError::Contract(format!("{item_id}/{dimension}: {e}")))?)
        } else {
            None
        };
        agreement.push(ItemAgreement {
            below_threshold: w.is_some_and(|w| w < threshold),
            item_id,
            dimension,
            judges,
            w,
        });
    }
    let flagged = agreement.iter().filter(|a| a.below_threshold).count();
    Ok(ScoreTable {
        threshold,
        records: records.len(),
        rows,
        agreement,
        flagged,
    })
}
