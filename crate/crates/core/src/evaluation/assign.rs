use super::{EvalError, RankingRecord};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::HashSet;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlindCode {
    pub code: String,
    pub condition: String,
}

/// Reviewers and the blinding key for one item.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Assignment {
    pub item_id: String,
    pub experts: Vec<String>,
    /// Codes in presentation order (A, B, C, ...).
    pub codes: Vec<BlindCode>,
}

fn code_for(i: usize) -> String {
    let mut n = i;
    let mut s = Vec::new();
    loop {
        s.push(b'A' + (n % 26) as u8);
        if n < 26 {
            break;
        }
        n = n / 26 - 1;
    }
    s.reverse();
    String::from_utf8(s).expect("ascii")
}

/// Gives every item `reviews_per_item` distinct experts, always choosing the
/// least-loaded ones so loads stay within one of each other, and hides the
/// condition labels behind per-item shuffled codes. Seeded and deterministic.
pub fn assign_blind_pairs(
    item_ids: &[String],
    expert_ids: &[String],
    conditions: &[String],
    reviews_per_item: usize,
    seed: u64,
) -> Result<Vec<Assignment>, EvalError> {
    if reviews_per_item == 0 {
        return Err(EvalError::Config("reviews_per_item must be at least 1".into()));
    }
    let unique_experts: HashSet<&String> = expert_ids.iter().collect();
    if unique_experts.len() != expert_ids.len() {
        return Err(EvalError::Config("expert ids must be distinct".into()));
    }
    if expert_ids.len() < reviews_per_item {
        return Err(EvalError::Config(format!(
            "{} expert(s) cannot give {reviews_per_item} reviews per item",
            expert_ids.len()
        )));
    }
    let unique_items: HashSet<&String> = item_ids.iter().collect();
    if unique_items.len() != item_ids.len() {
        return Err(EvalError::Config("item ids must be distinct".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut load = vec![0usize; expert_ids.len()];
    let mut out = Vec::with_capacity(item_ids.len());
    for item in item_ids {
        let mut order: Vec<usize> = (0..expert_ids.len()).collect();
        order.shuffle(&mut rng);
        order.sort_by_key(|&e| load[e]);
        let mut chosen: Vec<usize> = order[..reviews_per_item].to_vec();
        for &e in &chosen {
            load[e] += 1;
        }
        chosen.sort_unstable();
        let mut shuffled: Vec<&String> = conditions.iter().collect();
        shuffled.shuffle(&mut rng);
        out.push(Assignment {
            item_id: item.clone(),
            experts: chosen.into_iter().map(|e| expert_ids[e].clone()).collect(),
            codes: shuffled
                .into_iter()
                .enumerate()
                .map(|(i, c)| BlindCode {
                    code: code_for(i),
                    condition: c.clone(),
                })
                .collect(),
        });
    }
    Ok(out)
}

/// Replaces blinding codes in each record's ordering with condition labels.
pub fn unblind(records: &[RankingRecord], assignments: &[Assignment]) -> Result<Vec<RankingRecord>, EvalError> {
    records
        .iter()
        .map(|r| {
            let a = assignments
                .iter()
                .find(|a| a.item_id == r.item_id)
                .ok_or_else(|| EvalError::Contract(format!("no blinding key for item {:?}", r.item_id)))?;
            let ordering = r
                .ordering
                .iter()
                .map(|code| {
                    a.codes
                        .iter()
                        .find(|c| &c.code == code)
                        .map(|c| c.condition.clone())
                        .ok_or_else(|| EvalError::Contract(format!("item {:?} has no code {code:?}", r.item_id)))
                })
                .collect::<Result<Vec<_>, _>>()?;
            Ok(RankingRecord {
                ordering,
                ..r.clone()
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ids(prefix: &str, n: usize) -> Vec<String> {
        (1..=n).map(|i| format!("{prefix}{i}")).collect()
    }

    #[test]
    fn codes() {
        assert_eq!(code_for(0), "A");
        assert_eq!(code_for(4), "E");
        assert_eq!(code_for(26), "AA");
    }

    #[test]
    fn one_item_two_experts() {
        let a = assign_blind_pairs(&ids("i", 1), &ids("e", 2), &ids("c", 5), 2, 7).unwrap();
        assert_eq!(a[0].experts, vec!["e1", "e2"]);
        assert_eq!(a[0].codes.len(), 5);
    }

    #[test]
    fn sixty_items_five_experts_balanced() {
        let a = assign_blind_pairs(&ids("i", 60), &ids("e", 5), &ids("c", 5), 2, 42).unwrap();
        for e in ids("e", 5) {
            assert_eq!(a.iter().filter(|x| x.experts.contains(&e)).count(), 24);
        }
        assert!(a.iter().all(|x| x.experts[0] != x.experts[1]));
        assert_eq!(a, assign_blind_pairs(&ids("i", 60), &ids("e", 5), &ids("c", 5), 2, 42).unwrap());
    }

    #[test]
    fn too_few_experts() {
        assert!(matches!(
            assign_blind_pairs(&ids("i", 3), &ids("e", 1), &ids("c", 5), 2, 0),
            Err(EvalError::Config(_))
        ));
    }

    #[test]
    fn unblind_maps_codes() {
        let a = assign_blind_pairs(&ids("i", 1), &ids("e", 2), &ids("c", 3), 2, 1).unwrap();
        let rec = RankingRecord {
            item_id: "i1".into(),
            expert_id: "e1".into(),
            dimension: super::super::Dimension::LogicalCoherence,
            ordering: vec!["C".into(), "A".into(), "B".into()],
        };
        let u = unblind(&[rec], &a).unwrap();
        let expect: Vec<String> = ["C", "A", "B"]
            .iter()
            .map(|code| a[0].codes.iter().find(|c| c.code == *code).unwrap().condition.clone())
            .collect();
        assert_eq!(u[0].ordering, expect);
    }
}
