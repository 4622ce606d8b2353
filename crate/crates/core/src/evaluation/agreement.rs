use super::EvalError;
use std::collections::HashMap;

/// Linear map of a 1-based rank among `n` onto [0, 100]: best 100, worst 0.
pub fn rank_to_score(rank: usize, n: usize) -> Result<f64, EvalError> {
    if n < 2 || rank == 0 || rank > n {
        return Err(EvalError::Contract(format!("rank {rank} of {n} is out of range")));
    }
    Ok(100.0 * (n - rank) as f64 / (n - 1) as f64)
}

/// Rank of each label per judge, checking all judges rank the same set.
fn rank_table<S: AsRef<str>>(orderings: &[Vec<S>]) -> Result<(Vec<&str>, Vec<Vec<u64>>), EvalError> {
    let first = orderings
        .first()
        .ok_or_else(|| EvalError::Contract("no orderings".into()))?;
    let labels: Vec<&str> = first.iter().map(AsRef::as_ref).collect();
    let index: HashMap<&str, usize> = labels.iter().enumerate().map(|(i, l)| (*l, i)).collect();
    if index.len() != labels.len() {
        return Err(EvalError::Contract("ordering repeats a label".into()));
    }
    let mut ranks = Vec::with_capacity(orderings.len());
    for (j, ordering) in orderings.iter().enumerate() {
        if ordering.len() != labels.len() {
            return Err(EvalError::Contract(format!("judge {j} ranks {} items, expected {}", ordering.len(), labels.len())));
        }
        let mut r = vec![0u64; labels.len()];
        for (pos, label) in ordering.iter().enumerate() {
            let i = *index
                .get(label.as_ref())
                .ok_or_else(|| EvalError::Contract(format!("judge {j} ranks unknown item {:?}", label.as_ref())))?;
            if r[i] != 0 {
                return Err(EvalError::Contract(format!("judge {j} ranks {:?} twice", label.as_ref())));
            }
            r[i] = pos as u64 + 1;
        }
        ranks.push(r);
    }
    Ok((labels, ranks))
}

/// Kendall's coefficient of concordance for `m >= 2` strict orderings of the
/// same `n >= 2` items, without tie correction.
///
/// With rank sums `R_i`, `S = sum (R_i - m(n+1)/2)^2` and
/// `W = 12 S / (m^2 (n^3 - n))`. The sum is kept in integers as `4S`.
pub fn kendall_w<S: AsRef<str>>(orderings: &[Vec<S>]) -> Result<f64, EvalError> {
    if orderings.len() < 2 {
        return Err(EvalError::Contract("agreement needs at least two judges".into()));
    }
    let (labels, ranks) = rank_table(orderings)?;
    let n = labels.len() as i128;
    let m = orderings.len() as i128;
    if n < 2 {
        return Err(EvalError::Contract("agreement needs at least two items".into()));
    }
    let mut four_s: i128 = 0;
    for i in 0..labels.len() {
        let r: i128 = ranks.iter().map(|row| row[i] as i128).sum();
        let d = 2 * r - m * (n + 1);
        four_s += d * d;
    }
    Ok((3 * four_s) as f64 / (m * m * (n * n * n - n)) as f64)
}

/// Kendall's tau-a between two strict orderings of the same items.
pub fn kendall_tau<S: AsRef<str>>(a: &[S], b: &[S]) -> Result<f64, EvalError> {
    let a: Vec<&str> = a.iter().map(AsRef::as_ref).collect();
    let b: Vec<&str> = b.iter().map(AsRef::as_ref).collect();
    let (_, ranks) = rank_table(&[a, b])?;
    let n = ranks[0].len();
    if n < 2 {
        return Err(EvalError::Contract("tau needs at least two items".into()));
    }
    let mut score: i64 = 0;
    for i in 0..n {
        for j in i + 1..n {
            let x = (ranks[0][i] as i64 - ranks[0][j] as i64).signum();
            let y = (ranks[1][i] as i64 - ranks[1][j] as i64).signum();
            score += x * y;
        }
    }
    Ok(score as f64 / (n * (n - 1) / 2) as f64)
}
