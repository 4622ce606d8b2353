use super::EvalError;
use serde::{Deserialize, Serialize};

/// One evaluated sample: a (profile, content section) pair with its counts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestRow {
    pub course: String,
    pub sample_id: String,
    pub words: u64,
    pub queries: u64,
    pub retrieved_docs: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusRow {
    pub course: String,
    pub samples: u64,
    pub words: u64,
    pub queries: u64,
    pub retrieved_docs: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusStats {
    /// Courses in order of first appearance.
    pub rows: Vec<CorpusRow>,
    pub total: CorpusRow,
}

pub fn corpus_stats(manifest: &[ManifestRow]) -> CorpusStats {
    let mut rows: Vec<CorpusRow> = Vec::new();
    for m in manifest {
        let idx = match rows.iter().position(|r| r.course == m.course) {
            Some(i) => i,
            None => {
                rows.push(CorpusRow {
                    course: m.course.clone(),
                    ..CorpusRow::default()
                });
                rows.len() - 1
            }
        };
        let r = &mut rows[idx];
        r.samples += 1;
        r.words += m.words;
        r.queries += m.queries;
        r.retrieved_docs += m.retrieved_docs;
    }
    let total = rows.iter().fold(
        CorpusRow {
            course: "Total".into(),
            ..CorpusRow::default()
        },
        |mut t, r| {
            t.samples += r.samples;
            t.words += r.words;
            t.queries += r.queries;
            t.retrieved_docs += r.retrieved_docs;
            t
        },
    );
    CorpusStats { rows, total }
}

/// `course,sample_id,words,queries,retrieved_docs` CSV.
pub fn read_manifest<R: std::io::Read>(reader: R, origin: &str) -> Result<Vec<ManifestRow>, EvalError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    rdr.deserialize()
        .enumerate()
        .map(|(i, r)| {
            r.map_err(|e| EvalError::Row {
                origin: origin.into(),
                row: i + 2,
                message: e.to_string(),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_manifest_is_zero() {
        let s = corpus_stats(&[]);
        assert!(s.rows.is_empty());
        assert_eq!((s.total.samples, s.total.words, s.total.queries, s.total.retrieved_docs), (0, 0, 0, 0));
    }

    #[test]
    fn groups_in_first_seen_order() {
        let raw = "course,sample_id,words,queries,retrieved_docs\nB,1,10,3,4\nA,2,5,4,1\nB,3,1,5,2\n";
        let s = corpus_stats(&read_manifest(raw.as_bytes(), "t").unwrap());
        assert_eq!(s.rows[0].course, "B");
        assert_eq!((s.rows[0].samples, s.rows[0].words, s.rows[0].queries, s.rows[0].retrieved_docs), (2, 11, 8, 6));
        assert_eq!(s.total.words, 16);
    }
}
