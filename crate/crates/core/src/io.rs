//! Corpus (JSONL) and partition (JSON) file formats.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Corpus, Mention, Partition, SentenceRecord};

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum CorpusRecord {
    Sentence(SentenceRecord),
    Mention(Mention),
}

/// Parse a JSONL corpus. Blank lines are ignored. `origin` names the source
/// in error messages.
pub fn parse_corpus(text: &str, origin: &str) -> Result<Corpus> {
    let mut corpus = Corpus::default();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let record: CorpusRecord = serde_json::from_str(line).map_err(|source| Error::Parse {
            path: origin.to_owned(),
            line: i + 1,
            source,
        })?;
        match record {
            CorpusRecord::Sentence(s) => corpus.sentences.push(s),
            CorpusRecord::Mention(m) => corpus.mentions.push(m),
        }
    }
    Ok(corpus)
}

/// Serialize a corpus: all sentence records, then all mention records, each
/// in stored order.
pub fn corpus_to_jsonl(corpus: &Corpus) -> String {
    let mut out = String::new();
    let sentences = corpus.sentences.iter().cloned().map(CorpusRecord::Sentence);
    let mentions = corpus.mentions.iter().cloned().map(CorpusRecord::Mention);
    for record in sentences.chain(mentions) {
        out.push_str(&serde_json::to_string(&record).expect("corpus records serialize"));
        out.push('\n');
    }
    out
}

pub fn read_corpus(path: impl AsRef<Path>) -> Result<Corpus> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_corpus(&text, &path.display().to_string())
}

pub fn write_corpus(path: impl AsRef<Path>, corpus: &Corpus) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, corpus_to_jsonl(corpus)).map_err(|e| Error::io(path, e))
}

#[derive(Serialize, Deserialize)]
struct PartitionFile {
    clusters: BTreeMap<String, Vec<String>>,
}

/// `{"clusters": {"<label>": ["M1", ...]}}`, labels and member ids sorted.
pub fn partition_to_json(partition: &Partition) -> String {
    let clusters = partition
        .clusters()
        .into_iter()
        .map(|(label, members)| (label.to_owned(), members.into_iter().map(str::to_owned).collect()))
        .collect();
    let mut s = serde_json::to_string_pretty(&PartitionFile { clusters }).expect("partition serializes");
    s.push('\n');
    s
}

pub fn partition_from_json(text: &str) -> Result<Partition> {
    let file: PartitionFile = serde_json::from_str(text)?;
    Partition::from_clusters(file.clusters)
}

pub fn read_partition(path: impl AsRef<Path>) -> Result<Partition> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    partition_from_json(&text)
}

pub fn write_partition(path: impl AsRef<Path>, partition: &Partition) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, partition_to_json(partition)).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::fixtures::two_doc_corpus;

    #[test]
    fn parses_documented_records() {
        let text = r#"{"kind":"sentence","doc_id":"D1","sent_id":"S1","text":"We used MATLAB for analysis."}
{"kind":"mention","mention_id":"M1","doc_id":"D1","sent_id":"S1","text":"MATLAB","start_char":8,"end_char":14,"gold_cluster":"C7"}
"#;
        let c = parse_corpus(text, "inline").unwrap();
        assert_eq!(c.sentences.len(), 1);
        assert_eq!(c.mentions[0].gold_cluster.as_deref(), Some("C7"));
        assert!(crate::model::validate_corpus(&c).is_empty());
    }

    #[test]
    fn corpus_roundtrip() {
        let c = two_doc_corpus();
        let text = corpus_to_jsonl(&c);
        assert_eq!(parse_corpus(&text, "x").unwrap(), c);
        assert_eq!(corpus_to_jsonl(&parse_corpus(&text, "x").unwrap()), text);
    }

    #[test]
    fn unlabeled_mentions_omit_gold_field() {
        let mut c = two_doc_corpus();
        c.mentions[0].gold_cluster = None;
        assert!(!corpus_to_jsonl(&c).lines().nth(3).unwrap().contains("gold_cluster"));
    }

    #[test]
    fn parse_error_carries_line() {
        let err = parse_corpus("\n{\"kind\":\"bogus\"}\n", "f.jsonl").unwrap_err();
        assert!(err.to_string().starts_with("f.jsonl:2:"), "{err}");
    }

    #[test]
    fn partition_output_is_sorted() {
        let p = Partition::from_clusters([("b", vec!["M4", "M1"]), ("a", vec!["M3"])]).unwrap();
        let json = partition_to_json(&p);
        let value: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(value["clusters"]["b"], serde_json::json!(["M1", "M4"]));
        assert!(json.find("\"a\"").unwrap() < json.find("\"b\"").unwrap());
        assert_eq!(partition_from_json(&json).unwrap(), p);
    }
}
