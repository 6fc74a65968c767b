//! Domain types: mentions, sentences, corpora and partitions.
//!
//! Character offsets everywhere in this crate count Unicode scalar values of
//! the owning sentence, never bytes.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One annotated software mention.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Mention {
    pub mention_id: String,
    pub doc_id: String,
    pub sent_id: String,
    pub text: String,
    pub start_char: usize,
    pub end_char: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gold_cluster: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SentenceRecord {
    pub doc_id: String,
    pub sent_id: String,
    pub text: String,
}

impl SentenceRecord {
    pub fn key(&self) -> SentenceKey {
        SentenceKey::new(&self.doc_id, &self.sent_id)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SentenceKey {
    pub doc_id: String,
    pub sent_id: String,
}

impl SentenceKey {
    pub fn new(doc_id: &str, sent_id: &str) -> Self {
        Self {
            doc_id: doc_id.to_owned(),
            sent_id: sent_id.to_owned(),
        }
    }
}

impl fmt::Display for SentenceKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.doc_id, self.sent_id)
    }
}

impl Mention {
    pub fn sentence_key(&self) -> SentenceKey {
        SentenceKey::new(&self.doc_id, &self.sent_id)
    }
}

/// Documents, sentences and mentions. The unit of resolution and scoring.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Corpus {
    pub sentences: Vec<SentenceRecord>,
    pub mentions: Vec<Mention>,
}

/// A single invariant violation found by [`validate_corpus`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    /// Mention id or `doc/sent` key the violation concerns.
    pub subject: String,
    pub reason: ViolationReason,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationReason {
    DuplicateMentionId,
    DuplicateSentence,
    UnknownSentence,
    EmptySpan,
    SpanOutOfBounds { sentence_len: usize },
    SpanMismatch { expected: String },
    MixedGoldLabels,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.reason {
            ViolationReason::DuplicateMentionId => write!(f, "{}: duplicate mention_id", self.subject),
            ViolationReason::DuplicateSentence => write!(f, "{}: duplicate sentence", self.subject),
            ViolationReason::UnknownSentence => write!(f, "{}: unknown sentence", self.subject),
            ViolationReason::EmptySpan => write!(f, "{}: start_char >= end_char", self.subject),
            ViolationReason::SpanOutOfBounds { sentence_len } => {
                write!(f, "{}: span exceeds sentence length {sentence_len}", self.subject)
            }
            ViolationReason::SpanMismatch { expected } => {
                write!(f, "{}: span mismatch, sentence slice is {expected:?}", self.subject)
            }
            ViolationReason::MixedGoldLabels => {
                write!(f, "{}: gold_cluster present on some mentions only", self.subject)
            }
        }
    }
}

pub type ValidationReport = Vec<Violation>;

/// Slice `text` by char offsets. `None` if the range is out of bounds.
pub fn char_slice(text: &str, start: usize, end: usize) -> Option<&str> {
    if start > end {
        return None;
    }
    let mut indices = text.char_indices().map(|(i, _)| i).chain(std::iter::once(text.len()));
    let b_start = indices.nth(start)?;
    let b_end = if end == start {
        b_start
    } else {
        indices.nth(end - start - 1)?
    };
    Some(&text[b_start..b_end])
}

impl Corpus {
    pub fn new(sentences: Vec<SentenceRecord>, mentions: Vec<Mention>) -> Self {
        Self { sentences, mentions }
    }

    pub fn is_empty(&self) -> bool {
        self.mentions.is_empty()
    }

    pub fn sentence_index(&self) -> HashMap<SentenceKey, usize> {
        let mut index = HashMap::with_capacity(self.sentences.len());
        for (i, s) in self.sentences.iter().enumerate() {
            index.entry(s.key()).or_insert(i);
        }
        index
    }

    /// Whether every mention carries a gold label. False on an empty corpus.
    pub fn has_gold(&self) -> bool {
        !self.mentions.is_empty() && self.mentions.iter().all(|m| m.gold_cluster.is_some())
    }

    /// Distinct document ids in first-appearance order over sentences, then mentions.
    pub fn doc_ids(&self) -> Vec<String> {
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        let ids = self
            .sentences
            .iter()
            .map(|s| &s.doc_id)
            .chain(self.mentions.iter().map(|m| &m.doc_id));
        for id in ids {
            if seen.insert(id.as_str()) {
                out.push(id.clone());
            }
        }
        out
    }

    pub fn mention_ids(&self) -> BTreeSet<&str> {
        self.mentions.iter().map(|m| m.mention_id.as_str()).collect()
    }
}

/// Check every corpus invariant. An empty report means the corpus is valid.
pub fn validate_corpus(corpus: &Corpus) -> ValidationReport {
    let mut report = Vec::new();

    let mut index: HashMap<SentenceKey, usize> = HashMap::new();
    for (i, s) in corpus.sentences.iter().enumerate() {
        if index.insert(s.key(), i).is_some() {
            report.push(Violation {
                subject: s.key().to_string(),
                reason: ViolationReason::DuplicateSentence,
            });
        }
    }

    let mut ids = HashSet::new();
    for m in &corpus.mentions {
        if !ids.insert(m.mention_id.as_str()) {
            report.push(Violation {
                subject: m.mention_id.clone(),
                reason: ViolationReason::DuplicateMentionId,
            });
        }
        let Some(&si) = index.get(&m.sentence_key()) else {
            report.push(Violation {
                subject: m.mention_id.clone(),
                reason: ViolationReason::UnknownSentence,
            });
            continue;
        };
        let sentence = &corpus.sentences[si].text;
        let len = sentence.chars().count();
        if m.start_char >= m.end_char {
            report.push(Violation {
                subject: m.mention_id.clone(),
                reason: ViolationReason::EmptySpan,
            });
        } else if m.end_char > len {
            report.push(Violation {
                subject: m.mention_id.clone(),
                reason: ViolationReason::SpanOutOfBounds { sentence_len: len },
            });
        } else {
            let slice = char_slice(sentence, m.start_char, m.end_char).unwrap_or_default();
            if slice != m.text {
                report.push(Violation {
                    subject: m.mention_id.clone(),
                    reason: ViolationReason::SpanMismatch {
                        expected: slice.to_owned(),
                    },
                });
            }
        }
    }

    let labeled = corpus.mentions.iter().filter(|m| m.gold_cluster.is_some()).count();
    if labeled > 0 && labeled < corpus.mentions.len() {
        for m in corpus.mentions.iter().filter(|m| m.gold_cluster.is_none()) {
            report.push(Violation {
                subject: m.mention_id.clone(),
                reason: ViolationReason::MixedGoldLabels,
            });
        }
    }

    report
}

/// Total assignment of mention ids to opaque cluster labels.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Partition {
    pub assignment: BTreeMap<String, String>,
}

impl Partition {
    pub fn new(assignment: BTreeMap<String, String>) -> Self {
        Self { assignment }
    }

    pub fn len(&self) -> usize {
        self.assignment.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignment.is_empty()
    }

    pub fn label_of(&self, mention_id: &str) -> Option<&str> {
        self.assignment.get(mention_id).map(String::as_str)
    }

    /// Clusters keyed by label, member ids sorted.
    pub fn clusters(&self) -> BTreeMap<&str, Vec<&str>> {
        let mut out: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
        for (m, label) in &self.assignment {
            out.entry(label.as_str()).or_default().push(m.as_str());
        }
        out
    }

    /// Build from explicit clusters. Fails if a mention id appears twice.
    pub fn from_clusters<L, I, M>(clusters: I) -> Result<Self>
    where
        L: Into<String>,
        M: Into<String>,
        I: IntoIterator<Item = (L, Vec<M>)>,
    {
        let mut assignment = BTreeMap::new();
        for (label, members) in clusters {
            let label = label.into();
            for m in members {
                let m = m.into();
                if assignment.insert(m.clone(), label.clone()).is_some() {
                    return Err(Error::DuplicateMention(m));
                }
            }
        }
        Ok(Self { assignment })
    }

    /// The induced set-partition: sorted member lists, sorted among themselves.
    /// Two partitions are equivalent iff their canonical forms are equal.
    pub fn canonical(&self) -> Vec<Vec<String>> {
        let mut groups: Vec<Vec<String>> = self
            .clusters()
            .into_values()
            .map(|ms| ms.into_iter().map(str::to_owned).collect())
            .collect();
        groups.sort();
        groups
    }

    pub fn same_clustering(&self, other: &Partition) -> bool {
        self.canonical() == other.canonical()
    }

    /// True if every cluster of `self` lies inside one cluster of `coarser`.
    pub fn is_refinement_of(&self, coarser: &Partition) -> bool {
        let mut seen: HashMap<&str, &str> = HashMap::new();
        for (m, label) in &self.assignment {
            let Some(outer) = coarser.label_of(m) else {
                return false;
            };
            match seen.get(label.as_str()) {
                Some(&o) if o != outer => return false,
                Some(_) => {}
                None => {
                    seen.insert(label.as_str(), outer);
                }
            }
        }
        self.len() == coarser.len()
    }
}

/// Partition induced by the gold labels.
pub fn gold_partition(corpus: &Corpus) -> Result<Partition> {
    let mut assignment = BTreeMap::new();
    for m in &corpus.mentions {
        let label = m
            .gold_cluster
            .as_ref()
            .ok_or_else(|| Error::MissingGold(m.mention_id.clone()))?;
        assignment.insert(m.mention_id.clone(), label.clone());
    }
    Ok(Partition { assignment })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PartitionStats {
    pub cluster_count: usize,
    /// cluster size -> number of clusters with that size
    pub size_histogram: BTreeMap<usize, usize>,
}

pub fn partition_stats(partition: &Partition) -> PartitionStats {
    let mut sizes: HashMap<&str, usize> = HashMap::new();
    for label in partition.assignment.values() {
        *sizes.entry(label.as_str()).or_default() += 1;
    }
    let mut size_histogram = BTreeMap::new();
    for &size in sizes.values() {
        *size_histogram.entry(size).or_default() += 1;
    }
    PartitionStats {
        cluster_count: sizes.len(),
        size_histogram,
    }
}

/// Assign canonical labels to per-mention component ids: clusters are
/// numbered in order of their first mention in corpus order.
pub(crate) fn partition_from_labels(prefix: &str, corpus: &Corpus, labels: &[usize]) -> Partition {
    debug_assert_eq!(labels.len(), corpus.mentions.len());
    let mut numbering: HashMap<usize, usize> = HashMap::new();
    let mut assignment = BTreeMap::new();
    for (m, &l) in corpus.mentions.iter().zip(labels) {
        let next = numbering.len();
        let n = *numbering.entry(l).or_insert(next);
        assignment.insert(m.mention_id.clone(), format!("{prefix}{n}"));
    }
    Partition { assignment }
}
