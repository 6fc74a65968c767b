use std::collections::{BTreeMap, HashMap, HashSet};

use serde::Serialize;

use crate::error::Result;
use crate::lexical::{normalize_form, ro_similarity};
use crate::model::{gold_partition, Corpus};

/// How singleton clusters enter the average intra-cluster similarity.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LexsimMode {
    /// Average over clusters with at least two mentions.
    #[default]
    NonSingleton,
    /// Singletons count as clusters with similarity 1.
    IncludeSingletons,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorpusStats {
    pub documents: usize,
    pub sentences_with_mentions: usize,
    pub mention_instances: usize,
    pub unique_surface_forms: usize,
    pub total_clusters: usize,
    pub avg_chain_length: f64,
    pub max_chain_length: usize,
    pub singleton_rate: f64,
    pub crossdoc_rate_all: f64,
    pub crossdoc_rate_nonsingleton: f64,
    /// False when there are no non-singleton clusters; the rate is then 0.
    pub crossdoc_nonsingleton_defined: bool,
    pub avg_forms_per_cluster: f64,
    pub avg_intracluster_lexsim: f64,
    pub lexsim_mode: LexsimMode,
}

fn mean(sum: f64, count: usize) -> f64 {
    if count == 0 {
        0.0
    } else {
        sum / count as f64
    }
}

/// Mean pairwise similarity over all mention-instance pairs of one cluster,
/// given the multiplicity of each normalized form.
fn cluster_lexsim(forms: &BTreeMap<&str, usize>, memo: &mut HashMap<(String, String), f64>) -> f64 {
    let total: usize = forms.values().sum();
    let pairs = total * (total - 1) / 2;
    let mut sum = 0.0;
    let entries: Vec<(&str, usize)> = forms.iter().map(|(f, c)| (*f, *c)).collect();
    for (i, &(fa, ca)) in entries.iter().enumerate() {
        sum += (ca * (ca - 1) / 2) as f64;
        for &(fb, cb) in &entries[i + 1..] {
            // BTreeMap order puts `fa < fb`, the canonical argument order.
            let s = *memo
                .entry((fa.to_owned(), fb.to_owned()))
                .or_insert_with(|| ro_similarity(fa, fb).value());
            sum += (ca * cb) as f64 * s;
        }
    }
    sum / pairs as f64
}

/// Corpus and chain statistics over the gold clustering.
pub fn compute_stats(corpus: &Corpus, mode: LexsimMode) -> Result<CorpusStats> {
    let gold = gold_partition(corpus)?;
    let by_id: HashMap<&str, usize> = corpus
        .mentions
        .iter()
        .enumerate()
        .map(|(i, m)| (m.mention_id.as_str(), i))
        .collect();
    let normalized: Vec<String> = corpus.mentions.iter().map(|m| normalize_form(&m.text)).collect();

    let sentences: HashSet<(&str, &str)> = corpus
        .mentions
        .iter()
        .map(|m| (m.doc_id.as_str(), m.sent_id.as_str()))
        .collect();
    let unique: HashSet<&str> = normalized.iter().map(String::as_str).collect();

    let clusters = gold.clusters();
    let total = clusters.len();
    let mut singletons = 0;
    let mut max_len = 0;
    let mut crossdoc = 0;
    let mut crossdoc_nonsingleton = 0;
    let mut forms_sum = 0usize;
    let mut lexsim_sum = 0.0;
    let mut lexsim_count = 0;
    let mut memo = HashMap::new();
    for members in clusters.values() {
        let idx: Vec<usize> = members.iter().map(|m| by_id[m]).collect();
        max_len = max_len.max(idx.len());
        let docs: HashSet<&str> = idx.iter().map(|&i| corpus.mentions[i].doc_id.as_str()).collect();
        let mut forms: BTreeMap<&str, usize> = BTreeMap::new();
        for &i in &idx {
            *forms.entry(normalized[i].as_str()).or_default() += 1;
        }
        forms_sum += forms.len();
        if idx.len() == 1 {
            singletons += 1;
            if mode == LexsimMode::IncludeSingletons {
                lexsim_sum += 1.0;
                lexsim_count += 1;
            }
        } else {
            if docs.len() > 1 {
                crossdoc_nonsingleton += 1;
            }
            lexsim_sum += cluster_lexsim(&forms, &mut memo);
            lexsim_count += 1;
        }
        if docs.len() > 1 {
            crossdoc += 1;
        }
    }

    Ok(CorpusStats {
        documents: corpus.doc_ids().len(),
        sentences_with_mentions: sentences.len(),
        mention_instances: corpus.mentions.len(),
        unique_surface_forms: unique.len(),
        total_clusters: total,
        avg_chain_length: mean(corpus.mentions.len() as f64, total),
        max_chain_length: max_len,
        singleton_rate: mean(singletons as f64, total),
        crossdoc_rate_all: mean(crossdoc as f64, total),
        crossdoc_rate_nonsingleton: mean(crossdoc_nonsingleton as f64, total - singletons),
        crossdoc_nonsingleton_defined: total > singletons,
        avg_forms_per_cluster: mean(forms_sum as f64, total),
        avg_intracluster_lexsim: mean(lexsim_sum, lexsim_count),
        lexsim_mode: mode,
    })
}
