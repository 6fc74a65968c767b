//! Context-aware resolver: mention vectors and document-context vectors are
//! unit-normalized, mixed as `alpha * mention + (1 - alpha) * document`, and
//! clustered by average-linkage agglomeration under cosine distance.

use std::collections::{BTreeSet, HashMap, HashSet};

use log::warn;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::embedding::{doc_key, hash_embed, EmbeddingTable};
use crate::error::{Error, Result};
use crate::fuzzy::connected_components;
use crate::lexical::normalize_form;
use crate::model::{partition_from_labels, Corpus, Partition};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CarConfig {
    pub alpha: f64,
    pub delta: f64,
    pub max_context_sentences: usize,
}

impl Default for CarConfig {
    fn default() -> Self {
        Self {
            alpha: 0.6,
            delta: 0.4,
            max_context_sentences: 10,
        }
    }
}

impl CarConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(Error::InvalidConfig(format!("alpha {} outside [0, 1]", self.alpha)));
        }
        if !(self.delta >= 0.0 && self.delta.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "delta {} must be finite and >= 0",
                self.delta
            )));
        }
        if self.max_context_sentences == 0 {
            return Err(Error::InvalidConfig("max_context_sentences must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct CarWork {
    pub mentions: usize,
    pub combinations: u64,
    pub distance_evals: u64,
    pub merges: usize,
    pub zero_norm_vectors: usize,
}

/// First `max` distinct mention-bearing sentence texts of `doc_id`, in
/// document order, joined by single spaces.
pub fn build_doc_context(corpus: &Corpus, doc_id: &str, max: usize) -> Result<String> {
    let known =
        corpus.sentences.iter().any(|s| s.doc_id == doc_id) || corpus.mentions.iter().any(|m| m.doc_id == doc_id);
    if !known {
        return Err(Error::UnknownDocument(doc_id.to_owned()));
    }
    let bearing: HashSet<&str> = corpus
        .mentions
        .iter()
        .filter(|m| m.doc_id == doc_id)
        .map(|m| m.sent_id.as_str())
        .collect();
    let mut seen = HashSet::new();
    let parts: Vec<&str> = corpus
        .sentences
        .iter()
        .filter(|s| s.doc_id == doc_id && bearing.contains(s.sent_id.as_str()))
        .map(|s| s.text.as_str())
        .filter(|t| seen.insert(*t))
        .take(max)
        .collect();
    Ok(parts.join(" "))
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn dot(u: &[f64], v: &[f64]) -> f64 {
    u.iter().zip(v).map(|(a, b)| a * b).sum()
}

/// Scale to unit L2 norm; the zero vector stays zero.
pub fn unit_normalize(v: &[f64]) -> Vec<f64> {
    let n = norm(v);
    if n > 0.0 {
        v.iter().map(|x| x / n).collect()
    } else {
        v.to_vec()
    }
}

/// `alpha * mention + (1 - alpha) * doc`, componentwise, not re-normalized.
pub fn combine(mention: &[f64], doc: &[f64], alpha: f64) -> Result<Vec<f64>> {
    if mention.len() != doc.len() {
        return Err(Error::DimensionMismatch {
            expected: mention.len(),
            actual: doc.len(),
        });
    }
    Ok(mention
        .iter()
        .zip(doc)
        .map(|(m, d)| alpha * m + (1.0 - alpha) * d)
        .collect())
}

/// `1 - cos(u, v)`, or `None` when either vector has zero norm.
pub fn cosine_distance_checked(u: &[f64], v: &[f64]) -> Option<f64> {
    let (nu, nv) = (norm(u), norm(v));
    if nu == 0.0 || nv == 0.0 {
        return None;
    }
    if u == v {
        return Some(0.0);
    }
    let cos = (dot(u, v) / (nu * nv)).clamp(-1.0, 1.0);
    Some(1.0 - cos)
}

/// Cosine distance in `[0, 2]`. Zero-norm inputs get distance 1.
pub fn cosine_distance(u: &[f64], v: &[f64]) -> f64 {
    cosine_distance_checked(u, v).unwrap_or(1.0)
}

/// Symmetric pairwise distances stored as the upper triangle, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    n: usize,
    data: Vec<f64>,
}

impl DistanceMatrix {
    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> f64 + Sync) -> Self {
        let data = (0..n)
            .into_par_iter()
            .flat_map_iter(|i| {
                let f = &f;
                (i + 1..n).map(move |j| f(i, j))
            })
            .collect();
        Self { n, data }
    }

    pub fn cosine(vectors: &[Vec<f64>]) -> Self {
        Self::from_fn(vectors.len(), |i, j| cosine_distance(&vectors[i], &vectors[j]))
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    fn index(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < j && j < self.n);
        i * self.n - i * (i + 1) / 2 + (j - i - 1)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        match i.cmp(&j) {
            std::cmp::Ordering::Less => self.data[self.index(i, j)],
            std::cmp::Ordering::Greater => self.data[self.index(j, i)],
            std::cmp::Ordering::Equal => 0.0,
        }
    }

    fn set(&mut self, i: usize, j: usize, value: f64) {
        let idx = if i < j { self.index(i, j) } else { self.index(j, i) };
        self.data[idx] = value;
    }
}

/// Average-linkage clustering of vectors under cosine distance.
pub fn agglomerative_cluster(vectors: &[Vec<f64>], delta: f64) -> Vec<usize> {
    average_linkage(DistanceMatrix::cosine(vectors), delta).0
}

/// UPGMA over a precomputed matrix. Clusters are identified by their smallest
/// member index. Repeatedly merges the pair with the smallest average linkage
/// (ties: smallest `(i, j)`) while that linkage is `< delta`; pairs at exactly
/// zero distance are always merged. Returns the smallest-member label of each
/// point and the number of merges.
pub fn average_linkage(mut dist: DistanceMatrix, delta: f64) -> (Vec<usize>, usize) {
    let n = dist.len();
    let mut active = vec![true; n];
    let mut size = vec![1usize; n];
    // Nearest active neighbour with a larger index, per active row.
    let mut nn = vec![usize::MAX; n];
    let mut nnd = vec![f64::INFINITY; n];

    let rescan = |k: usize, dist: &DistanceMatrix, active: &[bool], nn: &mut [usize], nnd: &mut [f64]| {
        nn[k] = usize::MAX;
        nnd[k] = f64::INFINITY;
        for j in k + 1..n {
            if active[j] {
                let d = dist.get(k, j);
                if d < nnd[k] {
                    nnd[k] = d;
                    nn[k] = j;
                }
            }
        }
    };
    for k in 0..n {
        rescan(k, &dist, &active, &mut nn, &mut nnd);
    }

    let mut merges = Vec::new();
    loop {
        let mut best: Option<usize> = None;
        for k in 0..n {
            if active[k] && nn[k] != usize::MAX && best.is_none_or(|b| nnd[k] < nnd[b]) {
                best = Some(k);
            }
        }
        let Some(i) = best else { break };
        let (j, d) = (nn[i], nnd[i]);
        if !(d < delta || d == 0.0) {
            break;
        }

        let (si, sj) = (size[i] as f64, size[j] as f64);
        for k in 0..n {
            if active[k] && k != i && k != j {
                let merged = (si * dist.get(k, i) + sj * dist.get(k, j)) / (si + sj);
                dist.set(k, i, merged);
            }
        }
        active[j] = false;
        size[i] += size[j];
        merges.push((i, j));

        for k in 0..i {
            if !active[k] {
                continue;
            }
            if nn[k] == i || nn[k] == j {
                rescan(k, &dist, &active, &mut nn, &mut nnd);
            } else {
                let d = dist.get(k, i);
                if d < nnd[k] || (d == nnd[k] && i < nn[k]) {
                    nnd[k] = d;
                    nn[k] = i;
                }
            }
        }
        for k in i + 1..j {
            if active[k] && nn[k] == j {
                rescan(k, &dist, &active, &mut nn, &mut nnd);
            }
        }
        rescan(i, &dist, &active, &mut nn, &mut nnd);
    }

    (connected_components(n, &merges), merges.len())
}

/// Every key `resolve_car` will look up for this corpus.
pub fn required_keys(corpus: &Corpus) -> BTreeSet<String> {
    let mut keys = BTreeSet::new();
    for m in &corpus.mentions {
        keys.insert(normalize_form(&m.text));
        keys.insert(doc_key(&m.doc_id));
    }
    keys
}

/// A table built with [`hash_embed`]: normalized forms embed themselves,
/// documents embed their context string.
pub fn hashed_table(corpus: &Corpus, dim: usize, max_context_sentences: usize) -> Result<EmbeddingTable> {
    let mut table = EmbeddingTable::new(dim, format!("hash-trigram-{dim}"))?;
    let mut docs = BTreeSet::new();
    for m in &corpus.mentions {
        let form = normalize_form(&m.text);
        if !table.contains(&form) {
            let v = hash_embed(&form, dim);
            table.insert(form, v)?;
        }
        docs.insert(m.doc_id.as_str());
    }
    for doc in docs {
        let context = build_doc_context(corpus, doc, max_context_sentences)?;
        table.insert(doc_key(doc), hash_embed(&context, dim))?;
    }
    Ok(table)
}

/// Combined per-instance vectors in mention order.
pub fn mention_vectors(corpus: &Corpus, table: &EmbeddingTable, alpha: f64) -> Result<(Vec<Vec<f64>>, CarWork)> {
    let mut units: HashMap<String, Vec<f64>> = HashMap::new();
    let mut unit = |key: String| -> Result<Vec<f64>> {
        if let Some(v) = units.get(&key) {
            return Ok(v.clone());
        }
        let raw = table.get(&key).ok_or_else(|| Error::MissingEmbedding(key.clone()))?;
        let v = unit_normalize(raw);
        units.insert(key, v.clone());
        Ok(v)
    };
    let mut work = CarWork {
        mentions: corpus.mentions.len(),
        ..CarWork::default()
    };
    let mut vectors = Vec::with_capacity(corpus.mentions.len());
    for m in &corpus.mentions {
        let em = unit(normalize_form(&m.text))?;
        let ed = unit(doc_key(&m.doc_id))?;
        let e = combine(&em, &ed, alpha)?;
        work.combinations += 1;
        if norm(&e) == 0.0 {
            work.zero_norm_vectors += 1;
        }
        vectors.push(e);
    }
    Ok((vectors, work))
}

pub fn resolve_car(corpus: &Corpus, table: &EmbeddingTable, config: &CarConfig) -> Result<Partition> {
    resolve_car_counted(corpus, table, config).map(|(p, _)| p)
}

pub fn resolve_car_counted(
    corpus: &Corpus,
    table: &EmbeddingTable,
    config: &CarConfig,
) -> Result<(Partition, CarWork)> {
    config.validate()?;
    let (vectors, mut work) = mention_vectors(corpus, table, config.alpha)?;
    if work.zero_norm_vectors > 0 {
        warn!(
            "{} mention vectors have zero norm; they are at distance 1 from everything",
            work.zero_norm_vectors
        );
    }
    let n = vectors.len() as u64;
    work.distance_evals = n * n.saturating_sub(1) / 2;
    let (labels, merges) = average_linkage(DistanceMatrix::cosine(&vectors), config.delta);
    work.merges = merges;
    Ok((partition_from_labels("car", corpus, &labels), work))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::fixtures::{mention_in, sentence, two_doc_corpus};

    fn close(a: &[f64], b: &[f64]) -> bool {
        a.iter().zip(b).all(|(x, y)| (x - y).abs() < 1e-12)
    }

    #[test]
    fn defaults() {
        let c = CarConfig::default();
        assert_eq!((c.alpha, c.delta, c.max_context_sentences), (0.6, 0.4, 10));
        assert!(CarConfig { alpha: 1.5, ..c }.validate().is_err());
        assert!(CarConfig { delta: -0.1, ..c }.validate().is_err());
    }

    #[test]
    fn doc_context_rules() {
        let mut sentences = Vec::new();
        let mut mentions = Vec::new();
        for i in 0..12 {
            let s = sentence("D", &format!("S{i:02}"), &format!("Sentence {i} uses R."));
            mentions.push(mention_in(&format!("M{i}"), &s, "R", None));
            sentences.push(s);
        }
        sentences.push(sentence("D", "S99", "No mention here."));
        let c = Corpus::new(sentences, mentions);
        let ctx = build_doc_context(&c, "D", 10).unwrap();
        assert!(ctx.starts_with("Sentence 0 uses R. Sentence 1 uses R."));
        assert!(ctx.ends_with("Sentence 9 uses R."));
        assert!(!ctx.contains("No mention"));
        assert_eq!(build_doc_context(&c, "D", 20).unwrap().matches("uses R.").count(), 12);
        assert!(matches!(build_doc_context(&c, "Z", 10), Err(Error::UnknownDocument(_))));
    }

    #[test]
    fn doc_context_under_cap_and_dedupe() {
        let c = two_doc_corpus();
        assert_eq!(
            build_doc_context(&c, "D1", 10).unwrap(),
            "We used MATLAB for analysis. Plots were made in matlab and SPSS."
        );
        let s1 = sentence("D", "S1", "Same text with R.");
        let s2 = sentence("D", "S2", "Same text with R.");
        let c = Corpus::new(
            vec![s1.clone(), s2.clone()],
            vec![mention_in("a", &s1, "R", None), mention_in("b", &s2, "R", None)],
        );
        assert_eq!(build_doc_context(&c, "D", 10).unwrap(), "Same text with R.");
    }

    #[test]
    fn doc_without_mentions_has_empty_context() {
        let c = Corpus::new(vec![sentence("D", "S", "Nothing.")], vec![]);
        assert_eq!(build_doc_context(&c, "D", 10).unwrap(), "");
    }

    #[test]
    fn unit_normalize_examples() {
        assert!(close(&unit_normalize(&[3.0, 4.0]), &[0.6, 0.8]));
        assert!(close(&unit_normalize(&[0.6, 0.8]), &[0.6, 0.8]));
        assert_eq!(unit_normalize(&[0.0, 0.0]), vec![0.0, 0.0]);
    }

    #[test]
    fn combine_examples() {
        let u = [0.6, 0.8];
        assert!(close(&combine(&u, &u, 0.6).unwrap(), &u));
        assert_eq!(combine(&[1.0, 2.0], &[5.0, 7.0], 1.0).unwrap(), vec![1.0, 2.0]);
        let e = combine(&[1.0, 0.0], &[0.0, 1.0], 0.6).unwrap();
        assert!((norm(&e) - 0.52f64.sqrt()).abs() < 1e-12);
        assert!((norm(&e) - 0.7211).abs() < 1e-4);
        assert!(combine(&[1.0], &[1.0, 2.0], 0.5).is_err());
    }

    #[test]
    fn cosine_examples() {
        assert!(cosine_distance(&[1.0, 2.0], &[2.0, 4.0]).abs() < 1e-12);
        assert_eq!(cosine_distance(&[0.3, 0.7], &[0.3, 0.7]), 0.0);
        assert!((cosine_distance(&[1.0, 0.0], &[0.0, 3.0]) - 1.0).abs() < 1e-15);
        assert!((cosine_distance(&[1.0, 1.0], &[-1.0, -1.0]) - 2.0).abs() < 1e-15);
        assert_eq!(cosine_distance(&[0.0, 0.0], &[1.0, 0.0]), 1.0);
        assert_eq!(cosine_distance(&[0.0, 0.0], &[0.0, 0.0]), 1.0);
        assert_eq!(cosine_distance_checked(&[0.0], &[1.0]), None);
    }

    #[test]
    fn hand_traced_three_points() {
        let d = [[0.0, 0.1, 0.5], [0.1, 0.0, 0.5], [0.5, 0.5, 0.0]];
        let m = DistanceMatrix::from_fn(3, |i, j| d[i][j]);
        assert_eq!(average_linkage(m, 0.4), (vec![0, 0, 2], 1));
    }

    #[test]
    fn linkage_edge_cases() {
        assert!(agglomerative_cluster(&[], 0.4).is_empty());
        assert_eq!(agglomerative_cluster(&[vec![1.0, 0.0]], 0.4), vec![0]);
        let orth = vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]];
        assert_eq!(agglomerative_cluster(&orth, 0.4), vec![0, 1, 2]);
    }

    #[test]
    fn zero_delta_merges_only_identical() {
        let v = vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 0.0], vec![1.0, 0.1]];
        assert_eq!(agglomerative_cluster(&v, 0.0), vec![0, 1, 0, 3]);
    }

    #[test]
    fn tie_goes_to_smallest_pair() {
        // d(0,1) = d(1,2) = 0.1, d(0,2) = 0.9: {0,1} merges first, then the
        // linkage to 2 is 0.5.
        let d = [[0.0, 0.1, 0.9], [0.1, 0.0, 0.1], [0.9, 0.1, 0.0]];
        let m = DistanceMatrix::from_fn(3, |i, j| d[i][j]);
        assert_eq!(average_linkage(m.clone(), 0.4).0, vec![0, 0, 2]);
        assert_eq!(average_linkage(m, 0.6).0, vec![0, 0, 0]);
    }

    fn table_for(c: &Corpus, entries: &[(&str, Vec<f64>)]) -> EmbeddingTable {
        let mut t = EmbeddingTable::new(entries[0].1.len(), "hand").unwrap();
        for (k, v) in entries {
            t.insert(*k, v.clone()).unwrap();
        }
        for key in required_keys(c) {
            assert!(t.contains(&key), "fixture lacks {key}");
        }
        t
    }

    #[test]
    fn same_form_same_doc_always_co_clustered() {
        let s = sentence("D", "S", "R and R again.");
        let mut second = mention_in("b", &s, "R", None);
        second.start_char = 6;
        second.end_char = 7;
        let c = Corpus::new(vec![s.clone()], vec![mention_in("a", &s, "R", None), second]);
        let t = table_for(&c, &[("r", vec![1.0, 0.0]), ("doc:D", vec![0.0, 1.0])]);
        for delta in [1e-9, 0.4, 1.0] {
            let p = resolve_car(
                &c,
                &t,
                &CarConfig {
                    delta,
                    ..CarConfig::default()
                },
            )
            .unwrap();
            assert_eq!(p.canonical().len(), 1);
        }
    }

    #[test]
    fn alpha_one_ignores_documents() {
        let s1 = sentence("D1", "S", "Uses R.");
        let s2 = sentence("D2", "S", "Uses R.");
        let c = Corpus::new(
            vec![s1.clone(), s2.clone()],
            vec![mention_in("a", &s1, "R", None), mention_in("b", &s2, "R", None)],
        );
        let t = table_for(
            &c,
            &[
                ("r", vec![1.0, 0.0]),
                ("doc:D1", vec![0.0, 1.0]),
                ("doc:D2", vec![0.0, -1.0]),
            ],
        );
        let cfg = CarConfig {
            alpha: 1.0,
            ..CarConfig::default()
        };
        assert_eq!(resolve_car(&c, &t, &cfg).unwrap().canonical().len(), 1);
        let cfg = CarConfig {
            alpha: 0.0,
            ..CarConfig::default()
        };
        assert_eq!(resolve_car(&c, &t, &cfg).unwrap().canonical().len(), 2);
    }

    #[test]
    fn missing_embedding_names_key() {
        let c = two_doc_corpus();
        let t = EmbeddingTable::new(2, "empty").unwrap();
        match resolve_car(&c, &t, &CarConfig::default()) {
            Err(Error::MissingEmbedding(k)) => assert_eq!(k, "matlab"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn hashed_table_covers_required_keys() {
        let c = two_doc_corpus();
        let t = hashed_table(&c, 32, 10).unwrap();
        let keys: BTreeSet<String> = t.keys().map(str::to_owned).collect();
        assert_eq!(keys, required_keys(&c));
        let (p, work) = resolve_car_counted(&c, &t, &CarConfig::default()).unwrap();
        assert_eq!(p.len(), 4);
        assert_eq!(work.combinations, 4);
        assert_eq!(work.distance_evals, 6);
        // Two instances of "matlab"/"MATLAB" in D1 share both vectors.
        assert_eq!(p.label_of("M1"), p.label_of("M2"));
    }

    #[test]
    fn empty_corpus_resolves_empty() {
        let t = EmbeddingTable::new(8, "x").unwrap();
        assert!(resolve_car(&Corpus::default(), &t, &CarConfig::default())
            .unwrap()
            .is_empty());
    }
}
