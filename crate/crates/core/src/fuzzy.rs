//! Lexical fuzzy-matching resolver: threshold-link unique normalized forms,
//! take the transitive closure, broadcast back to mention instances.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lexical::{normalize_form, ro_similarity_chars};
use crate::model::{partition_from_labels, Corpus, Partition};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FuzzyConfig {
    pub theta: f64,
}

impl FuzzyConfig {
    pub fn new(theta: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&theta) {
            return Err(Error::InvalidConfig(format!("theta {theta} outside [0, 1]")));
        }
        Ok(Self { theta })
    }
}

/// Work counters, independent of wall-clock.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct FuzzyWork {
    pub unique_forms: usize,
    pub similarity_evals: u64,
    pub edges: usize,
}

/// Distinct normalized surface forms in lexicographic order.
pub fn unique_forms(corpus: &Corpus) -> Vec<String> {
    let mut forms: Vec<String> = corpus.mentions.iter().map(|m| normalize_form(&m.text)).collect();
    forms.sort_unstable();
    forms.dedup();
    forms
}

/// Similarity of every unordered form pair `(i, j)`, `i < j`, in `(i, j)`
/// order. `forms` must be sorted so `forms[i] < forms[j]`, which fixes the
/// argument order of the (asymmetric) similarity.
pub fn pair_scores(forms: &[String]) -> Vec<(usize, usize, f64)> {
    let chars: Vec<Vec<char>> = forms.iter().map(|f| f.chars().collect()).collect();
    (0..forms.len())
        .into_par_iter()
        .flat_map_iter(|i| {
            let chars = &chars;
            (i + 1..chars.len()).map(move |j| (i, j, ro_similarity_chars(&chars[i], &chars[j]).value()))
        })
        .collect()
}

/// Edges `(i, j)`, `i < j`, whose similarity reaches `theta`, sorted.
pub fn link_pairs(forms: &[String], theta: f64) -> Vec<(usize, usize)> {
    link_pairs_counted(forms, theta).0
}

pub fn link_pairs_counted(forms: &[String], theta: f64) -> (Vec<(usize, usize)>, u64) {
    let n = forms.len() as u64;
    let evals = n * n.saturating_sub(1) / 2;
    let edges = edges_at(&pair_scores(forms), theta);
    (edges, evals)
}

pub(crate) fn edges_at(scores: &[(usize, usize, f64)], theta: f64) -> Vec<(usize, usize)> {
    scores
        .iter()
        .filter(|&&(_, _, s)| s >= theta)
        .map(|&(i, j, _)| (i, j))
        .collect()
}

/// Disjoint-set forest with path halving and union by size.
#[derive(Debug, Clone)]
pub struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
            size: vec![1; n],
        }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra;
        self.size[ra] += self.size[rb];
        true
    }
}

/// Component label per node: the smallest index in its component.
///
/// Panics if an edge references a node `>= n`.
pub fn connected_components(n: usize, edges: &[(usize, usize)]) -> Vec<usize> {
    let mut uf = UnionFind::new(n);
    for &(a, b) in edges {
        uf.union(a, b);
    }
    let mut smallest = vec![usize::MAX; n];
    let mut labels = vec![0; n];
    for i in 0..n {
        let root = uf.find(i);
        if smallest[root] == usize::MAX {
            smallest[root] = i;
        }
        labels[i] = smallest[root];
    }
    labels
}

pub fn resolve_fuzzy(corpus: &Corpus, config: FuzzyConfig) -> Partition {
    resolve_fuzzy_counted(corpus, config).0
}

pub fn resolve_fuzzy_counted(corpus: &Corpus, config: FuzzyConfig) -> (Partition, FuzzyWork) {
    let forms = unique_forms(corpus);
    let (edges, evals) = link_pairs_counted(&forms, config.theta);
    let work = FuzzyWork {
        unique_forms: forms.len(),
        similarity_evals: evals,
        edges: edges.len(),
    };
    (broadcast(corpus, &forms, &edges), work)
}

/// Map form-level components back onto mention instances.
pub(crate) fn broadcast(corpus: &Corpus, forms: &[String], edges: &[(usize, usize)]) -> Partition {
    let components = connected_components(forms.len(), edges);
    let index: HashMap<&str, usize> = forms.iter().enumerate().map(|(i, f)| (f.as_str(), i)).collect();
    let labels: Vec<usize> = corpus
        .mentions
        .iter()
        .map(|m| components[index[normalize_form(&m.text).as_str()]])
        .collect();
    partition_from_labels("fm", corpus, &labels)
}
