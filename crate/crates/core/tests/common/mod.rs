//! Brute-force reference implementations and random fixture generators shared
//! by the integration suites. Nothing here calls into the code it checks.

#![allow(dead_code, clippy::needless_range_loop)]

use std::collections::{BTreeMap, VecDeque};

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use swcoref::model::{Corpus, Mention, Partition, SentenceRecord};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Matched characters by exhaustive search over every start pair.
fn brute_matches(a: &[char], b: &[char]) -> usize {
    let mut best = (0, 0, 0);
    for i in 0..a.len() {
        for j in 0..b.len() {
            let mut k = 0;
            while i + k < a.len() && j + k < b.len() && a[i + k] == b[j + k] {
                k += 1;
            }
            // Strict > keeps the first (i, then j) among equals.
            if k > best.2 {
                best = (i, j, k);
            }
        }
    }
    let (i, j, k) = best;
    if k == 0 {
        return 0;
    }
    k + brute_matches(&a[..i], &b[..j]) + brute_matches(&a[i + k..], &b[j + k..])
}

pub fn brute_ro(a: &str, b: &str) -> f64 {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    if a.is_empty() && b.is_empty() {
        return 1.0;
    }
    2.0 * brute_matches(&a, &b) as f64 / (a.len() + b.len()) as f64
}

pub fn brute_normalize(s: &str) -> String {
    s.split_whitespace()
        .map(str::to_lowercase)
        .collect::<Vec<_>>()
        .join(" ")
}

/// Connected components by breadth-first search; label = smallest member.
pub fn bfs_components(n: usize, adjacent: impl Fn(usize, usize) -> bool) -> Vec<usize> {
    let mut label = vec![usize::MAX; n];
    for s in 0..n {
        if label[s] != usize::MAX {
            continue;
        }
        label[s] = s;
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            for v in 0..n {
                if label[v] == usize::MAX && v != u && adjacent(u, v) {
                    label[v] = s;
                    queue.push_back(v);
                }
            }
        }
    }
    label
}

/// Fuzzy clustering over mention instances: link two instances when the
/// similarity of their normalized forms, lexicographically ordered, reaches
/// `theta`; close transitively.
pub fn brute_fuzzy(corpus: &Corpus, theta: f64) -> Partition {
    let forms: Vec<String> = corpus.mentions.iter().map(|m| brute_normalize(&m.text)).collect();
    let mut memo: BTreeMap<(String, String), f64> = BTreeMap::new();
    let mut sim = |a: &str, b: &str| -> f64 {
        let (x, y) = if a <= b { (a, b) } else { (b, a) };
        *memo
            .entry((x.to_owned(), y.to_owned()))
            .or_insert_with(|| brute_ro(x, y))
    };
    let n = forms.len();
    let mut adj = vec![vec![false; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let s = if forms[i] == forms[j] {
                1.0
            } else {
                sim(&forms[i], &forms[j])
            };
            adj[i][j] = s >= theta;
            adj[j][i] = adj[i][j];
        }
    }
    let labels = bfs_components(n, |u, v| adj[u][v]);
    labels_to_partition(corpus, &labels)
}

pub fn labels_to_partition(corpus: &Corpus, labels: &[usize]) -> Partition {
    Partition::new(
        corpus
            .mentions
            .iter()
            .zip(labels)
            .map(|(m, l)| (m.mention_id.clone(), format!("c{l}")))
            .collect(),
    )
}

pub fn cosine_distance(u: &[f64], v: &[f64]) -> f64 {
    let dot: f64 = u.iter().zip(v).map(|(a, b)| a * b).sum();
    let nu = u.iter().map(|a| a * a).sum::<f64>().sqrt();
    let nv = v.iter().map(|a| a * a).sum::<f64>().sqrt();
    if nu == 0.0 || nv == 0.0 {
        return 1.0;
    }
    1.0 - (dot / (nu * nv)).clamp(-1.0, 1.0)
}

/// Textbook average linkage: every step recomputes the mean cross-pair
/// distance of every cluster pair from the raw matrix and merges the closest
/// pair (ties: smallest pair of smallest members) while it is below `delta`,
/// or at zero. Returns smallest-member labels.
pub fn naive_upgma(dist: &[Vec<f64>], delta: f64) -> Vec<usize> {
    let n = dist.len();
    let mut clusters: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
    loop {
        let mut best: Option<(f64, usize, usize)> = None;
        for a in 0..clusters.len() {
            for b in a + 1..clusters.len() {
                let mut sum = 0.0;
                for &i in &clusters[a] {
                    for &j in &clusters[b] {
                        sum += dist[i][j];
                    }
                }
                let d = sum / (clusters[a].len() * clusters[b].len()) as f64;
                if best.is_none_or(|(bd, _, _)| d < bd) {
                    best = Some((d, a, b));
                }
            }
        }
        match best {
            Some((d, a, b)) if d < delta || d == 0.0 => {
                let moved = clusters.remove(b);
                clusters[a].extend(moved);
                clusters[a].sort_unstable();
            }
            _ => break,
        }
    }
    let mut labels = vec![0; n];
    for c in &clusters {
        for &i in c {
            labels[i] = c[0];
        }
    }
    labels
}

/// Maximum total over all one-to-one matchings of the smaller side into the
/// larger, by enumerating permutations.
pub fn brute_assignment(m: &[Vec<f64>]) -> f64 {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    if rows == 0 || cols == 0 {
        return 0.0;
    }
    let t: Vec<Vec<f64>>;
    let m = if rows > cols {
        t = (0..cols).map(|j| (0..rows).map(|i| m[i][j]).collect()).collect();
        &t
    } else {
        m
    };
    fn go(m: &[Vec<f64>], row: usize, used: &mut Vec<bool>) -> f64 {
        if row == m.len() {
            return 0.0;
        }
        let mut best = f64::NEG_INFINITY;
        for j in 0..used.len() {
            if !used[j] {
                used[j] = true;
                best = best.max(m[row][j] + go(m, row + 1, used));
                used[j] = false;
            }
        }
        best
    }
    go(m, 0, &mut vec![false; m[0].len()])
}

/// Clusters as sorted member lists, sorted.
pub fn canonical(p: &Partition) -> Vec<Vec<String>> {
    let mut by: BTreeMap<&str, Vec<String>> = BTreeMap::new();
    for (m, l) in &p.assignment {
        by.entry(l).or_default().push(m.clone());
    }
    let mut out: Vec<Vec<String>> = by.into_values().collect();
    for c in &mut out {
        c.sort();
    }
    out.sort();
    out
}

pub fn random_string<R: Rng>(rng: &mut R, alphabet: &[char], max_len: usize) -> String {
    let len = rng.gen_range(0..=max_len);
    (0..len).map(|_| alphabet[rng.gen_range(0..alphabet.len())]).collect()
}

const STEMS: &[&str] = &[
    "matlab",
    "spss",
    "stata",
    "graphpad prism",
    "python",
    "numpy",
    "scipy",
    "imagej",
    "fiji",
    "excel",
    "r",
    "sas",
    "prism",
    "origin",
    "labview",
    "cellprofiler",
];

/// Random labeled corpus of `n` mentions with spelling variants of a few
/// stems, so thresholds in the middle of the grid both link and separate.
pub fn random_corpus<R: Rng>(rng: &mut R, n: usize) -> Corpus {
    let docs = (n / 4).max(1);
    let mut sentences = Vec::new();
    let mut mentions = Vec::new();
    for k in 0..n {
        let stem_idx = rng.gen_range(0..STEMS.len());
        let mut text = STEMS[stem_idx].to_owned();
        match rng.gen_range(0..6) {
            0 => text = text.to_uppercase(),
            1 => text.push_str(&format!(" {}", rng.gen_range(1..20))),
            2 => {
                // Drop one character.
                let chars: Vec<char> = text.chars().collect();
                let cut = rng.gen_range(0..chars.len());
                let shorter: String = chars
                    .iter()
                    .enumerate()
                    .filter(|&(i, _)| i != cut)
                    .map(|(_, c)| c)
                    .collect();
                if !shorter.trim().is_empty() {
                    text = shorter.trim().to_owned();
                }
            }
            _ => {}
        }
        let doc_id = format!("D{}", rng.gen_range(0..docs));
        let sent_id = format!("S{k}");
        let prefix = "Analysis used ";
        let start = prefix.chars().count();
        sentences.push(SentenceRecord {
            doc_id: doc_id.clone(),
            sent_id: sent_id.clone(),
            text: format!("{prefix}{text} in this study."),
        });
        mentions.push(Mention {
            mention_id: format!("M{k:04}"),
            doc_id,
            sent_id,
            start_char: start,
            end_char: start + text.chars().count(),
            text,
            gold_cluster: Some(format!("G{stem_idx}")),
        });
    }
    Corpus::new(sentences, mentions)
}
