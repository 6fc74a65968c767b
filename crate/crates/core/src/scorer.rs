//! Coreference metrics over partitions of one mention set: MUC, B³, CEAFe
//! and their unweighted mean (CoNLL F1).
//!
//! Singletons count in B³ and CEAFe and contribute nothing to MUC. Every 0/0
//! ratio is 0, except that an empty mention set scores 1 everywhere.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::assignment::optimal_assignment;
use crate::error::{Error, Result};
use crate::model::Partition;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prf {
    #[serde(rename = "p")]
    pub precision: f64,
    #[serde(rename = "r")]
    pub recall: f64,
    pub f1: f64,
}

impl Prf {
    pub fn new(precision: f64, recall: f64) -> Self {
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        Self { precision, recall, f1 }
    }

    fn perfect() -> Self {
        Self::new(1.0, 1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoreReport {
    pub muc: Prf,
    pub b3: Prf,
    pub ceafe: Prf,
    pub conll_f1: f64,
}

impl ScoreReport {
    /// JSON with every value rounded to 4 decimals.
    pub fn to_json(&self) -> String {
        fn prf(p: &Prf) -> serde_json::Value {
            serde_json::json!({"p": round4(p.precision), "r": round4(p.recall), "f1": round4(p.f1)})
        }
        let v = serde_json::json!({
            "muc": prf(&self.muc),
            "b3": prf(&self.b3),
            "ceafe": prf(&self.ceafe),
            "conll_f1": round4(self.conll_f1),
        });
        serde_json::to_string(&v).expect("report serializes")
    }
}

/// Round half to even at 4 decimal places.
pub fn round4(x: f64) -> f64 {
    let scaled = x * 1e4;
    let r = scaled.round();
    let r = if (scaled - scaled.trunc()).abs() == 0.5 && r % 2.0 != 0.0 {
        r - scaled.signum()
    } else {
        r
    };
    r / 1e4
}

fn ratio(num: f64, den: f64) -> f64 {
    if den > 0.0 {
        num / den
    } else {
        0.0
    }
}

/// Clusters of key and response as index lists over a shared mention index.
struct Aligned {
    n: usize,
    key: Vec<Vec<usize>>,
    response: Vec<Vec<usize>>,
    key_of: Vec<usize>,
    response_of: Vec<usize>,
}

fn group(partition: &Partition, index: &HashMap<&str, usize>) -> (Vec<Vec<usize>>, Vec<usize>) {
    let mut label_ids: HashMap<&str, usize> = HashMap::new();
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    let mut owner = vec![0; index.len()];
    for (m, label) in &partition.assignment {
        let next = clusters.len();
        let c = *label_ids.entry(label.as_str()).or_insert(next);
        if c == clusters.len() {
            clusters.push(Vec::new());
        }
        let mi = index[m.as_str()];
        clusters[c].push(mi);
        owner[mi] = c;
    }
    (clusters, owner)
}

fn align(key: &Partition, response: &Partition) -> Result<Aligned> {
    let key_only = key
        .assignment
        .keys()
        .filter(|m| !response.assignment.contains_key(*m))
        .count();
    let response_only = response
        .assignment
        .keys()
        .filter(|m| !key.assignment.contains_key(*m))
        .count();
    if key_only > 0 || response_only > 0 {
        return Err(Error::MentionSetMismatch {
            key_only,
            response_only,
        });
    }
    let index: HashMap<&str, usize> = key
        .assignment
        .keys()
        .enumerate()
        .map(|(i, m)| (m.as_str(), i))
        .collect();
    let (key_clusters, key_of) = group(key, &index);
    let (response_clusters, response_of) = group(response, &index);
    Ok(Aligned {
        n: index.len(),
        key: key_clusters,
        response: response_clusters,
        key_of,
        response_of,
    })
}

/// Σ(|K| − p(K)) and Σ(|K| − 1) over `clusters`, where p(K) is the number of
/// `other` clusters that K intersects.
fn muc_sums(clusters: &[Vec<usize>], other_of: &[usize]) -> (f64, f64) {
    let mut num = 0usize;
    let mut den = 0usize;
    for c in clusters {
        let mut parts: Vec<usize> = c.iter().map(|&m| other_of[m]).collect();
        parts.sort_unstable();
        parts.dedup();
        num += c.len() - parts.len();
        den += c.len() - 1;
    }
    (num as f64, den as f64)
}

fn muc_aligned(a: &Aligned) -> Prf {
    let (rn, rd) = muc_sums(&a.key, &a.response_of);
    let (pn, pd) = muc_sums(&a.response, &a.key_of);
    Prf::new(ratio(pn, pd), ratio(rn, rd))
}

/// Ordered so floating-point sums do not depend on hashing or labels.
fn overlap_sizes(a: &Aligned) -> BTreeMap<(usize, usize), usize> {
    let mut overlap = BTreeMap::new();
    for m in 0..a.n {
        *overlap.entry((a.key_of[m], a.response_of[m])).or_default() += 1;
    }
    overlap
}

fn b3_aligned(a: &Aligned) -> Prf {
    let overlap = overlap_sizes(a);
    let mut recall = 0.0;
    let mut precision = 0.0;
    for (&(k, r), &size) in &overlap {
        // Each of the `size` mentions in K∩R contributes |K∩R|/|K| (recall)
        // and |K∩R|/|R| (precision).
        let s = size as f64;
        recall += s * s / a.key[k].len() as f64;
        precision += s * s / a.response[r].len() as f64;
    }
    let n = a.n as f64;
    Prf::new(ratio(precision, n), ratio(recall, n))
}

fn ceafe_aligned(a: &Aligned) -> Prf {
    let overlap = overlap_sizes(a);
    let mut phi = vec![vec![0.0; a.response.len()]; a.key.len()];
    for (&(k, r), &size) in &overlap {
        phi[k][r] = 2.0 * size as f64 / (a.key[k].len() + a.response[r].len()) as f64;
    }
    let total = optimal_assignment(&phi).total;
    Prf::new(ratio(total, a.response.len() as f64), ratio(total, a.key.len() as f64))
}

pub fn muc(key: &Partition, response: &Partition) -> Result<Prf> {
    let a = align(key, response)?;
    Ok(if a.n == 0 { Prf::perfect() } else { muc_aligned(&a) })
}

pub fn b_cubed(key: &Partition, response: &Partition) -> Result<Prf> {
    let a = align(key, response)?;
    Ok(if a.n == 0 { Prf::perfect() } else { b3_aligned(&a) })
}

pub fn ceaf_e(key: &Partition, response: &Partition) -> Result<Prf> {
    let a = align(key, response)?;
    Ok(if a.n == 0 { Prf::perfect() } else { ceafe_aligned(&a) })
}

pub fn score_all(key: &Partition, response: &Partition) -> Result<ScoreReport> {
    let a = align(key, response)?;
    let (muc, b3, ceafe) = if a.n == 0 {
        (Prf::perfect(), Prf::perfect(), Prf::perfect())
    } else {
        (muc_aligned(&a), b3_aligned(&a), ceafe_aligned(&a))
    };
    Ok(ScoreReport {
        muc,
        b3,
        ceafe,
        conll_f1: (muc.f1 + b3.f1 + ceafe.f1) / 3.0,
    })
}
