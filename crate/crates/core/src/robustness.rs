//! Seeded noise injection: span boundary edits and mention substitution at
//! an exact rate of affected mentions.
//!
//! Randomness comes from ChaCha8 seeded with the configured `u64`: stream 0
//! selects targets, stream 1 drives the per-mention perturbations. Outputs are
//! byte-reproducible for a fixed build.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use rand::seq::index::sample;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lexical::normalize_form;
use crate::model::{char_slice, Corpus, Mention, SentenceRecord};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseKind {
    Boundary,
    Substitution,
}

impl NoiseKind {
    pub const ALL: [NoiseKind; 2] = [NoiseKind::Boundary, NoiseKind::Substitution];

    pub fn as_str(self) -> &'static str {
        match self {
            NoiseKind::Boundary => "boundary",
            NoiseKind::Substitution => "substitution",
        }
    }
}

impl fmt::Display for NoiseKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for NoiseKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "boundary" => Ok(NoiseKind::Boundary),
            "substitution" => Ok(NoiseKind::Substitution),
            other => Err(Error::InvalidConfig(format!("unknown noise kind {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseConfig {
    pub kind: NoiseKind,
    pub rate: f64,
    pub seed: u64,
}

impl NoiseConfig {
    pub fn new(kind: NoiseKind, rate: f64, seed: u64) -> Result<Self> {
        if !(0.0..=1.0).contains(&rate) {
            return Err(Error::InvalidConfig(format!("noise rate {rate} outside [0, 1]")));
        }
        Ok(Self { kind, rate, seed })
    }
}

/// Number of mentions affected at `rate` out of `n`.
pub fn target_count(n: usize, rate: f64) -> usize {
    ((rate * n as f64).round() as usize).min(n)
}

/// `round(rate * n)` distinct indices drawn uniformly without replacement,
/// sorted ascending.
pub fn select_targets(n: usize, rate: f64, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picked = sample(&mut rng, n, target_count(n, rate)).into_vec();
    picked.sort_unstable();
    picked
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryEdit {
    ExtendLeft,
    ExtendRight,
    TruncateLeft,
    TruncateRight,
}

/// Whitespace-delimited tokens of `chars[lo..hi]` as char ranges.
fn tokens(chars: &[char], lo: usize, hi: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, c) in chars.iter().enumerate().take(hi).skip(lo) {
        match (c.is_whitespace(), start) {
            (false, None) => start = Some(i),
            (true, Some(s)) => {
                out.push((s, i));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push((s, hi));
    }
    out
}

/// New `(start, end)` for `edit`, or `None` if inadmissible.
fn edit_span(mention: &Mention, sentence: &[char], edit: BoundaryEdit) -> Option<(usize, usize)> {
    let (start, end) = (mention.start_char, mention.end_char);
    match edit {
        BoundaryEdit::ExtendLeft => tokens(sentence, 0, start)
            .into_iter()
            .rev()
            .find(|&(_, e)| e <= start)
            .map(|(s, _)| (s, end)),
        BoundaryEdit::ExtendRight => tokens(sentence, end, sentence.len())
            .into_iter()
            .next()
            .map(|(_, e)| (start, e)),
        BoundaryEdit::TruncateLeft => {
            let own = tokens(sentence, start, end);
            (own.len() >= 2).then(|| (own[1].0, end))
        }
        BoundaryEdit::TruncateRight => {
            let own = tokens(sentence, start, end);
            (own.len() >= 2).then(|| (start, own[own.len() - 2].1))
        }
    }
}

const EDITS: [BoundaryEdit; 4] = [
    BoundaryEdit::ExtendLeft,
    BoundaryEdit::ExtendRight,
    BoundaryEdit::TruncateLeft,
    BoundaryEdit::TruncateRight,
];

pub fn admissible_edits(mention: &Mention, sentence: &SentenceRecord) -> Vec<BoundaryEdit> {
    let chars: Vec<char> = sentence.text.chars().collect();
    EDITS
        .into_iter()
        .filter(|&e| edit_span(mention, &chars, e).is_some())
        .collect()
}

/// Apply one specific edit; `None` if it is not admissible.
pub fn apply_boundary_edit(mention: &Mention, sentence: &SentenceRecord, edit: BoundaryEdit) -> Option<Mention> {
    let chars: Vec<char> = sentence.text.chars().collect();
    let (start, end) = edit_span(mention, &chars, edit)?;
    Some(Mention {
        text: char_slice(&sentence.text, start, end)?.to_owned(),
        start_char: start,
        end_char: end,
        ..mention.clone()
    })
}

/// Extend or truncate by one token, chosen uniformly among admissible edits.
/// `None` means no edit was admissible (the mention is skipped).
pub fn perturb_boundary<R: Rng>(mention: &Mention, sentence: &SentenceRecord, rng: &mut R) -> Option<Mention> {
    let edits = admissible_edits(mention, sentence);
    if edits.is_empty() {
        return None;
    }
    let edit = edits[rng.gen_range(0..edits.len())];
    apply_boundary_edit(mention, sentence, edit)
}

/// Normalized forms of a corpus, each with a representative surface string
/// (its first occurrence), sorted by normalized form.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SurfaceInventory {
    entries: Vec<(String, String)>,
}

impl SurfaceInventory {
    pub fn from_corpus(corpus: &Corpus) -> Self {
        let mut first: BTreeMap<String, String> = BTreeMap::new();
        for m in &corpus.mentions {
            first
                .entry(normalize_form(&m.text))
                .or_insert_with(|| m.text.trim().to_owned());
        }
        Self {
            entries: first.into_iter().collect(),
        }
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (String, String)>) -> Self {
        let mut entries: Vec<(String, String)> = pairs.into_iter().collect();
        entries.sort();
        entries.dedup_by(|a, b| a.0 == b.0);
        Self { entries }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn forms(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|(f, _)| f.as_str())
    }
}

/// Replace the mention text with a different inventory entry, excluding its
/// own normalized form and every form of its gold cluster. Offsets are
/// updated to the new length; the gold label is kept. `None` when no entry is
/// eligible.
pub fn perturb_substitute<R: Rng>(
    mention: &Mention,
    inventory: &SurfaceInventory,
    gold_cluster_forms: &HashSet<String>,
    rng: &mut R,
) -> Option<Mention> {
    let own = normalize_form(&mention.text);
    let eligible: Vec<&(String, String)> = inventory
        .entries
        .iter()
        .filter(|(form, _)| *form != own && !gold_cluster_forms.contains(form))
        .collect();
    if eligible.is_empty() {
        return None;
    }
    let (_, surface) = eligible[rng.gen_range(0..eligible.len())];
    Some(Mention {
        text: surface.clone(),
        end_char: mention.start_char + surface.chars().count(),
        ..mention.clone()
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct NoiseOutcome {
    pub corpus: Corpus,
    /// Selected mention ids, in corpus order.
    pub targets: Vec<String>,
    /// Targets left unchanged because no perturbation was admissible.
    pub skipped: Vec<String>,
}

impl NoiseOutcome {
    pub fn perturbed(&self) -> usize {
        self.targets.len() - self.skipped.len()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseManifest {
    pub kind: NoiseKind,
    pub rate: f64,
    pub seed: u64,
    pub targets: Vec<String>,
    pub skipped: Vec<String>,
}

impl NoiseManifest {
    pub fn new(config: &NoiseConfig, outcome: &NoiseOutcome) -> Self {
        Self {
            kind: config.kind,
            rate: config.rate,
            seed: config.seed,
            targets: outcome.targets.clone(),
            skipped: outcome.skipped.clone(),
        }
    }
}

/// Perturb exactly `round(rate * N)` mentions (minus reported skips). All
/// other records are left as they are. Substitution rewrites the owning
/// sentence and shifts later mentions in it; a target overlapping another
/// mention in its sentence is skipped so every span stays consistent.
pub fn apply_noise(corpus: &Corpus, config: &NoiseConfig) -> Result<NoiseOutcome> {
    let n = corpus.mentions.len();
    let targets = select_targets(n, config.rate, config.seed);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(1);

    let mut out = corpus.clone();
    let sentence_of = out.sentence_index();
    let inventory = SurfaceInventory::from_corpus(corpus);
    let mut cluster_forms: HashMap<&str, HashSet<String>> = HashMap::new();
    for m in &corpus.mentions {
        if let Some(g) = &m.gold_cluster {
            cluster_forms
                .entry(g.as_str())
                .or_default()
                .insert(normalize_form(&m.text));
        }
    }
    let no_forms = HashSet::new();

    let mut skipped = Vec::new();
    for &t in &targets {
        let mention = out.mentions[t].clone();
        let si = *sentence_of
            .get(&mention.sentence_key())
            .ok_or_else(|| Error::InvalidCorpus(format!("{}: unknown sentence", mention.mention_id)))?;
        match config.kind {
            NoiseKind::Boundary => match perturb_boundary(&mention, &out.sentences[si], &mut rng) {
                Some(m) => out.mentions[t] = m,
                None => skipped.push(mention.mention_id.clone()),
            },
            NoiseKind::Substitution => {
                let overlaps = out.mentions.iter().enumerate().any(|(k, o)| {
                    k != t
                        && o.doc_id == mention.doc_id
                        && o.sent_id == mention.sent_id
                        && o.start_char < mention.end_char
                        && mention.start_char < o.end_char
                });
                let gold_forms = mention
                    .gold_cluster
                    .as_deref()
                    .and_then(|g| cluster_forms.get(g))
                    .unwrap_or(&no_forms);
                let replaced = if overlaps {
                    None
                } else {
                    perturb_substitute(&mention, &inventory, gold_forms, &mut rng)
                };
                match replaced {
                    Some(m) => rewrite_span(&mut out, si, t, m),
                    None => skipped.push(mention.mention_id.clone()),
                }
            }
        }
    }

    Ok(NoiseOutcome {
        corpus: out,
        targets: targets.iter().map(|&t| corpus.mentions[t].mention_id.clone()).collect(),
        skipped,
    })
}

/// Splice `replacement.text` into the sentence over the old span of mention
/// `t` and shift the mentions after it.
fn rewrite_span(corpus: &mut Corpus, si: usize, t: usize, replacement: Mention) {
    let old = &corpus.mentions[t];
    let (start, old_end) = (old.start_char, old.end_char);
    let sentence = &mut corpus.sentences[si];
    let chars: Vec<char> = sentence.text.chars().collect();
    let mut text: String = chars[..start].iter().collect();
    text.push_str(&replacement.text);
    text.extend(&chars[old_end..]);
    sentence.text = text;

    let shift = replacement.end_char as isize - old_end as isize;
    let (doc, sent) = (replacement.doc_id.clone(), replacement.sent_id.clone());
    for (k, m) in corpus.mentions.iter_mut().enumerate() {
        if k != t && m.doc_id == doc && m.sent_id == sent && m.start_char >= old_end {
            m.start_char = (m.start_char as isize + shift) as usize;
            m.end_char = (m.end_char as isize + shift) as usize;
        }
    }
    corpus.mentions[t] = replacement;
}
