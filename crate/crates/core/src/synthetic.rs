//! Seeded synthetic corpora with a realistic chain-length profile: about half
//! the clusters are singletons, the rest follow a heavy-tailed size
//! distribution, and most chains reuse one surface form.

use std::collections::HashSet;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::model::{Corpus, Mention, SentenceRecord};

const SYLLABLES: &[&str] = &[
    "ma", "tla", "sp", "py", "thon", "num", "gra", "pad", "pri", "sta", "ro", "cal", "lib", "an", "ex", "ver", "gen",
    "qu", "zo", "fi", "nex", "tor", "ka", "lu", "mi", "de", "sol", "vo", "rix", "bel", "cor", "dat", "hel", "ion",
    "jet", "kin", "mor", "nov", "pel", "sig",
];
const SUFFIXES: &[&str] = &["Studio", "Toolkit", "Lab", "Suite", "Pro", "Viewer"];
const TEMPLATES: &[&str] = &[
    "We used {} for statistical analysis.",
    "Data were processed with {} as described.",
    "All figures were produced in {}.",
    "The pipeline relies on {} for preprocessing.",
    "Models were fitted using {} with default settings.",
    "Images were analysed in {} by two raters.",
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SyntheticConfig {
    pub mentions: usize,
    /// Target share of clusters that are singletons.
    pub singleton_rate: f64,
    pub documents: usize,
    /// Probability that a chain member is written as a version-qualified variant.
    pub variant_rate: f64,
    pub seed: u64,
}

impl SyntheticConfig {
    /// Shape of a gold-annotated software-mention training set, scaled to
    /// `mentions`.
    pub fn table_like(mentions: usize, seed: u64) -> Self {
        Self {
            mentions,
            singleton_rate: 0.52,
            documents: (mentions / 3).max(1),
            variant_rate: 0.08,
            seed,
        }
    }
}

struct Names {
    rng: ChaCha8Rng,
    used: HashSet<String>,
}

impl Names {
    fn next(&mut self) -> String {
        loop {
            let parts = self.rng.gen_range(2..=3);
            let mut name = String::new();
            for _ in 0..parts {
                name.push_str(SYLLABLES[self.rng.gen_range(0..SYLLABLES.len())]);
            }
            let mut chars = name.chars();
            let mut name: String = chars
                .next()
                .map(|c| c.to_ascii_uppercase())
                .into_iter()
                .chain(chars)
                .collect();
            if self.rng.gen_bool(0.2) {
                name.push(' ');
                name.push_str(SUFFIXES[self.rng.gen_range(0..SUFFIXES.len())]);
            }
            if self.used.insert(name.to_lowercase()) {
                return name;
            }
        }
    }
}

/// Chain sizes summing to `mentions`: singletons with probability
/// `singleton_rate`, otherwise `2 + floor(Pareto)` with a heavy tail.
fn chain_sizes(rng: &mut ChaCha8Rng, mentions: usize, singleton_rate: f64) -> Vec<usize> {
    let mut sizes = Vec::new();
    let mut left = mentions;
    while left > 0 {
        let size = if rng.gen_bool(singleton_rate.clamp(0.0, 1.0)) {
            1
        } else {
            let u: f64 = rng.gen_range(f64::EPSILON..1.0);
            2 + (u.powf(-1.0 / 1.1) - 1.0).floor().min(1e6) as usize
        };
        let size = size.min(left);
        sizes.push(size);
        left -= size;
    }
    sizes
}

fn surface(rng: &mut ChaCha8Rng, base: &str, variant_rate: f64) -> String {
    if rng.gen_bool(variant_rate) {
        match rng.gen_range(0..3) {
            0 => format!("{base} {}", rng.gen_range(2..12)),
            1 => format!("{base} v{}.{}", rng.gen_range(1..5), rng.gen_range(0..10)),
            _ => format!(
                "{base} {}.{}.{}",
                rng.gen_range(1..9),
                rng.gen_range(0..9),
                rng.gen_range(0..9)
            ),
        }
    } else {
        match rng.gen_range(0..10) {
            0 => base.to_uppercase(),
            1 => base.to_lowercase(),
            _ => base.to_owned(),
        }
    }
}

struct Builder {
    sentences: Vec<SentenceRecord>,
    mentions: Vec<Mention>,
}

impl Builder {
    fn push(&mut self, rng: &mut ChaCha8Rng, doc: usize, text: String, gold: Option<String>) {
        let template = TEMPLATES[rng.gen_range(0..TEMPLATES.len())];
        let prefix = template.split("{}").next().unwrap_or_default();
        let sentence_text = template.replacen("{}", &text, 1);
        let start = prefix.chars().count();
        let doc_id = format!("D{doc:04}");
        let sent_id = format!("S{:05}", self.sentences.len());
        self.mentions.push(Mention {
            mention_id: format!("M{:05}", self.mentions.len()),
            doc_id: doc_id.clone(),
            sent_id: sent_id.clone(),
            start_char: start,
            end_char: start + text.chars().count(),
            text,
            gold_cluster: gold,
        });
        self.sentences.push(SentenceRecord {
            doc_id,
            sent_id,
            text: sentence_text,
        });
    }
}

/// Gold-labeled corpus with one mention per sentence.
pub fn synthetic_corpus(config: &SyntheticConfig) -> Corpus {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut names = Names {
        rng: ChaCha8Rng::seed_from_u64(config.seed ^ 0x5eed),
        used: HashSet::new(),
    };
    let docs = config.documents.max(1);
    let sizes = chain_sizes(&mut rng, config.mentions, config.singleton_rate);
    let mut b = Builder {
        sentences: Vec::new(),
        mentions: Vec::new(),
    };
    for (c, &size) in sizes.iter().enumerate() {
        let base = names.next();
        // Chains live in a home document plus occasional other documents.
        let home = rng.gen_range(0..docs);
        for _ in 0..size {
            let doc = if rng.gen_bool(0.35) {
                rng.gen_range(0..docs)
            } else {
                home
            };
            let text = surface(&mut rng, &base, config.variant_rate);
            b.push(&mut rng, doc, text, Some(format!("C{c:05}")));
        }
    }
    Corpus::new(b.sentences, b.mentions)
}

/// Corpus with exactly `unique_forms` distinct normalized forms and
/// `unique_forms + unique_forms / 2` mentions (every form once, half of them
/// twice), spread over `unique_forms / 4` documents.
pub fn scaling_corpus(unique_forms: usize, seed: u64) -> Corpus {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut names = Names {
        rng: ChaCha8Rng::seed_from_u64(seed ^ 0x5eed),
        used: HashSet::new(),
    };
    let docs = (unique_forms / 4).max(1);
    let mut b = Builder {
        sentences: Vec::new(),
        mentions: Vec::new(),
    };
    for c in 0..unique_forms {
        let name = names.next();
        let repeats = if c % 2 == 0 { 2 } else { 1 };
        for _ in 0..repeats {
            let doc = rng.gen_range(0..docs);
            b.push(&mut rng, doc, name.clone(), Some(format!("C{c:05}")));
        }
    }
    Corpus::new(b.sentences, b.mentions)
}
