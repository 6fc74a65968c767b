use std::time::Instant;

use serde::Serialize;

use crate::car::{resolve_car_counted, CarConfig};
use crate::embedding::EmbeddingTable;
use crate::error::{Error, Result};
use crate::fuzzy::{resolve_fuzzy_counted, FuzzyConfig};
use crate::model::{Corpus, Partition};
use crate::scorer::score_all;

/// Which resolver to time, with its inputs.
#[derive(Debug, Clone, Copy)]
pub enum ResolverSpec<'a> {
    Fuzzy(FuzzyConfig),
    Car {
        table: &'a EmbeddingTable,
        config: CarConfig,
    },
}

impl ResolverSpec<'_> {
    pub fn id(&self) -> &'static str {
        match self {
            ResolverSpec::Fuzzy(_) => "fuzzy",
            ResolverSpec::Car { .. } => "car",
        }
    }

    fn run(&self, corpus: &Corpus) -> Result<(Partition, WorkCounters)> {
        match self {
            ResolverSpec::Fuzzy(cfg) => {
                let (p, w) = resolve_fuzzy_counted(corpus, *cfg);
                Ok((
                    p,
                    WorkCounters {
                        similarity_evals: w.similarity_evals,
                        ..WorkCounters::default()
                    },
                ))
            }
            ResolverSpec::Car { table, config } => {
                let (p, w) = resolve_car_counted(corpus, table, config)?;
                Ok((
                    p,
                    WorkCounters {
                        combinations: w.combinations,
                        distance_evals: w.distance_evals,
                        ..WorkCounters::default()
                    },
                ))
            }
        }
    }
}

/// Algorithmic work of one run, for hardware-independent scaling checks.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct WorkCounters {
    pub similarity_evals: u64,
    pub combinations: u64,
    pub distance_evals: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimingReport {
    pub resolver: String,
    pub runs: usize,
    pub seconds: Vec<f64>,
    pub mean_seconds: f64,
    /// Sample standard deviation; 0 for a single run.
    pub std_seconds: f64,
    pub conll_f1: f64,
    pub efficiency: f64,
    pub work: WorkCounters,
}

/// CoNLL F1 per second of mean inference time.
pub fn efficiency(conll_f1: f64, mean_seconds: f64) -> f64 {
    conll_f1 / mean_seconds
}

fn mean_std(samples: &[f64]) -> (f64, f64) {
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    if samples.len() < 2 {
        return (mean, 0.0);
    }
    let var = samples.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Time `runs` sequential end-to-end resolutions, check they agree, and score
/// the output once against `gold`.
pub fn bench(resolver: ResolverSpec<'_>, corpus: &Corpus, runs: usize, gold: &Partition) -> Result<TimingReport> {
    if runs == 0 {
        return Err(Error::InvalidConfig("runs must be at least 1".into()));
    }
    let mut seconds = Vec::with_capacity(runs);
    let mut first: Option<(Partition, WorkCounters)> = None;
    for _ in 0..runs {
        let t0 = Instant::now();
        let out = resolver.run(corpus)?;
        // Clamp to 1ns so the efficiency ratio stays finite on trivial inputs.
        seconds.push(t0.elapsed().as_secs_f64().max(1e-9));
        match &first {
            None => first = Some(out),
            Some(prev) if *prev != out => return Err(Error::NonDeterministic),
            Some(_) => {}
        }
    }
    let (partition, work) = first.expect("runs >= 1");
    let conll_f1 = score_all(gold, &partition)?.conll_f1;
    let (mean_seconds, std_seconds) = mean_std(&seconds);
    Ok(TimingReport {
        resolver: resolver.id().to_owned(),
        runs,
        seconds,
        mean_seconds,
        std_seconds,
        conll_f1,
        efficiency: efficiency(conll_f1, mean_seconds),
        work,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::car::hashed_table;
    use crate::model::fixtures::two_doc_corpus;
    use crate::model::gold_partition;

    #[test]
    fn efficiency_arithmetic() {
        assert!((efficiency(0.95, 0.60) - 1.5833).abs() < 1e-4);
        assert!((efficiency(0.96, 4.45) - 0.2157).abs() < 1e-4);
    }

    #[test]
    fn sample_std() {
        assert_eq!(mean_std(&[2.0]), (2.0, 0.0));
        let (m, s) = mean_std(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m, 2.5);
        assert!((s - (5.0f64 / 3.0).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn fuzzy_bench_report() {
        let c = two_doc_corpus();
        let gold = gold_partition(&c).unwrap();
        let r = bench(ResolverSpec::Fuzzy(FuzzyConfig::new(0.83).unwrap()), &c, 5, &gold).unwrap();
        assert_eq!(r.runs, 5);
        assert_eq!(r.seconds.len(), 5);
        assert_eq!(r.work.similarity_evals, 3);
        assert_eq!(r.efficiency, r.conll_f1 / r.mean_seconds);
        let single = bench(ResolverSpec::Fuzzy(FuzzyConfig::new(0.83).unwrap()), &c, 1, &gold).unwrap();
        assert_eq!(single.std_seconds, 0.0);
    }

    #[test]
    fn car_bench_counts_combinations() {
        let c = two_doc_corpus();
        let gold = gold_partition(&c).unwrap();
        let table = hashed_table(&c, 64, 10).unwrap();
        let spec = ResolverSpec::Car {
            table: &table,
            config: CarConfig::default(),
        };
        let r = bench(spec, &c, 2, &gold).unwrap();
        assert_eq!(r.work.combinations, 4);
        assert_eq!(r.resolver, "car");
    }

    #[test]
    fn zero_runs_rejected() {
        let c = two_doc_corpus();
        let gold = gold_partition(&c).unwrap();
        assert!(bench(ResolverSpec::Fuzzy(FuzzyConfig::new(0.5).unwrap()), &c, 0, &gold).is_err());
    }
}
