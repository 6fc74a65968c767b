//! Command-line front end. Exit codes: 0 success, 1 data error, 2 usage error.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::analysis::{bench, compute_stats, tune_theta, write_curve_csv, LexsimMode, ResolverSpec};
use crate::car::{hashed_table, resolve_car, CarConfig};
use crate::embedding::{read_embeddings, EmbeddingTable};
use crate::error::{Error, Result};
use crate::fuzzy::{resolve_fuzzy, FuzzyConfig};
use crate::io::{read_corpus, read_partition, write_corpus, write_partition};
use crate::model::{gold_partition, validate_corpus, Corpus};
use crate::robustness::{apply_noise, NoiseConfig, NoiseKind, NoiseManifest};
use crate::scorer::score_all;

/// Dimension of the trigram-hash fallback embedder.
pub const HASH_DIM: usize = 256;

/// Noise rates of the sweep grid.
pub const SWEEP_RATES: [f64; 5] = [0.0, 0.25, 0.5, 0.75, 1.0];

#[derive(Debug, Parser)]
#[command(
    name = "swcoref",
    version,
    about = "Cross-document software-mention coreference toolkit"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Cluster the mentions of a corpus.
    Resolve {
        #[command(subcommand)]
        system: ResolveSystem,
    },
    /// Score a response partition against a key partition (JSON on stdout).
    Score {
        #[arg(long)]
        key: PathBuf,
        #[arg(long)]
        response: PathBuf,
    },
    /// Grid-search the fuzzy threshold against gold labels.
    Tune {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value_t = 0.01)]
        grid_step: f64,
        /// Tune result JSON.
        #[arg(long)]
        out: PathBuf,
        /// Optional `theta,conll_f1` curve.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Inject seeded noise into a corpus.
    Noise {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_enum)]
        kind: KindArg,
        #[arg(long)]
        rate: f64,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Corpus and gold-chain statistics.
    Stats {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        include_singletons: bool,
        /// Write JSON here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Time a resolver end to end and report F1 per second.
    Bench {
        #[command(subcommand)]
        system: ResolveSystem,
    },
    /// Both noise kinds at every sweep rate, fuzzy re-tuned per level.
    NoiseSweep {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0.01)]
        grid_step: f64,
        #[command(flatten)]
        car: CarArgs,
        /// CSV output.
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum KindArg {
    Boundary,
    Substitution,
}

impl From<KindArg> for NoiseKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Boundary => NoiseKind::Boundary,
            KindArg::Substitution => NoiseKind::Substitution,
        }
    }
}

#[derive(Debug, Subcommand)]
enum ResolveSystem {
    /// Lexical fuzzy matching.
    Fuzzy {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value_t = 0.83)]
        theta: f64,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Timed repetitions; used by `bench` only.
        #[arg(long, default_value_t = 5)]
        runs: usize,
    },
    /// Context-aware embedding clustering.
    Car {
        #[arg(long = "in")]
        input: PathBuf,
        #[command(flatten)]
        car: CarArgs,
        /// Embedding interchange file; trigram hashing is used when absent.
        #[arg(long)]
        embeddings: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Timed repetitions; used by `bench` only.
        #[arg(long, default_value_t = 5)]
        runs: usize,
    },
}

#[derive(Debug, Clone, Copy, Args, Serialize)]
struct CarArgs {
    #[arg(long, default_value_t = 0.6)]
    alpha: f64,
    #[arg(long, default_value_t = 0.4)]
    delta: f64,
    #[arg(long = "max-context", default_value_t = 10)]
    max_context: usize,
}

impl CarArgs {
    fn config(&self) -> Result<CarConfig> {
        let cfg = CarConfig {
            alpha: self.alpha,
            delta: self.delta,
            max_context_sentences: self.max_context,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Reproducibility record written next to every file output.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: Vec<String>,
    pub config: serde_json::Value,
    /// input path -> SHA-256 hex digest
    pub inputs: BTreeMap<String, String>,
    pub tool_version: String,
    pub timestamp: String,
}

pub const MANIFEST_NAME: &str = "manifest.json";

fn digest(path: &Path) -> Result<String> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

struct Ctx {
    argv: Vec<String>,
}

impl Ctx {
    fn manifest(&self, out: &Path, config: serde_json::Value, inputs: &[&Path]) -> Result<()> {
        let mut digests = BTreeMap::new();
        for p in inputs {
            digests.insert(p.display().to_string(), digest(p)?);
        }
        let manifest = RunManifest {
            command: self.argv.clone(),
            config,
            inputs: digests,
            tool_version: env!("CARGO_PKG_VERSION").to_owned(),
            timestamp: chrono::Utc::now().to_rfc3339(),
        };
        let dir = match out.parent() {
            Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
            _ => PathBuf::from("."),
        };
        let path = dir.join(MANIFEST_NAME);
        let mut text = serde_json::to_string_pretty(&manifest)?;
        text.push('\n');
        fs::write(&path, text).map_err(|e| Error::io(&path, e))
    }
}

fn load_valid_corpus(path: &Path) -> Result<Corpus> {
    let corpus = read_corpus(path)?;
    let report = validate_corpus(&corpus);
    if let Some(first) = report.first() {
        return Err(Error::InvalidCorpus(format!(
            "{}: {} violation(s), first: {first}",
            path.display(),
            report.len()
        )));
    }
    Ok(corpus)
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn emit_json(out: Option<&Path>, value: &impl Serialize) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    match out {
        Some(p) => write_text(p, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn car_table(corpus: &Corpus, embeddings: Option<&Path>, max_context: usize) -> Result<EmbeddingTable> {
    match embeddings {
        Some(p) => read_embeddings(p),
        None => {
            eprintln!("notice: no --embeddings given, using {HASH_DIM}-dim trigram hash embeddings");
            hashed_table(corpus, HASH_DIM, max_context)
        }
    }
}

fn run(ctx: &Ctx, command: Command) -> Result<()> {
    match command {
        Command::Resolve { system } => match system {
            ResolveSystem::Fuzzy { input, theta, out, .. } => {
                let cfg = FuzzyConfig::new(theta)?;
                let corpus = load_valid_corpus(&input)?;
                let out = out.ok_or_else(|| Error::InvalidConfig("--out is required".into()))?;
                write_partition(&out, &resolve_fuzzy(&corpus, cfg))?;
                ctx.manifest(&out, serde_json::json!({"system": "fuzzy", "theta": theta}), &[&input])
            }
            ResolveSystem::Car {
                input,
                car,
                embeddings,
                out,
                ..
            } => {
                let cfg = car.config()?;
                let corpus = load_valid_corpus(&input)?;
                let out = out.ok_or_else(|| Error::InvalidConfig("--out is required".into()))?;
                let table = car_table(&corpus, embeddings.as_deref(), cfg.max_context_sentences)?;
                write_partition(&out, &resolve_car(&corpus, &table, &cfg)?)?;
                let mut inputs: Vec<&Path> = vec![&input];
                inputs.extend(embeddings.as_deref());
                let config = serde_json::json!({
                    "system": "car",
                    "alpha": cfg.alpha,
                    "delta": cfg.delta,
                    "max_context": cfg.max_context_sentences,
                    "embeddings": embeddings.as_ref().map_or_else(|| format!("hash-trigram-{HASH_DIM}"), |p| p.display().to_string()),
                });
                ctx.manifest(&out, config, &inputs)
            }
        },
        Command::Score { key, response } => {
            let report = score_all(&read_partition(&key)?, &read_partition(&response)?)?;
            println!("{}", report.to_json());
            Ok(())
        }
        Command::Tune {
            input,
            grid_step,
            out,
            csv,
        } => {
            let corpus = load_valid_corpus(&input)?;
            let result = tune_theta(&corpus, grid_step)?;
            emit_json(Some(&out), &result)?;
            if let Some(csv) = &csv {
                write_curve_csv(csv, &result)?;
            }
            ctx.manifest(&out, serde_json::json!({"grid_step": grid_step}), &[&input])
        }
        Command::Noise {
            input,
            kind,
            rate,
            seed,
            out,
        } => {
            let cfg = NoiseConfig::new(kind.into(), rate, seed)?;
            let corpus = load_valid_corpus(&input)?;
            let outcome = apply_noise(&corpus, &cfg)?;
            write_corpus(&out, &outcome.corpus)?;
            let noise = NoiseManifest::new(&cfg, &outcome);
            ctx.manifest(&out, serde_json::to_value(&noise)?, &[&input])
        }
        Command::Stats {
            input,
            include_singletons,
            out,
        } => {
            let corpus = load_valid_corpus(&input)?;
            let mode = if include_singletons {
                LexsimMode::IncludeSingletons
            } else {
                LexsimMode::NonSingleton
            };
            let stats = compute_stats(&corpus, mode)?;
            emit_json(out.as_deref(), &stats)?;
            match &out {
                Some(o) => ctx.manifest(
                    o,
                    serde_json::json!({"include_singletons": include_singletons}),
                    &[&input],
                ),
                None => Ok(()),
            }
        }
        Command::Bench { system } => {
            let (report, input, out, config) = match system {
                ResolveSystem::Fuzzy {
                    input,
                    theta,
                    out,
                    runs,
                } => {
                    let cfg = FuzzyConfig::new(theta)?;
                    let corpus = load_valid_corpus(&input)?;
                    let gold = gold_partition(&corpus)?;
                    let report = bench(ResolverSpec::Fuzzy(cfg), &corpus, runs, &gold)?;
                    (
                        report,
                        input,
                        out,
                        serde_json::json!({"system": "fuzzy", "theta": theta, "runs": runs}),
                    )
                }
                ResolveSystem::Car {
                    input,
                    car,
                    embeddings,
                    out,
                    runs,
                } => {
                    let cfg = car.config()?;
                    let corpus = load_valid_corpus(&input)?;
                    let gold = gold_partition(&corpus)?;
                    let table = car_table(&corpus, embeddings.as_deref(), cfg.max_context_sentences)?;
                    let spec = ResolverSpec::Car {
                        table: &table,
                        config: cfg,
                    };
                    let report = bench(spec, &corpus, runs, &gold)?;
                    let config = serde_json::json!({"system": "car", "car": car, "runs": runs});
                    (report, input, out, config)
                }
            };
            emit_json(out.as_deref(), &report)?;
            match &out {
                Some(o) => ctx.manifest(o, config, &[&input]),
                None => Ok(()),
            }
        }
        Command::NoiseSweep {
            input,
            seed,
            grid_step,
            car,
            out,
        } => {
            let cfg = car.config()?;
            let corpus = load_valid_corpus(&input)?;
            let gold = gold_partition(&corpus)?;
            eprintln!("notice: context-aware rows use {HASH_DIM}-dim trigram hash embeddings");
            let mut w = csv::Writer::from_path(&out)?;
            let mut header = vec!["kind".to_owned(), "system".to_owned()];
            header.extend(SWEEP_RATES.iter().map(|r| format!("rate_{:.0}", r * 100.0)));
            header.push("delta".to_owned());
            w.write_record(&header)?;
            let mut stderr = std::io::stderr();
            for kind in NoiseKind::ALL {
                let mut fm = Vec::new();
                let mut ca = Vec::new();
                for &rate in &SWEEP_RATES {
                    let noisy = apply_noise(&corpus, &NoiseConfig::new(kind, rate, seed)?)?.corpus;
                    let tuned = crate::analysis::tune_theta_with(&noisy, &gold, grid_step)?;
                    let table = hashed_table(&noisy, HASH_DIM, cfg.max_context_sentences)?;
                    let car_f1 = score_all(&gold, &resolve_car(&noisy, &table, &cfg)?)?.conll_f1;
                    let _ = writeln!(
                        stderr,
                        "{kind} {:>3.0}%: fuzzy {:.4} (theta {:.2}), car {:.4}",
                        rate * 100.0,
                        tuned.best_f1,
                        tuned.best_theta,
                        car_f1
                    );
                    fm.push(tuned.best_f1);
                    ca.push(car_f1);
                }
                for (system, row) in [("fuzzy", fm), ("car", ca)] {
                    let mut record = vec![kind.to_string(), system.to_owned()];
                    record.extend(row.iter().map(|f| format!("{f:.4}")));
                    record.push(format!("{:.4}", row[0] - row[row.len() - 1]));
                    w.write_record(&record)?;
                }
            }
            w.flush().map_err(|e| Error::io(&out, e))?;
            let config = serde_json::json!({"seed": seed, "grid_step": grid_step, "car": car, "rates": SWEEP_RATES});
            ctx.manifest(&out, config, &[&input])
        }
    }
}

/// Parse `argv` (including the program name) and run. Returns the exit code.
pub fn dispatch<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let _ = env_logger::Builder::new()
        .filter_level(log::LevelFilter::Warn)
        .format_timestamp(None)
        .try_init();
    let ctx = Ctx {
        argv: argv.iter().map(|a| a.to_string_lossy().into_owned()).collect(),
    };
    match run(&ctx, cli.command) {
        Ok(()) => 0,
        Err(e @ Error::InvalidConfig(_)) => {
            eprintln!("error: {e}");
            2
        }
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}
