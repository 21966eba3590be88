//! `dialaug` command line: ingest, augment, stats and validate.
//!
//! Exit codes: 0 ok, 1 validation failures, 2 unreadable or malformed input
//! and bad arguments, 3 the pipeline cannot produce output for these seeds.

pub mod config;

use std::collections::{BTreeMap, BTreeSet};
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use dialaug_core::bank::LinkSemantics;
use dialaug_core::corpus::{to_json, InputSchema};
use dialaug_core::pipeline::{augment, PipelineError};
use dialaug_core::realizer::{Provenance, RealizationMode};
use dialaug_core::stats::corpus_stats;
use dialaug_core::{multiwoz, validate_dialogue, Corpus, CorpusError};
use serde::Serialize;

use crate::config::{split_list, CategoricalList, FileConfig, RunConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_INFEASIBLE: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "dialaug", version, about = "Few-shot task-oriented dialogue augmentation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Convert a corpus (native or MultiWOZ data.json) into the normalized layout.
    Ingest(IngestArgs),
    /// Sample seed dialogues and write synthetic dialogues built from them.
    Augment(Box<AugmentArgs>),
    /// Print per-domain corpus statistics.
    Stats(StatsArgs),
    /// Check dialogues against the data-model invariants.
    Validate(ValidateArgs),
}

#[derive(Args, Debug)]
pub struct IngestArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub output: PathBuf,
    /// auto, native or multiwoz
    #[arg(long, default_value = "auto")]
    pub schema: InputSchema,
    /// File of dialogue ids to leave out (e.g. a MultiWOZ split list). Repeatable.
    #[arg(long)]
    pub exclude: Vec<PathBuf>,
}

#[derive(Args, Debug, Default)]
pub struct AugmentArgs {
    /// Flat key-value (TOML) file with the same keys as the flags.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long)]
    pub domain: Option<String>,
    #[arg(long)]
    pub shots: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub ratio: Option<f64>,
    #[arg(long, value_parser = ["equality", "superset"])]
    pub link_semantics: Option<String>,
    #[arg(long)]
    pub max_depth: Option<usize>,
    #[arg(long)]
    pub max_nodes: Option<usize>,
    #[arg(long)]
    pub reuse: Option<usize>,
    /// Comma-separated slot labels kept lexicalized.
    #[arg(long)]
    pub categorical: Option<String>,
    #[arg(long)]
    pub tau: Option<f64>,
    #[arg(long, value_parser = ["exhaustive", "sampled"])]
    pub mode: Option<String>,
    #[arg(long)]
    pub cap: Option<usize>,
    /// Write the seed dialogues before the synthetic ones.
    #[arg(long)]
    pub include_seed: bool,
    /// Treat dropped belief labels as errors when checking seeds and output.
    #[arg(long)]
    pub strict: bool,
    /// Only sample dialogues that touch no other domain.
    #[arg(long)]
    pub single_domain: bool,
    #[arg(long)]
    pub threads: Option<usize>,
    /// Where to write the provenance sidecar.
    #[arg(long)]
    pub provenance: Option<PathBuf>,
    #[arg(long)]
    pub dump_bank: Option<PathBuf>,
    #[arg(long)]
    pub dump_tree: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct StatsArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub json: bool,
    /// Print per-slot fill counts (always on for synthetic corpora).
    #[arg(long)]
    pub fill_counts: bool,
}

#[derive(Args, Debug)]
pub struct ValidateArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub strict: bool,
    /// Print the reports as JSON.
    #[arg(long)]
    pub json: bool,
}

/// Error tagged with the exit code it maps to.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub error: anyhow::Error,
}

impl Failure {
    fn input(error: impl Into<anyhow::Error>) -> Self {
        Failure {
            code: EXIT_INPUT,
            error: error.into(),
        }
    }
}

impl From<CorpusError> for Failure {
    fn from(e: CorpusError) -> Self {
        let code = match e {
            CorpusError::InsufficientData { .. } => EXIT_INFEASIBLE,
            _ => EXIT_INPUT,
        };
        Failure {
            code,
            error: e.into(),
        }
    }
}

impl From<PipelineError> for Failure {
    fn from(e: PipelineError) -> Self {
        let code = match &e {
            PipelineError::Sample(CorpusError::InsufficientData { .. }) => EXIT_INFEASIBLE,
            PipelineError::Sample(_) => EXIT_INPUT,
            PipelineError::Realize(dialaug_core::realizer::RealizeError::BadBudget(_)) => EXIT_INPUT,
            PipelineError::Compose(dialaug_core::composer::ComposeError::BadLimit(_)) => EXIT_INPUT,
            _ => EXIT_INFEASIBLE,
        };
        Failure {
            code,
            error: e.into(),
        }
    }
}

type CmdResult = Result<i32, Failure>;

/// Parses `args` (program name first) and runs the command. Returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
        }
    };
    let result = match cli.command {
        Command::Ingest(a) => cmd_ingest(&a),
        Command::Augment(a) => cmd_augment(&a),
        Command::Stats(a) => cmd_stats(&a),
        Command::Validate(a) => cmd_validate(&a),
    };
    match result {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            f.code
        }
    }
}

fn write_file(path: &Path, contents: &str) -> Result<(), Failure> {
    std::fs::write(path, contents)
        .with_context(|| format!("cannot write {}", path.display()))
        .map_err(Failure::input)
}

fn domain_counts(corpus: &Corpus) -> BTreeMap<&str, (usize, usize)> {
    let mut counts: BTreeMap<&str, (usize, usize)> = BTreeMap::new();
    for d in &corpus.dialogues {
        for domain in &d.domains {
            let entry = counts.entry(domain.as_str()).or_default();
            entry.0 += 1;
            entry.1 += d.pairs.len();
        }
    }
    counts
}

pub fn cmd_ingest(args: &IngestArgs) -> CmdResult {
    let json = std::fs::read_to_string(&args.input).map_err(|source| CorpusError::Io {
        path: args.input.clone(),
        source,
    })?;
    let origin = args.input.display().to_string();
    let mut exclude = BTreeSet::new();
    for path in &args.exclude {
        let text = std::fs::read_to_string(path).map_err(|source| CorpusError::Io {
            path: path.clone(),
            source,
        })?;
        exclude.extend(multiwoz::read_id_list(&text));
    }
    let is_multiwoz = match args.schema {
        InputSchema::MultiWoz => true,
        InputSchema::Native => false,
        InputSchema::Auto => json.trim_start().starts_with('{'),
    };
    let corpus = if is_multiwoz {
        multiwoz::parse(&json, &origin, &exclude)?
    } else {
        let mut c = dialaug_core::corpus::parse_corpus(&json, InputSchema::Native, &origin)?;
        c.dialogues.retain(|d| !exclude.contains(&d.id));
        c
    };
    write_file(&args.output, &to_json(&corpus.dialogues))?;
    println!("{} dialogues, {} pairs", corpus.len(), corpus.pair_count());
    for (domain, (dialogues, pairs)) in domain_counts(&corpus) {
        println!("{domain}: {dialogues} dialogues, {pairs} pairs");
    }
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct Sidecar<'a> {
    config: &'a RunConfig,
    summary: &'a dialaug_core::StageSummary,
    dialogues: BTreeMap<&'a str, &'a Provenance>,
}

fn augment_flags(a: &AugmentArgs) -> Result<FileConfig, Failure> {
    let parse_err = |e: String| Failure::input(anyhow::anyhow!(e));
    Ok(FileConfig {
        input: a.input.clone(),
        output: a.output.clone(),
        domain: a.domain.clone(),
        shots: a.shots,
        seed: a.seed,
        ratio: a.ratio,
        link_semantics: a
            .link_semantics
            .as_deref()
            .map(str::parse::<LinkSemantics>)
            .transpose()
            .map_err(parse_err)?,
        max_depth: a.max_depth,
        max_nodes: a.max_nodes,
        reuse: a.reuse,
        categorical: a.categorical.as_deref().map(|s| CategoricalList::List(split_list(s))),
        tau: a.tau,
        mode: a
            .mode
            .as_deref()
            .map(str::parse::<RealizationMode>)
            .transpose()
            .map_err(parse_err)?,
        cap: a.cap,
        include_seed: a.include_seed.then_some(true),
        strict: a.strict.then_some(true),
        single_domain: a.single_domain.then_some(true),
        threads: a.threads,
        provenance: a.provenance.clone(),
    })
}

fn count_invalid<'a>(dialogues: impl IntoIterator<Item = &'a dialaug_core::Dialogue>, strict: bool) -> (usize, usize) {
    let mut errors = 0;
    let mut warnings = 0;
    for d in dialogues {
        let r = validate_dialogue(d, strict);
        errors += r.errors().count();
        warnings += r.warnings().count();
    }
    (errors, warnings)
}

pub fn cmd_augment(args: &AugmentArgs) -> CmdResult {
    let flags = augment_flags(args)?;
    let file = match &args.config {
        Some(path) => FileConfig::load(path).map_err(Failure::input)?,
        None => FileConfig::default(),
    };
    let threads = flags.threads.or(file.threads);
    let provenance_path = flags.provenance.clone().or(file.provenance.clone());
    let config = RunConfig::resolve(flags, file).map_err(Failure::input)?;

    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        pool = pool.num_threads(n.max(1));
    }
    let pool = pool.build().map_err(Failure::input)?;
    pool.install(|| run_augment(&config, provenance_path.as_deref(), args))
}

fn run_augment(config: &RunConfig, provenance_path: Option<&Path>, args: &AugmentArgs) -> CmdResult {
    let corpus = dialaug_core::load_corpus(&config.input, InputSchema::Auto)?;
    let result = augment(&corpus, &config.augment_config())?;
    let summary = result.summary();

    println!(
        "sample: {} seed dialogues, {} pairs (domain {}, seed {})",
        summary.seed_dialogues, summary.seed_pairs, config.domain, config.seed
    );
    let (seed_errors, seed_warnings) = count_invalid(&result.seed.dialogues, config.strict);
    if seed_warnings > 0 {
        eprintln!("warning: seed dialogues have {seed_warnings} validation warnings");
    }
    println!(
        "slots: {} categorical, {} with harvested values",
        summary.categorical_labels, summary.dictionary_labels
    );
    println!(
        "bank: {} templates built, {} rejected",
        summary.templates_built, summary.templates_rejected
    );
    match result.tree.truncated {
        Some(t) => println!("tree: {} nodes (truncated: {t:?})", summary.tree_nodes),
        None => println!("tree: {} nodes", summary.tree_nodes),
    }
    println!("compose: {} dialogue templates", summary.dialogue_templates);
    println!("realize: {} of {} dialogues emitted", summary.emitted, summary.requested);
    if result.generation.exhausted {
        eprintln!(
            "warning: space exhausted: only {} distinct dialogues exist, {} requested",
            summary.emitted, summary.requested
        );
    }

    if let Some(path) = &args.dump_bank {
        write_file(path, &result.bank.dump_json())?;
    }
    if let Some(path) = &args.dump_tree {
        write_file(path, &result.tree.dump_jsonl())?;
    }

    let synthetic = result.generation.dialogues.iter().map(|s| &s.dialogue);
    let main = if config.include_seed {
        to_json(result.seed.dialogues.iter().chain(synthetic))
    } else {
        to_json(synthetic)
    };
    write_file(&config.output, &main)?;

    if let Some(path) = provenance_path {
        let sidecar = Sidecar {
            config,
            summary: &summary,
            dialogues: result
                .generation
                .dialogues
                .iter()
                .map(|s| (s.dialogue.id.as_str(), &s.provenance))
                .collect(),
        };
        let mut text = serde_json::to_string_pretty(&sidecar).map_err(Failure::input)?;
        text.push('\n');
        write_file(path, &text)?;
    }

    let (out_errors, _) = count_invalid(result.generation.dialogues.iter().map(|s| &s.dialogue), true);
    if out_errors > 0 {
        eprintln!("error: {out_errors} validation errors in synthetic output");
        return Ok(EXIT_VALIDATION);
    }
    if config.strict && seed_errors > 0 {
        eprintln!("error: seed dialogues have {seed_errors} validation errors under --strict");
        return Ok(EXIT_VALIDATION);
    }
    Ok(EXIT_OK)
}

pub fn cmd_stats(args: &StatsArgs) -> CmdResult {
    let corpus = dialaug_core::load_corpus(&args.input, InputSchema::Auto)?;
    let stats = corpus_stats(&corpus);
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    if args.json {
        let text = serde_json::to_string_pretty(&stats).map_err(Failure::input)?;
        writeln!(out, "{text}").map_err(Failure::input)?;
        return Ok(EXIT_OK);
    }
    let synthetic = !corpus.is_empty() && corpus.dialogues.iter().all(|d| d.id.starts_with("syn-"));
    let show_fill = args.fill_counts || synthetic;
    let io = |e: std::io::Error| Failure::input(e);
    writeln!(out, "{} dialogues, {} pairs", stats.dialogues, stats.pairs).map_err(io)?;
    for (domain, s) in &stats.domains {
        writeln!(
            out,
            "{domain}: {} dialogues, {:.1} turns/dialogue, {:.1} values/slot",
            s.dialogues, s.turns_per_dialogue, s.values_per_slot
        )
        .map_err(io)?;
        let slots: Vec<&str> = s.slots.iter().map(|l| l.as_str()).collect();
        writeln!(out, "  slots: {}", slots.join(", ")).map_err(io)?;
        if show_fill {
            let fill: Vec<String> = s.slot_fill.iter().map(|(l, n)| format!("{l}={n}")).collect();
            writeln!(out, "  fill: {}", fill.join(", ")).map_err(io)?;
        }
    }
    Ok(EXIT_OK)
}

pub fn cmd_validate(args: &ValidateArgs) -> CmdResult {
    let corpus = dialaug_core::load_corpus(&args.input, InputSchema::Auto)?;
    let reports: Vec<_> = corpus
        .dialogues
        .iter()
        .map(|d| validate_dialogue(d, args.strict))
        .filter(|r| !r.is_empty())
        .collect();
    let errors: usize = reports.iter().map(|r| r.errors().count()).sum();
    let warnings: usize = reports.iter().map(|r| r.warnings().count()).sum();
    if args.json {
        let text = serde_json::to_string_pretty(&reports).map_err(Failure::input)?;
        println!("{text}");
    } else {
        for r in &reports {
            for issue in &r.issues {
                let at = issue.pair_index.map(|i| format!(" pair {i}")).unwrap_or_default();
                let kind = serde_json::to_string(&issue.kind).unwrap_or_default();
                println!("{:?} {}{at}: {kind}", issue.severity, r.dialogue_id);
            }
        }
        println!(
            "{} dialogues checked: {errors} errors, {warnings} warnings",
            corpus.len()
        );
    }
    Ok(if errors > 0 { EXIT_VALIDATION } else { EXIT_OK })
}
