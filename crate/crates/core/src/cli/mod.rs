//! The `hclex` command line: one subcommand per pipeline stage.
//!
//! Every stage writes its outputs plus `run_config.<stage>.toml` into the
//! `--out` directory. Passing that file back with `--config` reruns the
//! stage with the same inputs and parameters.

mod config;

use std::collections::HashMap;
use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

pub use config::{fnv1a64, RunConfig};

use crate::cluster::{
    cluster_report, export_3d, lexicon_points, pca_project, prepare_points, silhouette_sweep,
    write_composition, write_sweep, ClusterSpace, KMeansOptions, PointSet,
};
use crate::corpus::{parse_combined, read_csv, Document, ParseReport, Record, RecordReader};
use crate::embedding::{
    build_vocab, read_embeddings, train_with_stats, write_embeddings, write_text_vectors, TrainConfig,
};
use crate::error::{Error, Result};
use crate::eval::{
    build_dataset, document_sentences, evaluate_scores, read_dataset, write_dataset, DatasetOptions,
};
use crate::lexicon::{
    apply_review, expand, load_lexicon, load_seeds, read_candidates, review_lexicon, save_acronyms,
    save_lexicon, similarity_histogram, validate_seeds, write_candidates, write_histogram,
    write_seeds, ExpandOptions, Lexicon, ReviewLedger, SeedList,
};
use crate::scorer::{
    aggregate_by_group, aggregate_by_period, read_scores, score_stream, write_aggregate, Bucket,
    CompileOptions, CompiledMatcher, Measure, ScoreWriter,
};
use crate::text::{learn_phrases, normalized_tokens};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DATA: i32 = 3;
pub const EXIT_INTERNAL: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "hclex", version, about = "Human-capital lexicon pipeline")]
struct Cli {
    /// TOML run configuration; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Tokenize a corpus and learn phrases.
    Prepare(PrepareArgs),
    /// Train embeddings on prepared token streams.
    Train(TrainArgs),
    /// Expand seed lists into lexicon candidates.
    Expand(ExpandArgs),
    /// Apply a review ledger to candidates or to a lexicon.
    Review(ReviewArgs),
    /// Silhouette sweep, k-means composition and 3-D export of a lexicon.
    Cluster(ClusterArgs),
    /// Score every document of a corpus against a lexicon.
    Score(ScoreArgs),
    /// Aggregate document scores by period and group.
    Aggregate(AggregateArgs),
    /// Build a labeled sentence dataset.
    Evaldataset(EvalDatasetArgs),
    /// Evaluate classifier probabilities against a dataset.
    Evalmetrics(EvalMetricsArgs),
    /// Write the bundled lexicon, acronyms and seed lists.
    ExportPublished,
}

#[derive(Debug, Args)]
struct PrepareArgs {
    #[arg(long)]
    corpus: Option<PathBuf>,
    #[arg(long)]
    phrase_min_count: Option<u64>,
    #[arg(long)]
    phrase_threshold: Option<f64>,
    #[arg(long)]
    phrase_passes: Option<usize>,
}

#[derive(Debug, Args)]
struct TrainArgs {
    #[arg(long)]
    tokens: Option<PathBuf>,
    #[arg(long)]
    dimension: Option<usize>,
    #[arg(long)]
    window: Option<usize>,
    #[arg(long)]
    negatives: Option<usize>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    min_count: Option<u64>,
    #[arg(long)]
    subsample: Option<f64>,
    #[arg(long)]
    learning_rate: Option<f64>,
    /// Also write `vectors.txt`.
    #[arg(long)]
    text_vectors: bool,
}

#[derive(Debug, Args)]
struct ExpandArgs {
    #[arg(long)]
    embeddings: Option<PathBuf>,
    /// Seed CSV; the bundled seeds when absent.
    #[arg(long)]
    seeds: Option<PathBuf>,
    #[arg(long)]
    threshold: Option<f64>,
    #[arg(long, overrides_with = "no_antonyms")]
    antonyms: bool,
    #[arg(long, overrides_with = "antonyms")]
    no_antonyms: bool,
}

#[derive(Debug, Args)]
struct ReviewArgs {
    #[arg(long, conflicts_with = "lexicon")]
    candidates: Option<PathBuf>,
    /// Review an existing lexicon instead of candidates.
    #[arg(long)]
    lexicon: Option<PathBuf>,
    #[arg(long)]
    ledger: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ClusterArgs {
    /// Lexicon CSV; the bundled lexicon when absent.
    #[arg(long)]
    lexicon: Option<PathBuf>,
    #[arg(long)]
    embeddings: Option<PathBuf>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    k_min: Option<usize>,
    #[arg(long)]
    k_max: Option<usize>,
    #[arg(long, value_parser = parse_space)]
    space: Option<ClusterSpace>,
    #[arg(long)]
    restarts: Option<usize>,
    #[arg(long)]
    max_iters: Option<usize>,
}

#[derive(Debug, Args)]
struct ScoreArgs {
    #[arg(long)]
    corpus: Option<PathBuf>,
    /// Lexicon CSV; the bundled lexicon when absent.
    #[arg(long)]
    lexicon: Option<PathBuf>,
    /// Drop a subcategory column, e.g. `covid`. Repeatable.
    #[arg(long)]
    exclude_subcategory: Vec<String>,
}

#[derive(Debug, Args)]
struct AggregateArgs {
    #[arg(long)]
    scores: Option<PathBuf>,
    /// Corpus whose filing dates place documents in periods.
    #[arg(long)]
    corpus: Option<PathBuf>,
    /// `doc_id,date` CSV used instead of corpus filing dates.
    #[arg(long)]
    dates: Option<PathBuf>,
    /// `doc_id,group` CSV.
    #[arg(long)]
    groups: Option<PathBuf>,
    /// `days:N` or `year`.
    #[arg(long)]
    bucket: Option<String>,
}

#[derive(Debug, Args)]
struct EvalDatasetArgs {
    #[arg(long)]
    hc_corpus: Option<PathBuf>,
    #[arg(long)]
    pool_corpus: Option<PathBuf>,
    #[arg(long)]
    neg_ratio: Option<usize>,
    #[arg(long)]
    train_frac: Option<f64>,
}

#[derive(Debug, Args)]
struct EvalMetricsArgs {
    #[arg(long)]
    dataset: Option<PathBuf>,
    /// `id,probability` CSV.
    #[arg(long)]
    scores: Option<PathBuf>,
}

fn parse_space(s: &str) -> std::result::Result<ClusterSpace, String> {
    match s {
        "raw" => Ok(ClusterSpace::Raw),
        "normalized" => Ok(ClusterSpace::Normalized),
        "projected" => Ok(ClusterSpace::Projected),
        _ => Err(format!("`{s}` is not raw, normalized or projected")),
    }
}

/// Failure of a CLI run, carrying its exit code.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Config(_) => EXIT_USAGE,
            ref e if e.is_data_error() => EXIT_DATA,
            _ => EXIT_INTERNAL,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Parses `args` (program name first), runs the stage and returns the exit
/// code. Failures print `ERROR <code>: <message>` on stderr.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            if !e.use_stderr() {
                let _ = e.print();
                return EXIT_OK;
            }
            let msg = e.to_string();
            let first = msg.lines().next().unwrap_or("").trim_start_matches("error: ");
            eprintln!("ERROR {EXIT_USAGE}: {first}");
            return EXIT_USAGE;
        }
    };
    match execute(cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let msg = e.message.replace('\n', " ");
            eprintln!("ERROR {}: {msg}", e.code);
            e.code
        }
    }
}

fn execute(cli: Cli) -> CliResult<()> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(w) = cli.workers {
        cfg.workers = w;
    }
    if cfg.workers == 0 {
        return Err(CliError::usage("--workers must be at least 1"));
    }
    let out = cli.out;
    let stage = match &cli.command {
        Command::Prepare(_) => "prepare",
        Command::Train(_) => "train",
        Command::Expand(_) => "expand",
        Command::Review(_) => "review",
        Command::Cluster(_) => "cluster",
        Command::Score(_) => "score",
        Command::Aggregate(_) => "aggregate",
        Command::Evaldataset(_) => "evaldataset",
        Command::Evalmetrics(_) => "evalmetrics",
        Command::ExportPublished => "export-published",
    };
    let mut ctx = Ctx { cfg, out };
    match cli.command {
        Command::Prepare(a) => ctx.prepare(a)?,
        Command::Train(a) => ctx.train(a)?,
        Command::Expand(a) => ctx.expand(a)?,
        Command::Review(a) => ctx.review(a)?,
        Command::Cluster(a) => ctx.cluster(a)?,
        Command::Score(a) => ctx.score(a)?,
        Command::Aggregate(a) => ctx.aggregate(a)?,
        Command::Evaldataset(a) => ctx.evaldataset(a)?,
        Command::Evalmetrics(a) => ctx.evalmetrics(a)?,
        Command::ExportPublished => ctx.export_published()?,
    }
    let path = ctx.out.join(format!("run_config.{stage}.toml"));
    fs::write(&path, ctx.cfg.to_toml()).map_err(|e| write_error(&path, e))?;
    Ok(())
}

fn write_error(path: &Path, e: std::io::Error) -> CliError {
    CliError {
        code: EXIT_INTERNAL,
        message: format!("cannot write {}: {e}", path.display()),
    }
}

fn open(path: &Path) -> CliResult<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| Error::invalid(format!("cannot open {}: {e}", path.display())).into())
}

fn is_csv(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"))
}

fn read_corpus(path: &Path) -> CliResult<ParseReport> {
    let input = open(path)?;
    if is_csv(path) {
        Ok(ParseReport {
            corpus: read_csv(input)?,
            ..Default::default()
        })
    } else {
        Ok(parse_combined(input)?)
    }
}

fn warn(msg: impl AsRef<str>) {
    eprintln!("WARN: {}", msg.as_ref());
}

struct Ctx {
    cfg: RunConfig,
    out: PathBuf,
}

impl Ctx {
    /// Resolves a named input: the flag wins over the config file. The
    /// resolved path is recorded in the saved config.
    fn input(&mut self, name: &str, flag: Option<PathBuf>) -> CliResult<Option<PathBuf>> {
        if let Some(p) = flag {
            self.cfg.inputs.insert(name.to_owned(), p.to_string_lossy().into_owned());
        }
        Ok(self.cfg.inputs.get(name).map(PathBuf::from))
    }

    fn required(&mut self, name: &str, flag: Option<PathBuf>) -> CliResult<PathBuf> {
        self.input(name, flag)?
            .ok_or_else(|| CliError::usage(format!("missing input --{}", name.replace('_', "-"))))
    }

    fn create(&self, name: &str) -> CliResult<BufWriter<File>> {
        fs::create_dir_all(&self.out).map_err(|e| write_error(&self.out, e))?;
        let path = self.out.join(name);
        File::create(&path)
            .map(BufWriter::new)
            .map_err(|e| write_error(&path, e))
    }

    fn write_json<T: Serialize>(&self, name: &str, value: &T) -> CliResult<()> {
        let mut w = self.create(name)?;
        serde_json::to_writer_pretty(&mut w, value).map_err(Error::from)?;
        writeln!(w).map_err(Error::from)?;
        w.flush().map_err(Error::from)?;
        Ok(())
    }

    fn lexicon(&mut self, flag: Option<PathBuf>) -> CliResult<Lexicon> {
        match self.input("lexicon", flag)? {
            Some(p) => Ok(load_lexicon(open(&p)?)?),
            None => Ok(Lexicon::published()),
        }
    }

    fn prepare(&mut self, a: PrepareArgs) -> CliResult<()> {
        let corpus_path = self.required("corpus", a.corpus)?;
        let pc = &mut self.cfg.prepare;
        if let Some(v) = a.phrase_min_count {
            pc.min_count = v;
        }
        if let Some(v) = a.phrase_threshold {
            pc.threshold = v;
        }
        if let Some(v) = a.phrase_passes {
            pc.passes = v;
        }
        pc.validate()?;
        let report = read_corpus(&corpus_path)?;
        for d in &report.duplicates {
            warn(format!("line {}: duplicate CIK {} skipped", d.line, d.cik));
        }
        for r in &report.rejected {
            warn(format!("line {}: CIK {} rejected: {}", r.line, r.cik, r.reason));
        }
        let streams: Vec<Vec<String>> =
            report.corpus.iter().map(|d| normalized_tokens(&d.text)).collect();
        let raw_tokens: usize = streams.iter().map(Vec::len).sum();
        let table = learn_phrases(&streams, &self.cfg.prepare)?;
        let mut w = self.create("tokens.txt")?;
        let mut merged_tokens = 0usize;
        for (d, s) in report.corpus.iter().zip(&streams) {
            let merged = table.apply(s, self.cfg.prepare.passes);
            merged_tokens += merged.len();
            writeln!(w, "{}\t{}", d.id(), merged.join(" ")).map_err(Error::from)?;
        }
        w.flush().map_err(Error::from)?;
        table.write_tsv(self.create("phrases.tsv")?)?;
        #[derive(Serialize)]
        struct Stats {
            documents: usize,
            raw_tokens: usize,
            merged_tokens: usize,
            phrases: usize,
            duplicates: Vec<String>,
            rejected: Vec<String>,
        }
        self.write_json(
            "prepare_stats.json",
            &Stats {
                documents: report.corpus.len(),
                raw_tokens,
                merged_tokens,
                phrases: table.len(),
                duplicates: report.duplicates.iter().map(|d| d.cik.clone()).collect(),
                rejected: report.rejected.iter().map(|r| r.cik.clone()).collect(),
            },
        )
    }

    fn train(&mut self, a: TrainArgs) -> CliResult<()> {
        let tokens_path = self.required("tokens", a.tokens)?;
        let t = &mut self.cfg.train;
        macro_rules! set {
            ($($f:ident),*) => { $(if let Some(v) = a.$f { t.$f = v; })* };
        }
        set!(dimension, window, negatives, epochs, min_count, subsample, learning_rate);
        if a.text_vectors {
            t.write_text = true;
        }
        if t.min_count == 0 {
            return Err(CliError::usage("--min-count must be at least 1"));
        }
        let t = self.cfg.train.clone();
        let streams = read_token_streams(&tokens_path)?;
        let vocab = build_vocab(&streams, t.min_count)?;
        let config = TrainConfig {
            dimension: t.dimension,
            window: t.window,
            negatives: t.negatives,
            epochs: t.epochs,
            learning_rate: t.learning_rate,
            min_learning_rate: t.min_learning_rate,
            subsample: t.subsample,
            seed: self.cfg.stage_seed("train"),
            workers: self.cfg.workers,
        };
        config
            .validate()
            .map_err(|e| CliError::usage(e.to_string()))?;
        let (matrix, stats) = train_with_stats(&streams, &vocab, &config)?;
        let mut w = self.create("embeddings.bin")?;
        write_embeddings(&mut w, &vocab, &matrix)?;
        if self.cfg.train.write_text {
            write_text_vectors(self.create("vectors.txt")?, &vocab, &matrix)?;
        }
        #[derive(Serialize)]
        struct Stats<'a> {
            vocabulary: usize,
            dimension: usize,
            seed: u64,
            #[serde(flatten)]
            train: &'a crate::embedding::TrainStats,
        }
        self.write_json(
            "train_stats.json",
            &Stats {
                vocabulary: vocab.len(),
                dimension: matrix.dim(),
                seed: config.seed,
                train: &stats,
            },
        )
    }

    fn seeds(&mut self, flag: Option<PathBuf>) -> CliResult<Vec<SeedList>> {
        let seeds = match self.input("seeds", flag)? {
            Some(p) => load_seeds(open(&p)?)?,
            None => SeedList::published(),
        };
        validate_seeds(&seeds)?;
        Ok(seeds)
    }

    fn expand(&mut self, a: ExpandArgs) -> CliResult<()> {
        let emb_path = self.required("embeddings", a.embeddings)?;
        let seeds = self.seeds(a.seeds)?;
        if let Some(t) = a.threshold {
            self.cfg.expand.threshold = t;
        }
        if a.antonyms {
            self.cfg.expand.antonyms = true;
        }
        if a.no_antonyms {
            self.cfg.expand.antonyms = false;
        }
        let t = self.cfg.expand.threshold;
        if !(0.0..=1.0).contains(&t) {
            return Err(CliError::usage(format!("--threshold {t} is outside [0, 1]")));
        }
        let (vocab, matrix) = read_embeddings(open(&emb_path)?)?;
        let opts = ExpandOptions {
            threshold: t,
            include_antonyms: self.cfg.expand.antonyms,
            workers: self.cfg.workers,
        };
        let expansion = expand(&matrix, &vocab, &seeds, &opts)?;
        for (cat, seed) in &expansion.missing_seeds {
            warn(format!("seed `{seed}` ({cat}) is not in the vocabulary"));
        }
        write_candidates(&expansion, self.create("candidates.csv")?)?;
        let bins = similarity_histogram(&matrix, &vocab, &seeds)?;
        write_histogram(&bins, self.create("histogram.csv")?)?;
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(self.create("missing_seeds.csv")?);
        w.write_record(["category", "seed"]).map_err(Error::from)?;
        for (cat, seed) in &expansion.missing_seeds {
            w.write_record([cat, seed]).map_err(Error::from)?;
        }
        w.flush().map_err(Error::from)?;
        Ok(())
    }

    fn review(&mut self, a: ReviewArgs) -> CliResult<()> {
        let ledger = match self.input("ledger", a.ledger)? {
            Some(p) => ReviewLedger::read_csv(open(&p)?)?,
            None => ReviewLedger::new(Vec::new())?,
        };
        let outcome = if a.lexicon.is_some() {
            let lex = self.lexicon(a.lexicon)?;
            review_lexicon(&lex, &ledger)?
        } else {
            let p = self.required("candidates", a.candidates)?;
            apply_review(&read_candidates(open(&p)?)?, &ledger)?
        };
        for t in &outcome.unknown_terms {
            warn(format!("ledger term `{t}` matched no entry"));
        }
        save_lexicon(&outcome.lexicon, self.create("lexicon.csv")?)?;
        Ok(())
    }

    fn cluster(&mut self, a: ClusterArgs) -> CliResult<()> {
        let lexicon = self.lexicon(a.lexicon)?;
        let emb_path = self.required("embeddings", a.embeddings)?;
        let c = &mut self.cfg.cluster;
        macro_rules! set {
            ($($f:ident),*) => { $(if let Some(v) = a.$f { c.$f = v; })* };
        }
        set!(k, k_min, k_max, space, restarts, max_iters);
        let c = self.cfg.cluster.clone();
        if c.restarts == 0 || c.max_iters == 0 {
            return Err(CliError::usage("--restarts and --max-iters must be at least 1"));
        }
        let (vocab, matrix) = read_embeddings(open(&emb_path)?)?;
        let (set, missing) = lexicon_points(&lexicon, &vocab, &matrix)?;
        if !missing.is_empty() {
            warn(format!("{} lexicon terms have no vector", missing.len()));
        }
        let opts = KMeansOptions {
            seed: self.cfg.stage_seed("cluster"),
            max_iters: c.max_iters,
            restarts: c.restarts,
            workers: self.cfg.workers,
        };
        let space = prepare_points(&set.points, c.space)?;
        let spaced = PointSet::new(set.labels.clone(), space, set.categories.clone())?;
        let sweep = silhouette_sweep(&spaced.points, c.k_min, c.k_max, &opts)?;
        write_sweep(&sweep, self.create("sweep.csv")?)?;
        let report = cluster_report(&spaced, c.k, &opts)?;
        write_composition(&report.composition, self.create("composition.csv")?)?;
        let (_, projected) = pca_project(&set.points, 3)?;
        let cats = set.categories.clone().unwrap_or_default();
        export_3d(&set.labels, &projected, &cats, self.create("points_3d.csv")?)?;
        self.write_json("cluster_report.json", &report)
    }

    fn score(&mut self, a: ScoreArgs) -> CliResult<()> {
        let corpus_path = self.required("corpus", a.corpus)?;
        let lexicon = self.lexicon(a.lexicon)?;
        if !a.exclude_subcategory.is_empty() {
            self.cfg.score.exclude_subcategories = a.exclude_subcategory;
        }
        let opts = CompileOptions {
            exclude_subcategories: self.cfg.score.exclude_subcategories.clone(),
        };
        let matcher = CompiledMatcher::compile(&lexicon, &opts)?;
        let mut writer = ScoreWriter::new(self.create("scores.csv")?, &matcher.column_labels())?;
        let mut problems: Vec<(String, String, String)> = Vec::new();
        let input = open(&corpus_path)?;
        let failures = if is_csv(&corpus_path) {
            let docs = read_csv(input)?.into_documents();
            score_stream(&matcher, dedupe(docs.into_iter().map(Ok), &mut problems), self.cfg.workers, |s| {
                writer.write(&s)
            })?
        } else {
            let records = RecordReader::new(input).filter_map(|r| match r {
                Ok(Record::Document { line, document }) => Some(Ok((line, document))),
                Ok(Record::Rejected(r)) => {
                    Some(Err((r.line.to_string(), r.cik, r.reason)))
                }
                Err(e) => Some(Err((String::new(), String::new(), e.to_string()))),
            });
            let mut rejected = Vec::new();
            let docs = records.filter_map(|r| match r {
                Ok((_, d)) => Some(Ok(d)),
                Err(p) => {
                    rejected.push(p);
                    None
                }
            });
            let f = score_stream(&matcher, dedupe(docs, &mut problems), self.cfg.workers, |s| {
                writer.write(&s)
            })?;
            problems.extend(rejected);
            f
        };
        writer.finish()?;
        for f in failures {
            problems.push((String::new(), String::new(), f.message));
        }
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(self.create("score_errors.csv")?);
        w.write_record(["line", "doc_id", "reason"]).map_err(Error::from)?;
        for (line, id, reason) in &problems {
            w.write_record([line, id, reason]).map_err(Error::from)?;
        }
        w.flush().map_err(Error::from)?;
        if !problems.is_empty() {
            warn(format!("{} records skipped, see score_errors.csv", problems.len()));
        }
        Ok(())
    }

    fn aggregate(&mut self, a: AggregateArgs) -> CliResult<()> {
        let scores_path = self.required("scores", a.scores)?;
        if let Some(b) = a.bucket {
            self.cfg.aggregate.bucket = b;
        }
        let bucket: Bucket = self.cfg.aggregate.bucket.parse()?;
        let (columns, scores) = read_scores(open(&scores_path)?)?;
        let dates = match (self.input("dates", a.dates)?, self.input("corpus", a.corpus)?) {
            (Some(p), _) => read_pairs(&p)?
                .into_iter()
                .map(|(id, d)| Ok((id, crate::corpus::parse_date(&d)?)))
                .collect::<Result<HashMap<_, _>>>()?,
            (None, Some(p)) => read_corpus(&p)?
                .corpus
                .iter()
                .map(|d| (d.id().to_owned(), d.header.filing_date))
                .collect(),
            (None, None) => return Err(CliError::usage("aggregate needs --corpus or --dates")),
        };
        let period = aggregate_by_period(&columns, &scores, &dates, bucket)?;
        if !period.unassigned.is_empty() {
            warn(format!("{} documents have no date", period.unassigned.len()));
        }
        write_aggregate(&period, Measure::MeanPercentage, self.create("period_pct.csv")?)?;
        write_aggregate(&period, Measure::MeanCount, self.create("period_count.csv")?)?;
        write_aggregate(&period, Measure::HitShare, self.create("period_share.csv")?)?;
        if let Some(p) = self.input("groups", a.groups)? {
            let groups: HashMap<String, String> = read_pairs(&p)?.into_iter().collect();
            let report = aggregate_by_group(&columns, &scores, &groups)?;
            if !report.unassigned.is_empty() {
                warn(format!("{} documents have no group", report.unassigned.len()));
            }
            write_aggregate(&report, Measure::HitShare, self.create("group_share.csv")?)?;
            write_aggregate(&report, Measure::MeanPercentage, self.create("group_pct.csv")?)?;
        }
        Ok(())
    }

    fn evaldataset(&mut self, a: EvalDatasetArgs) -> CliResult<()> {
        let hc = self.required("hc_corpus", a.hc_corpus)?;
        let pool = self.required("pool_corpus", a.pool_corpus)?;
        if let Some(v) = a.neg_ratio {
            self.cfg.evaldataset.neg_ratio = v;
        }
        if let Some(v) = a.train_frac {
            self.cfg.evaldataset.train_frac = v;
        }
        let hc = read_corpus(&hc)?.corpus;
        let pool = read_corpus(&pool)?.corpus;
        let opts = DatasetOptions {
            neg_ratio: self.cfg.evaldataset.neg_ratio,
            train_frac: self.cfg.evaldataset.train_frac,
            seed: self.cfg.stage_seed("evaldataset"),
        };
        let rows = build_dataset(hc.documents(), &document_sentences(pool.documents()), &opts)?;
        write_dataset(&rows, self.create("dataset.csv")?)?;
        Ok(())
    }

    fn evalmetrics(&mut self, a: EvalMetricsArgs) -> CliResult<()> {
        let dataset = self.required("dataset", a.dataset)?;
        let scores = self.required("probabilities", a.scores)?;
        let dataset = read_dataset(open(&dataset)?)?;
        let scores = crate::eval::read_scores(open(&scores)?)?;
        let report = evaluate_scores(&dataset, &scores)?;
        self.write_json("eval_report.json", &report)
    }

    fn export_published(&mut self) -> CliResult<()> {
        let lex = Lexicon::published();
        save_lexicon(&lex, self.create("hc_lexicon.csv")?)?;
        save_acronyms(lex.acronyms(), self.create("acronyms.csv")?)?;
        write_seeds(&SeedList::published(), self.create("seeds.csv")?)?;
        Ok(())
    }
}

/// Drops documents whose id was already seen, noting them as problems.
fn dedupe<'a, I>(
    docs: I,
    problems: &'a mut Vec<(String, String, String)>,
) -> impl Iterator<Item = Result<Document>> + 'a
where
    I: Iterator<Item = Result<Document>> + 'a,
{
    let mut seen = std::collections::HashSet::new();
    docs.filter(move |d| match d {
        Ok(d) if !seen.insert(d.id().to_owned()) => {
            problems.push((String::new(), d.id().to_owned(), "duplicate CIK".into()));
            false
        }
        _ => true,
    })
}

/// Reads `tokens.txt`: one `doc_id<TAB>space-separated tokens` line per document.
fn read_token_streams(path: &Path) -> CliResult<Vec<Vec<String>>> {
    let mut streams = Vec::new();
    for (i, line) in open(path)?.lines().enumerate() {
        let line = line.map_err(Error::from)?;
        let (_, toks) = line.split_once('\t').ok_or_else(|| Error::Parse {
            line: i + 1,
            message: "expected `doc_id<TAB>tokens`".into(),
        })?;
        streams.push(toks.split(' ').filter(|t| !t.is_empty()).map(String::from).collect());
    }
    Ok(streams)
}

/// Two-column CSV with a header row.
fn read_pairs(path: &Path) -> CliResult<Vec<(String, String)>> {
    let mut rdr = csv::Reader::from_reader(open(path)?);
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(Error::from)?;
        if rec.len() != 2 {
            return Err(Error::invalid(format!("{}: expected two columns", path.display())).into());
        }
        out.push((rec[0].to_owned(), rec[1].to_owned()));
    }
    Ok(out)
}
